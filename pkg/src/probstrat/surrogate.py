"""Piecewise linear convex surrogates aligned to a set of probability thresholds.

Each class loss is the pointwise maximum of zero and K affine segments,
one segment per threshold.  The segment pair for threshold pi_k encodes
pi_k through the slope ratio B-/(B- + B+) = pi_k, so minimizing the
surrogate recovers the band partition at exactly the targeted thresholds
and no others.  The default parameterization takes each segment tangent
to the logistic loss at log(pi/(1-pi)), which satisfies all alignment
conditions for any threshold set; a single threshold at 1/2 reduces to a
rescaled hinge loss.

Alignment conditions checked by :func:`check_consistency`:

* C1 - positive-class slopes negative and non-decreasing across
  thresholds, negative-class slopes negative and non-increasing;
* C2 - the two class losses kink at mirrored margin values, and the
  kinks (including the outer zero crossings) are strictly ordered with
  one prediction threshold strictly inside each kink interval;
* C3 - the slope ratio at each threshold equals the threshold.
"""

import json
from dataclasses import dataclass

import numpy as np

from .bands import Boundaries

__all__ = [
    "SurrogateSpec",
    "ConsistencyReport",
    "ConsistencyError",
    "logistic_params",
    "build_surrogate",
    "logistic_surrogate",
    "eval_surrogate",
    "subgradient",
    "check_consistency",
    "risk_constant",
    "save_spec",
    "load_spec",
]

#: Absolute tolerance on the slope-ratio and kink-alignment identities.
#: Parameters are closed form, so only rounding error is expected.
CONSISTENCY_TOL = 1e-9


class ConsistencyError(ValueError):
    """Segment parameters violate the surrogate alignment conditions."""

    def __init__(self, message: str, report: "ConsistencyReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of the alignment checks, with per-threshold diagnostics.

    ``eq8_residuals[k]`` is the slope ratio of the active segments at the
    k-th prediction threshold minus the threshold itself;
    ``violating_indices`` lists 0-based threshold indices implicated in
    any failed condition.
    """

    c1_ok: bool
    c2_ok: bool
    c3_ok: bool
    eq8_residuals: np.ndarray
    violating_indices: list[int]

    @property
    def ok(self) -> bool:
        return self.c1_ok and self.c2_ok and self.c3_ok


@dataclass(frozen=True)
class SurrogateSpec:
    """Piecewise linear surrogate pair for one set of probability thresholds.

    ``pos_*`` arrays give intercepts/slopes of the positive-class segments,
    ``neg_*`` the negative-class ones (all indexed like the thresholds).
    ``thresholds`` are the margin values where the optimal prediction
    crosses each probability threshold; ``hinges`` are the K+1 kink
    locations on the margin axis, outer entries being the zero crossings
    of the two class losses.  Construction validates shapes only; use
    :func:`build_surrogate` to get a verified spec.
    """

    boundaries: Boundaries
    pos_intercepts: np.ndarray
    pos_slopes: np.ndarray
    neg_intercepts: np.ndarray
    neg_slopes: np.ndarray
    thresholds: np.ndarray
    hinges: np.ndarray

    def __post_init__(self):
        K = self.boundaries.K
        for name in ("pos_intercepts", "pos_slopes", "neg_intercepts", "neg_slopes", "thresholds"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            if arr.shape != (K,):
                raise ValueError(f"{name} must have one entry per threshold (K={K})")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        hinges = np.ascontiguousarray(np.asarray(self.hinges, dtype=float))
        if hinges.shape != (K + 1,):
            raise ValueError(f"hinges must have K+1 entries (K={K})")
        hinges.flags.writeable = False
        object.__setattr__(self, "hinges", hinges)

    @property
    def K(self) -> int:
        return self.boundaries.K

    def segments(self, y: int) -> tuple[np.ndarray, np.ndarray]:
        """(intercepts, slopes) of the affine segments for class ``y``."""
        if y == 1:
            return self.pos_intercepts, self.pos_slopes
        if y == -1:
            return self.neg_intercepts, self.neg_slopes
        raise ValueError(f"label must be -1 or +1, got {y}")

    def to_dict(self) -> dict:
        return {
            "pi": self.boundaries.values.tolist(),
            "A_pos": self.pos_intercepts.tolist(),
            "B_pos": self.pos_slopes.tolist(),
            "A_neg": self.neg_intercepts.tolist(),
            "B_neg": self.neg_slopes.tolist(),
            "delta": self.thresholds.tolist(),
            "hinges": self.hinges.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SurrogateSpec":
        return cls(
            boundaries=Boundaries(d["pi"]),
            pos_intercepts=np.asarray(d["A_pos"], dtype=float),
            pos_slopes=np.asarray(d["B_pos"], dtype=float),
            neg_intercepts=np.asarray(d["A_neg"], dtype=float),
            neg_slopes=np.asarray(d["B_neg"], dtype=float),
            thresholds=np.asarray(d["delta"], dtype=float),
            hinges=np.asarray(d["hinges"], dtype=float),
        )


def save_spec(path, spec: SurrogateSpec) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


def load_spec(path) -> SurrogateSpec:
    with open(path) as fh:
        return SurrogateSpec.from_dict(json.load(fh))


def logistic_params(pi: float) -> tuple[float, float, float, float]:
    """Tangent-line parameters (A+, B+, A-, B-) to the logistic loss at threshold ``pi``.

    The positive-class segment is tangent to log(1 + exp(-z)) at
    z = log(pi/(1-pi)); its intercept is the binary entropy of pi and its
    slope is -(1-pi).  The negative-class segment mirrors it (tangent at
    the complementary threshold), so A-(pi) equals A+(pi) and
    B-(pi) = -pi.
    """
    pi = float(pi)
    if not 0.0 < pi < 1.0:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {pi}")
    q = 1.0 - pi
    entropy = -pi * np.log(pi) - q * np.log(q)
    return float(entropy), -q, float(entropy), -pi


def _hinge_points(boundaries, pos_intercepts, pos_slopes, neg_intercepts, neg_slopes):
    """K+1 kink locations on the margin axis, outer entries = zero crossings."""
    K = boundaries.K
    hinges = np.empty(K + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        hinges[0] = neg_intercepts[0] / neg_slopes[0]
        hinges[K] = -pos_intercepts[K - 1] / pos_slopes[K - 1]
        for k in range(1, K):
            hinges[k] = (pos_intercepts[k - 1] - pos_intercepts[k]) / (
                pos_slopes[k] - pos_slopes[k - 1]
            )
    return hinges


def build_surrogate(boundaries: Boundaries, params, thresholds=None) -> SurrogateSpec:
    """Assemble and verify a surrogate from a per-threshold parameter table.

    Parameters
    ----------
    boundaries : Boundaries
        Probability thresholds, one segment pair each.
    params : array_like, shape (K, 4)
        Rows of (A+, B+, A-, B-); both slopes must be strictly negative.
    thresholds : array_like, optional
        Prediction thresholds on the margin axis.  Defaults to the
        midpoints of the kink intervals, which maximizes the minimum
        kink distance (and with it the quality of the excess-risk
        constant); pass explicit values to use a different valid choice.

    Raises
    ------
    ConsistencyError
        If any alignment condition fails; the exception carries the
        :class:`ConsistencyReport`.
    """
    K = boundaries.K
    table = np.asarray(params, dtype=float)
    if table.shape != (K, 4):
        raise ValueError(f"params must have shape ({K}, 4) of (A+, B+, A-, B-) rows")
    a_pos, b_pos, a_neg, b_neg = (table[:, j].copy() for j in range(4))
    if np.any(b_pos >= 0.0) or np.any(b_neg >= 0.0):
        raise ValueError("segment slopes must be strictly negative")

    hinges = _hinge_points(boundaries, a_pos, b_pos, a_neg, b_neg)
    if thresholds is None:
        thresholds = 0.5 * (hinges[:-1] + hinges[1:])
    spec = SurrogateSpec(
        boundaries=boundaries,
        pos_intercepts=a_pos,
        pos_slopes=b_pos,
        neg_intercepts=a_neg,
        neg_slopes=b_neg,
        thresholds=np.asarray(thresholds, dtype=float),
        hinges=hinges,
    )
    report = check_consistency(spec)
    if not report.ok:
        failed = [c for c, ok in (("C1", report.c1_ok), ("C2", report.c2_ok), ("C3", report.c3_ok)) if not ok]
        raise ConsistencyError(
            f"surrogate violates {', '.join(failed)} at threshold indices {report.violating_indices}",
            report,
        )
    return spec


def logistic_surrogate(boundaries: Boundaries) -> SurrogateSpec:
    """Logistic-tangent surrogate for the given thresholds.

    Prediction thresholds sit at the tangent points log(pi/(1-pi)); the
    result satisfies the alignment conditions for any threshold set.
    """
    pi = boundaries.values
    params = np.array([logistic_params(v) for v in pi])
    thresholds = np.log(pi / (1.0 - pi))
    return build_surrogate(boundaries, params, thresholds)


def eval_surrogate(spec: SurrogateSpec, y: int, z):
    """Surrogate loss for class ``y`` at functional margin ``z``.

    Pointwise maximum of zero and the class's K affine segments; convex,
    continuous and non-increasing in ``z``.  Accepts scalar or array ``z``.
    """
    a, b = spec.segments(y)
    zz = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zz)):
        raise ValueError("margin must be finite")
    vals = a + b * zz[..., None]
    out = np.maximum(0.0, np.max(vals, axis=-1))
    return float(out) if zz.ndim == 0 else out


def subgradient(spec: SurrogateSpec, y: int, z):
    """Slope of the active segment of the class-``y`` loss at margin ``z``.

    Returns 0 where the zero branch attains the maximum.  At a kink where
    two segments tie, returns the slope of the segment with the larger
    threshold index.  The result is always a valid subgradient of
    :func:`eval_surrogate` at ``z``.  Accepts scalar or array ``z``.
    """
    a, b = spec.segments(y)
    zz = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zz)):
        raise ValueError("margin must be finite")
    vals = a + b * zz[..., None]
    # argmax on the reversed axis picks the largest index among ties
    K = a.size
    rev = np.argmax(vals[..., ::-1], axis=-1)
    active = K - 1 - rev
    best = np.take_along_axis(vals, active[..., None], axis=-1)[..., 0]
    out = np.where(best <= 0.0, 0.0, b[active])
    return float(out) if zz.ndim == 0 else out


def check_consistency(spec: SurrogateSpec) -> ConsistencyReport:
    """Verify the alignment conditions C1-C3 and the slope-ratio identity.

    The ratio B-/(B- + B+) must equal each threshold (C3), and evaluating
    the actual one-sided derivatives of the assembled losses at the
    prediction thresholds must reproduce the same identity, which also
    confirms the thresholds sit inside the correct kink interval.
    """
    pi = spec.boundaries.values
    K = spec.K
    bad: set[int] = set()

    # C1: strictly negative slopes, monotone across thresholds
    c1_ok = True
    if np.any(spec.pos_slopes >= 0.0) or np.any(spec.neg_slopes >= 0.0):
        c1_ok = False
        bad.update(np.nonzero(spec.pos_slopes >= 0.0)[0].tolist())
        bad.update(np.nonzero(spec.neg_slopes >= 0.0)[0].tolist())
    if K > 1:
        pos_bad = np.nonzero(np.diff(spec.pos_slopes) < 0.0)[0]
        neg_bad = np.nonzero(np.diff(spec.neg_slopes) > 0.0)[0]
        if pos_bad.size or neg_bad.size:
            c1_ok = False
            bad.update((pos_bad + 1).tolist())
            bad.update((neg_bad + 1).tolist())

    # C2: mirrored kinks, strict ordering, thresholds interior
    c2_ok = True
    hinges = _hinge_points(
        spec.boundaries,
        spec.pos_intercepts,
        spec.pos_slopes,
        spec.neg_intercepts,
        spec.neg_slopes,
    )
    if not np.all(np.isfinite(hinges)):
        c2_ok = False
        bad.update(np.nonzero(~np.isfinite(hinges))[0].tolist())
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(1, K):
                neg_hinge = (spec.neg_intercepts[k - 1] - spec.neg_intercepts[k]) / (
                    spec.neg_slopes[k] - spec.neg_slopes[k - 1]
                )
                if not np.isfinite(neg_hinge) or abs(-neg_hinge - hinges[k]) > CONSISTENCY_TOL:
                    c2_ok = False
                    bad.add(k)
        if np.any(np.diff(hinges) <= 0.0):
            c2_ok = False
            bad.update(np.nonzero(np.diff(hinges) <= 0.0)[0].tolist())
        inside = (spec.thresholds > hinges[:-1]) & (spec.thresholds < hinges[1:])
        if not np.all(inside):
            c2_ok = False
            bad.update(np.nonzero(~inside)[0].tolist())
        if not np.allclose(hinges, spec.hinges, rtol=0.0, atol=CONSISTENCY_TOL):
            c2_ok = False

    # C3: slope ratio equals the threshold
    ratio = spec.neg_slopes / (spec.neg_slopes + spec.pos_slopes)
    c3_resid = ratio - pi
    c3_bad = np.nonzero(np.abs(c3_resid) > CONSISTENCY_TOL)[0]
    c3_ok = c3_bad.size == 0
    bad.update(c3_bad.tolist())

    # Slope-ratio identity at the prediction thresholds, via the actual
    # derivatives of the assembled losses
    dpos = np.array([subgradient(spec, 1, t) for t in spec.thresholds])
    dneg = np.array([subgradient(spec, -1, -t) for t in spec.thresholds])
    with np.errstate(divide="ignore", invalid="ignore"):
        eq8 = dneg / (dneg + dpos) - pi
    if np.any(~np.isfinite(eq8)) or np.any(np.abs(eq8) > CONSISTENCY_TOL):
        finite = np.isfinite(eq8)
        bad.update(np.nonzero(~finite)[0].tolist())
        bad.update(np.nonzero(finite & (np.abs(np.where(finite, eq8, 0.0)) > CONSISTENCY_TOL))[0].tolist())
        c3_ok = False

    return ConsistencyReport(
        c1_ok=c1_ok,
        c2_ok=c2_ok,
        c3_ok=c3_ok,
        eq8_residuals=eq8,
        violating_indices=sorted(bad),
    )


def risk_constant(spec: SurrogateSpec) -> float:
    """Constant relating band-assignment regret to surrogate regret.

    Equals max over thresholds k and kinks j of
    -pi_k / (B-(pi_k) * |delta_k - H_j|), so tighter constants come from
    thresholds sitting far from the kinks.  Expects a spec that passes
    :func:`check_consistency`.
    """
    dist = np.abs(spec.thresholds[:, None] - spec.hinges[None, :])
    if np.min(dist) == 0.0:
        raise ValueError("degenerate surrogate: a prediction threshold coincides with a kink")
    pi = spec.boundaries.values
    vals = -pi[:, None] / (spec.neg_slopes[:, None] * dist)
    c = float(np.max(vals))
    if not np.isfinite(c) or c <= 0.0:
        raise ValueError("excess-risk constant must be finite and positive")
    return c
