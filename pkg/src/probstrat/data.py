"""Labeled samples and their CSV representation.

Datasets are tables with columns ``x1..xp``, ``y`` and an optional
``true_prob`` column carrying the generating conditional probability when
it is known (simulated data).  Floats are written with ``repr`` so a
write/read round trip is bit-exact.
"""

import csv
from dataclasses import dataclass

import numpy as np

__all__ = ["LabeledSample", "DataError", "read_dataset_csv", "write_dataset_csv"]


class DataError(ValueError):
    """Malformed or inconsistent input data (bad CSV, bad labels, bad shapes)."""


@dataclass(frozen=True)
class LabeledSample:
    """Feature matrix with -1/+1 labels and optional true conditional probabilities."""

    features: np.ndarray
    labels: np.ndarray
    true_probs: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 2:
            raise DataError("features must be a 2-D (n, p) array")
        if not np.all(np.isfinite(x)):
            raise DataError("features must be finite")
        y = np.asarray(self.labels)
        if y.shape != (x.shape[0],):
            raise DataError("labels must be a length-n vector")
        if not np.all(np.isin(y, (-1, 1))):
            raise DataError("labels must contain only -1 and +1")
        y = y.astype(np.int64)
        tp = self.true_probs
        if tp is not None:
            tp = np.asarray(tp, dtype=float)
            if tp.shape != (x.shape[0],):
                raise DataError("true_probs must be a length-n vector")
            if np.any(tp < 0.0) or np.any(tp > 1.0) or not np.all(np.isfinite(tp)):
                raise DataError("true_probs must lie in [0, 1]")
            tp.flags.writeable = False
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "true_probs", tp)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


def write_dataset_csv(path, sample: LabeledSample) -> None:
    """Write a dataset as CSV with header x1..xp, y[, true_prob]."""
    header = [f"x{j + 1}" for j in range(sample.p)] + ["y"]
    if sample.true_probs is not None:
        header.append("true_prob")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(sample.n):
            row = [repr(float(v)) for v in sample.features[i]]
            row.append(str(int(sample.labels[i])))
            if sample.true_probs is not None:
                row.append(repr(float(sample.true_probs[i])))
            writer.writerow(row)


def read_dataset_csv(path, require_labels: bool = True) -> LabeledSample:
    """Read a dataset CSV.

    The header must list x1..xp in order; a ``y`` column is required unless
    ``require_labels`` is false (prediction inputs), and ``true_prob`` is
    optional.  Errors carry row/column diagnostics.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        expected_x = [f"x{j + 1}" for j in range(sum(h.startswith("x") for h in header))]
        x_cols = [h for h in header if h.startswith("x")]
        if not x_cols or x_cols != expected_x[: len(x_cols)]:
            raise DataError(f"{path}: feature columns must be named x1..xp in order, got {header}")
        has_y = "y" in header
        if require_labels and not has_y:
            raise DataError(f"{path}: missing required column 'y'")
        has_tp = "true_prob" in header
        allowed = set(x_cols) | ({"y"} if has_y else set()) | ({"true_prob"} if has_tp else set())
        extra = [h for h in header if h not in allowed]
        if extra:
            raise DataError(f"{path}: unknown columns {extra}")
        col_of = {h: i for i, h in enumerate(header)}

        feats, labels, probs = [], [], []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}"
                )
            try:
                feats.append([float(row[col_of[c]]) for c in x_cols])
            except ValueError as exc:
                raise DataError(f"{path}: row {rownum}: bad feature value ({exc})") from None
            if has_y:
                raw = row[col_of["y"]].strip()
                try:
                    yv = int(float(raw))
                except ValueError:
                    raise DataError(f"{path}: row {rownum}: bad label {raw!r}") from None
                if yv not in (-1, 1) or float(raw) != yv:
                    raise DataError(f"{path}: row {rownum}: label must be -1 or +1, got {raw!r}")
                labels.append(yv)
            if has_tp:
                try:
                    probs.append(float(row[col_of["true_prob"]]))
                except ValueError as exc:
                    raise DataError(f"{path}: row {rownum}: bad true_prob ({exc})") from None

    n = len(feats)
    x = np.asarray(feats, dtype=float).reshape(n, len(x_cols))
    y = np.asarray(labels, dtype=np.int64) if has_y else np.ones(n, dtype=np.int64)
    tp = np.asarray(probs, dtype=float) if has_tp else None
    try:
        return LabeledSample(x, y, tp)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
