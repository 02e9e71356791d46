"""Cross-covariance estimators for complete, missing and error-contaminated data."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError
from .norms import as_coefficient_matrix
from .specs import MeasurementErrorSpec, MissingSpec

KINDS = ("complete", "ipw", "bounded-error")


def _matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SampleMatrixPair:
    """Fully observed samples; rows are observations."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X, Y = _matrix(self.X, "X"), _matrix(self.Y, "Y")
        if X.shape[0] != Y.shape[0]:
            raise DimensionError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class MaskedSamplePair:
    """Observed products ``Xt = deltaX * X`` and ``Yt = deltaY * Y``.

    Missing entries are explicit zeros in ``Xt``/``Yt`` with a zero in the
    parallel mask.
    """

    Xt: np.ndarray
    Yt: np.ndarray
    deltaX: np.ndarray
    deltaY: np.ndarray

    def __post_init__(self):
        arrs = {k: _matrix(getattr(self, k), k) for k in ("Xt", "Yt", "deltaX", "deltaY")}
        if arrs["Xt"].shape != arrs["deltaX"].shape or arrs["Yt"].shape != arrs["deltaY"].shape:
            raise DimensionError("each observed matrix must match its mask in shape")
        if arrs["Xt"].shape[0] != arrs["Yt"].shape[0]:
            raise DimensionError("Xt and Yt must have the same number of rows")
        for name in ("deltaX", "deltaY"):
            if np.any(arrs[name] < 0):
                raise DomainError(f"{name} must be nonnegative")
        if np.any((arrs["deltaX"] == 0) & (arrs["Xt"] != 0)) or np.any(
            (arrs["deltaY"] == 0) & (arrs["Yt"] != 0)
        ):
            raise DomainError("observed values must be zero wherever the mask is zero")
        for k, v in arrs.items():
            object.__setattr__(self, k, v)

    @property
    def n(self) -> int:
        return self.Xt.shape[0]

    @classmethod
    def from_complete(cls, s: SampleMatrixPair, deltaX, deltaY) -> "MaskedSamplePair":
        deltaX = np.asarray(deltaX, dtype=float)
        deltaY = np.asarray(deltaY, dtype=float)
        return cls(deltaX * s.X, deltaY * s.Y, deltaX, deltaY)


@dataclass(frozen=True)
class EstimateMatrix:
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        v = _matrix(self.values, "values")
        object.__setattr__(self, "values", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def to_csv(self, path) -> None:
        write_matrix_csv(path, self.values)

    @classmethod
    def from_csv(cls, path, kind: str) -> "EstimateMatrix":
        return cls(read_matrix_csv(path), kind)


def bilinear_value(z1, z2, A) -> float:
    """``z1^T A z2`` through the matrix-vector product."""
    A = as_coefficient_matrix(A)
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    if z1.shape != (A.n,) or z2.shape != (A.n,):
        raise DimensionError(f"vectors must have length {A.n}, got {z1.shape} and {z2.shape}")
    return float(z1 @ A.matvec(z2))


def bilinear_value_naive(z1, z2, A) -> float:
    """Reference double loop over all ``(i, j)``."""
    A = as_coefficient_matrix(A)
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    if z1.shape != (A.n,) or z2.shape != (A.n,):
        raise DimensionError(f"vectors must have length {A.n}, got {z1.shape} and {z2.shape}")
    M = A.entries
    total = 0.0
    for i in range(A.n):
        for j in range(A.n):
            total += z1[i] * M[i, j] * z2[j]
    return total


def centered_cross_cov_arrays(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Sample cross-covariance of stacked ``(..., n, p)`` and ``(..., n, q)`` arrays."""
    n = X.shape[-2]
    Xc = X - X.mean(axis=-2, keepdims=True)
    Yc = Y - Y.mean(axis=-2, keepdims=True)
    return np.swapaxes(Xc, -1, -2) @ Yc / (n - 1)


def product_sums(Xt: np.ndarray, Yt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``sum_i x_ik y_il`` and ``sum_{i != j} x_ik y_jl`` for stacked arrays."""
    same = np.swapaxes(Xt, -1, -2) @ Yt
    # sum_{i != j} x_i y_j = (sum x)(sum y) - sum x_i y_i
    cross = Xt.sum(axis=-2)[..., :, None] * Yt.sum(axis=-2)[..., None, :] - same
    return same, cross


def weighted_cross_cov_arrays(Xt, Yt, joint, mx, my) -> np.ndarray:
    """IPW-type estimate from observed products and their moment tables."""
    n = Xt.shape[-2]
    same, cross = product_sums(Xt, Yt)
    return same / (n * joint) - cross / (n * (n - 1) * np.outer(mx, my))


def sample_cross_cov(s: SampleMatrixPair) -> EstimateMatrix:
    if s.n < 2:
        raise DomainError(f"need at least 2 samples, got {s.n}")
    return EstimateMatrix(centered_cross_cov_arrays(s.X, s.Y), "complete")


def _weighted_cross_cov(m: MaskedSamplePair, joint, mx, my) -> np.ndarray:
    if m.n < 2:
        raise DomainError(f"need at least 2 samples, got {m.n}")
    return weighted_cross_cov_arrays(m.Xt, m.Yt, joint, mx, my)


def _check_shapes(m: MaskedSamplePair, p: int, q: int) -> None:
    if m.Xt.shape[1] != p or m.Yt.shape[1] != q:
        raise DimensionError(
            f"data has p={m.Xt.shape[1]}, q={m.Yt.shape[1]} but moments are {p}x{q}"
        )


def ipw_cross_cov(m: MaskedSamplePair, spec: MissingSpec) -> EstimateMatrix:
    """Inverse-probability-weighted estimator, unbiased under MCAR masks."""
    _check_shapes(m, spec.p, spec.q)
    if np.any(spec.piXY <= 0) or np.any(spec.piX <= 0) or np.any(spec.piY <= 0):
        raise DomainError("all observation probabilities must be strictly positive")
    return EstimateMatrix(_weighted_cross_cov(m, spec.piXY, spec.piX, spec.piY), "ipw")


def me_cross_cov(m: MaskedSamplePair, spec: MeasurementErrorSpec) -> EstimateMatrix:
    """Moment-corrected estimator for bounded multiplicative errors."""
    _check_shapes(m, spec.p, spec.q)
    if np.any(spec.uXY <= 0) or np.any(spec.uX <= 0) or np.any(spec.uY <= 0):
        raise DomainError("all error moments must be strictly positive")
    return EstimateMatrix(_weighted_cross_cov(m, spec.uXY, spec.uX, spec.uY), "bounded-error")


def threshold_matrix(est: EstimateMatrix, cutoff: float) -> np.ndarray:
    """Reject where ``|estimate| > cutoff``; equality is not a rejection."""
    if not cutoff > 0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    return np.abs(est.values) > cutoff


def write_matrix_csv(path, values: np.ndarray) -> None:
    values = np.asarray(values)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + list(range(values.shape[1])))
        for k, row in enumerate(values):
            w.writerow([k] + [format(float(v), ".17g") for v in row])


def read_matrix_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path} is empty")
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
