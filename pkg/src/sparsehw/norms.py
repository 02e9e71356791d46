"""Matrix norms and the coefficient matrices of the cross-covariance estimators.

Two storage forms are supported by :class:`CoefficientMatrix`: a dense
``n x n`` array, and the closed form ``a I + b (11^T - I)`` described by its
diagonal value ``a`` and off-diagonal value ``b``.  The estimator matrices are
all of the closed form, which keeps their norms exact and their storage O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, FeasibilityError

OPNORM_TOL = 1e-10
OPNORM_MAX_ITER = 10_000
_FRECHET_SLACK = 1e-12


class CoefficientMatrix:
    """Real ``n x n`` matrix of a bilinear form, with cached norms.

    Build it from a dense array, or with :meth:`closed_form` for matrices of
    the shape ``diag * I + off * (11^T - I)``.  Instances are treated as
    immutable; the dense view is read-only.
    """

    __slots__ = ("_n", "_dense", "_closed", "_cache")

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"coefficient matrix must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionError("coefficient matrix needs n >= 1")
        if not np.all(np.isfinite(arr)):
            raise DomainError("coefficient matrix entries must be finite")
        arr.setflags(write=False)
        self._n = arr.shape[0]
        self._dense = arr
        self._closed = None
        self._cache = {}

    @classmethod
    def closed_form(cls, n: int, diagonal: float, off_diagonal: float) -> "CoefficientMatrix":
        if n < 1:
            raise DimensionError("coefficient matrix needs n >= 1")
        if not (math.isfinite(diagonal) and math.isfinite(off_diagonal)):
            raise DomainError("coefficient matrix entries must be finite")
        obj = cls.__new__(cls)
        obj._n = int(n)
        obj._dense = None
        obj._closed = (float(diagonal), float(off_diagonal))
        obj._cache = {}
        return obj

    @property
    def n(self) -> int:
        return self._n

    @property
    def is_closed_form(self) -> bool:
        return self._closed is not None

    @property
    def closed_values(self) -> tuple[float, float] | None:
        """``(diagonal, off_diagonal)`` for closed-form matrices, else None."""
        return self._closed

    @property
    def entries(self) -> np.ndarray:
        if self._dense is None:
            a, b = self._closed
            arr = np.full((self._n, self._n), b)
            np.fill_diagonal(arr, a)
            arr.setflags(write=False)
            # benign race: two threads may both materialise the same array
            self._dense = arr
        return self._dense

    def diagonal(self) -> np.ndarray:
        if self._closed is not None:
            return np.full(self._n, self._closed[0])
        return np.diag(self._dense).copy()

    def is_diagonal(self) -> bool:
        if self._closed is not None:
            return self._closed[1] == 0.0 or self._n == 1
        off = self._dense - np.diag(np.diag(self._dense))
        return not np.any(off)

    def has_zero_diagonal(self) -> bool:
        if self._closed is not None:
            return self._closed[0] == 0.0
        return not np.any(np.diag(self._dense))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """``A @ x``; ``x`` may carry extra trailing columns."""
        x = np.asarray(x, dtype=float)
        if self._closed is not None:
            a, b = self._closed
            return (a - b) * x + b * x.sum(axis=0)
        return self._dense @ x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """``A.T @ x``."""
        if self._closed is not None:
            return self.matvec(x)
        return self._dense.T @ np.asarray(x, dtype=float)

    def frobenius(self) -> float:
        if "fro" not in self._cache:
            if self._closed is not None:
                a, b = self._closed
                n = self._n
                val = math.sqrt(n * a * a + n * (n - 1) * b * b)
            else:
                val = float(np.linalg.norm(self._dense, "fro"))
            self._cache["fro"] = val
        return self._cache["fro"]

    def operator_norm(self, tol: float = OPNORM_TOL, max_iter: int = OPNORM_MAX_ITER) -> float:
        key = ("op", tol, max_iter)
        if key not in self._cache:
            if self._closed is not None:
                # spectrum of (a-b) I + b 11^T: a-b (multiplicity n-1) and a+(n-1)b
                a, b = self._closed
                n = self._n
                vals = [abs(a + (n - 1) * b)]
                if n >= 2:
                    vals.append(abs(a - b))
                self._cache[key] = max(vals)
            else:
                self._cache[key] = _power_iteration_norm(self._dense, tol, max_iter)
        return self._cache[key]

    def __array__(self, dtype=None, copy=None):
        arr = self.entries
        return arr.astype(dtype) if dtype is not None else arr

    def __repr__(self) -> str:
        if self._closed is not None:
            a, b = self._closed
            return f"CoefficientMatrix.closed_form(n={self._n}, diagonal={a!r}, off_diagonal={b!r})"
        return f"CoefficientMatrix(n={self._n})"


def as_coefficient_matrix(A) -> CoefficientMatrix:
    if isinstance(A, CoefficientMatrix):
        return A
    return CoefficientMatrix(A)


@dataclass(frozen=True)
class MaskMoments:
    """First and joint moments of the Bernoulli mask pairs ``(gamma_1j, gamma_2j)``.

    ``pi1[j] = E gamma_1j``, ``pi2[j] = E gamma_2j`` and
    ``pi12[j] = E gamma_1j gamma_2j``.
    """

    pi1: np.ndarray
    pi2: np.ndarray
    pi12: np.ndarray

    def __post_init__(self):
        arrs = []
        for name in ("pi1", "pi2", "pi12"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if v.ndim != 1:
                raise DimensionError(f"{name} must be a vector")
            if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise DomainError(f"{name} entries must lie in [0, 1]")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
            arrs.append(v)
        if not (arrs[0].shape == arrs[1].shape == arrs[2].shape):
            raise DimensionError("pi1, pi2 and pi12 must have equal length")
        lo = np.maximum(0.0, self.pi1 + self.pi2 - 1.0)
        hi = np.minimum(self.pi1, self.pi2)
        bad = np.flatnonzero((self.pi12 < lo - _FRECHET_SLACK) | (self.pi12 > hi + _FRECHET_SLACK))
        if bad.size:
            j = int(bad[0])
            raise FeasibilityError(
                f"pi12[{j}] = {self.pi12[j]} outside Frechet bounds [{lo[j]}, {hi[j]}]"
            )

    @property
    def n(self) -> int:
        return self.pi1.shape[0]

    @classmethod
    def ones(cls, n: int) -> "MaskMoments":
        one = np.ones(n)
        return cls(one, one, one)

    @classmethod
    def uniform(cls, n: int, pi1: float, pi2: float, pi12: float) -> "MaskMoments":
        return cls(np.full(n, pi1), np.full(n, pi2), np.full(n, pi12))


def frobenius(A) -> float:
    """Frobenius norm ``sqrt(sum a_ij^2)``."""
    return as_coefficient_matrix(A).frobenius()


def operator_norm(A, tol: float = OPNORM_TOL, max_iter: int = OPNORM_MAX_ITER) -> float:
    """Spectral norm, the square root of the top eigenvalue of ``A^T A``.

    Dense matrices go through power iteration on ``A^T A``; closed-form
    matrices use their exact spectrum.  Raises :class:`ConvergenceError`
    (carrying the last iterate) if ``max_iter`` is reached.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    return as_coefficient_matrix(A).operator_norm(tol, max_iter)


def _start_block(n: int, k: int) -> np.ndarray:
    # Fixed-seed Gaussian start: deterministic, and almost surely not
    # orthogonal to the dominant singular vectors (the all-ones vector lies in
    # the kernel of every row-centred matrix, so it is a poor choice).
    V = np.random.default_rng(0x5EED).standard_normal((n, k))
    return np.linalg.qr(V)[0]


def _power_iteration_norm(M: np.ndarray, tol: float, max_iter: int, block: int = 4) -> float:
    """Block power iteration on ``M^T M`` with a Rayleigh-Ritz step.

    A block of a few vectors keeps the convergence rate governed by the gap
    to the ``block+1``-th singular value, so near-ties at the top do not
    stall it the way single-vector iteration stalls.
    """
    n = M.shape[0]
    if not np.any(M):
        return 0.0
    V = _start_block(n, min(block, n))
    theta = 0.0
    prev_step = math.inf
    for _ in range(max_iter):
        W = M @ V
        theta_new = float(np.linalg.eigvalsh(W.T @ W)[-1])  # top Ritz value of M^T M
        step = abs(theta_new - theta)
        if step <= tol * theta_new:
            # remaining gap is about step * r / (1 - r) for geometric ratio r
            r = step / prev_step if prev_step > 0 else 0.0
            if step == 0.0 or (r < 1.0 and step * r / (1.0 - r) <= tol * theta_new):
                return math.sqrt(theta_new)
        prev_step = step
        theta = theta_new
        V = np.linalg.qr(M.T @ W)[0]
    raise ConvergenceError(
        f"power iteration did not reach relative tolerance {tol} in {max_iter} iterations",
        estimate=math.sqrt(theta),
        vector=V[:, 0],
        iterations=max_iter,
    )


def pi_frobenius(A, m: MaskMoments) -> float:
    """Mask-weighted Frobenius norm.

    Diagonal entries are weighted by the joint observation probability and
    off-diagonal entries by the product of marginals:
    ``sqrt(sum_j pi12_j a_jj^2 + sum_{i != j} a_ij^2 pi1_i pi2_j)``.
    """
    A = as_coefficient_matrix(A)
    if m.n != A.n:
        raise DimensionError(f"mask moments have length {m.n}, matrix has n={A.n}")
    return math.sqrt(_pi_weighted_diag(A, m) + _pi_weighted_off(A, m))


def _pi_weighted_diag(A: CoefficientMatrix, m: MaskMoments) -> float:
    if A.is_closed_form:
        a, _ = A.closed_values
        return a * a * float(m.pi12.sum())
    d = np.diag(A.entries)
    return float(np.sum(m.pi12 * d * d))


def _pi_weighted_off(A: CoefficientMatrix, m: MaskMoments) -> float:
    if A.is_closed_form:
        _, b = A.closed_values
        return b * b * float(m.pi1.sum() * m.pi2.sum() - np.dot(m.pi1, m.pi2))
    sq = A.entries ** 2
    d = np.diag(sq)
    return float(m.pi1 @ sq @ m.pi2 - np.sum(d * m.pi1 * m.pi2))


def diag_scale(A, left, right) -> CoefficientMatrix:
    """Return ``D(left) A D(right)``, entries ``left_i a_ij right_j``."""
    A = as_coefficient_matrix(A)
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if left.shape != (A.n,) or right.shape != (A.n,):
        raise DimensionError(
            f"scaling vectors must have length {A.n}, got {left.shape} and {right.shape}"
        )
    return CoefficientMatrix(left[:, None] * A.entries * right[None, :])


def centering_coefficient_matrix(n: int) -> CoefficientMatrix:
    """``(n I - 11^T) / (n (n-1))``, the matrix of the sample cross-covariance."""
    if n < 2:
        raise DomainError(f"centering matrix needs n >= 2, got n={n}")
    return CoefficientMatrix.closed_form(n, (n - 1) / (n * (n - 1)), -1.0 / (n * (n - 1)))


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value <= 1.0):
        raise DomainError(f"{name} must lie in (0, 1], got {value}")
    return value


def ipw_coefficient_matrix(n: int, pi_joint: float, pi_x: float, pi_y: float) -> CoefficientMatrix:
    """Coefficient matrix of the inverse-probability-weighted estimator.

    Diagonal ``1/(n pi_joint)``, off-diagonal ``-1/(n (n-1) pi_x pi_y)``.
    """
    if n < 2:
        raise DomainError(f"IPW matrix needs n >= 2, got n={n}")
    pj = _check_prob("pi_joint", pi_joint)
    px = _check_prob("pi_x", pi_x)
    py = _check_prob("pi_y", pi_y)
    return CoefficientMatrix.closed_form(n, 1.0 / (n * pj), -1.0 / (n * (n - 1) * px * py))


def moment_coefficient_matrix(n: int, u_joint: float, u_x: float, u_y: float) -> CoefficientMatrix:
    """Same shape as :func:`ipw_coefficient_matrix` with error means in place of
    observation probabilities (the means may exceed one)."""
    if n < 2:
        raise DomainError(f"coefficient matrix needs n >= 2, got n={n}")
    for name, v in (("u_joint", u_joint), ("u_x", u_x), ("u_y", u_y)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    return CoefficientMatrix.closed_form(n, 1.0 / (n * u_joint), -1.0 / (n * (n - 1) * u_x * u_y))
