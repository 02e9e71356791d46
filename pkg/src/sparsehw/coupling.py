"""Shared-latent couplings for mask and multiplicative-error generation.

Every unit (a sample row, or a coordinate pair in a bilinear form) draws one
latent uniform ``U`` for the first block and a partner ``V`` for the second
block.  ``V`` equals ``U`` (comonotone), an independent uniform, or ``1 - U``
(countermonotone), chosen per unit with fixed mixture weights.  Each
coordinate is then the quantile function of its marginal evaluated at the
block's latent uniform.

Within a block all coordinates are comonotone, which is one concrete instance
of arbitrary within-vector dependence.  Across blocks, every pairwise joint
moment is the weighted sum of the three extreme couplings, so tables of pairwise
joint moments can be hit exactly whenever they admit such weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.stats import beta as beta_dist

from .errors import DomainError, FeasibilityError

PRESETS = ("independent", "comonotone", "exclusive")


@dataclass(frozen=True)
class CouplingWeights:
    comonotone: float = 0.0
    independent: float = 1.0
    countermonotone: float = 0.0

    def __post_init__(self):
        w = self.as_array()
        if np.any(w < -1e-12) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
            raise DomainError(f"coupling weights must be nonnegative and sum to 1, got {tuple(w)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.comonotone, self.independent, self.countermonotone], dtype=float)

    @classmethod
    def preset(cls, name: str) -> "CouplingWeights":
        if name == "independent":
            return cls(0.0, 1.0, 0.0)
        if name == "comonotone":
            return cls(1.0, 0.0, 0.0)
        if name == "exclusive":
            return cls(0.0, 0.0, 1.0)
        raise DomainError(f"unknown coupling preset {name!r}; expected one of {PRESETS}")

    def to_dict(self) -> dict:
        return {
            "comonotone": self.comonotone,
            "independent": self.independent,
            "countermonotone": self.countermonotone,
        }


def coupled_uniforms(rng: np.random.Generator, size, weights: CouplingWeights):
    """Draw latent pairs ``(U, V)`` with the mixture coupling."""
    w = weights.as_array()
    U = rng.random(size)
    W = rng.random(size)
    pick = rng.random(size)
    c0, c1 = w[0], w[0] + w[1]
    V = np.where(pick < c0, U, np.where(pick < c1, W, 1.0 - U))
    return U, V


def bernoulli_indicator(latent: np.ndarray, pi) -> np.ndarray:
    """Bernoulli(pi) via the quantile ``1{latent >= 1 - pi}``."""
    return (latent >= 1.0 - np.asarray(pi, dtype=float)).astype(float)


def bernoulli_components(pi_a, pi_b) -> np.ndarray:
    """Joint success probabilities under the three extreme couplings.

    Returns an array with a trailing axis of length 3: comonotone,
    independent, countermonotone.
    """
    pi_a, pi_b = np.broadcast_arrays(np.asarray(pi_a, float), np.asarray(pi_b, float))
    return np.stack(
        [np.minimum(pi_a, pi_b), pi_a * pi_b, np.maximum(0.0, pi_a + pi_b - 1.0)], axis=-1
    )


def bernoulli_joint(pi_a, pi_b, weights: CouplingWeights) -> np.ndarray:
    return bernoulli_components(pi_a, pi_b) @ weights.as_array()


@dataclass(frozen=True)
class ScaledBeta:
    """``bound * Beta(a, b)`` with mean ``mean`` and ``a + b = dispersion``.

    ``mean == bound`` degenerates to the point mass at ``bound``.
    """

    bound: float
    mean: float
    dispersion: float = 10.0

    def __post_init__(self):
        if not self.bound > 0:
            raise DomainError(f"error bound must be positive, got {self.bound}")
        if not self.mean > 0:
            raise DomainError(f"error mean must be positive, got {self.mean}")
        if self.mean > self.bound * (1 + 1e-12):
            raise FeasibilityError(f"error mean {self.mean} exceeds its bound {self.bound}")
        if not self.dispersion > 0:
            raise DomainError("dispersion must be positive")

    @property
    def degenerate(self) -> bool:
        return self.mean >= self.bound

    @property
    def shape(self) -> tuple[float, float]:
        m = self.mean / self.bound
        return m * self.dispersion, (1.0 - m) * self.dispersion

    def quantile(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.degenerate:
            return np.full(v.shape, self.bound)
        a, b = self.shape
        return self.bound * beta_dist.ppf(v, a, b)


@lru_cache(maxsize=4096)
def _quantile_product_integral(x: ScaledBeta, y: ScaledBeta, counter: bool) -> float:
    if x.degenerate or y.degenerate:
        return x.mean * y.mean
    if counter:
        f = lambda v: float(x.quantile(v) * y.quantile(1.0 - v))  # noqa: E731
    else:
        f = lambda v: float(x.quantile(v) * y.quantile(v))  # noqa: E731
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


def beta_components(x: ScaledBeta, y: ScaledBeta) -> np.ndarray:
    """``E[delta_x delta_y]`` under comonotone, independent, countermonotone coupling."""
    return np.array(
        [
            _quantile_product_integral(x, y, False),
            x.mean * y.mean,
            _quantile_product_integral(x, y, True),
        ]
    )


def solve_weights(components: np.ndarray, target: np.ndarray, atol: float = 1e-9) -> CouplingWeights:
    """Find mixture weights reproducing ``target`` cell by cell.

    ``components`` has shape ``(..., 3)`` and ``target`` the matching leading
    shape.  Raises :class:`FeasibilityError` naming the worst cell when no
    nonnegative weights summing to one reproduce the table within ``atol``.
    """
    comp = np.asarray(components, dtype=float)
    tgt = np.asarray(target, dtype=float)
    M = comp.reshape(-1, 3)
    t = tgt.reshape(-1)
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    # the sum-to-one row is weighted heavily so nnls treats it as a constraint
    heavy = 1e4 * scale
    lhs = np.vstack([M, np.full((1, 3), heavy)])
    rhs = np.concatenate([t, [heavy]])
    w, _ = optimize.nnls(lhs, rhs)
    w = w / w.sum()
    resid = np.abs(M @ w - t)
    if resid.size and resid.max() > atol * max(1.0, float(np.abs(t).max())):
        flat = int(resid.argmax())
        cell = tuple(int(i) for i in np.unravel_index(flat, tgt.shape)) if tgt.ndim else None
        if cell is not None and len(cell) == 1:
            cell = (cell[0], 0)
        raise FeasibilityError(
            f"joint moment table is not realisable by the shared-latent coupling "
            f"(worst cell {cell}: target {t[flat]}, closest {float(M[flat] @ w)})",
            cell=cell,
        )
    return CouplingWeights(*[float(x) for x in w])
