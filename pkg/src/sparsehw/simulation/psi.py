"""Moment-based psi-norm estimates and exact Gaussian oracles."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ..errors import DomainError

DEFAULT_P_GRID = np.arange(1.0, 20.0 + 0.25, 0.5)


def psi_norm_estimate(samples, order: int = 2, p_grid=DEFAULT_P_GRID) -> float:
    """``max_p (mean |x|^p)^(1/p) / p^(1/order)`` over ``p_grid``."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    x = np.abs(np.asarray(samples, dtype=float).ravel())
    grid = np.asarray(p_grid, dtype=float).ravel()
    if x.size == 0 or grid.size == 0:
        raise DomainError("samples and p_grid must be nonempty")
    if np.any(grid < 1):
        raise DomainError("p_grid entries must be at least 1")
    top = x.max()
    if top == 0:
        return 0.0
    # factor out the largest value so high powers cannot overflow
    r = x / top
    moments = np.array([np.mean(r**p) ** (1.0 / p) for p in grid]) * top
    return float(np.max(moments / grid ** (1.0 / order)))


def gaussian_abs_moment(p: float, sd: float = 1.0) -> float:
    """``E|X|^p`` for ``X ~ N(0, sd^2)``."""
    return math.exp(
        p * math.log(sd) + 0.5 * p * math.log(2.0) + gammaln((p + 1) / 2) - 0.5 * math.log(math.pi)
    )


def gaussian_psi_norm(order: int = 2, p_grid=DEFAULT_P_GRID, sd: float = 1.0) -> float:
    """Exact-moment value of :func:`psi_norm_estimate` for a centred normal."""
    grid = np.asarray(p_grid, dtype=float)
    vals = [gaussian_abs_moment(p, sd) ** (1.0 / p) / p ** (1.0 / order) for p in grid]
    return float(max(vals))

