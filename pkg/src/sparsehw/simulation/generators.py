"""Draw populations, Bernoulli masks and bounded multiplicative errors.

The ``draw_*`` functions produce ``count`` stacked replicates at once and
are what the simulation kernels call; the ``gen_*`` functions return a
single sample in the estimator types.
"""

from __future__ import annotations

import numpy as np

from ..coupling import bernoulli_indicator, coupled_uniforms
from ..errors import DomainError
from ..estimators import SampleMatrixPair
from ..specs import MeasurementErrorSpec, MissingSpec, PopulationSpec


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")


def draw_population(spec: PopulationSpec, rng: np.random.Generator, count: int, n: int):
    """``(X, Y)`` of shapes ``(count, n, p)`` and ``(count, n, q)``."""
    _check_n(n)
    dim = spec.p + spec.q
    if spec.family == "gaussian":
        W = rng.standard_normal((count, n, dim))
    else:
        W = 2.0 * rng.integers(0, 2, size=(count, n, dim)).astype(float) - 1.0
    Z = W @ spec.factor.T + spec.joint_mean
    return Z[..., : spec.p], Z[..., spec.p :]


def gen_population(spec: PopulationSpec, n: int, rng: np.random.Generator) -> SampleMatrixPair:
    X, Y = draw_population(spec, rng, 1, n)
    return SampleMatrixPair(X[0], Y[0])


def draw_masks(spec: MissingSpec, rng: np.random.Generator, count: int, n: int):
    """Masks sharing one latent uniform per sample and block."""
    _check_n(n)
    U, V = coupled_uniforms(rng, (count, n), spec.coupling)
    return (
        bernoulli_indicator(U[..., None], spec.piX),
        bernoulli_indicator(V[..., None], spec.piY),
    )


def gen_masks(spec: MissingSpec, n: int, rng: np.random.Generator):
    dX, dY = draw_masks(spec, rng, 1, n)
    return dX[0], dY[0]


def _quantile_columns(marginals, latent: np.ndarray) -> np.ndarray:
    out = np.empty(latent.shape + (len(marginals),))
    cache: dict = {}
    for k, m in enumerate(marginals):
        if m not in cache:
            cache[m] = m.quantile(latent)
        out[..., k] = cache[m]
    return out


def draw_errors(spec: MeasurementErrorSpec, rng: np.random.Generator, count: int, n: int):
    """Scaled-Beta errors at the quantiles of the shared latent uniforms."""
    _check_n(n)
    U, V = coupled_uniforms(rng, (count, n), spec.coupling)
    dX = _quantile_columns([spec.marginal_x(k) for k in range(spec.p)], U)
    dY = _quantile_columns([spec.marginal_y(l) for l in range(spec.q)], V)
    return dX, dY


def gen_errors(spec: MeasurementErrorSpec, n: int, rng: np.random.Generator):
    dX, dY = draw_errors(spec, rng, 1, n)
    return dX[0], dY[0]
