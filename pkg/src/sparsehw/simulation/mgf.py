"""Monte Carlo check of the moment generating function bound for products
of sub-Gaussian pairs:

    E exp(lambda a Z1 Z2) - 1 <= lambda a E[Z1 Z2] + 16 lambda^2 a^2 K1^2 K2^2

for ``|lambda| < 1 / (4 e K1 K2 |a|)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DomainError, PreconditionError
from ..specs import GAUSSIAN_PSI2
from .streams import run_replicates


@dataclass(frozen=True)
class GaussianPairSampler:
    """Centred bivariate normal pairs with correlation ``rho``."""

    rho: float = 0.0
    sd1: float = 1.0
    sd2: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        if not (self.sd1 > 0 and self.sd2 > 0):
            raise DomainError("standard deviations must be positive")

    @property
    def K1(self) -> float:
        return GAUSSIAN_PSI2 * self.sd1

    @property
    def K2(self) -> float:
        return GAUSSIAN_PSI2 * self.sd2

    @property
    def product_mean(self) -> float:
        return self.rho * self.sd1 * self.sd2

    def __call__(self, rng: np.random.Generator, size: int):
        g1 = rng.standard_normal(size)
        g2 = rng.standard_normal(size)
        z2 = self.rho * g1 + math.sqrt(1.0 - self.rho**2) * g2
        return self.sd1 * g1, self.sd2 * z2

    def exact_mgf(self, s: float) -> float:
        """``E exp(s Z1 Z2)``, finite while ``(1 - rho s')^2 > s'^2``."""
        s = s * self.sd1 * self.sd2
        disc = (1.0 - self.rho * s) ** 2 - s * s
        if disc <= 0 or (1.0 - self.rho * s) <= 0:
            return math.inf
        return 1.0 / math.sqrt(disc)


@dataclass(frozen=True)
class _MGFKernel:
    sampler: GaussianPairSampler
    s: float

    def __call__(self, rng, count):
        z1, z2 = self.sampler(rng, count)
        return np.expm1(self.s * z1 * z2)


@dataclass(frozen=True)
class MGFCheck:
    lam: float
    a: float
    lhs: float
    se: float
    rhs: float
    exact: float | None
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def admissible_lambda(a: float, K1: float, K2: float) -> float:
    """Upper end of the admissible range of ``|lambda|``."""
    if a == 0:
        return math.inf
    return 1.0 / (4.0 * math.e * K1 * K2 * abs(a))


def mgf_bound_check(
    lam: float,
    a: float,
    sampler: GaussianPairSampler,
    K1: float | None = None,
    K2: float | None = None,
    reps: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
    stream: int | str = "mgf",
) -> MGFCheck:
    """Monte Carlo left side with its standard error against the bound.

    Passes when ``lhs - 3 se <= rhs``.
    """
    K1 = sampler.K1 if K1 is None else K1
    K2 = sampler.K2 if K2 is None else K2
    if not (K1 > 0 and K2 > 0):
        raise DomainError("K1 and K2 must be positive")
    if reps < 10_000:
        raise PreconditionError(f"reps must be at least 10000, got {reps}")
    if not abs(lam) < admissible_lambda(a, K1, K2):
        raise PreconditionError(
            f"|lambda| = {abs(lam)} is outside the admissible range "
            f"< {admissible_lambda(a, K1, K2)} for a = {a}"
        )
    s = lam * a
    rhs = s * sampler.product_mean + 16.0 * s * s * (K1 * K2) ** 2
    if s == 0:
        return MGFCheck(lam, a, 0.0, 0.0, rhs, 0.0, True)
    vals = run_replicates(_MGFKernel(sampler, s), reps, seed, stream, workers)
    lhs = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(reps))
    exact = sampler.exact_mgf(s) - 1.0
    return MGFCheck(lam, a, lhs, se, rhs, exact, bool(lhs - 3.0 * se <= rhs))
