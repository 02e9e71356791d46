"""Simulation scenarios: masked bilinear forms and cross-covariance estimation.

A scenario is a frozen, picklable description that can draw replicates
(``scenario(rng, count)``) and knows the matching theoretical bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import bounds
from ..coupling import (
    CouplingWeights,
    ScaledBeta,
    beta_components,
    bernoulli_indicator,
    bernoulli_joint,
    coupled_uniforms,
)
from ..errors import DomainError
from ..estimators import centered_cross_cov_arrays, product_sums, weighted_cross_cov_arrays
from ..norms import CoefficientMatrix, MaskMoments, centering_coefficient_matrix
from ..specs import GAUSSIAN_PSI2, MeasurementErrorSpec, MissingSpec, PopulationSpec
from .generators import draw_errors, draw_masks, draw_population

SETTINGS = ("quadratic", "bilinear", "noncentered", "bounded", "bounded-noncentered")
MATRICES = ("random", "centering", "identity")


def build_matrix(kind: str, n: int, seed: int = 0) -> CoefficientMatrix:
    if kind == "random":
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n,)))
        return CoefficientMatrix(rng.standard_normal((n, n)) / np.sqrt(n))
    if kind == "centering":
        return centering_coefficient_matrix(n)
    if kind == "identity":
        return CoefficientMatrix(np.eye(n))
    raise DomainError(f"matrix must be one of {MATRICES}, got {kind!r}")


@dataclass(frozen=True)
class BilinearScenario:
    """``(Z1 * g1)^T A (Z2 * g2)`` with coordinate pairs drawn independently.

    ``(Z1_i, Z2_i)`` is bivariate normal with correlation ``rho`` and means
    ``mu1``/``mu2`` (nonzero only in the non-centred settings).  ``g`` are
    Bernoulli masks with probabilities ``pi1``/``pi2`` or, in the bounded
    settings, scaled-Beta errors with means ``u1``/``u2`` and bounds
    ``B1``/``B2``; the pair ``(g1_i, g2_i)`` is coupled by ``coupling``.
    In the quadratic setting ``Z2 = Z1`` and ``g2 = g1``.
    """

    setting: str
    A: CoefficientMatrix
    rho: float = 0.5
    sd1: float = 1.0
    sd2: float = 1.0
    mu1: float = 1.0
    mu2: float = 1.0
    pi1: float = 0.7
    pi2: float = 0.7
    u1: float = 0.6
    u2: float = 0.6
    B1: float = 1.0
    B2: float = 1.0
    coupling: CouplingWeights = field(default_factory=lambda: CouplingWeights(0.5, 0.5, 0.0))
    dispersion: float = 10.0

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise DomainError(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.setting == "quadratic" and (self.sd1 != self.sd2 or self.pi1 != self.pi2):
            raise DomainError("the quadratic setting needs equal sd and pi in both slots")
        MaskMoments.uniform(1, self.pi1, self.pi2, bernoulli_joint(self.pi1, self.pi2, self.coupling))

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def bounded(self) -> bool:
        return self.setting.startswith("bounded")

    @property
    def centered(self) -> bool:
        return self.setting in ("quadratic", "bilinear", "bounded")

    @property
    def means(self) -> tuple[float, float]:
        return (0.0, 0.0) if self.centered else (self.mu1, self.mu2)

    @property
    def sg(self) -> bounds.SubGaussianParams:
        return bounds.SubGaussianParams(GAUSSIAN_PSI2 * self.sd1, GAUSSIAN_PSI2 * self.sd2)

    def _errors(self) -> tuple[ScaledBeta, ScaledBeta]:
        return (
            ScaledBeta(self.B1, self.u1, self.dispersion),
            ScaledBeta(self.B2, self.u2, self.dispersion),
        )

    def gamma_moments(self) -> tuple[float, float, float]:
        """``(E g1, E g2, E g1 g2)`` for one coordinate."""
        if self.setting == "quadratic":
            return self.pi1, self.pi1, self.pi1
        if self.bounded:
            e1, e2 = self._errors()
            return self.u1, self.u2, float(beta_components(e1, e2) @ self.coupling.as_array())
        return self.pi1, self.pi2, float(bernoulli_joint(self.pi1, self.pi2, self.coupling))

    def mask_moments(self) -> MaskMoments:
        m1, m2, m12 = self.gamma_moments()
        return MaskMoments.uniform(self.n, m1, m2, m12)

    def exact_mean(self) -> float:
        m1, m2, m12 = self.gamma_moments()
        mu1, mu2 = self.means
        rho = 1.0 if self.setting == "quadratic" else self.rho
        diag = self.A.diagonal().sum()
        off = self.A.entries.sum() - diag
        return diag * m12 * (rho * self.sd1 * self.sd2 + mu1 * mu2) + off * m1 * mu1 * m2 * mu2

    def evaluation(self, c: float = bounds.DEFAULT_C, d: float | None = None) -> bounds.BoundEvaluation:
        sg = self.sg
        n = self.n
        mu1, mu2 = self.means
        if self.setting in ("quadratic", "bilinear"):
            return bounds.centered_evaluation(
                sg, self.A, self.mask_moments(), c=c, d=bounds.DEFAULT_D_CENTERED if d is None else d
            )
        if self.setting == "noncentered":
            return bounds.noncentered_evaluation(
                sg, self.A, bounds.MeanVectors(np.full(n, mu1), np.full(n, mu2)), self.mask_moments(),
                c=c, d=bounds.DEFAULT_D_NONCENTERED if d is None else d,
            )
        eb = bounds.ErrorBounds(np.full(n, self.B1), np.full(n, self.B2))
        if self.setting == "bounded":
            return bounds.bounded_error_evaluation(
                sg, self.A, eb, c=c, d=bounds.DEFAULT_D_CENTERED if d is None else d
            )
        return bounds.bounded_error_noncentered_evaluation(
            sg, self.A, bounds.MeanVectors(np.full(n, mu1), np.full(n, mu2)), eb,
            bounds.MeanVectors(np.full(n, self.u1), np.full(n, self.u2)),
            c=c, d=bounds.DEFAULT_D_NONCENTERED if d is None else d,
        )

    def draw(self, rng: np.random.Generator, count: int):
        """Return ``(Z1 * g1, Z2 * g2)`` of shape ``(count, n)`` each."""
        shape = (count, self.n)
        mu1, mu2 = self.means
        g1 = rng.standard_normal(shape)
        if self.setting == "quadratic":
            z1 = self.sd1 * g1
            U = rng.random(shape)
            gam = bernoulli_indicator(U, self.pi1)
            x = z1 * gam
            return x, x
        g2 = rng.standard_normal(shape)
        z1 = mu1 + self.sd1 * g1
        z2 = mu2 + self.sd2 * (self.rho * g1 + np.sqrt(1.0 - self.rho**2) * g2)
        U, V = coupled_uniforms(rng, shape, self.coupling)
        if self.bounded:
            e1, e2 = self._errors()
            gam1, gam2 = e1.quantile(U), e2.quantile(V)
        else:
            gam1, gam2 = bernoulli_indicator(U, self.pi1), bernoulli_indicator(V, self.pi2)
        return z1 * gam1, z2 * gam2

    def __call__(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Centred statistic ``S - E S`` for ``count`` replicates."""
        x1, x2 = self.draw(rng, count)
        S = np.sum((x1 @ self.A.entries) * x2, axis=1)
        return S - self.exact_mean()


KINDS = ("complete", "missing", "bounded-error")


@dataclass(frozen=True)
class EstimatorScenario:
    """Cross-covariance estimation from ``n`` samples of a population.

    Called as a kernel it returns ``count`` stacked ``p x q`` estimates;
    :meth:`sums_kernel` instead returns the raw product sums used by the
    moment identities.
    """

    population: PopulationSpec
    n: int
    kind: str = "complete"
    missing: MissingSpec | None = None
    errors: MeasurementErrorSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 2:
            raise DomainError(f"n must be at least 2, got {self.n}")
        pq = (self.population.p, self.population.q)
        if self.kind == "missing":
            if self.missing is None:
                raise DomainError("a missing-data scenario needs a MissingSpec")
            if (self.missing.p, self.missing.q) != pq:
                raise DomainError(f"mask spec is {self.missing.p}x{self.missing.q}, population {pq}")
        if self.kind == "bounded-error":
            if self.errors is None:
                raise DomainError("a bounded-error scenario needs a MeasurementErrorSpec")
            if (self.errors.p, self.errors.q) != pq:
                raise DomainError(f"error spec is {self.errors.p}x{self.errors.q}, population {pq}")

    @property
    def p(self) -> int:
        return self.population.p

    @property
    def q(self) -> int:
        return self.population.q

    @property
    def truth(self) -> np.ndarray:
        return self.population.SigmaXY

    @property
    def sg(self) -> bounds.SubGaussianParams:
        return bounds.SubGaussianParams(self.population.KX, self.population.KY)

    def observe(self, rng: np.random.Generator, count: int):
        X, Y = draw_population(self.population, rng, count, self.n)
        if self.kind == "missing":
            dX, dY = draw_masks(self.missing, rng, count, self.n)
        elif self.kind == "bounded-error":
            dX, dY = draw_errors(self.errors, rng, count, self.n)
        else:
            return X, Y
        return X * dX, Y * dY

    def moments(self):
        if self.kind == "missing":
            return self.missing.piXY, self.missing.piX, self.missing.piY
        if self.kind == "bounded-error":
            return self.errors.uXY, self.errors.uX, self.errors.uY
        return None

    def __call__(self, rng: np.random.Generator, count: int) -> np.ndarray:
        Xt, Yt = self.observe(rng, count)
        mom = self.moments()
        if mom is None:
            return centered_cross_cov_arrays(Xt, Yt)
        return weighted_cross_cov_arrays(Xt, Yt, *mom)

    def sums_kernel(self) -> "_SumsKernel":
        return _SumsKernel(self)

    def deviation_kernel(self, k: int, l: int) -> "_EntryDeviation":
        return _EntryDeviation(self, k, l)

    def threshold_plan(self, alpha: float, constant: float = 1.0, d_cond: float = 1.0,
                       strict: bool = False) -> bounds.ThresholdPlan:
        pop = self.population
        mu_max = (float(np.abs(pop.muX).max()), float(np.abs(pop.muY).max()))
        if self.kind == "complete":
            return bounds.threshold_complete(self.n, self.p, self.q, alpha, self.sg, constant, d_cond)
        if self.kind == "missing":
            return bounds.threshold_missing(
                self.n, self.p, self.q, alpha, self.sg, mu_max, self.missing.pi_mins(),
                constant, d_cond, strict=strict,
            )
        return bounds.threshold_me(
            self.n, self.p, self.q, alpha, self.sg, mu_max, self.errors.B_max(),
            self.errors.u_mins(), constant, d_cond, u_max=self.errors.u_max(),
        )

    def entry_evaluation(self, k: int, l: int, c: float = bounds.DEFAULT_C,
                         d: float | None = None) -> bounds.BoundEvaluation:
        """Tail bound for ``|s_kl - sigma_kl|``."""
        pop = self.population
        if self.kind == "complete":
            # the sample covariance is shift invariant, so the centred bound applies
            return bounds.centered_evaluation(
                self.sg, centering_coefficient_matrix(self.n), MaskMoments.ones(self.n),
                c=c, d=bounds.DEFAULT_D_CENTERED if d is None else d,
            )
        mu = (float(pop.muX[k]), float(pop.muY[l]))
        if self.kind == "missing":
            s = self.missing
            ev = bounds.e1_e2_missing_entry(self.n, self.sg, mu, (s.piXY[k, l], s.piX[k], s.piY[l]))
        else:
            e = self.errors
            ev = bounds.e1_e2_me_entry(
                self.n, self.sg, mu, (e.uXY[k, l], e.uX[k], e.uY[l]), (e.BX[k], e.BY[l])
            )
        return bounds.BoundEvaluation(
            ev.E1, ev.E2, c=c, d=bounds.DEFAULT_D_NONCENTERED if d is None else d,
            terms={**ev.terms1, **{f"E2 {k_}": v for k_, v in ev.terms2.items()}},
        )


@dataclass(frozen=True)
class _SumsKernel:
    scenario: EstimatorScenario

    def __call__(self, rng, count):
        Xt, Yt = self.scenario.observe(rng, count)
        same, cross = product_sums(Xt, Yt)
        return np.stack([same, cross], axis=1)


@dataclass(frozen=True)
class _EntryDeviation:
    scenario: EstimatorScenario
    k: int
    l: int

    def __call__(self, rng, count):
        est = self.scenario(rng, count)
        return est[:, self.k, self.l] - self.scenario.truth[self.k, self.l]
