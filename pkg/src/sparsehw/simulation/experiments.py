"""Empirical tails, constant calibration and FWER estimation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import bounds
from ..errors import DomainError, PreconditionError
from ..specs import GAUSSIAN_PSI2
from .scenarios import EstimatorScenario
from .streams import run_replicates

Kernel = Callable[[np.random.Generator, int], np.ndarray]


@dataclass
class SimulationReport:
    """Empirical exceedance curve plus optional calibration and FWER results.

    ``wall_clock`` is informational and never persisted, so saved reports
    stay byte-reproducible.
    """

    seed: int
    reps: int
    t_grid: np.ndarray
    frequency: np.ndarray
    se: np.ndarray
    bound: np.ndarray | None = None
    bound_raw: np.ndarray | None = None
    calibrated_constant: float | None = None
    fwer: float | None = None
    fwer_se: float | None = None
    power: np.ndarray | None = None
    wall_clock: float = field(default=0.0, compare=False)

    def attach_bound(self, ev: bounds.BoundEvaluation) -> "SimulationReport":
        tb = ev.tail(self.t_grid)
        self.bound = np.asarray(tb.value, dtype=float)
        self.bound_raw = np.asarray(tb.raw, dtype=float)
        return self

    def dominated(self) -> bool:
        """Whether every empirical frequency is at most the raw bound."""
        if self.bound_raw is None:
            raise DomainError("no bound attached")
        return bool(np.all(self.frequency <= self.bound_raw))

    def summary(self) -> dict:
        out = {"seed": int(self.seed), "reps": int(self.reps), "grid_points": int(self.t_grid.size)}
        if self.bound_raw is not None:
            out["dominated"] = self.dominated()
        if self.calibrated_constant is not None:
            out["calibrated_constant"] = float(self.calibrated_constant)
        if self.fwer is not None:
            out["fwer"] = float(self.fwer)
            out["fwer_se"] = float(self.fwer_se)
        if self.power is not None:
            out["power"] = [float(v) for v in self.power]
        return out


def exceedance(deviations: np.ndarray, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Frequency of ``|deviation| > t`` with binomial standard errors."""
    a = np.sort(np.abs(np.asarray(deviations, dtype=float)))
    t = np.asarray(t_grid, dtype=float)
    reps = a.size
    freq = (reps - np.searchsorted(a, t, side="right")) / reps
    se = np.sqrt(freq * (1.0 - freq) / reps)
    return freq, se


def empirical_tail(
    statistic: Kernel,
    t_grid,
    reps: int,
    seed: int,
    workers: int = 1,
    stream: int | str = "main",
) -> SimulationReport:
    """Exceedance curve of ``statistic`` over ``t_grid``.

    The same replicates serve every grid point, so frequencies are exactly
    nonincreasing in ``t``.
    """
    if reps < 100:
        raise PreconditionError(f"reps must be at least 100, got {reps}")
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0):
        raise DomainError("t_grid must be a nonempty vector of nonnegative values")
    start = time.perf_counter()
    dev = run_replicates(statistic, reps, seed, stream, workers)
    freq, se = exceedance(dev, t)
    return SimulationReport(seed, reps, t, freq, se, wall_clock=time.perf_counter() - start)


def calibrate_tail_constant(
    report: SimulationReport, ev: bounds.BoundEvaluation, z: float = 4.0
) -> float:
    """Largest ``c`` for which ``d exp(-c m(t))`` covers an upper confidence
    limit of the empirical frequency at every grid point.

    The limit is ``f + z se + 16 / reps``; the last term keeps grid points
    with no exceedances from driving ``c`` to infinity.
    """
    m = np.asarray(ev.exponent(report.t_grid), dtype=float)
    upper = report.frequency + z * report.se + 16.0 / report.reps
    if np.any(upper >= ev.d):
        raise DomainError("the leading constant d must exceed every empirical frequency")
    use = m > 0
    if not np.any(use):
        raise DomainError("t_grid has no point with a positive exponent")
    return float(np.min(np.log(ev.d / upper[use]) / m[use]))


def max_deviation(estimates: np.ndarray, truth: np.ndarray) -> np.ndarray:
    return np.abs(estimates - truth).reshape(estimates.shape[0], -1).max(axis=1)


def calibrate_constant(
    scenario: EstimatorScenario,
    alpha: float,
    reps: int,
    seed: int,
    workers: int = 1,
    stream: int | str = "calibration",
) -> float:
    """Threshold constant whose cutoff the maximal entrywise error exceeds
    with empirical frequency at most ``alpha``.

    Returns the ``(1 - alpha)`` quantile (linear interpolation) of
    ``max_kl |s_kl - sigma_kl|`` divided by the unit cutoff
    ``scale * rate`` of the scenario's threshold plan.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if reps < 500:
        raise PreconditionError(f"reps must be at least 500, got {reps}")
    est = run_replicates(scenario, reps, seed, stream, workers)
    quant = float(np.quantile(max_deviation(est, scenario.truth), 1.0 - alpha))
    if quant == 0.0:
        return 0.0
    return quant / scenario.threshold_plan(alpha).unit_cutoff


@dataclass(frozen=True)
class FWERResult:
    fwer: float
    se: float
    power: np.ndarray
    signals: tuple[tuple[int, int], ...]
    reps: int

    def to_dict(self) -> dict:
        return {
            "fwer": float(self.fwer),
            "fwer_se": float(self.se),
            "reps": int(self.reps),
            "power": {f"{k},{l}": float(v) for (k, l), v in zip(self.signals, self.power)},
        }


def estimate_fwer(
    scenario: EstimatorScenario,
    cutoff: float,
    reps: int,
    seed: int,
    workers: int = 1,
    stream: int | str = "main",
) -> FWERResult:
    """Fraction of replicates with a false rejection, and per-signal power."""
    null = scenario.population.null_set
    if not null.any():
        raise DomainError("the scenario has no true nulls, so the FWER is undefined")
    if not cutoff > 0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    est = run_replicates(scenario, reps, seed, stream, workers)
    reject = np.abs(est) > cutoff
    any_false = reject[:, null].any(axis=1)
    fwer = float(any_false.mean())
    signals = tuple((int(k), int(l)) for k, l in np.argwhere(~null))
    power = np.array([reject[:, k, l].mean() for k, l in signals])
    return FWERResult(fwer, math.sqrt(fwer * (1 - fwer) / reps), power, signals, reps)


@dataclass(frozen=True)
class HoeffdingScenario:
    """``sum_i alpha_i g_i Z_i`` with ``g_i ~ Bernoulli(pi)`` and centred
    normal ``Z_i``."""

    alpha: tuple[float, ...]
    pi: float = 0.7
    sd: float = 1.0

    @property
    def K(self) -> float:
        return GAUSSIAN_PSI2 * self.sd

    def evaluation(self, c: float = bounds.DEFAULT_C) -> bounds.BoundEvaluation:
        return bounds.hoeffding_evaluation(self.K, np.asarray(self.alpha), c=c)

    def __call__(self, rng: np.random.Generator, count: int) -> np.ndarray:
        a = np.asarray(self.alpha, dtype=float)
        z = self.sd * rng.standard_normal((count, a.size))
        g = rng.random((count, a.size)) < self.pi
        return (z * g) @ a
