"""Right-hand sides of the sparse bilinear Hanson-Wright bounds and the
FWER-controlling thresholds built from them.

Every tail has the shape ``d * exp(-c * min(t^2 / E1, t / E2))``.  The
numerical constants ``c`` and ``d`` are not pinned down by the theory; they
are ordinary parameters here, and :mod:`sparsehw.simulation` can calibrate
them.  Tail probabilities are reported both clamped to ``[0, 1]`` and raw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple

import numpy as np

from .errors import DegenerateConditionError, DimensionError, DomainError, StructureError
from .norms import CoefficientMatrix, MaskMoments, as_coefficient_matrix, diag_scale, pi_frobenius

DEFAULT_C = 1.0 / 16.0
DEFAULT_D_CENTERED = 2.0
DEFAULT_D_NONCENTERED = 8.0
STRUCTURES = ("full", "diagonal", "off-diagonal")


@dataclass(frozen=True)
class SubGaussianParams:
    K1: float
    K2: float

    def __post_init__(self):
        if not (self.K1 > 0 and self.K2 > 0):
            raise DomainError(f"psi_2 bounds must be positive, got K1={self.K1}, K2={self.K2}")


@dataclass(frozen=True)
class MeanVectors:
    mu1: np.ndarray
    mu2: np.ndarray

    def __post_init__(self):
        for name in ("mu1", "mu2"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise DomainError(f"{name} must be a finite vector")
            object.__setattr__(self, name, v)
        if self.mu1.shape != self.mu2.shape:
            raise DimensionError("mu1 and mu2 must have equal length")

    @property
    def n(self) -> int:
        return self.mu1.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "MeanVectors":
        return cls(np.zeros(n), np.zeros(n))


@dataclass(frozen=True)
class ErrorBounds:
    B1: np.ndarray
    B2: np.ndarray

    def __post_init__(self):
        for name in ("B1", "B2"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if v.ndim != 1 or np.any(~(v > 0)) or not np.all(np.isfinite(v)):
                raise DomainError(f"{name} entries must be strictly positive and finite")
            object.__setattr__(self, name, v)
        if self.B1.shape != self.B2.shape:
            raise DimensionError("B1 and B2 must have equal length")

    @property
    def n(self) -> int:
        return self.B1.shape[0]


class TailBound(NamedTuple):
    value: np.ndarray | float  # clamped to [0, 1]
    raw: np.ndarray | float


class EValues(NamedTuple):
    E1: float
    E2: float
    terms1: Mapping[str, float]
    terms2: Mapping[str, float]


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / den if den > 0 else np.inf, np.inf)
    return out


@dataclass(frozen=True)
class BoundEvaluation:
    """Assembled ``E1``, ``E2`` and constants of one tail bound."""

    E1: float
    E2: float
    c: float = DEFAULT_C
    d: float = DEFAULT_D_CENTERED
    terms: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.E1 < 0 or self.E2 < 0:
            raise DomainError("E1 and E2 must be nonnegative")
        if not (self.c > 0 and self.d > 0):
            raise DomainError("constants c and d must be positive")

    @property
    def kink(self) -> float:
        """Switch point ``E1/E2`` between the quadratic and linear exponent."""
        return self.E1 / self.E2 if self.E2 > 0 else math.inf

    def exponent(self, t):
        """``min(t^2/E1, t/E2)``; the tail is ``d * exp(-c * exponent)``."""
        t = np.asarray(t, dtype=float)
        quad = _ratio(t * t, self.E1)
        lin = _ratio(t, self.E2)
        out = np.minimum(quad, lin)
        return float(out) if out.ndim == 0 else out

    def tail(self, t) -> TailBound:
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise DomainError("t must be positive")
        raw = self.d * np.exp(-self.c * np.asarray(self.exponent(t_arr)))
        clamped = np.minimum(raw, 1.0)
        if raw.ndim == 0:
            return TailBound(float(clamped), float(raw))
        return TailBound(clamped, raw)

    def with_constants(self, c: float | None = None, d: float | None = None) -> "BoundEvaluation":
        return replace(self, c=self.c if c is None else c, d=self.d if d is None else d)


def _check_n(A: CoefficientMatrix, n: int, what: str) -> None:
    if n != A.n:
        raise DimensionError(f"{what} has length {n}, matrix has n={A.n}")


def centered_evaluation(
    sg: SubGaussianParams,
    A,
    m: MaskMoments,
    c: float = DEFAULT_C,
    d: float = DEFAULT_D_CENTERED,
    structure: str = "full",
) -> BoundEvaluation:
    """Bound for a centred sparse bilinear form.

    ``structure='full'`` uses the mask-weighted Frobenius norm and the
    operator norm.  ``'diagonal'`` uses ``sum_j pi12_j a_jj^2`` and
    ``max_j |a_jj|``; ``'off-diagonal'`` uses
    ``sum_{i != j} a_ij^2 pi1_i pi2_j`` and the operator norm.
    """
    A = as_coefficient_matrix(A)
    _check_n(A, m.n, "mask moments")
    KK = sg.K1 * sg.K2
    if structure == "full":
        var = pi_frobenius(A, m) ** 2
        scale = A.operator_norm()
    elif structure == "diagonal":
        if not A.is_diagonal():
            raise StructureError("structure='diagonal' requires a diagonal matrix")
        diag = A.diagonal()
        var = float(np.sum(m.pi12 * diag * diag))
        scale = float(np.abs(diag).max())
    elif structure == "off-diagonal":
        if not A.has_zero_diagonal():
            raise StructureError("structure='off-diagonal' requires a zero diagonal")
        sq = A.entries ** 2
        var = float(m.pi1 @ sq @ m.pi2)
        scale = A.operator_norm()
    else:
        raise DomainError(f"structure must be one of {STRUCTURES}, got {structure!r}")
    return BoundEvaluation(
        E1=KK * KK * var,
        E2=KK * scale,
        c=c,
        d=d,
        terms={"variance": var, "scale": scale},
    )


def hw_tail_centered(
    t,
    sg: SubGaussianParams,
    A,
    m: MaskMoments,
    c: float = DEFAULT_C,
    structure: str = "full",
    d: float = DEFAULT_D_CENTERED,
) -> TailBound:
    return centered_evaluation(sg, A, m, c=c, d=d, structure=structure).tail(t)


def _bernoulli_spread(pi: np.ndarray) -> float:
    return float(np.max(pi * (1.0 - pi))) if pi.size else 0.0


def e1_e2_noncentered(sg: SubGaussianParams, A, mu: MeanVectors, m: MaskMoments) -> EValues:
    """The eight-term ``E1`` and four-term ``E2`` for non-centred inputs with
    Bernoulli masks.  ``V_i = max_j pi_ij (1 - pi_ij)``."""
    A = as_coefficient_matrix(A)
    _check_n(A, mu.n, "mean vectors")
    _check_n(A, m.n, "mask moments")
    K1, K2 = sg.K1, sg.K2
    V1, V2 = _bernoulli_spread(m.pi1), _bernoulli_spread(m.pi2)
    mu1, mu2 = mu.mu1, mu.mu2
    M = A.entries
    mp1 = mu1 * m.pi1
    mp2 = mu2 * m.pi2
    At_mp1 = A.rmatvec(mp1)
    A_mp2 = A.matvec(mp2)
    D_mu_A_D_mu = diag_scale(A, mu1, mu2)

    terms1 = {
        "K1^2 K2^2 |A|_Fpi^2": (K1 * K2) ** 2 * pi_frobenius(A, m) ** 2,
        "V1^2 V2^2 |D(mu1) A D(mu2)|_F^2": (V1 * V2) ** 2 * D_mu_A_D_mu.frobenius() ** 2,
        "V1^2 K2^2 |D(|mu1|) A D(pi2)^1/2|_F^2": (V1 * K2) ** 2
        * float(np.sum((mu1[:, None] ** 2) * M**2 * m.pi2[None, :])),
        "V2^2 K1^2 |D(pi1)^1/2 A D(|mu2|)|_F^2": (V2 * K1) ** 2
        * float(np.sum(m.pi1[:, None] * M**2 * (mu2[None, :] ** 2))),
        "K2^2 |A^T (mu1 pi1)|^2": K2**2 * float(At_mp1 @ At_mp1),
        "K1^2 |A (mu2 pi2)|^2": K1**2 * float(A_mp2 @ A_mp2),
        "V1^2 |(A (mu2 pi2)) mu1|^2": V1**2 * float(np.sum((A_mp2 * mu1) ** 2)),
        # The linear term in (gamma_2 - pi_2) has coefficients mu2_j (A^T (mu1 pi1))_j;
        # identical to the A form whenever A is symmetric.
        "V2^2 |(A^T (mu1 pi1)) mu2|^2": V2**2 * float(np.sum((At_mp1 * mu2) ** 2)),
    }
    terms2 = {
        "K1 K2 |A|_2": K1 * K2 * A.operator_norm(),
        "V1 V2 |D(mu1) A D(mu2)|_2": V1 * V2 * D_mu_A_D_mu.operator_norm() if V1 * V2 > 0 else 0.0,
        "V1 K2 |D(mu1) A|_2": V1 * K2 * diag_scale(A, mu1, np.ones(A.n)).operator_norm()
        if V1 > 0 else 0.0,
        "V2 K1 |A D(mu2)|_2": V2 * K1 * diag_scale(A, np.ones(A.n), mu2).operator_norm()
        if V2 > 0 else 0.0,
    }
    return EValues(max(terms1.values()), max(terms2.values()), terms1, terms2)


def noncentered_evaluation(
    sg: SubGaussianParams,
    A,
    mu: MeanVectors,
    m: MaskMoments,
    c: float = DEFAULT_C,
    d: float = DEFAULT_D_NONCENTERED,
) -> BoundEvaluation:
    ev = e1_e2_noncentered(sg, A, mu, m)
    return BoundEvaluation(ev.E1, ev.E2, c=c, d=d, terms={**ev.terms1, **ev.terms2})


def hw_tail_noncentered(t, ev: BoundEvaluation) -> TailBound:
    """``d exp(-c min(t^2/E1, t/E2))``, clamped with the raw value kept."""
    return ev.tail(t)


def bounded_error_evaluation(
    sg: SubGaussianParams,
    A,
    b: ErrorBounds,
    c: float = DEFAULT_C,
    d: float = DEFAULT_D_CENTERED,
) -> BoundEvaluation:
    A = as_coefficient_matrix(A)
    _check_n(A, b.n, "error bounds")
    KK = sg.K1 * sg.K2
    var = diag_scale(A, b.B1, b.B2).frobenius() ** 2
    scale = A.operator_norm()
    return BoundEvaluation(KK * KK * var, KK * scale, c=c, d=d,
                           terms={"variance": var, "scale": scale})


def hw_tail_bounded_error(
    t, sg: SubGaussianParams, A, b: ErrorBounds, c: float = DEFAULT_C,
    d: float = DEFAULT_D_CENTERED,
) -> TailBound:
    return bounded_error_evaluation(sg, A, b, c=c, d=d).tail(t)


def e1_e2_bounded_error(
    sg: SubGaussianParams, A, mu: MeanVectors, b: ErrorBounds, u: MeanVectors
) -> EValues:
    """Six-term ``E1`` and three-term ``E2`` for non-centred inputs with bounded
    multiplicative errors; ``u`` carries the error means."""
    A = as_coefficient_matrix(A)
    for what, n in (("mean vectors", mu.n), ("error bounds", b.n), ("error means", u.n)):
        _check_n(A, n, what)
    K1, K2 = sg.K1, sg.K2
    mu1, mu2 = mu.mu1, mu.mu2
    B1, B2 = b.B1, b.B2
    B1max, B2max = float(B1.max()), float(B2.max())
    M = A.entries
    At_mu1 = A.rmatvec(mu1 * u.mu1)
    A_mu2 = A.matvec(mu2 * u.mu2)
    terms1 = {
        "K1^2 K2^2 |D(B1) A D(B2)|_F^2": (K1 * K2) ** 2 * diag_scale(A, B1, B2).frobenius() ** 2,
        "maxB1^2 K2^2 |D(|mu1|) A D(B2)^1/2|_F^2": B1max**2 * K2**2
        * float(np.sum((mu1[:, None] ** 2) * M**2 * B2[None, :])),
        "maxB2^2 K1^2 |D(B1)^1/2 A D(|mu2|)|_F^2": B2max**2 * K1**2
        * float(np.sum(B1[:, None] * M**2 * (mu2[None, :] ** 2))),
        "K2^2 |(A^T (mu1 u1)) B2|^2": K2**2 * float(np.sum((At_mu1 * B2) ** 2)),
        "K1^2 |(A (mu2 u2)) B1|^2": K1**2 * float(np.sum((A_mu2 * B1) ** 2)),
        "maxB1^2 maxB2^2 |D(mu1) A D(mu2)|_F^2": (B1max * B2max) ** 2
        * diag_scale(A, mu1, mu2).frobenius() ** 2,
    }
    ones = np.ones(A.n)
    terms2 = {
        "K1 K2 |A|_2": K1 * K2 * A.operator_norm(),
        "maxB1 K2 |D(mu1) A|_2": B1max * K2 * diag_scale(A, mu1, ones).operator_norm()
        if np.any(mu1) else 0.0,
        "maxB2 K1 |A D(mu2)|_2": B2max * K1 * diag_scale(A, ones, mu2).operator_norm()
        if np.any(mu2) else 0.0,
    }
    return EValues(max(terms1.values()), max(terms2.values()), terms1, terms2)


def bounded_error_noncentered_evaluation(
    sg: SubGaussianParams,
    A,
    mu: MeanVectors,
    b: ErrorBounds,
    u: MeanVectors,
    c: float = DEFAULT_C,
    d: float = DEFAULT_D_NONCENTERED,
) -> BoundEvaluation:
    ev = e1_e2_bounded_error(sg, A, mu, b, u)
    return BoundEvaluation(ev.E1, ev.E2, c=c, d=d, terms={**ev.terms1, **ev.terms2})


def hoeffding_evaluation(K: float, alpha_vec, c: float = DEFAULT_C, d: float = 2.0) -> BoundEvaluation:
    """Tail of ``sum alpha_i gamma_i Z_i`` as a pure sub-Gaussian bound.

    Represented with ``E2 = 0`` so the exponent is ``t^2 / E1`` throughout.
    """
    alpha_vec = np.asarray(alpha_vec, dtype=float)
    norm2 = float(alpha_vec @ alpha_vec)
    if norm2 == 0.0:
        raise DomainError("Hoeffding bound is undefined for a zero coefficient vector")
    if not K > 0:
        raise DomainError("K must be positive")
    return BoundEvaluation(K * K * norm2, 0.0, c=c, d=d, terms={"|alpha|^2": norm2})


def hoeffding_tail(t, K: float, alpha_vec, c: float = DEFAULT_C) -> TailBound:
    """``2 exp(-c t^2 / (K^2 |alpha|_2^2))``."""
    ev = hoeffding_evaluation(K, alpha_vec, c=c)
    t = np.asarray(t, dtype=float)
    raw = ev.d * np.exp(-c * t * t / ev.E1)
    clamped = np.minimum(raw, 1.0)
    if raw.ndim == 0:
        return TailBound(float(clamped), float(raw))
    return TailBound(clamped, raw)


# ---------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class ThresholdPlan:
    """Cutoff ``constant * scale * rate`` for entrywise thresholding.

    ``condition_ok`` is None when the sample-size condition is undefined
    (see :func:`threshold_missing`).
    """

    n: int
    p: int
    q: int
    alpha: float
    constant: float
    scale: float
    rate: float
    cutoff: float
    condition_ok: bool | None
    details: Mapping[str, float] = field(default_factory=dict)

    @property
    def unit_cutoff(self) -> float:
        """Cutoff with the numerical constant set to one."""
        return self.scale * self.rate


def _log_term(n: int, p: int, q: int, alpha: float) -> float:
    if n < 2:
        raise DomainError(f"thresholds need n >= 2, got n={n}")
    if p < 1 or q < 1:
        raise DomainError("p and q must be positive")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    ratio = p * q / alpha
    if ratio <= 1.0:
        raise DomainError("p*q/alpha must exceed 1 for the log term to be positive")
    return math.log(ratio)


def threshold_complete(
    n: int, p: int, q: int, alpha: float, sg: SubGaussianParams,
    C1: float = 1.0, d1: float = 1.0,
) -> ThresholdPlan:
    """Complete-data cutoff ``C1 KX KY sqrt(log(pq/alpha) / (n-1))``.

    ``condition_ok`` is ``n / log(pq/alpha) > d1``.  ``details`` records
    whether the cutoff sits in the sub-Gaussian regime ``t / (KX KY) < 1``.
    """
    L = _log_term(n, p, q, alpha)
    scale = sg.K1 * sg.K2
    rate = math.sqrt(L / (n - 1))
    cutoff = C1 * scale * rate
    return ThresholdPlan(
        n, p, q, alpha, C1, scale, rate, cutoff,
        condition_ok=bool(n / L > d1),
        details={"log_term": L, "sub_gaussian_regime": float(cutoff / scale < 1.0)},
    )


def f2_g2(KX: float, KY: float, mu_X: float, mu_Y: float) -> tuple[float, float]:
    f2 = max(KX * KY, mu_X * KY, KX * mu_Y, mu_X * mu_Y, mu_X**2, mu_Y**2)
    g2 = min(1.0, mu_X / KY, mu_Y / KX, mu_X * mu_Y / (KX * KY))
    return f2, g2


def threshold_missing(
    n: int, p: int, q: int, alpha: float, sg: SubGaussianParams,
    mu_max: tuple[float, float], pi_mins: tuple[float, float],
    C2: float = 1.0, d2: float = 1.0, strict: bool = True,
) -> ThresholdPlan:
    """Missing-data cutoff
    ``C2 f2 sqrt(log(pq/alpha) / ((n-1) (piJ ^ piM^2)))``.

    ``g2`` vanishes when either mean bound is zero, which leaves the sample
    size condition undefined: with ``strict`` this raises
    :class:`DegenerateConditionError`, otherwise ``condition_ok`` is None.
    """
    L = _log_term(n, p, q, alpha)
    piJ, piM = (float(v) for v in pi_mins)
    if not (0.0 < piJ <= 1.0 and 0.0 < piM <= 1.0):
        raise DomainError(f"pi_mins must lie in (0, 1], got {pi_mins}")
    mu_X, mu_Y = (abs(float(v)) for v in mu_max)
    f2, g2 = f2_g2(sg.K1, sg.K2, mu_X, mu_Y)
    factor = min(piJ, piM * piM)
    rate = math.sqrt(L / ((n - 1) * factor))
    if g2 > 0:
        condition_ok = bool((n - 1) / L > d2 / (g2 * factor))
    elif strict:
        raise DegenerateConditionError(
            "g2 = 0 (a mean bound is zero): the sample-size condition is undefined"
        )
    else:
        condition_ok = None
    return ThresholdPlan(
        n, p, q, alpha, C2, f2, rate, C2 * f2 * rate, condition_ok,
        details={"log_term": L, "f2": f2, "g2": g2, "pi_factor": factor},
    )


def f3_g3(
    KX: float, KY: float, mu_X: float, mu_Y: float, B_X: float, B_Y: float,
    u_X: float | None = None, u_Y: float | None = None,
) -> tuple[float, float]:
    """Scale and condition factors for bounded multiplicative errors.

    ``u_X``/``u_Y`` default to the bounds; since error means never exceed
    their bounds the two ``u``-bearing terms cannot then set the maximum.
    """
    u_X = B_X if u_X is None else u_X
    u_Y = B_Y if u_Y is None else u_Y
    f3 = max(
        KX * KY * B_X * B_Y,
        mu_X * KY * B_X * B_Y,
        KX * mu_Y * B_X * B_Y,
        mu_X * mu_Y * B_X * B_Y,
        KX * mu_Y * B_X * u_Y,
        mu_X * KY * u_X * B_Y,
    )
    gx = KX / (B_X * mu_X) if mu_X > 0 else math.inf
    gy = KY / (B_Y * mu_Y) if mu_Y > 0 else math.inf
    return f3, min(1.0, gx, gy)


def threshold_me(
    n: int, p: int, q: int, alpha: float, sg: SubGaussianParams,
    mu_max: tuple[float, float], B_max: tuple[float, float], u_mins: tuple[float, float],
    C3: float = 1.0, d3: float = 1.0, u_max: tuple[float, float] | None = None,
) -> ThresholdPlan:
    """Bounded-error cutoff
    ``C3 f3 sqrt(log(pq/alpha) / ((n-1) (uJ^2 ^ uM^4)))``; the condition is
    ``(n-1)/log(pq/alpha) >= d3 / (g3 (uJ ^ uM^2))``."""
    L = _log_term(n, p, q, alpha)
    uJ, uM = (float(v) for v in u_mins)
    if not (uJ > 0 and uM > 0):
        raise DomainError(f"u_mins must be positive, got {u_mins}")
    B_X, B_Y = (float(v) for v in B_max)
    if not (B_X > 0 and B_Y > 0):
        raise DomainError(f"B_max must be positive, got {B_max}")
    mu_X, mu_Y = (abs(float(v)) for v in mu_max)
    u_X, u_Y = (None, None) if u_max is None else (float(u_max[0]), float(u_max[1]))
    f3, g3 = f3_g3(sg.K1, sg.K2, mu_X, mu_Y, B_X, B_Y, u_X, u_Y)
    rate = math.sqrt(L / ((n - 1) * min(uJ * uJ, uM**4)))
    factor = min(uJ, uM * uM)
    condition_ok = bool((n - 1) / L >= d3 / (g3 * factor))
    return ThresholdPlan(
        n, p, q, alpha, C3, f3, rate, C3 * f3 * rate, condition_ok,
        details={"log_term": L, "f3": f3, "g3": g3, "u_factor": factor},
    )


# ---------------------------------------------------------------------------
# entrywise E-values for the estimators


def _positive(name: str, v: float) -> float:
    v = float(v)
    if not v > 0:
        raise DomainError(f"{name} must be positive, got {v}")
    return v


def e1_e2_missing_entry(
    n: int, sg: SubGaussianParams, mu_kl: tuple[float, float],
    pis: tuple[float, float, float],
) -> EValues:
    """``E_{1,kl}`` and ``E_{2,kl}`` of the IPW estimator for one entry.

    ``mu_kl = (mu_k^X, mu_l^Y)``, ``pis = (pi_kl, pi_k^X, pi_l^Y)``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    pkl, px, py = (_positive(nm, v) for nm, v in zip(("pi_kl", "pi_x", "pi_y"), pis))
    if max(pkl, px, py) > 1:
        raise DomainError("probabilities must not exceed 1")
    KX, KY = sg.K1, sg.K2
    mx, my = abs(float(mu_kl[0])), abs(float(mu_kl[1]))
    lead = max(KX**2 * KY**2, KX**2 * my**2, mx**2 * KY**2, mx**2 * my**2)
    lead_w = 1.0 / (n * pkl**2) + 1.0 / (n * (n - 1) * px**2 * py**2)
    mix = max(KX**2 * my**2, mx**2 * KY**2, mx**4, my**4)
    mix_w = (1.0 / pkl - 1.0 / (px * py)) ** 2 / n
    e2_lead = max(KX * KY, KX * my, mx * KY, mx * my)
    e2_w = 1.0 / (n * pkl) + 1.0 / (n * (n - 1) * px * py)
    terms1 = {"leading": lead * lead_w, "mask_mismatch": mix * mix_w}
    terms2 = {"leading": e2_lead * e2_w}
    return EValues(max(terms1.values()), terms2["leading"], terms1, terms2)


def e1_e2_me_entry(
    n: int, sg: SubGaussianParams, mu_kl: tuple[float, float],
    us: tuple[float, float, float], Bs: tuple[float, float],
) -> EValues:
    """Entrywise E-values of the bounded-error estimator.

    ``us = (u_kl, u_k^X, u_l^Y)``, ``Bs = (B_k^X, B_l^Y)``.  The second
    ``E2`` term uses ``B_l^Y``.
    """
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    ukl, ux, uy = (_positive(nm, v) for nm, v in zip(("u_kl", "u_x", "u_y"), us))
    bx, by = (_positive(nm, v) for nm, v in zip(("B_x", "B_y"), Bs))
    KX, KY = sg.K1, sg.K2
    mx, my = abs(float(mu_kl[0])), abs(float(mu_kl[1]))
    lead = max(
        KX**2 * KY**2 * bx**2 * by**2,
        mx**2 * KY**2 * bx**2 * by,
        KX**2 * my**2 * bx * by**2,
        mx**2 * my**2 * bx**2 * by**2,
    )
    lead_w = 1.0 / (n * ukl**2) + 1.0 / (n * (n - 1) * ux**2 * uy**2)
    mix = max(KX**2 * my**2 * bx**2 * uy**2, mx**2 * KY**2 * ux**2 * by**2)
    mix_w = (1.0 / ukl - 1.0 / (ux * uy)) ** 2 / n
    e2_lead = max(KX * KY, KX * my * bx, mx * KY * by)
    e2_w = 1.0 / (n * ukl) + 1.0 / (n * (n - 1) * ux * uy)
    terms1 = {"leading": lead * lead_w, "error_mismatch": mix * mix_w}
    terms2 = {"leading": e2_lead * e2_w}
    return EValues(max(terms1.values()), terms2["leading"], terms1, terms2)
