"""Population, missingness and measurement-error specifications.

These are the moment contracts the estimators and generators share: the
estimators read the known moments, the generators realise them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import (
    CouplingWeights,
    ScaledBeta,
    bernoulli_components,
    beta_components,
    solve_weights,
)
from .errors import DimensionError, DomainError, FeasibilityError, NotPSDError
from .norms import MaskMoments

GAUSSIAN_PSI2 = math.sqrt(2.0 / math.pi)
FAMILIES = ("gaussian", "rademacher")
_PSD_RTOL = 1e-10


def _vec(x, length: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(length, float(arr))
    if arr.shape != (length,):
        raise DimensionError(f"{name} must have length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _mat(x, shape: tuple[int, int], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(shape, float(arr))
    if arr.shape != shape:
        raise DimensionError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def psd_factor(cov: np.ndarray) -> np.ndarray:
    """Return ``L`` with ``L @ L.T == cov`` after validating semidefiniteness.

    On failure, :class:`NotPSDError` names the smallest leading principal
    submatrix that is already indefinite.
    """
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise NotPSDError("covariance matrix is not symmetric", order=0)
    w, V = np.linalg.eigh(cov)
    tol = _PSD_RTOL * max(1.0, float(np.abs(w).max()))
    if w.min() < -tol:
        order = cov.shape[0]
        for k in range(1, cov.shape[0] + 1):
            if np.linalg.eigvalsh(cov[:k, :k]).min() < -tol:
                order = k
                break
        raise NotPSDError(
            f"covariance is not positive semidefinite: leading principal submatrix of "
            f"order {order} has a negative eigenvalue",
            order=order,
        )
    return V * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class PopulationSpec:
    """Means, block covariances and sub-Gaussian constants of ``(X, Y)``.

    ``family`` picks the generator: ``gaussian`` draws the joint normal;
    ``rademacher`` draws ``mu + L w`` with ``w`` a vector of independent
    signs and ``L L^T`` the joint covariance (bounded, sub-Gaussian, same
    first two moments).  ``KX``/``KY`` default to the largest marginal
    psi_2 norm the family admits: ``sqrt(2/pi) * sd`` for Gaussian and ``sd``
    for Rademacher combinations.
    """

    muX: np.ndarray
    muY: np.ndarray
    SigmaXY: np.ndarray
    SigmaXX: np.ndarray
    SigmaYY: np.ndarray
    KX: float | None = None
    KY: float | None = None
    family: str = "gaussian"
    factor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        muX = np.atleast_1d(np.asarray(self.muX, dtype=float))
        muY = np.atleast_1d(np.asarray(self.muY, dtype=float))
        p, q = muX.shape[0], muY.shape[0]
        object.__setattr__(self, "muX", _vec(muX, p, "muX"))
        object.__setattr__(self, "muY", _vec(muY, q, "muY"))
        object.__setattr__(self, "SigmaXY", _mat(self.SigmaXY, (p, q), "SigmaXY"))
        object.__setattr__(self, "SigmaXX", _mat(self.SigmaXX, (p, p), "SigmaXX"))
        object.__setattr__(self, "SigmaYY", _mat(self.SigmaYY, (q, q), "SigmaYY"))
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        object.__setattr__(self, "factor", psd_factor(self.joint_cov))
        scale = GAUSSIAN_PSI2 if self.family == "gaussian" else 1.0
        if self.KX is None:
            object.__setattr__(self, "KX", scale * float(np.sqrt(np.diag(self.SigmaXX)).max()))
        if self.KY is None:
            object.__setattr__(self, "KY", scale * float(np.sqrt(np.diag(self.SigmaYY)).max()))
        if self.KX < 0 or self.KY < 0:
            raise DomainError("KX and KY must be nonnegative")

    @property
    def p(self) -> int:
        return self.muX.shape[0]

    @property
    def q(self) -> int:
        return self.muY.shape[0]

    @property
    def joint_mean(self) -> np.ndarray:
        return np.concatenate([self.muX, self.muY])

    @property
    def joint_cov(self) -> np.ndarray:
        return np.block([[self.SigmaXX, self.SigmaXY], [self.SigmaXY.T, self.SigmaYY]])

    @property
    def null_set(self) -> np.ndarray:
        """Boolean ``p x q`` mask of the true nulls ``sigma_kl == 0``."""
        return self.SigmaXY == 0.0

    @classmethod
    def build(
        cls,
        p: int,
        q: int,
        mu_x=0.0,
        mu_y=0.0,
        sd_x=1.0,
        sd_y=1.0,
        corr_x: float = 0.0,
        corr_y: float = 0.0,
        sigma_xy=None,
        signals=(),
        family: str = "gaussian",
        KX: float | None = None,
        KY: float | None = None,
    ) -> "PopulationSpec":
        """Equicorrelated blocks plus a cross block given densely or as
        ``(k, l, covariance)`` triples."""
        sd_x = _vec(sd_x, p, "sd_x")
        sd_y = _vec(sd_y, q, "sd_y")
        Rx = np.full((p, p), corr_x)
        np.fill_diagonal(Rx, 1.0)
        Ry = np.full((q, q), corr_y)
        np.fill_diagonal(Ry, 1.0)
        sxy = np.zeros((p, q)) if sigma_xy is None else np.array(sigma_xy, dtype=float)
        for k, l, v in signals:
            sxy[int(k), int(l)] = float(v)
        return cls(
            muX=_vec(mu_x, p, "mu_x"),
            muY=_vec(mu_y, q, "mu_y"),
            SigmaXY=sxy,
            SigmaXX=sd_x[:, None] * Rx * sd_x[None, :],
            SigmaYY=sd_y[:, None] * Ry * sd_y[None, :],
            KX=KX,
            KY=KY,
            family=family,
        )


def _frechet_check(pi_x: np.ndarray, pi_y: np.ndarray, pi_xy: np.ndarray) -> None:
    lo = np.maximum(0.0, pi_x[:, None] + pi_y[None, :] - 1.0)
    hi = np.minimum(pi_x[:, None], pi_y[None, :])
    bad = np.argwhere((pi_xy < lo - 1e-12) | (pi_xy > hi + 1e-12))
    if bad.size:
        k, l = (int(i) for i in bad[0])
        raise FeasibilityError(
            f"piXY[{k}][{l}] = {pi_xy[k, l]} violates the Frechet bounds "
            f"[{lo[k, l]}, {hi[k, l]}]",
            cell=(k, l),
        )


@dataclass(frozen=True)
class MissingSpec:
    """Observation probabilities ``pi_k^X``, ``pi_l^Y`` and joint table ``pi_kl``.

    If ``coupling`` is omitted it is solved from the table; a table that is
    Frechet-feasible but not realisable by the shared-latent generator raises
    :class:`FeasibilityError`.
    """

    piX: np.ndarray
    piY: np.ndarray
    piXY: np.ndarray
    coupling: CouplingWeights | None = None

    def __post_init__(self):
        piX = np.atleast_1d(np.asarray(self.piX, dtype=float))
        piY = np.atleast_1d(np.asarray(self.piY, dtype=float))
        p, q = piX.shape[0], piY.shape[0]
        piX = _vec(piX, p, "piX")
        piY = _vec(piY, q, "piY")
        for name, v in (("piX", piX), ("piY", piY)):
            if np.any(v <= 0) or np.any(v > 1):
                raise DomainError(f"{name} entries must lie in (0, 1]")
        piXY = _mat(self.piXY, (p, q), "piXY")
        object.__setattr__(self, "piX", piX)
        object.__setattr__(self, "piY", piY)
        object.__setattr__(self, "piXY", piXY)
        _frechet_check(piX, piY, piXY)
        comps = bernoulli_components(piX[:, None], piY[None, :])
        if self.coupling is None:
            object.__setattr__(self, "coupling", solve_weights(comps, piXY))
        else:
            implied = comps @ self.coupling.as_array()
            if not np.allclose(implied, piXY, rtol=0, atol=1e-9):
                k, l = np.unravel_index(int(np.abs(implied - piXY).argmax()), piXY.shape)
                raise FeasibilityError(
                    f"piXY[{k}][{l}] does not match the declared coupling", cell=(int(k), int(l))
                )

    @property
    def p(self) -> int:
        return self.piX.shape[0]

    @property
    def q(self) -> int:
        return self.piY.shape[0]

    @classmethod
    def preset(cls, pi_x, pi_y, coupling: str | CouplingWeights, p: int | None = None,
               q: int | None = None) -> "MissingSpec":
        """Spec whose joint table is implied by a coupling preset or weights."""
        w = CouplingWeights.preset(coupling) if isinstance(coupling, str) else coupling
        pi_x = np.atleast_1d(np.asarray(pi_x, dtype=float))
        pi_y = np.atleast_1d(np.asarray(pi_y, dtype=float))
        if p is not None and pi_x.size == 1:
            pi_x = np.full(p, pi_x[0])
        if q is not None and pi_y.size == 1:
            pi_y = np.full(q, pi_y[0])
        table = bernoulli_components(pi_x[:, None], pi_y[None, :]) @ w.as_array()
        return cls(pi_x, pi_y, table, w)

    def pi_mins(self) -> tuple[float, float]:
        """``(min_kl pi_kl, min(min_k pi_k^X, min_l pi_l^Y))``."""
        return float(self.piXY.min()), float(min(self.piX.min(), self.piY.min()))

    def mask_moments(self, k: int, l: int, n: int) -> MaskMoments:
        return MaskMoments.uniform(n, self.piX[k], self.piY[l], self.piXY[k, l])


@dataclass(frozen=True)
class MeasurementErrorSpec:
    """Bounded multiplicative errors: means ``u``, joint means ``U^XY``, bounds ``B``.

    Errors are generated as ``B * Beta`` with the requested mean and shape
    sum ``dispersion``; the joint table must be realisable by the
    shared-latent coupling of those marginals.
    """

    uX: np.ndarray
    uY: np.ndarray
    uXY: np.ndarray
    BX: np.ndarray
    BY: np.ndarray
    coupling: CouplingWeights | None = None
    dispersion: float = 10.0

    def __post_init__(self):
        uX = np.atleast_1d(np.asarray(self.uX, dtype=float))
        uY = np.atleast_1d(np.asarray(self.uY, dtype=float))
        p, q = uX.shape[0], uY.shape[0]
        uX, uY = _vec(uX, p, "uX"), _vec(uY, q, "uY")
        BX, BY = _vec(self.BX, p, "BX"), _vec(self.BY, q, "BY")
        uXY = _mat(self.uXY, (p, q), "uXY")
        for name, v in (("uX", uX), ("uY", uY), ("BX", BX), ("BY", BY), ("uXY", uXY)):
            if np.any(v <= 0):
                raise DomainError(f"{name} entries must be positive")
        for name, u, b in (("uX", uX, BX), ("uY", uY, BY)):
            bad = np.flatnonzero(u > b * (1 + 1e-12))
            if bad.size:
                i = int(bad[0])
                raise FeasibilityError(f"{name}[{i}] = {u[i]} exceeds its bound {b[i]}")
        over = np.argwhere(uXY > BX[:, None] * BY[None, :] * (1 + 1e-12))
        if over.size:
            k, l = (int(i) for i in over[0])
            raise FeasibilityError(
                f"uXY[{k}][{l}] = {uXY[k, l]} exceeds BX[{k}] * BY[{l}]", cell=(k, l)
            )
        for name, v in (("uX", uX), ("uY", uY), ("BX", BX), ("BY", BY), ("uXY", uXY)):
            object.__setattr__(self, name, v)
        comps = self.components()
        if self.coupling is None:
            object.__setattr__(self, "coupling", solve_weights(comps, uXY, atol=1e-8))
        else:
            implied = comps @ self.coupling.as_array()
            if not np.allclose(implied, uXY, rtol=1e-8, atol=1e-10):
                k, l = np.unravel_index(int(np.abs(implied - uXY).argmax()), uXY.shape)
                raise FeasibilityError(
                    f"uXY[{k}][{l}] does not match the declared coupling", cell=(int(k), int(l))
                )

    @property
    def p(self) -> int:
        return self.uX.shape[0]

    @property
    def q(self) -> int:
        return self.uY.shape[0]

    def marginal_x(self, k: int) -> ScaledBeta:
        return ScaledBeta(float(self.BX[k]), float(self.uX[k]), self.dispersion)

    def marginal_y(self, l: int) -> ScaledBeta:
        return ScaledBeta(float(self.BY[l]), float(self.uY[l]), self.dispersion)

    def components(self) -> np.ndarray:
        out = np.empty((self.p, self.q, 3))
        for k in range(self.p):
            mx = self.marginal_x(k)
            for l in range(self.q):
                out[k, l] = beta_components(mx, self.marginal_y(l))
        return out

    @classmethod
    def preset(cls, u_x, u_y, b_x, b_y, coupling: str | CouplingWeights,
               dispersion: float = 10.0, p: int | None = None,
               q: int | None = None) -> "MeasurementErrorSpec":
        w = CouplingWeights.preset(coupling) if isinstance(coupling, str) else coupling
        u_x = np.atleast_1d(np.asarray(u_x, dtype=float))
        u_y = np.atleast_1d(np.asarray(u_y, dtype=float))
        if p is not None and u_x.size == 1:
            u_x = np.full(p, u_x[0])
        if q is not None and u_y.size == 1:
            u_y = np.full(q, u_y[0])
        b_x = _vec(b_x, u_x.shape[0], "b_x")
        b_y = _vec(b_y, u_y.shape[0], "b_y")
        comps = np.empty((u_x.shape[0], u_y.shape[0], 3))
        for k in range(u_x.shape[0]):
            mx = ScaledBeta(float(b_x[k]), float(u_x[k]), dispersion)
            for l in range(u_y.shape[0]):
                comps[k, l] = beta_components(mx, ScaledBeta(float(b_y[l]), float(u_y[l]), dispersion))
        table = comps @ w.as_array()
        return cls(u_x, u_y, table, b_x, b_y, w, dispersion)

    def u_mins(self) -> tuple[float, float]:
        return float(self.uXY.min()), float(min(self.uX.min(), self.uY.min()))

    def B_max(self) -> tuple[float, float]:
        return float(self.BX.max()), float(self.BY.max())

    def u_max(self) -> tuple[float, float]:
        return float(self.uX.max()), float(self.uY.max())
