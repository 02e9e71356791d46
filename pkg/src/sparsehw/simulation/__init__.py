"""Data generation and Monte Carlo verification."""

from .experiments import (
    FWERResult,
    HoeffdingScenario,
    SimulationReport,
    calibrate_constant,
    calibrate_tail_constant,
    empirical_tail,
    estimate_fwer,
    exceedance,
)
from .generators import (
    draw_errors,
    draw_masks,
    draw_population,
    gen_errors,
    gen_masks,
    gen_population,
)
from .mgf import GaussianPairSampler, MGFCheck, admissible_lambda, mgf_bound_check
from .psi import DEFAULT_P_GRID, gaussian_abs_moment, gaussian_psi_norm, psi_norm_estimate
from .scenarios import SETTINGS, BilinearScenario, EstimatorScenario, build_matrix
from .streams import CHUNK, STREAMS, chunk_rng, run_replicates

__all__ = [
    "BilinearScenario",
    "CHUNK",
    "DEFAULT_P_GRID",
    "EstimatorScenario",
    "FWERResult",
    "GaussianPairSampler",
    "HoeffdingScenario",
    "MGFCheck",
    "SETTINGS",
    "STREAMS",
    "SimulationReport",
    "admissible_lambda",
    "build_matrix",
    "calibrate_constant",
    "calibrate_tail_constant",
    "chunk_rng",
    "draw_errors",
    "draw_masks",
    "draw_population",
    "empirical_tail",
    "estimate_fwer",
    "exceedance",
    "gaussian_abs_moment",
    "gaussian_psi_norm",
    "gen_errors",
    "gen_masks",
    "gen_population",
    "mgf_bound_check",
    "psi_norm_estimate",
    "run_replicates",
]
