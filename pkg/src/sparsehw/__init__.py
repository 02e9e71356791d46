"""Sparse bilinear Hanson-Wright bounds and cross-covariance estimation
under missing data and bounded multiplicative errors."""

from .bounds import (
    BoundEvaluation,
    ErrorBounds,
    MeanVectors,
    SubGaussianParams,
    TailBound,
    ThresholdPlan,
    e1_e2_bounded_error,
    e1_e2_me_entry,
    e1_e2_missing_entry,
    e1_e2_noncentered,
    hoeffding_tail,
    hw_tail_bounded_error,
    hw_tail_centered,
    hw_tail_noncentered,
    threshold_complete,
    threshold_me,
    threshold_missing,
)
from .estimators import (
    EstimateMatrix,
    MaskedSamplePair,
    SampleMatrixPair,
    bilinear_value,
    bilinear_value_naive,
    ipw_cross_cov,
    me_cross_cov,
    sample_cross_cov,
    threshold_matrix,
)
from .norms import (
    CoefficientMatrix,
    MaskMoments,
    centering_coefficient_matrix,
    frobenius,
    ipw_coefficient_matrix,
    moment_coefficient_matrix,
    operator_norm,
    pi_frobenius,
)
from .specs import MeasurementErrorSpec, MissingSpec, PopulationSpec

__version__ = "0.1.0"
