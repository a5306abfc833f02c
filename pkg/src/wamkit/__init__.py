"""Distribution distances for image-feature sets.

Fit Gaussians or Gaussian mixtures to two feature collections and measure
the transport cost between them, alongside a kernel distance and normality
diagnostics that explain when the single-Gaussian summary is trustworthy.
"""

from .errors import (
    ComputationError,
    DegenerateComponent,
    DimMismatch,
    DivisionDomain,
    InsufficientCurve,
    InsufficientSamples,
    InvalidInput,
    InvalidMarginals,
    InvalidModel,
    NotPositiveSemidefinite,
    NumericalError,
    Truncated,
    UnknownFormat,
    ValidationError,
    WamkitError,
)
from .featstore import (
    FeatureMatrix,
    read_features,
    read_model,
    write_features,
    write_model,
)
from .gaussian import Gaussian, fit_gaussian, w2_squared
from .gmm import (
    EmConfig,
    FitMeta,
    Gmm,
    KneeResult,
    TransformInfo,
    aic,
    fit_gmm,
    log_likelihood,
    log_transform,
    select_k,
)
from .linalg import psd_sqrt, sym_eigendecomp, symmetrize, trace_sqrt_product
from .metrics import (
    Metric,
    MetricReport,
    MomentLosses,
    SampleSizeWarning,
    SensitivityRatios,
    WamResult,
    fid,
    kid,
    moment_losses,
    sensitivity_ratios,
    wam_squared,
)
from .normtest import KsResult, NormalityReport, ks_pvalue, ks_statistic, marginal_normality_report
from .transport import TransportPlan, ground_cost, mw2_squared, solve_discrete_ot

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "DegenerateComponent",
    "DimMismatch",
    "DivisionDomain",
    "EmConfig",
    "FeatureMatrix",
    "FitMeta",
    "Gaussian",
    "Gmm",
    "InsufficientCurve",
    "InsufficientSamples",
    "InvalidInput",
    "InvalidMarginals",
    "InvalidModel",
    "KneeResult",
    "KsResult",
    "Metric",
    "MetricReport",
    "MomentLosses",
    "NormalityReport",
    "NotPositiveSemidefinite",
    "NumericalError",
    "SampleSizeWarning",
    "SensitivityRatios",
    "TransformInfo",
    "TransportPlan",
    "Truncated",
    "UnknownFormat",
    "ValidationError",
    "WamResult",
    "WamkitError",
    "aic",
    "fid",
    "fit_gaussian",
    "fit_gmm",
    "ground_cost",
    "kid",
    "ks_pvalue",
    "ks_statistic",
    "log_likelihood",
    "log_transform",
    "marginal_normality_report",
    "moment_losses",
    "mw2_squared",
    "psd_sqrt",
    "read_features",
    "read_model",
    "select_k",
    "sensitivity_ratios",
    "solve_discrete_ot",
    "sym_eigendecomp",
    "symmetrize",
    "trace_sqrt_product",
    "w2_squared",
    "wam_squared",
    "write_features",
    "write_model",
]
