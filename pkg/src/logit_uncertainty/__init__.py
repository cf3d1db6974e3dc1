"""Classifier uncertainty from logit outputs via per-class Gaussian mixtures.

Fit full-covariance mixtures to each class's correctly predicted training
logits, calibrate a quantile-anchored logistic map over the log-density-gap
score, then evaluate u(x) in (0, 1) for new logit vectors.  Diagnostics
cover highest-density regions, Mahalanobis radii and a wide random-network
simulator; applications cover expert-deferral cost bounds and KL-based
drift monitoring.
"""

from .applications import (
    CostBound,
    CostCurve,
    Gaussian1D,
    cost_bound_range,
    cost_bound_sweep,
    cost_curve,
    deferral_cost,
    drift_kl,
    drift_sweep,
    fit_gaussian_1d,
    kl_gaussian,
)
from .calibration import (
    ClassCalibration,
    Hyperparams,
    empirical_quantile,
    fit_logistic,
    logistic,
    max_log_density_estimate,
    score,
)
from .data_io import (
    LogitRecord,
    RecordSet,
    load_logit_records,
    load_model,
    read_uncertainty_report,
    save_logit_records,
    save_model,
    write_uncertainty_report,
)
from .diagnostics import (
    HdrEstimate,
    NetworkSimConfig,
    convergence_report,
    hdr_contains,
    hdr_threshold,
    mahalanobis_radius,
    mixture_cdf_1d,
    simulate_wide_network,
    verify_hdr_uncertainty_bound,
)
from .gmm import (
    FitConfig,
    GaussianComponent,
    GmmModel,
    bic,
    em_fit,
    log_density,
    mahalanobis,
    sample,
    select_components,
)
from .model import (
    FittedClass,
    UncertaintyModel,
    UnfittedClass,
    batch_predict,
    default_min_samples_per_class,
    fit_uncertainty_model,
    predict,
)

__version__ = "0.1.0"

__all__ = [
    "ClassCalibration",
    "CostBound",
    "CostCurve",
    "FitConfig",
    "FittedClass",
    "Gaussian1D",
    "GaussianComponent",
    "GmmModel",
    "HdrEstimate",
    "Hyperparams",
    "LogitRecord",
    "NetworkSimConfig",
    "RecordSet",
    "UncertaintyModel",
    "UnfittedClass",
    "batch_predict",
    "bic",
    "convergence_report",
    "cost_bound_range",
    "cost_bound_sweep",
    "cost_curve",
    "default_min_samples_per_class",
    "deferral_cost",
    "drift_kl",
    "drift_sweep",
    "em_fit",
    "empirical_quantile",
    "fit_gaussian_1d",
    "fit_logistic",
    "fit_uncertainty_model",
    "hdr_contains",
    "hdr_threshold",
    "kl_gaussian",
    "load_logit_records",
    "load_model",
    "log_density",
    "logistic",
    "mahalanobis",
    "mahalanobis_radius",
    "max_log_density_estimate",
    "mixture_cdf_1d",
    "predict",
    "read_uncertainty_report",
    "sample",
    "save_logit_records",
    "save_model",
    "score",
    "select_components",
    "simulate_wide_network",
    "verify_hdr_uncertainty_bound",
    "write_uncertainty_report",
]
