"""Density level set estimation: plug-in, excess mass, and hybrid methods,
exact benchmark densities, and a reproducible comparison harness."""

__version__ = "0.1.0"

from .bandwidths import (BandwidthGrid, bc_bandwidth, lscv_bandwidth,
                         sj_bandwidth, sw_bandwidth)
from .estimators import (EstimatorSpec, SampleSession, ch_estimate, chr_estimate,
                         estimate, ms_estimate, ms_maximizer, plugin_estimate,
                         rconvex_hull, ssn_estimate, walther_estimate, xplus)
from .intervals import (IntervalSet, empirical_mass, interval_set, lebesgue_measure,
                        levelset_error, measure_under_density, symmetric_difference,
                        union)
from .kde import KernelEstimate, kde_at, kde_deriv_at, kde_loo_at
from .models import DensityModel, TruthOracle, get_model, load_models
from .simulate import (ErrorRecord, SimulationConfig, default_config, mean_errors,
                       paired_mean_test, rank_methods, run_simulation)
from .thresholds import hyndman_threshold, integration_threshold, walther_threshold

__all__ = [
    "BandwidthGrid", "DensityModel", "ErrorRecord", "EstimatorSpec", "IntervalSet",
    "KernelEstimate", "SampleSession", "SimulationConfig", "TruthOracle",
    "bc_bandwidth", "ch_estimate", "chr_estimate", "default_config", "empirical_mass",
    "estimate", "get_model", "hyndman_threshold", "integration_threshold",
    "interval_set", "kde_at", "kde_deriv_at", "kde_loo_at", "lebesgue_measure",
    "levelset_error", "load_models", "lscv_bandwidth", "mean_errors",
    "measure_under_density", "ms_estimate", "ms_maximizer", "paired_mean_test",
    "plugin_estimate", "rank_methods", "rconvex_hull", "run_simulation",
    "sj_bandwidth", "ssn_estimate", "sw_bandwidth", "symmetric_difference", "union",
    "walther_estimate", "walther_threshold", "xplus",
]
