"""Level-density laws, convergence bounds, spectra and goodness-of-fit tests."""

from .bounds import log_theta, log_tv_bound, steps_for_tv, theta_bound, theta_decimal, tv_bound
from .densities import (
    FiniteNDensity,
    dm_edge,
    dm_wall_density,
    finite_n_density,
    integrate_density,
    mp_density,
    ppt_density,
    ssc_density,
)
from .spectra import SpectralSample, ppt_mask, spectral_statistics
from .stats import (
    Chi2Result,
    Histogram,
    KSResult,
    chi2_gof,
    chi2_uniformity_test,
    density_discrepancy,
    disk_rect_area,
    histogram,
    ks_two_sample,
)

__all__ = [
    "Chi2Result",
    "FiniteNDensity",
    "Histogram",
    "KSResult",
    "SpectralSample",
    "chi2_gof",
    "chi2_uniformity_test",
    "density_discrepancy",
    "disk_rect_area",
    "dm_edge",
    "dm_wall_density",
    "finite_n_density",
    "histogram",
    "integrate_density",
    "ks_two_sample",
    "log_theta",
    "log_tv_bound",
    "mp_density",
    "ppt_density",
    "ppt_mask",
    "spectral_statistics",
    "ssc_density",
    "steps_for_tv",
    "theta_bound",
    "theta_decimal",
    "tv_bound",
]
