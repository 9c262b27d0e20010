"""
Directional, scale-dependent roughness of height fields from the
probability of ordinal change patterns along profiles.
"""
from .changes import (AnalysisConfig, InsufficientDataError, RoughnessMatrix, analyze, angle_grid,
                      count_changes, estimate_change_prob, h_transform, median_hurst, tau_max)
from .gaussian import (GaussianModel, cauchy_increment_autocorr, change_prob_from_cov, fbm_change_prob,
                       fbm_cov, fgn_autocorr, fgn_autocorr_asymptote, hurst_of_delay_from_variance,
                       theorem1_h_of_delay, variance_from_autocorr)
from .ingest import (HeightField, PointCloud, add_white_noise, crop, detrend, grid_point_cloud, image_std,
                     read_pgm, read_xyz, write_pgm)
from .profiles import ProfileSet, extract_profiles, sample_bilinear, sample_nearest
from .simulate import SimulatedPath, simulate_fbm, simulate_fgn, simulate_from_autocorr, simulate_surface

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "InsufficientDataError", "RoughnessMatrix", "analyze", "angle_grid",
    "count_changes", "estimate_change_prob", "h_transform", "median_hurst", "tau_max",
    "GaussianModel", "cauchy_increment_autocorr", "change_prob_from_cov", "fbm_change_prob",
    "fbm_cov", "fgn_autocorr", "fgn_autocorr_asymptote", "hurst_of_delay_from_variance",
    "theorem1_h_of_delay", "variance_from_autocorr",
    "HeightField", "PointCloud", "add_white_noise", "crop", "detrend", "grid_point_cloud",
    "image_std", "read_pgm", "read_xyz", "write_pgm",
    "ProfileSet", "extract_profiles", "sample_bilinear", "sample_nearest",
    "SimulatedPath", "simulate_fbm", "simulate_fgn", "simulate_from_autocorr", "simulate_surface",
]
