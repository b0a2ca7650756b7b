"""Numerical toolkit for gradient Ricci solitons and their D-tensor."""

from .charts import CoordinateChart, analytic_chart, cigar_chart, euclidean_schwarzschild_chart, flat_chart, sphere_chart
from .geometry import adapted_frame, conformal_bundle, curvature_bundle, weyl_divergence_check
from .soliton import (
    SolitonChart,
    bach_consistency,
    d_norm_identity,
    d_tensor,
    hamilton_identities,
    point_report,
    prop23_report,
    soliton_residual,
)
from .level_set import constancy_scan, level_diagnostics
from .warped import FiberSpec, WarpedProfile, profile_to_chart, steady_rhs, warped_curvature, warped_hessian
from .bryant import BryantConfig, asymptotics, integrate, origin_series
from .classifier import Thresholds, classify
from . import catalog

__all__ = [
    "CoordinateChart", "analytic_chart", "cigar_chart", "euclidean_schwarzschild_chart", "flat_chart",
    "sphere_chart", "adapted_frame", "conformal_bundle", "curvature_bundle", "weyl_divergence_check",
    "SolitonChart", "bach_consistency", "d_norm_identity", "d_tensor", "hamilton_identities", "point_report",
    "prop23_report", "soliton_residual", "constancy_scan", "level_diagnostics", "FiberSpec", "WarpedProfile",
    "profile_to_chart", "steady_rhs", "warped_curvature", "warped_hessian", "BryantConfig", "asymptotics",
    "integrate", "origin_series", "Thresholds", "classify", "catalog",
]
