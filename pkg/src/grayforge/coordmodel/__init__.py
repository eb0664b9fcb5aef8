"""Explicit four-dimensional coordinate model of the metric (n = 2)."""

from .chart import AnalyticProfile, BaseChart, ChartModel, ChartPoint, base_scalar_curvature
from .checks import (
    GeodesicCheckReport,
    curvature_at,
    cyclic_condition_check,
    einstein_control,
    flat_control,
    frame_sectionals,
    geodesic_check,
    hermitian_algebra,
    hermitian_check,
    kaehler_nabla_rho_check,
    mean_curvature_check,
    metric_at,
    metric_partials_at,
    perturbed_profile,
    t_line_check,
)

__all__ = [
    "AnalyticProfile",
    "BaseChart",
    "ChartModel",
    "ChartPoint",
    "GeodesicCheckReport",
    "base_scalar_curvature",
    "curvature_at",
    "cyclic_condition_check",
    "einstein_control",
    "flat_control",
    "frame_sectionals",
    "geodesic_check",
    "hermitian_algebra",
    "hermitian_check",
    "kaehler_nabla_rho_check",
    "mean_curvature_check",
    "metric_at",
    "metric_partials_at",
    "perturbed_profile",
    "t_line_check",
]
