"""Entropy, mean curvature flow and expander numerics for discretized
low-dimensional submanifolds."""

from .entropy import EntropyEstimate, GaussianCenter, density_ratio, entropy_sup, f_functional, truncation_radius
from .expanders import cone_extract, convergence_rate_fit, solve_expander_curve, solve_expander_profile
from .geom import (
    Dims,
    GridGraph,
    PlaneN,
    Polyline,
    ProfileSurface,
    SampledSurface,
    circle_polyline,
    hausdorff_distance,
    restrict_ball,
    sample_plane_disk,
    sphere_profile,
)
from .mcf import FlowConfig, FlowTrack, flow, monotonicity_probe
from .reifenberg import best_plane, planar_distance
from .specfile import SurfaceSpec, parse_surface_spec, serialize_surface_spec
from .verify import VerifyReport, run_verify

__all__ = [
    "Dims",
    "EntropyEstimate",
    "FlowConfig",
    "FlowTrack",
    "GaussianCenter",
    "GridGraph",
    "PlaneN",
    "Polyline",
    "ProfileSurface",
    "SampledSurface",
    "SurfaceSpec",
    "VerifyReport",
    "best_plane",
    "circle_polyline",
    "cone_extract",
    "convergence_rate_fit",
    "density_ratio",
    "entropy_sup",
    "f_functional",
    "flow",
    "hausdorff_distance",
    "monotonicity_probe",
    "parse_surface_spec",
    "planar_distance",
    "restrict_ball",
    "run_verify",
    "sample_plane_disk",
    "serialize_surface_spec",
    "solve_expander_curve",
    "solve_expander_profile",
    "sphere_profile",
    "truncation_radius",
]
