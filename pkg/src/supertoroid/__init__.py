"""Supertoroid modeling, synthetic point clouds, and shape/pose fitting.

A supertoroid is the genus-one member of the superquadric family: a toroid
whose equatorial outline and tube cross-section are superellipses shaped
by two exponents.  This package provides the canonical geometry, the
meridian radial point-to-surface distance, surface differential geometry
(tangents, normals, curvatures), synthetic cloud generation, and a
two-stage 12-parameter least-squares recovery pipeline with a CLI.
"""

from ._backend import backend_name
from .cloud import CameraView, PointCloud, add_noise, downsample_random, \
    partial_view, sample_surface
from .diffgeo import (CurvatureInfo, LocalFrame, fundamental_forms,
                      local_frame, normal, normal_curvatures,
                      principal_and_mean_curvature, tangent_eta,
                      tangent_omega, unit_tangents)
from .errors import SupertoroidError
from .fitting import (FitConfig, FitReport, canonicalize, fit,
                      initial_guess, model_difference, stage1_fit,
                      stage1_multistart, stage2_fit)
from .geometry import (Intrinsics, Pose, Region, SupertoroidModel,
                       SurfaceParams, bounding_box, canonical_to_world,
                       classify, cross_section_halfwidth, implicit_value,
                       mean_superellipse_radius, mean_superellipse_value,
                       section_angle_from_polar, signed_pow, surface_point,
                       world_to_canonical)
from .io import export_fit_overlay, read_cloud, write_cloud
from .meridian import (RadialDecomposition, brute_force_distance,
                       cloud_cost, major_ratio, meridian_distance,
                       minor_ratio, project_to_plane)

__version__ = "0.1.0"

__all__ = [
    "CameraView", "CurvatureInfo", "FitConfig", "FitReport", "Intrinsics",
    "LocalFrame", "PointCloud", "Pose", "RadialDecomposition", "Region",
    "SupertoroidError", "SupertoroidModel", "SurfaceParams", "add_noise",
    "backend_name", "bounding_box", "brute_force_distance", "canonicalize",
    "canonical_to_world", "classify", "cloud_cost",
    "cross_section_halfwidth", "downsample_random", "export_fit_overlay",
    "fit", "fundamental_forms", "implicit_value", "initial_guess",
    "local_frame", "major_ratio", "mean_superellipse_radius",
    "mean_superellipse_value", "meridian_distance", "minor_ratio",
    "model_difference", "normal", "normal_curvatures", "partial_view",
    "principal_and_mean_curvature", "project_to_plane", "read_cloud",
    "sample_surface", "section_angle_from_polar", "signed_pow",
    "stage1_fit", "stage1_multistart", "stage2_fit", "surface_point",
    "tangent_eta", "tangent_omega", "unit_tangents", "world_to_canonical",
    "write_cloud",
]
