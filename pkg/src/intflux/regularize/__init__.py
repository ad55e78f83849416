"""Regularization pipeline: skeleton restriction, smoothing, gauge fixing,
harmonic extension on good cubes, radial extension on bad cubes, assembly."""

from .surface import CubeSurfaceMesh, surface_mesh
from .skeleton import (Skeleton, SkeletonFace, balance_totals, bump_kernel,
                       restrict_to_skeleton, smooth_skeleton)
from .gauge import Boundary1Form, gauge_fix
from .harmonic import CubeExtension, dirichlet_solve, harmonic_extend, laplace_residual
from .radial import RadialExtension, radial_extend
from .assemble import RegularizedField, assemble, approximation_error

__all__ = [
    "CubeSurfaceMesh", "surface_mesh",
    "Skeleton", "SkeletonFace", "restrict_to_skeleton", "smooth_skeleton",
    "balance_totals", "bump_kernel",
    "Boundary1Form", "gauge_fix",
    "CubeExtension", "dirichlet_solve", "harmonic_extend", "laplace_residual",
    "RadialExtension", "radial_extend",
    "RegularizedField", "assemble", "approximation_error",
]
