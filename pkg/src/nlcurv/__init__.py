"""Nonlocal perimeter and curvature on voxel grids, with fiber checks and a moving-plane sweep."""
from .kernel import Family, RadialKernel
from .measure import (
    CurvatureEvaluator,
    boundary_curvature,
    curvature_at,
    curvature_modulus,
    perimeter,
    perimeter_decomposition,
)
from .moving_plane import analyze_symmetry, find_critical_plane, symmetry_defect
from .setrep import VoxelSet, rasterize
from .shapes import Ball, Box, Ellipsoid

__all__ = [
    "Family", "RadialKernel", "VoxelSet", "rasterize", "Ball", "Box", "Ellipsoid",
    "CurvatureEvaluator", "curvature_at", "boundary_curvature", "curvature_modulus",
    "perimeter", "perimeter_decomposition", "analyze_symmetry", "find_critical_plane", "symmetry_defect",
]

__version__ = "0.1.0"
