"""Shadow vertex counts of perturbed polytopes: a dense simplex solver, the
lower-bound polytope family, shadow measurement, and planar hull experiments."""

from .construction import ConstructionParams, build_dual_instance, build_primal, shifted_polytope, verify_radii
from .lp import LinearProgram, SimplexSolver, solve_lp
from .polytope import HPolytope, Plane2D, PointCloud, Polygon2D
from .randomdist import SeededRng
from .shadow import SweepConfig, exact_shadow, polygon_stats, slice_polygon, sweep_count

__version__ = "0.1.0"

__all__ = [
    "ConstructionParams", "build_primal", "build_dual_instance", "shifted_polytope", "verify_radii",
    "LinearProgram", "SimplexSolver", "solve_lp", "HPolytope", "Plane2D", "PointCloud", "Polygon2D",
    "SeededRng", "SweepConfig", "sweep_count", "exact_shadow", "slice_polygon", "polygon_stats",
]
