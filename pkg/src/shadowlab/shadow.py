"""Shadow sizes: angle sweeps, exact support refinement, and slice polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lp
from .errors import DepthExceeded, EmptySlice, OriginOutside, PreconditionViolated, UnboundedShadow
from .polytope import HPolytope, Plane2D, PointCloud, contains_ball_l1, in_hull, slice_support

TWO_PI = 2.0 * math.pi
DEFAULT_LADDER = (1e-5, 1e-7, 1e-9)


@dataclass(frozen=True)
class SweepConfig:
    num_angles: int
    angle_offset: float = 0.3
    dedup_tol: float = 1e-7

    def __post_init__(self):
        if self.num_angles < 4:
            raise ValueError("num_angles must be at least 4")
        if self.dedup_tol <= 0:
            raise ValueError("dedup_tol must be positive")

    @classmethod
    def for_k(cls, k: int, **kw) -> "SweepConfig":
        """``2^(k+5)`` angles spaced ``pi / 2^(k+4)`` apart."""
        return cls(2 ** (k + 5), **kw)

    def angles(self) -> np.ndarray:
        return (np.arange(self.num_angles) + self.angle_offset) * (TWO_PI / self.num_angles)


@dataclass
class ShadowPolygon:
    """Counterclockwise polygon in plane coordinates.

    ``samples`` keeps the raw projected optima (one per visited basis, in
    angular order) when the polygon came from a sweep, so counts can be
    recomputed at other dedup tolerances.
    """

    vertices: np.ndarray
    provenance: list[tuple[int, ...]] | None = None
    closed: bool = True
    samples: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        n = len(self.vertices)
        return n if n >= 3 else max(0, n - 1)


@dataclass
class PolygonStats:
    perimeter: float
    edge_lengths: np.ndarray
    exterior_angles: np.ndarray
    origin_inside: bool
    _inradius: float = math.nan
    _outradius: float = math.nan

    @property
    def edge_count(self) -> int:
        return len(self.edge_lengths)

    @property
    def angle_sum(self) -> float:
        return math.fsum(self.exterior_angles)

    @property
    def inradius(self) -> float:
        if not self.origin_inside:
            raise OriginOutside("origin is not interior to the polygon")
        return self._inradius

    @property
    def outradius(self) -> float:
        if not self.origin_inside:
            raise OriginOutside("origin is not interior to the polygon")
        return self._outradius


@dataclass
class EdgeCountCheck:
    bound: float
    holds: bool
    edges: int
    eps: float
    degenerate: bool = False


def dedup_cyclic(points, tol: float) -> np.ndarray:
    """Merge runs of points equal within ``tol`` per coordinate, treating the
    sequence as cyclic (last run may merge into the first)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return pts
    kept = [pts[0]]
    for p in pts[1:]:
        if np.abs(p - kept[-1]).max() > tol:
            kept.append(p)
    while len(kept) > 1 and np.abs(kept[-1] - kept[0]).max() <= tol:
        kept.pop()
    return np.array(kept)


def _project(x, plane):
    return np.array([plane.u @ x, plane.v @ x])


def sweep_count(h: HPolytope, plane: Plane2D, cfg: SweepConfig,
                solver: lp.SimplexSolver | None = None) -> tuple[int, ShadowPolygon]:
    """Solve ``max cos(t) u + sin(t) v`` over the polytope for every sweep
    angle and count the distinct projected optima.

    The solver is warm-started from angle to angle.  Once a basis is optimal
    at some angle it stays optimal up to the next breakpoint of its plane
    multipliers, so the grid angles before that breakpoint reuse it instead
    of being re-solved.
    """
    if solver is None:
        solver = lp.SimplexSolver(h.A.astype(float), h.rhs.astype(float))
    u, v = plane.u, plane.v
    thetas = cfg.angles()
    samples, bases = [], []
    j = 0
    while j < len(thetas):
        theta = thetas[j]
        c = math.cos(theta) * u + math.sin(theta) * v
        if solver.basis is None:
            status = solver.initialize(c)
            if status != lp.OPTIMAL:
                raise UnboundedShadow(f"sweep could not start: {status}")
        if solver.optimize(c) != lp.OPTIMAL:
            raise UnboundedShadow(f"objective at angle {theta:.6g} is unbounded")
        samples.append(_project(solver.x, plane))
        bases.append(tuple(int(i) for i in solver.basis))
        yu, yv = solver.plane_duals(u, v)
        exit_angle = lp.next_exit_angle(yu, yv, theta)
        j = max(j + 1, int(np.searchsorted(thetas, exit_angle - 1e-12, side="left")))
    samples = np.array(samples)
    distinct = dedup_cyclic(samples, cfg.dedup_tol)
    return len(distinct), ShadowPolygon(distinct, None, True, samples)


def ladder_counts(poly: ShadowPolygon, tols=DEFAULT_LADDER) -> dict[float, int]:
    return {t: len(dedup_cyclic(poly.samples, t)) for t in tols}


def _refine_polygon(probe, *, max_depth: int = 64, initial: int = 4):
    """Reconstruct a convex polygon from a support oracle.

    ``probe(angle) -> (point, tag)``.  For consecutive known vertices
    ``pa, pb`` the oracle is queried in the outward normal direction of the
    segment; if the answer does not lie strictly beyond the segment, the
    segment is an edge.  Otherwise the new vertex splits the arc.
    """
    seeds = []
    for i in range(initial):
        # offset so that symmetric polygons are not seeded on their edge normals
        theta = TWO_PI * (i + 0.3) / initial
        p, tag = probe(theta)
        seeds.append((theta, p, tag))
    scale = max(1e-300, max(float(np.abs(p).max()) for _, p, _ in seeds))
    area_tol = 1e-12 * scale * scale
    same_tol = 1e-12 * scale

    def refine(a, b, depth):
        (ta, pa, _), (tb, pb, _) = a, b
        e = pb - pa
        if np.abs(e).max() <= same_tol:
            return []
        phi = math.atan2(-e[0], e[1])
        pm, tag = probe(phi)
        area2 = (pm[0] - pa[0]) * e[1] - (pm[1] - pa[1]) * e[0]
        if area2 <= area_tol:
            return []
        if depth >= max_depth:
            raise DepthExceeded(f"support refinement deeper than {max_depth}")
        m = (phi, pm, tag)
        return refine(a, m, depth + 1) + [m] + refine(m, b, depth + 1)

    out = []
    for i in range(initial):
        a, b = seeds[i], seeds[(i + 1) % initial]
        out.append(a)
        out.extend(refine(a, b, 0))
    verts, tags = [], []
    for _, p, tag in out:
        if verts and np.abs(p - verts[-1]).max() <= same_tol:
            continue
        verts.append(p)
        tags.append(tag)
    while len(verts) > 1 and np.abs(verts[-1] - verts[0]).max() <= same_tol:
        verts.pop()
        tags.pop()
    # a probe on an edge normal may return a point inside that edge; drop zero turns
    changed = True
    while changed and len(verts) > 3:
        changed = False
        for i in range(len(verts)):
            pa, pm, pb = verts[i - 1], verts[i], verts[(i + 1) % len(verts)]
            e = pb - pa
            if (pm[0] - pa[0]) * e[1] - (pm[1] - pa[1]) * e[0] <= area_tol:
                del verts[i], tags[i]
                changed = True
                break
    return np.array(verts), tags


def exact_shadow(h: HPolytope, plane: Plane2D, *, max_depth: int = 64) -> ShadowPolygon:
    """All vertices of the projection of ``h`` onto ``plane``, counterclockwise."""
    solver = lp.SimplexSolver(h.A.astype(float), h.rhs.astype(float))
    u, v = plane.u, plane.v

    def probe(theta):
        c = math.cos(theta) * u + math.sin(theta) * v
        sol = solver.solve(c)
        if sol.status != lp.OPTIMAL:
            raise UnboundedShadow(f"objective at angle {theta:.6g} is {sol.status}")
        return _project(sol.x, plane), sol.basis

    verts, tags = _refine_polygon(probe, max_depth=max_depth)
    return ShadowPolygon(verts, tags, True)


def slice_polygon(cloud: PointCloud, plane: Plane2D, *, max_depth: int = 64) -> ShadowPolygon:
    """The polygon ``conv(cloud) ∩ W`` in plane coordinates."""

    def probe(theta):
        s = slice_support(cloud, plane, theta)
        return s.point, tuple(sorted(s.weights))

    verts, tags = _refine_polygon(probe, max_depth=max_depth)
    return ShadowPolygon(verts, tags, True)


def polygon_stats(poly) -> PolygonStats:
    """Perimeter, edge lengths, turning angles and radii about the origin."""
    V = np.asarray(poly.vertices, dtype=float)
    if len(V) < 3:
        raise ValueError("polygon statistics need at least 3 vertices")
    E = np.roll(V, -1, axis=0) - V
    lengths = np.hypot(E[:, 0], E[:, 1])
    prev = np.roll(E, 1, axis=0)
    turn = np.arctan2(prev[:, 0] * E[:, 1] - prev[:, 1] * E[:, 0],
                      prev[:, 0] * E[:, 0] + prev[:, 1] * E[:, 1])
    # origin strictly left of every directed edge
    side = E[:, 0] * (-V[:, 1]) - E[:, 1] * (-V[:, 0])
    inside = bool((side > 0).all())
    inr = float((side / lengths).min()) if inside else math.nan
    outr = float(np.hypot(V[:, 0], V[:, 1]).max()) if inside else math.nan
    return PolygonStats(math.fsum(lengths), lengths, turn, inside, inr, outr)


def edgecount_bound_check(stats: PolygonStats) -> EdgeCountCheck:
    """Edge-length argument: with ``alpha B ⊂ T ⊂ beta B`` every edge has
    length at most ``2 alpha sqrt(2e + e^2)``, ``e = beta/alpha - 1``, and the
    perimeter is at least ``2 pi alpha``, so ``edges >= pi / sqrt(2e + e^2)``."""
    alpha, beta = stats.inradius, stats.outradius
    if not alpha > 0:
        raise PreconditionViolated("inradius must be positive")
    eps = max(beta / alpha - 1.0, 0.0)
    if eps == 0.0:
        return EdgeCountCheck(math.inf, False, stats.edge_count, 0.0, degenerate=True)
    bound = math.pi / math.sqrt(2 * eps + eps * eps)
    return EdgeCountCheck(bound, stats.edge_count >= bound, stats.edge_count, eps)


def hausdorff_inclusion_check(base: PointCloud, pert: PointCloud, r: float, eps: float) -> bool:
    """Check ``(1 - 2 eps/r) conv(base) ⊂ conv(pert) ⊂ (1 + eps/r) conv(base)``
    by hull membership of every scaled generating point."""
    A0 = base.points.astype(float)
    A1 = pert.points.astype(float)
    if A0.shape != A1.shape:
        raise PreconditionViolated("base and perturbed clouds differ in shape")
    if eps > r / 2:
        raise PreconditionViolated(f"eps={eps:g} exceeds r/2={r / 2:g}")
    dev = np.abs(A1 - A0).sum(axis=1)
    over = np.flatnonzero(dev > eps * (1 + 1e-12) + 1e-15)
    if over.size:
        raise PreconditionViolated(f"point {int(over[0])} moved {dev[over[0]]:.3g} > eps", int(over[0]))
    if not contains_ball_l1(base, r):
        raise PreconditionViolated(f"r B_1 with r={r:g} is not inside conv(base)")
    shrink = 1 - 2 * eps / r
    grow = 1 + eps / r
    return (all(in_hull(A1, shrink * a) for a in A0)
            and all(in_hull(A0, a / grow) for a in A1))


def dumps_polygon_csv(poly) -> str:
    """One ``x,y`` row per vertex, counterclockwise."""
    return "".join(f"{x:.17g},{y:.17g}\n" for x, y in np.asarray(poly.vertices, dtype=float))


def dumps_stats(stats: PolygonStats) -> str:
    """Flat ``key=value`` block."""
    lines = [f"edges={stats.edge_count}", f"perimeter={stats.perimeter:.17g}",
             f"angle_sum={stats.angle_sum:.17g}", f"origin_inside={stats.origin_inside}"]
    if stats.origin_inside:
        lines += [f"inradius={stats.inradius:.17g}", f"outradius={stats.outradius:.17g}"]
    return "\n".join(lines) + "\n"


__all__ = [
    "SweepConfig", "ShadowPolygon", "PolygonStats", "EdgeCountCheck", "dedup_cyclic",
    "sweep_count", "ladder_counts", "exact_shadow", "slice_polygon", "polygon_stats",
    "edgecount_bound_check", "hausdorff_inclusion_check", "dumps_polygon_csv", "dumps_stats", "EmptySlice",
]
