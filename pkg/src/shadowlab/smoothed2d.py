"""Planar convex hulls of Gaussian-perturbed point sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polytope import Polygon2D
from .randomdist import SeededRng, as_rng, derive_seed

# relative error bound for the two-product float determinant
_ORIENT_EPS = 3.3306690738754716e-16

LAYOUT_KINDS = ("unit_circle_equally_spaced", "fixed_cloud", "single_point")


def orientation(a, b, c) -> int:
    """Sign of the turn ``a -> b -> c``: +1 left, -1 right, 0 collinear.

    A float evaluation is trusted when it clears its error bound; otherwise
    the determinant is recomputed exactly on the binary values.
    """
    l = (b[0] - a[0]) * (c[1] - a[1])
    r = (b[1] - a[1]) * (c[0] - a[0])
    det = l - r
    bound = _ORIENT_EPS * (abs(l) + abs(r))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    fa = [Fraction(float(t)) for t in a]
    fb = [Fraction(float(t)) for t in b]
    fc = [Fraction(float(t)) for t in c]
    exact = (fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0])
    return (exact > 0) - (exact < 0)


def convex_hull_2d(points) -> Polygon2D:
    """Andrew's monotone chain; strict turns only, counterclockwise from the
    lowest-leftmost point.  A hull with fewer than three vertices is flagged
    degenerate."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("convex hull of an empty set")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    uniq = [pts[order[0]]]
    for i in order[1:]:
        p = pts[i]
        if p[0] != uniq[-1][0] or p[1] != uniq[-1][1]:
            uniq.append(p)
    if len(uniq) < 3:
        return Polygon2D(np.array(uniq), degenerate=True)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and orientation(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    hull = lower[:-1] + upper[:-1]
    return Polygon2D(np.array(hull), degenerate=len(hull) < 3)


def hull_vertices_bruteforce(points) -> set[tuple[float, float]]:
    """Vertices by definition, in O(n^3): ``p`` is a vertex iff the other
    points fit in an open halfplane bounded by a line through ``p``.  That
    holds iff for some other point ``q`` every remaining point is strictly
    left of ``p -> q`` or on the ray from ``p`` through ``q``."""
    distinct = sorted({tuple(map(float, p)) for p in np.asarray(points, dtype=float).reshape(-1, 2)})
    if len(distinct) < 3:
        return set(distinct)
    verts = set()
    for p in distinct:
        others = [q for q in distinct if q != p]
        for q in others:
            ok = True
            for r in others:
                o = orientation(p, q, r)
                if o < 0 or (o == 0 and (r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1]) <= 0):
                    ok = False
                    break
            if ok:
                verts.add(p)
                break
    return verts


@dataclass(frozen=True)
class Layout2D:
    kind: str
    n: int
    points: np.ndarray

    def __post_init__(self):
        if self.kind not in LAYOUT_KINDS:
            raise ValueError(f"unknown layout {self.kind!r}")
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(pts) != self.n:
            raise ValueError("point count does not match n")
        if (np.hypot(pts[:, 0], pts[:, 1]) > 1 + 1e-12).any():
            raise ValueError("layout means must lie in the unit disk")
        object.__setattr__(self, "points", pts)

    @classmethod
    def circle(cls, n: int) -> "Layout2D":
        a = 2 * math.pi * np.arange(n) / n
        return cls("unit_circle_equally_spaced", n, np.column_stack([np.cos(a), np.sin(a)]))

    @classmethod
    def single_point(cls, n: int, where=(0.0, 0.0)) -> "Layout2D":
        return cls("single_point", n, np.tile(np.asarray(where, dtype=float), (n, 1)))

    @classmethod
    def cloud(cls, points) -> "Layout2D":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls("fixed_cloud", len(pts), pts)


@dataclass
class TwoDSummary:
    mean_edges: float
    std_edges: float
    rows: list[dict]


def trial_seed(master_seed: int, trial: int) -> int:
    return derive_seed(master_seed, f"trial:{trial}")


def run_2d_experiment(layout: Layout2D, sigma: float, trials: int, rng) -> TwoDSummary:
    """Perturb every mean by Gaussian(0, sigma^2 I_2) and count hull edges,
    ``trials`` times.  Trial ``i`` draws from the stream seeded by
    ``trial_seed(master, i)`` so any row can be replayed on its own."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    master = as_rng(rng).seed
    rows, edges = [], []
    for t in range(trials):
        seed = trial_seed(master, t)
        pts = layout.points
        if sigma > 0:
            pts = pts + sigma * SeededRng(seed).normal(pts.shape)
        hull = convex_hull_2d(pts)
        e = 0 if hull.degenerate else hull.edge_count
        edges.append(e)
        rows.append({"layout": layout.kind, "n": layout.n, "sigma": sigma, "trial": t,
                     "seed": seed, "edges": e})
    arr = np.array(edges, dtype=float)
    std = float(arr.std(ddof=1)) if trials > 1 else 0.0
    return TwoDSummary(float(arr.mean()), std, rows)
