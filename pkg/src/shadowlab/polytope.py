"""Polytope representations, polar duality, projections and containment checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import lp
from .errors import DimensionMismatch, EmptySlice, NotNormalized, ParseError


@dataclass(frozen=True)
class HPolytope:
    """``{z : A z <= rhs}``.  ``A`` may be a float array or an object array of
    :class:`~fractions.Fraction` (exact mode)."""

    A: np.ndarray
    rhs: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        if A.dtype != object:
            A = A.astype(float)
        rhs = np.ones(A.shape[0], dtype=A.dtype) if self.rhs is None else np.asarray(self.rhs)
        if rhs.dtype != object:
            rhs = rhs.astype(float)
        if rhs.shape != (A.shape[0],):
            raise DimensionMismatch(f"rhs length {rhs.shape} does not match {A.shape[0]} rows")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def exact(self) -> bool:
        return self.A.dtype == object

    def is_normalized(self) -> bool:
        return all(x == 1 for x in self.rhs)

    def as_float(self) -> "HPolytope":
        if not self.exact:
            return self
        return HPolytope(self.A.astype(float), self.rhs.astype(float))


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points))
        if pts.dtype != object:
            pts = pts.astype(float)
            if not np.isfinite(pts).all():
                raise ValueError("point cloud entries must be finite")
        if pts.shape[0] == 0:
            raise ValueError("point cloud is empty")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise DimensionMismatch("one label per point required")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Plane2D:
    """Orthonormal frame ``(u, v)`` of a 2-plane in R^d."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        v = np.asarray(self.v, dtype=float).ravel()
        if u.shape != v.shape:
            raise DimensionMismatch("frame vectors differ in length")
        if abs(u @ u - 1) > 1e-12 or abs(v @ v - 1) > 1e-12 or abs(u @ v) > 1e-12:
            raise ValueError("plane frame must be orthonormal")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def coordinate(cls, d: int, i: int = 0, j: int = 1) -> "Plane2D":
        """Plane spanned by coordinate directions ``i`` and ``j``."""
        eye = np.eye(d)
        return cls(eye[i], eye[j])

    @property
    def d(self) -> int:
        return self.u.size

    def direction(self, angle: float) -> np.ndarray:
        return math.cos(angle) * self.u + math.sin(angle) * self.v

    def complement(self) -> np.ndarray:
        """Orthonormal basis (columns) of the orthogonal complement."""
        q, _ = np.linalg.qr(np.column_stack([self.u, self.v]), mode="complete")
        return q[:, 2:]


@dataclass
class Polygon2D:
    """Counterclockwise polygon; ``degenerate`` marks point/segment hulls."""

    vertices: np.ndarray
    degenerate: bool = False

    @property
    def edge_count(self) -> int:
        return 0 if self.degenerate else len(self.vertices)


@dataclass
class BallCertificate:
    contained: bool
    margin: float | Fraction
    worst_row: int

    def __bool__(self):
        return self.contained


@dataclass
class SliceSupport:
    value: float
    point: np.ndarray
    weights: dict[int, float] = field(default_factory=dict)


def polar_dual_points(p: HPolytope) -> PointCloud:
    """Rows of ``A`` as points: the polar of ``{A z <= 1}`` is their hull with the origin."""
    if not p.is_normalized():
        raise NotNormalized("polar dual needs rhs = 1; shift and normalize first")
    return PointCloud(p.A.copy(), tuple(range(p.m)))


def project_to_plane(x, plane: Plane2D) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != plane.d:
        raise DimensionMismatch(f"vector of length {x.shape[-1]} vs plane in R^{plane.d}")
    return np.stack([x @ plane.u, x @ plane.v], axis=-1)


def _to_fraction_array(a):
    a = np.asarray(a)
    if a.dtype == object:
        return np.vectorize(Fraction, otypes=[object])(a)
    return np.vectorize(lambda t: Fraction(float(t)), otypes=[object])(a)


def contains_ball_linf(p: HPolytope, center, r, *, exact: bool = False, tol: float = 0.0) -> BallCertificate:
    """Check ``center + r B_inf`` inside ``p`` row by row.

    The support of the l_inf ball on row ``a`` is ``r ||a||_1``, so the test
    is ``a.center + r ||a||_1 <= rhs`` for every row; it is exact, not a
    sufficient condition.  With ``exact=True`` the arithmetic is rational
    (floats are converted exactly; pass ``Fraction`` radii for exact values).
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if exact or p.exact:
        A = _to_fraction_array(p.A)
        rhs = _to_fraction_array(p.rhs)
        c = _to_fraction_array(center)
        rr = r if isinstance(r, Fraction) else Fraction(r)
        slack = [rhs[i] - sum(A[i] * c) - rr * sum(abs(t) for t in A[i]) for i in range(p.m)]
        worst = min(range(p.m), key=lambda i: slack[i])
        return BallCertificate(slack[worst] >= 0, slack[worst], worst)
    A = p.A
    c = np.asarray(center, dtype=float)
    slack = p.rhs - A @ c - r * np.abs(A).sum(axis=1)
    worst = int(np.argmin(slack))
    return BallCertificate(bool(slack[worst] >= -tol), float(slack[worst]), worst)


def max_l1_norm(cloud: PointCloud, *, exact: bool = False):
    pts = cloud.points
    if exact or pts.dtype == object:
        P = _to_fraction_array(pts)
        return max(sum(abs(t) for t in row) for row in P)
    return float(np.abs(pts).sum(axis=1).max())


def hull_distance_l1(points, target) -> float:
    """l1 distance from ``target`` to ``conv(points)``.

    Solved as the separation LP ``max w.target - t`` s.t. ``p_i.w <= t``,
    ``||w||_inf <= 1``, whose value equals the distance by duality.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    target = np.asarray(target, dtype=float)
    n, d = P.shape
    eye = np.eye(d)
    A = np.zeros((n + 2 * d, d + 1))
    A[:n, :d] = P
    A[:n, d] = -1.0
    A[n:n + d, :d] = eye
    A[n + d:, :d] = -eye
    b = np.concatenate([np.zeros(n), np.ones(2 * d)])
    c = np.concatenate([target, [-1.0]])
    solver = lp.SimplexSolver(A, b)
    status = solver.initialize(c, np.zeros(d + 1))
    if status == lp.OPTIMAL:
        status = solver.optimize(c)
    if status != lp.OPTIMAL:
        raise RuntimeError(f"separation LP returned {status}")
    return max(0.0, float(c @ solver.x))


def in_hull(points, target, tol: float = 1e-10) -> bool:
    return hull_distance_l1(points, target) <= tol


def contains_ball_l1(cloud: PointCloud, r: float, *, tol: float = 1e-10) -> bool:
    """``r B_1`` inside ``conv(cloud)``: membership of the ``2d`` points ``+-r e_j``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    pts = cloud.points.astype(float)
    for j in range(cloud.d):
        for sign in (1.0, -1.0):
            target = np.zeros(cloud.d)
            target[j] = sign * r
            if not in_hull(pts, target, tol):
                return False
    return True


def slice_support(cloud: PointCloud, plane: Plane2D, angle: float) -> SliceSupport:
    """Support of ``conv(cloud) ∩ W`` in the in-plane direction ``angle``.

    Uses the dual program ``min_{z in W^perp} max_i a_i.(c + z)`` over
    ``(z, t)``; its basis multipliers are the convex weights of the optimal
    slice point.  Raises :class:`EmptySlice` when the slice is empty (the
    dual is then unbounded).
    """
    P = cloud.points.astype(float)
    if P.shape[1] != plane.d:
        raise DimensionMismatch("cloud and plane dimensions differ")
    c_hat = plane.direction(angle)
    Z = plane.complement()
    PZ = P @ Z
    rank, Q = lp._reduce_rank(PZ) if PZ.shape[1] else (0, np.zeros((0, 0)))
    if PZ.shape[1] and rank < PZ.shape[1]:
        PZ = PZ @ Q
    n, k = PZ.shape
    A = np.hstack([PZ, -np.ones((n, 1))])
    b = -(P @ c_hat)
    obj = np.zeros(k + 1)
    obj[k] = -1.0
    start = np.zeros(k + 1)
    start[k] = float((P @ c_hat).max()) + 1.0
    solver = lp.SimplexSolver(A, b)
    status = solver.initialize(obj, start)
    if status == lp.OPTIMAL:
        status = solver.optimize(obj)
    if status != lp.OPTIMAL:
        raise EmptySlice("conv(points) does not meet the plane")
    y = solver.Binv.T @ obj
    lam = y / solver.row_scale[solver.basis]
    rows = solver.basis
    point = lam @ (P[rows] @ np.column_stack([plane.u, plane.v]))
    value = -float(obj @ solver.x)
    return SliceSupport(value, point, {int(i): float(w) for i, w in zip(rows, lam)})


# -- plain-text serialization ------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), ".17g")


def dumps_hpolytope(p: HPolytope, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"hpoly {p.m} {p.d}")
    lines += [" ".join(_fmt(t) for t in row) for row in p.A]
    if not p.is_normalized():
        lines.append("rhs " + " ".join(_fmt(t) for t in p.rhs))
    return "\n".join(lines) + "\n"


def dumps_cloud(cloud: PointCloud, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"cloud {cloud.n} {cloud.d}")
    lines += [" ".join(_fmt(t) for t in row) for row in cloud.points]
    return "\n".join(lines) + "\n"


def loads(text: str):
    """Parse either an ``hpoly`` or a ``cloud`` block."""
    body = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    body = [(i, ln) for i, ln in body if ln and not ln.startswith("#")]
    if not body:
        raise ParseError("empty instance file")
    lineno, header = body[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] not in ("hpoly", "cloud"):
        raise ParseError(f"line {lineno}: expected 'hpoly m d' or 'cloud n d', got {header!r}")
    kind = parts[0]
    try:
        m, d = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"line {lineno}: bad dimensions in header {header!r}") from None
    rows = []
    rhs = None
    for lineno, ln in body[1:]:
        fields = ln.split()
        if fields[0] == "rhs" and kind == "hpoly":
            vals, want = fields[1:], m
        else:
            vals, want = fields, d
        if len(vals) != want:
            raise ParseError(f"line {lineno}: expected {want} values, found {len(vals)}")
        try:
            nums = [float(t) for t in vals]
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric entry in {ln!r}") from None
        if not all(math.isfinite(t) for t in nums):
            raise ParseError(f"line {lineno}: non-finite entry")
        if fields[0] == "rhs":
            rhs = np.array(nums)
        else:
            rows.append(nums)
    if len(rows) != m:
        raise ParseError(f"header announces {m} rows, found {len(rows)}")
    A = np.array(rows, dtype=float).reshape(m, d)
    if kind == "hpoly":
        return HPolytope(A, rhs)
    return PointCloud(A)


def save(obj, path, comments=()) -> Path:
    path = Path(path)
    text = dumps_hpolytope(obj, comments) if isinstance(obj, HPolytope) else dumps_cloud(obj, comments)
    path.write_text(text)
    return path


def load(path):
    return loads(Path(path).read_text())
