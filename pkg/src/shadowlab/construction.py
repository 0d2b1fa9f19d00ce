"""The lower-bound polytope family and its dual point cloud.

For ``k >= 1`` the primal lives in R^(k+5) with coordinates
``(x, y, p0[0], p0[1], t[0..k-1], s)``.  The chain points ``p_1..p_k`` are
eliminated: each is a linear function of ``(p0, t, s)`` through

    p_i = (w_i . p_{i-1}) w_i + (t_i + i s) v_i,

so every constraint on them becomes a row over the remaining variables.
The plane W is spanned by the ``x`` and ``y`` coordinate directions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import lp
from .errors import CenterNotInterior, InvalidK
from .polytope import (HPolytope, Plane2D, PointCloud, contains_ball_l1, contains_ball_linf,
                       max_l1_norm)
from .randomdist import as_rng

EXACT_DIGITS = 30
# below this outer margin 4^(-k-2), float support values are not trusted
EXACT_MODE_MARGIN = 1e-7


@dataclass(frozen=True)
class ConstructionParams:
    """``k`` fold levels.  Fold ``i`` mirrors across the line at angle
    ``pi / 2^(i+1)``, so the quadrant folds onto a wedge of angle
    ``pi / 2^(k+1)`` and the projection is a regular ``2^(k+1)``-gon.
    ``half_angle_frames`` uses ``pi / 2^(i+2)`` instead, whose first fold
    does not map the quadrant into itself."""

    k: int
    half_angle_frames: bool = False

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise InvalidK(f"k must be a positive integer, got {self.k!r}")

    @property
    def d(self) -> int:
        return self.k + 5

    @property
    def frame_shift(self) -> int:
        return 2 if self.half_angle_frames else 1

    def fold_angle(self, i: int) -> float:
        return math.pi / 2.0 ** (i + self.frame_shift)


def _params(k) -> ConstructionParams:
    return k if isinstance(k, ConstructionParams) else ConstructionParams(k)


def _exact_trig(angle_num_pi_over: int) -> tuple[Fraction, Fraction]:
    with mpmath.workdps(EXACT_DIGITS + 10):
        a = mpmath.pi / angle_num_pi_over
        c, s = mpmath.cos(a), mpmath.sin(a)
        return (Fraction(mpmath.nstr(c, EXACT_DIGITS, strip_zeros=False)),
                Fraction(mpmath.nstr(s, EXACT_DIGITS, strip_zeros=False)))


@dataclass(frozen=True)
class FrameVectors:
    """``w_i = (cos a_i, sin a_i)``, ``v_i = (sin a_i, -cos a_i)`` with ``a_i`` the fold angles."""

    w: np.ndarray
    v: np.ndarray


def frame_vectors(params, *, exact: bool = False) -> FrameVectors:
    params = _params(params)
    k, shift = params.k, params.frame_shift
    if exact:
        w = np.empty((k, 2), dtype=object)
        v = np.empty((k, 2), dtype=object)
        for i in range(1, k + 1):
            c, s = _exact_trig(2 ** (i + shift))
            w[i - 1] = (c, s)
            v[i - 1] = (s, -c)
        return FrameVectors(w, v)
    a = math.pi / 2.0 ** (np.arange(1, k + 1) + shift)
    return FrameVectors(np.column_stack([np.cos(a), np.sin(a)]),
                        np.column_stack([np.sin(a), -np.cos(a)]))


def variable_index(k: int) -> dict[str, object]:
    return {"x": 0, "y": 1, "p0": slice(2, 4), "t": slice(4, 4 + k), "s": 4 + k}


def chain_maps(k: int, frames: FrameVectors, *, exact: bool = False) -> list[np.ndarray]:
    """``M_i`` (2 x (k+5)) with ``p_i = M_i z`` for ``i = 0..k``."""
    d = k + 5
    dtype = object if exact else float
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    M = np.full((2, d), zero, dtype=dtype)
    M[0, 2] = one
    M[1, 3] = one
    maps = [M]
    for i in range(1, k + 1):
        w, v = frames.w[i - 1], frames.v[i - 1]
        lift = np.full(d, zero, dtype=dtype)
        lift[4 + i - 1] = one
        lift[4 + k] = one * i
        M = np.outer(w, w @ M) + np.outer(v, lift)
        maps.append(M)
    return maps


@dataclass(frozen=True)
class PrimalSystem:
    A: np.ndarray
    b: np.ndarray
    row_tags: tuple[str, ...]
    k: int

    @property
    def d(self) -> int:
        return self.k + 5

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def rows_tagged(self, prefix: str) -> list[int]:
        return [i for i, t in enumerate(self.row_tags) if t.startswith(prefix)]


def build_primal(params, *, exact: bool = False, drop_s_bounds: bool = False) -> PrimalSystem:
    """Inequalities over ``(x, y, p0, t, s)`` after eliminating ``p_1..p_k``.

    Row groups, in order: four absolute-value rows, ``2k`` rows
    ``+-v_i.p_{i-1} <= t_i + i s``, the barrier ``e1.p_k <= 1``, ``2k`` box
    rows on ``t`` and two on ``s`` (omitted with ``drop_s_bounds``), so
    ``4k + 7`` rows in total.
    """
    params = _params(params)
    k = params.k
    d = k + 5
    frames = frame_vectors(params, exact=exact)
    maps = chain_maps(k, frames, exact=exact)
    dtype = object if exact else float
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)

    rows, rhs, tags = [], [], []

    def unit(j, sign=1):
        r = np.full(d, zero, dtype=dtype)
        r[j] = one * sign
        return r

    def add(row, b, tag):
        rows.append(row)
        rhs.append(b)
        tags.append(tag)

    # p0 >= (|x|, |y|) componentwise
    add(unit(0) - unit(2), zero, "abs_x+")
    add(-unit(0) - unit(2), zero, "abs_x-")
    add(unit(1) - unit(3), zero, "abs_y+")
    add(-unit(1) - unit(3), zero, "abs_y-")
    for i in range(1, k + 1):
        lift = unit(4 + i - 1) + unit(4 + k) * i
        vp = frames.v[i - 1] @ maps[i - 1]
        add(vp - lift, zero, f"v_{i}+")
        add(-vp - lift, zero, f"v_{i}-")
    add(maps[k][0].copy(), one, "death")
    for i in range(1, k + 1):
        add(-unit(4 + i - 1), zero, f"t_{i}_low")
        add(unit(4 + i - 1), one, f"t_{i}_high")
    if not drop_s_bounds:
        add(-unit(4 + k), zero, "s_low")
        add(unit(4 + k), one, "s_high")
    return PrimalSystem(np.array(rows, dtype=dtype), np.array(rhs, dtype=dtype), tuple(tags), k)


def center_point(params, *, exact: bool = False) -> np.ndarray:
    """``(0, 0, 1/6, 1/6, 1/30 * ones(k), 1/3)``."""
    k = _params(params).k
    vals = [Fraction(0), Fraction(0), Fraction(1, 6), Fraction(1, 6)] + [Fraction(1, 30)] * k + [Fraction(1, 3)]
    if exact:
        return np.array(vals, dtype=object)
    return np.array([float(v) for v in vals])


def shift_and_normalize(system: PrimalSystem, center, *, min_slack: float = 1e-12) -> HPolytope:
    """Rows ``A_i / (b_i - A_i.center)`` so that ``{A~ z <= 1} = P - center``."""
    A, b = system.A, system.b
    center = np.asarray(center, dtype=A.dtype)
    slack = b - A @ center
    bad = [i for i, s in enumerate(slack) if s <= min_slack]
    if bad:
        raise CenterNotInterior(f"center is not strictly inside rows {bad[:5]} (tags {[system.row_tags[i] for i in bad[:5]]})")
    scaled = A / slack[:, None]
    ones = np.array([Fraction(1)] * len(b), dtype=object) if A.dtype == object else np.ones(len(b))
    return HPolytope(scaled, ones)


@dataclass(frozen=True)
class DualInstance:
    means: PointCloud
    plane: Plane2D
    k: int

    @property
    def d(self) -> int:
        return self.k + 5

    @property
    def n(self) -> int:
        return self.means.n


def shifted_polytope(params, *, exact: bool = False, drop_s_bounds: bool = False) -> HPolytope:
    system = build_primal(params, exact=exact, drop_s_bounds=drop_s_bounds)
    return shift_and_normalize(system, center_point(params, exact=exact))


def build_dual_instance(params, *, drop_s_bounds: bool = False) -> DualInstance:
    """Normalized shifted rows divided by 30, with W = the (x, y) coordinate plane."""
    k = _params(params).k
    h = shifted_polytope(params, drop_s_bounds=drop_s_bounds)
    return DualInstance(PointCloud(h.A / 30.0, tuple(range(h.m))), Plane2D.coordinate(k + 5), k)


def perturb_primal(h: HPolytope, sigma: float, rng) -> HPolytope:
    """``A + G`` with i.i.d. Gaussian entries of standard deviation ``sigma * R``,
    ``R`` the largest row Euclidean norm; the rhs is kept."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    A = h.A.astype(float)
    if sigma == 0:
        return HPolytope(A.copy(), h.rhs.astype(float))
    R = float(np.linalg.norm(A, axis=1).max())
    noise = as_rng(rng).normal(A.shape) * (sigma * R)
    return HPolytope(A + noise, h.rhs.astype(float))


def perturb_dual(inst: DualInstance, sigma: float, rng) -> PointCloud:
    """Each mean plus an independent Gaussian(0, sigma^2 I) vector."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    pts = inst.means.points
    if sigma == 0:
        return PointCloud(pts.copy(), inst.means.labels)
    return PointCloud(pts + sigma * as_rng(rng).normal(pts.shape), inst.means.labels)


def innerdisk_witness(params, x: float, y: float) -> np.ndarray:
    """A point of P above ``(x, y)``: ``s = 0``, ``p0 = (|x|, |y|)`` and every
    ``t_i = |v_i . p_{i-1}|`` so the chain constraints are tight."""
    k = _params(params).k
    frames = frame_vectors(params)
    p = np.array([abs(x), abs(y)])
    t = np.empty(k)
    for i in range(k):
        w, v = frames.w[i], frames.v[i]
        t[i] = abs(v @ p)
        p = (w @ p) * w + t[i] * v
    return np.concatenate([[x, y, abs(x), abs(y)], t, [0.0]])


def _support_exact(h_exact: HPolytope, basis, direction) -> tuple[mpmath.mpf, bool]:
    """High-precision value and optimality certificate of a float-found basis."""
    rows = list(basis)
    with mpmath.workdps(50):
        B = mpmath.matrix([[mpmath.mpf(t.numerator) / t.denominator for t in h_exact.A[i]] for i in rows])
        rhs = mpmath.matrix([mpmath.mpf(h_exact.rhs[i].numerator) / h_exact.rhs[i].denominator for i in rows])
        c = mpmath.matrix([mpmath.mpf(float(t)) for t in direction])
        x = mpmath.lu_solve(B, rhs)
        y = mpmath.lu_solve(B.T, c)
        value = sum(c[j] * x[j] for j in range(len(direction)))
        # float directions carry ~1e-17 rounding, so exact zeros may come out slightly negative
        dual_ok = all(y[j] >= -mpmath.mpf(10) ** -12 for j in range(len(rows)))
        return value, dual_ok


@dataclass
class VerificationReport:
    k: int
    angle_samples: int
    exact: bool
    innerdisk_min_margin: float = math.nan
    outer_support_max: float = math.nan
    inner_support_min: float = math.nan
    outer_bound: float = math.nan
    polygon_outer: float = math.nan
    innerball_margin: object = math.nan
    outerball_max: float = math.nan
    dual_max_l1: float = math.nan
    dual_l1_ball: bool = False
    checks: dict[str, bool] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    def lines(self) -> list[str]:
        out = [f"k={self.k} d={self.k + 5} angle_samples={self.angle_samples} exact={self.exact}"]
        out.append(f"innerdisk_min_margin={self.innerdisk_min_margin!r}")
        out.append(f"projected_support_min={self.inner_support_min!r}")
        out.append(f"projected_support_max={self.outer_support_max!r} bound={self.outer_bound!r} "
                   f"circumradius_of_folded_polygon={self.polygon_outer!r}")
        out.append(f"innerball_margin={float(self.innerball_margin)!r}")
        out.append(f"outerball_max={self.outerball_max!r}")
        out.append(f"dual_max_l1={self.dual_max_l1!r} dual_contains_l1_ball={self.dual_l1_ball}")
        for w in self.warnings:
            out.append(f"warning: {w}")
        for name, ok in self.checks.items():
            out.append(f"{name}: {'PASS' if ok else 'FAIL'}")
        return out


def verify_radii(params, angle_samples: int = 1024, *, exact: bool | None = None,
                 shifted: HPolytope | None = None, tol: float = 1e-9) -> VerificationReport:
    """Numerically check the radius and duality facts of the construction.

    ``shifted`` overrides the instance (it must be the shifted, normalized
    system ``{A~ z <= 1}``).  ``exact=None`` switches to exact certificates
    automatically when ``4^(-k-2)`` drops below ``EXACT_MODE_MARGIN``.
    """
    params = _params(params)
    k = params.k
    if angle_samples < 4:
        raise ValueError("need at least 4 angle samples")
    outer_margin = 4.0 ** (-k - 2)
    report = VerificationReport(k, angle_samples, bool(exact))
    if exact is None:
        exact = outer_margin < EXACT_MODE_MARGIN and shifted is None
        if exact:
            msg = f"4^(-k-2) = {outer_margin:.3g} < {EXACT_MODE_MARGIN:g}: using exact certificates"
            warnings.warn(msg)
            report.warnings.append(msg)
        report.exact = exact
    h_exact = shifted_polytope(params, exact=True) if exact and shifted is None else None
    h = shifted if shifted is not None else (h_exact.as_float() if h_exact is not None else shifted_polytope(params))
    center = center_point(k)
    d = k + 5

    # (a) points of the unit circle lift into P
    # offset grid: avoids landing only on edge normals when 2^(k+1) divides the sample count
    angles = 2 * math.pi * (np.arange(angle_samples) + 0.3) / angle_samples
    worst = math.inf
    for a in angles:
        z = innerdisk_witness(params, math.cos(a), math.sin(a)) - center
        worst = min(worst, float((h.rhs - h.A @ z).min()))
    report.innerdisk_min_margin = worst
    report.checks["innerdisk"] = worst >= -tol

    # (b) support of the projection onto W
    plane = Plane2D.coordinate(d)
    solver = lp.SimplexSolver(h.A, h.rhs)
    values = []
    certified = True
    for a in angles:
        c = plane.direction(a)
        sol = solver.solve(c)
        if sol.status != lp.OPTIMAL:
            values.append(math.inf)
            continue
        if exact:
            value, ok = _support_exact(h_exact, sol.basis, c)
            certified &= ok
            values.append(float(value))
        else:
            values.append(sol.objective)
    report.outer_support_max = max(values)
    report.inner_support_min = min(values)
    report.outer_bound = 1 + outer_margin
    report.polygon_outer = 1 / math.cos(params.fold_angle(k))
    report.checks["projected_outer"] = report.outer_support_max <= 1 + outer_margin + tol and certified
    report.checks["projected_inner"] = report.inner_support_min >= 1 - tol

    # (c) l_inf balls: (1/30) B_inf inside, P - center inside (3/2) B_inf
    if exact:
        cert = contains_ball_linf(h_exact, np.zeros(d, dtype=object), Fraction(1, 30), exact=True)
    else:
        cert = contains_ball_linf(h, np.zeros(d), 1 / 30, tol=1e-12)
    report.innerball_margin = cert.margin
    outer = 0.0
    for j in range(d):
        for sign in (1.0, -1.0):
            sol = solver.solve(sign * np.eye(d)[j])
            outer = max(outer, sol.objective if sol.status == lp.OPTIMAL else math.inf)
    report.outerball_max = outer
    report.checks["innerball_linf"] = cert.contained
    report.checks["outerball_linf"] = outer <= 1.5 + tol

    # (d) the scaled dual cloud
    means = PointCloud(h.A / 30.0)
    report.dual_max_l1 = max_l1_norm(means)
    report.dual_l1_ball = contains_ball_l1(means, 1 / 45)
    report.checks["dual_l1_norm"] = report.dual_max_l1 <= 1 + 1e-12
    report.checks["dual_l1_ball"] = report.dual_l1_ball
    return report
