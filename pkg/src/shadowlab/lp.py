"""Dense primal simplex on the inequality form ``max c.x  s.t.  Ax <= b``.

The solver keeps an active-set basis of ``d`` tight rows.  Rows are scaled to
unit Euclidean norm internally (rhs rescaled with them), which leaves the
feasible region unchanged.  A solver instance is warm-startable: successive
calls to :meth:`SimplexSolver.solve` with different objectives reuse the last
optimal basis, which is what makes angle sweeps and the parametric shadow
path cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePivot, DimensionMismatch, NumericalBreakdown, TooLarge

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LinearProgram:
    """``maximize c.x subject to A x <= b``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        m, d = A.shape
        if m < 1 or d < 1:
            raise DimensionMismatch(f"empty constraint matrix of shape {A.shape}")
        if b.shape != (m,):
            raise DimensionMismatch(f"rhs has length {b.size}, expected {m}")
        if c.shape != (d,):
            raise DimensionMismatch(f"objective has length {c.size}, expected {d}")
        if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    active_set: tuple[int, ...]
    objective: float
    basis: tuple[int, ...] = ()
    ray: np.ndarray | None = None
    pivots: int = 0


@dataclass
class ShadowPath:
    """Vertices visited while the objective rotates once around a plane."""

    vertices: list[np.ndarray] = field(default_factory=list)
    pivot_angles: list[float] = field(default_factory=list)
    bases: list[tuple[int, ...]] = field(default_factory=list)


class SimplexSolver:
    """Warm-startable dense simplex over a fixed constraint system.

    Parameters
    ----------
    A, b : constraint data (``m x d`` and ``m``); ``A`` must have full column rank.
    feas_tol : absolute feasibility / dual tolerance on normalized rows.
    pivot_tol : minimum edge-direction component for a row to block a step.
    bland_after : degenerate pivots tolerated before switching to Bland's rule
        (default ``50 * d``).
    """

    def __init__(self, A, b, *, feas_tol=1e-9, pivot_tol=1e-11, bland_after=None,
                 max_pivots=None):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        m, d = A.shape
        if b.shape != (m,):
            raise DimensionMismatch(f"rhs has length {b.size}, expected {m}")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("constraint data must be finite")
        norms = np.linalg.norm(A, axis=1)
        zero = norms == 0.0
        # an all-zero row is either vacuous or makes the system infeasible
        self._zero_row_infeasible = bool((b[zero] < -feas_tol).any())
        scale = np.where(zero, 1.0, norms)
        self.A = A / scale[:, None]
        self.b = np.where(zero, 1.0, b / scale)
        self.row_scale = scale
        self.m, self.d = m, d
        if np.linalg.matrix_rank(self.A) < d:
            raise DimensionMismatch("constraint matrix is rank deficient; reduce it first")
        self.feas_tol = feas_tol
        self.pivot_tol = pivot_tol
        self.bland_after = 50 * d if bland_after is None else bland_after
        self.max_pivots = max_pivots if max_pivots is not None else 200 * (m + d) + 1000
        self.basis: np.ndarray | None = None
        self.Binv: np.ndarray | None = None
        self.x: np.ndarray | None = None
        self.ray: np.ndarray | None = None
        self.pivots = 0
        self.unresolved_ties = 0

    # -- basis bookkeeping -------------------------------------------------

    def _set_basis(self, rows):
        basis = np.asarray(rows, dtype=int)
        B = self.A[basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalBreakdown("singular basis") from exc
        self.basis = basis
        self.Binv = Binv
        # re-solving the active system keeps x on the tight rows
        self.x = Binv @ self.b[basis]

    def set_basis(self, rows):
        """Install a basis (e.g. one recorded earlier) without checks."""
        self._set_basis(rows)

    @property
    def vertex(self) -> np.ndarray:
        return self.x

    def slack(self, x=None) -> np.ndarray:
        x = self.x if x is None else x
        return self.b - self.A @ x

    # -- phase 1 -----------------------------------------------------------

    def feasible_point(self):
        """Some feasible point, or ``None`` if the system is infeasible."""
        if self._zero_row_infeasible:
            return None
        if (self.b > self.feas_tol).all():
            return np.zeros(self.d)
        # auxiliary LP over (x, t): A x - t <= b, -t <= 0, maximize -t
        m, d = self.m, self.d
        A_aux = np.zeros((m + 1, d + 1))
        A_aux[:m, :d] = self.A
        A_aux[:m, d] = -1.0
        A_aux[m, d] = -1.0
        b_aux = np.concatenate([self.b, [0.0]])
        t0 = max(0.0, -float(self.b.min())) + 1.0
        aux = SimplexSolver(A_aux, b_aux, feas_tol=self.feas_tol, pivot_tol=self.pivot_tol)
        c_aux = np.zeros(d + 1)
        c_aux[d] = -1.0
        start = np.zeros(d + 1)
        start[d] = t0
        status = aux.initialize(c_aux, start)
        if status == OPTIMAL:
            status = aux.optimize(c_aux)
        if status != OPTIMAL:
            raise NumericalBreakdown("phase-1 problem did not reach an optimum")
        if aux.x[d] > self.feas_tol * (1.0 + np.abs(self.b).max()):
            return None
        return aux.x[:d].copy()

    def initialize(self, c, x0=None) -> str:
        """Walk from a feasible point to a vertex without decreasing ``c.x``.

        Returns ``OPTIMAL`` when a vertex basis was installed (the name only
        signals success here), ``UNBOUNDED`` or ``INFEASIBLE`` otherwise.
        """
        c = np.asarray(c, dtype=float)
        if x0 is None:
            x0 = self.feasible_point()
            if x0 is None:
                return INFEASIBLE
        x = np.array(x0, dtype=float)
        A, b, d = self.A, self.b, self.d
        tight: list[int] = []
        cnorm = max(1.0, float(np.linalg.norm(c)))
        while len(tight) < d:
            if tight:
                q, _ = np.linalg.qr(A[tight].T, mode="complete")
                N = q[:, len(tight):]
            else:
                N = np.eye(d)
            g = N @ (N.T @ c)
            gn = np.linalg.norm(g)
            uphill = gn > 1e-12 * cnorm
            first = g / gn if uphill else N[:, 0]
            chosen = None
            for direction in (first, -first):
                ad = A @ direction
                ad[tight] = 0.0
                cand = np.flatnonzero(ad > self.pivot_tol)
                if cand.size:
                    chosen = direction, ad, cand
                    break
                if uphill:
                    self.x = x
                    self.ray = direction
                    return UNBOUNDED
            if chosen is None:
                raise NumericalBreakdown("feasible region contains a line")
            direction, ad, cand = chosen
            slack = np.maximum(b[cand] - A[cand] @ x, 0.0)
            ratios = slack / ad[cand]
            j = int(cand[np.argmin(ratios)])
            x = x + ratios.min() * direction
            tight.append(j)
        self._set_basis(tight)
        return OPTIMAL

    # -- phase 2 -----------------------------------------------------------

    def _lex_choose(self, tied, ad):
        # lexicographic ratio test on the rhs perturbation b_i + eps^i
        k = len(tied)
        M = np.zeros((k, self.m))
        M[np.arange(k), tied] = 1.0
        M[:, self.basis] -= self.A[tied] @ self.Binv
        M /= ad[tied][:, None]
        alive = np.arange(k)
        for col in range(self.m):
            vals = M[alive, col]
            alive = alive[vals <= vals.min() + 1e-12]
            if alive.size == 1:
                return int(tied[alive[0]])
        self.unresolved_ties += 1
        return int(tied[alive].min())

    def optimize(self, c, dc=None) -> str:
        """Run primal pivots from the current basis until optimal or unbounded.

        When ``dc`` is given, dual feasibility is tested lexicographically on
        ``(c.B^-1, dc.B^-1)``: this selects the basis optimal for objectives
        ``c + t dc`` with small ``t > 0``.
        """
        if self.basis is None:
            raise RuntimeError("no basis installed; call initialize() first")
        c = np.asarray(c, dtype=float)
        dtol = self.feas_tol * max(1.0, float(np.abs(c).max()))
        degenerate = 0
        bland = False
        for _ in range(self.max_pivots):
            y = self.Binv.T @ c
            neg = y < -dtol
            if dc is not None and not neg.any():
                dy = self.Binv.T @ dc
                neg = (y <= dtol) & (dy < -dtol)
                score = dy
            else:
                score = y
            if not neg.any():
                return OPTIMAL
            positions = np.flatnonzero(neg)
            if bland:
                p = int(positions[np.argmin(self.basis[positions])])
            else:
                p = int(positions[np.argmin(score[positions])])
            direction = -self.Binv[:, p]
            ad = self.A @ direction
            ad[self.basis] = 0.0
            cand = np.flatnonzero(ad > self.pivot_tol)
            if cand.size == 0:
                if (ad > 1e-13).any():
                    raise NumericalBreakdown("pivot magnitude below tolerance")
                self.ray = direction
                return UNBOUNDED
            slack = np.maximum(self.b[cand] - self.A[cand] @ self.x, 0.0)
            ratios = slack / ad[cand]
            tmin = ratios.min()
            tied = cand[ratios <= tmin + 1e-12]
            if tied.size == 1:
                j = int(tied[0])
            elif bland:
                j = int(tied.min())
            else:
                j = self._lex_choose(tied, ad)
            if tmin <= self.feas_tol:
                degenerate += 1
                if degenerate > self.bland_after:
                    bland = True
            new_basis = self.basis.copy()
            new_basis[p] = j
            self._set_basis(new_basis)
            self.pivots += 1
        raise NumericalBreakdown("pivot limit reached without convergence")

    def solve(self, c) -> LpSolution:
        c = np.asarray(c, dtype=float).ravel()
        if c.shape != (self.d,):
            raise DimensionMismatch(f"objective has length {c.size}, expected {self.d}")
        self.ray = None
        if self.basis is None:
            status = self.initialize(c)
            if status != OPTIMAL:
                return self._solution(status, c)
        return self._solution(self.optimize(c), c)

    def _solution(self, status, c) -> LpSolution:
        if status == INFEASIBLE:
            return LpSolution(INFEASIBLE, None, (), float("nan"), pivots=self.pivots)
        x = self.x.copy()
        active = tuple(int(i) for i in np.flatnonzero(np.abs(self.slack(x)) <= self.feas_tol))
        basis = tuple(int(i) for i in self.basis) if self.basis is not None else ()
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, x, active, float("inf"), basis,
                              ray=None if self.ray is None else self.ray.copy(),
                              pivots=self.pivots)
        return LpSolution(OPTIMAL, x, active, float(c @ x), basis, pivots=self.pivots)

    # -- plane helpers -------------------------------------------------------

    def plane_duals(self, u, v):
        """Basis multipliers of the two plane directions."""
        return self.Binv.T @ u, self.Binv.T @ v


def next_exit_angle(yu, yv, theta, tol=1e-12) -> float:
    """First angle after ``theta`` at which ``cos(t) yu + sin(t) yv`` leaves the
    nonnegative orthant (multipliers are ``rho_i cos(t - phi_i)``)."""
    rho = np.hypot(yu, yv)
    live = rho > tol
    if not live.any():
        return math.inf
    phi = np.arctan2(yv[live], yu[live])
    delta = np.mod(phi + 0.5 * math.pi - theta, TWO_PI)
    y_now = yu[live] * math.cos(theta) + yv[live] * math.sin(theta)
    dy_now = -yu[live] * math.sin(theta) + yv[live] * math.cos(theta)
    # a multiplier at (or numerically just below) zero and decreasing exits now
    at_zero = (y_now <= tol * np.maximum(1.0, rho[live])) & (dy_now < 0)
    delta = np.where(at_zero, 0.0, delta)
    return theta + float(delta.min())


def _reduce_rank(A, tol=1e-12):
    _, s, vt = np.linalg.svd(A)
    rank = int((s > tol * max(1.0, s.max() if s.size else 1.0)).sum())
    return rank, vt[:rank].T


def solve_lp(lp: LinearProgram, **solver_opts) -> LpSolution:
    """Solve ``lp`` from scratch.

    Rank-deficient constraint matrices are handled by solving over the row
    space; the returned point is then optimal but not a vertex.
    """
    A, b, c = lp.A, lp.b, lp.c
    rank, Q = _reduce_rank(A)
    if rank == A.shape[1]:
        return SimplexSolver(A, b, **solver_opts).solve(c)
    if rank == 0:
        if (b < -1e-9).any():
            return LpSolution(INFEASIBLE, None, (), float("nan"))
        x = np.zeros(A.shape[1])
        if np.linalg.norm(c) > 1e-12:
            return LpSolution(UNBOUNDED, x, (), float("inf"), ray=c / np.linalg.norm(c))
        return LpSolution(OPTIMAL, x, tuple(range(A.shape[0])), 0.0)
    sub = SimplexSolver(A @ Q, b, **solver_opts).solve(Q.T @ c)
    if sub.status == INFEASIBLE:
        return sub
    x = Q @ sub.x
    residual = c - Q @ (Q.T @ c)
    if np.linalg.norm(residual) > 1e-12 * max(1.0, np.linalg.norm(c)):
        return LpSolution(UNBOUNDED, x, sub.active_set, float("inf"),
                          ray=residual / np.linalg.norm(residual), pivots=sub.pivots)
    if sub.status == UNBOUNDED:
        return LpSolution(UNBOUNDED, x, sub.active_set, float("inf"),
                          ray=Q @ sub.ray, pivots=sub.pivots)
    return LpSolution(OPTIMAL, x, sub.active_set, float(c @ x), pivots=sub.pivots)


def support_point(A, direction) -> LpSolution:
    """Maximize ``direction.z`` over ``{z : A z <= 1}``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return solve_lp(LinearProgram(A, np.ones(A.shape[0]), direction))


def parametric_rotation_path(A, plane, *, max_steps=None) -> ShadowPath:
    """Shadow vertex traversal of ``{z : A z <= 1}`` for objectives rotating in ``plane``.

    Starts at the optimum for the angle-0 direction ``plane.u`` and turns the
    objective counterclockwise through one full revolution, pivoting at each
    angle where the current basis stops being optimal.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    u, v = np.asarray(plane.u, dtype=float), np.asarray(plane.v, dtype=float)
    if u.shape != (A.shape[1],):
        raise DimensionMismatch("plane and constraint dimension differ")
    solver = SimplexSolver(A, np.ones(A.shape[0]))
    status = solver.initialize(u)
    if status == OPTIMAL:
        status = solver.optimize(u, dc=v)
    if status != OPTIMAL:
        raise NumericalBreakdown(f"rotation path start is {status}; polytope must be bounded")
    path = ShadowPath([solver.x.copy()], [], [tuple(solver.basis)])
    theta = 0.0
    max_steps = max_steps or 100 * A.shape[0] * A.shape[1] + 10_000
    ties_before = solver.unresolved_ties
    for _ in range(max_steps):
        yu, yv = solver.plane_duals(u, v)
        theta_next = next_exit_angle(yu, yv, theta)
        if theta_next >= TWO_PI:
            # the pivot closing the loop, reduced to [0, 2 pi)
            if math.isfinite(theta_next) and len(path.vertices) > 1:
                path.pivot_angles.insert(0, max(0.0, theta_next - TWO_PI))
            break
        theta = theta_next
        c = math.cos(theta) * u + math.sin(theta) * v
        dc = -math.sin(theta) * u + math.cos(theta) * v
        before = tuple(solver.basis)
        status = solver.optimize(c, dc=dc)
        if status != OPTIMAL:
            raise NumericalBreakdown(f"rotation path hit status {status}")
        if solver.unresolved_ties != ties_before:
            raise DegeneratePivot(f"ratio-test tie survived lexicographic rule at angle {theta}")
        if tuple(solver.basis) == before:
            continue
        if not path.pivot_angles or theta > path.pivot_angles[-1]:
            path.pivot_angles.append(theta)
        if np.linalg.norm(solver.x - path.vertices[-1]) > 1e-9:
            path.vertices.append(solver.x.copy())
            path.bases.append(tuple(solver.basis))
    else:
        raise NumericalBreakdown("rotation path did not close")
    if len(path.vertices) > 1 and np.linalg.norm(path.vertices[-1] - path.vertices[0]) <= 1e-9:
        path.vertices.pop()
        path.bases.pop()
    return path


def enumerate_vertices_bruteforce(A, b=None, *, tol=1e-9) -> np.ndarray:
    """All vertices of ``{z : A z <= b}`` by trying every ``d``-subset of rows."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, d = A.shape
    if d > 6 or m > 16:
        raise TooLarge(f"brute-force enumeration guarded to d <= 6, m <= 16 (got m={m}, d={d})")
    b = np.ones(m) if b is None else np.asarray(b, dtype=float)
    found: list[np.ndarray] = []
    for rows in itertools.combinations(range(m), d):
        B = A[list(rows)]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        x = np.linalg.solve(B, b[list(rows)])
        if (A @ x <= b + tol * (1.0 + np.abs(b))).all():
            if not any(np.linalg.norm(x - y) <= 1e-7 for y in found):
                found.append(x)
    return np.array(found).reshape(-1, d)
