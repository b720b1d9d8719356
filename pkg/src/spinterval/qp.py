"""Optimal triangle-kernel weights for one interval endpoint.

The endpoint estimate ``sum_i w_i X_(i)`` over a window of order statistics
around ``center_index`` has approximate mean squared error::

    MSE(w) = w' C w + (w' mu - T) ** 2

where ``C`` and ``mu`` come from :mod:`spinterval.moments` and ``T`` is the
target quantile.  Minimising it is the quadratic program::

    minimise   1/2 w' D w - d' w,   D = 2 (C + mu mu'),   d = 2 T mu

subject to the weights summing to one and forming a piecewise-linear
profile in ``X``: equal slopes on each side of the center, mirrored slopes
at the peak, nonnegative edge weights and a peak no lower than its
neighbours.  Those constraints leave a one-dimensional feasible segment.

All quantities are shifted by ``shift`` (default: the target) before
building ``D``; with the sum-to-one constraint this changes the objective
by a constant only and keeps ``D`` well conditioned for data far from 0.
"""

from __future__ import annotations

import functools
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .moments import MomentEstimates
from .samples import SortedSample

__all__ = [
    "QpError",
    "QpProblem",
    "QpSolution",
    "ReducedSet",
    "default_bandwidth",
    "kernel_window",
    "build_problem",
    "solve",
    "active_set_qp",
    "reduce_feasible_set",
    "kkt_residual",
    "format_problem",
]

RIDGE = 1e-10


class QpError(RuntimeError):
    """The weight QP could not be built or solved."""


def default_bandwidth(n: int) -> int:
    """``round(sqrt(n))`` forced even so the half-width is an integer."""
    return max(2, 2 * int(round(math.sqrt(n) / 2)))


def kernel_window(center_index: int, bandwidth_b: int, n: int) -> tuple[int, int]:
    """1-based inclusive window around ``center_index``.

    The half-width is ``b/2`` reduced, when needed, to the number of order
    statistics available on the shorter side, so the window stays centred.
    At index 1 or ``n`` it degenerates to the single center point.
    """
    if not 1 <= center_index <= n:
        raise IndexError(f"center index {center_index} outside [1, {n}]")
    half = min(bandwidth_b // 2, center_index - 1, n - center_index)
    return center_index - half, center_index + half


@dataclass(frozen=True)
class QpProblem:
    D: np.ndarray
    d: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    start: int
    stop: int
    center_index: int
    target_quantile: float
    shift: float = 0.0
    ridge: float = 0.0
    jittered: int = 0
    clipped: bool = False

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def window(self) -> range:
        return range(self.start, self.stop + 1)

    @functools.cached_property
    def hessian(self) -> np.ndarray:
        return self.D + self.ridge * np.eye(self.m)

    def objective(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(0.5 * w @ self.hessian @ w - self.d @ w)

    def mse(self, w) -> float:
        """Approximate MSE of the weighted endpoint (objective plus the
        constant dropped from it)."""
        return self.objective(w) + (self.target_quantile - self.shift) ** 2

    def feasible(self, w, tol: float = 1e-9) -> bool:
        w = np.asarray(w, dtype=float)
        eq = np.abs(self.A_eq @ w - self.b_eq).max(initial=0.0)
        ineq = (self.b_ineq - self.A_ineq @ w).max(initial=-np.inf)
        return eq <= tol and ineq <= tol


@dataclass(frozen=True)
class QpSolution:
    weights: np.ndarray
    objective: float
    active_set: tuple
    kkt_residual: float
    iterations: int = 0


@dataclass(frozen=True)
class ReducedSet:
    """Feasible weights are ``particular + basis @ t`` with ``t`` obeying
    ``G t >= h``."""

    particular: np.ndarray
    basis: np.ndarray
    G: np.ndarray
    h: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def weights(self, t) -> np.ndarray:
        return self.particular + self.basis @ np.atleast_1d(t)

    def bounds_1d(self, tol: float = 1e-12):
        """Feasible interval ``(lo, hi)`` of ``t`` for a one-dimensional set,
        with the inequality rows that define each end (``None`` if open)."""
        if self.dim != 1:
            raise ValueError("feasible set is not one-dimensional")
        g = self.G[:, 0]
        gtol = tol * max(1.0, np.abs(g).max(initial=0.0))
        lo, hi, lo_row, hi_row = -np.inf, np.inf, None, None
        for i, (gi, hi_) in enumerate(zip(g, self.h)):
            if gi > gtol:
                if hi_ / gi > lo:
                    lo, lo_row = hi_ / gi, i
            elif gi < -gtol:
                if hi_ / gi < hi:
                    hi, hi_row = hi_ / gi, i
            elif hi_ > 1e-9:
                raise QpError("infeasible constraint set")
        if lo > hi + 1e-12 * max(1.0, abs(lo)):
            raise QpError("infeasible constraint set")
        return lo, max(lo, hi), lo_row, hi_row


def _strictly_increasing(x: np.ndarray, eps: float) -> tuple[np.ndarray, int]:
    if x.size < 2 or np.diff(x).min() >= eps:
        return x, 0
    x = x.copy()
    bumped = 0
    for k in range(1, x.size):
        if x[k] - x[k - 1] < eps:
            x[k] = x[k - 1] + eps
            bumped += 1
    return x, bumped


def _shape_constraints(x: np.ndarray, c: int):
    """Equality and inequality rows making the weights a triangle in ``x``
    peaked at local position ``c``.

    Equal slopes along one side are written as collinearity of each
    interior point with that side's two end points (the center and the
    window edge), and the mirrored peak slope compares the two end-to-center
    slopes.  For distinct ``x`` this is the same set as requiring equal
    consecutive slopes, but a run of near-tied values cannot make two rows
    numerically parallel.  Rows are cross-multiplied and scaled to unit
    max-norm.
    """
    m = x.size
    if m == 1:
        return np.ones((1, 1)), np.ones(1), np.ones((1, 1)), np.zeros(1)
    rows = [np.ones(m)]

    def collinear(a, e):
        k = np.arange(a + 1, e)
        r = np.zeros((k.size, m))
        r[np.arange(k.size), k] = x[e] - x[a]
        r[:, a] = -(x[e] - x[k])
        r[:, e] = -(x[k] - x[a])
        return list(r)

    if c >= 2:
        rows += collinear(0, c)
    if m - 1 - c >= 2:
        rows += collinear(c, m - 1)
    if 1 <= c <= m - 2:
        r = np.zeros(m)
        left, right = x[c] - x[0], x[m - 1] - x[c]
        r[c] = right - left
        r[0] = -right
        r[m - 1] = left
        rows.append(r)
    A_eq = np.array(rows)
    A_eq /= np.abs(A_eq).max(axis=1, keepdims=True)
    b_eq = np.zeros(len(rows))
    b_eq[0] = 1.0

    ineq = [np.eye(m)[0], np.eye(m)[m - 1]]
    # Peak at least as high as the edge farther away in x.  Given the
    # equalities this is the same as peak >= right neighbour, but it does not
    # collapse to 0 >= 0 when the neighbours are tied with the center.
    peak = np.zeros(m)
    peak[c] = 1.0
    far = m - 1 if x[m - 1] - x[c] >= x[c] - x[0] else 0
    peak[far] = -1.0
    ineq.append(peak)
    A_ineq = np.array(ineq)
    return A_eq, b_eq, A_ineq, np.zeros(len(ineq))


def build_problem(
    moments: MomentEstimates,
    center_index: int,
    bandwidth_b: int,
    target_quantile: float,
    sample: SortedSample,
    *,
    paper_matrix_form: bool = False,
    shift: Optional[float] = None,
    ridge: float = RIDGE,
) -> QpProblem:
    """Assemble the weight QP for the window around ``center_index``.

    ``paper_matrix_form`` uses ``mu = Q`` (no second-order bias term).
    With ``shift=0`` as well, ``D = 2 (C + Q Q')`` and ``d = 2 T Q`` exactly;
    the default shift by the target only changes the objective by a
    constant.
    """
    start, stop = kernel_window(center_index, bandwidth_b, sample.n)
    m = stop - start + 1
    if m < 1:
        raise QpError(f"window [{start}, {stop}] is too small")
    off = start - int(moments.indices[0])
    if off < 0 or int(moments.indices[-1]) < stop:
        raise QpError("moment estimates do not cover the QP window")
    sl = slice(off, off + m)

    sub = MomentEstimates(
        moments.indices[sl], moments.n, moments.p[sl], moments.q[sl],
        moments.Q[sl], moments.Qp[sl], moments.Qpp[sl],
    )
    mu = sub.Q if paper_matrix_form else sub.mean()
    shift = float(target_quantile) if shift is None else float(shift)
    mu = mu - shift
    C = sub.covariance()
    D = 2.0 * (C + np.outer(mu, mu))
    D = 0.5 * (D + D.T)
    d = 2.0 * (target_quantile - shift) * mu

    x = sample.values[start - 1 : stop]
    span = float(sample.values[-1] - sample.values[0])
    eps = 1e-12 * (span if span > 0 else max(1.0, abs(float(x[0]))))
    x, bumped = _strictly_increasing(x, eps)
    A_eq, b_eq, A_ineq, b_ineq = _shape_constraints(x, center_index - start)

    lam = ridge * float(np.trace(D)) / m
    return QpProblem(
        D, d, A_eq, b_eq, A_ineq, b_ineq, start, stop, int(center_index),
        float(target_quantile), shift, lam, bumped,
        clipped=(stop - start) < 2 * (bandwidth_b // 2),
    )


def _phase_one(A_eq, b_eq, A_in, b_in, n):
    res = linprog(
        np.zeros(n),
        A_ub=-A_in if A_in.size else None,
        b_ub=-b_in if A_in.size else None,
        A_eq=A_eq if A_eq.size else None,
        b_eq=b_eq if A_eq.size else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    if res.status != 0:
        raise QpError(f"infeasible constraint set ({res.message})")
    return res.x


def active_set_qp(
    H: np.ndarray,
    c: np.ndarray,
    A_eq: Optional[np.ndarray] = None,
    b_eq: Optional[np.ndarray] = None,
    A_in: Optional[np.ndarray] = None,
    b_in: Optional[np.ndarray] = None,
    x0: Optional[np.ndarray] = None,
    max_iter: int = 200,
):
    """Primal active-set method for a strictly convex dense QP.

    Minimises ``1/2 x'Hx + c'x`` subject to ``A_eq x = b_eq`` and
    ``A_in x >= b_in``.  Returns ``(x, active, multipliers, iterations)``
    where ``multipliers`` stacks equality then active-inequality values.
    """
    n = H.shape[0]
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(A_eq)
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(b_eq)
    A_in = np.zeros((0, n)) if A_in is None else np.atleast_2d(A_in)
    b_in = np.zeros(0) if b_in is None else np.atleast_1d(b_in)
    n_eq = A_eq.shape[0]

    if x0 is None:
        x = _phase_one(A_eq, b_eq, A_in, b_in, n)
    else:
        x = np.array(x0, dtype=float)
    feas_tol = 1e-10 * max(1.0, np.abs(x).max(initial=0.0))
    if A_in.size and np.any(A_in @ x - b_in < -feas_tol):
        raise QpError("starting point violates an inequality")

    # Initial working set: active inequalities that keep the rows independent.
    work: list[int] = []
    for i in range(A_in.shape[0]):
        if abs(A_in[i] @ x - b_in[i]) <= feas_tol:
            cand = np.vstack([A_eq, A_in[work + [i]]])
            if np.linalg.matrix_rank(cand) == cand.shape[0]:
                work.append(i)

    lam = np.zeros(n_eq)
    for it in range(1, max_iter + 1):
        # Null-space step: minimise over directions that keep the working
        # rows fixed.  An empty null space gives p = 0 exactly.
        Cw = np.vstack([A_eq, A_in[work]]) if work else A_eq
        g = H @ x + c
        if Cw.shape[0]:
            _, sv, Vt = np.linalg.svd(Cw)
            rank = int((sv > 1e-10 * sv[0]).sum())
            Z = Vt[rank:].T
        else:
            Z = np.eye(n)
        if Z.shape[1]:
            p = -Z @ np.linalg.solve(Z.T @ H @ Z, Z.T @ g)
        else:
            p = np.zeros(n)

        if np.abs(p).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(x).max()):
            lam = np.linalg.lstsq(Cw.T, g, rcond=None)[0] if Cw.shape[0] else np.zeros(0)
            mult = lam[n_eq:]
            tol = 1e-10 * max(np.abs(g).max(initial=0.0), np.abs(lam).max(initial=0.0), 1e-300)
            if mult.size == 0 or mult.min() >= -tol:
                return x, tuple(work), lam, it
            work.pop(int(np.argmin(mult)))
            continue

        step, block = 1.0, None
        for i in range(A_in.shape[0]):
            if i in work:
                continue
            ap = A_in[i] @ p
            if ap < -1e-14 * np.abs(p).max():
                s = (b_in[i] - A_in[i] @ x) / ap
                if s < step:
                    step, block = max(s, 0.0), i
        x = x + step * p
        if block is not None:
            work.append(block)
    raise QpError(f"active-set method did not converge in {max_iter} iterations")


def reduce_feasible_set(problem: QpProblem, rcond: float = 1e-10) -> ReducedSet:
    """Parameterise the equality-feasible weights by their null space.

    One SVD of the equality rows gives both the minimum-norm particular
    solution and an orthonormal basis of the null space.
    """
    A, b = problem.A_eq, problem.b_eq
    U, sv, Vt = np.linalg.svd(A)
    rank = int((sv > rcond * sv[0]).sum()) if sv.size else 0
    particular = Vt[:rank].T @ ((U[:, :rank].T @ b) / sv[:rank])
    basis = Vt[rank:].T
    G = problem.A_ineq @ basis
    h = problem.b_ineq - problem.A_ineq @ particular
    return ReducedSet(particular, basis, G, h)


def kkt_residual(problem: QpProblem, w, active=()) -> float:
    """Largest violation of stationarity, feasibility, dual sign and
    complementarity at ``w`` with the given active inequalities.

    Stationarity is checked on the null space of the equality rows, so the
    equality multipliers never have to be recovered; this stays well
    conditioned when tied order statistics make the constraint rows nearly
    dependent.  Stationarity and dual sign are relative to ``|Hw| + |d|``;
    feasibility and complementarity are in weight units.
    """
    w = np.asarray(w, dtype=float)
    H = problem.hessian
    active = list(active)
    red = reduce_feasible_set(problem)
    grad = H @ w - problem.d
    scale = max(np.abs(H @ w).max() + np.abs(problem.d).max(), 1e-300)
    gr = red.basis.T @ grad
    Ga = red.G[active]
    if Ga.size and gr.size:
        mu = np.linalg.lstsq(Ga.T, gr, rcond=None)[0]
    else:
        mu = np.zeros(len(active))
    stat = np.abs(gr - Ga.T @ mu).max(initial=0.0) / scale
    neg = np.minimum(mu, 0.0)
    dual = np.abs(Ga.T @ neg).max(initial=0.0) / scale if Ga.size else 0.0
    slack = problem.A_ineq @ w - problem.b_ineq
    primal = max(
        np.abs(problem.A_eq @ w - problem.b_eq).max(),
        max(0.0, -slack.min()),
    )
    comp = np.abs(slack[active]).max(initial=0.0)
    return float(max(stat, dual, primal, comp))


def _solve_reduced(problem: QpProblem):
    red = reduce_feasible_set(problem)
    H, d = problem.hessian, problem.d
    B = red.basis
    Hr = B.T @ H @ B
    gr = B.T @ (H @ red.particular - d)
    if red.dim == 0:
        return red.particular, (), 1
    if red.dim == 1:
        lo, hi, lo_row, hi_row = red.bounds_1d()
        a, g = float(Hr[0, 0]), float(gr[0])
        if a > 0:
            t = -g / a
        else:
            t = lo if g > 0 else hi
        if not np.isfinite(t):
            raise QpError("objective unbounded on the feasible set")
        act = ()
        if t <= lo:
            t, act = lo, (lo_row,)
        elif t >= hi:
            t, act = hi, (hi_row,)
        return red.weights(t), act, 1
    # Higher-dimensional reduced sets (not produced by build_problem).
    t0 = B.T @ (_phase_one(problem.A_eq, problem.b_eq, problem.A_ineq,
                           problem.b_ineq, problem.m) - red.particular)
    t, act, _, it = active_set_qp(Hr, gr, A_in=red.G, b_in=red.h, x0=t0)
    return red.weights(t), act, it


def solve(problem: QpProblem, method: str = "reduced") -> QpSolution:
    """Minimise ``1/2 w'Dw - d'w`` under the kernel-shape constraints.

    ``method="reduced"`` eliminates the equality constraints through their
    null space and minimises exactly over the remaining segment;
    ``method="dense"`` runs the active-set method on the full weight vector.
    """
    if method == "reduced":
        w, act, it = _solve_reduced(problem)
    elif method == "dense":
        m = problem.m
        w0 = np.full(m, 1.0 / m)
        x0 = w0 if problem.feasible(w0) else None
        w, act, _, it = active_set_qp(
            problem.hessian, -problem.d, problem.A_eq, problem.b_eq,
            problem.A_ineq, problem.b_ineq, x0=x0,
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    if not problem.feasible(w, tol=1e-9):
        raise QpError("solver returned an infeasible point")
    return QpSolution(
        weights=w,
        objective=problem.objective(w),
        active_set=tuple(int(i) for i in act),
        kkt_residual=kkt_residual(problem, w, act),
        iterations=it,
    )


def format_problem(problem: QpProblem, solution: Optional[QpSolution] = None) -> str:
    """Plain-text dump of the problem matrices (and solution) for debugging."""
    out = io.StringIO()
    out.write(
        f"# window {problem.start}..{problem.stop} center {problem.center_index} "
        f"target {problem.target_quantile!r} shift {problem.shift!r} "
        f"ridge {problem.ridge!r}\n"
    )
    for name in ("D", "d", "A_eq", "b_eq", "A_ineq", "b_ineq"):
        arr = np.atleast_2d(getattr(problem, name))
        out.write(f"# {name} {arr.shape[0]}x{arr.shape[1]}\n")
        np.savetxt(out, arr, fmt="%.17g")
    if solution is not None:
        out.write(f"# weights objective={solution.objective!r} "
                  f"kkt={solution.kkt_residual!r} active={list(solution.active_set)}\n")
        np.savetxt(out, np.atleast_2d(solution.weights), fmt="%.17g")
    return out.getvalue()
