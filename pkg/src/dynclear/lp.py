"""Dense two-phase primal simplex with Bland's pivoting rule.

The clearing problems in this package are small (at most a few thousand
variables), so a dense tableau is used throughout.  Pivoting follows Bland's
rule: the entering column is the lowest-index column with a positive reduced
cost and ties in the ratio test go to the basic variable with the lowest
index.  The rule guarantees termination on degenerate problems and makes the
returned vertex a deterministic function of the input.

Problems are stated as::

    maximize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lower <= x <= upper
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


class LpError(ValueError):
    """Malformed linear program (shape mismatch, NaN/Inf data, bad bounds)."""


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        nvar = c.size
        object.__setattr__(self, "c", c)
        for mat, rhs in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            M, h = getattr(self, mat), getattr(self, rhs)
            if M is None and h is None:
                M, h = np.zeros((0, nvar)), np.zeros(0)
            elif M is None or h is None:
                raise LpError(f"{mat} and {rhs} must be given together")
            M = np.atleast_2d(np.asarray(M, dtype=float))
            h = np.asarray(h, dtype=float).ravel()
            if M.size == 0:
                M = M.reshape(h.size, nvar)
            if M.shape != (h.size, nvar):
                raise LpError(
                    f"{mat} has shape {M.shape}, expected ({h.size}, {nvar})")
            object.__setattr__(self, mat, M)
            object.__setattr__(self, rhs, h)
        lo = np.zeros(nvar) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        hi = np.full(nvar, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if lo.size != nvar or hi.size != nvar:
            raise LpError("bounds must have one entry per variable")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

        for name in ("c", "A_ub", "b_ub", "A_eq", "b_eq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise LpError(f"{name} contains NaN or Inf")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise LpError("invalid variable bounds")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    message: str = ""

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class SolverOptions:
    tol_feas: float = 1e-8
    tol_pivot: float = 1e-10
    max_iter: Optional[int] = None


class FeasibilityCheck(NamedTuple):
    feasible: bool
    violation: float
    where: Optional[tuple]


def check_feasible(lp: LinearProgram, x, tol: float = 1e-8) -> FeasibilityCheck:
    """Evaluate every constraint of ``lp`` at ``x``.

    Returns the largest violation together with the offending row as a
    ``(kind, index)`` pair, kind being one of ``"ub"``, ``"eq"``,
    ``"lower"``, ``"upper"``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != lp.n_vars:
        raise LpError(f"point has {x.size} entries, LP has {lp.n_vars} variables")
    worst, where = 0.0, None
    parts = (
        ("ub", lp.A_ub @ x - lp.b_ub),
        ("eq", np.abs(lp.A_eq @ x - lp.b_eq)),
        ("lower", lp.lower - x),
        ("upper", x - lp.upper),
    )
    for kind, viol in parts:
        viol = np.where(np.isfinite(viol), viol, -np.inf) if viol.size else viol
        if viol.size and viol.max() > worst:
            k = int(np.argmax(viol))
            worst, where = float(viol[k]), (kind, k)
    return FeasibilityCheck(worst <= tol, worst, where)


class _Tableau:
    # rows 0..m-1: constraints, last column is the rhs; row m: reduced costs
    # (c_j - z_j) with -z in the rhs cell.

    def __init__(self, T, basis, tol_pivot, tol_feas):
        self.T = T
        self.basis = basis
        self.tol_pivot = tol_pivot
        self.tol_feas = tol_feas

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        rhs = T[:-1, -1]
        rhs[(rhs < 0) & (rhs > -self.tol_feas)] = 0.0
        self.basis[r] = j

    def iterate(self, allowed, budget):
        """Run Bland pivots until optimal/unbounded or the budget is spent."""
        T = self.T
        its = 0
        while True:
            red = T[-1, :-1]
            cand = np.flatnonzero((red > self.tol_pivot) & allowed)
            if cand.size == 0:
                return OPTIMAL, its
            if its >= budget:
                return ITERATION_LIMIT, its
            j = int(cand[0])
            colv = T[:-1, j]
            rows = np.flatnonzero(colv > self.tol_pivot)
            if rows.size == 0:
                return UNBOUNDED, its
            ratios = T[rows, -1] / colv[rows]
            best = ratios.min()
            ties = rows[ratios <= best + self.tol_pivot * max(1.0, abs(best))]
            r = int(min(ties, key=lambda k: self.basis[k]))
            self.pivot(r, j)
            its += 1


def solve(lp: LinearProgram, options: Optional[SolverOptions] = None) -> LpSolution:
    opts = options or SolverOptions()
    nvar = lp.n_vars
    lo, hi = lp.lower, lp.upper

    # x = lo + y for finite lo, x = y+ - y- for free variables
    free = ~np.isfinite(lo)
    shift = np.where(free, 0.0, lo)
    cols = []  # (orig index, sign)
    for k in range(nvar):
        cols.append((k, 1.0))
    for k in np.flatnonzero(free):
        cols.append((int(k), -1.0))
    nstruct = len(cols)
    Smap = np.zeros((nvar, nstruct))
    for s, (k, sign) in enumerate(cols):
        Smap[k, s] = sign

    G = lp.A_ub @ Smap
    h = lp.b_ub - lp.A_ub @ shift
    E = lp.A_eq @ Smap
    f = lp.b_eq - lp.A_eq @ shift
    bounded = np.flatnonzero(np.isfinite(hi))
    if bounded.size:
        Gb = Smap[bounded]
        G = np.vstack([G, Gb])
        h = np.concatenate([h, hi[bounded] - shift[bounded]])
    cost = lp.c @ Smap

    m_ub, m_eq = G.shape[0], E.shape[0]
    m = m_ub + m_eq
    neg = h < 0
    n_art = int(neg.sum()) + m_eq
    width = nstruct + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    basis = np.empty(m, dtype=int)

    sign = np.where(neg, -1.0, 1.0)
    T[:m_ub, :nstruct] = G * sign[:, None]
    T[:m_ub, nstruct:nstruct + m_ub] = np.diag(sign)
    T[:m_ub, -1] = h * sign
    fsign = np.where(f < 0, -1.0, 1.0)
    T[m_ub:m, :nstruct] = E * fsign[:, None]
    T[m_ub:m, -1] = f * fsign

    a = nstruct + m_ub
    art_rows = list(np.flatnonzero(neg)) + list(range(m_ub, m))
    for r in range(m_ub):
        basis[r] = nstruct + r
    for r in art_rows:
        T[r, a] = 1.0
        basis[r] = a
        a += 1

    budget = opts.max_iter if opts.max_iter is not None else 50 * (m + width) + 100
    tab = _Tableau(T, basis, opts.tol_pivot, opts.tol_feas)
    total_its = 0
    is_art = np.zeros(width, dtype=bool)
    is_art[nstruct + m_ub:] = True

    if n_art:
        # phase 1: maximize -(sum of artificials)
        T[-1, :] = 0.0
        for r in art_rows:
            T[-1, :] += T[r, :]
        T[-1, is_art.nonzero()[0]] = 0.0
        status, its = tab.iterate(np.ones(width, dtype=bool), budget)
        total_its += its
        if status == ITERATION_LIMIT:
            return LpSolution(ITERATION_LIMIT, None, float("nan"), total_its,
                              "iteration cap hit in phase 1")
        infeas = tab.T[-1, -1]
        scale = max(1.0, float(np.abs(T[:-1, -1]).max(initial=0.0)))
        if infeas > opts.tol_feas * scale:
            return LpSolution(INFEASIBLE, None, float("nan"), total_its,
                              f"phase 1 residual {infeas:.3g}")
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(tab.m + 1, dtype=bool)
        for r in range(tab.m):
            if not is_art[tab.basis[r]]:
                continue
            row = tab.T[r, :width]
            nz = np.flatnonzero((np.abs(row) > opts.tol_pivot) & ~is_art)
            if nz.size:
                tab.pivot(r, int(nz[0]))
            else:
                keep[r] = False
        tab.T = tab.T[keep][:, np.r_[np.flatnonzero(~is_art), width]]
        tab.basis = tab.basis[keep[:-1]]
        width = int((~is_art).sum())

    T = tab.T
    T[-1, :] = 0.0
    T[-1, :nstruct] = cost
    for r in range(tab.m):
        cb = T[-1, tab.basis[r]]
        if cb != 0.0:
            T[-1, :] -= cb * T[r, :]
    status, its = tab.iterate(np.ones(width, dtype=bool), budget - total_its)
    total_its += its
    if status != OPTIMAL:
        msg = "objective unbounded above" if status == UNBOUNDED else "iteration cap hit in phase 2"
        return LpSolution(status, None, float("nan"), total_its, msg)

    y = np.zeros(width)
    y[tab.basis] = tab.T[:-1, -1]
    y = y[:nstruct]
    y[np.abs(y) < opts.tol_feas * 1e-2] = 0.0
    x = shift + Smap @ y
    return LpSolution(OPTIMAL, x, float(lp.c @ x), total_its)
