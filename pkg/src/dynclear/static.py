"""Single-period clearing: unrestricted matrices and pro-rata vectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp as lpmod
from .graph import strong_components
from .network import (MATRIX, PRORATA, ClearingReport, StaticInstance, default_set,
                      default_tol)
from .validation import Check, Report, worst


class SolverError(RuntimeError):
    """A clearing computation did not reach an optimal/converged answer."""

    def __init__(self, status: str, message: str = ""):
        super().__init__(f"{status}: {message}" if message else status)
        self.status = status


def arcs(caps) -> np.ndarray:
    """Index pairs (i, j), i != j, with positive capacity, row-major."""
    caps = np.asarray(caps)
    mask = caps > 0
    np.fill_diagonal(mask, False)
    return np.argwhere(mask)


def matrix_period_lp(caps, cash, weights=None):
    """LP for one period of unrestricted payments.

    Variables are the arcs of ``caps`` (row-major); maximize the (weighted)
    total paid subject to ``0 <= p_ij <= caps_ij`` and
    ``out_i - in_i <= cash_i``.
    """
    caps = np.asarray(caps, dtype=float)
    n = caps.shape[0]
    ij = arcs(caps)
    m = len(ij)
    G = np.zeros((n, m))
    G[ij[:, 0], np.arange(m)] += 1.0
    G[ij[:, 1], np.arange(m)] -= 1.0
    c = np.ones(m) if weights is None else np.asarray(weights, dtype=float)[ij[:, 0], ij[:, 1]]
    prog = lpmod.LinearProgram(c=c, A_ub=G, b_ub=np.maximum(cash, 0.0), upper=caps[ij[:, 0], ij[:, 1]])
    return prog, ij


def prorata_period_lp(A, caps, cash, weights=None):
    """LP for one period of pro-rata payments over nodes with positive cap."""
    A = np.asarray(A, dtype=float)
    caps = np.asarray(caps, dtype=float)
    active = np.flatnonzero(caps > 0)
    M = (np.eye(A.shape[0]) - A.T)[np.ix_(active, active)]
    c = np.ones(active.size) if weights is None else np.asarray(weights, dtype=float)[active]
    cash = np.maximum(np.asarray(cash, dtype=float)[active], 0.0)
    prog = lpmod.LinearProgram(c=c, A_ub=M, b_ub=cash, upper=caps[active])
    return prog, active


def _solve(prog, options, what):
    sol = lpmod.solve(prog, options)
    if not sol.success:
        raise SolverError(sol.status, f"{what}: {sol.message}")
    return sol


def solve_matrix_period(caps, cash, options=None, weights=None) -> np.ndarray:
    prog, ij = matrix_period_lp(caps, cash, weights)
    P = np.zeros(np.shape(caps))
    if len(ij):
        sol = _solve(prog, options, "matrix clearing LP")
        P[ij[:, 0], ij[:, 1]] = np.clip(sol.x, 0.0, prog.upper)
    return P


def solve_prorata_period(A, caps, cash, options=None, weights=None) -> np.ndarray:
    prog, active = prorata_period_lp(A, caps, cash, weights)
    p = np.zeros(len(caps))
    if active.size:
        sol = _solve(prog, options, "pro-rata clearing LP")
        p[active] = np.clip(sol.x, 0.0, prog.upper)
    return p


def certify_clearing(instance: StaticInstance, payments, mode: str = MATRIX,
                     tol: Optional[float] = None) -> Report:
    """Feasibility, the min-equation and (pro-rata) the sink condition."""
    tol = default_tol(instance.liabilities, instance.inflow) if tol is None else tol
    c = instance.inflow
    rep = Report()
    if mode == MATRIX:
        P = np.asarray(payments, dtype=float)
        out, inn = P.sum(axis=1), P.sum(axis=0)
        bounds = np.maximum(np.maximum(-P, P - instance.liabilities), np.diag(np.abs(np.diag(P))))
        b = worst("bounds", bounds, tol)
        w = worst("limited_liability", out - c - inn, tol)
        first = b if b.violation >= w.violation else w
        rep.add(Check("feasible", b.passed and w.passed, first.violation, first.locator,
                      "0 <= P <= Pbar, P1 <= c + P'1"))
        rep.add(worst("priority", np.abs(out - np.minimum(instance.nominal_out, c + inn)), tol,
                      "P1 = min(Pbar 1, c + P'1)"))
        return rep

    p = np.asarray(payments, dtype=float)
    A = instance.relative
    pbar = instance.nominal_out
    inflow = c + A.T @ p
    viol = np.maximum.reduce([-p, p - pbar, p - inflow])
    rep.add(worst("feasible", viol, tol, "0 <= p <= pbar, p <= c + A'p"))
    rep.add(worst("priority", np.abs(p - np.minimum(pbar, inflow)), tol, "p = min(pbar, c + A'p)"))
    bad = []
    for comp in strong_components(A).sinks:
        nodes = list(comp.nodes)
        if np.all(pbar[nodes] > tol) and not np.any(p[nodes] >= pbar[nodes] - tol):
            bad.append(comp.nodes)
    rep.add(Check("sink_full_payment", not bad, float(len(bad)), bad[0] if bad else None,
                  "each sink component has a node paying in full"))
    return rep


def static_report(instance, P, mode, tol=None, status="optimal"):
    tol = default_tol(instance.liabilities, instance.inflow) if tol is None else tol
    pbar = instance.liabilities if mode == MATRIX else instance.nominal_out
    residual = np.clip(pbar - P, 0.0, None)
    out = P.sum(axis=1) if mode == MATRIX else P
    inn = P.sum(axis=0) if mode == MATRIX else instance.relative.T @ P
    cert = certify_clearing(instance, P, mode, tol)
    return ClearingReport(
        loss=float(residual.sum()),
        objective=float(out.sum()),
        residual=residual,
        default_set=default_set(residual, tol, instance.external_node),
        worths=instance.inflow + inn - out,
        certifications=cert.summary(),
        solver_status=status,
        extra={"checks": cert},
    )


def clear_matrix(instance: StaticInstance, options=None, tol=None):
    """Clearing matrix maximizing the total amount paid.

    Returns ``(P, report)``.  The optimum need not be unique; the simplex
    vertex returned is deterministic.
    """
    tol = default_tol(instance.liabilities, instance.inflow) if tol is None else tol
    P = solve_matrix_period(instance.liabilities, instance.inflow, options)
    return P, static_report(instance, P, MATRIX, tol)


def clear_prorata_lp(instance: StaticInstance, options=None, tol=None, weights=None):
    """The (unique) maximal pro-rata clearing vector, via LP.

    ``weights`` replaces the all-ones objective by any positive vector; the
    optimizer does not change.
    """
    tol = default_tol(instance.liabilities, instance.inflow) if tol is None else tol
    if weights is not None and np.any(np.asarray(weights) <= 0):
        raise ValueError("objective weights must be positive")
    p = solve_prorata_period(instance.relative, instance.nominal_out, instance.inflow,
                             options, weights)
    return p, static_report(instance, p, PRORATA, tol)


@dataclass
class FdaResult:
    payments: np.ndarray
    iterations: int
    converged: bool
    steps: list = field(default_factory=list)
    trace: Optional[list] = None


def fda_iterate(A, pbar, cash, max_iters=10_000, tol=1e-10, keep_trace=False) -> FdaResult:
    """Fictitious-default iteration ``p <- min(pbar, cash + A' p)`` from ``pbar``.

    The iterates decrease monotonically towards the greatest clearing vector.
    Stops once the sup-norm step is at most ``tol``.
    """
    A = np.asarray(A, dtype=float)
    pbar = np.asarray(pbar, dtype=float)
    cash = np.asarray(cash, dtype=float)
    p = pbar.copy()
    trace = [p.copy()] if keep_trace else None
    steps = []
    for k in range(max_iters + 1):
        nxt = np.minimum(pbar, cash + A.T @ p)
        step = float(np.abs(nxt - p).max(initial=0.0))
        steps.append(step)
        p = nxt
        if keep_trace:
            trace.append(p.copy())
        if step <= tol:
            return FdaResult(p, k, True, steps, trace)
    return FdaResult(p, max_iters, False, steps, trace)


def clear_prorata_fda(instance: StaticInstance, max_iters=10_000, tol=1e-10, keep_trace=False):
    return fda_iterate(instance.relative, instance.nominal_out, instance.inflow,
                       max_iters, tol, keep_trace)
