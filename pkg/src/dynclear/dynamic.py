"""Multi-period clearing with carried-over debt.

Unpaid liabilities roll into the next period at interest ``alpha``.  The
optimal schedule maximizes ``sum_t a_t * 1'P(t)1`` over all admissible
schedules; the weights come from :func:`~dynclear.network.stage_weights`.

Matrix-mode LP variables are ordered ``(t, i, j)`` lexicographically over the
arcs ``i != j`` with positive initial liability (no other entry can ever be
owed).  Pro-rata variables are ordered ``(t, i)`` over nodes that owe
something.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp as lpmod
from .network import (MATRIX, PRORATA, ClearingReport, DynamicInstance, PaymentSchedule,
                      default_set, loss)
from .static import (SolverError, arcs, clear_matrix, clear_prorata_lp, fda_iterate,
                     solve_matrix_period, solve_prorata_period)
from .validation import certify_schedule


def dynamic_matrix_lp(instance: DynamicInstance, weights=None):
    """Flattened multi-period LP over payment matrices.

    Returns ``(LinearProgram, arcs)``.  Cumulative caps are written in
    discounted form ``sum_{s<=t} alpha**-s P(s) <= Pbar``.
    """
    T, n, alpha = instance.horizon, instance.n, instance.alpha
    a = instance.weights if weights is None else np.asarray(weights, dtype=float)
    ij = arcs(instance.liabilities)
    m = len(ij)
    nv = T * m
    cap_rows = np.zeros((T * m, nv))
    cap_rhs = np.tile(instance.liabilities[ij[:, 0], ij[:, 1]], T)
    flow = np.zeros((n, m))
    flow[ij[:, 0], np.arange(m)] += 1.0
    flow[ij[:, 1], np.arange(m)] -= 1.0
    worth_rows = np.zeros((T * n, nv))
    for t in range(T):
        for s in range(t + 1):
            cap_rows[t * m:(t + 1) * m, s * m:(s + 1) * m] = np.eye(m) * alpha ** (-s)
            worth_rows[t * n:(t + 1) * n, s * m:(s + 1) * m] = flow
    worth_rhs = np.cumsum(instance.inflows, axis=0).ravel()
    prog = lpmod.LinearProgram(
        c=np.repeat(a, m),
        A_ub=np.vstack([cap_rows, worth_rows]),
        b_ub=np.concatenate([cap_rhs, worth_rhs]),
    )
    return prog, ij


def dynamic_prorata_lp(instance: DynamicInstance, weights=None):
    """Flattened multi-period LP over pro-rata payment vectors."""
    T, n, alpha = instance.horizon, instance.n, instance.alpha
    a = instance.weights if weights is None else np.asarray(weights, dtype=float)
    pbar = instance.nominal_out
    active = np.flatnonzero(pbar > 0)
    m = active.size
    nv = T * m
    net = (np.eye(n) - instance.relative.T)[np.ix_(active, active)]
    cap_rows = np.zeros((T * m, nv))
    worth_rows = np.zeros((T * m, nv))
    for t in range(T):
        for s in range(t + 1):
            cap_rows[t * m:(t + 1) * m, s * m:(s + 1) * m] = np.eye(m) * alpha ** (-s)
            worth_rows[t * m:(t + 1) * m, s * m:(s + 1) * m] = net
    C = np.cumsum(instance.inflows, axis=0)[:, active].ravel()
    prog = lpmod.LinearProgram(
        c=np.repeat(a, m),
        A_ub=np.vstack([cap_rows, worth_rows]),
        b_ub=np.concatenate([np.tile(pbar[active], T), C]),
    )
    return prog, active


def make_report(schedule: PaymentSchedule, status="optimal", tol=None) -> ClearingReport:
    inst = schedule.instance
    tol = schedule.tolerance() if tol is None else tol
    residual = np.clip(schedule.residual, 0.0, None)
    if schedule.mode == PRORATA:
        residual = residual.sum(axis=1)
    cert = certify_schedule(schedule)
    L = loss(schedule, eta=0.0, check=False)
    return ClearingReport(
        loss=L,
        objective=float(inst.weights @ schedule.out_flows.sum(axis=1)),
        residual=residual,
        default_set=default_set(residual, tol, inst.external_node),
        worths=schedule.worths[-1],
        certifications=cert.summary(),
        solver_status=status,
        cost_eta=loss(schedule, eta=inst.eta, check=False) if inst.eta > 0 else None,
        extra={"checks": cert},
    )


def clear_dynamic_matrix(instance: DynamicInstance, options=None, weights=None):
    """Jointly optimal schedule of payment matrices; returns ``(schedule, report)``."""
    prog, ij = dynamic_matrix_lp(instance, weights)
    T, n = instance.horizon, instance.n
    pay = np.zeros((T, n, n))
    m = len(ij)
    if m:
        sol = lpmod.solve(prog, options)
        if not sol.success:
            raise SolverError(sol.status, f"dynamic matrix LP: {sol.message}")
        x = np.clip(sol.x, 0.0, None).reshape(T, m)
        pay[:, ij[:, 0], ij[:, 1]] = x
    sched = PaymentSchedule(instance, pay, MATRIX)
    return sched, make_report(sched)


def _snap(a, tol):
    return np.where(a > tol, a, 0.0)


def clear_dynamic_matrix_sequential(instance: DynamicInstance, options=None):
    """Greedy period-by-period clearing with unrestricted matrices.

    Each period maximizes what is paid now given the carried-over debt and
    worth.  Feasible for the joint problem but in general not optimal.
    """
    T, n, alpha = instance.horizon, instance.n, instance.alpha
    tol = 1e-12 * max(1.0, float(instance.liabilities.max()))
    due = instance.liabilities.copy()
    w = np.zeros(n)
    pay = np.zeros((T, n, n))
    for t in range(T):
        P = solve_matrix_period(due, w + instance.inflows[t], options)
        P = np.minimum(P, due)
        pay[t] = P
        w = w + instance.inflows[t] + P.sum(axis=0) - P.sum(axis=1)
        due = _snap(alpha * (due - P), tol)
    sched = PaymentSchedule(instance, pay, MATRIX)
    return sched, make_report(sched)


def clear_dynamic_prorata(instance: DynamicInstance, options=None, weights=None):
    """Unique optimal pro-rata schedule from the joint LP."""
    prog, active = dynamic_prorata_lp(instance, weights)
    T, n = instance.horizon, instance.n
    pay = np.zeros((T, n))
    m = active.size
    if m:
        sol = lpmod.solve(prog, options)
        if not sol.success:
            raise SolverError(sol.status, f"dynamic pro-rata LP: {sol.message}")
        pay[:, active] = np.clip(sol.x, 0.0, None).reshape(T, m)
    sched = PaymentSchedule(instance, pay, PRORATA)
    return sched, make_report(sched)


def clear_dynamic_prorata_sequential(instance: DynamicInstance, options=None, method="lp",
                                     max_iters=10_000, tol=1e-10):
    """Period-by-period pro-rata clearing, optimal for the joint problem.

    ``method="fda"`` clears each period by the fictitious-default iteration
    instead of an LP.
    """
    T, n, alpha = instance.horizon, instance.n, instance.alpha
    A = instance.relative
    due = instance.nominal_out.copy()
    w = np.zeros(n)
    pay = np.zeros((T, n))
    snap = 1e-12 * max(1.0, float(due.max()))
    for t in range(T):
        cash = w + instance.inflows[t]
        if method == "lp":
            p = solve_prorata_period(A, due, cash, options)
        elif method == "fda":
            res = fda_iterate(A, due, cash, max_iters, tol)
            if not res.converged:
                raise SolverError("iteration_limit", f"fictitious default iteration did not converge at t={t}")
            p = res.payments
        else:
            raise ValueError(f"unknown method {method!r}")
        p = np.minimum(p, due)
        pay[t] = p
        w = cash + A.T @ p - p
        due = _snap(alpha * (due - p), snap)
    sched = PaymentSchedule(instance, pay, PRORATA)
    return sched, make_report(sched)


@dataclass
class Comparison:
    rows: list = field(default_factory=list)

    def row(self, method) -> dict:
        return next(r for r in self.rows if r["method"] == method)

    def table(self) -> str:
        head = f"{'method':<22}{'loss':>12}{'unpaid':>12}  defaults"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r['method']:<22}{r['loss']:>12.2f}{r['total_unpaid']:>12.2f}  "
                         f"{r['default_set']}")
        return "\n".join(lines)


def scenario_compare(instance: DynamicInstance, options=None) -> Comparison:
    """Run every clearing method on one instance and tabulate the outcome.

    The static rows clear period 0 in isolation (operations frozen after the
    first period), as a baseline for the dynamic methods.
    """
    comp = Comparison()
    first = instance.period(0)
    for name, fn in (("static-matrix@t0", clear_matrix), ("static-prorata@t0", clear_prorata_lp)):
        _, rep = fn(first, options)
        comp.rows.append(dict(method=name, loss=rep.loss, total_unpaid=rep.total_unpaid,
                              default_set=rep.default_set, certified=rep.certified))
    solvers = (
        ("dynamic-matrix", clear_dynamic_matrix),
        ("sequential-matrix", clear_dynamic_matrix_sequential),
        ("dynamic-prorata", clear_dynamic_prorata),
        ("sequential-prorata", clear_dynamic_prorata_sequential),
    )
    for name, fn in solvers:
        _, rep = fn(instance, options)
        comp.rows.append(dict(method=name, loss=rep.loss, total_unpaid=rep.total_unpaid,
                              default_set=rep.default_set, certified=rep.certified))
    return comp
