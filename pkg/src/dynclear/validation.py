"""Certificates for computed schedules: admissibility, priority, acyclicity.

Every check returns a :class:`Check`; a failed check is a result, never an
exception, so the functions can be pointed at arbitrary schedules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import strong_components
from .network import MATRIX, PaymentSchedule, default_tol


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    violation: float = 0.0
    locator: Optional[tuple] = None
    detail: str = ""

    def __bool__(self):
        return self.passed


@dataclass
class Report:
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __bool__(self):
        return self.passed

    def add(self, check: Check):
        self.checks[check.name] = check
        return check

    def summary(self) -> dict:
        return {k: bool(c) for k, c in self.checks.items()}


def worst(name, residual, tol, detail="") -> Check:
    """Largest entry of a signed violation array, with its index."""
    r = np.asarray(residual, dtype=float)
    if r.size == 0:
        return Check(name, True, 0.0, None, detail)
    k = np.unravel_index(int(np.argmax(r)), r.shape)
    v = float(max(r[k], 0.0))
    return Check(name, v <= tol, v, tuple(int(i) for i in k), detail)


def priority_tol(schedule: PaymentSchedule) -> float:
    return default_tol(schedule.instance.liabilities, schedule.instance.inflows.sum(axis=0), base=1e-6)


def check_admissible(schedule: PaymentSchedule, tol: Optional[float] = None) -> Report:
    """Evaluate the three admissibility families.

    Locators are ``(t, i)`` or ``(t, i, j)``.
    """
    tol = schedule.tolerance() if tol is None else tol
    res = schedule.admissibility_residuals()
    rep = Report()
    rep.add(worst("nonnegative", res["nonnegative"], tol, "P(t) >= 0"))
    rep.add(worst("nominal_cap", res["nominal_cap"], tol, "payments within compounded nominal"))
    rep.add(worst("worth", res["worth"], tol, "w(t+1) >= 0"))
    return rep


def check_absolute_priority(schedule: PaymentSchedule, tol: Optional[float] = None) -> Report:
    """Either pay the nominal in full or pay out the whole balance.

    Three checks: the per-period implication; the stronger form where every
    period before a node's first full repayment empties its balance; and the
    earliest-payment consequence (a node able to pay in full does so).
    """
    tol = priority_tol(schedule) if tol is None else tol
    inst = schedule.instance
    out, inn = schedule.out_flows, schedule.in_flows
    due = schedule.nominal_out[:-1]
    available = schedule.worths[:-1] + inst.inflows + inn
    leftover = available - out  # = w(t+1)
    short = out < due - tol

    gap = np.where(short, np.abs(leftover), 0.0)
    rep = Report()
    rep.add(worst("implication", gap, tol, "short-paying nodes pay out their balance"))

    full = np.all(np.abs(schedule.matrices - schedule.nominal[:-1]) <= tol, axis=2)
    T, n = full.shape
    before_first = np.zeros((T, n), dtype=bool)
    for i in range(n):
        hits = np.flatnonzero(full[:, i])
        t_star = int(hits[0]) if hits.size else T
        before_first[:t_star, i] = True
    rep.add(worst("before_first_full", np.where(before_first, np.abs(leftover), 0.0), tol,
                  "balance paid out at every period before the first full repayment"))

    able = available >= due - tol
    rep.add(worst("earliest_payment", np.where(able, due - out, 0.0), tol,
                  "nodes that can pay in full do so"))
    return rep


def check_payment_acyclicity(schedule: PaymentSchedule, tol: float = 0.0) -> Report:
    """No directed cycle in the payment graph of any period t >= 1.

    Arcs are entries strictly above ``tol``.  Period 0 is exempt.
    """
    rep = Report()
    cycles = []
    for t in range(1, schedule.horizon):
        P = np.where(schedule.matrices[t] > tol, schedule.matrices[t], 0.0)
        for comp in strong_components(P).components:
            if comp.is_cyclic:
                cycles.append((t, comp.nodes))
    check = Check("acyclic", not cycles, float(len(cycles)), cycles[0] if cycles else None,
                  "; ".join(f"t={t}: {list(c)}" for t, c in cycles))
    rep.add(check)
    return rep


def fixed_point_residual(schedule: PaymentSchedule) -> np.ndarray:
    """|p(t) - min(pbar(t), c(t) + w(t) + A' p(t))| per period (pro-rata)."""
    inst = schedule.instance
    A = inst.relative
    p = schedule.out_flows
    pbar = schedule.nominal_out[:-1]
    w = schedule.worths[:-1]
    target = np.minimum(pbar, inst.inflows + w + p @ A)
    return np.abs(p - target)


def check_fixed_point(schedule: PaymentSchedule, tol: float = 1e-6) -> Check:
    return worst("fixed_point", fixed_point_residual(schedule), tol,
                 "p(t) = min(pbar(t), c(t) + w(t) + A'p(t))")


def certify_schedule(schedule: PaymentSchedule, tol: Optional[float] = None) -> Report:
    """All certificates that apply to the schedule's mode."""
    rep = Report()
    adm = check_admissible(schedule, tol)
    rep.add(Check("admissible", adm.passed,
                  max(c.violation for c in adm.checks.values()),
                  next((c.locator for c in adm.checks.values() if not c), None)))
    pri = check_absolute_priority(schedule, None if tol is None else max(tol, priority_tol(schedule)))
    rep.add(Check("priority", pri.passed,
                  max(c.violation for c in pri.checks.values()),
                  next((c.locator for c in pri.checks.values() if not c), None)))
    if schedule.mode == MATRIX:
        rep.add(check_payment_acyclicity(schedule).checks["acyclic"])
    else:
        rep.add(check_fixed_point(schedule, max(1e-6, priority_tol(schedule))))
    return rep
