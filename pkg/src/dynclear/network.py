"""Liability networks and the recursions that move them through time.

Conventions
-----------
Nodes are 0-based.  ``liabilities[i, j]`` is the nominal amount node ``i``
owes node ``j``; the diagonal is zero.  The external sector, when modelled,
is an ordinary node whose liability row is zero.

A payment schedule over ``T`` periods is an array of shape ``(T, n, n)``
(matrix mode) or ``(T, n)`` (pro-rata mode, total out-payment per node).
Trajectories indexed by time have ``T + 1`` entries, position ``t`` holding
the value at the beginning of period ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

MATRIX = "matrix"
PRORATA = "prorata"


class InvalidInstanceError(ValueError):
    """An instance breaks one of the model invariants."""


class InadmissibleScheduleError(ValueError):
    """A payment schedule violates the admissibility constraints."""


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def validate_liabilities(liabilities, external_node=None) -> np.ndarray:
    P = np.asarray(liabilities, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise InvalidInstanceError(f"liability matrix must be square and non-empty, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise InvalidInstanceError("liability matrix contains NaN or Inf")
    if np.any(P < 0):
        i, j = np.argwhere(P < 0)[0]
        raise InvalidInstanceError(f"negative liability at ({i}, {j}): {P[i, j]}")
    if np.any(np.diag(P) != 0):
        i = int(np.flatnonzero(np.diag(P))[0])
        raise InvalidInstanceError(f"diagonal must be zero (entry ({i}, {i}) = {P[i, i]})")
    if external_node is not None:
        if not 0 <= external_node < P.shape[0]:
            raise InvalidInstanceError(f"external_node {external_node} out of range")
        if np.any(P[external_node] != 0):
            raise InvalidInstanceError(f"external node {external_node} must owe nothing")
    return P


def relative_liabilities(liabilities) -> np.ndarray:
    """Row-stochastic pro-rata matrix.

    Rows of nodes that owe something are their liabilities divided by the
    row total; a node that owes nothing gets a unit self-loop.
    """
    P = np.asarray(liabilities, dtype=float)
    owed = P.sum(axis=1)
    A = np.zeros_like(P)
    pos = owed > 0
    A[pos] = P[pos] / owed[pos, None]
    zero = np.flatnonzero(~pos)
    A[zero, zero] = 1.0
    return A


def _check_inflow(c, n, what="inflow"):
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != n:
        raise InvalidInstanceError(f"{what} has {c.shape[-1]} entries per period, expected {n}")
    if not np.all(np.isfinite(c)):
        raise InvalidInstanceError(f"{what} contains NaN or Inf")
    if np.any(c < 0):
        raise InvalidInstanceError(f"{what} must be nonnegative")
    return c


@dataclass(frozen=True)
class StaticInstance:
    liabilities: np.ndarray
    inflow: np.ndarray
    external_node: Optional[int] = None

    def __post_init__(self):
        P = validate_liabilities(self.liabilities, self.external_node)
        c = _check_inflow(self.inflow, P.shape[0])
        if c.ndim != 1:
            raise InvalidInstanceError("static inflow must be a vector")
        object.__setattr__(self, "liabilities", _readonly(P))
        object.__setattr__(self, "inflow", _readonly(c))

    @property
    def n(self) -> int:
        return self.liabilities.shape[0]

    @property
    def nominal_out(self) -> np.ndarray:
        return self.liabilities.sum(axis=1)

    @property
    def nominal_in(self) -> np.ndarray:
        return self.inflow + self.liabilities.sum(axis=0)

    @cached_property
    def relative(self) -> np.ndarray:
        return relative_liabilities(self.liabilities)

    def as_dynamic(self, alpha=1.0, eta=0.0) -> "DynamicInstance":
        return DynamicInstance(self.liabilities, self.inflow[None, :], alpha, eta, self.external_node)


@dataclass(frozen=True)
class DynamicInstance:
    liabilities: np.ndarray
    inflows: np.ndarray
    alpha: float = 1.0
    eta: float = 0.0
    external_node: Optional[int] = None

    def __post_init__(self):
        P = validate_liabilities(self.liabilities, self.external_node)
        c = np.atleast_2d(_check_inflow(self.inflows, P.shape[0], "inflows"))
        if c.ndim != 2 or c.shape[0] < 1:
            raise InvalidInstanceError("inflows must be a non-empty T x n array")
        if not np.isfinite(self.alpha) or self.alpha < 1:
            raise InvalidInstanceError(f"alpha must be >= 1, got {self.alpha}")
        if not 0 <= self.eta < 1:
            raise InvalidInstanceError(f"eta must lie in [0, 1), got {self.eta}")
        object.__setattr__(self, "liabilities", _readonly(P))
        object.__setattr__(self, "inflows", _readonly(c))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.liabilities.shape[0]

    @property
    def horizon(self) -> int:
        return self.inflows.shape[0]

    @property
    def nominal_out(self) -> np.ndarray:
        return self.liabilities.sum(axis=1)

    @cached_property
    def relative(self) -> np.ndarray:
        return relative_liabilities(self.liabilities)

    @cached_property
    def weights(self) -> np.ndarray:
        return stage_weights(self.horizon, self.alpha, self.eta)

    def period(self, t: int) -> StaticInstance:
        """Static instance seeing only the inflow of period ``t``."""
        return StaticInstance(self.liabilities, self.inflows[t], self.external_node)

    def replace(self, **changes) -> "DynamicInstance":
        """Copy with new alpha/eta/horizon.

        A longer horizon pads the inflow stream with zero periods, a shorter
        one truncates it.
        """
        horizon = changes.pop("horizon", None)
        kw = dict(liabilities=self.liabilities, inflows=self.inflows, alpha=self.alpha,
                  eta=self.eta, external_node=self.external_node)
        kw.update(changes)
        if horizon is not None:
            c = np.asarray(kw["inflows"])
            if horizon < 1:
                raise InvalidInstanceError("horizon must be at least 1")
            if horizon <= c.shape[0]:
                c = c[:horizon]
            else:
                c = np.vstack([c, np.zeros((horizon - c.shape[0], c.shape[1]))])
            kw["inflows"] = c
        return DynamicInstance(**kw)


def cumulative_inflow(inflows, t: int) -> np.ndarray:
    c = np.atleast_2d(np.asarray(inflows, dtype=float))
    if not 0 <= t < c.shape[0]:
        raise IndexError(f"period {t} outside 0..{c.shape[0] - 1}")
    return c[: t + 1].sum(axis=0)


def stage_weights(T: int, alpha: float = 1.0, eta: float = 0.0) -> np.ndarray:
    """Objective weights a_0 > ... > a_{T-1} of the multi-period clearing LP.

    With ``eta = 0`` these are the geometric sums ``sum_{j<T-t} alpha**j``
    that turn the cumulative in-flow shortfall into a weighted payment total.
    A positive ``eta`` mixes in a terminal penalty ``eta * alpha**(T-t)`` on
    debt still outstanding at the horizon.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T}")
    if not np.isfinite(alpha) or alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if not 0 <= eta < 1:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    rem = T - np.arange(T)
    if alpha == 1:
        geo = rem.astype(float)
    else:
        geo = (alpha ** rem - 1.0) / (alpha - 1.0)
    return eta * alpha ** rem + (1 - eta) * geo


def evolve_nominal(liabilities, payments, alpha=1.0, tol=None) -> np.ndarray:
    """Iterate ``Pbar(t+1) = alpha * (Pbar(t) - P(t))`` from ``Pbar(0)``.

    Works for matrices and for pro-rata vectors alike.  Raises
    :class:`InadmissibleScheduleError` naming the first ``(t, i[, j])`` where a
    payment exceeds what is due (beyond ``tol``) or is negative.
    """
    Pbar = np.asarray(liabilities, dtype=float)
    pay = np.asarray(payments, dtype=float)
    if pay.shape[1:] != Pbar.shape:
        raise ValueError(f"payments of shape {pay.shape[1:]} do not match {Pbar.shape}")
    if tol is None:
        tol = default_tol(Pbar)
    out = np.empty((pay.shape[0] + 1,) + Pbar.shape)
    out[0] = Pbar
    for t in range(pay.shape[0]):
        excess = pay[t] - out[t]
        bad = np.argwhere((excess > tol) | (pay[t] < -tol))
        if bad.size:
            loc = (t,) + tuple(int(k) for k in bad[0])
            raise InadmissibleScheduleError(f"payment at {loc} outside [0, nominal]")
        out[t + 1] = alpha * (out[t] - pay[t])
    return out


def nominal_closed_form(liabilities, payments, alpha, t) -> np.ndarray:
    # alpha**t Pbar - sum_{k<t} alpha**(t-k) P(k)
    Pbar = np.asarray(liabilities, dtype=float)
    pay = np.asarray(payments, dtype=float)
    acc = alpha ** t * Pbar
    for k in range(t):
        acc = acc - alpha ** (t - k) * pay[k]
    return acc


def _matrix_flows(payments):
    pay = np.asarray(payments, dtype=float)
    return pay.sum(axis=2), pay.sum(axis=1)  # out, in (per period)


def evolve_worth(instance: DynamicInstance, payments) -> np.ndarray:
    """Worth trajectory ``w(0..T)`` for a matrix schedule (w(0) = 0)."""
    out, inn = _matrix_flows(payments)
    return _worth_from_flows(instance.inflows, out, inn)


def _worth_from_flows(inflows, out, inn):
    T, n = inflows.shape
    w = np.zeros((T + 1, n))
    for t in range(T):
        w[t + 1] = w[t] + inflows[t] + inn[t] - out[t]
    return w


def worth_closed_form(instance: DynamicInstance, payments, t) -> np.ndarray:
    # C(t-1) + sum_{k<t} (P(k)^T - P(k)) 1
    if t == 0:
        return np.zeros(instance.n)
    out, inn = _matrix_flows(payments)
    return cumulative_inflow(instance.inflows, t - 1) + (inn[:t] - out[:t]).sum(axis=0)


def default_tol(*arrays, base=1e-7) -> float:
    scale = max([1.0] + [float(np.abs(a).max(initial=0.0)) for a in arrays])
    return base * scale


@dataclass(frozen=True)
class PaymentSchedule:
    """Payments over the horizon together with the trajectories they induce."""

    instance: DynamicInstance
    payments: np.ndarray
    mode: str = MATRIX

    def __post_init__(self):
        pay = np.array(self.payments, dtype=float)
        T, n = self.instance.horizon, self.instance.n
        shape = (T, n, n) if self.mode == MATRIX else (T, n)
        if self.mode not in (MATRIX, PRORATA):
            raise ValueError(f"unknown mode {self.mode!r}")
        if pay.shape != shape:
            raise ValueError(f"{self.mode} schedule must have shape {shape}, got {pay.shape}")
        pay.setflags(write=False)
        object.__setattr__(self, "payments", pay)

    @property
    def horizon(self) -> int:
        return self.instance.horizon

    @cached_property
    def matrices(self) -> np.ndarray:
        """Payment matrices; in pro-rata mode ``diag(p(t)) A``."""
        if self.mode == MATRIX:
            return self.payments
        return self.payments[:, :, None] * self.instance.relative[None, :, :]

    @cached_property
    def out_flows(self) -> np.ndarray:
        return self.matrices.sum(axis=2)

    @cached_property
    def in_flows(self) -> np.ndarray:
        # external inflow excluded
        return self.matrices.sum(axis=1)

    @cached_property
    def nominal(self) -> np.ndarray:
        """Nominal matrices Pbar(0..T), computed without admissibility checks."""
        return evolve_nominal(self.instance.liabilities, self.matrices, self.instance.alpha, tol=np.inf)

    @property
    def nominal_out(self) -> np.ndarray:
        return self.nominal.sum(axis=2)

    @cached_property
    def worths(self) -> np.ndarray:
        return _worth_from_flows(self.instance.inflows, self.out_flows, self.in_flows)

    @property
    def residual(self) -> np.ndarray:
        """Debt outstanding after the last period, Pbar(T)."""
        return self.nominal[-1]

    def admissibility_residuals(self) -> dict:
        """Signed constraint slack per family (positive = violated).

        ``nonnegative`` and ``nominal_cap`` have the payment shape, ``worth``
        has shape ``(T, n)`` and is the negated post-payment worth w(t+1).
        """
        inst = self.instance
        T = self.horizon
        alpha = inst.alpha
        if self.mode == MATRIX:
            pay, base = self.payments, inst.liabilities
        else:
            pay, base = self.payments, inst.nominal_out
        cap = np.empty_like(pay)
        acc = np.zeros_like(base)
        for t in range(T):
            acc = alpha * acc + pay[t]
            cap[t] = acc - alpha ** t * base
        C = np.cumsum(inst.inflows, axis=0)
        net = np.cumsum(self.in_flows - self.out_flows, axis=0)
        worth = -(C + net)
        return {"nonnegative": -pay, "nominal_cap": cap, "worth": worth}

    def max_violation(self) -> float:
        return max(float(v.max(initial=0.0)) for v in self.admissibility_residuals().values())

    def tolerance(self) -> float:
        return default_tol(self.instance.liabilities, np.cumsum(self.instance.inflows, axis=0))

    def is_admissible(self, tol=None) -> bool:
        return self.max_violation() <= (self.tolerance() if tol is None else tol)


def loss(schedule: PaymentSchedule, eta=None, check=True, tol=None) -> float:
    """Cumulative in-flow shortfall over the horizon.

    With ``eta > 0`` returns ``(1 - eta) * L + eta * 1' Pbar(T) 1`` instead.
    ``eta`` defaults to the instance's value.  The value is summed period by
    period from nominal and actual in-flows.
    """
    if check and not schedule.is_admissible(tol):
        raise InadmissibleScheduleError(
            f"schedule violates admissibility by {schedule.max_violation():.3g}")
    inst = schedule.instance
    eta = inst.eta if eta is None else eta
    nominal = schedule.nominal
    total = 0.0
    for t in range(schedule.horizon):
        nominal_in = inst.inflows[t] + nominal[t].sum(axis=0)
        actual_in = inst.inflows[t] + schedule.in_flows[t]
        total += float((nominal_in - actual_in).sum())
    if eta:
        total = (1 - eta) * total + eta * float(nominal[-1].sum())
    return total


def loss_closed_form(schedule: PaymentSchedule, eta=None) -> float:
    # a_0 1'Pbar 1 - sum_t a_t 1'P(t) 1 with the eta-dependent weights
    inst = schedule.instance
    eta = inst.eta if eta is None else eta
    a = stage_weights(schedule.horizon, inst.alpha, eta)
    paid = schedule.out_flows.sum(axis=1)
    return float(a[0] * inst.liabilities.sum() - a @ paid)


@dataclass
class ClearingReport:
    """Outcome of a clearing computation."""

    loss: float
    objective: float
    residual: np.ndarray
    default_set: list
    worths: np.ndarray
    certifications: dict = field(default_factory=dict)
    solver_status: str = "optimal"
    cost_eta: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def total_unpaid(self) -> float:
        return float(np.sum(self.residual))

    @property
    def certified(self) -> bool:
        return all(bool(v) for v in self.certifications.values())


def default_set(residual, tol, external_node=None) -> list:
    r = np.asarray(residual, dtype=float)
    owed = r.sum(axis=1) if r.ndim == 2 else r
    return [int(i) for i in np.flatnonzero(owed > tol) if i != external_node]
