import numpy as np
import pytest

from dynclear.graph import has_globally_reachable_sink_node
from dynclear.lp import LinearProgram, check_feasible, solve as lp_solve
from dynclear.network import MATRIX, PRORATA, StaticInstance
from dynclear.static import (certify_clearing, clear_matrix, clear_prorata_fda, clear_prorata_lp,
                             fda_iterate, matrix_period_lp, prorata_period_lp)

from _gen import random_static
import _reference


def unpaid_prorata_by_hand(A, pbar, c):
    """Greatest clearing vector of a small system by enumerating default sets.

    For a guessed default set D the payments of D solve a linear system; the
    guess is right when the result is consistent.  The largest consistent
    vector is the greatest clearing vector.
    """
    import itertools
    n = len(pbar)
    best = None
    for k in range(n + 1):
        for D in itertools.combinations(range(n), k):
            D = list(D)
            S = [i for i in range(n) if i not in D]
            p = pbar.astype(float).copy()
            if D:
                M = np.eye(len(D)) - A[np.ix_(D, D)].T
                rhs = c[D] + A[np.ix_(S, D)].T @ pbar[S]
                try:
                    p[D] = np.linalg.solve(M, rhs)
                except np.linalg.LinAlgError:
                    continue
            target = np.minimum(pbar, c + A.T @ p)
            if np.all(p >= -1e-9) and np.allclose(p, target, atol=1e-7):
                if best is None or p.sum() > best.sum():
                    best = p
    return best


class TestNominal:
    def test_matrix(self, nominal):
        P, rep = clear_matrix(nominal)
        assert np.abs(P - _reference.PBAR).max() <= 1e-8
        assert rep.default_set == [] and rep.certified

    def test_prorata(self, nominal):
        p, rep = clear_prorata_lp(nominal)
        assert np.abs(p - nominal.nominal_out).max() <= 1e-8
        assert rep.default_set == []


class TestShock:
    def test_prorata_unpaid(self, shocked):
        p, rep = clear_prorata_lp(shocked)
        assert rep.total_unpaid == pytest.approx(53.66, abs=0.005)
        assert rep.default_set == [0, 1, 2, 3]
        assert rep.certified

    def test_prorata_matches_default_set_enumeration(self, shocked):
        p, _ = clear_prorata_lp(shocked)
        ref = unpaid_prorata_by_hand(shocked.relative, shocked.nominal_out, shocked.inflow)
        np.testing.assert_allclose(p, ref, atol=1e-7)

    def test_matrix_unpaid(self, shocked):
        P, rep = clear_matrix(shocked)
        assert rep.total_unpaid == pytest.approx(20, abs=1e-6)
        assert rep.default_set == [2]
        assert rep.certified
        assert np.all(rep.worths >= -1e-8)

    def test_sink_holds_vacuously(self, shocked):
        p, _ = clear_prorata_lp(shocked)
        cert = certify_clearing(shocked, p, PRORATA)
        assert cert.checks["priority"].violation < 1e-6
        assert cert.checks["sink_full_payment"].passed
        assert p[4] == 0 == shocked.nominal_out[4]

    def test_half_payments_fail_priority(self, shocked):
        p, _ = clear_prorata_lp(shocked)
        cert = certify_clearing(shocked, 0.5 * p, PRORATA)
        assert cert.checks["feasible"].passed
        assert not cert.checks["priority"].passed

    def test_matrix_overpayment_located(self, shocked):
        P = _reference.PBAR.copy()
        cert = certify_clearing(shocked, P, MATRIX)
        assert not cert.checks["feasible"].passed
        # node 2 is the one that cannot afford its full liabilities
        assert cert.checks["feasible"].locator == (2,)

    def test_fda_agrees(self, shocked):
        res = clear_prorata_fda(shocked)
        p, _ = clear_prorata_lp(shocked)
        assert res.converged
        np.testing.assert_allclose(res.payments, p, atol=1e-8)


class TestFda:
    def test_monotone_and_above_lp(self, shocked):
        res = clear_prorata_fda(shocked, keep_trace=True)
        p, _ = clear_prorata_lp(shocked)
        trace = np.array(res.trace)
        assert np.all(np.diff(trace, axis=0) <= 1e-12)
        assert np.all(trace >= p - 1e-9)

    def test_two_cycle_without_cash(self):
        # two banks owing each other, nothing else: every p with p0 = p1 clears,
        # and the iteration stays at the greatest one
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        res = fda_iterate(A, np.array([5.0, 5.0]), np.zeros(2))
        assert res.converged and res.iterations == 0
        assert res.payments.tolist() == [5, 5]

    def test_iteration_limit(self, shocked):
        res = fda_iterate(shocked.relative, shocked.nominal_out, shocked.inflow, max_iters=1, tol=0.0)
        assert not res.converged and res.iterations == 1


class TestPolytope:
    def test_displayed_static_matrix_is_feasible(self):
        inst = StaticInstance(_reference.PBAR, _reference.STREAM[0], _reference.EXTERNAL)
        prog, ij = matrix_period_lp(inst.liabilities, inst.inflow)
        x = _reference.P_STATIC_T0[ij[:, 0], ij[:, 1]]
        assert check_feasible(prog, x).feasible

    def test_lp_toy(self):
        prog = LinearProgram(c=[1], A_ub=[[1]], b_ub=[1])
        assert check_feasible(prog, [1]) == (True, 0.0, None)
        res = check_feasible(prog, [1.5])
        assert not res.feasible and res.violation == pytest.approx(0.5)

    def test_only_owing_nodes_are_variables(self, shocked):
        _, active = prorata_period_lp(shocked.relative, shocked.nominal_out, shocked.inflow)
        assert active.tolist() == [0, 1, 2, 3]


@pytest.mark.parametrize("seed", range(30))
def test_random_instances(seed):
    rng = np.random.default_rng(seed)
    inst = random_static(rng)
    P, mrep = clear_matrix(inst)
    p, prep = clear_prorata_lp(inst)
    assert mrep.certified and prep.certified
    # limited liability in both modes
    assert np.all(mrep.worths >= -1e-8) and np.all(prep.worths >= -1e-8)
    # pro-rata payments are feasible unrestricted payments
    assert mrep.total_unpaid <= prep.total_unpaid + 1e-7
    # any positive objective picks the same vector
    w = rng.uniform(0.1, 10, inst.n)
    q, _ = clear_prorata_lp(inst, weights=w)
    np.testing.assert_allclose(q, p, atol=1e-7)
    # and it dominates every other feasible vector: vertices of the polytope
    # reached by objectives of either sign, and mixtures of them
    A, pbar, c = inst.relative, inst.nominal_out, inst.inflow
    prog, active = prorata_period_lp(A, pbar, c)
    points = []
    for _ in range(8):
        obj = rng.uniform(-1, 1, active.size)
        sol = lp_solve(LinearProgram(obj, prog.A_ub, prog.b_ub, upper=prog.upper))
        assert sol.success
        x = np.zeros(inst.n)
        x[active] = sol.x
        points.append(x)
    points = np.array(points)
    mixes = rng.dirichlet(np.ones(len(points)), size=20) @ points
    for q in np.vstack([points, mixes]):
        assert np.all(q <= c + A.T @ q + 1e-8)
        assert np.all(q <= p + 1e-9)
    if has_globally_reachable_sink_node(A):
        res = clear_prorata_fda(inst)
        assert res.converged
        np.testing.assert_allclose(res.payments, p, atol=1e-6)


def test_weights_must_be_positive(shocked):
    with pytest.raises(ValueError):
        clear_prorata_lp(shocked, weights=np.zeros(5))
