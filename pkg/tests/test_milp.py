import itertools

import numpy as np
import pytest

from dne.lp import LinearProgram, LpError, solve_lp
from dne.milp import MipConfig, MixedIntegerProgram, NodeLimitExceeded, solve_milp


def knapsack():
    return MixedIntegerProgram(
        LinearProgram([3, 4], [[2, 3]], ["<="], [4], [0, 0], [1, 1], maximize=True), [0, 1])


def test_small_knapsack():
    sol = solve_milp(knapsack())
    assert sol.optimal
    assert sol.objective == pytest.approx(4)
    np.testing.assert_array_equal(sol.x, [0, 1])


def test_integral_relaxation_needs_no_branching():
    # 2x2 assignment: the polytope is integral
    c = [4, 1, 2, 3]
    A = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    lp = LinearProgram(c, A, ["=="] * 4, [1] * 4, np.zeros(4), np.ones(4))
    sol = solve_milp(MixedIntegerProgram(lp, range(4)))
    assert sol.objective == pytest.approx(solve_lp(lp).objective)
    assert sol.nodes == 1


def test_no_integer_in_interval():
    lp = LinearProgram([1], [[1]], ["<="], [5], [0.2], [0.8])
    assert solve_milp(MixedIntegerProgram(lp, [0])).status == "infeasible"


def test_integer_needs_finite_bounds():
    with pytest.raises(LpError):
        MixedIntegerProgram(LinearProgram([1], [[1]], ["<="], [5]), [0])


def random_mip(rng):
    nb = int(rng.integers(2, 13))
    nc = int(rng.integers(0, 4))
    n = nb + nc
    m = int(rng.integers(3, 9))
    A = rng.integers(-5, 10, size=(m, n)).astype(float)
    b = rng.integers(3, 20, size=m).astype(float)
    c = rng.integers(-3, 10, size=n).astype(float)
    lb = np.zeros(n)
    ub = np.r_[np.ones(nb), np.full(nc, 5.0)]
    return MixedIntegerProgram(LinearProgram(c, A, ["<="] * m, b, lb, ub, maximize=True),
                               range(nb)), nb


def enumerate_mip(mip, nb):
    lp = mip.lp
    best = -np.inf
    for z in itertools.product([0.0, 1.0], repeat=nb):
        lo, hi = lp.lb.copy(), lp.ub.copy()
        lo[:nb] = hi[:nb] = z
        r = solve_lp(LinearProgram(lp.c, lp.A, lp.relations, lp.b, lo, hi, True))
        if r.optimal:
            best = max(best, r.objective)
    return best


def test_matches_enumeration_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(100):
        mip, nb = random_mip(rng)
        sol = solve_milp(mip)
        best = enumerate_mip(mip, nb)
        assert (sol.status == "infeasible") == (best == -np.inf)
        if sol.optimal:
            assert sol.objective == pytest.approx(best, abs=1e-6)
            assert mip.lp.violation(sol.x) <= 1e-7
            assert np.all(sol.x[:nb] == np.round(sol.x[:nb]))


def test_bound_monotone_and_deterministic():
    rng = np.random.default_rng(3)
    for _ in range(20):
        mip, _ = random_mip(rng)
        a, b = solve_milp(mip), solve_milp(mip)
        assert a.nodes == b.nodes and a.status == b.status
        if a.optimal:
            np.testing.assert_array_equal(a.x, b.x)
            hist = np.array(a.bound_history)
            assert np.all(np.diff(hist) <= 1e-9)
            assert a.best_bound >= a.objective - 1e-6


def test_node_limit():
    rng = np.random.default_rng(7)
    n = 14
    w = rng.integers(5, 40, size=n).astype(float)
    lp = LinearProgram(w + rng.random(n), [w], ["<="], [w.sum() / 2 + 0.5],
                       np.zeros(n), np.ones(n), maximize=True)
    with pytest.raises(NodeLimitExceeded):
        solve_milp(MixedIntegerProgram(lp, range(n)), MipConfig(node_limit=3))


def test_cutoff_agrees_with_plain_solve():
    rng = np.random.default_rng(11)
    for _ in range(30):
        mip, _ = random_mip(rng)
        plain = solve_milp(mip)
        if not plain.optimal:
            continue
        below = solve_milp(mip, cutoff=plain.objective - 0.5)
        assert below.optimal and below.objective == pytest.approx(plain.objective, abs=1e-6)
        above = solve_milp(mip, cutoff=plain.objective + 1e-3)
        assert above.status == "cutoff" and above.x is None
