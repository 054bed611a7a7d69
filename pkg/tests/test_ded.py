import warnings

import numpy as np
import pytest

from dne.cases import ramp_limited_case, synthetic_30_bus_case, two_bus_qsu_case
from dne.ded import DedInfeasibleError, DedResult, sigma_from_lmps, solve_ded
from dne.system import Bus, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm


def one_bus(units, load, farms=()):
    T = len(load)
    return SystemCase((Bus(1, is_slack=True),), (), tuple(units), tuple(farms),
                      {1: tuple(load)}, TimeGrid(T))


def test_single_marginal_unit():
    case = one_bus([ThermalUnit("G", 1, 0, 200, np.inf, 20, initial_output=100)], [100, 110])
    ded = solve_ded(case)
    np.testing.assert_allclose(ded.ddp[:, 0], [100, 110])
    np.testing.assert_allclose(ded.lmp, [[20], [20]])
    assert ded.total_cost == pytest.approx(20 * 210)


def test_marginal_unit_sets_price():
    case = one_bus([ThermalUnit("A", 1, 0, 60, np.inf, 10, initial_output=50),
                    ThermalUnit("B", 1, 0, 100, np.inf, 30, initial_output=50)], [100])
    ded = solve_ded(case)
    np.testing.assert_allclose(ded.ddp[0], [60, 40])
    assert ded.lmp[0, 0] == pytest.approx(30)


def test_shortfall_names_period_one():
    case = one_bus([ThermalUnit("G", 1, 0, 200, np.inf, 20, initial_output=100)], [500])
    with pytest.raises(DedInfeasibleError, match="period 1") as info:
        solve_ded(case)
    assert info.value.period == 1
    assert info.value.shortfall == pytest.approx(300)


def test_uncongested_prices_are_flat():
    ded = solve_ded(ramp_limited_case())
    assert np.ptp(ded.lmp, axis=1) == pytest.approx(0, abs=1e-8)


def test_congestion_separates_prices():
    # cheap unit at bus 1 behind a 20 MW line, expensive unit at the load bus
    case = SystemCase((Bus(1), Bus(2, is_slack=True)), (Line("L", 1, 2, 0.1, 20),),
                      (ThermalUnit("cheap", 1, 0, 100, np.inf, 10, initial_output=20),
                       ThermalUnit("dear", 2, 0, 100, np.inf, 40, initial_output=30)),
                      (), {2: (50.0,)}, TimeGrid(1))
    ded = solve_ded(case)
    np.testing.assert_allclose(ded.ddp[0], [20, 30])
    np.testing.assert_allclose(ded.lmp[0], [10, 40], atol=1e-8)


def test_cost_matches_duals():
    # LP optimality: primal cost equals the dual bound from the kernel
    for case in (ramp_limited_case(), synthetic_30_bus_case()):
        ded = solve_ded(case)
        cost = np.array([g.marginal_cost for g in case.units])
        assert ded.total_cost == pytest.approx(float((ded.ddp * cost).sum()), abs=1e-8)


def farms_case(bus_a, bus_b):
    lines = (Line("L", 1, 2, 0.1, 15),)
    units = (ThermalUnit("cheap", 1, 0, 100, np.inf, 10, initial_output=30),
             ThermalUnit("dear", 2, 0, 100, np.inf, 20, initial_output=30))
    farms = (WindFarm("A", bus_a, (0.0,) * 2, (10.0,) * 2, (5.0,) * 2),
             WindFarm("B", bus_b, (0.0,) * 2, (10.0,) * 2, (5.0,) * 2))
    return SystemCase((Bus(1), Bus(2, is_slack=True)), lines, units, farms,
                      {2: (40.0, 40.0)}, TimeGrid(2))


def test_sigma_proportional_to_farm_lmp():
    case = farms_case(2, 1)      # farm A at the 20 $/MWh bus, B at the 10 $/MWh bus
    ded = solve_ded(case)
    sigma = sigma_from_lmps(ded, case)
    np.testing.assert_allclose(sigma[:, 0] / sigma[:, 1], 2.0)
    assert sigma.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(sigma >= 0)


def test_sigma_uniform_when_prices_equal_or_zero():
    case = two_bus_qsu_case()
    ded = solve_ded(case)
    np.testing.assert_allclose(sigma_from_lmps(ded, case), 0.5)
    zero = DedResult(ded.ddp, np.zeros_like(ded.lmp), 0.0, ded.unit_ids, ded.bus_ids)
    np.testing.assert_allclose(sigma_from_lmps(zero, case), 0.5)


def test_negative_prices_warn():
    case = two_bus_qsu_case()
    ded = solve_ded(case)
    lmp = ded.lmp.copy()
    lmp[0, :] = -5.0
    neg = DedResult(ded.ddp, lmp, 0.0, ded.unit_ids, ded.bus_ids)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sigma = sigma_from_lmps(neg, case)
    assert any("negative" in str(w.message) for w in caught)
    np.testing.assert_allclose(sigma, [[0.0], [1.0]])


def test_to_dict_shapes():
    doc = solve_ded(two_bus_qsu_case()).to_dict()
    assert doc["unit_ids"] == ["G1", "Q1"]
    assert np.array(doc["ddp"]).shape == (2, 2)
    assert np.array(doc["lmp"]).shape == (2, 2)
