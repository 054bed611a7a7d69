import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dne.cases import coupling_free_case, ramp_limited_case, two_bus_qsu_case
from dne.ded import solve_ded
from dne.feasibility import (WindTrajectory, check_scenario, find_violating_trajectory,
                             trajectory_from_csv, trajectory_to_csv)
from dne.formulation import DneBox
from dne.nccg import solve_dne, solve_single_period
from dne.system import Bus, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm


def traj(case, mw):
    return WindTrajectory(np.asarray(mw, dtype=float), tuple(f.id for f in case.wind_farms))


def test_forecast_is_feasible():
    case = ramp_limited_case()
    ded = solve_ded(case)
    res = check_scenario(case, ded.ddp, traj(case, case.forecast_matrix()))
    assert res.feasible and res.total_slack == 0.0 and res.violated_rows == []


def test_line_overload_names_the_line():
    case = SystemCase((Bus(1), Bus(2, is_slack=True)), (Line("L", 1, 2, 0.1, 20),),
                      (ThermalUnit("G", 2, 0, 100, np.inf, 20, initial_output=40),),
                      (WindFarm("W", 1, (0.0,), (40.0,), (10.0,)),), {2: (50.0,)},
                      TimeGrid(1))
    ded = solve_ded(case)
    res = check_scenario(case, ded.ddp, traj(case, [[30.0]]))
    assert not res.feasible
    assert res.total_slack == pytest.approx(10.0)
    assert "line_fwd[L,t=1]" in res.violated_rows


def test_fast_swing_names_ramp_rows():
    # one bus, ramp 5 MW per period, wind jumps by 20 MW
    case = SystemCase((Bus(1, is_slack=True),), (),
                      (ThermalUnit("G", 1, 0, 100, 5, 20, initial_output=40),),
                      (WindFarm("W", 1, (0.0,) * 2, (40.0,) * 2, (10.0,) * 2),),
                      {1: (50.0, 50.0)}, TimeGrid(2))
    ded = solve_ded(case)
    res = check_scenario(case, ded.ddp, traj(case, [[10.0], [30.0]]))
    assert not res.feasible
    assert res.total_slack == pytest.approx(15.0)
    assert any(r.startswith("ramp_down[G") for r in res.violated_rows)


def test_dimension_mismatch():
    case = ramp_limited_case()
    ded = solve_ded(case)
    with pytest.raises(ValueError, match="shape"):
        check_scenario(case, ded.ddp, traj(case, np.zeros((2, 2))))
    with pytest.raises(ValueError, match="farm columns"):
        WindTrajectory(np.zeros((3, 2)), ("W1",))
    with pytest.raises(ValueError, match="negative"):
        check_scenario(case, ded.ddp, traj(case, -np.ones((3, 2))))


def test_csv_round_trip():
    case = ramp_limited_case()
    t = traj(case, [[1.5, 2.0], [3.25, 0.0], [1e-7, 30.0]])
    text = trajectory_to_csv(t)
    assert text.splitlines()[0] == "period,farm,mw"
    back = trajectory_from_csv(text, case)
    np.testing.assert_array_equal(back.mw, t.mw)
    assert back.farm_ids == t.farm_ids


@pytest.mark.parametrize("text, message", [
    ("t,farm,mw\n", "header"),
    ("period,farm,mw\n1,W9,3\n", "unknown farm"),
    ("period,farm,mw\n4,W1,3\n", "outside"),
    ("period,farm,mw\n1,W1,x\n", "bad period"),
    ("period,farm,mw\n1,W1,3\n1,W1,3\n", "duplicate"),
    ("period,farm,mw\n1,W1,3\n", "missing value"),
])
def test_csv_errors(text, message):
    with pytest.raises(ValueError, match=message):
        trajectory_from_csv(text, ramp_limited_case())


def singles_and_multi(case):
    ded = solve_ded(case)
    multi = solve_dne(case, ded=ded, audit=False)
    singles = [solve_single_period(case, t, ded=ded, audit=False).box
               for t in range(case.n_periods)]
    return ded, singles, multi


def test_coupling_free_gives_none():
    case = coupling_free_case()
    ded, singles, multi = singles_and_multi(case)
    assert find_violating_trajectory(case, singles, multi.box, ded.ddp) is None


def test_identical_boxes_give_none():
    case = ramp_limited_case()
    ded = solve_ded(case)
    box = solve_dne(case, ded=ded, audit=False).box
    same = [DneBox(box.lower[t:t + 1], box.upper[t:t + 1], box.forecast[t:t + 1],
                   box.w_min[t:t + 1], box.w_max[t:t + 1], (t,)) for t in range(3)]
    assert find_violating_trajectory(case, same, box, ded.ddp) is None


def test_ramp_case_yields_a_certified_violation():
    case = ramp_limited_case()
    ded, singles, multi = singles_and_multi(case)
    found = find_violating_trajectory(case, singles, multi.box, ded.ddp)
    assert found is not None
    for t, box in enumerate(singles):
        assert np.all(box.lower[0] <= found.mw[t]) and np.all(found.mw[t] <= box.upper[0])
    assert not multi.box.contains(found.mw)
    res = check_scenario(case, ded.ddp, found)
    assert not res.feasible
    assert any(r.startswith("ramp") for r in res.violated_rows)


def test_points_inside_the_multi_box_pass():
    case = ramp_limited_case()
    ded = solve_ded(case)
    box = solve_dne(case, ded=ded, audit=False).box
    rng = np.random.default_rng(5)
    for _ in range(15):
        w = box.lower + (box.upper - box.lower) * rng.random(box.lower.shape)
        assert check_scenario(case, ded.ddp, traj(case, w)).feasible


TWO_BUS = two_bus_qsu_case()
TWO_BUS_DDP = solve_ded(TWO_BUS).ddp


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 16), min_size=2, max_size=2))
def test_more_quick_start_units_never_hurt(mw):
    t = traj(TWO_BUS, np.reshape(mw, (2, 1)))
    without = check_scenario(TWO_BUS, TWO_BUS_DDP, t, "none")
    with_q = check_scenario(TWO_BUS, TWO_BUS_DDP, t, "all")
    assert with_q.total_slack <= without.total_slack + 1e-9
    if without.feasible:
        assert with_q.feasible
