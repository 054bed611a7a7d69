import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dne.cases import ramp_limited_case, two_bus_qsu_case
from dne.formulation import (DneBox, FormulationError, Label, apply_uncertainty,
                             build_coupling_blocks, build_period_blocks, build_stacked_system,
                             drop_redundant_line_rows, resolve_recourse_qsus,
                             restrict_to_period, row_periods)
from dne.system import Bus, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm


def one_bus(T=1, ramp=5.0, units=None, load=40.0):
    units = units or (ThermalUnit("G1", 1, 10, 50, ramp, 20, initial_output=10),)
    return SystemCase((Bus(1, is_slack=True),), (), tuple(units),
                      (WindFarm("W1", 1, (0.0,) * T, (30.0,) * T, (10.0,) * T),),
                      {1: (load,) * T}, TimeGrid(T))


def ddp_of(case):
    return np.tile([g.initial_output for g in case.units], (case.n_periods, 1))


def row(blocks, kind, element=""):
    return next(i for i, lab in enumerate(blocks.labels)
                if lab.kind == kind and lab.element == element)


def test_balance_rows_hold_with_equality():
    case = one_bus()
    pb = build_period_blocks(case, ddp_of(case), 0)
    res = pb.residual(np.array([30.0]), np.zeros(0), np.array([10.0]))
    assert res[row(pb, "balance_max")] == 0.0
    assert res[row(pb, "balance_min")] == 0.0


def test_qsu_off_forces_zero_output():
    qsu = ThermalUnit("Q1", 1, 2, 8, 8, 50, is_quick_start=True, initial_status="off")
    case = one_bus(units=(ThermalUnit("G1", 1, 10, 50, 5, 20, initial_output=30), qsu))
    pb = build_period_blocks(case, ddp_of(case), 0)
    assert [str(lab) for lab in pb.z_labels] == ["u[Q1,t=1]", "y[Q1,t=1]", "d[Q1,t=1]"]
    res = pb.residual(np.array([30.0, 5.0]), np.zeros(3), np.array([5.0]))
    assert res[row(pb, "pmax", "Q1")] == pytest.approx(5.0)
    assert res[row(pb, "pmax", "Q1")] > 0


def test_line_row_on_two_buses():
    case = SystemCase((Bus(1), Bus(2, is_slack=True)), (Line("L", 1, 2, 0.1, 80),),
                      (ThermalUnit("G1", 1, 0, 150, 200, 20, initial_output=100),),
                      (WindFarm("W1", 1, (0.0,), (10.0,), (0.0,)),), {2: (100.0,)}, TimeGrid(1))
    pb = build_period_blocks(case, ddp_of(case), 0)
    i = row(pb, "line_fwd", "L")
    excess = pb.A[i] @ [100.0] + pb.C[i] @ [0.0] - pb.d[i]
    assert excess == pytest.approx(20.0)


def test_ramp_rows_arithmetic():
    case = one_bus(T=2)
    cb = build_coupling_blocks(case)
    ok = cb.residual([np.array([10.0]), np.array([14.0])], [np.zeros(0)] * 2)
    assert np.all(ok <= 0)
    bad = cb.residual([np.array([10.0]), np.array([16.0])], [np.zeros(0)] * 2)
    up = [i for i, lab in enumerate(cb.labels) if lab == Label("ramp_up", "G1", 1)][0]
    assert bad[up] == pytest.approx(1.0)
    assert np.sum(bad > 0) == 1


def test_single_period_ramp_links_to_initial_output():
    case = one_bus(T=1)
    cb = build_coupling_blocks(case)
    assert [lab.kind for lab in cb.labels] == ["ramp_up", "ramp_down"]
    # initial output 10, ramp 5: x = 16 is one too many
    assert cb.residual([np.array([16.0])], [np.zeros(0)])[0] == pytest.approx(1.0)
    assert cb.residual([np.array([15.0])], [np.zeros(0)])[0] == pytest.approx(0.0)


def commitment_case(T, min_up=2, min_down=1):
    qsu = ThermalUnit("Q1", 1, 2, 8, np.inf, 50, is_quick_start=True, min_up=min_up,
                      min_down=min_down, initial_status="off")
    return one_bus(T=T, units=(ThermalUnit("G1", 1, 10, 50, np.inf, 20, initial_output=30), qsu))


def min_up_ok(u, min_up, u0=0):
    """Every start keeps the unit on for min_up periods (truncated at the horizon)."""
    prev = u0
    for t, ut in enumerate(u):
        if ut and not prev and not all(u[t:t + min_up]):
            return False
        prev = ut
    return True


@pytest.mark.parametrize("min_up", [1, 2, 3])
def test_min_up_rows_match_enumeration(min_up):
    T = 3
    case = commitment_case(T, min_up=min_up)
    cb = build_coupling_blocks(case)
    kinds = [lab.kind for lab in cb.labels]
    for u in itertools.product([0, 1], repeat=T):
        prev, zs = 0, []
        for ut in u:
            zs.append(np.array([ut, max(ut - prev, 0), max(prev - ut, 0)], dtype=float))
            prev = ut
        res = cb.residual([np.array([30.0, 0.0])] * T, zs)
        logic = [r for r, k in zip(res, kinds) if k.startswith("logic")]
        assert np.allclose(logic, 0)
        rows_ok = all(r <= 1e-12 for r, k in zip(res, kinds) if k == "min_up")
        assert rows_ok == min_up_ok(u, min_up), u
    # the documented pattern: start at t=1, off at t=2
    zs = [np.array([1.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]), np.zeros(3)]
    res = cb.residual([np.array([30.0, 0.0])] * T, zs)
    if min_up >= 2:
        assert any(r > 0 for r, k in zip(res, kinds) if k == "min_up")


def test_stacked_dimensions_and_residual_identity():
    case = ramp_limited_case()
    ddp = ddp_of(case)
    T, F = case.n_periods, len(case.wind_farms)
    sys = build_stacked_system(case, ddp, np.full((T, F), 1 / (T * F)))
    blocks = [build_period_blocks(case, ddp, t) for t in range(T)]
    cb = build_coupling_blocks(case)
    assert sys.H.shape[1] == sum(b.A.shape[1] for b in blocks)
    assert sys.J.shape[1] == sum(b.B.shape[1] for b in blocks)
    assert sys.K.shape[1] == F * T
    assert sys.n_rows == sum(b.A.shape[0] for b in blocks) + cb.g.size
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 50, sys.H.shape[1])
    z = rng.integers(0, 2, sys.J.shape[1]).astype(float)
    w = rng.uniform(0, 25, sys.n)
    nx, nz = blocks[0].A.shape[1], blocks[0].B.shape[1]
    xs = [x[t * nx:(t + 1) * nx] for t in range(T)]
    zs = [z[t * nz:(t + 1) * nz] for t in range(T)]
    parts = [b.residual(xs[t], zs[t], w[t * F:(t + 1) * F]) for t, b in enumerate(blocks)]
    expected = np.concatenate(parts + [cb.residual(xs, zs)])
    np.testing.assert_allclose(sys.residual(x, z, w), expected, rtol=0, atol=1e-12)


def test_wind_columns_stay_in_their_period():
    case = ramp_limited_case()
    sys = build_stacked_system(case, ddp_of(case), np.full((3, 2), 1 / 6))
    for j, lab in enumerate(sys.w_labels):
        rows = np.flatnonzero(sys.K[:, j])
        assert all(sys.row_labels[i].period == lab.period for i in rows)
        assert np.all(rows < sys.n_decoupled_rows)


def test_restriction_keeps_initial_links_only():
    case = ramp_limited_case()
    sys = build_stacked_system(case, ddp_of(case), np.full((3, 2), 1 / 6))
    first, second = restrict_to_period(sys, 0), restrict_to_period(sys, 1)
    assert Label("ramp_up", "G1", 0) in first.row_labels
    assert Label("ramp_up", "G1", 1) not in second.row_labels
    assert all(s <= {1} for s in row_periods(second))
    assert second.periods == (1,)


def test_resolve_recourse_qsus():
    case = ramp_limited_case()
    assert resolve_recourse_qsus(case, "all") == ("Q1",)
    assert resolve_recourse_qsus(case, "none") == ()
    assert resolve_recourse_qsus(case, "Q1") == ("Q1",)
    with pytest.raises(FormulationError):
        resolve_recourse_qsus(case, "G1")
    with pytest.raises(FormulationError):
        resolve_recourse_qsus(case, "Q9")


def box_for(sys, lower, upper):
    return DneBox.from_flat(sys, lower, upper)


def two_bus_system():
    case = two_bus_qsu_case()
    return build_stacked_system(case, ddp_of(case), np.full((2, 1), 0.5))


def test_apply_uncertainty_vertices_and_degenerate_box():
    sys = two_bus_system()
    box = box_for(sys, [2.0, 0.0], [12.0, 14.0])
    np.testing.assert_array_equal(apply_uncertainty(sys, box, [0, 0]), sys.h - sys.K @ box.l)
    np.testing.assert_array_equal(apply_uncertainty(sys, box, [1, 1]), sys.h - sys.K @ box.u)
    flat = DneBox.degenerate(sys)
    a = apply_uncertainty(sys, flat, [0, 1])
    b = apply_uncertainty(sys, flat, [0.3, 0.9])
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        apply_uncertainty(sys, box, [1.5, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=2),
       st.lists(st.floats(0, 1), min_size=2, max_size=2),
       st.floats(0, 1))
def test_apply_uncertainty_is_affine(v1, v2, alpha):
    sys = two_bus_system()
    box = box_for(sys, [2.0, 0.0], [12.0, 14.0])
    v1, v2 = np.array(v1), np.array(v2)
    mix = alpha * v1 + (1 - alpha) * v2
    lhs = apply_uncertainty(sys, box, np.clip(mix, 0, 1))
    rhs = alpha * apply_uncertainty(sys, box, v1) + (1 - alpha) * apply_uncertainty(sys, box, v2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12, rtol=0)


def test_box_ordering_enforced():
    sys = two_bus_system()
    with pytest.raises(ValueError, match="w_min <= lower"):
        DneBox(np.array([[9.0], [0.0]]), np.array([[12.0], [14.0]]),
               np.array([[8.0], [8.0]]), np.zeros((2, 1)), np.full((2, 1), 16.0))
    assert box_for(sys, [2.0, 0.0], [12.0, 14.0]).contains([[5.0], [14.0]])


def export_system(cap):
    case = SystemCase((Bus(1), Bus(2, is_slack=True)), (Line("L", 1, 2, 0.1, cap),),
                      (ThermalUnit("G", 2, 0, 100, np.inf, 20, initial_output=40),),
                      (WindFarm("W", 1, (0.0,), (30.0,), (10.0,)),), {2: (50.0,)},
                      TimeGrid(1))
    return build_stacked_system(case, ddp_of(case), np.ones((1, 1)))


def test_binding_line_rows_are_kept():
    sys = export_system(20.0)       # 30 MW of wind can overload a 20 MW line
    kept = drop_redundant_line_rows(sys)
    assert Label("line_fwd", "L", 0) in kept.row_labels
    # the reverse direction cannot bind: flow is never below zero
    assert Label("line_rev", "L", 0) not in kept.row_labels


def test_slack_line_rows_are_dropped():
    sys = export_system(1000.0)
    kept = drop_redundant_line_rows(sys)
    assert not any(lab.kind.startswith("line") for lab in kept.row_labels)
    assert kept.n_rows == sys.n_rows - 2
    assert kept.n_decoupled_rows == sys.n_decoupled_rows - 2
