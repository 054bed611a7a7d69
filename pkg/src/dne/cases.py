"""Small constructed cases used by the tests, demos and acceptance suite."""

from __future__ import annotations

import numpy as np

from .system import Bus, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm


def two_bus_qsu_case(n_periods: int = 2, with_qsu: bool = True) -> SystemCase:
    """Wind at bus 1 exporting over one line to a load served by a ramp-limited
    unit and a quick-start unit at bus 2.

    Without recourse from the quick-start unit, low wind cannot be covered
    because the base unit can only ramp 4 MW per period.
    """
    T = n_periods
    units = [ThermalUnit("G1", 2, p_min=10, p_max=30, ramp_rate=4, marginal_cost=20,
                         initial_status="on", initial_output=22)]
    if with_qsu:
        units.append(ThermalUnit("Q1", 2, p_min=2, p_max=8, ramp_rate=8, marginal_cost=50,
                                 is_quick_start=True, min_up=1, min_down=1,
                                 startup_limit=8, initial_status="off", initial_output=0))
    return SystemCase(
        buses=(Bus(1), Bus(2, is_slack=True)),
        lines=(Line("L12", 1, 2, reactance=0.1, capacity=14),),
        units=tuple(units),
        wind_farms=(WindFarm("W1", 1, (0.0,) * T, (16.0,) * T, (8.0,) * T),),
        load={2: (30.0,) * T},
        time_grid=TimeGrid(T, 5),
        name="two_bus_qsu",
    )


def ramp_limited_case(n_periods: int = 3) -> SystemCase:
    """Two wind farms whose swings between periods exceed the system ramp."""
    T = n_periods
    return SystemCase(
        buses=(Bus(1, is_slack=True), Bus(2), Bus(3)),
        lines=(Line("L12", 1, 2, 0.1, 60), Line("L23", 2, 3, 0.1, 60),
               Line("L13", 1, 3, 0.1, 60)),
        units=(
            ThermalUnit("G1", 1, p_min=20, p_max=80, ramp_rate=5, marginal_cost=18,
                        initial_status="on", initial_output=50),
            ThermalUnit("G2", 2, p_min=10, p_max=40, ramp_rate=3, marginal_cost=24,
                        initial_status="on", initial_output=25),
            ThermalUnit("Q1", 3, p_min=4, p_max=12, ramp_rate=12, marginal_cost=60,
                        is_quick_start=True, min_up=2, min_down=1, startup_limit=10,
                        initial_status="off", initial_output=0),
        ),
        wind_farms=(
            WindFarm("W1", 2, (0.0,) * T, (30.0,) * T, (15.0,) * T),
            WindFarm("W2", 3, (0.0,) * T, (25.0,) * T, (10.0,) * T),
        ),
        load={1: (40.0,) * T, 2: (30.0,) * T, 3: (30.0,) * T},
        time_grid=TimeGrid(T, 5),
        name="ramp_limited",
    )


def coupling_free_case(n_periods: int = 2) -> SystemCase:
    """No ramp limits and no quick-start units, so periods decouple."""
    T = n_periods
    return SystemCase(
        buses=(Bus(1, is_slack=True), Bus(2)),
        lines=(Line("L12", 1, 2, 0.1, 25),),
        units=(
            ThermalUnit("G1", 1, p_min=10, p_max=60, ramp_rate=np.inf, marginal_cost=20,
                        initial_status="on", initial_output=30),
            ThermalUnit("G2", 2, p_min=5, p_max=20, ramp_rate=np.inf, marginal_cost=30,
                        initial_status="on", initial_output=10),
        ),
        wind_farms=(WindFarm("W1", 2, (0.0,) * T, (40.0,) * T,
                             tuple(12.0 + 2 * t for t in range(T))),),
        load={1: tuple(25.0 + t for t in range(T)), 2: (20.0,) * T},
        time_grid=TimeGrid(T, 5),
        name="coupling_free",
    )


def single_period_case() -> SystemCase:
    """One period, no quick-start units: the classic single-interval setting."""
    return SystemCase(
        buses=(Bus(1, is_slack=True), Bus(2), Bus(3)),
        lines=(Line("L12", 1, 2, 0.2, 30), Line("L23", 2, 3, 0.1, 40),
               Line("L13", 1, 3, 0.1, 35)),
        units=(
            ThermalUnit("G1", 1, p_min=10, p_max=70, ramp_rate=15, marginal_cost=15,
                        initial_status="on", initial_output=40),
            ThermalUnit("G2", 3, p_min=5, p_max=40, ramp_rate=10, marginal_cost=28,
                        initial_status="on", initial_output=20),
        ),
        wind_farms=(WindFarm("W1", 2, (0.0,), (40.0,), (18.0,)),
                    WindFarm("W2", 3, (0.0,), (30.0,), (10.0,))),
        load={1: (20.0,), 2: (35.0,), 3: (30.0,)},
        time_grid=TimeGrid(1, 5),
        name="single_period",
    )


def random_small_case(seed: int, n_periods: int = 2) -> SystemCase:
    """Seeded 3-bus case with one quick-start unit and one or two farms.

    Loads are set so that the forecast is served by a dispatch inside every
    limit, which keeps the forecast feasible.
    """
    rng = np.random.default_rng(seed)
    T = n_periods
    n_farms = int(rng.integers(1, 3))
    base = ThermalUnit("G1", 1, p_min=10, p_max=float(rng.integers(50, 80)),
                       ramp_rate=float(rng.integers(3, 9)), marginal_cost=20,
                       initial_status="on", initial_output=30)
    mid = ThermalUnit("G2", 2, p_min=5, p_max=float(rng.integers(20, 35)),
                      ramp_rate=float(rng.integers(2, 6)), marginal_cost=float(rng.integers(22, 35)),
                      initial_status="on", initial_output=10)
    qsu = ThermalUnit("Q1", int(rng.integers(1, 4)), p_min=float(rng.integers(2, 5)),
                      p_max=float(rng.integers(10, 16)), ramp_rate=float(rng.integers(6, 12)),
                      marginal_cost=60, is_quick_start=True, min_up=int(rng.integers(1, 3)),
                      min_down=1, startup_limit=None, initial_status="off", initial_output=0)
    farms = []
    wind_total = np.zeros(T)
    for j in range(n_farms):
        cap = float(rng.integers(15, 30))
        fc = tuple(float(v) for v in rng.integers(5, int(cap) - 4, size=T))
        wind_total += fc
        farms.append(WindFarm(f"W{j + 1}", int(rng.integers(2, 4)), (0.0,) * T, (cap,) * T, fc))
    # thermal output held at its initial value keeps every ramp and limit slack
    thermal = base.initial_output + mid.initial_output
    total = thermal + wind_total
    share = rng.dirichlet([2.0, 2.0, 2.0])
    load = {b + 1: tuple(float(round(share[b] * tot, 3)) for tot in total) for b in range(3)}
    drift = total - sum(np.array(v) for v in load.values())
    load[1] = tuple(float(a + d) for a, d in zip(load[1], drift))
    return SystemCase(
        buses=(Bus(1, is_slack=True), Bus(2), Bus(3)),
        lines=(Line("L12", 1, 2, 0.1, float(rng.integers(30, 60))),
               Line("L23", 2, 3, 0.1, float(rng.integers(30, 60))),
               Line("L13", 1, 3, 0.15, float(rng.integers(30, 60)))),
        units=(base, mid, qsu),
        wind_farms=tuple(farms),
        load=load,
        time_grid=TimeGrid(T, 5),
        name=f"random_small_{seed}",
    )


def synthetic_30_bus_case(seed: int = 7, n_periods: int = 4) -> SystemCase:
    """30-bus meshed network, 8 units (2 quick-start), 2 farms.

    The network is a 30-bus ring with five chords. Loads follow a mild
    ramp over the horizon; the base units can absorb part of the wind
    swing and the quick-start units extend the low-wind range.
    """
    rng = np.random.default_rng(seed)
    T = n_periods
    nb = 30
    buses = tuple(Bus(b + 1, is_slack=(b == 0)) for b in range(nb))
    lines = []
    for b in range(nb):
        lines.append(Line(f"L{len(lines) + 1}", b + 1, (b + 1) % nb + 1,
                          float(np.round(rng.uniform(0.05, 0.2), 3)), 120.0))
    for a, c in ((1, 16), (5, 22), (9, 27), (3, 12), (18, 26)):
        lines.append(Line(f"L{len(lines) + 1}", a, c, float(np.round(rng.uniform(0.08, 0.25), 3)),
                          90.0))
    unit_buses = [1, 4, 8, 12, 16, 21, 25, 28]
    units = []
    for k, bus in enumerate(unit_buses[:6]):
        p_max = float(rng.integers(60, 110))
        init = float(round(0.55 * p_max))
        units.append(ThermalUnit(f"G{k + 1}", bus, p_min=float(round(0.25 * p_max)), p_max=p_max,
                                 ramp_rate=float(rng.integers(4, 8)),
                                 marginal_cost=float(rng.integers(15, 40)),
                                 initial_status="on", initial_output=init))
    for k, bus in enumerate(unit_buses[6:]):
        units.append(ThermalUnit(f"Q{k + 1}", bus, p_min=5, p_max=25, ramp_rate=25,
                                 marginal_cost=70, is_quick_start=True, min_up=2, min_down=1,
                                 startup_limit=20, initial_status="off", initial_output=0))
    farms = (WindFarm("W1", 10, (0.0,) * T, (80.0,) * T,
                      tuple(float(v) for v in (40, 42, 44, 43)[:T])),
             WindFarm("W2", 20, (0.0,) * T, (60.0,) * T,
                      tuple(float(v) for v in (30, 29, 31, 33)[:T])))
    thermal = sum(g.initial_output for g in units)
    wind = np.array([sum(f.forecast[t] for f in farms) for t in range(T)])
    total = thermal + wind
    load_buses = [2, 3, 5, 7, 9, 11, 14, 15, 17, 19, 23, 24, 26, 29, 30]
    share = rng.dirichlet(np.full(len(load_buses), 3.0))
    load = {b: tuple(float(round(s * tot, 4)) for tot in total) for b, s in zip(load_buses, share)}
    drift = total - sum(np.array(v) for v in load.values())
    load[load_buses[0]] = tuple(float(a + d) for a, d in zip(load[load_buses[0]], drift))
    return SystemCase(buses, tuple(lines), tuple(units), farms, load, TimeGrid(T, 5),
                      name="synthetic_30_bus")
