"""Dynamic economic dispatch at forecast wind and LMP-based range weights."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .lp import DEFAULT_LP_CONFIG, LinearProgram, LpConfig, solve_lp
from .system import SystemCase, compute_ptdf


class DedInfeasibleError(RuntimeError):
    """Load cannot be served at forecast wind."""

    def __init__(self, message: str, period: int | None = None, shortfall: float = math.nan):
        super().__init__(message)
        self.period = period
        self.shortfall = shortfall


@dataclass
class DedResult:
    ddp: np.ndarray          # (n_periods, n_units) MW
    lmp: np.ndarray          # (n_periods, n_buses) $/MWh
    total_cost: float        # sum over periods of marginal_cost * ddp, $/h
    unit_ids: tuple[str, ...]
    bus_ids: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "unit_ids": list(self.unit_ids),
            "bus_ids": list(self.bus_ids),
            "ddp": self.ddp.tolist(),
            "lmp": self.lmp.tolist(),
            "total_cost": self.total_cost,
        }


def _diagnose(case: SystemCase, net_load: np.ndarray) -> DedInfeasibleError:
    status = np.array([1.0 if g.initially_on else 0.0 for g in case.units])
    pmax = np.array([g.p_max for g in case.units]) * status
    pmin = np.array([g.p_min for g in case.units]) * status
    for t, need in enumerate(net_load):
        if need > pmax.sum() + 1e-9:
            short = need - pmax.sum()
            return DedInfeasibleError(
                f"period {t + 1}: net load {need:g} MW exceeds committed capacity "
                f"{pmax.sum():g} MW (shortfall {short:g} MW)", t + 1, short)
        if need < pmin.sum() - 1e-9:
            short = pmin.sum() - need
            return DedInfeasibleError(
                f"period {t + 1}: net load {need:g} MW below committed minimum output "
                f"{pmin.sum():g} MW (excess {short:g} MW)", t + 1, short)
    return DedInfeasibleError("dispatch infeasible at forecast wind: transmission or "
                              "ramping limits cannot be met")


def solve_ded(case: SystemCase, lp_config: LpConfig = DEFAULT_LP_CONFIG) -> DedResult:
    """Cost-minimal dispatch at forecast wind with unit, ramp and line limits.

    Commitments stay at the initial status in every period. LMPs are the
    sensitivities of total cost to nodal load: the energy price from the
    balance row plus the PTDF-weighted line congestion prices.

    Raises
    ------
    DedInfeasibleError
        With the first period whose net load cannot be met, when one exists.
    """
    T, G = case.n_periods, len(case.units)
    ptdf = compute_ptdf(case)
    bidx = case.bus_index()
    load = case.load_matrix()
    wind = case.forecast_matrix()
    gen_cols = [bidx[g.bus] for g in case.units]
    farm_cols = [bidx[f.bus] for f in case.wind_farms]
    net_load = load.sum(axis=1) - wind.sum(axis=1)

    status = np.array([1.0 if g.initially_on else 0.0 for g in case.units])
    lb = np.tile(np.array([g.p_min for g in case.units]) * status, T)
    ub = np.tile(np.array([g.p_max for g in case.units]) * status, T)
    cost = np.tile([g.marginal_cost for g in case.units], T)

    def var(t, k):
        return t * G + k

    rows, rel, rhs = [], [], []
    balance_rows, line_rows = [], []
    for t in range(T):
        r = np.zeros(T * G); r[t * G:(t + 1) * G] = 1.0
        balance_rows.append(len(rows))
        rows.append(r); rel.append("=="); rhs.append(net_load[t])
        inj_w = np.zeros(len(case.buses))
        np.add.at(inj_w, farm_cols, wind[t])
        for k_line, ln in enumerate(case.lines):
            p = ptdf[k_line]
            through = float(p @ (load[t] - inj_w))
            r = np.zeros(T * G); r[t * G:(t + 1) * G] = p[gen_cols]
            line_rows.append((t, k_line, len(rows), len(rows) + 1))
            rows.append(r); rel.append("<="); rhs.append(ln.capacity + through)
            rows.append(-r); rel.append("<="); rhs.append(ln.capacity - through)
        for k, g in enumerate(case.units):
            if not np.isfinite(g.ramp_rate):
                continue
            up = np.zeros(T * G); up[var(t, k)] = 1.0
            if t == 0:
                prev = g.initial_output
                rows.append(up); rel.append("<="); rhs.append(g.ramp_rate + prev)
                rows.append(-up); rel.append("<="); rhs.append(g.ramp_rate - prev)
            else:
                up[var(t - 1, k)] = -1.0
                rows.append(up); rel.append("<="); rhs.append(g.ramp_rate)
                rows.append(-up); rel.append("<="); rhs.append(g.ramp_rate)

    lp = LinearProgram(cost, np.array(rows).reshape(len(rows), T * G), rel, rhs, lb, ub)
    sol = solve_lp(lp, lp_config)
    if sol.status != "optimal":
        raise _diagnose(case, net_load)

    ddp = sol.x.reshape(T, G)
    lmp = np.zeros((T, len(case.buses)))
    for t in range(T):
        lmp[t, :] = sol.duals[balance_rows[t]]
    for t, k_line, fwd, rev in line_rows:
        lmp[t] += ptdf[k_line] * (sol.duals[fwd] - sol.duals[rev])
    lmp[np.abs(lmp) < 1e-12] = 0.0
    total = float(cost @ sol.x)
    return DedResult(ddp, lmp, total, tuple(g.id for g in case.units), tuple(case.bus_ids))


def sigma_from_lmps(ded: DedResult, case: SystemCase) -> np.ndarray:
    """Range weights proportional to the LMP at each farm's bus.

    Returns an array ``(n_periods, n_farms)`` of non-negative weights that
    sum to one. Negative prices are clamped to zero with a warning; if no
    positive price remains the weights are uniform.
    """
    bidx = case.bus_index()
    cols = [bidx[f.bus] for f in case.wind_farms]
    raw = ded.lmp[:, cols].astype(float)
    if np.any(raw < 0):
        warnings.warn("negative LMPs at wind buses clamped to zero", RuntimeWarning,
                      stacklevel=2)
        raw = np.maximum(raw, 0.0)
    total = raw.sum()
    if raw.size == 0:
        return raw
    if total <= 0:
        return np.full(raw.shape, 1.0 / raw.size)
    return raw / total
