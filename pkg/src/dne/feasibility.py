"""Auditing concrete wind trajectories against corrective-dispatch feasibility."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .formulation import DneBox, build_stacked_system
from .nccg import SolverConfig, min_total_slack
from .system import SystemCase


@dataclass(frozen=True, eq=False)
class WindTrajectory:
    """Wind output in MW, shape ``(n_periods, n_farms)``."""

    mw: np.ndarray
    farm_ids: tuple[str, ...]

    def __post_init__(self):
        mw = np.atleast_2d(np.asarray(self.mw, dtype=float))
        if mw.shape[1] != len(self.farm_ids):
            raise ValueError(f"trajectory has {mw.shape[1]} farm columns for "
                             f"{len(self.farm_ids)} farms")
        if not np.all(np.isfinite(mw)):
            raise ValueError("trajectory values must be finite")
        mw.setflags(write=False)
        object.__setattr__(self, "mw", mw)
        object.__setattr__(self, "farm_ids", tuple(self.farm_ids))

    @property
    def totals(self) -> np.ndarray:
        return self.mw.sum(axis=1)


@dataclass
class ScenarioCheck:
    feasible: bool
    total_slack: float
    violated_rows: list[str]
    x: np.ndarray
    z: np.ndarray

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "total_slack": self.total_slack,
                "violated_rows": list(self.violated_rows)}


def _validate(case: SystemCase, traj: WindTrajectory) -> None:
    T, F = case.n_periods, len(case.wind_farms)
    if traj.mw.shape != (T, F):
        raise ValueError(f"trajectory shape {traj.mw.shape} does not match "
                         f"{T} periods x {F} farms")
    if list(traj.farm_ids) != [f.id for f in case.wind_farms]:
        raise ValueError("trajectory farms do not match the case")
    lo, _ = case.wind_bounds()
    if np.any((lo >= 0) & (traj.mw < 0)):
        raise ValueError("trajectory has negative output for a farm with w_min >= 0")


def check_scenario(case: SystemCase, ddp, trajectory: WindTrajectory,
                   recourse_qsus="all", config: SolverConfig = SolverConfig()) -> ScenarioCheck:
    """Whether corrective dispatch exists for one fixed wind trajectory.

    On infeasibility the report lists the rows that carry slack or a
    positive conflict multiplier; every row set whose removal restores
    feasibility intersects that list.
    """
    _validate(case, trajectory)
    T, F = trajectory.mw.shape
    sigma = np.full((T, F), 1.0 / max(T * F, 1))
    sys = build_stacked_system(case, ddp, sigma, recourse_qsus)
    res = min_total_slack(sys, trajectory.mw.ravel(), config, with_duals=True)
    feasible = res.value <= config.eps_feas
    rows = [] if feasible else [str(r) for r in res.violated_rows(sys, config.eps_feas)]
    return ScenarioCheck(feasible, res.value, rows, res.x, res.z)


def _vertices(n: int) -> np.ndarray:
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)[::-1]) & 1).astype(float)


def find_violating_trajectory(case: SystemCase, single_boxes: Sequence[DneBox],
                              multi_box: DneBox, ddp, recourse_qsus="all",
                              config: SolverConfig = SolverConfig(),
                              vertex_limit: int = 12, samples: int = 256,
                              seed: int | None = None) -> WindTrajectory | None:
    """A trajectory inside every single-period box but outside the multi-period box.

    Candidates are the vertices of the product of single-period boxes
    (all of them when there are at most ``vertex_limit`` coordinates,
    otherwise ``samples`` seeded random vertices), in index order. The first
    candidate that :func:`check_scenario` finds infeasible is returned; if
    none is infeasible, the first candidate outside the multi-period box
    is. Returns ``None`` when no candidate leaves the multi-period box.
    """
    T, F = case.n_periods, len(case.wind_farms)
    if len(single_boxes) != T:
        raise ValueError(f"expected {T} single-period boxes, got {len(single_boxes)}")
    lo = np.vstack([b.lower.reshape(1, F) for b in single_boxes])
    hi = np.vstack([b.upper.reshape(1, F) for b in single_boxes])
    n = T * F
    if n <= vertex_limit:
        picks = _vertices(n)
    else:
        rng = np.random.default_rng(config.seed if seed is None else seed)
        picks = rng.integers(0, 2, size=(samples, n)).astype(float)
    tol = config.eps_feas
    farm_ids = tuple(f.id for f in case.wind_farms)
    first_outside = None
    for v in picks:
        w = lo + (hi - lo) * v.reshape(T, F)
        if multi_box.contains(w, tol):
            continue
        traj = WindTrajectory(w, farm_ids)
        if first_outside is None:
            first_outside = traj
        if not check_scenario(case, ddp, traj, recourse_qsus, config).feasible:
            return traj
    return first_outside


def trajectory_to_csv(traj: WindTrajectory, periods: Sequence[int] | None = None) -> str:
    """CSV with header ``period,farm,mw``; periods are 1-based."""
    periods = list(range(1, traj.mw.shape[0] + 1)) if periods is None else list(periods)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["period", "farm", "mw"])
    for t, p in enumerate(periods):
        for j, fid in enumerate(traj.farm_ids):
            writer.writerow([p, fid, repr(float(traj.mw[t, j]))])
    return buf.getvalue()


def trajectory_from_csv(text: str, case: SystemCase) -> WindTrajectory:
    """Parse a ``period,farm,mw`` CSV against ``case``.

    Every (period, farm) pair must appear exactly once.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["period", "farm", "mw"]:
        raise ValueError("trajectory CSV must start with header 'period,farm,mw'")
    T = case.n_periods
    index = {f.id: j for j, f in enumerate(case.wind_farms)}
    mw = np.full((T, len(index)), np.nan)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
        try:
            t = int(row[0])
            val = float(row[2])
        except ValueError:
            raise ValueError(f"line {lineno}: bad period or mw value") from None
        fid = row[1].strip()
        if fid not in index:
            raise ValueError(f"line {lineno}: unknown farm {fid!r}")
        if not 1 <= t <= T:
            raise ValueError(f"line {lineno}: period {t} outside 1..{T}")
        if not np.isnan(mw[t - 1, index[fid]]):
            raise ValueError(f"line {lineno}: duplicate entry for period {t}, farm {fid}")
        mw[t - 1, index[fid]] = val
    if np.isnan(mw).any():
        t, j = np.argwhere(np.isnan(mw))[0]
        raise ValueError(f"missing value for period {t + 1}, farm {case.wind_farms[j].id}")
    return WindTrajectory(mw, tuple(index))
