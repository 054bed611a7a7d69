"""Nested column-and-constraint generation for do-not-exceed limits.

The outer loop alternates a master problem over the box ``[l, u]`` (with
one copy of the recourse variables per stored worst-case vertex) and a
subproblem that measures the worst total constraint violation ``Q(l, u)``
over the box. The subproblem is a max-min-max problem over vertices ``v``,
integer recourse ``z`` and the dual ``lam`` of the slack LP; it is solved
by an inner column-and-constraint loop that grows a set of integer
recourse candidates and calls :func:`evaluate_recourse` as the oracle.

In the inner master, the product of each binary ``v_j`` with the dual
expression ``mu_j = sum_i K_ij lam_i`` is replaced by an auxiliary
variable bounded by its McCormick envelope, which is exact because
``v_j`` is binary.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .ded import DedResult, sigma_from_lmps, solve_ded
from .formulation import (DneBox, Label, StackedSystem, build_stacked_system,
                          drop_redundant_line_rows, resolve_recourse_qsus, restrict_to_period)
from .lp import DEFAULT_LP_CONFIG, LinearProgram, LpConfig, solve_lp
from .milp import MipConfig, MixedIntegerProgram, solve_milp
from .system import SystemCase

log = logging.getLogger(__name__)


class DneError(RuntimeError):
    pass


class ForecastInfeasibleError(DneError):
    """No corrective dispatch exists even at the forecast wind output."""

    def __init__(self, message: str, slack: float = math.nan, rows: Sequence[str] = ()):
        super().__init__(message)
        self.slack = slack
        self.rows = list(rows)


class MasterInfeasibleError(ForecastInfeasibleError):
    """The master problem has no feasible box."""


class IterationLimitError(DneError):
    def __init__(self, message: str, gap: float = math.nan):
        super().__init__(message)
        self.gap = gap


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, caps and options of the decomposition.

    ``recourse_qsus`` selects the quick-start units whose commitment is a
    recourse decision (``"all"``, ``"none"`` or ids). ``sigma`` overrides
    the LMP-based weights with an ``(n_periods, n_farms)`` array.
    ``drop_redundant_rows`` removes line limits that cannot bind anywhere
    in ``[w_min, w_max]`` before the decomposition starts.
    """

    eps_feas: float = 1e-6
    eps_inner: float = 1e-6
    max_outer: int | None = None
    max_inner: int = 500
    sigma: tuple | None = None
    verify_samples: int = 200
    audit_vertex_limit: int = 8
    seed: int = 0
    recourse_qsus: object = "all"
    master_gap: float = 1e-9
    mip_gap: float = 1e-7
    node_limit: int = 200_000
    workers: int = 1
    drop_redundant_rows: bool = True
    lp: LpConfig = DEFAULT_LP_CONFIG

    def __post_init__(self):
        for name in ("eps_feas", "eps_inner", "master_gap", "mip_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    def mip(self, gap: float | None = None) -> MipConfig:
        return MipConfig(gap_tol=self.mip_gap if gap is None else gap,
                         node_limit=self.node_limit, lp=self.lp)


# ---------------------------------------------------------------------------
# recourse oracle


@dataclass
class RecourseResult:
    value: float
    x: np.ndarray
    z: np.ndarray
    s: np.ndarray
    w: np.ndarray
    duals: np.ndarray | None = None

    def violated_rows(self, sys: StackedSystem, tol: float = 1e-6) -> list[Label]:
        """Rows carrying slack or a positive conflict multiplier."""
        hit = self.s > tol
        if self.duals is not None:
            hit |= self.duals > tol
        return [sys.row_labels[i] for i in np.flatnonzero(hit)]


def min_total_slack(sys: StackedSystem, w, config: SolverConfig = SolverConfig(),
                    with_duals: bool = False) -> RecourseResult:
    """Minimum of ``sum(s)`` over ``H x + J z - s <= h - K w``, ``s >= 0``.

    With ``with_duals`` the LP with ``z`` fixed at its optimum is re-solved
    and the conflict multipliers ``lam = -d(obj)/d(rhs)`` in ``[0, 1]`` are
    attached.
    """
    w = np.asarray(w, dtype=float).ravel()
    m, nx = sys.H.shape
    nz = sys.J.shape[1]
    A = np.hstack([sys.H, sys.J, -np.eye(m)])
    rhs = sys.h - sys.K @ w
    c = np.concatenate([np.zeros(nx + nz), np.ones(m)])
    lb = np.concatenate([np.full(nx, -np.inf), np.zeros(nz), np.zeros(m)])
    ub = np.concatenate([np.full(nx, np.inf), np.ones(nz), np.full(m, np.inf)])
    lp = LinearProgram(c, A, ["<="] * m, rhs, lb, ub)
    ints = np.arange(nx, nx + nz)
    if nz:
        sol = solve_milp(MixedIntegerProgram(lp, ints), config.mip())
        if not sol.optimal:
            raise DneError(f"recourse problem returned status {sol.status}")
        vec = sol.x
    else:
        sol = solve_lp(lp, config.lp)
        if not sol.optimal:
            raise DneError(f"recourse problem returned status {sol.status}")
        vec = sol.x
    x, z, s = vec[:nx], np.round(vec[nx:nx + nz]), np.maximum(vec[nx + nz:], 0.0)
    duals = None
    if with_duals:
        lo, hi = lb.copy(), ub.copy()
        lo[ints] = hi[ints] = z
        fixed = solve_lp(replace(lp, lb=lo, ub=hi), config.lp)
        duals = np.clip(-fixed.duals, 0.0, 1.0)
        x, s = fixed.x[:nx], np.maximum(fixed.x[nx + nz:], 0.0)
    value = float(s.sum())
    return RecourseResult(value, x, z.astype(int) if nz else z, s, w, duals)


def evaluate_recourse(sys: StackedSystem, box: DneBox, v,
                      config: SolverConfig = SolverConfig()) -> RecourseResult:
    """Minimal total slack of corrective dispatch at ``w = l + (u - l) * v``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != sys.n or np.any(v < 0) or np.any(v > 1):
        raise ValueError("v must be a point of [0, 1]^n")
    return min_total_slack(sys, box.point(v), config)


# ---------------------------------------------------------------------------
# subproblem


@dataclass
class SubproblemResult:
    v: np.ndarray
    value: float
    recourse: RecourseResult
    candidates: list[np.ndarray]
    lambdas: list[np.ndarray]
    aux: list[np.ndarray]
    master_v: np.ndarray
    eta: float
    iterations: int

    @property
    def gap(self) -> float:
        return self.eta - self.value


def _dual_bounds(sys: StackedSystem, config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Range of ``mu_j = K[:, j] . lam`` over ``0 <= lam <= 1``, ``lam^T H = 0``.

    Tight ranges make the McCormick envelopes in the inner master tight.
    They depend on the system only and are cached on it.
    """
    key = ("dual_bounds", config.lp)
    if key in sys.cache:
        return sys.cache[key]
    m, nx = sys.H.shape
    lo = np.minimum(sys.K, 0.0).sum(axis=0)
    hi = np.maximum(sys.K, 0.0).sum(axis=0)
    for j in range(sys.n):
        for sense in (False, True):
            lp = LinearProgram(sys.K[:, j], sys.H.T, ["=="] * nx, np.zeros(nx),
                               np.zeros(m), np.ones(m), maximize=sense)
            sol = solve_lp(lp, config.lp)
            if sol.optimal:
                if sense:
                    hi[j] = min(hi[j], sol.objective + 1e-9)
                else:
                    lo[j] = max(lo[j], sol.objective - 1e-9)
    sys.cache[key] = (lo, hi)
    return lo, hi


def _subproblem_master(sys: StackedSystem, box: DneBox, candidates, config: SolverConfig,
                       cutoff: float):
    """Max over binary ``v`` of the smallest dual value among candidates.

    Returns ``None`` when no ``v`` beats ``cutoff``, which bounds the
    maximum by ``cutoff``.
    """
    m, nx = sys.H.shape
    n = sys.n
    width = box.u - box.l
    base = sys.K @ box.l - sys.h
    lo, hi = _dual_bounds(sys, config)
    nc = len(candidates)
    per = m + n
    nvar = n + 1 + nc * per
    eta = n

    rows, rel, rhs = [], [], []
    for k, z in enumerate(candidates):
        off = n + 1 + k * per
        lam = slice(off, off + m)
        q0 = off + m
        const = base + sys.J @ z
        for col in range(nx):
            r = np.zeros(nvar); r[lam] = sys.H[:, col]
            rows.append(r); rel.append("=="); rhs.append(0.0)
        for j in range(n):
            kj = sys.K[:, j]
            r = np.zeros(nvar); r[q0 + j] = 1.0; r[j] = -hi[j]
            rows.append(r); rel.append("<="); rhs.append(0.0)
            r = np.zeros(nvar); r[q0 + j] = -1.0; r[j] = lo[j]
            rows.append(r); rel.append("<="); rhs.append(0.0)
            r = np.zeros(nvar); r[q0 + j] = 1.0; r[lam] = -kj; r[j] = -lo[j]
            rows.append(r); rel.append("<="); rhs.append(-lo[j])
            r = np.zeros(nvar); r[q0 + j] = -1.0; r[lam] = kj; r[j] = hi[j]
            rows.append(r); rel.append("<="); rhs.append(hi[j])
        r = np.zeros(nvar); r[eta] = 1.0; r[lam] = -const; r[q0:q0 + n] = -width
        rows.append(r); rel.append("<="); rhs.append(0.0)

    c = np.zeros(nvar); c[eta] = 1.0
    lb = np.zeros(nvar); ub = np.ones(nvar)
    lb[eta], ub[eta] = -np.inf, np.inf
    for k in range(nc):
        q0 = n + 1 + k * per + m
        lb[q0:q0 + n] = np.minimum(lo, 0.0)
        ub[q0:q0 + n] = np.maximum(hi, 0.0)
    lp = LinearProgram(c, np.array(rows).reshape(len(rows), nvar), rel, rhs, lb, ub,
                       maximize=True)
    sol = solve_milp(MixedIntegerProgram(lp, range(n)), config.mip(), cutoff)
    if sol.status == "cutoff":
        return None
    if not sol.optimal:
        raise DneError(f"subproblem master returned status {sol.status}")
    x = sol.x
    v = np.round(x[:n]).astype(int)
    lams = [x[n + 1 + k * per: n + 1 + k * per + m] for k in range(nc)]
    aux = [x[n + 1 + k * per + m: n + 1 + (k + 1) * per] for k in range(nc)]
    return v, float(sol.objective), lams, aux


def solve_subproblem(sys: StackedSystem, box: DneBox,
                     config: SolverConfig = SolverConfig(),
                     seeds: Sequence = ()) -> SubproblemResult:
    """Worst-case vertex of the box and its violation ``Q(l, u)``.

    ``seeds`` are vertices evaluated up front to start with a good
    incumbent. They change only the work needed to certify the result.

    Raises
    ------
    IterationLimitError
        When ``config.max_inner`` inner iterations do not close the gap.
    """
    n = sys.n
    best_r, best_v = None, None
    pool, seen = [], set()

    def offer(z):
        key = tuple(np.round(z).astype(int))
        if key not in seen:
            seen.add(key)
            pool.append(np.array(key, dtype=float))

    for v in [np.zeros(n, dtype=int), *(np.asarray(v, dtype=int) for v in seeds)]:
        r = evaluate_recourse(sys, box, v, config)
        offer(r.z)
        if best_r is None or r.value > best_r.value:
            best_r, best_v = r, v
    lams, aux, master_v = [], [], best_v
    eta = math.inf
    for it in range(1, config.max_inner + 1):
        found = _subproblem_master(sys, box, pool, config, best_r.value + config.eps_inner)
        if found is None:
            eta = best_r.value + config.eps_inner
            break
        v, eta, lams, aux = found
        master_v = v
        r = evaluate_recourse(sys, box, v, config)
        if r.value > best_r.value:
            best_r, best_v = r, v
        if eta <= best_r.value + config.eps_inner:
            break
        if tuple(r.z) in seen:
            # the candidate already bounds the master at v; only round-off remains
            log.warning("inner loop repeated candidate with gap %.3g", eta - best_r.value)
            break
        offer(r.z)
    else:
        raise IterationLimitError(
            f"inner loop did not converge in {config.max_inner} iterations "
            f"(gap {eta - best_r.value:.3g})", eta - best_r.value)
    return SubproblemResult(best_v, max(best_r.value, 0.0), best_r, pool, lams, aux,
                            master_v, eta, it)


# ---------------------------------------------------------------------------
# outer loop


@dataclass
class IterationRecord:
    k: int
    mp_objective: float
    q: float
    vertex: tuple[int, ...]
    inner_iterations: int

    def to_dict(self) -> dict:
        return {"k": self.k, "mp_objective": self.mp_objective, "q": self.q,
                "vertex": list(self.vertex), "inner_iterations": self.inner_iterations}


@dataclass
class NccgState:
    k: int = 0
    scenarios: list[np.ndarray] = field(default_factory=list)
    copies: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    mp_objectives: list[float] = field(default_factory=list)
    sp_values: list[float] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)

    def add_scenario(self, v) -> None:
        v = np.asarray(v, dtype=int)
        if any(np.array_equal(v, s) for s in self.scenarios):
            raise DneError(f"scenario {tuple(v)} generated twice")
        self.scenarios.append(v)
        self.k += 1


def solve_master(state: NccgState, sys: StackedSystem,
                 config: SolverConfig = SolverConfig()):
    """Widest box that admits the stored recourse copies at every stored vertex.

    Returns ``(box, objective, copies)`` where ``copies`` lists ``(x, z)``
    per scenario.

    Raises
    ------
    MasterInfeasibleError
        When no box satisfies the cuts (the forecast itself is infeasible).
    """
    m, nx = sys.H.shape
    nz = sys.J.shape[1]
    n = sys.n
    S = len(state.scenarios)
    nvar = 2 * n + S * (nx + nz)
    A = np.zeros((S * m, nvar))
    for k, v in enumerate(state.scenarios):
        rows = slice(k * m, (k + 1) * m)
        A[rows, :n] = sys.K * (1 - v)
        A[rows, n:2 * n] = sys.K * v
        off = 2 * n + k * (nx + nz)
        A[rows, off:off + nx] = sys.H
        A[rows, off + nx:off + nx + nz] = sys.J
    b = np.tile(sys.h, S)
    c = np.concatenate([-sys.sigma, sys.sigma, np.zeros(S * (nx + nz))])
    lb = np.concatenate([sys.w_min, sys.forecast] +
                        [np.r_[np.full(nx, -np.inf), np.zeros(nz)]] * S)
    ub = np.concatenate([sys.forecast, sys.w_max] +
                        [np.r_[np.full(nx, np.inf), np.ones(nz)]] * S)
    lp = LinearProgram(c, A, ["<="] * (S * m), b, lb, ub, maximize=True)
    ints = [2 * n + k * (nx + nz) + nx + j for k in range(S) for j in range(nz)]
    if ints:
        sol = solve_milp(MixedIntegerProgram(lp, ints), config.mip(config.master_gap))
    else:
        sol = solve_lp(lp, config.lp)
    if sol.status == "infeasible":
        raise MasterInfeasibleError(
            "master problem infeasible: no box around the forecast admits recourse")
    if sol.status != "optimal":
        raise DneError(f"master problem returned status {sol.status}")
    x = sol.x
    box = DneBox.from_flat(sys, x[:n], x[n:2 * n])
    copies = []
    for k in range(S):
        off = 2 * n + k * (nx + nz)
        copies.append((x[off:off + nx].copy(), np.round(x[off + nx:off + nx + nz]).astype(int)))
    objective = float(sys.sigma @ (box.u - box.l))
    return box, objective, copies


@dataclass
class Certificate:
    vertex: tuple[int, ...]
    w: np.ndarray
    x: np.ndarray
    z: np.ndarray
    max_residual: float

    def to_dict(self, sys: StackedSystem) -> dict:
        return {"vertex": list(self.vertex),
                "w": sys.shape2(self.w).tolist(),
                "x": self.x.tolist(), "z": [int(v) for v in self.z],
                "max_residual": self.max_residual}


@dataclass
class AuditReport:
    vertices_checked: int
    samples_checked: int
    max_violation: float
    worst_point: list | None
    passed: bool

    def to_dict(self) -> dict:
        return {"vertices_checked": self.vertices_checked,
                "samples_checked": self.samples_checked,
                "max_violation": self.max_violation,
                "worst_point": self.worst_point, "passed": self.passed}


@dataclass
class DneSolution:
    box: DneBox
    objective: float
    records: list[IterationRecord]
    certificates: list[Certificate]
    audit: AuditReport | None
    system: StackedSystem
    state: NccgState
    final_subproblem: SubproblemResult
    ded: DedResult | None = None

    @property
    def sigma(self) -> np.ndarray:
        return self.system.shape2(self.system.sigma)

    @property
    def periods(self) -> tuple[int, ...]:
        return self.box.periods

    def period_contribution(self, t: int) -> float:
        """Weighted width ``sigma_t . (u_t - l_t)`` of local period ``t``."""
        return float(self.sigma[t] @ (self.box.upper[t] - self.box.lower[t]))

    def to_dict(self) -> dict:
        sys = self.system
        return {
            "periods": [p + 1 for p in self.box.periods],
            "farms": list(sys.farm_ids),
            "recourse_qsus": list(sys.recourse_qsus),
            "objective": self.objective,
            "lower": self.box.lower.tolist(),
            "upper": self.box.upper.tolist(),
            "forecast": self.box.forecast.tolist(),
            "w_min": self.box.w_min.tolist(),
            "w_max": self.box.w_max.tolist(),
            "sigma": self.sigma.tolist(),
            "iterations": [r.to_dict() for r in self.records],
            "certificates": [c.to_dict(sys) for c in self.certificates],
            "audit": None if self.audit is None else self.audit.to_dict(),
        }


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))  # map keeps input order
    return [fn(i) for i in items]


def audit_box(sys: StackedSystem, box: DneBox, config: SolverConfig = SolverConfig(),
              samples: int | None = None, vertex_limit: int | None = None) -> AuditReport:
    """Check recourse feasibility at box vertices and at seeded random points."""
    n = sys.n
    samples = config.verify_samples if samples is None else samples
    vertex_limit = config.audit_vertex_limit if vertex_limit is None else vertex_limit
    points = []
    n_vert = 0
    if n <= vertex_limit:
        grid = (np.arange(2 ** n)[:, None] >> np.arange(n)[::-1]) & 1
        points.extend(grid.astype(float))
        n_vert = len(grid)
    rng = np.random.default_rng(config.seed)
    points.extend(rng.random((samples, n)))
    values = _map(lambda v: evaluate_recourse(sys, box, v, config).value, points,
                  config.workers)
    if not values:
        return AuditReport(0, 0, 0.0, None, True)
    worst = int(np.argmax(values))
    vmax = float(values[worst])
    return AuditReport(n_vert, samples, vmax,
                       sys.shape2(box.point(points[worst])).tolist(),
                       vmax <= config.eps_feas)


def run_nccg(sys: StackedSystem, config: SolverConfig = SolverConfig(),
             callback: Callable[[IterationRecord], None] | None = None,
             audit: bool = True, ded: DedResult | None = None) -> DneSolution:
    """Outer decomposition loop on an assembled system.

    Raises
    ------
    ForecastInfeasibleError
        If recourse is infeasible already at the forecast.
    IterationLimitError
        If ``config.max_outer`` master solves do not certify a box.
    """
    pre = min_total_slack(sys, sys.forecast, config, with_duals=True)
    if pre.value > config.eps_feas:
        rows = [str(r) for r in pre.violated_rows(sys, config.eps_feas)]
        raise ForecastInfeasibleError(
            f"forecast infeasible: minimal total slack {pre.value:.6g} MW "
            f"(rows: {', '.join(rows[:8])})", pre.value, rows)

    n = sys.n
    cap = config.max_outer if config.max_outer is not None else 2 ** min(n, 30) + 1
    state = NccgState()
    while True:
        if len(state.mp_objectives) >= cap:
            raise IterationLimitError(
                f"outer loop did not converge in {cap} iterations",
                state.sp_values[-1] if state.sp_values else math.nan)
        box, obj, copies = solve_master(state, sys, config)
        sp = solve_subproblem(sys, box, config, state.scenarios)
        rec = IterationRecord(len(state.mp_objectives), obj, sp.value,
                              tuple(int(a) for a in sp.v), sp.iterations)
        state.mp_objectives.append(obj)
        state.sp_values.append(sp.value)
        state.records.append(rec)
        state.copies = copies
        log.debug("outer %d: MP %.9g  Q %.3g  vertex %s", rec.k, obj, sp.value, rec.vertex)
        if callback is not None:
            callback(rec)
        if sp.value <= config.eps_feas:
            break
        state.add_scenario(sp.v)

    certs = []
    for v, (x, z) in zip(state.scenarios, copies):
        w = box.point(v)
        res = float(np.max(sys.residual(x, z, w), initial=-np.inf))
        certs.append(Certificate(tuple(int(a) for a in v), w, x, z, res))
    report = audit_box(sys, box, config) if audit else None
    if report is not None and not report.passed:
        log.warning("box audit found violation %.3g at %s", report.max_violation,
                    report.worst_point)
    return DneSolution(box, obj, state.records, certs, report, sys, state, sp, ded)


def _prepare(case: SystemCase, config: SolverConfig, ded: DedResult | None):
    ded = ded if ded is not None else solve_ded(case, config.lp)
    if config.sigma is not None:
        sigma = np.asarray(config.sigma, dtype=float).reshape(case.n_periods,
                                                              len(case.wind_farms))
    else:
        sigma = sigma_from_lmps(ded, case)
    qsus = resolve_recourse_qsus(case, config.recourse_qsus)
    sys = build_stacked_system(case, ded.ddp, sigma, qsus)
    if config.drop_redundant_rows:
        sys = drop_redundant_line_rows(sys, config.lp)
    return ded, sys


def solve_dne(case: SystemCase, config: SolverConfig = SolverConfig(),
              ded: DedResult | None = None,
              callback: Callable[[IterationRecord], None] | None = None,
              audit: bool = True) -> DneSolution:
    """Multi-period do-not-exceed limits of every wind farm.

    Runs economic dispatch (unless ``ded`` is given), sets the range
    weights, assembles the robust system and runs the decomposition.
    """
    ded, sys = _prepare(case, config, ded)
    return run_nccg(sys, config, callback, audit, ded)


def solve_single_period(case: SystemCase, t: int, config: SolverConfig = SolverConfig(),
                        ded: DedResult | None = None,
                        callback: Callable[[IterationRecord], None] | None = None,
                        audit: bool = True) -> DneSolution:
    """Limits for period ``t`` (0-based) alone, ignoring links to other periods.

    Dispatch points and weights come from the full-horizon dispatch so that
    single- and multi-period objectives are comparable.
    """
    ded, sys = _prepare(case, config, ded)
    return run_nccg(restrict_to_period(sys, t), config, callback, audit, ded)
