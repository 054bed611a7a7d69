"""Assembly of the corrective-dispatch constraint system.

Every realisation of wind output ``w`` must admit continuous unit outputs
``x`` and binary quick-start decisions ``z`` with ``H x + J z + K w <= h``.
The rows come from two kinds of blocks:

* per-period blocks ``A_t x_t + B_t z_t + C_t w_t <= d_t`` (power balance,
  PTDF line limits, unit output limits, quick-start start-up caps);
* coupling blocks ``sum_t E_t x_t + F_t z_t <= g`` (ramping, start/stop
  logic, minimum up and down times).

Equalities are written as two opposite inequalities so that every row can
carry its own slack. Unit output ``x`` is a free variable; all of its
limits live in rows. Only quick-start units selected for recourse own
``z`` variables: commitment ``u``, start ``y`` and stop ``d`` per period.
All other units keep their initial commitment over the whole horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .lp import DEFAULT_LP_CONFIG, LinearProgram, LpConfig, solve_lp
from .system import SystemCase, compute_ptdf


class Label(NamedTuple):
    kind: str
    element: str
    period: int  # 0-based; -1 for rows with no single period

    def __str__(self):
        where = f"{self.element},t={self.period + 1}" if self.element else f"t={self.period + 1}"
        return f"{self.kind}[{where}]"


class FormulationError(ValueError):
    pass


def resolve_recourse_qsus(case: SystemCase, spec="all") -> tuple[str, ...]:
    """Normalise a quick-start selection to a tuple of unit ids in case order.

    ``spec`` may be ``"all"``, ``"none"``, ``None`` (meaning all), a
    comma-separated string of ids or an iterable of ids.
    """
    qsus = case.quick_start_ids
    if spec is None or spec == "all":
        return tuple(qsus)
    if spec == "none":
        return ()
    ids = [s.strip() for s in spec.split(",") if s.strip()] if isinstance(spec, str) else list(spec)
    known = {g.id for g in case.units}
    for uid in ids:
        if uid not in known:
            raise FormulationError(f"unknown unit {uid!r} in quick-start selection")
        if uid not in qsus:
            raise FormulationError(f"unit {uid!r} is not a quick-start unit")
    chosen = set(ids)
    return tuple(u for u in qsus if u in chosen)


@dataclass
class PeriodBlocks:
    t: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    d: np.ndarray
    labels: list[Label]
    x_labels: list[Label]
    z_labels: list[Label]
    w_labels: list[Label]
    base_dispatch: np.ndarray

    def residual(self, x, z, w) -> np.ndarray:
        return self.A @ x + self.B @ z + self.C @ w - self.d


@dataclass
class CouplingBlocks:
    E: list[np.ndarray]
    F: list[np.ndarray]
    g: np.ndarray
    labels: list[Label]

    def residual(self, xs: Sequence[np.ndarray], zs: Sequence[np.ndarray]) -> np.ndarray:
        out = -self.g.copy()
        for E, F, x, z in zip(self.E, self.F, xs, zs):
            out += E @ x + F @ z
        return out


def _x_labels(case, t):
    return [Label("x", g.id, t) for g in case.units]


def _z_labels(qsus, t):
    return [Label(kind, uid, t) for uid in qsus for kind in ("u", "y", "d")]


def build_period_blocks(case: SystemCase, ddp, t: int, recourse_qsus="all",
                        ptdf: np.ndarray | None = None) -> PeriodBlocks:
    """Temporally decoupled rows for period ``t`` (0-based).

    ``ddp`` is the base-case dispatch of shape ``(n_periods, n_units)``. It
    is kept on the block as the reference operating point; commitments of
    units without recourse follow their initial status.
    """
    T = case.n_periods
    if ddp is None:
        raise FormulationError("desired dispatch points are required")
    ddp = np.asarray(ddp, dtype=float)
    if ddp.shape != (T, len(case.units)):
        raise FormulationError(
            f"dispatch points have shape {ddp.shape}, expected {(T, len(case.units))}")
    if not 0 <= t < T:
        raise FormulationError(f"period {t} outside horizon of {T}")
    qsus = resolve_recourse_qsus(case, recourse_qsus)
    if ptdf is None:
        ptdf = compute_ptdf(case)
    if ptdf.shape != (len(case.lines), len(case.buses)):
        raise FormulationError("PTDF shape does not match the network")
    bidx = case.bus_index()
    units, farms = case.units, case.wind_farms
    nx, nz, nw = len(units), 3 * len(qsus), len(farms)
    zpos = {uid: 3 * k for k, uid in enumerate(qsus)}
    load = case.load_matrix()[t]
    total = load.sum()

    rows_A, rows_B, rows_C, rhs, labels = [], [], [], [], []

    def add(a, b, c, d, label):
        rows_A.append(a); rows_B.append(b); rows_C.append(c); rhs.append(d)
        labels.append(label)

    ones_x, ones_w = np.ones(nx), np.ones(nw)
    add(ones_x, np.zeros(nz), ones_w, total, Label("balance_max", "", t))
    add(-ones_x, np.zeros(nz), -ones_w, -total, Label("balance_min", "", t))

    gen_cols = np.array([bidx[g.bus] for g in units], dtype=int)
    farm_cols = np.array([bidx[f.bus] for f in farms], dtype=int)
    for k, ln in enumerate(case.lines):
        row = ptdf[k]
        a = row[gen_cols] if nx else np.zeros(0)
        c = row[farm_cols] if nw else np.zeros(0)
        through = float(row @ load)
        add(a, np.zeros(nz), c, ln.capacity + through, Label("line_fwd", ln.id, t))
        add(-a, np.zeros(nz), -c, ln.capacity - through, Label("line_rev", ln.id, t))

    for k, g in enumerate(units):
        e = np.zeros(nx); e[k] = 1.0
        if g.id in zpos:
            bu = np.zeros(nz); bu[zpos[g.id]] = -g.p_max
            add(e, bu, np.zeros(nw), 0.0, Label("pmax", g.id, t))
            bl = np.zeros(nz); bl[zpos[g.id]] = g.p_min
            add(-e, bl, np.zeros(nw), 0.0, Label("pmin", g.id, t))
            bs = np.zeros(nz)
            bs[zpos[g.id]] = -g.p_max
            bs[zpos[g.id] + 1] = g.p_max - g.startup_cap
            add(e, bs, np.zeros(nw), 0.0, Label("startup_cap", g.id, t))
        else:
            status = 1.0 if g.initially_on else 0.0
            add(e, np.zeros(nz), np.zeros(nw), g.p_max * status, Label("pmax", g.id, t))
            add(-e, np.zeros(nz), np.zeros(nw), -g.p_min * status, Label("pmin", g.id, t))

    m = len(rhs)
    return PeriodBlocks(
        t=t,
        A=np.array(rows_A).reshape(m, nx),
        B=np.array(rows_B).reshape(m, nz),
        C=np.array(rows_C).reshape(m, nw),
        d=np.array(rhs, dtype=float),
        labels=labels,
        x_labels=_x_labels(case, t),
        z_labels=_z_labels(qsus, t),
        w_labels=[Label("w", f.id, t) for f in farms],
        base_dispatch=ddp[t].copy(),
    )


def build_coupling_blocks(case: SystemCase, recourse_qsus="all") -> CouplingBlocks:
    """Inter-temporal rows: ramping, start/stop logic, minimum up/down time.

    The state before the first period is the case's initial status and
    output; units are assumed to have satisfied their minimum up/down
    times before the horizon starts.
    """
    T = case.n_periods
    qsus = resolve_recourse_qsus(case, recourse_qsus)
    units = case.units
    nx, nz = len(units), 3 * len(qsus)
    zpos = {uid: 3 * k for k, uid in enumerate(qsus)}
    rows: list[tuple[dict, dict, float, Label]] = []

    def add(xc: dict, zc: dict, rhs: float, label: Label):
        rows.append((xc, zc, rhs, label))

    for k, g in enumerate(units):
        u0 = 1.0 if g.initially_on else 0.0
        x0 = g.initial_output
        rec = g.id in zpos
        p = zpos.get(g.id)
        for t in range(T):
            if np.isfinite(g.ramp_rate):
                R = g.ramp_rate
                up_x, dn_x = {(t, k): 1.0}, {(t, k): -1.0}
                up_z, dn_z = {}, {}
                up_rhs, dn_rhs = 0.0, 0.0
                if t == 0:
                    up_rhs += x0
                    dn_rhs -= x0
                else:
                    up_x[(t - 1, k)] = -1.0
                    dn_x[(t - 1, k)] = 1.0
                if rec:
                    if t == 0:
                        up_rhs += R * u0
                    else:
                        up_z[(t - 1, p)] = -R
                    up_z[(t, p + 1)] = -g.startup_cap
                    dn_z[(t, p)] = -R
                    dn_z[(t, p + 2)] = -g.p_max
                else:
                    up_rhs += R
                    dn_rhs += R
                add(up_x, up_z, up_rhs, Label("ramp_up", g.id, t))
                add(dn_x, dn_z, dn_rhs, Label("ramp_down", g.id, t))
            if not rec:
                continue
            # u_t - u_{t-1} = y_t - d_t as a pair of inequalities
            on_z = {(t, p): 1.0, (t, p + 1): -1.0, (t, p + 2): 1.0}
            off_z = {key: -v for key, v in on_z.items()}
            on_rhs, off_rhs = 0.0, 0.0
            if t == 0:
                on_rhs += u0
                off_rhs -= u0
            else:
                on_z[(t - 1, p)] = -1.0
                off_z[(t - 1, p)] = 1.0
            add({}, on_z, on_rhs, Label("logic_on", g.id, t))
            add({}, off_z, off_rhs, Label("logic_off", g.id, t))
            upz = {(tau, p + 1): 1.0 for tau in range(max(0, t - g.min_up + 1), t + 1)}
            upz[(t, p)] = upz.get((t, p), 0.0) - 1.0
            add({}, upz, 0.0, Label("min_up", g.id, t))
            dnz = {(tau, p + 2): 1.0 for tau in range(max(0, t - g.min_down + 1), t + 1)}
            dnz[(t, p)] = dnz.get((t, p), 0.0) + 1.0
            add({}, dnz, 1.0, Label("min_down", g.id, t))

    m = len(rows)
    E = [np.zeros((m, nx)) for _ in range(T)]
    F = [np.zeros((m, nz)) for _ in range(T)]
    g_vec = np.zeros(m)
    labels = []
    for i, (xc, zc, rhs, label) in enumerate(rows):
        for (t, k), v in xc.items():
            E[t][i, k] += v
        for (t, k), v in zc.items():
            F[t][i, k] += v
        g_vec[i] = rhs
        labels.append(label)
    return CouplingBlocks(E, F, g_vec, labels)


@dataclass
class StackedSystem:
    """The stacked robust-feasibility system ``H x + J z + K w <= h``.

    Wind columns are ordered period-major: column ``t * n_farms + j`` is
    farm ``j`` in period ``t``. ``periods`` maps local period positions to
    the original case periods (a single-period restriction keeps one).
    """

    H: np.ndarray
    J: np.ndarray
    K: np.ndarray
    h: np.ndarray
    sigma: np.ndarray
    row_labels: list[Label]
    x_labels: list[Label]
    z_labels: list[Label]
    w_labels: list[Label]
    periods: tuple[int, ...]
    farm_ids: tuple[str, ...]
    w_min: np.ndarray
    w_max: np.ndarray
    forecast: np.ndarray
    recourse_qsus: tuple[str, ...] = ()
    n_decoupled_rows: int = 0
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.K.shape[1]

    @property
    def n_rows(self) -> int:
        return self.H.shape[0]

    def residual(self, x, z, w) -> np.ndarray:
        return self.H @ x + self.J @ z + self.K @ w - self.h

    def row_index(self) -> dict[Label, int]:
        return {lab: i for i, lab in enumerate(self.row_labels)}

    def shape2(self, vec) -> np.ndarray:
        """Reshape a wind vector to ``(n_periods, n_farms)``."""
        return np.asarray(vec, dtype=float).reshape(len(self.periods), len(self.farm_ids))


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def stack_system(periods: Sequence[PeriodBlocks], coupling: CouplingBlocks,
                 sigma, *, farm_ids: Sequence[str] = (), w_min=None, w_max=None,
                 forecast=None, recourse_qsus: Sequence[str] = ()) -> StackedSystem:
    """Place period blocks block-diagonally and append the coupling rows.

    ``sigma`` holds one weight per farm per period, either flat (period
    major) or shaped ``(n_periods, n_farms)``.
    """
    T = len(periods)
    if sorted(p.t for p in periods) != list(range(T)):
        raise FormulationError("period blocks must cover every period exactly once")
    periods = sorted(periods, key=lambda p: p.t)
    if len(coupling.E) != T or len(coupling.F) != T:
        raise FormulationError("coupling blocks do not match the number of periods")
    for p, E, F in zip(periods, coupling.E, coupling.F):
        if E.shape[1] != p.A.shape[1] or F.shape[1] != p.B.shape[1]:
            raise FormulationError(f"coupling block width mismatch in period {p.t + 1}")
    nw = periods[0].C.shape[1]
    mc = coupling.g.size
    H = np.vstack([_block_diag([p.A for p in periods]), np.hstack(coupling.E)])
    J = np.vstack([_block_diag([p.B for p in periods]), np.hstack(coupling.F)])
    K = np.vstack([_block_diag([p.C for p in periods]), np.zeros((mc, nw * T))])
    h = np.concatenate([p.d for p in periods] + [coupling.g])
    sigma = np.asarray(sigma, dtype=float).ravel()
    if sigma.size != nw * T:
        raise FormulationError(f"sigma has {sigma.size} entries, expected {nw * T}")

    def flat(v, default):
        return np.asarray(default if v is None else v, dtype=float).ravel()

    return StackedSystem(
        H=H, J=J, K=K, h=h, sigma=sigma,
        row_labels=[lab for p in periods for lab in p.labels] + list(coupling.labels),
        x_labels=[lab for p in periods for lab in p.x_labels],
        z_labels=[lab for p in periods for lab in p.z_labels],
        w_labels=[lab for p in periods for lab in p.w_labels],
        periods=tuple(range(T)),
        farm_ids=tuple(farm_ids) or tuple(lab.element for lab in periods[0].w_labels),
        w_min=flat(w_min, np.full(nw * T, -np.inf)),
        w_max=flat(w_max, np.full(nw * T, np.inf)),
        forecast=flat(forecast, np.zeros(nw * T)),
        recourse_qsus=tuple(recourse_qsus),
        n_decoupled_rows=sum(p.A.shape[0] for p in periods),
    )


def build_stacked_system(case: SystemCase, ddp, sigma, recourse_qsus="all",
                         ptdf: np.ndarray | None = None) -> StackedSystem:
    """Convenience wrapper: all period blocks, coupling blocks and stacking."""
    qsus = resolve_recourse_qsus(case, recourse_qsus)
    if ptdf is None:
        ptdf = compute_ptdf(case)
    blocks = [build_period_blocks(case, ddp, t, qsus, ptdf) for t in range(case.n_periods)]
    coupling = build_coupling_blocks(case, qsus)
    lo, hi = case.wind_bounds()
    return stack_system(blocks, coupling, sigma,
                        farm_ids=[f.id for f in case.wind_farms],
                        w_min=lo, w_max=hi, forecast=case.forecast_matrix(),
                        recourse_qsus=qsus)


def _column_periods(labels: Sequence[Label]) -> np.ndarray:
    return np.array([lab.period for lab in labels], dtype=int)


def row_periods(sys: StackedSystem) -> list[frozenset]:
    """Set of periods whose variables appear in each row."""
    xp, zp, wp = (_column_periods(sys.x_labels), _column_periods(sys.z_labels),
                  _column_periods(sys.w_labels))
    out = []
    for i in range(sys.n_rows):
        touched = set(xp[sys.H[i] != 0]) | set(zp[sys.J[i] != 0]) | set(wp[sys.K[i] != 0])
        out.append(frozenset(int(t) for t in touched))
    return out


def restrict_to_period(sys: StackedSystem, t: int) -> StackedSystem:
    """Sub-system on period ``t`` alone.

    Keeps the columns of period ``t`` and every row whose variables all
    belong to that period; rows that link ``t`` to another period are
    dropped, rows that link it to the initial condition are kept. The
    result is a relaxation of the multi-period system projected on ``t``.
    """
    if t not in range(len(sys.periods)):
        raise FormulationError(f"period {t} outside horizon of {len(sys.periods)}")
    touched = row_periods(sys)
    rows = [i for i, s in enumerate(touched) if s <= {t}]
    xs = np.flatnonzero(_column_periods(sys.x_labels) == t)
    zs = np.flatnonzero(_column_periods(sys.z_labels) == t)
    ws = np.flatnonzero(_column_periods(sys.w_labels) == t)
    sub = StackedSystem(
        H=sys.H[np.ix_(rows, xs)], J=sys.J[np.ix_(rows, zs)], K=sys.K[np.ix_(rows, ws)],
        h=sys.h[rows], sigma=sys.sigma[ws],
        row_labels=[sys.row_labels[i] for i in rows],
        x_labels=[sys.x_labels[j] for j in xs],
        z_labels=[sys.z_labels[j] for j in zs],
        w_labels=[sys.w_labels[j] for j in ws],
        periods=(sys.periods[t],),
        farm_ids=sys.farm_ids,
        w_min=sys.w_min[ws], w_max=sys.w_max[ws], forecast=sys.forecast[ws],
        recourse_qsus=sys.recourse_qsus,
        n_decoupled_rows=sum(1 for i in rows if i < sys.n_decoupled_rows),
    )
    return sub


def _take_rows(sys: StackedSystem, rows: Sequence[int]) -> StackedSystem:
    rows = list(rows)
    return StackedSystem(
        H=sys.H[rows], J=sys.J[rows], K=sys.K[rows], h=sys.h[rows], sigma=sys.sigma,
        row_labels=[sys.row_labels[i] for i in rows], x_labels=sys.x_labels,
        z_labels=sys.z_labels, w_labels=sys.w_labels, periods=sys.periods,
        farm_ids=sys.farm_ids, w_min=sys.w_min, w_max=sys.w_max, forecast=sys.forecast,
        recourse_qsus=sys.recourse_qsus,
        n_decoupled_rows=sum(1 for i in rows if i < sys.n_decoupled_rows))


def drop_redundant_line_rows(sys: StackedSystem,
                             config: LpConfig = DEFAULT_LP_CONFIG) -> StackedSystem:
    """Remove line-limit rows that no admissible point can violate.

    A line row of period ``t`` is dropped when maximising its left side
    over the other rows of that period alone, with ``z`` in ``[0, 1]`` and
    ``w`` anywhere in ``[w_min, w_max]``, stays within its limit. Only rows
    that are never dropped serve as evidence, so the set of ``(x, z, w)``
    satisfying the system is unchanged. Slack values of infeasible points
    may differ, feasibility does not.
    """
    touched = row_periods(sys)
    is_line = [lab.kind in ("line_fwd", "line_rev") for lab in sys.row_labels]
    xp, zp, wp = (_column_periods(sys.x_labels), _column_periods(sys.z_labels),
                  _column_periods(sys.w_labels))
    drop = set()
    for t in range(len(sys.periods)):
        own = [i for i, s in enumerate(touched) if s <= {t}]
        base = [i for i in own if not is_line[i]]
        lines = [i for i in own if is_line[i]]
        if not lines:
            continue
        xs, zs, ws = np.flatnonzero(xp == t), np.flatnonzero(zp == t), np.flatnonzero(wp == t)
        A = np.hstack([sys.H[np.ix_(base, xs)], sys.J[np.ix_(base, zs)],
                       sys.K[np.ix_(base, ws)]])
        lb = np.r_[np.full(xs.size, -np.inf), np.zeros(zs.size), sys.w_min[ws]]
        ub = np.r_[np.full(xs.size, np.inf), np.ones(zs.size), sys.w_max[ws]]
        for i in lines:
            c = np.r_[sys.H[i, xs], sys.J[i, zs], sys.K[i, ws]]
            sol = solve_lp(LinearProgram(c, A, ["<="] * len(base), sys.h[base], lb, ub,
                                         maximize=True), config)
            if sol.optimal and sol.objective <= sys.h[i] - 1e-9 * (1.0 + abs(sys.h[i])):
                drop.add(i)
    if not drop:
        return sys
    return _take_rows(sys, [i for i in range(sys.n_rows) if i not in drop])


@dataclass(frozen=True, eq=False)
class DneBox:
    """Lower/upper wind limits per period and farm, shape ``(n_periods, n_farms)``."""

    lower: np.ndarray
    upper: np.ndarray
    forecast: np.ndarray
    w_min: np.ndarray
    w_max: np.ndarray
    periods: tuple[int, ...] = ()

    def __post_init__(self):
        arrs = [np.atleast_2d(np.asarray(getattr(self, k), dtype=float))
                for k in ("lower", "upper", "forecast", "w_min", "w_max")]
        shape = arrs[0].shape
        if any(a.shape != shape for a in arrs):
            raise ValueError("box arrays must share one shape")
        for k, a in zip(("lower", "upper", "forecast", "w_min", "w_max"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, k, a)
        if not self.periods:
            object.__setattr__(self, "periods", tuple(range(shape[0])))
        lo, l, f, u, hi = self.w_min, self.lower, self.forecast, self.upper, self.w_max
        if not (np.all(lo <= l) and np.all(l <= f) and np.all(f <= u) and np.all(u <= hi)):
            raise ValueError("box violates w_min <= lower <= forecast <= upper <= w_max")

    @classmethod
    def from_flat(cls, sys: StackedSystem, lower, upper) -> "DneBox":
        """Build from flat vectors, clipping round-off onto the admissible ranges."""
        lower = np.clip(np.asarray(lower, dtype=float), sys.w_min, sys.forecast)
        upper = np.clip(np.asarray(upper, dtype=float), sys.forecast, sys.w_max)
        return cls(sys.shape2(lower), sys.shape2(upper), sys.shape2(sys.forecast),
                   sys.shape2(sys.w_min), sys.shape2(sys.w_max), tuple(sys.periods))

    @classmethod
    def degenerate(cls, sys: StackedSystem) -> "DneBox":
        return cls.from_flat(sys, sys.forecast, sys.forecast)

    @property
    def l(self) -> np.ndarray:
        return self.lower.ravel()

    @property
    def u(self) -> np.ndarray:
        return self.upper.ravel()

    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, w, tol: float = 0.0) -> bool:
        w = np.asarray(w, dtype=float).reshape(self.lower.shape)
        return bool(np.all(w >= self.lower - tol) and np.all(w <= self.upper + tol))

    def point(self, v) -> np.ndarray:
        """Wind vector ``l + (u - l) * v`` (flat)."""
        return self.l + (self.u - self.l) * np.asarray(v, dtype=float).ravel()


def apply_uncertainty(sys: StackedSystem, box: DneBox, v) -> np.ndarray:
    """Right-hand side ``h - K (l + (u - l) * v)`` for ``v`` in the unit box."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != sys.n:
        raise ValueError(f"v has {v.size} entries, expected {sys.n}")
    if np.any(v < 0) or np.any(v > 1):
        raise ValueError("v must lie in [0, 1]^n")
    return sys.h - sys.K @ box.point(v)
