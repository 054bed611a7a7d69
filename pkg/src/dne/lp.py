"""Dense two-phase simplex for small linear programs.

The kernel works on the bounded standard form ``min c.x, S x = b,
0 <= x <= U`` obtained by shifting, negating or splitting the user's
variables and adding one slack per inequality row. Phase one minimises
the sum of artificial variables; phase two starts from the resulting
basis. Pricing is Dantzig's largest-reduced-cost rule, switching to
Bland's rule after a run of degenerate pivots so that cycling cannot
occur; ``pivot_rule="bland"`` uses Bland throughout. The basis inverse is
kept explicitly and refactored every ``refactor_every`` pivots.

A problem that differs from an already solved one only in its variable
bounds can be re-solved from the old basis (``warm_start``): the old basis
stays dual feasible, so a bounded dual simplex restores primal
feasibility, usually in a handful of pivots. This is what branch and bound
relies on.

Dual values follow the sensitivity convention ``duals[i] = d(objective) /
d(b[i])`` in the sense of the problem as stated, so ``max x s.t. x <= 3``
reports a dual of ``+1`` on its row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LE, GE, EQ = "<=", ">=", "=="
_RELATIONS = {"<=": LE, "<": LE, ">=": GE, ">": GE, "==": EQ, "=": EQ}


class LpError(ValueError):
    """Malformed linear program."""


class LpNumericalError(RuntimeError):
    """The simplex basis became numerically unusable."""

    def __init__(self, message: str, condition: float = math.nan):
        super().__init__(f"{message} (basis condition estimate {condition:.3g})")
        self.condition = condition


@dataclass
class LinearProgram:
    """``min`` or ``max`` of ``c.x`` subject to row relations and bounds.

    ``relations`` holds one of ``"<="``, ``">="``, ``"=="`` per row. Bounds
    may be infinite; ``lb`` defaults to 0 and ``ub`` to ``+inf``.
    """

    c: np.ndarray
    A: np.ndarray
    relations: Sequence[str]
    b: np.ndarray
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n) if n else \
            np.zeros((len(self.b), 0))
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.A.shape[0]
        if self.b.size != m:
            raise LpError(f"b has {self.b.size} entries for {m} rows")
        try:
            self.relations = tuple(_RELATIONS[r] for r in self.relations)
        except KeyError as exc:
            raise LpError(f"unknown row relation {exc.args[0]!r}") from None
        if len(self.relations) != m:
            raise LpError(f"{len(self.relations)} relations for {m} rows")
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel()
        if self.lb.size != n or self.ub.size != n:
            raise LpError("bound vectors must match the number of variables")
        if np.any(self.lb > self.ub):
            j = int(np.argmax(self.lb > self.ub))
            raise LpError(f"variable {j}: lower bound {self.lb[j]} exceeds upper bound {self.ub[j]}")
        if np.isnan(self.A).any() or np.isnan(self.b).any() or np.isnan(self.c).any():
            raise LpError("NaN in problem data")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x

    def violation(self, x: np.ndarray) -> float:
        """Largest row or bound violation of ``x``."""
        act = self.A @ x
        viol = np.zeros(len(self.b))
        for i, rel in enumerate(self.relations):
            if rel == LE:
                viol[i] = act[i] - self.b[i]
            elif rel == GE:
                viol[i] = self.b[i] - act[i]
            else:
                viol[i] = abs(act[i] - self.b[i])
        worst = max(viol.max(initial=0.0), (self.lb - x).max(initial=0.0),
                    (x - self.ub).max(initial=0.0))
        return float(worst)


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: tuple[int, ...] = ()
    iterations: int = 0
    backend: str = "simplex"
    warm: object = field(default=None, repr=False, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class LpConfig:
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-9
    max_iter: int = 200_000
    refactor_every: int = 64
    pivot_rule: str = "dantzig"
    degenerate_switch: int = 200
    backend: str = "simplex"


DEFAULT_LP_CONFIG = LpConfig()


def dual_objective(lp: LinearProgram, sol: LpSolution, tol: float = 1e-9) -> float:
    """Objective of the dual certificate ``(duals, reduced_costs)``.

    Reduced costs are priced against the bound they point to; a reduced
    cost pointing at an infinite bound makes the certificate infeasible
    and yields ``inf`` of the appropriate sign.
    """
    y, r = sol.duals, sol.reduced_costs
    val = float(lp.b @ y)
    sign = -1.0 if lp.maximize else 1.0
    for j, rj in enumerate(r):
        if abs(rj) <= tol:
            continue
        # for min, r > 0 prices the lower bound; for max it prices the upper
        bound = lp.lb[j] if sign * rj > 0 else lp.ub[j]
        if not np.isfinite(bound):
            return sign * -math.inf
        val += rj * bound
    return val


# ---------------------------------------------------------------------------


def _column_kinds(lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    # 0 shifted: x = lo + x', 1 negated: x = hi - x', 2 free: x = x' - x''
    return np.where(np.isfinite(lb), 0, np.where(np.isfinite(ub), 1, 2))


class _StandardForm:
    """Bounded standard form of a :class:`LinearProgram`."""

    def __init__(self, lp: LinearProgram):
        m, n = lp.A.shape
        cols, costs, uppers, maps = [], [], [], []
        offset = np.zeros(n)
        sense = -1.0 if lp.maximize else 1.0
        kinds = _column_kinds(lp.lb, lp.ub)
        for j in range(n):
            lo, hi, a, c = lp.lb[j], lp.ub[j], lp.A[:, j], sense * lp.c[j]
            kind = kinds[j]
            if kind == 0:
                offset[j] = lo
                maps.append((j, len(cols), 1.0))
                cols.append(a); costs.append(c); uppers.append(hi - lo)
            elif kind == 1:
                offset[j] = hi
                maps.append((j, len(cols), -1.0))
                cols.append(-a); costs.append(-c); uppers.append(np.inf)
            else:
                maps.append((j, len(cols), 1.0))
                cols.append(a); costs.append(c); uppers.append(np.inf)
                maps.append((j, len(cols), -1.0))
                cols.append(-a); costs.append(-c); uppers.append(np.inf)
        self.kinds = kinds
        self.n_struct = len(cols)
        rhs = lp.b - lp.A @ offset
        slack_row = []
        for i, rel in enumerate(lp.relations):
            if rel == EQ:
                continue
            col = np.zeros(m)
            col[i] = 1.0 if rel == LE else -1.0
            slack_row.append((i, len(cols)))
            cols.append(col); costs.append(0.0); uppers.append(np.inf)
        self.n_real = len(cols)
        S = np.column_stack(cols) if cols else np.zeros((m, 0))
        row_sign = np.where(rhs < 0, -1.0, 1.0)
        S = S * row_sign[:, None]
        rhs = rhs * row_sign

        basis = [-1] * m
        for i, k in slack_row:
            if S[i, k] > 0:
                basis[i] = k
        art = [i for i in range(m) if basis[i] < 0]
        if art:
            extra = np.zeros((m, len(art)))
            for a, i in enumerate(art):
                extra[i, a] = 1.0
                basis[i] = self.n_real + a
            S = np.hstack([S, extra])
        self.S = S
        self.b = rhs
        self.c = np.concatenate([costs, np.zeros(len(art))]) if costs or art else np.zeros(0)
        self.U = np.concatenate([uppers, np.full(len(art), np.inf)]) if uppers or art else np.zeros(0)
        self.n_art = len(art)
        self.basis0 = basis
        self.map_j = np.array([t[0] for t in maps], dtype=int)
        self.map_k = np.array([t[1] for t in maps], dtype=int)
        self.map_s = np.array([t[2] for t in maps], dtype=float)
        self.shifted = kinds[self.map_j] == 0
        self.offset = offset
        self.row_sign = row_sign
        self.sense = sense
        self.A = lp.A
        self.A_b = lp.b

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "_StandardForm | None":
        """Same form with new variable bounds, or ``None`` if the column
        structure would change. Artificial columns are fixed at zero."""
        if not np.array_equal(_column_kinds(lb, ub), self.kinds):
            return None
        new = object.__new__(_StandardForm)
        new.__dict__.update(self.__dict__)
        offset = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        U = self.U.copy()
        j = self.map_j[self.shifted]
        U[self.map_k[self.shifted]] = ub[j] - lb[j]
        U[self.n_real:] = 0.0
        new.offset = offset
        new.U = U
        new.b = self.row_sign * (self.A_b - self.A @ offset)
        return new

    @staticmethod
    def costs(lp: LinearProgram, sf: "_StandardForm") -> np.ndarray:
        c = np.zeros(sf.n_real)
        if sf.map_j.size:
            c[sf.map_k] = sf.sense * sf.map_s * lp.c[sf.map_j]
        return c

    def recover(self, xs: np.ndarray, n: int) -> np.ndarray:
        x = self.offset.copy()
        if self.map_j.size:
            np.add.at(x, self.map_j, self.map_s * xs[self.map_k])
        return x


class _Simplex:
    def __init__(self, sf: _StandardForm, cfg: LpConfig, basis=None, at_upper=None,
                 Binv=None):
        self.sf = sf
        self.cfg = cfg
        self.S = sf.S
        self.m, self.N = sf.S.shape
        self.U = sf.U.copy()
        self.basis = np.array(sf.basis0 if basis is None else basis, dtype=int)
        self.at_upper = np.zeros(self.N, dtype=bool) if at_upper is None else at_upper.copy()
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.iterations = 0
        self._since_refactor = 0
        if Binv is None:
            self.refactor()
        else:
            self.Binv = Binv.copy()
            self.recompute_xb()

    def refactor(self):
        B = self.S[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B) if self.m else np.zeros((0, 0))
        except np.linalg.LinAlgError:
            raise LpNumericalError("singular basis", math.inf) from None
        if self.m and not np.all(np.isfinite(self.Binv)):
            raise LpNumericalError("non-finite basis inverse", math.inf)
        self._since_refactor = 0
        self.recompute_xb()

    def check_conditioning(self):
        if self.m:
            # 1-norm estimate from the fresh inverse, no factorisation needed
            B = self.S[:, self.basis]
            cond = np.abs(B).sum(axis=0).max() * np.abs(self.Binv).sum(axis=0).max()
            if not np.isfinite(cond) or cond > 1e14:
                raise LpNumericalError("ill-conditioned basis", cond)

    def recompute_xb(self):
        up = np.flatnonzero(self.at_upper)
        r = self.sf.b - self.S[:, up] @ self.U[up] if up.size else self.sf.b.copy()
        self.xb = self.Binv @ r

    def _limit(self):
        if self.iterations >= self.cfg.max_iter:
            raise LpNumericalError(f"iteration limit {self.cfg.max_iter} reached",
                                   np.linalg.cond(self.S[:, self.basis]) if self.m else 1.0)

    def _pivot(self, leave: int, q: int, alpha: np.ndarray, enter_val: float,
               leave_to_upper: bool):
        out = self.basis[leave]
        piv = alpha[leave]
        if abs(piv) < 1e-12:
            raise LpNumericalError("vanishing pivot", math.inf)
        # eta update of the explicit inverse
        row = self.Binv[leave] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[leave] = row
        self.basis[leave] = q
        self.is_basic[q] = True
        self.is_basic[out] = False
        self.at_upper[q] = False
        self.at_upper[out] = leave_to_upper and np.isfinite(self.U[out])
        self.xb[leave] = enter_val
        self._since_refactor += 1
        if self._since_refactor >= self.cfg.refactor_every:
            self.refactor()

    def _suspect(self, alpha: np.ndarray, leave: int) -> bool:
        """A small pivot computed from an updated inverse may be drift."""
        return self._since_refactor > 0 and \
            abs(alpha[leave]) < 1e-7 * max(1.0, float(np.abs(alpha).max()))

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis] @ self.Binv
        return cost - y @ self.S

    def run(self, cost: np.ndarray) -> str:
        """Primal simplex from a primal feasible basis."""
        cfg = self.cfg
        degenerate = 0
        while True:
            self._limit()
            d = self.reduced_costs(cost)
            cand = ~self.is_basic & (
                ((d < -cfg.opt_tol) & ~self.at_upper & (self.U > 0))
                | ((d > cfg.opt_tol) & self.at_upper))
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return "optimal"
            bland = cfg.pivot_rule == "bland" or degenerate >= cfg.degenerate_switch
            if bland:
                q = int(idx[0])
            else:
                q = int(idx[np.argmax(np.abs(d[idx]))])
            direction = -1.0 if self.at_upper[q] else 1.0
            alpha = self.Binv @ self.S[:, q]
            delta = direction * alpha

            theta = self.U[q]
            leave, leave_to_upper = -1, False
            tol = cfg.pivot_tol * max(1.0, float(np.abs(delta).max(initial=0.0)))
            dec = np.flatnonzero(delta > tol)
            inc = np.flatnonzero(delta < -tol)
            ratios = np.full(self.m, np.inf)
            if dec.size:
                ratios[dec] = np.maximum(self.xb[dec], 0.0) / delta[dec]
            if inc.size:
                ub = self.U[self.basis[inc]]
                fin = np.isfinite(ub)
                ratios[inc[fin]] = np.maximum(ub[fin] - self.xb[inc[fin]], 0.0) / -delta[inc[fin]]
            best = ratios.min(initial=np.inf)
            if best < theta:
                ties = np.flatnonzero(ratios <= best + cfg.feas_tol * max(1.0, abs(best)))
                if bland:
                    # lowest index among the ties whose pivot is not tiny
                    mag = np.abs(delta[ties])
                    ties = ties[mag >= 1e-3 * mag.max()]
                    leave = int(ties[np.argmin(self.basis[ties])])
                else:
                    # largest pivot among ties, for stability
                    leave = int(ties[np.argmax(np.abs(delta[ties]))])
                theta = ratios[leave]
                leave_to_upper = delta[leave] < 0
            if not np.isfinite(theta):
                return "unbounded"

            if leave >= 0 and self._suspect(alpha, leave):
                self.refactor()
                continue
            degenerate = degenerate + 1 if theta <= cfg.feas_tol else 0
            self.iterations += 1
            self.xb -= theta * delta
            if leave < 0:
                self.at_upper[q] = not self.at_upper[q]
                continue
            enter_val = (self.U[q] - theta) if self.at_upper[q] else theta
            self._pivot(leave, q, alpha, enter_val, leave_to_upper)

    def primal_infeasibility(self) -> np.ndarray:
        ub = self.U[self.basis]
        return np.maximum(-self.xb, np.where(np.isfinite(ub), self.xb - ub, -np.inf))

    def run_dual(self, cost: np.ndarray, max_iter: int) -> str:
        """Bounded dual simplex from a dual feasible basis.

        Returns ``"feasible"`` once every basic variable is within its
        bounds, ``"infeasible"`` when a row proves primal infeasibility and
        ``"stalled"`` after ``max_iter`` pivots.
        """
        cfg = self.cfg
        scale = 1.0 + float(np.abs(self.sf.b).max(initial=0.0))
        d = None
        for _ in range(max_iter):
            self._limit()
            infeas = self.primal_infeasibility()
            r = int(np.argmax(infeas)) if self.m else 0
            if self.m == 0 or infeas[r] <= cfg.feas_tol * scale:
                return "feasible"
            out = self.basis[r]
            to_upper = self.xb[r] > 0          # above its upper bound
            if d is None or self._since_refactor == 0:
                d = self.reduced_costs(cost)
            alpha_r = self.Binv[r] @ self.S
            free = ~self.is_basic & (self.U > 0)
            tol = cfg.pivot_tol * max(1.0, float(np.abs(alpha_r).max(initial=0.0)))
            if to_upper:
                elig = free & (((alpha_r > tol) & ~self.at_upper) | ((alpha_r < -tol) & self.at_upper))
            else:
                elig = free & (((alpha_r < -tol) & ~self.at_upper) | ((alpha_r > tol) & self.at_upper))
            idx = np.flatnonzero(elig)
            if idx.size == 0:
                return "infeasible"
            ratios = np.abs(d[idx]) / np.abs(alpha_r[idx])
            best = ratios.min()
            ties = idx[ratios <= best + cfg.opt_tol]
            q = int(ties[np.argmax(np.abs(alpha_r[ties]))])
            alpha = self.Binv @ self.S[:, q]
            if self._suspect(alpha, r):
                self.refactor()
                continue
            target = self.U[out] if to_upper else 0.0
            step = (self.xb[r] - target) / alpha[r]
            start = self.U[q] if self.at_upper[q] else 0.0
            self.iterations += 1
            self.xb -= step * alpha
            # the pivot row prices the basis change; basic entries stay zero
            d = d - (d[q] / alpha_r[q]) * alpha_r
            self._pivot(r, q, alpha, start + step, to_upper)
        return "stalled"

    def values(self) -> np.ndarray:
        xs = np.where(self.at_upper, self.U, 0.0)
        xs[self.basis] = self.xb
        return xs

    def drive_out_artificials(self):
        n_real = self.sf.n_real
        for r in range(self.m):
            if self.basis[r] < n_real:
                continue
            row = self.Binv[r] @ self.S[:, :n_real]
            cand = np.flatnonzero((np.abs(row) > 1e-9) & ~self.is_basic[:n_real])
            if cand.size == 0:
                continue  # redundant row; the artificial stays basic at zero
            q = int(cand[0])
            alpha = self.Binv @ self.S[:, q]
            out = self.basis[r]
            piv = alpha[r]
            rowv = self.Binv[r] / piv
            self.Binv -= np.outer(alpha, rowv)
            self.Binv[r] = rowv
            self.basis[r] = q
            self.is_basic[q] = True
            self.is_basic[out] = False
            self.at_upper[out] = False
        self.refactor()


def _finish(lp: LinearProgram, sf: _StandardForm, spx: _Simplex, cfg: LpConfig) -> LpSolution:
    if spx._since_refactor:
        # keep an updated inverse only if it still reproduces both solutions
        spx.recompute_xb()
        B = spx.S[:, spx.basis]
        up = np.flatnonzero(spx.at_upper)
        r = sf.b - spx.S[:, up] @ spx.U[up]
        cb = sf.c[spx.basis]
        tol = 1e-11 * (1.0 + float(np.abs(r).max(initial=0.0)) + float(np.abs(cb).max(initial=0.0)))
        if np.abs(B @ spx.xb - r).max(initial=0.0) > tol or \
                np.abs((cb @ spx.Binv) @ B - cb).max(initial=0.0) > tol:
            spx.refactor()
    spx.check_conditioning()
    n = lp.c.size
    xs = spx.values()
    x = sf.recover(xs, n)
    # snap onto finite bounds that are within tolerance
    x = np.where(np.abs(x - lp.lb) <= cfg.feas_tol, lp.lb, x)
    x = np.where(np.abs(x - lp.ub) <= cfg.feas_tol, lp.ub, x)
    y_std = sf.c[spx.basis] @ spx.Binv
    duals = sf.sense * sf.row_sign * y_std
    duals[np.abs(duals) < 1e-13] = 0.0
    reduced = lp.c - lp.A.T @ duals
    reduced[np.abs(reduced) < 1e-13] = 0.0
    warm = (sf, spx.basis.copy(), spx.at_upper.copy(), spx.Binv)
    return LpSolution("optimal", float(lp.c @ x), x, duals, reduced,
                      tuple(int(k) for k in spx.basis), spx.iterations, "simplex", warm)


def _solve_cold(lp: LinearProgram, cfg: LpConfig) -> LpSolution:
    sf = _StandardForm(lp)
    spx = _Simplex(sf, cfg)
    if sf.n_art:
        phase1 = np.zeros(spx.N)
        phase1[sf.n_real:] = 1.0
        spx.run(phase1)
        spx.refactor()
        infeas = float(spx.values()[sf.n_real:].sum())
        scale = 1.0 + float(np.abs(sf.b).max(initial=0.0))
        if infeas > cfg.feas_tol * scale * 10:
            return LpSolution("infeasible", iterations=spx.iterations)
        spx.drive_out_artificials()
        spx.U[sf.n_real:] = 0.0
        spx.at_upper[sf.n_real:] = False
        spx.recompute_xb()
    status = spx.run(sf.c)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=spx.iterations)
    return _finish(lp, sf, spx, cfg)


def _solve_warm(lp: LinearProgram, cfg: LpConfig, warm) -> LpSolution | None:
    """Re-solve from a previous basis; ``None`` when that is not possible."""
    parent, basis, at_upper, Binv = warm
    if parent.A is not lp.A and not (parent.A.shape == lp.A.shape and np.array_equal(parent.A, lp.A)):
        return None
    if not np.array_equal(parent.A_b, lp.b) or parent.sense != (-1.0 if lp.maximize else 1.0):
        return None
    sf = parent.with_bounds(lp.lb, lp.ub)
    if sf is None or not np.array_equal(sf.c[:sf.n_real], _StandardForm.costs(lp, sf)):
        return None
    at_upper = at_upper & (sf.U > 0)
    if np.any(at_upper & ~np.isfinite(sf.U)):
        return None
    spx = _Simplex(sf, cfg, basis, at_upper, Binv)
    d = spx.reduced_costs(sf.c)
    nb = ~spx.is_basic & (sf.U > 0)
    dual_ok = not np.any(nb & (((d < -cfg.opt_tol) & ~spx.at_upper) | ((d > cfg.opt_tol) & spx.at_upper)))
    scale = 1.0 + float(np.abs(sf.b).max(initial=0.0))
    primal_ok = spx.primal_infeasibility().max(initial=0.0) <= cfg.feas_tol * scale
    if not primal_ok:
        if not dual_ok:
            return None
        status = spx.run_dual(sf.c, 20 * (spx.m + spx.N))
        if status == "stalled":
            return None
        if status == "infeasible":
            return LpSolution("infeasible", iterations=spx.iterations)
    status = spx.run(sf.c)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=spx.iterations)
    return _finish(lp, sf, spx, cfg)


def _solve_simplex(lp: LinearProgram, cfg: LpConfig, warm=None) -> LpSolution:
    if warm is not None:
        try:
            sol = _solve_warm(lp, cfg, warm)
        except LpNumericalError:
            sol = None
        if sol is not None:
            return sol
    return _solve_cold(lp, cfg)


def _solve_highs(lp: LinearProgram, cfg: LpConfig) -> LpSolution:
    from scipy.optimize import linprog

    m, n = lp.A.shape
    sense = -1.0 if lp.maximize else 1.0
    rel = np.array(lp.relations) if m else np.array([], dtype=str)
    le, ge, eq = rel == LE, rel == GE, rel == EQ
    A_ub = np.vstack([lp.A[le], -lp.A[ge]]) if (le.any() or ge.any()) else None
    b_ub = np.concatenate([lp.b[le], -lp.b[ge]]) if A_ub is not None else None
    A_eq = lp.A[eq] if eq.any() else None
    b_eq = lp.b[eq] if eq.any() else None
    bounds = [(None if not np.isfinite(lo) else lo, None if not np.isfinite(hi) else hi)
              for lo, hi in zip(lp.lb, lp.ub)]
    res = linprog(sense * lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": max(cfg.feas_tol, 1e-10),
                           "dual_feasibility_tolerance": max(cfg.opt_tol, 1e-10)})
    if res.status == 2:
        return LpSolution("infeasible", backend="highs")
    if res.status == 3:
        return LpSolution("unbounded", backend="highs")
    if res.status != 0:
        raise LpNumericalError(f"HiGHS failed: {res.message}")
    x = np.asarray(res.x, dtype=float)
    duals = np.zeros(m)
    if A_ub is not None:
        marg = sense * res.ineqlin.marginals
        k = int(le.sum())
        duals[le] = marg[:k]
        duals[ge] = -marg[k:]
    if A_eq is not None:
        duals[eq] = sense * res.eqlin.marginals
    reduced = lp.c - lp.A.T @ duals
    return LpSolution("optimal", float(lp.c @ x), x, duals, reduced, (),
                      int(getattr(res, "nit", 0)), "highs")


def solve_lp(lp: LinearProgram, config: LpConfig = DEFAULT_LP_CONFIG,
             warm_start: LpSolution | None = None) -> LpSolution:
    """Solve ``lp`` and return primal and dual values.

    Parameters
    ----------
    lp : LinearProgram
    config : LpConfig, optional
        Tolerances, pivot rule (``"dantzig"`` or ``"bland"``) and backend
        (``"simplex"`` for the built-in kernel, ``"highs"`` for scipy's).
    warm_start : LpSolution, optional
        Optimal solution of a problem with the same ``c``, ``A``, relations
        and ``b``; its basis is reused when only bounds changed. Ignored
        otherwise and by the HiGHS backend.

    Returns
    -------
    LpSolution
        ``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
    """
    if config.backend == "highs":
        return _solve_highs(lp, config)
    if config.backend != "simplex":
        raise LpError(f"unknown LP backend {config.backend!r}")
    warm = None if warm_start is None else warm_start.warm
    return _solve_simplex(lp, config, warm)
