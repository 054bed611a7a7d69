"""Best-bound branch and bound over the LP kernel.

Nodes are explored by best LP bound, ties broken by creation order. The
lowest-index fractional integer variable is branched on and the down
branch is created first, so a given input always produces the same tree.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .lp import DEFAULT_LP_CONFIG, LinearProgram, LpConfig, LpError, solve_lp


class NodeLimitExceeded(RuntimeError):
    """Branch and bound hit its node limit before proving optimality."""

    def __init__(self, nodes: int, incumbent: "MipSolution | None"):
        gap = "no incumbent" if incumbent is None else \
            f"incumbent {incumbent.objective:.6g}, bound {incumbent.best_bound:.6g}"
        super().__init__(f"node limit of {nodes} reached ({gap})")
        self.nodes = nodes
        self.incumbent = incumbent


@dataclass
class MixedIntegerProgram:
    lp: LinearProgram
    integers: Sequence[int]

    def __post_init__(self):
        n = self.lp.c.size
        self.integers = np.asarray(sorted(set(int(j) for j in self.integers)), dtype=int)
        if self.integers.size and (self.integers.min() < 0 or self.integers.max() >= n):
            raise LpError("integer variable index out of range")
        lb, ub = self.lp.lb[self.integers], self.lp.ub[self.integers]
        if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
            raise LpError("integer variables need finite bounds")


@dataclass(frozen=True)
class MipConfig:
    gap_tol: float = 1e-6
    int_tol: float = 1e-6
    node_limit: int = 200_000
    lp: LpConfig = DEFAULT_LP_CONFIG


@dataclass
class MipSolution:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    nodes: int = 0
    best_bound: float = math.nan
    bound_history: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _fractional(x, ints, tol):
    vals = x[ints]
    frac = np.abs(vals - np.round(vals))
    hit = np.flatnonzero(frac > tol)
    return -1 if hit.size == 0 else int(ints[hit[0]])


def _polish(lp: LinearProgram, x, ints, lb, ub, cfg: MipConfig, warm=None):
    """Round the integer part exactly and re-solve for the continuous part."""
    fixed = np.round(x[ints])
    if np.array_equal(fixed, x[ints]):
        return x
    lo, hi = lb.copy(), ub.copy()
    lo[ints] = hi[ints] = fixed
    sol = solve_lp(replace(lp, lb=lo, ub=hi), cfg.lp, warm)
    if sol.optimal:
        out = sol.x.copy()
        out[ints] = fixed
        return out
    out = x.copy()
    out[ints] = fixed
    return out


def solve_milp(mip: MixedIntegerProgram, config: MipConfig = MipConfig(),
               cutoff: float | None = None) -> MipSolution:
    """Solve a mixed-integer linear program exactly (within ``gap_tol``).

    Returns a solution whose status is ``"optimal"``, ``"infeasible"`` or
    ``"unbounded"`` (the last only when the root relaxation is unbounded).
    With ``cutoff`` only solutions better than it by more than ``gap_tol``
    are sought; if none exists the status is ``"cutoff"``.

    Raises
    ------
    NodeLimitExceeded
        When ``config.node_limit`` nodes were expanded without closing the gap.
    """
    lp, ints = mip.lp, mip.integers
    sense = 1.0 if lp.maximize else -1.0   # internal: maximise sense*obj
    lb0 = lp.lb.copy()
    ub0 = lp.ub.copy()
    lb0[ints] = np.ceil(lb0[ints] - config.int_tol)
    ub0[ints] = np.floor(ub0[ints] + config.int_tol)
    if np.any(lb0 > ub0):
        return MipSolution("infeasible", nodes=0)

    def relax(lo, hi, parent=None):
        return solve_lp(replace(lp, lb=lo, ub=hi), config.lp, parent)

    root = relax(lb0, ub0)
    nodes = 1
    if root.status == "infeasible":
        return MipSolution("infeasible", nodes=nodes)
    if root.status == "unbounded":
        return MipSolution("unbounded", nodes=nodes)

    best_x, best_val = None, -math.inf if cutoff is None else sense * cutoff
    counter = 0
    heap = [(-sense * root.objective, counter, lb0, ub0, root)]
    history = []
    while heap:
        key, idx, lo, hi, sol = heapq.heappop(heap)
        bound = -key
        global_bound = max(bound, best_val)
        history.append(sense * global_bound)
        if bound <= best_val + config.gap_tol:
            # best-first: every remaining node is at least as bad
            heap.clear()
            break
        j = _fractional(sol.x, ints, config.int_tol)
        if j < 0:
            x = _polish(lp, sol.x, ints, lo, hi, config, sol)
            val = sense * float(lp.c @ x)
            if val > best_val:
                best_x, best_val = x, val
            continue
        v = sol.x[j]
        children = []
        down_hi = hi.copy(); down_hi[j] = math.floor(v)
        up_lo = lo.copy(); up_lo[j] = math.ceil(v)
        for clo, chi in ((lo, down_hi), (up_lo, hi)):
            if nodes >= config.node_limit:
                inc = None if best_x is None else MipSolution(
                    "node_limit", sense * best_val, best_x, nodes,
                    sense * max(bound, best_val), history)
                raise NodeLimitExceeded(nodes, inc)
            child = relax(clo, chi, sol)
            nodes += 1
            if child.status != "optimal":
                continue
            cval = sense * child.objective
            if cval <= best_val + config.gap_tol:
                continue
            counter += 1
            children.append((-cval, counter, clo, chi, child))
        for item in children:
            heapq.heappush(heap, item)

    if best_x is None:
        status = "infeasible" if cutoff is None else "cutoff"
        return MipSolution(status, nodes=nodes, best_bound=math.nan if cutoff is None else cutoff,
                           bound_history=history)
    final_bound = history[-1] if history else sense * best_val
    return MipSolution("optimal", sense * best_val, best_x, nodes,
                       final_bound, history)
