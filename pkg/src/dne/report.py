"""Result documents and plot tables.

Result documents are plain JSON-ready dicts. Band charts of system-level
wind output plot the sum over farms of each bound, one row per period.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

import numpy as np

from .feasibility import ScenarioCheck, WindTrajectory
from .nccg import DneSolution
from .system import SystemCase

BANDS_HEADER = ["period", "case_label", "total_lower", "total_upper", "total_forecast"]
COMPARISON_HEADER = BANDS_HEADER + ["single_lower", "single_upper", "trajectory"]


def solve_results(sol: DneSolution, case: SystemCase, label: str | None = None) -> dict:
    doc = {"kind": "solve", "case_label": label or case.name or "case"}
    doc.update(sol.to_dict())
    doc["q_final"] = sol.final_subproblem.value
    if sol.ded is not None:
        doc["ded"] = sol.ded.to_dict()
    return doc


def single_results(sols: Sequence[DneSolution], case: SystemCase,
                   label: str | None = None) -> dict:
    return {"kind": "single", "case_label": label or case.name or "case",
            "periods": [s.to_dict() for s in sols]}


def compare_results(multi: DneSolution, singles: Sequence[DneSolution], case: SystemCase,
                    trajectory: WindTrajectory | None, check: ScenarioCheck | None,
                    label: str | None = None) -> dict:
    """Multi-period box next to the per-period boxes and the search result."""
    single = []
    for t, s in enumerate(singles):
        single.append({
            "period": t + 1,
            "objective": s.objective,
            "multi_contribution": multi.period_contribution(t),
            "lower": s.box.lower[0].tolist(),
            "upper": s.box.upper[0].tolist(),
        })
    doc = {
        "kind": "compare",
        "case_label": label or case.name or "case",
        "multi": solve_results(multi, case, label),
        "single": single,
        "trajectory": None if trajectory is None else trajectory.mw.tolist(),
        "trajectory_check": None if check is None else check.to_dict(),
    }
    return doc


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _as_list(results) -> list[dict]:
    if isinstance(results, dict):
        return [results]
    return list(results)


def emit_plot_csv(results: dict | Iterable[dict], kind: str = "bands") -> str:
    """CSV of system-level bands from ``solve`` or ``compare`` documents.

    ``kind="bands"`` takes solve results; ``kind="comparison"`` takes
    compare results and adds the per-period single-interval totals and the
    total of the violating trajectory (empty when none was found).
    """
    if kind not in ("bands", "comparison"):
        raise ValueError(f"unknown plot kind {kind!r}")
    want = "solve" if kind == "bands" else "compare"
    rows = []
    for doc in _as_list(results):
        if doc.get("kind") != want:
            raise ValueError(f"{kind} plot needs {want} results, got {doc.get('kind')!r}")
        label = str(doc["case_label"])
        multi = doc if want == "solve" else doc["multi"]
        lower = np.asarray(multi["lower"], dtype=float)
        upper = np.asarray(multi["upper"], dtype=float)
        fc = np.asarray(multi["forecast"], dtype=float)
        for t, period in enumerate(multi["periods"]):
            row = [period, label, lower[t].sum(), upper[t].sum(), fc[t].sum()]
            if want == "compare":
                s = doc["single"][t]
                traj = doc["trajectory"]
                row += [float(np.sum(s["lower"])), float(np.sum(s["upper"])),
                        None if traj is None else float(np.sum(traj[t]))]
            rows.append(row)
    rows.sort(key=lambda r: (r[1], r[0]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BANDS_HEADER if kind == "bands" else COMPARISON_HEADER)
    for r in rows:
        writer.writerow([r[0], r[1]] + ["" if v is None else _fmt(v) for v in r[2:]])
    return buf.getvalue()
