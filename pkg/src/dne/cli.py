"""Command-line entry point: ``dne <subcommand> case.json [options]``.

Exit codes: 0 success, 1 usage or input error, 2 an infeasibility was
found (infeasible trajectory, forecast or dispatch), 3 solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .ded import DedInfeasibleError, solve_ded
from .feasibility import (check_scenario, find_violating_trajectory, trajectory_from_csv,
                          trajectory_to_csv)
from .formulation import FormulationError, resolve_recourse_qsus
from .lp import LpConfig, LpError, LpNumericalError
from .milp import NodeLimitExceeded
from .nccg import DneError, ForecastInfeasibleError, SolverConfig, solve_dne, solve_single_period
from .report import compare_results, emit_plot_csv, single_results, solve_results
from .system import CaseError, NetworkError, read_case

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, solver: bool = True):
    p.add_argument("case", help="case file (JSON)")
    p.add_argument("-o", "--output", help="write the result here instead of stdout")
    p.add_argument("--periods", type=int, help="keep only the first N periods")
    if solver:
        p.add_argument("--config", help="JSON file with solver settings")
        p.add_argument("--enable-qsu", default=None, metavar="IDS|all|none",
                       help="quick-start units with adjustable commitment (default all)")
        p.add_argument("--seed", type=int, help="seed for audit sampling and searches")
        p.add_argument("--log-iterations", action="store_true",
                       help="print one JSON line per outer iteration to stderr")
        p.add_argument("--label", help="case label used in results and plot tables")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dne", description="Multi-period do-not-exceed limits for wind farms.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="multi-period limits after economic dispatch")
    _add_common(p)
    p.add_argument("--plot-csv", help="also write the band table here")
    p.add_argument("--no-audit", action="store_true", help="skip the sampling audit")

    p = sub.add_parser("ded", help="economic dispatch and LMPs at forecast wind")
    _add_common(p, solver=False)

    p = sub.add_parser("single", help="limits for each period on its own")
    _add_common(p)
    p.add_argument("--no-audit", action="store_true", help="skip the sampling audit")

    p = sub.add_parser("check", help="is corrective dispatch feasible for a trajectory")
    _add_common(p)
    p.add_argument("--trajectory", required=True, help="CSV with header period,farm,mw")

    p = sub.add_parser("compare", help="single- vs multi-period limits and a violating trajectory")
    _add_common(p)
    p.add_argument("--plot-csv", help="also write the comparison table here")
    p.add_argument("--trajectory-csv", help="write the violating trajectory here")

    p = sub.add_parser("plot", help="band table from a solve or compare result file")
    p.add_argument("results", help="results JSON written by solve or compare")
    p.add_argument("--kind", choices=("bands", "comparison"), default=None,
                   help="default: bands for solve results, comparison for compare results")
    p.add_argument("-o", "--output")
    return parser


def _read_config(path: str | None) -> SolverConfig:
    if path is None:
        return SolverConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{path}: expected a JSON object")
    known = {f.name for f in dataclasses.fields(SolverConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise UsageError(f"{path}: unknown setting(s) {', '.join(unknown)}")
    lp_raw = raw.pop("lp", None)
    if lp_raw is not None:
        lp_known = {f.name for f in dataclasses.fields(LpConfig)}
        if not isinstance(lp_raw, dict) or set(lp_raw) - lp_known:
            raise UsageError(f"{path}: 'lp' must be an object with keys from "
                             f"{', '.join(sorted(lp_known))}")
        raw["lp"] = LpConfig(**lp_raw)
    if raw.get("sigma") is not None:
        raw["sigma"] = tuple(tuple(float(v) for v in row) for row in raw["sigma"])
    try:
        return SolverConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _config(args) -> SolverConfig:
    cfg = _read_config(getattr(args, "config", None))
    changes = {}
    if getattr(args, "enable_qsu", None) is not None:
        changes["recourse_qsus"] = args.enable_qsu
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _load(args):
    path = Path(args.case)
    if not path.is_file():
        raise UsageError(f"case file not found: {path}")
    case = read_case(path)
    if args.periods is not None:
        if args.periods < 1:
            raise UsageError("--periods must be at least 1")
        case = case.truncate(args.periods)
    return case


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _iteration_logger(args):
    if not getattr(args, "log_iterations", False):
        return None

    def emit(rec):
        sys.stderr.write(json.dumps(rec.to_dict()) + "\n")
        sys.stderr.flush()
    return emit


def _cmd_solve(args) -> int:
    case, cfg = _load(args), _config(args)
    resolve_recourse_qsus(case, cfg.recourse_qsus)
    sol = solve_dne(case, cfg, callback=_iteration_logger(args), audit=not args.no_audit)
    # serialise once and build the plot from the parsed copy, as `plot` would
    text = _dump(solve_results(sol, case, args.label))
    _write(text, args.output)
    if args.plot_csv:
        Path(args.plot_csv).write_text(emit_plot_csv(json.loads(text), "bands"), encoding="utf-8")
    if sol.audit is not None and not sol.audit.passed:
        print(f"audit failed: violation {sol.audit.max_violation:.3g} at "
              f"{sol.audit.worst_point}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_ded(args) -> int:
    case = _load(args)
    ded = solve_ded(case)
    doc = {"kind": "ded", "case_label": case.name}
    doc.update(ded.to_dict())
    _write(_dump(doc), args.output)
    return EXIT_OK


def _singles(case, cfg, args, audit=True):
    ded = solve_ded(case, cfg.lp)
    log = _iteration_logger(args)
    return ded, [solve_single_period(case, t, cfg, ded, log, audit)
                 for t in range(case.n_periods)]


def _cmd_single(args) -> int:
    case, cfg = _load(args), _config(args)
    resolve_recourse_qsus(case, cfg.recourse_qsus)
    _, sols = _singles(case, cfg, args, audit=not args.no_audit)
    _write(_dump(single_results(sols, case, args.label)), args.output)
    return EXIT_OK


def _cmd_check(args) -> int:
    case, cfg = _load(args), _config(args)
    path = Path(args.trajectory)
    if not path.is_file():
        raise UsageError(f"trajectory file not found: {path}")
    try:
        traj = trajectory_from_csv(path.read_text(encoding="utf-8"), case)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    ded = solve_ded(case, cfg.lp)
    res = check_scenario(case, ded.ddp, traj, cfg.recourse_qsus, cfg)
    doc = {"kind": "check", "case_label": args.label or case.name}
    doc.update(res.to_dict())
    _write(_dump(doc), args.output)
    if not res.feasible:
        print(f"infeasible: total slack {res.total_slack:.6g} MW; violated rows: "
              f"{', '.join(res.violated_rows)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_compare(args) -> int:
    case, cfg = _load(args), _config(args)
    resolve_recourse_qsus(case, cfg.recourse_qsus)
    ded, singles = _singles(case, cfg, args)
    multi = solve_dne(case, cfg, ded, _iteration_logger(args))
    traj = find_violating_trajectory(case, [s.box for s in singles], multi.box, ded.ddp,
                                     cfg.recourse_qsus, cfg)
    check = None if traj is None else check_scenario(case, ded.ddp, traj, cfg.recourse_qsus, cfg)
    text = _dump(compare_results(multi, singles, case, traj, check, args.label))
    _write(text, args.output)
    if args.plot_csv:
        Path(args.plot_csv).write_text(emit_plot_csv(json.loads(text), "comparison"),
                                       encoding="utf-8")
    if args.trajectory_csv and traj is not None:
        Path(args.trajectory_csv).write_text(trajectory_to_csv(traj), encoding="utf-8")
    return EXIT_OK


def _cmd_plot(args) -> int:
    path = Path(args.results)
    if not path.is_file():
        raise UsageError(f"results file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    kind = args.kind
    if kind is None:
        first = doc[0] if isinstance(doc, list) and doc else doc
        kind = "comparison" if isinstance(first, dict) and first.get("kind") == "compare" \
            else "bands"
    try:
        text = emit_plot_csv(doc, kind)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    _write(text, args.output)
    return EXIT_OK


COMMANDS = {"solve": _cmd_solve, "ded": _cmd_ded, "single": _cmd_single,
            "check": _cmd_check, "compare": _cmd_compare, "plot": _cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:      # --help, or a usage error already reported
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CaseError, NetworkError, FormulationError, LpError) as exc:
        print(f"dne: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ForecastInfeasibleError, DedInfeasibleError) as exc:
        print(f"dne: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DneError, LpNumericalError, NodeLimitExceeded) as exc:
        print(f"dne: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"dne: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
