"""Power-system case model, JSON case files and DC shift factors.

A case is an immutable bundle of buses, lines, thermal units, wind farms,
per-bus loads and a time grid. Case files are single JSON documents::

    {
      "buses":      [{"id": 1, "is_slack": true}, ...],
      "lines":      [{"id": "L1", "from_bus": 1, "to_bus": 2,
                      "reactance": 0.1, "capacity": 80.0}, ...],
      "units":      [{"id": "G1", "bus": 1, "p_min": 10, "p_max": 50,
                      "ramp_rate": 5, "marginal_cost": 20,
                      "is_quick_start": false,
                      "initial_status": "on", "initial_output": 30}, ...],
      "wind_farms": [{"id": "W1", "bus": 2, "w_min": [0, 0],
                      "w_max": [40, 40], "forecast": [20, 22]}, ...],
      "load":       {"2": [60, 62]},
      "time_grid":  {"n_periods": 2, "period_length": 5}
    }

Quick-start units additionally carry ``min_up``, ``min_down`` and
``startup_limit``. ``ramp_rate`` may be ``null`` for an unlimited ramp.
Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np


class CaseError(ValueError):
    """Base class for case-file problems."""


class CaseParseError(CaseError):
    """The case text is not well-formed or a field has the wrong type."""


class CaseValidationError(CaseError):
    """A well-formed case violates a model invariant."""


class NetworkError(ValueError):
    """The network cannot carry a DC power flow (disconnected or singular)."""


@dataclass(frozen=True)
class Bus:
    id: int
    is_slack: bool = False


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: int
    to_bus: int
    reactance: float
    capacity: float


@dataclass(frozen=True)
class ThermalUnit:
    id: str
    bus: int
    p_min: float
    p_max: float
    ramp_rate: float
    marginal_cost: float
    is_quick_start: bool = False
    min_up: int = 1
    min_down: int = 1
    startup_limit: float | None = None
    initial_status: str = "on"
    initial_output: float = 0.0

    @property
    def initially_on(self) -> bool:
        return self.initial_status == "on"

    @property
    def startup_cap(self) -> float:
        return self.p_max if self.startup_limit is None else self.startup_limit


@dataclass(frozen=True)
class WindFarm:
    id: str
    bus: int
    w_min: tuple[float, ...]
    w_max: tuple[float, ...]
    forecast: tuple[float, ...]


@dataclass(frozen=True)
class TimeGrid:
    n_periods: int
    period_length: float = 5.0


@dataclass(frozen=True)
class SystemCase:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    units: tuple[ThermalUnit, ...]
    wind_farms: tuple[WindFarm, ...]
    load: Mapping[int, tuple[float, ...]]
    time_grid: TimeGrid
    name: str = field(default="case", compare=False)

    def __post_init__(self):
        validate_case(self)

    @property
    def n_periods(self) -> int:
        return self.time_grid.n_periods

    @property
    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    @property
    def slack_bus(self) -> int:
        return next(b.id for b in self.buses if b.is_slack)

    @property
    def quick_start_ids(self) -> list[str]:
        return [g.id for g in self.units if g.is_quick_start]

    def bus_index(self) -> dict[int, int]:
        return {b.id: k for k, b in enumerate(self.buses)}

    def load_matrix(self) -> np.ndarray:
        """Loads as an array of shape (n_periods, n_buses)."""
        out = np.zeros((self.n_periods, len(self.buses)))
        idx = self.bus_index()
        for bus, series in self.load.items():
            out[:, idx[bus]] = series
        return out

    def total_load(self) -> np.ndarray:
        return self.load_matrix().sum(axis=1)

    def forecast_matrix(self) -> np.ndarray:
        """Forecast wind as (n_periods, n_farms)."""
        return np.array([f.forecast for f in self.wind_farms], dtype=float).T.reshape(
            self.n_periods, len(self.wind_farms))

    def wind_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([f.w_min for f in self.wind_farms], dtype=float).T
        hi = np.array([f.w_max for f in self.wind_farms], dtype=float).T
        shape = (self.n_periods, len(self.wind_farms))
        return lo.reshape(shape), hi.reshape(shape)

    def truncate(self, n_periods: int) -> "SystemCase":
        """Keep only the first ``n_periods`` periods."""
        if not 1 <= n_periods <= self.n_periods:
            raise CaseValidationError(
                f"cannot truncate a {self.n_periods}-period case to {n_periods} periods")
        farms = tuple(
            replace(f, w_min=f.w_min[:n_periods], w_max=f.w_max[:n_periods],
                    forecast=f.forecast[:n_periods])
            for f in self.wind_farms)
        load = {b: s[:n_periods] for b, s in self.load.items()}
        return replace(self, wind_farms=farms, load=load,
                       time_grid=replace(self.time_grid, n_periods=n_periods))


def _fail(msg: str):
    raise CaseValidationError(msg)


def validate_case(case: SystemCase) -> None:
    """Check every cross-reference and physical invariant of ``case``."""
    T = case.time_grid.n_periods
    if not isinstance(T, int) or T < 1:
        _fail(f"time_grid.n_periods must be an integer >= 1, got {T!r}")
    if not case.time_grid.period_length > 0:
        _fail("time_grid.period_length must be > 0")

    for kind, items in (("bus", case.buses), ("line", case.lines),
                        ("unit", case.units), ("wind farm", case.wind_farms)):
        seen = set()
        for item in items:
            if item.id in seen:
                _fail(f"duplicate {kind} id {item.id!r}")
            seen.add(item.id)
    if not case.buses:
        _fail("case has no buses")
    n_slack = sum(b.is_slack for b in case.buses)
    if n_slack != 1:
        _fail(f"exactly one slack bus required, found {n_slack}")

    buses = set(case.bus_ids)
    for ln in case.lines:
        for end in (ln.from_bus, ln.to_bus):
            if end not in buses:
                _fail(f"line {ln.id!r} references unknown bus {end}")
        if ln.from_bus == ln.to_bus:
            _fail(f"line {ln.id!r} connects bus {ln.from_bus} to itself")
        if not ln.reactance > 0:
            _fail(f"line {ln.id!r}: reactance must be > 0, got {ln.reactance}")
        if not ln.capacity > 0:
            _fail(f"line {ln.id!r}: capacity must be > 0, got {ln.capacity}")

    for g in case.units:
        if g.bus not in buses:
            _fail(f"unit {g.id!r} references unknown bus {g.bus}")
        if not 0 <= g.p_min <= g.p_max:
            _fail(f"unit {g.id!r}: requires 0 <= p_min <= p_max "
                  f"(p_min={g.p_min}, p_max={g.p_max})")
        if not g.ramp_rate >= 0:
            _fail(f"unit {g.id!r}: ramp_rate must be >= 0")
        if g.initial_status not in ("on", "off"):
            _fail(f"unit {g.id!r}: initial_status must be 'on' or 'off'")
        if g.initially_on:
            if not g.p_min <= g.initial_output <= g.p_max:
                _fail(f"unit {g.id!r}: initial_output {g.initial_output} "
                      f"outside [p_min, p_max] while on")
        elif g.initial_output != 0:
            _fail(f"unit {g.id!r}: initial_output must be 0 when initial_status is off")
        if g.is_quick_start:
            if g.min_up < 1 or g.min_down < 1:
                _fail(f"unit {g.id!r}: min_up and min_down must be >= 1")
            if not g.p_min <= g.startup_cap <= g.p_max:
                _fail(f"unit {g.id!r}: startup_limit must lie in [p_min, p_max]")

    for f in case.wind_farms:
        if f.bus not in buses:
            _fail(f"wind farm {f.id!r} references unknown bus {f.bus}")
        for name in ("w_min", "w_max", "forecast"):
            if len(getattr(f, name)) != T:
                _fail(f"wind farm {f.id!r}: {name} needs {T} values")
        for t in range(T):
            if not f.w_min[t] <= f.forecast[t] <= f.w_max[t]:
                _fail(f"wind farm {f.id!r}, period {t + 1}: violates ordering "
                      f"w_min <= forecast <= w_max ({f.w_min[t]}, {f.forecast[t]}, "
                      f"{f.w_max[t]})")

    for bus, series in case.load.items():
        if bus not in buses:
            _fail(f"load references unknown bus {bus}")
        if len(series) != T:
            _fail(f"load at bus {bus} needs {T} values")
    totals = case.total_load()
    for t, tot in enumerate(totals):
        if tot < 0:
            _fail(f"period {t + 1}: total load is negative ({tot})")


# ---------------------------------------------------------------------------
# JSON case files

_TOP_KEYS = {"buses", "lines", "units", "wind_farms", "load", "time_grid", "name"}
_FIELDS = {
    "buses": {"id": int, "is_slack": bool},
    "lines": {"id": str, "from_bus": int, "to_bus": int, "reactance": float,
              "capacity": float},
    "units": {"id": str, "bus": int, "p_min": float, "p_max": float,
              "ramp_rate": float, "marginal_cost": float, "is_quick_start": bool,
              "min_up": int, "min_down": int, "startup_limit": float,
              "initial_status": str, "initial_output": float},
    "wind_farms": {"id": str, "bus": int, "w_min": list, "w_max": list,
                   "forecast": list},
    "time_grid": {"n_periods": int, "period_length": float},
}
_REQUIRED = {
    "buses": {"id"},
    "lines": {"id", "from_bus", "to_bus", "reactance", "capacity"},
    "units": {"id", "bus", "p_min", "p_max", "ramp_rate", "marginal_cost"},
    "wind_farms": {"id", "bus", "w_min", "w_max", "forecast"},
    "time_grid": {"n_periods"},
}
_NULLABLE = {("units", "ramp_rate"), ("units", "startup_limit")}


def _coerce(value, kind, where):
    if kind is bool:
        if not isinstance(value, bool):
            raise CaseParseError(f"{where}: expected true/false, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise CaseParseError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CaseParseError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return str(value)
        if not isinstance(value, str):
            raise CaseParseError(f"{where}: expected a string, got {value!r}")
        return value
    return value


def _series(value, T, where) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),) * T
    if not isinstance(value, list):
        raise CaseParseError(f"{where}: expected a number or a list of numbers")
    return tuple(_coerce(v, float, f"{where}[{k}]") for k, v in enumerate(value))


def _record(section: str, k: int, raw: Any) -> dict:
    where = f"{section}[{k}]" if k >= 0 else section
    if not isinstance(raw, dict):
        raise CaseParseError(f"{where}: expected an object")
    fields = _FIELDS[section]
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise CaseParseError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(_REQUIRED[section] - set(raw))
    if missing:
        raise CaseParseError(f"{where}: missing key(s) {', '.join(missing)}")
    out = {}
    for key, value in raw.items():
        if value is None and (section, key) in _NULLABLE:
            out[key] = math.inf if key == "ramp_rate" else None
        else:
            out[key] = _coerce(value, fields[key], f"{where}.{key}")
    return out


def case_from_dict(doc: Mapping[str, Any], name: str = "case") -> SystemCase:
    """Build and validate a :class:`SystemCase` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise CaseParseError("case document must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise CaseParseError(f"unknown top-level key(s) {', '.join(unknown)}")
    missing = sorted((_TOP_KEYS - {"name"}) - set(doc))
    if missing:
        raise CaseParseError(f"missing top-level key(s) {', '.join(missing)}")
    for section in ("buses", "lines", "units", "wind_farms"):
        if not isinstance(doc[section], list):
            raise CaseParseError(f"{section}: expected a list")

    grid = TimeGrid(**_record("time_grid", -1, doc["time_grid"]))
    T = grid.n_periods
    buses = tuple(Bus(**_record("buses", k, r)) for k, r in enumerate(doc["buses"]))
    lines = tuple(Line(**_record("lines", k, r)) for k, r in enumerate(doc["lines"]))
    units = tuple(ThermalUnit(**_record("units", k, r)) for k, r in enumerate(doc["units"]))
    farms = []
    for k, r in enumerate(doc["wind_farms"]):
        rec = _record("wind_farms", k, r)
        for key in ("w_min", "w_max", "forecast"):
            rec[key] = _series(r[key], T, f"wind_farms[{k}].{key}")
        farms.append(WindFarm(**rec))

    if not isinstance(doc["load"], dict):
        raise CaseParseError("load: expected an object mapping bus id to values")
    load = {}
    for key, series in doc["load"].items():
        try:
            bus = int(key)
        except ValueError:
            raise CaseParseError(f"load: bus key {key!r} is not an integer") from None
        load[bus] = _series(series, T, f"load[{key}]")
    return SystemCase(buses, lines, units, tuple(farms), load, grid,
                      name=str(doc.get("name", name)))


def load_case(source: str, name: str = "case") -> SystemCase:
    """Parse case-file text into a validated :class:`SystemCase`.

    Raises
    ------
    CaseParseError
        Malformed JSON (with line and column) or a mistyped/unknown field.
    CaseValidationError
        A model invariant is violated; the message names the element.
    """
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CaseParseError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return case_from_dict(doc, name=name)


def read_case(path) -> SystemCase:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_case(text, name=Path(path).stem)


def _num(x: float):
    if math.isinf(x):
        return None
    return int(x) if float(x).is_integer() else x


def case_to_dict(case: SystemCase) -> dict:
    units = []
    for g in case.units:
        rec = {"id": g.id, "bus": g.bus, "p_min": _num(g.p_min), "p_max": _num(g.p_max),
               "ramp_rate": _num(g.ramp_rate), "marginal_cost": _num(g.marginal_cost),
               "is_quick_start": g.is_quick_start,
               "initial_status": g.initial_status,
               "initial_output": _num(g.initial_output)}
        if g.is_quick_start:
            rec.update(min_up=g.min_up, min_down=g.min_down,
                       startup_limit=None if g.startup_limit is None else _num(g.startup_limit))
        units.append(rec)
    return {
        "name": case.name,
        "buses": [{"id": b.id, "is_slack": b.is_slack} for b in case.buses],
        "lines": [{"id": ln.id, "from_bus": ln.from_bus, "to_bus": ln.to_bus,
                   "reactance": _num(ln.reactance), "capacity": _num(ln.capacity)}
                  for ln in case.lines],
        "units": units,
        "wind_farms": [{"id": f.id, "bus": f.bus,
                        "w_min": [_num(v) for v in f.w_min],
                        "w_max": [_num(v) for v in f.w_max],
                        "forecast": [_num(v) for v in f.forecast]}
                       for f in case.wind_farms],
        "load": {str(b): [_num(v) for v in s] for b, s in sorted(case.load.items())},
        "time_grid": {"n_periods": case.time_grid.n_periods,
                      "period_length": _num(case.time_grid.period_length)},
    }


def serialize_case(case: SystemCase) -> str:
    """Inverse of :func:`load_case` for valid cases."""
    return json.dumps(case_to_dict(case), indent=2) + "\n"


# ---------------------------------------------------------------------------
# DC network

def _check_connected(case: SystemCase) -> None:
    adj = {b: [] for b in case.bus_ids}
    for ln in case.lines:
        adj[ln.from_bus].append(ln.to_bus)
        adj[ln.to_bus].append(ln.from_bus)
    start = case.slack_bus
    seen = {start}
    queue = deque([start])
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    missing = sorted(set(adj) - seen)
    if missing:
        raise NetworkError(f"network is disconnected: buses {missing} "
                           f"unreachable from slack bus {start}")


def compute_ptdf(case: SystemCase) -> np.ndarray:
    """Injection shift factors of shape (n_lines, n_buses).

    Entry ``[l, b]`` is the flow on line ``l`` (from -> to, MW) per MW
    injected at bus ``b`` and withdrawn at the slack bus.
    """
    _check_connected(case)
    idx = case.bus_index()
    nb, nl = len(case.buses), len(case.lines)
    if nl == 0:
        return np.zeros((0, nb))
    incidence = np.zeros((nl, nb))
    for k, ln in enumerate(case.lines):
        incidence[k, idx[ln.from_bus]] = 1.0
        incidence[k, idx[ln.to_bus]] = -1.0
    b = 1.0 / np.array([ln.reactance for ln in case.lines])
    bf = b[:, None] * incidence
    bbus = incidence.T @ bf

    keep = [k for k in range(nb) if k != idx[case.slack_bus]]
    reduced = bbus[np.ix_(keep, keep)]
    cond = np.linalg.cond(reduced) if keep else 1.0
    if not np.isfinite(cond) or cond > 1e14:
        raise NetworkError(f"singular susceptance matrix (condition {cond:.3g})")
    ptdf = np.zeros((nl, nb))
    if keep:
        ptdf[:, keep] = bf[:, keep] @ np.linalg.inv(reduced)
    return ptdf
