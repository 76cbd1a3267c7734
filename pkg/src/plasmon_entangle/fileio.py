"""Scenario documents, green-table files and result writers.

Scenarios are YAML documents with four sections: ``provider``, ``qubits``,
``pump`` (optional) and ``run``. Dimensional values carry their unit in the
string, e.g. ``"637.5 nm"``, ``"500 THz"``, ``"30 D"``, ``"1 ueV"``,
``"0.3 gamma_aa"``.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .errors import ParseError, ValidationError
from .greens import TabulatedGreenSet
from .units import DEBYE, to_rad_s

PROVIDER_KINDS = ("free_space", "infinite_guide", "finite_guide", "slotted", "tabulated")
RUN_MODES = ("rates_sweep", "transient", "steady", "separation_sweep", "pump_sweep")
REGIMES = ("symmetric", "antisymmetric", "asymmetric", "custom")
GEOMETRIES = ("anchored", "centered", "scaled")

_LENGTH_UNITS = {"m": 1.0, "nm": 1e-9, "um": 1e-6, "μm": 1e-6, "µm": 1e-6}
_FREQ_UNITS = {"rad/s": 1.0, "THz": 2.0 * math.pi * 1e12, "Hz": 2.0 * math.pi}
_DIPOLE_UNITS = {"D": DEBYE, "C m": 1.0, "C*m": 1.0}
_ENERGY_RATE = ("ueV", "μeV", "µeV", "rad/s")


@dataclass(frozen=True)
class Scaled:
    """Rate whose meaning may depend on context: ``rad/s``, ``gamma0`` or ``gamma_aa``."""

    value: float
    unit: str

    def resolve(self, gamma0: float | None = None, gamma_aa: float | None = None) -> float:
        if self.unit == "rad/s":
            return self.value
        if self.unit == "gamma0":
            if gamma0 is None:
                raise ValidationError("a 'gamma0' quantity needs the free-space rate")
            return self.value * gamma0
        if gamma_aa is None:
            raise ValidationError("a 'gamma_aa' quantity needs the emitter decay rate")
        return self.value * gamma_aa

    def __str__(self) -> str:
        return f"{self.value!r} {self.unit}"


@dataclass(frozen=True)
class SlotSpec:
    position: float
    r: complex
    t: complex


@dataclass(frozen=True)
class ProviderSpec:
    kind: str
    lambda_spp: float | None = None
    prop_length: float | None = None
    gamma_pl: Scaled | None = None
    length: float | None = None
    r_end: complex | None = None
    slots: tuple[SlotSpec, ...] = ()
    table: str | None = None
    include_free_space: bool = True


@dataclass(frozen=True)
class QubitSpec:
    dipole: float
    frequency: float
    orientation: tuple[float, float, float] = (1.0, 0.0, 0.0)
    z_a: float | None = None
    z_b: float | None = None
    site_a: str | None = None
    site_b: str | None = None
    dephasing: Scaled = Scaled(0.0, "rad/s")


@dataclass(frozen=True)
class PumpSpec:
    regime: str
    rabi: Scaled
    rabi_b: Scaled | None = None
    detuning: Scaled = Scaled(0.0, "gamma_aa")


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunSpec:
    mode: str
    horizon: float
    samples: int = 501
    sweep: SweepSpec | None = None
    regimes: tuple[str, ...] = ()
    geometry: str = "anchored"
    end_inset: float = 0.0
    name: str | None = None


@dataclass(frozen=True)
class Scenario:
    provider: ProviderSpec
    qubits: QubitSpec
    run: RunSpec
    pump: PumpSpec | None = None


# --------------------------------------------------------------------------- YAML helpers


def _node_locations(node, prefix: str = "", out: dict | None = None) -> dict[str, tuple[int, int]]:
    """Map dotted key paths to 1-based (line, column) of their key in the document."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            out[path] = (key_node.start_mark.line + 1, key_node.start_mark.column + 1)
            _node_locations(value_node, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = f"{prefix}[{i}]"
            out[path] = (item.start_mark.line + 1, item.start_mark.column + 1)
            _node_locations(item, path, out)
    return out


class _Ctx:
    def __init__(self, locations: dict[str, tuple[int, int]]):
        self.locations = locations

    def fail(self, path: str, message: str):
        loc = self.locations.get(path)
        while loc is None and "." in path:
            path = path.rsplit(".", 1)[0]
            loc = self.locations.get(path)
        if loc is None:
            raise ValidationError(message)
        raise ParseError(message, *loc)


_NUM_UNIT = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def _quantity(ctx: _Ctx, path: str, raw: Any, units: dict[str, float] | Sequence[str]) -> tuple[float, str]:
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        ctx.fail(path, f"'{path}' must be a number with a unit, got {raw!r}")
    m = _NUM_UNIT.match(str(raw))
    if not m:
        ctx.fail(path, f"'{path}': cannot read quantity {raw!r}")
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        ctx.fail(path, f"'{path}' needs an explicit unit (one of {', '.join(units)})")
    if unit not in units:
        ctx.fail(path, f"'{path}': unit {unit!r} not allowed here (one of {', '.join(units)})")
    return value, unit


def _length(ctx, path, raw) -> float:
    value, unit = _quantity(ctx, path, raw, _LENGTH_UNITS)
    return value * _LENGTH_UNITS[unit]


def _scaled(ctx, path, raw, context_units: Sequence[str]) -> Scaled:
    value, unit = _quantity(ctx, path, raw, list(_ENERGY_RATE) + list(context_units))
    if unit in context_units:
        return Scaled(value, unit)
    return Scaled(to_rad_s(value, unit), "rad/s")


def _complex(ctx, path, raw) -> complex:
    if isinstance(raw, bool):
        ctx.fail(path, f"'{path}' must be a complex number")
    try:
        return complex(str(raw).replace(" ", ""))
    except ValueError:
        ctx.fail(path, f"'{path}': cannot read complex number {raw!r}")


def _number(ctx, path, raw, kind=float):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        ctx.fail(path, f"'{path}' must be a plain number, got {raw!r}")
    if kind is int and (not float(raw).is_integer()):
        ctx.fail(path, f"'{path}' must be an integer")
    return kind(raw)


def _section(ctx, raw: dict, name: str, allowed: Iterable[str], required: bool = True) -> dict:
    sec = raw.get(name)
    if sec is None:
        if required:
            ctx.fail(name, f"missing section '{name}'")
        return {}
    if not isinstance(sec, dict):
        ctx.fail(name, f"section '{name}' must be a mapping")
    allowed = set(allowed)
    for key in sec:
        if key not in allowed:
            ctx.fail(f"{name}.{key}", f"unknown key '{name}.{key}'")
    return sec


def _require(ctx, sec: dict, section: str, key: str):
    if key not in sec:
        ctx.fail(section, f"missing required key '{section}.{key}'")
    return sec[key]


# --------------------------------------------------------------------------- scenario parsing

_PROVIDER_KEYS = {
    "free_space": {"kind", "include_free_space"},
    "infinite_guide": {"kind", "lambda_spp", "prop_length", "gamma_pl", "include_free_space"},
    "finite_guide": {"kind", "lambda_spp", "prop_length", "gamma_pl", "length", "r_end", "include_free_space"},
    "slotted": {"kind", "lambda_spp", "prop_length", "gamma_pl", "length", "r_end", "slots", "include_free_space"},
    "tabulated": {"kind", "table", "include_free_space"},
}
_QUBIT_KEYS = {"dipole", "frequency", "orientation", "z_a", "z_b", "site_a", "site_b", "dephasing"}
_PUMP_KEYS = {"regime", "rabi", "rabi_b", "detuning"}
_RUN_KEYS = {"mode", "horizon", "samples", "sweep", "regimes", "geometry", "end_inset", "name"}


def _parse_provider(ctx, raw) -> ProviderSpec:
    sec = raw.get("provider")
    if not isinstance(sec, dict):
        ctx.fail("provider", "missing or malformed section 'provider'")
    kind = _require(ctx, sec, "provider", "kind")
    if kind not in PROVIDER_KINDS:
        ctx.fail("provider.kind", f"unknown provider kind {kind!r} (one of {', '.join(PROVIDER_KINDS)})")
    sec = _section(ctx, raw, "provider", _PROVIDER_KEYS[kind])
    kw: dict[str, Any] = {"kind": kind}
    if "include_free_space" in sec:
        if not isinstance(sec["include_free_space"], bool):
            ctx.fail("provider.include_free_space", "'provider.include_free_space' must be true or false")
        kw["include_free_space"] = sec["include_free_space"]
    if kind in ("infinite_guide", "finite_guide", "slotted"):
        kw["lambda_spp"] = _length(ctx, "provider.lambda_spp", _require(ctx, sec, "provider", "lambda_spp"))
        kw["prop_length"] = _length(ctx, "provider.prop_length", _require(ctx, sec, "provider", "prop_length"))
        kw["gamma_pl"] = _scaled(ctx, "provider.gamma_pl", _require(ctx, sec, "provider", "gamma_pl"), ["gamma0"])
    if kind == "finite_guide":
        kw["length"] = _length(ctx, "provider.length", _require(ctx, sec, "provider", "length"))
    if kind in ("finite_guide", "slotted"):
        if "length" in sec:
            kw["length"] = _length(ctx, "provider.length", sec["length"])
        if "r_end" in sec:
            if "length" not in sec:
                ctx.fail("provider.r_end", "'provider.r_end' only applies to guides with a 'length'")
            kw["r_end"] = _complex(ctx, "provider.r_end", sec["r_end"])
    if kind == "slotted":
        slots_raw = _require(ctx, sec, "provider", "slots")
        if not isinstance(slots_raw, list):
            ctx.fail("provider.slots", "'provider.slots' must be a list")
        slots = []
        for i, item in enumerate(slots_raw):
            path = f"provider.slots[{i}]"
            if not isinstance(item, dict):
                ctx.fail(path, f"'{path}' must be a mapping")
            for key in item:
                if key not in ("position", "r", "t"):
                    ctx.fail(f"{path}.{key}", f"unknown key '{path}.{key}'")
            slots.append(SlotSpec(
                _length(ctx, f"{path}.position", _require(ctx, item, path, "position")),
                _complex(ctx, f"{path}.r", item.get("r", "0.3j")),
                _complex(ctx, f"{path}.t", item.get("t", "0.9")),
            ))
        kw["slots"] = tuple(slots)
    if kind == "tabulated":
        table = _require(ctx, sec, "provider", "table")
        if not isinstance(table, str):
            ctx.fail("provider.table", "'provider.table' must be a file path")
        kw["table"] = table
    return ProviderSpec(**kw)


def _parse_qubits(ctx, raw, kind: str) -> QubitSpec:
    sec = _section(ctx, raw, "qubits", _QUBIT_KEYS)
    kw: dict[str, Any] = {}
    value, unit = _quantity(ctx, "qubits.dipole", _require(ctx, sec, "qubits", "dipole"), _DIPOLE_UNITS)
    kw["dipole"] = value * _DIPOLE_UNITS[unit]
    if kw["dipole"] <= 0:
        ctx.fail("qubits.dipole", "'qubits.dipole' must be positive")
    value, unit = _quantity(ctx, "qubits.frequency", _require(ctx, sec, "qubits", "frequency"), _FREQ_UNITS)
    kw["frequency"] = value * _FREQ_UNITS[unit]
    if kw["frequency"] <= 0:
        ctx.fail("qubits.frequency", "'qubits.frequency' must be positive")
    if "orientation" in sec:
        o = sec["orientation"]
        if not (isinstance(o, list) and len(o) == 3 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in o)):
            ctx.fail("qubits.orientation", "'qubits.orientation' must be a list of three numbers")
        if not any(o):
            ctx.fail("qubits.orientation", "'qubits.orientation' must be non-zero")
        kw["orientation"] = tuple(float(x) for x in o)
    if kind == "tabulated":
        for key in ("z_a", "z_b"):
            if key in sec:
                ctx.fail(f"qubits.{key}", f"'qubits.{key}' does not apply to tabulated providers; use site labels")
        for key in ("site_a", "site_b"):
            label = _require(ctx, sec, "qubits", key)
            kw[key] = str(label)
    else:
        for key in ("site_a", "site_b"):
            if key in sec:
                ctx.fail(f"qubits.{key}", f"'qubits.{key}' only applies to tabulated providers")
        for key in ("z_a", "z_b"):
            kw[key] = _length(ctx, f"qubits.{key}", _require(ctx, sec, "qubits", key))
    if "dephasing" in sec:
        kw["dephasing"] = _scaled(ctx, "qubits.dephasing", sec["dephasing"], ["gamma0"])
        if kw["dephasing"].value < 0:
            ctx.fail("qubits.dephasing", "'qubits.dephasing' must be non-negative")
    return QubitSpec(**kw)


def _parse_pump(ctx, raw) -> PumpSpec | None:
    sec = _section(ctx, raw, "pump", _PUMP_KEYS, required=False)
    if not sec:
        return None
    regime = _require(ctx, sec, "pump", "regime")
    if regime not in REGIMES:
        ctx.fail("pump.regime", f"unknown pump regime {regime!r} (one of {', '.join(REGIMES)})")
    kw: dict[str, Any] = {"regime": regime}
    kw["rabi"] = _scaled(ctx, "pump.rabi", _require(ctx, sec, "pump", "rabi"), ["gamma_aa"])
    if regime == "custom":
        kw["rabi_b"] = _scaled(ctx, "pump.rabi_b", _require(ctx, sec, "pump", "rabi_b"), ["gamma_aa"])
    elif "rabi_b" in sec:
        ctx.fail("pump.rabi_b", "'pump.rabi_b' only applies to the custom regime")
    if "detuning" in sec:
        kw["detuning"] = _scaled(ctx, "pump.detuning", sec["detuning"], ["gamma_aa"])
    return PumpSpec(**kw)


def _parse_run(ctx, raw, pump: PumpSpec | None) -> RunSpec:
    sec = _section(ctx, raw, "run", _RUN_KEYS)
    mode = _require(ctx, sec, "run", "mode")
    if mode not in RUN_MODES:
        ctx.fail("run.mode", f"unknown run mode {mode!r} (one of {', '.join(RUN_MODES)})")
    kw: dict[str, Any] = {"mode": mode}
    kw["horizon"] = _number(ctx, "run.horizon", sec.get("horizon", 50.0 if mode == "steady" else 10.0))
    if kw["horizon"] <= 0:
        ctx.fail("run.horizon", "'run.horizon' (in units of 1/gamma_aa) must be positive")
    if "samples" in sec:
        kw["samples"] = _number(ctx, "run.samples", sec["samples"], int)
        if kw["samples"] < 2:
            ctx.fail("run.samples", "'run.samples' must be at least 2")
    sweeping = mode in ("rates_sweep", "separation_sweep", "pump_sweep")
    if sweeping:
        sw = _require(ctx, sec, "run", "sweep")
        if not isinstance(sw, dict):
            ctx.fail("run.sweep", "'run.sweep' must be a mapping with start, stop, count")
        for key in sw:
            if key not in ("start", "stop", "count"):
                ctx.fail(f"run.sweep.{key}", f"unknown key 'run.sweep.{key}'")
        start = _number(ctx, "run.sweep.start", _require(ctx, sw, "run.sweep", "start"))
        stop = _number(ctx, "run.sweep.stop", _require(ctx, sw, "run.sweep", "stop"))
        count = _number(ctx, "run.sweep.count", _require(ctx, sw, "run.sweep", "count"), int)
        if not stop > start:
            ctx.fail("run.sweep", f"sweep range is empty or reversed: stop {stop} <= start {start}")
        if count < 2:
            ctx.fail("run.sweep.count", "'run.sweep.count' must be at least 2")
        kw["sweep"] = SweepSpec(start, stop, count)
    elif "sweep" in sec:
        ctx.fail("run.sweep", f"'run.sweep' does not apply to mode {mode!r}")
    if "regimes" in sec:
        if mode != "separation_sweep":
            ctx.fail("run.regimes", "'run.regimes' only applies to separation sweeps")
        regs = sec["regimes"]
        if not isinstance(regs, list) or not regs:
            ctx.fail("run.regimes", "'run.regimes' must be a non-empty list")
        for r in regs:
            if r not in ("symmetric", "antisymmetric", "asymmetric"):
                ctx.fail("run.regimes", f"unknown regime {r!r} in 'run.regimes'")
        kw["regimes"] = tuple(regs)
    if "geometry" in sec:
        if sec["geometry"] not in GEOMETRIES:
            ctx.fail("run.geometry", f"unknown geometry {sec['geometry']!r} (one of {', '.join(GEOMETRIES)})")
        kw["geometry"] = sec["geometry"]
    if "end_inset" in sec:
        kw["end_inset"] = _length(ctx, "run.end_inset", sec["end_inset"])
    if "name" in sec:
        name = str(sec["name"])
        if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
            ctx.fail("run.name", "'run.name' may only contain letters, digits, '_', '-' and '.'")
        kw["name"] = name
    if mode in ("steady", "separation_sweep", "pump_sweep") and pump is None:
        ctx.fail("run.mode", f"mode {mode!r} needs a 'pump' section")
    return RunSpec(**kw)


def apply_overrides(raw: dict, overrides: Sequence[str]) -> dict:
    """Apply ``section.key=value`` overrides to a raw scenario mapping (values are YAML)."""
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override {item!r} is not of the form key=value")
        path, text = item.split("=", 1)
        keys = path.strip().split(".")
        if len(keys) < 2 or not all(keys):
            raise ValidationError(f"override key {path!r} must be 'section.key'")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ValidationError(f"override {item!r}: value is not valid YAML ({exc})") from None
        node = raw
        for k in keys[:-1]:
            if not isinstance(node.get(k, {}), dict):
                raise ValidationError(f"override {path!r}: '{k}' is not a section")
            node = node.setdefault(k, {})
        node[keys[-1]] = value
    return raw


def parse_scenario(text: str, overrides: Sequence[str] = ()) -> Scenario:
    """Parse and validate a scenario document.

    Overrides are applied to the raw document before validation, so
    ``--set pump.rabi="0.5 gamma_aa"`` is equivalent to editing the file.
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(str(exc.problem or exc), mark.line + 1 if mark else None,
                         mark.column + 1 if mark else None) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError("scenario must be a mapping of sections", 1, 1)
    ctx = _Ctx(_node_locations(node) if node is not None else {})
    raw = apply_overrides(raw, overrides)
    for key in raw:
        if key not in ("provider", "qubits", "pump", "run"):
            ctx.fail(str(key), f"unknown section '{key}'")
    provider = _parse_provider(ctx, raw)
    qubits = _parse_qubits(ctx, raw, provider.kind)
    pump = _parse_pump(ctx, raw)
    run = _parse_run(ctx, raw, pump)
    return Scenario(provider, qubits, run, pump)


def load_scenario(path: str | Path, overrides: Sequence[str] = ()) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"), overrides)


def scenario_to_dict(s: Scenario) -> dict:
    """Plain mapping that :func:`parse_scenario` reads back to an equal scenario."""
    p, q, r = s.provider, s.qubits, s.run
    prov: dict[str, Any] = {"kind": p.kind, "include_free_space": p.include_free_space}
    for name in ("lambda_spp", "prop_length", "length"):
        val = getattr(p, name)
        if val is not None:
            prov[name] = f"{val!r} m"
    if p.gamma_pl is not None:
        prov["gamma_pl"] = str(p.gamma_pl)
    if p.r_end is not None:
        prov["r_end"] = repr(complex(p.r_end))
    if p.kind == "slotted":
        prov["slots"] = [{"position": f"{sl.position!r} m", "r": repr(complex(sl.r)), "t": repr(complex(sl.t))}
                         for sl in p.slots]
    if p.table is not None:
        prov["table"] = p.table
    qub: dict[str, Any] = {
        "dipole": f"{q.dipole!r} C m",
        "frequency": f"{q.frequency!r} rad/s",
        "orientation": list(q.orientation),
        "dephasing": str(q.dephasing),
    }
    for name in ("z_a", "z_b"):
        if getattr(q, name) is not None:
            qub[name] = f"{getattr(q, name)!r} m"
    for name in ("site_a", "site_b"):
        if getattr(q, name) is not None:
            qub[name] = getattr(q, name)
    run: dict[str, Any] = {"mode": r.mode, "horizon": r.horizon, "samples": r.samples,
                           "geometry": r.geometry, "end_inset": f"{r.end_inset!r} m"}
    if r.sweep is not None:
        run["sweep"] = {"start": r.sweep.start, "stop": r.sweep.stop, "count": r.sweep.count}
    if r.regimes:
        run["regimes"] = list(r.regimes)
    if r.name is not None:
        run["name"] = r.name
    out: dict[str, Any] = {"provider": prov, "qubits": qub}
    if s.pump is not None:
        pump: dict[str, Any] = {"regime": s.pump.regime, "rabi": str(s.pump.rabi), "detuning": str(s.pump.detuning)}
        if s.pump.rabi_b is not None:
            pump["rabi_b"] = str(s.pump.rabi_b)
        out["pump"] = pump
    out["run"] = run
    return out


def serialize_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, allow_unicode=True)


# --------------------------------------------------------------------------- green tables

GREEN_TABLE_HEADER = "green-table v1"


def load_green_table(text: str) -> TabulatedGreenSet:
    """Parse a ``green-table v1`` document.

    Layout: the header line, then ``# key: value`` metadata, ``site <label> x y z``
    declarations, and finally ``omega, site_i, site_j, re_J, im_J`` data lines
    (all in SI units: rad/s and metres).
    """
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines) or lines[idx].strip() != GREEN_TABLE_HEADER:
        raise ParseError(f"missing '{GREEN_TABLE_HEADER}' header", idx + 1)
    metadata: dict[str, str] = {}
    sites: dict[str, tuple[float, float, float]] = {}
    data: dict[tuple[float, str, str], complex] = {}
    seen_data = False
    for lineno, line in enumerate(lines[idx + 1:], start=idx + 2):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if ":" in body:
                key, value = body.split(":", 1)
                metadata[key.strip()] = value.strip()
            continue
        if s.startswith("site ") or s == "site":
            if seen_data:
                raise ParseError("site declarations must precede data lines", lineno)
            parts = s.split()
            if len(parts) != 5:
                raise ParseError("site line must read 'site <label> <x_m> <y_m> <z_m>'", lineno)
            label = parts[1]
            if label in sites:
                raise ParseError(f"site {label!r} declared twice", lineno)
            try:
                sites[label] = tuple(float(x) for x in parts[2:])
            except ValueError:
                raise ParseError("site coordinates must be numbers", lineno) from None
            continue
        seen_data = True
        parts = [x.strip() for x in s.split(",")]
        if len(parts) != 5:
            raise ParseError("data line must have 5 comma-separated fields: omega, site_i, site_j, re_J, im_J", lineno)
        try:
            omega = float(parts[0])
            value = complex(float(parts[3]), float(parts[4]))
        except ValueError:
            raise ParseError("non-numeric omega or J value", lineno) from None
        i, j = parts[1], parts[2]
        for lab in (i, j):
            if lab not in sites:
                raise ParseError(f"data line references undeclared site {lab!r}", lineno)
        if (omega, i, j) in data:
            raise ParseError(f"duplicate entry for omega={parts[0]}, pair ({i}, {j}); ambiguous", lineno)
        data[omega, i, j] = value
    if not sites:
        raise ValidationError("green table declares no sites")
    freqs = np.array(sorted({key[0] for key in data}))
    entries = {}
    for i in sites:
        for j in sites:
            vals = []
            for w in freqs:
                if (w, i, j) not in data:
                    raise ValidationError(f"green table misses pair ({i}, {j}) at omega = {w!r} rad/s")
                vals.append(data[w, i, j])
            entries[i, j] = np.array(vals, dtype=complex)
    return TabulatedGreenSet(sites, freqs, entries, metadata)


def dump_green_table(table: TabulatedGreenSet) -> str:
    out = [GREEN_TABLE_HEADER]
    for key, value in table.metadata.items():
        out.append(f"# {key}: {value}")
    for label, pos in table.sites.items():
        out.append("site " + " ".join([label] + [repr(float(x)) for x in pos]))
    for k, w in enumerate(table.frequencies):
        for (i, j), vals in table.entries.items():
            v = complex(vals[k])
            out.append(f"{float(w)!r}, {i}, {j}, {v.real!r}, {v.imag!r}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------- results


def format_number(x: float) -> str:
    return f"{float(x):.12g}"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


@dataclass
class RunOutput:
    """Files produced by one run: CSV tables plus a JSON-able summary."""

    name: str
    tables: dict[str, tuple[tuple[str, ...], np.ndarray]] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    def add_table(self, stem: str, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
        self.tables[stem] = (tuple(header), np.column_stack([np.asarray(c, dtype=float) for c in columns]))


def plot_script(out: RunOutput) -> str:
    lines = [
        '"""Plot the CSV tables written next to this script."""',
        "import csv",
        "from pathlib import Path",
        "",
        "import matplotlib.pyplot as plt",
        "",
        "HERE = Path(__file__).resolve().parent",
        f"TABLES = {sorted(out.tables)!r}",
        "",
        "fig, axes = plt.subplots(len(TABLES), 1, figsize=(6, 3.2 * len(TABLES)), squeeze=False)",
        "for ax, stem in zip(axes[:, 0], TABLES):",
        "    with open(HERE / f'{stem}.csv', newline='') as fh:",
        "        rows = list(csv.reader(fh))",
        "    header, body = rows[0], [[float(v) for v in r] for r in rows[1:]]",
        "    x = [r[0] for r in body]",
        "    for col in range(1, len(header)):",
        "        ax.plot(x, [r[col] for r in body], label=header[col])",
        "    ax.set_xlabel(header[0])",
        "    ax.set_title(stem)",
        "    ax.legend()",
        "fig.tight_layout()",
        f"fig.savefig(HERE / {out.name + '.png'!r}, dpi=150)",
        "",
    ]
    return "\n".join(lines)


def write_results(out: RunOutput, destination: str | Path, plot: bool = False) -> list[Path]:
    """Write every table as ``<stem>.csv`` plus ``<name>_summary.json`` into ``destination``."""
    import json

    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {dest}: {exc}") from None
    written = []
    try:
        for stem in sorted(out.tables):
            header, data = out.tables[stem]
            path = dest / f"{stem}.csv"
            path.write_text(csv_text(header, data), encoding="utf-8")
            written.append(path)
        path = dest / f"{out.name}_summary.json"
        path.write_text(json.dumps(out.summary, indent=2, sort_keys=True, allow_nan=True) + "\n", encoding="utf-8")
        written.append(path)
        if plot:
            path = dest / f"plot_{out.name}.py"
            path.write_text(plot_script(out), encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise ValidationError(f"destination {dest} is not writable: {exc}") from None
    return written
