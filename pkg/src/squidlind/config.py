"""JSON run configuration for the command-line driver.

Every section and key is optional; omitted values fall back to the defaults
below and are listed in ``RunConfig.defaults_applied``. Unknown keys are
rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import ParseError, ValidationError
from .lindblad import g_range_check
from .model import SINE_CONVENTIONS, TERMS, DeviceInputs


@dataclass
class DeviceConfig:
    josephson_energy_J: float = 6.693e-22
    capacitance_F: float = 5e-15
    inductance_H: float = 3e-10
    gamma_ratio: float = 0.05
    cutoff_ratio: float = 10.0
    sine_convention: str = "force"

    def inputs(self, g: float = 1.8, phi: float = 0.5) -> DeviceInputs:
        return DeviceInputs(self.josephson_energy_J, self.capacitance_F, self.inductance_H,
                            self.gamma_ratio, self.cutoff_ratio, g, phi)


@dataclass
class SpaceConfig:
    N: int = 128
    pad: int = 32


@dataclass
class PointConfig:
    phi: float = 0.5
    g: float = 1.8


@dataclass
class SweepConfig:
    phi_min: float = 0.0
    phi_max: float = 1.0
    phi_count: int = 41
    g: list = field(default_factory=lambda: [0.3, 1.0, 1.8, 3.0])
    g_min: float | None = None
    g_max: float | None = None
    g_count: int | None = None
    levels: int = 5
    include: list = field(default_factory=lambda: list(TERMS))
    fd_step: float = 1.0 / 400

    def phi_grid(self) -> np.ndarray:
        return np.linspace(self.phi_min, self.phi_max, self.phi_count)

    def g_grid(self) -> np.ndarray:
        if self.g_count is not None:
            return np.linspace(self.g_min, self.g_max, self.g_count)
        return np.asarray(self.g, dtype=float)


@dataclass
class DynamicsConfig:
    N: int = 32
    pad: int = 8
    dt: float = 1e-3
    steps: int = 10000
    stride: int = 1000
    initial: str = "coherent"
    alpha: float = 1.0
    n: int = 0
    rhs: str = "lindblad"
    snapshots: bool = False


@dataclass
class OutputConfig:
    directory: str = "out"
    prefix: str = ""


@dataclass
class RunConfig:
    device: DeviceConfig = field(default_factory=DeviceConfig)
    space: SpaceConfig = field(default_factory=SpaceConfig)
    point: PointConfig = field(default_factory=PointConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    defaults_applied: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("defaults_applied")
        d.pop("warnings")
        return d


SECTIONS = {
    "device": DeviceConfig,
    "space": SpaceConfig,
    "point": PointConfig,
    "sweep": SweepConfig,
    "dynamics": DynamicsConfig,
    "output": OutputConfig,
}


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _require(cond, name, constraint):
    if not cond:
        raise ValidationError(name, constraint)


def _coerce(section, name, value, default):
    if isinstance(default, bool):
        _require(isinstance(value, bool), name, "a boolean")
    elif isinstance(default, int) and not isinstance(default, bool):
        _require(_is_int(value), name, "an integer")
    elif isinstance(default, float) or (default is None and name in ("g_min", "g_max")):
        _require(_is_number(value), name, "a number")
        value = float(value)
    elif name == "g_count":
        _require(_is_int(value), name, "an integer")
    elif isinstance(default, str):
        _require(isinstance(value, str), name, "a string")
    elif isinstance(default, list):
        _require(isinstance(value, list), name, "a list")
    return value


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config", "a JSON object")
    cfg = RunConfig()
    for key in raw:
        if key not in SECTIONS:
            raise ValidationError(key, f"a known section ({', '.join(SECTIONS)})")
    for sname, cls in SECTIONS.items():
        given = raw.get(sname, {})
        if not isinstance(given, dict):
            raise ValidationError(sname, "a JSON object")
        section = getattr(cfg, sname)
        names = {f.name for f in fields(cls)}
        for key in given:
            if key not in names:
                raise ValidationError(f"{sname}.{key}", "a known key")
        for f in fields(cls):
            if f.name in given:
                setattr(section, f.name, _coerce(sname, f.name, given[f.name], getattr(section, f.name)))
            elif not (sname == "sweep" and f.name in ("g_min", "g_max", "g_count")):
                cfg.defaults_applied.append(f"{sname}.{f.name}")
    if "space" in raw and "N" in raw["space"] and "pad" not in raw["space"]:
        cfg.space.pad = cfg.space.N // 4
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> RunConfig:
    d = cfg.device
    _require(d.capacitance_F > 0, "capacitance_F", "> 0")
    _require(d.inductance_H > 0, "inductance_H", "> 0")
    _require(d.josephson_energy_J >= 0, "josephson_energy_J", ">= 0")
    _require(d.gamma_ratio >= 0, "gamma_ratio", ">= 0")
    _require(d.cutoff_ratio > 0, "cutoff_ratio", "> 0")
    _require(d.sine_convention in SINE_CONVENTIONS, "sine_convention", f"one of {SINE_CONVENTIONS}")

    _require(cfg.space.N >= 2, "N", ">= 2")
    _require(cfg.space.pad >= 0, "pad", ">= 0")

    s = cfg.sweep
    _require(s.phi_count >= 1, "phi_count", ">= 1")
    _require(s.phi_count == 1 or s.phi_max > s.phi_min, "phi_max", "> phi_min")
    if s.g_count is not None:
        _require(s.g_min is not None and s.g_max is not None, "g_min/g_max", "set when g_count is given")
        _require(s.g_count >= 1, "g_count", ">= 1")
        _require(s.g_count == 1 or s.g_max > s.g_min, "g_max", "> g_min")
    else:
        _require(len(s.g) >= 1 and all(_is_number(x) for x in s.g), "g", "a non-empty list of numbers")
        _require(all(b > a for a, b in zip(s.g, s.g[1:])), "g", "strictly increasing")
    _require(all(x >= 0 for x in s.g_grid()), "g", ">= 0")
    _require(s.levels >= 1, "levels", ">= 1")
    _require(s.levels <= cfg.space.N, "levels", "<= N")
    _require(all(t in TERMS for t in s.include), "include", f"a subset of {list(TERMS)}")
    _require(0 < s.fd_step <= 0.05, "fd_step", "in (0, 0.05]")

    _require(cfg.point.g >= 0, "point.g", ">= 0")

    dy = cfg.dynamics
    _require(dy.N >= 2, "dynamics.N", ">= 2")
    _require(dy.pad >= 0, "dynamics.pad", ">= 0")
    _require(dy.dt > 0, "dt", "> 0")
    _require(dy.steps >= 1, "steps", ">= 1")
    _require(dy.stride >= 0, "stride", ">= 0")
    _require(dy.initial in ("ground", "fock", "coherent"), "initial", "one of ground, fock, coherent")
    _require(dy.rhs in ("lindblad", "bm", "both"), "rhs", "one of lindblad, bm, both")
    _require(0 <= dy.n < dy.N, "dynamics.n", "in [0, N)")

    for g in list(s.g_grid()) + [cfg.point.g]:
        if g_range_check(g) == "outside":
            msg = f"GRangeWarning: g={g} outside [0.227, 4.40]; completion may not be PSD"
            if msg not in cfg.warnings:
                cfg.warnings.append(msg)
    return cfg


def parse_config(path) -> RunConfig:
    """Read and validate a JSON config file; ``None`` gives the defaults."""
    if path is None:
        return config_from_dict({})
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    return config_from_dict(raw)
