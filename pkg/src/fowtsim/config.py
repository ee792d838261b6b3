"""Run configuration: strict YAML loading, defaults, serialisation and hashing."""

import dataclasses
import hashlib
import logging
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .control import GspiConfig, RiseConfig
from .errors import InvalidParameters, MissingFile, ParseError, UnknownKey

log = logging.getLogger(__name__)

CONTROLLER_TYPES = {"none": None, "gspi": GspiConfig, "rise": RiseConfig}


@dataclass(frozen=True)
class WindConfig:
    mode: str = "constant"          # constant | spectral | file-series
    mean: float = 18.0              # m/s
    ti: float = 0.10                # turbulence intensity
    file: Optional[str] = None
    length_scale: float = 340.2     # Kaimal integral scale, m
    sample_dt: float = 0.05         # s

    def validate(self):
        if self.mode not in ("constant", "spectral", "file-series"):
            raise InvalidParameters(f"wind.mode must be constant, spectral or file-series, not {self.mode!r}")
        if self.mode == "file-series" and not self.file:
            raise InvalidParameters("wind.file is required for file-series wind")
        if self.mode == "spectral" and not (self.mean > 0 and self.ti >= 0):
            raise InvalidParameters("spectral wind needs mean > 0 and ti >= 0")


@dataclass(frozen=True)
class WaveConfig:
    H_s: float = 0.0                # m; zero means calm water
    T_p: float = 10.0               # s
    direction_deg: float = 0.0
    phase: float = 0.0              # rad
    water_depth: Optional[float] = None


@dataclass(frozen=True)
class InitialConfig:
    mode: str = "state"             # state | trim
    r: tuple = (0.0, 0.0, 0.0)      # m
    theta_deg: tuple = (0.0, 0.0, 0.0)
    v: tuple = (0.0, 0.0, 0.0)      # m/s, body frame
    omega: tuple = (0.0, 0.0, 0.0)  # rad/s, body frame
    Omega_rpm: float = 12.1

    def validate(self):
        if self.mode not in ("state", "trim"):
            raise InvalidParameters(f"initial.mode must be state or trim, not {self.mode!r}")
        for name in ("r", "theta_deg", "v", "omega"):
            if len(getattr(self, name)) != 3:
                raise InvalidParameters(f"initial.{name} needs three entries")


@dataclass(frozen=True)
class ControllerSpec:
    type: str = "none"
    gains: dict = field(default_factory=dict)

    def validate(self):
        if self.type not in CONTROLLER_TYPES:
            raise InvalidParameters(f"controller type must be one of {sorted(CONTROLLER_TYPES)}")
        cls = CONTROLLER_TYPES[self.type]
        known = {f.name for f in dataclasses.fields(cls)} if cls else set()
        for k in self.gains:
            if k not in known:
                raise UnknownKey(k, f"controllers[{self.type}].gains")
        if cls:
            cls(**self.gains)

    def build(self):
        cls = CONTROLLER_TYPES[self.type]
        return cls(**self.gains) if cls else None


@dataclass(frozen=True)
class LimitsConfig:
    beta_min_deg: float = 0.0
    beta_max_deg: float = 90.0
    rate_max_deg: float = 8.0


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    channels: Optional[tuple] = None    # None writes every channel
    record_every: int = 4


@dataclass(frozen=True)
class RunConfig:
    duration: float
    params: str = "reference"
    name: str = "run"
    seed: int = 1
    dt: float = 0.0125
    beta0_deg: float = 0.0
    trim_seconds: float = 100.0
    wind: WindConfig = field(default_factory=WindConfig)
    wave: WaveConfig = field(default_factory=WaveConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    controllers: tuple = (ControllerSpec(),)
    limits: LimitsConfig = field(default_factory=LimitsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = field(default=".", compare=False)

    def validate(self):
        if not self.duration > 0:
            raise InvalidParameters("duration must be positive")
        if not self.dt > 0 or self.dt > self.duration:
            raise InvalidParameters("dt must be positive and not exceed the duration")
        if self.seed < 0:
            raise InvalidParameters("seed must be a non-negative integer")
        if self.output.record_every < 1:
            raise InvalidParameters("output.record_every must be >= 1")
        self.wind.validate()
        self.initial.validate()
        if not self.controllers:
            raise InvalidParameters("at least one controller entry is required")
        for c in self.controllers:
            c.validate()
        names = [c.type for c in self.controllers]
        if len(set(names)) != len(names):
            raise InvalidParameters("controller types must be unique within a run")
        self.resolve(self.params_path())
        if self.wind.mode == "file-series":
            self.resolve(self.wind.file)
        return self

    def resolve(self, path):
        """Absolute path of a file referenced by the config; MissingFile if absent."""
        if path is None:
            return None
        p = Path(path)
        if not p.is_absolute():
            p = Path(self.base_dir) / p
        if not p.is_file():
            raise MissingFile(f"referenced file not found: {p}")
        return p

    def params_path(self):
        if self.params == "reference":
            from .params import reference_params_path
            return str(reference_params_path())
        return self.params

    def with_(self, **kw):
        return dataclasses.replace(self, **kw)


# ---------------------------------------------------------------- building

def _convert(tp, value, where):
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        return None if value is None else _convert(args[0], value, where)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, where)
    if tp is tuple:
        if not isinstance(value, (list, tuple)):
            raise ParseError(f"'{where}' must be a list")
        return tuple(value)
    if tp is dict:
        if not isinstance(value, dict):
            raise ParseError(f"'{where}' must be a mapping")
        return dict(value)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"'{where}' must be a number, got {value!r}")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"'{where}' must be an integer, got {value!r}")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ParseError(f"'{where}' must be a string, got {value!r}")
        return value
    return value


def _build(cls, doc, where=""):
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError(f"'{where or 'config'}' must be a mapping")
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls) if f.name != "base_dir"}
    for key in doc:
        if key not in fields:
            raise UnknownKey(key, where or "config")
    kw = {}
    for name, f in fields.items():
        path = f"{where}.{name}" if where else name
        if name in doc:
            if cls is RunConfig and name == "controllers":
                kw[name] = _controllers(doc[name], path)
            else:
                kw[name] = _convert(hints[name], doc[name], path)
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ParseError(f"missing required key '{path}'")
        else:
            log.info("default applied: %s", path)
    return cls(**kw)


def _controllers(value, where):
    if isinstance(value, (str, dict)):
        value = [value]
    if not isinstance(value, list):
        raise ParseError(f"'{where}' must be a list of controller entries")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, str):
            item = {"type": item}
        out.append(_build(ControllerSpec, item, f"{where}[{i}]"))
    return tuple(out)


def config_from_dict(doc, base_dir="."):
    cfg = _build(RunConfig, doc)
    return dataclasses.replace(cfg, base_dir=str(base_dir)).validate()


def load_config(path):
    """Parse, default and validate a YAML run configuration."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"config not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        at = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{path}{at}: {getattr(exc, 'problem', exc)}") from exc
    return config_from_dict(doc, path.parent)


# ---------------------------------------------------------------- output

def config_to_dict(cfg):
    def plain(v):
        if dataclasses.is_dataclass(v):
            return {f.name: plain(getattr(v, f.name)) for f in dataclasses.fields(v) if f.name != "base_dir"}
        if isinstance(v, (list, tuple)):
            return [plain(x) for x in v]
        if isinstance(v, dict):
            return {k: plain(x) for k, x in v.items()}
        return v
    return plain(cfg)


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None)


def config_hash(cfg):
    """Short SHA-256 of the canonical serialisation."""
    text = yaml.safe_dump(config_to_dict(cfg), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]
