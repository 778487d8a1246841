"""Run configuration: one INI file with a section per concern, overridable
from the command line.

    [map]
    B = 0.5

    [trace]
    target = golden
    seed_a = 0.68, -0.23
    seed_b = 0.71, -0.23

Every key is optional; unknown sections or keys are rejected with the line
they appear on.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
import hashlib
import json
import math
from pathlib import Path

from .errors import ConfigError
from .orbit import ClassifyConfig
from .rotnum import GOLDEN_MEAN
from .tangent import AnalysisConfig
from .tracer import RhoEvalConfig, TraceConfig


@dataclass
class ScanSettings:
    m1_min: float = 0.0
    m1_max: float = 1.0
    m2_min: float = -0.6
    m2_max: float = 0.1
    n_m1: int = 50
    n_m2: int = 50
    seed_extent: float = 1.5
    seeds_per_axis: int = 3
    n_transient: int = 10_000
    n_keep: int = 10_000
    eps: float = 1e-6
    p_max: int = 100
    window: int = 200


@dataclass
class TraceSettings:
    target: float = GOLDEN_MEAN
    seed_a: tuple = (0.68, -0.23)
    seed_b: tuple = (0.71, -0.23)
    radius: float = 1e-3
    angle_step_deg: float = 10.0
    shrink: float = 0.5
    min_radius: float = 1e-6
    accept_tol: float = 1e-9
    value_tol: float = 1e-10
    param_tol: float = 1e-14
    max_iter: int = 100
    illinois: bool = True
    initial_direction_deg: float = 20.0
    max_points: int = 10_000
    field: str = "map"
    analyze: bool = True


@dataclass
class RotationSettings:
    n: int = 100_000
    n_transient: int = 10_000
    L: int = 3
    conv_tol: float = 1e-10


@dataclass
class AnalysisSettings:
    n_warmup: int = 1_000
    n_window: int = 100_000
    n_cooldown: int = 1_000
    coincidence_tol: float = 1e-3
    jitter: float = 1e-3


@dataclass
class RunConfig:
    B: float = 0.5
    seed: int = 0
    out: str = "out"
    m1: float = 0.0
    m2: float = 0.0
    scan: ScanSettings = field(default_factory=ScanSettings)
    trace: TraceSettings = field(default_factory=TraceSettings)
    rotation: RotationSettings = field(default_factory=RotationSettings)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)

    def validate(self):
        sc, tr = self.scan, self.trace
        if self.B == 0 or not math.isfinite(self.B):
            _bad("map.B", "B must be finite and nonzero")
        for key in ("n_m1", "n_m2", "seeds_per_axis", "p_max", "window"):
            if getattr(sc, key) < 1:
                _bad(f"scan.{key}", f"scan.{key} must be >= 1")
        if sc.n_keep < sc.window + sc.p_max:
            _bad("scan.n_keep", "scan.n_keep must be at least window + p_max")
        positives = {
            "scan.eps": sc.eps, "trace.radius": tr.radius, "trace.min_radius": tr.min_radius,
            "trace.accept_tol": tr.accept_tol, "trace.value_tol": tr.value_tol,
            "trace.param_tol": tr.param_tol, "trace.angle_step_deg": tr.angle_step_deg,
            "trace.max_points": tr.max_points, "trace.max_iter": tr.max_iter,
            "rotation.n": self.rotation.n, "rotation.conv_tol": self.rotation.conv_tol,
            "analysis.n_window": self.analysis.n_window,
            "analysis.coincidence_tol": self.analysis.coincidence_tol,
        }
        for name, v in positives.items():
            if not v > 0:
                _bad(name, f"{name} must be > 0 (got {v})")
        if tr.radius < tr.min_radius:
            _bad("trace.radius", "trace.radius must be >= trace.min_radius")
        if not 0 < tr.shrink < 1:
            _bad("trace.shrink", "trace.shrink must lie in (0, 1)")
        if tr.field not in ("map", "affine", "circular"):
            _bad("trace.field", f"trace.field must be map, affine or circular (got {tr.field!r})")
        if self.rotation.L < 2:
            _bad("rotation.L", "rotation.L must be >= 2")
        if self.rotation.n < 10 + self.rotation.L:
            _bad("rotation.n", "rotation.n is too small for a projection")
        return self

    # derived library configs

    def classify_config(self) -> ClassifyConfig:
        s = self.scan
        return ClassifyConfig(s.n_transient, s.n_keep, s.eps, s.p_max, s.window)

    def rho_config(self) -> RhoEvalConfig:
        r = self.rotation
        return RhoEvalConfig(B=self.B, n=r.n, n_transient=r.n_transient, L=r.L, conv_tol=r.conv_tol)

    def trace_config(self) -> TraceConfig:
        t = self.trace
        return TraceConfig(
            target=t.target, radius=t.radius, angle_step=math.radians(t.angle_step_deg),
            shrink=t.shrink, min_radius=t.min_radius, accept_tol=t.accept_tol,
            value_tol=t.value_tol, param_tol=t.param_tol, max_iter=t.max_iter,
            illinois=t.illinois, initial_direction=math.radians(t.initial_direction_deg),
            max_points=t.max_points)

    def analysis_config(self) -> AnalysisConfig:
        a = self.analysis
        return AnalysisConfig(a.n_warmup, a.n_window, a.n_cooldown, a.coincidence_tol,
                              a.jitter, self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """SHA-256 of the effective settings.

        The output directory and the step budget are left out so a finished
        trace can be extended in place.
        """
        d = self.to_dict()
        d.pop("out")
        d["trace"].pop("max_points")
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()


def _bad(key: str, message: str):
    err = ConfigError(message)
    err.key = key
    raise err


_TOP_KEYS = {"map": {"B": "B", "m1": "m1", "m2": "m2"},
             "run": {"seed": "seed", "out": "out"}}
_SECTIONS = {"scan": "scan", "trace": "trace", "rotation": "rotation", "analysis": "analysis"}


def _line_of(path: Path, section: str, key: str) -> int | None:
    current = None
    for i, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
        elif current == section and line.split("=", 1)[0].split(":", 1)[0].strip().lower() == key.lower():
            return i
    return None


def _section_line(path: Path, section: str) -> int | None:
    for i, raw in enumerate(path.read_text().splitlines(), 1):
        if raw.strip() == f"[{section}]":
            return i
    return None


def _convert(raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(float(raw)) if float(raw).is_integer() else int(raw)
    if isinstance(default, float):
        if raw.lower() in ("golden", "golden_mean"):
            return GOLDEN_MEAN
        return float(raw)
    if isinstance(default, tuple):
        parts = [float(x) for x in raw.replace(";", ",").split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected two comma-separated numbers, got {raw!r}")
        return tuple(parts)
    return raw


def load_config(path=None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg.validate()
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    for section in parser.sections():
        if section in _TOP_KEYS:
            target, names = cfg, _TOP_KEYS[section]
        elif section in _SECTIONS:
            target = getattr(cfg, _SECTIONS[section])
            names = {f.name: f.name for f in fields(target)}
        else:
            line = _section_line(path, section)
            raise ConfigError(f"{path}:{line}: unknown section [{section}]")
        for key, raw in parser.items(section):
            line = _line_of(path, section, key)
            where = f"{path}:{line}" if line else str(path)
            if key not in names:
                raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
            attr = names[key]
            try:
                setattr(target, attr, _convert(raw, getattr(target, attr)))
            except ValueError as e:
                raise ConfigError(f"{where}: bad value for {section}.{key}: {e}") from None
    try:
        return cfg.validate()
    except ConfigError as e:
        section, _, key = getattr(e, "key", ".").partition(".")
        line = _line_of(path, section, key) if key else None
        where = f"{path}:{line}" if line else str(path)
        raise ConfigError(f"{where}: {e}") from None


def apply_overrides(cfg: RunConfig, **kw) -> RunConfig:
    """Command-line overrides; ``None`` values are ignored."""
    mapping = {"b": ("B", None), "m1": ("m1", None), "m2": ("m2", None), "seed": ("seed", None),
               "out": ("out", None), "target_rho": ("target", "trace"), "n": ("n", "rotation"),
               "L": ("L", "rotation")}
    for k, v in kw.items():
        if v is None:
            continue
        attr, sect = mapping[k]
        if sect is None:
            setattr(cfg, attr, v)
        else:
            setattr(getattr(cfg, sect), attr, v)
    return cfg.validate()


def with_trace(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, trace=replace(cfg.trace, **changes))
