"""Run configuration: strict JSON loading, defaults and validation."""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .errors import ConfigError

__all__ = [
    "WavepacketConfig",
    "MediumConfig",
    "DynamicsConfig",
    "DephasingConfig",
    "TrialsConfig",
    "RepeatabilityConfig",
    "DissipationFreeConfig",
    "SpectralBiasConfig",
    "RarifiedConfig",
    "TransverseScaleConfig",
    "ExperimentsConfig",
    "RunConfig",
    "load_config",
    "parse_config",
    "preset_path",
    "PRESETS",
]


@dataclass
class WavepacketConfig:
    k0: float = 10.0
    sigma_k: float = 0.5
    grid_points: int = 257
    grid_span: float | None = None  # default: 16 sigma_k
    dispersion: dict = field(default_factory=lambda: {"linear": 1.0})
    x0: float = 0.0

    def validate(self):
        _positive(self, "sigma_k", "grid_span")
        if self.grid_points < 2:
            raise ConfigError("grid_points must be >= 2", "wavepacket.grid_points")
        if not isinstance(self.dispersion, dict) or len(self.dispersion) != 1 or not set(
            self.dispersion
        ) <= {"linear", "quadratic"}:
            raise ConfigError(
                'dispersion must be {"linear": c} or {"quadratic": m}', "wavepacket.dispersion"
            )
        if not next(iter(self.dispersion.values())) > 0:
            raise ConfigError("dispersion parameter must be positive", "wavepacket.dispersion")

    @property
    def span(self) -> float:
        return self.grid_span if self.grid_span is not None else 16.0 * self.sigma_k


@dataclass
class MediumConfig:
    density: float = 200.0
    extent: list | None = None  # default: the packet's 99% support
    omega_center: float | None = None  # default: the packet carrier
    spread: float = 6.0
    frequency_law: str = "uniform"
    count_law: str = "poisson"
    count: int | None = None

    def validate(self):
        _positive(self, "density", "spread")
        _choice(self, "frequency_law", ("uniform", "gaussian"))
        _choice(self, "count_law", ("poisson", "fixed"))
        if self.count_law == "fixed" and (self.count is None or self.count < 1):
            raise ConfigError("fixed count law needs count >= 1", "medium.count")
        if self.extent is not None:
            ext = _extent_pairs(self.extent)
            if any(hi <= lo for lo, hi in ext):
                raise ConfigError("extent bounds must satisfy lo < hi", "medium.extent")


@dataclass
class DynamicsConfig:
    epsilon: float = 7e-4
    gamma: float = 1.0
    margins: list = field(default_factory=lambda: [10.0, 10.0])

    def validate(self):
        if self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative", "dynamics.epsilon")
        _positive(self, "gamma")
        if len(self.margins) != 2 or min(self.margins) < 1:
            raise ConfigError("margins must be two numbers >= 1", "dynamics.margins")


@dataclass
class DephasingConfig:
    g: float = 4e-8
    G: float | None = None  # default: gamma
    diffusion_variant: str = "normalized"
    window_semantics: str = "at_time"
    walk_dt: float | None = None  # default: tau_det / 200
    step_law: str = "gaussian"

    def validate(self):
        _positive(self, "g", "walk_dt")
        if self.G is not None and self.G < 0:
            raise ConfigError("G must be non-negative", "dephasing.G")
        _choice(self, "diffusion_variant", ("normalized", "as_written"))
        _choice(self, "window_semantics", ("at_time", "throughout"))
        _choice(self, "step_law", ("gaussian", "plus_minus"))


@dataclass
class TrialsConfig:
    n_trials: int = 300_000
    master_seed: int = 20240611
    medium_seed: int | None = None  # default: master_seed
    decision_mode: str = "closed_form"
    medium_mode: str = "fresh_per_trial"
    bins: int = 64

    def validate(self):
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1", "trials.n_trials")
        if self.master_seed < 0 or (self.medium_seed is not None and self.medium_seed < 0):
            raise ConfigError("seeds must be non-negative integers", "trials.master_seed")
        _choice(self, "decision_mode", ("closed_form", "walk"))
        _choice(self, "medium_mode", ("fresh_per_trial", "frozen"))
        if self.bins < 1:
            raise ConfigError("bins must be >= 1", "trials.bins")


@dataclass
class RepeatabilityConfig:
    n_trials: int = 20_000


@dataclass
class DissipationFreeConfig:
    n_trials: int = 100_000


@dataclass
class SpectralBiasConfig:
    n_trials: int = 100_000
    region: list = field(default_factory=lambda: [None, None])  # default: upper half of extent
    offset_bandwidths: float = 10.0


@dataclass
class RarifiedConfig:
    n_trials: int = 4_000
    densities: list = field(
        default_factory=lambda: [1000.0, 300.0, 100.0, 30.0, 10.0, 3.0, 2.0, 1.0, 0.6]
    )


@dataclass
class TransverseScaleConfig:
    n_trials: int = 400
    epsilon: float = 3.7e-3
    widths: list = field(
        default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    )


@dataclass
class ExperimentsConfig:
    repeatability: RepeatabilityConfig = field(default_factory=RepeatabilityConfig)
    dissipation_free: DissipationFreeConfig = field(default_factory=DissipationFreeConfig)
    spectral_bias: SpectralBiasConfig = field(default_factory=SpectralBiasConfig)
    rarified: RarifiedConfig = field(default_factory=RarifiedConfig)
    transverse_scale: TransverseScaleConfig = field(default_factory=TransverseScaleConfig)

    def validate(self):
        for sub in fields(self):
            cfg = getattr(self, sub.name)
            if cfg.n_trials < 1:
                raise ConfigError("n_trials must be >= 1", f"experiments.{sub.name}.n_trials")
        if not self.rarified.densities or min(self.rarified.densities) <= 0:
            raise ConfigError("densities must be positive", "experiments.rarified.densities")
        ts = self.transverse_scale
        if len(ts.widths) < 2 or min(ts.widths) <= 0:
            raise ConfigError("need >= 2 positive widths", "experiments.transverse_scale.widths")
        if not ts.epsilon > 0:
            raise ConfigError("epsilon must be positive", "experiments.transverse_scale.epsilon")
        if len(self.spectral_bias.region) != 2:
            raise ConfigError("region must be [lo, hi]", "experiments.spectral_bias.region")


@dataclass
class RunConfig:
    wavepacket: WavepacketConfig = field(default_factory=WavepacketConfig)
    medium: MediumConfig = field(default_factory=MediumConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    dephasing: DephasingConfig = field(default_factory=DephasingConfig)
    trials: TrialsConfig = field(default_factory=TrialsConfig)
    experiments: ExperimentsConfig = field(default_factory=ExperimentsConfig)
    output_dir: str = "out"

    def validate(self) -> "RunConfig":
        for section in (self.wavepacket, self.medium, self.dynamics, self.dephasing,
                        self.trials, self.experiments):
            section.validate()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **sections) -> "RunConfig":
        return dataclasses.replace(self, **sections)


PRESETS = ("born_default", "repeatability", "spectral_bias", "rarified", "transverse_scale")


def preset_path(name: str) -> Path:
    stem = name[:-5] if name.endswith(".json") else name
    if stem not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return Path(str(resources.files("borndetect") / "presets" / f"{stem}.json"))


def _positive(obj, *names):
    section = type(obj).__name__.replace("Config", "").lower()
    for name in names:
        val = getattr(obj, name)
        if val is not None and not val > 0:
            raise ConfigError(f"{name} must be positive", f"{section}.{name}")


def _choice(obj, name, options):
    section = type(obj).__name__.replace("Config", "").lower()
    if getattr(obj, name) not in options:
        raise ConfigError(
            f"{name} must be one of {', '.join(options)}", f"{section}.{name}"
        )


def _extent_pairs(extent):
    if len(extent) == 2 and all(isinstance(v, (int, float)) for v in extent):
        return [(float(extent[0]), float(extent[1]))]
    return [(float(lo), float(hi)) for lo, hi in extent]


def _key_line(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _coerce(value, default, path, text):
    """Check a leaf value against the type of its default."""
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("expected true/false", path, _key_line(text, path.rsplit(".", 1)[-1]))
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("expected an integer", path, _key_line(text, path.rsplit(".", 1)[-1]))
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("expected a number", path, _key_line(text, path.rsplit(".", 1)[-1]))
        return float(value)
    return value


_INT_FIELDS = {"grid_points", "count", "n_trials", "master_seed", "medium_seed", "bins"}
_FLOAT_OPTIONAL = {"grid_span", "omega_center", "G", "walk_dt"}


def _build(cls, data, path, text):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or None, _key_line(text, path.rsplit(".", 1)[-1]) if path else None)
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown key '{key}'", full, _key_line(text, key))
    default = cls()
    kwargs = {}
    for name, value in data.items():
        full = f"{path}.{name}" if path else name
        current = getattr(default, name)
        if dataclasses.is_dataclass(current):
            kwargs[name] = _build(type(current), value, full, text)
        elif name in _INT_FIELDS:
            kwargs[name] = _coerce(value, 0, full, text)
        elif name in _FLOAT_OPTIONAL:
            kwargs[name] = _coerce(value, 0.0, full, text)
        elif current is None or isinstance(current, (list, dict, str)):
            kwargs[name] = value
        else:
            kwargs[name] = _coerce(value, current, full, text)
    return cls(**kwargs)


def parse_config(data: dict, text: str | None = None) -> RunConfig:
    """Build and validate a :class:`RunConfig` from decoded JSON."""
    try:
        cfg = _build(RunConfig, data, "", text)
    except TypeError as exc:  # wrong container types inside dataclass ctors
        raise ConfigError(str(exc)) from exc
    try:
        return cfg.validate()
    except ConfigError as exc:
        if exc.line is None and exc.field:
            raise ConfigError(
                str(exc).rsplit(" (", 1)[0], exc.field, _key_line(text, exc.field.rsplit(".", 1)[-1])
            ) from None
        raise


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc.msg}", line=exc.lineno) from None
    return parse_config(data, text)
