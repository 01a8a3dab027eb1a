"""Run configuration: ``key = value`` text files with ``#`` comments."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .apparatus import ApparatusParams
from .exceptions import ConfigError, DomainError

FORMATS = ("csv", "json")
MAX_PERIODS = 10 ** 6


@dataclass(frozen=True)
class RunConfig:
    seed: int = 20021
    periods: int = 100
    period_s: float = 1.0
    transmittance: float = 0.5
    mode_overlap: float = 0.992
    arm_phase_deg: float = 39.4
    eta1: float = 0.51
    eta2: float = 0.51
    pair_rate_hz: float = 25400.0
    dark_coinc_hz: float = 0.0
    dip_width_um: float = 60.0
    shoulder_delay_um: float = 200.0
    output_dir: str = "out"
    format: str = "csv"

    def __post_init__(self):
        if not 1 <= self.periods <= MAX_PERIODS:
            raise ConfigError(f"periods must lie in [1, {MAX_PERIODS}], got {self.periods}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if not self.period_s > 0:
            raise ConfigError("period_s must be > 0")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        try:
            self.apparatus()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def apparatus(self) -> ApparatusParams:
        names = {f.name for f in fields(ApparatusParams)}
        return ApparatusParams(**{k: v for k, v in asdict(self).items() if k in names})

    def replace(self, **changes) -> RunConfig:
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw, lineno):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} expects {kind}, got {raw!r}") from None
    return raw


def parse_config(text, base: RunConfig | None = None) -> RunConfig:
    """Parse configuration text; unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, raw, lineno)
    return replace(base or RunConfig(), **values)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def format_config(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())

