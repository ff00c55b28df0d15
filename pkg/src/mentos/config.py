"""Pipeline configuration, read from flat ``key = value`` files.

All thresholds compare strictly except the three admissibility bounds
(tau_t, tau_s, tau_o), which are inclusive, and the final score floor,
which deletes only tracks strictly below it.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    theta_d: float = 0.5  # keep detections with score > theta_d
    theta_a: int = 128  # keep masks with area > theta_a pixels
    theta_miou: float = 0.5  # merge same-frame masks with mIoU > theta_miou
    theta_s: float = 0.15  # short-term link needs warped mIoU > theta_s
    theta_l: float = 0.30  # long-term merge needs similarity > theta_l
    tau_t: float = 1.5  # seconds
    tau_s: float = 0.2
    tau_o: int = 1  # frames
    n_far: int = 5
    n_fallback: int = 2
    score_floor: float = 0.90
    flow_levels: int = 3
    flow_window: int = 7
    propagator: str = "geometric"  # or external:DIR
    search_radius: int = 32
    blur_sigma: float = 2.0
    long_term: bool = True

    def __post_init__(self):
        for name in ("theta_d", "theta_miou", "theta_s", "score_floor"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} = {v} outside [0, 1]")
        if not -1.0 <= self.theta_l <= 1.0:
            raise ConfigError(f"theta_l = {self.theta_l} outside [-1, 1]")
        for name in ("theta_a", "tau_t", "tau_s", "tau_o", "search_radius", "blur_sigma"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.n_far < 1 or self.n_fallback < 1:
            raise ConfigError("n_far and n_fallback must be >= 1")
        if self.flow_levels < 1 or self.flow_window < 3 or self.flow_window % 2 == 0:
            raise ConfigError("flow_levels >= 1 and odd flow_window >= 3 required")
        if not (self.propagator == "geometric" or self.propagator.startswith("external:")):
            raise ConfigError(f"unknown propagator {self.propagator!r}")

    def updated(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)


def _convert(kind, raw: str):
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return kind(raw)


_TYPES = {"float": float, "int": int, "str": str, "bool": bool}


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    base = base or PipelineConfig()
    kinds = {f.name: _TYPES[f.type] for f in fields(PipelineConfig)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            changes[key] = _convert(kinds[key], value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
    return replace(base, **changes)


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def format_config(cfg: PipelineConfig) -> str:
    return "".join(f"{f.name} = {getattr(cfg, f.name)}\n" for f in fields(cfg))
