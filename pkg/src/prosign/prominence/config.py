"""Prominence-estimation configuration.

The upstream method leaves most numeric choices to the implementation; every
default here is configurable so users can match other toolkits.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from ..errors import ConfigError


@dataclass(frozen=True)
class ProminenceConfig:
    frame_shift_s: float = 0.005
    window_s: float = 0.025
    f0_min_hz: float = 100.0
    f0_max_hz: float = 400.0
    voicing_threshold: float = 0.45
    silence_ratio: float = 0.01  # frame peak below this fraction of global peak -> unvoiced
    octave_cost: float = 0.01  # per-candidate preference for shorter lags
    octave_jump_cost: float = 0.35  # transition penalty per octave
    voiced_unvoiced_cost: float = 0.14
    n_candidates: int = 4
    energy_floor_db: float = 60.0  # floor below utterance peak
    n_scales: int = 12
    base_scale_s: float = 0.02
    scale_band_lo_s: float = 0.08
    scale_band_hi_s: float = 0.6
    weight_f0: float = 1.0
    weight_energy: float = 1.0
    weight_duration: float = 1.0

    def __post_init__(self):
        if self.frame_shift_s <= 0 or self.window_s <= 0:
            raise ConfigError("frame_shift_s and window_s must be positive")
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise ConfigError("need 0 < f0_min_hz < f0_max_hz")
        if self.n_scales < 1 or self.base_scale_s <= 0:
            raise ConfigError("need n_scales >= 1 and base_scale_s > 0")
        if self.scale_band_lo_s > self.scale_band_hi_s:
            raise ConfigError("scale band is empty")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.weight_f0, self.weight_energy, self.weight_duration)


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file (# comments, blank lines allowed)."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def prominence_config_from_kv(kv: dict[str, str], prefix: str = "") -> ProminenceConfig:
    """Build a config from flat key/value strings; unknown keys are rejected."""
    known = {f.name: f.type for f in fields(ProminenceConfig)}
    values = {}
    for key, raw in kv.items():
        if prefix:
            if not key.startswith(prefix):
                continue
            key = key[len(prefix):]
        if key not in known:
            raise ConfigError(f"unknown prominence option {key!r}")
        try:
            values[key] = int(raw) if key in ("n_scales", "n_candidates") else float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    return ProminenceConfig(**values)
