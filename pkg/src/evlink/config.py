"""Flat key=value run configuration shared by the CLI and the sweep harness.

Every key has a documented unit and default (see KEY_DOCS / README). Unknown
keys are rejected; parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .channel import ChannelConfig


class ConfigError(ValueError):
    """Bad configuration key, value or file."""


@dataclass
class RunConfig:
    # link
    bit_rate: float = 500.0
    parity_mode: str = "even"
    msb_first: bool = True
    gap_bits: int = 16
    lead_bits: int = 8
    # demodulation
    alpha_ratio: float = 1.0 / 3.0
    theta_hi: float | None = None
    theta_lo: float | None = None
    theta_hi_ratio: float = 0.2
    theta_lo_ratio: float = -2.0 / 15.0
    event_weight_pos: float = 0.2
    event_weight_neg: float = 0.2
    # channel
    c_pos: float = 0.2
    c_neg: float = 0.2
    refractory_us: float = 0.0
    noise_rate: float = 0.0
    amplitude: float = 1.0
    slew_rate: float = math.inf
    jitter_std_us: float = 0.0
    noise_pos_fraction: float = 0.6
    sensor_width: int = 640
    sensor_height: int = 480
    # beacon placement used by `simulate`
    beacon_u: int = 320
    beacon_v: int = 240
    beacon_size: int = 3
    # detector
    b_offset: float = 1.0
    window_packets: float = 2.0
    hop_packets: float = 1.0
    index_threshold: float | None = None
    min_blob_events: int = 10
    morph_radius: int = 1
    max_track_dist: float = 5.0
    track_grace: int = 3
    n_slots: int = 1
    max_scan_windows: int = 8
    # beacon accept/reject rule
    reject_min_chars: int = 15
    parity_window: int = 5
    parity_min_ok: int = 4
    # reproducibility
    seed: int = 0

    @property
    def resolution(self) -> tuple[int, int]:
        return (self.sensor_width, self.sensor_height)

    @property
    def alpha(self) -> float:
        return self.alpha_ratio * self.bit_rate

    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(
            c_pos=self.c_pos,
            c_neg=self.c_neg,
            refractory_us=self.refractory_us,
            noise_rate=self.noise_rate,
            amplitude=self.amplitude,
            slew_rate=self.slew_rate,
            jitter_std_us=self.jitter_std_us,
            noise_pos_fraction=self.noise_pos_fraction,
            seed=self.seed,
            resolution=self.resolution,
        )

    def validate(self) -> "RunConfig":
        if self.bit_rate <= 0:
            raise ConfigError("bit_rate must be positive")
        if self.parity_mode not in ("even", "odd"):
            raise ConfigError(f"parity_mode must be even or odd, not {self.parity_mode!r}")
        if self.alpha_ratio <= 0:
            raise ConfigError("alpha_ratio must be positive")
        if (self.theta_hi is None) != (self.theta_lo is None):
            raise ConfigError("set both fixed thresholds or neither")
        if self.n_slots < 1:
            raise ConfigError("n_slots must be at least 1")
        try:
            self.channel_config()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return self


# key -> (unit, note); keep in sync with RunConfig fields
KEY_DOCS = {
    "bit_rate": ("bits/s", "LED modulation rate"),
    "parity_mode": ("-", "even or odd"),
    "msb_first": ("-", "data bit transmission order"),
    "gap_bits": ("bits", "idle-high bits between messages"),
    "lead_bits": ("bits", "idle-high lead-in before the first packet"),
    "alpha_ratio": ("-", "filter cutoff = alpha_ratio * bit_rate"),
    "theta_hi": ("log-intensity", "fixed high threshold; none = adaptive"),
    "theta_lo": ("log-intensity", "fixed low threshold; none = adaptive"),
    "theta_hi_ratio": ("-", "adaptive high threshold vs running |L| max"),
    "theta_lo_ratio": ("-", "adaptive low threshold vs running |L| max"),
    "event_weight_pos": ("log-intensity", "per positive event filter kick"),
    "event_weight_neg": ("log-intensity", "per negative event filter kick"),
    "c_pos": ("log-intensity", "positive contrast threshold"),
    "c_neg": ("log-intensity", "negative contrast threshold"),
    "refractory_us": ("us", "pixel dead time"),
    "noise_rate": ("events/s/pixel", "Poisson background rate"),
    "amplitude": ("log-intensity", "LED swing (distance proxy)"),
    "slew_rate": ("1/s", "LED level slew limit; inf = ideal"),
    "jitter_std_us": ("us", "Gaussian timestamp jitter"),
    "noise_pos_fraction": ("-", "positive share of noise events"),
    "sensor_width": ("px", "sensor width"),
    "sensor_height": ("px", "sensor height"),
    "beacon_u": ("px", "simulated beacon centre, u"),
    "beacon_v": ("px", "simulated beacon centre, v"),
    "beacon_size": ("px", "simulated beacon square footprint side"),
    "b_offset": ("events", "flicker index denominator offset B"),
    "window_packets": ("packets", "index window length"),
    "hop_packets": ("packets", "index window hop"),
    "index_threshold": ("-", "fixed index threshold; none = half of map max"),
    "min_blob_events": ("events", "per-pixel count floor for detection"),
    "morph_radius": ("px", "closing structuring element radius"),
    "max_track_dist": ("px", "nearest-neighbour association gate"),
    "track_grace": ("windows", "missed windows before a track retires"),
    "n_slots": ("-", "demodulation slots"),
    "max_scan_windows": ("windows", "detection windows scanned"),
    "reject_min_chars": ("chars", "rejection horizon"),
    "parity_window": ("chars", "parity flags inspected"),
    "parity_min_ok": ("chars", "parity flags that must be correct"),
    "seed": ("-", "RNG seed"),
}

_OPTIONAL_FLOATS = {"theta_hi", "theta_lo", "index_threshold"}


def _parse_value(name: str, text: str, kind: type):
    text = text.strip()
    if name in _OPTIONAL_FLOATS:
        if text.lower() == "none":
            return None
        kind = float
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as e:
        raise ConfigError(f"bad value for {name}: {text!r}") from e


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse `key = value` lines ('#' comments allowed) over `base` defaults."""
    cfg = base if base is not None else RunConfig()
    kinds = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        updates[key] = _parse_value(key, val, kinds[key])
    return replace(cfg, **updates).validate()


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        unit, note = KEY_DOCS[f.name]
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}  # [{unit}] {note}")
    return "\n".join(lines) + "\n"


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path) as f:
        return parse_config(f.read(), base)


def apply_overrides(cfg: RunConfig, pairs) -> RunConfig:
    """Apply `key=value` strings (CLI --set) on top of a config."""
    return parse_config("\n".join(pairs), cfg)
