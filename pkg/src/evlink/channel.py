"""LED-to-event-camera channel simulation.

Each pixel watches a piecewise-linear log-intensity trace and emits a +1/-1
event whenever the trace moves one contrast threshold away from its reference
level; the reference then advances by that threshold. A refractory period
suppresses events after each firing and re-anchors the reference to the
current intensity when it expires. Poisson background noise, Gaussian
timestamp jitter and 1 microsecond quantisation are applied on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import Waveform

EVENT_DTYPE = np.dtype([("t", np.int64), ("u", np.int32), ("v", np.int32), ("p", np.int8)])

DEFAULT_RESOLUTION = (640, 480)  # VGA sensor, (width, height)


def empty_events() -> np.ndarray:
    return np.zeros(0, dtype=EVENT_DTYPE)


@dataclass(frozen=True)
class ChannelConfig:
    """Sensor and source parameters for the simulated channel.

    c_pos / c_neg: log-intensity contrast thresholds per polarity.
    refractory_us: per-pixel dead time after each event.
    noise_rate: Poisson background events per second per pixel.
    amplitude: log-intensity swing of the LED (distance proxy).
    slew_rate: max LED level change in fractions of full swing per second
        (power-electronics proxy); inf = ideal square edges.
    jitter_std_us: Gaussian timestamp jitter.
    noise_pos_fraction: polarity bias of noise events (cameras skew positive).
    """

    c_pos: float = 0.2
    c_neg: float = 0.2
    refractory_us: float = 0.0
    noise_rate: float = 0.0
    amplitude: float = 1.0
    slew_rate: float = math.inf
    jitter_std_us: float = 0.0
    noise_pos_fraction: float = 0.6
    seed: int = 0
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.c_pos <= 0 or self.c_neg <= 0:
            raise ValueError("contrast thresholds must be positive")
        if self.refractory_us < 0:
            raise ValueError("refractory period cannot be negative")
        if self.amplitude < 0:
            raise ValueError("amplitude cannot be negative")
        if self.slew_rate <= 0:
            raise ValueError("slew_rate must be positive (use inf for ideal)")


class PiecewiseLinear:
    """Piecewise-linear function of time given by sorted knots.

    A repeated knot time encodes an instantaneous step; the later knot wins at
    exactly that instant. The function is constant before the first knot and
    after the last.
    """

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be matching 1-D arrays")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("knot times must be non-decreasing")

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if len(self.times) == 1:
            out = np.full(t_arr.shape, self.values[0])
            return out if t_arr.ndim else float(out)
        idx = np.clip(np.searchsorted(self.times, t_arr, side="right"), 1, len(self.times) - 1)
        t0 = self.times[idx - 1]
        t1 = self.times[idx]
        v0 = self.values[idx - 1]
        v1 = self.values[idx]
        span = t1 - t0
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(
                span > 0,
                (t_arr - t0) / np.where(span > 0, span, 1.0),
                np.where(t_arr >= t0, 1.0, 0.0),  # duplicate knot = step
            )
        out = v0 + np.clip(frac, 0.0, 1.0) * (v1 - v0)
        return out if t_arr.ndim else float(out)

    def scaled(self, factor: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.times, self.values * factor)


def led_log_intensity(
    waveform: Waveform, slew_rate: float = math.inf, amplitude: float = 1.0
) -> PiecewiseLinear:
    """LED log-intensity as a function of time, with slew-limited edges.

    The ideal square wave's edges become ramps of slope +/- slew_rate (in
    normalised level per second); the result is clamped to [0, amplitude]
    automatically because ramps stop at their 0/1 targets. With inf slew the
    exact square wave is returned (steps encoded as duplicate knot times).
    """
    level = float(waveform.idle_level)
    trans = waveform.transitions
    if not trans:
        return PiecewiseLinear([waveform.t_start], [level * amplitude])
    ts: list[float] = []
    vs: list[float] = []

    def add(t, v):
        ts.append(float(t))
        vs.append(float(v))

    add(trans[0][0], level)
    for k, (t_k, target) in enumerate(trans):
        target = float(target)
        t_next = trans[k + 1][0] if k + 1 < len(trans) else None
        if ts[-1] < t_k:
            add(t_k, level)  # held since the previous knot
        if math.isinf(slew_rate):
            level = target
            add(t_k, level)
            continue
        if target == level:
            continue
        t_reach = t_k + abs(target - level) / slew_rate
        if t_next is None or t_reach <= t_next:
            level = target
            add(t_reach, level)
        else:
            # ramp cut short by the next transition
            level = level + math.copysign(slew_rate * (t_next - t_k), target - level)
            add(t_next, level)
    return PiecewiseLinear(ts, np.asarray(vs) * amplitude)


def _crossing_events(times, values, c_pos, c_neg, refractory_s, t_end):
    """Threshold-crossing (time, polarity) pairs for a piecewise-linear trace.

    Walks the knot segments of the trace over [0, t_end]. The reference level
    starts at the t=0 value; each emission advances it by one threshold. With
    a nonzero refractory period the pixel is dead after each event and the
    reference re-anchors to the intensity at wake-up.
    """
    out_t: list[float] = []
    out_p: list[int] = []
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)

    # extend the trace to cover [0, t_end]
    if times[0] > 0.0:
        times = np.concatenate(([0.0], times))
        values = np.concatenate(([values[0]], values))
    if times[-1] < t_end:
        times = np.concatenate((times, [t_end]))
        values = np.concatenate((values, [values[-1]]))

    ref = values[0]
    dead_until = -math.inf
    for i in range(len(times) - 1):
        ta, va = times[i], values[i]
        tb, vb = times[i + 1], values[i + 1]
        if ta >= t_end:
            break
        if tb > t_end:
            if tb > ta:
                vb = va + (vb - va) * (t_end - ta) / (tb - ta)
            tb = t_end
        if dead_until > ta:
            if dead_until >= tb:
                continue
            if tb > ta:
                va = va + (vb - va) * (dead_until - ta) / (tb - ta)
            ta = dead_until
            ref = va  # re-anchor at wake-up
            dead_until = -math.inf
        if tb == ta:
            # instantaneous step va -> vb
            if vb >= ref + c_pos:
                while vb >= ref + c_pos:
                    out_t.append(ta)
                    out_p.append(1)
                    ref += c_pos
                    if refractory_s > 0:
                        dead_until = ta + refractory_s
                        break
            elif vb <= ref - c_neg:
                while vb <= ref - c_neg:
                    out_t.append(ta)
                    out_p.append(-1)
                    ref -= c_neg
                    if refractory_s > 0:
                        dead_until = ta + refractory_s
                        break
            continue
        slope = (vb - va) / (tb - ta)
        if slope == 0.0:
            continue
        while True:
            if slope > 0:
                target = ref + c_pos
                if vb < target:
                    break
                pol = 1
            else:
                target = ref - c_neg
                if vb > target:
                    break
                pol = -1
            t_c = ta + (target - va) / slope
            out_t.append(t_c)
            out_p.append(pol)
            ref = target
            if refractory_s > 0:
                dead_until = t_c + refractory_s
                if dead_until >= tb:
                    break
                va = va + slope * (dead_until - ta)
                ta = dead_until
                ref = va
                dead_until = -math.inf
    return np.asarray(out_t, dtype=float), np.asarray(out_p, dtype=np.int8)


def _enforce_strictly_increasing(t_us: np.ndarray) -> np.ndarray:
    """Bump ties so a pixel's timestamps strictly increase (min gap 1 us)."""
    if len(t_us) < 2:
        return t_us
    n = len(t_us)
    ramp = np.arange(n, dtype=np.int64)
    return np.maximum.accumulate(t_us - ramp) + ramp


def simulate_pixel(
    intensity: PiecewiseLinear,
    cfg: ChannelConfig,
    duration: float,
    u: int = 0,
    v: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Simulate one pixel watching `intensity` over [0, duration] seconds.

    Returns events sorted by timestamp (integer microseconds, strictly
    increasing within the pixel).
    """
    if rng is None:
        rng = np.random.default_rng([cfg.seed, u, v])
    refractory_s = cfg.refractory_us * 1e-6
    sig_t, sig_p = _crossing_events(
        intensity.times, intensity.values, cfg.c_pos, cfg.c_neg, refractory_s, duration
    )
    if cfg.noise_rate > 0:
        n_noise = rng.poisson(cfg.noise_rate * duration)
        noise_t = np.sort(rng.uniform(0.0, duration, size=n_noise))
        noise_p = np.where(rng.random(n_noise) < cfg.noise_pos_fraction, 1, -1).astype(np.int8)
        t = np.concatenate((sig_t, noise_t))
        p = np.concatenate((sig_p, noise_p))
        order = np.argsort(t, kind="stable")
        t, p = t[order], p[order]
        if refractory_s > 0 and len(t):
            # the merged stream must still honour the pixel dead time
            keep = np.ones(len(t), dtype=bool)
            last = -math.inf
            for i, ti in enumerate(t):
                if ti - last < refractory_s:
                    keep[i] = False
                else:
                    last = ti
            t, p = t[keep], p[keep]
    else:
        t, p = sig_t, sig_p
    if cfg.jitter_std_us > 0 and len(t):
        t = np.maximum(t + rng.normal(0.0, cfg.jitter_std_us * 1e-6, size=len(t)), 0.0)
        order = np.argsort(t, kind="stable")
        t, p = t[order], p[order]
    t_us = _enforce_strictly_increasing(np.round(t * 1e6).astype(np.int64))
    out = np.zeros(len(t_us), dtype=EVENT_DTYPE)
    out["t"] = t_us
    out["u"] = u
    out["v"] = v
    out["p"] = p
    return out


@dataclass
class BeaconPlacement:
    """Where a modulated LED lands on the sensor.

    pixels: (n, 2) integer array of (u, v) coordinates.
    scales: per-pixel amplitude fractions in [0, 1] (centre bright, rim dim).
    """

    waveform: Waveform
    pixels: np.ndarray
    scales: np.ndarray | None = None

    def __post_init__(self):
        self.pixels = np.atleast_2d(np.asarray(self.pixels, dtype=int))
        if self.pixels.shape[0] == 0 or self.pixels.shape[1] != 2:
            raise ValueError("footprint must be a non-empty (n, 2) pixel array")
        if self.scales is None:
            self.scales = np.ones(len(self.pixels))
        self.scales = np.asarray(self.scales, dtype=float)
        if self.scales.shape != (len(self.pixels),):
            raise ValueError("scales must match the footprint length")
        if np.any(self.scales < 0) or np.any(self.scales > 1):
            raise ValueError("scales must lie in [0, 1]")


def square_footprint(center_u: int, center_v: int, size: int = 3) -> np.ndarray:
    """A size x size block of pixels centred on (center_u, center_v)."""
    half = size // 2
    us = np.arange(center_u - half, center_u - half + size)
    vs = np.arange(center_v - half, center_v - half + size)
    uu, vv = np.meshgrid(us, vs)
    return np.column_stack((uu.ravel(), vv.ravel()))


def simulate_scene(
    beacons: list[BeaconPlacement],
    cfg: ChannelConfig,
    background: np.ndarray | None = None,
    duration: float | None = None,
) -> np.ndarray:
    """Merged event stream for beacons plus optional noise-only background pixels.

    Deterministic for a fixed config seed regardless of pixel iteration order;
    globally sorted by (t, u, v).
    """
    width, height = cfg.resolution
    seen: set[tuple[int, int]] = set()
    for b in beacons:
        for (u, v) in map(tuple, b.pixels):
            if not (0 <= u < width and 0 <= v < height):
                raise ValueError(f"beacon pixel {(u, v)} outside {cfg.resolution} sensor")
            if (u, v) in seen:
                raise ValueError(f"overlapping beacon footprints at pixel {(u, v)}")
            seen.add((u, v))
    if duration is None:
        if not beacons:
            raise ValueError("duration is required for a beacon-free scene")
        duration = max(b.waveform.t_end for b in beacons) + 4.0 / min(
            b.waveform.bit_rate for b in beacons
        )

    chunks: list[np.ndarray] = []
    for b in beacons:
        level = led_log_intensity(b.waveform, cfg.slew_rate, amplitude=1.0)
        for (u, v), scale in zip(b.pixels, b.scales):
            px_intensity = level.scaled(cfg.amplitude * scale)
            chunks.append(simulate_pixel(px_intensity, cfg, duration, int(u), int(v)))
    if background is not None:
        background = np.atleast_2d(np.asarray(background, dtype=int))
        flat = PiecewiseLinear([0.0], [0.0])
        for (u, v) in background:
            if (int(u), int(v)) in seen:
                raise ValueError(f"background pixel {(u, v)} overlaps a beacon")
            chunks.append(simulate_pixel(flat, cfg, duration, int(u), int(v)))
    if not chunks:
        return empty_events()
    events = np.concatenate(chunks)
    order = np.lexsort((events["v"], events["u"], events["t"]))
    return events[order]
