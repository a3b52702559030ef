"""Asynchronous reconstruction of the blob intensity and its binarisation.

Events aggregated from one blob drive a first-order high-pass filter: between
events the estimate decays exponentially toward zero (killing low-frequency
drift), and each event kicks it by its signed contrast weight. The solution
is evaluated in closed form only at event times; there is no time-stepping.
A hysteresis trigger turns the filtered trace into rising/falling edge
timestamps, which are all the decoder needs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .codec import Waveform

RISING = 1
FALLING = -1

# Threshold asymmetry: cameras skew positive, so the high threshold sits
# further from zero than the low one (3:2). The scale is bounded by the
# worst legitimate peak: after a full-swing kick an opposing edge one bit
# later only reaches |1 - e^(-alpha/f)| = 0.28 of the running |L| max
# (alpha = f/3), so ratios must stay safely below that.
DEFAULT_HI_RATIO = 0.2
DEFAULT_LO_RATIO = -2.0 / 15.0


def alpha_for_bit_rate(bit_rate: float, ratio: float = 1.0 / 3.0) -> float:
    """Filter cutoff (1/s) from the bit rate; the default decays an isolated
    impulse to e^(-2/3) of its peak over two bit periods."""
    return ratio * bit_rate


class HighpassFilter:
    """State of the event-driven high-pass filter for one demodulation slot.

    pos_weight / neg_weight are the per-event contrast contributions (divide
    by the blob pixel count so the estimate tracks per-pixel log-intensity).
    """

    __slots__ = ("l_hat", "t_last_us", "alpha", "pos_weight", "neg_weight")

    def __init__(self, alpha: float, pos_weight: float = 0.2, neg_weight: float = 0.2):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.pos_weight = float(pos_weight)
        self.neg_weight = float(neg_weight)
        self.l_hat = 0.0
        self.t_last_us = None  # set by the first event

    def update(self, t_us: int, polarity: int) -> float:
        """Advance to an event: exact exponential decay, then the event kick."""
        if self.t_last_us is not None:
            if t_us < self.t_last_us:
                raise ValueError(f"out-of-order event: {t_us} < {self.t_last_us}")
            self.l_hat *= math.exp(-self.alpha * (t_us - self.t_last_us) * 1e-6)
        self.l_hat += self.pos_weight if polarity > 0 else -self.neg_weight
        self.t_last_us = t_us
        return self.l_hat

    def sample(self, t_us: int) -> float:
        """The decayed estimate at time t (does not mutate the state)."""
        if self.t_last_us is None:
            return 0.0
        if t_us < self.t_last_us:
            raise ValueError(f"cannot sample the past: {t_us} < {self.t_last_us}")
        return self.l_hat * math.exp(-self.alpha * (t_us - self.t_last_us) * 1e-6)


@dataclass
class EdgeSequence:
    """Rising/falling trigger times, strictly increasing and alternating."""

    times: np.ndarray
    directions: np.ndarray  # +1 rising, -1 falling

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.int64)
        self.directions = np.asarray(self.directions, dtype=np.int8)
        if self.times.shape != self.directions.shape:
            raise ValueError("times and directions must match")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("edge timestamps must strictly increase")
        if len(self.directions) > 1 and np.any(self.directions[1:] == self.directions[:-1]):
            raise ValueError("edge directions must alternate")

    def __len__(self):
        return len(self.times)

    @property
    def falling_times(self) -> np.ndarray:
        return self.times[self.directions == FALLING]

    def level_at(self, t_us: float, initial_level: int = 1) -> int:
        """Reconstructed binary level just after time t (edges at t included)."""
        idx = int(np.searchsorted(self.times, t_us, side="right"))
        if idx == 0:
            return initial_level
        return 1 if self.directions[idx - 1] == RISING else 0


def hysteresis_trigger(
    events: np.ndarray,
    alpha: float,
    theta_hi: float | None = None,
    theta_lo: float | None = None,
    initial: str = "high",
    pos_weight: float = 0.2,
    neg_weight: float = 0.2,
    pixel_count: int = 1,
    adaptive_window_us: float | None = None,
    hi_ratio: float = DEFAULT_HI_RATIO,
    lo_ratio: float = DEFAULT_LO_RATIO,
    return_trace: bool = False,
):
    """Binarise an aggregated event stream into an EdgeSequence.

    The output switches high only once the filtered value crosses theta_hi and
    low only once it crosses theta_lo; both checks happen only at event times.
    With theta_hi/theta_lo left as None the thresholds adapt: hi_ratio and
    lo_ratio scale a running max of |L| over the trailing `adaptive_window_us`
    (pass one packet period).

    Returns an EdgeSequence, or (EdgeSequence, trace) with return_trace where
    trace is an (n, 2) array of (t_us, filtered value) sampled at event times.
    """
    if theta_hi is not None and theta_lo is not None:
        if theta_hi <= theta_lo:
            raise ValueError("theta_hi must exceed theta_lo")
        adaptive = False
    elif theta_hi is None and theta_lo is None:
        if adaptive_window_us is None:
            raise ValueError("adaptive thresholds need adaptive_window_us")
        if not (hi_ratio > 0 > lo_ratio):
            raise ValueError("adaptive ratios must straddle zero")
        adaptive = True
    else:
        raise ValueError("give both thresholds or neither")

    filt = HighpassFilter(alpha, pos_weight / pixel_count, neg_weight / pixel_count)
    out_high = initial == "high"
    edge_t: list[int] = []
    edge_d: list[int] = []
    trace = np.zeros((len(events), 2)) if return_trace else None

    # monotonic deque for the windowed running max of |L|
    window: deque[tuple[int, float]] = deque()

    ts = events["t"]
    ps = events["p"]
    for i in range(len(ts)):
        t = int(ts[i])
        l_val = filt.update(t, int(ps[i]))
        if return_trace:
            trace[i, 0] = t
            trace[i, 1] = l_val
        if adaptive:
            a = abs(l_val)
            while window and window[0][0] < t - adaptive_window_us:
                window.popleft()
            while window and window[-1][1] <= a:
                window.pop()
            window.append((t, a))
            amp = window[0][1]
            hi = hi_ratio * amp
            lo = lo_ratio * amp
        else:
            hi = theta_hi
            lo = theta_lo
        if edge_t and t == edge_t[-1]:
            continue  # aggregated pixels may share a tick; one edge per tick
        if out_high:
            if l_val <= lo:
                edge_t.append(t)
                edge_d.append(FALLING)
                out_high = False
        elif l_val >= hi:
            edge_t.append(t)
            edge_d.append(RISING)
            out_high = True

    edges = EdgeSequence(np.asarray(edge_t, dtype=np.int64), np.asarray(edge_d, dtype=np.int8))
    if return_trace:
        return edges, trace
    return edges


def edges_from_waveform(waveform: Waveform) -> EdgeSequence:
    """Ideal edge sequence straight from the drive waveform (bypasses the
    camera and filter; handy for sync tests and debugging)."""
    t = []
    d = []
    for ts, level in waveform.transitions:
        t.append(int(round(ts * 1e6)))
        d.append(RISING if level else FALLING)
    return EdgeSequence(np.asarray(t, dtype=np.int64), np.asarray(d, dtype=np.int8))


def write_edges_csv(path, edges: EdgeSequence) -> None:
    with open(path, "w") as f:
        f.write("t_us,direction\n")
        for t, d in zip(edges.times, edges.directions):
            f.write(f"{t},{'rising' if d == RISING else 'falling'}\n")


def write_trace_csv(path, trace: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write("t_us,value\n")
        for t, val in trace:
            f.write(f"{int(t)},{val!r}\n")
