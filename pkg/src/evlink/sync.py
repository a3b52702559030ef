"""Packet-boundary synchronisation from the falling-edge stream.

Consecutive frames are separated by a `{1 1 0}` pattern, so the boundary
between an end bit and the next start bit is always a falling edge. From the
previous boundary the next one is searched in a window biased to the left;
if the true edge is missed the boundary is synthesised one packet period
ahead, and if synchronisation was lost the search slips leftward a bit (or
two) per character until it lands on the true start bit. Beacons whose
parity record stays bad are rejected.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .codec import PACKET_BITS
from .demod import EdgeSequence

# rejection rule: after REJECT_MIN_CHARS characters, at least PARITY_MIN_OK of
# the last PARITY_WINDOW parity bits must be correct
REJECT_MIN_CHARS = 15
PARITY_WINDOW = 5
PARITY_MIN_OK = 4

SEARCHING = "searching"
LOCKED = "locked"
REJECTED = "rejected"


class NoSignalError(Exception):
    """No usable signal: empty stream or no falling edge to initialise on."""


@dataclass
class SyncState:
    """Boundary-tracking state for one demodulation slot."""

    t_prev: float  # previous boundary, microseconds
    period_us: float  # 11-bit packet period T
    parity_history: deque = field(default_factory=lambda: deque(maxlen=PARITY_WINDOW))
    chars_seen: int = 0
    status: str = SEARCHING

    @property
    def dt(self) -> float:
        """Half a bit period: T / 22."""
        return self.period_us / (2 * PACKET_BITS)


def packet_period_us(bit_rate: float) -> float:
    return PACKET_BITS / bit_rate * 1e6


def initialize(edges: EdgeSequence, bit_rate: float) -> SyncState:
    """Anchor on the first falling edge encountered."""
    falling = edges.falling_times
    if len(falling) == 0:
        raise NoSignalError("no falling edge in the stream")
    return SyncState(t_prev=float(falling[0]), period_us=packet_period_us(bit_rate))


def next_boundary(state: SyncState, edges: EdgeSequence) -> tuple[float, bool]:
    """Advance to the next packet boundary.

    Searches for the last falling edge in [t_prev + T - 5*dt, t_prev + T + dt]
    (wider to the left: the end bit is two bits but the start bit only one,
    and a left edge is what re-synchronisation slips on). Both ends inclusive.
    Falls back to t_prev + T when the window is empty.
    """
    expected = state.t_prev + state.period_us
    left = expected - 5.0 * state.dt
    right = expected + state.dt
    falling = edges.falling_times
    i0 = int(np.searchsorted(falling, left, side="left"))
    i1 = int(np.searchsorted(falling, right, side="right"))
    if i1 > i0:
        t_k, found = float(falling[i1 - 1]), True
    else:
        t_k, found = expected, False
    state.t_prev = t_k
    return t_k, found


def update_parity(
    state: SyncState,
    parity_ok: bool,
    min_chars: int = REJECT_MIN_CHARS,
    window: int = PARITY_WINDOW,
    min_ok: int = PARITY_MIN_OK,
) -> SyncState:
    """Record one character's parity flag and apply the accept/reject rule.

    Once `min_chars` characters have been seen, fewer than `min_ok` correct
    parities among the last `window` rejects the beacon; otherwise it is
    locked. Below the horizon the status stays as-is.
    """
    if state.status == REJECTED:
        raise ValueError("beacon already rejected")
    if state.parity_history.maxlen != window:
        state.parity_history = deque(state.parity_history, maxlen=window)
    state.parity_history.append(bool(parity_ok))
    state.chars_seen += 1
    if state.chars_seen >= min_chars:
        ok = sum(state.parity_history)
        state.status = LOCKED if ok >= min_ok else REJECTED
    return state


def first_falling_after(edges: EdgeSequence, t_us: float) -> float | None:
    """First falling edge strictly after t, or None (used to re-arm after an
    idle gap, mirroring initialisation)."""
    falling = edges.falling_times
    idx = int(np.searchsorted(falling, t_us, side="right"))
    if idx >= len(falling):
        return None
    return float(falling[idx])
