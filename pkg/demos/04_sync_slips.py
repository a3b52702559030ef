"""Packet-boundary recovery by leftward slips.

The end bits {1 1} followed by a start bit {0} guarantee a falling edge at
every true packet boundary. If the tracker anchors on a data edge instead,
each search window (biased 5 half-bits to the left, half a bit to the right)
either re-finds an edge at the same offset or slips one or two bits leftward
until it reaches the start bit, where a falling edge fires every packet.
"""

import numpy as np

from evlink import encode_message
from evlink.codec import bits_to_waveform
from evlink.demod import edges_from_waveform
from evlink.sync import SyncState, next_boundary, packet_period_us

BIT_RATE = 500.0
T = packet_period_us(BIT_RATE)
DT = T / 22

rng = np.random.default_rng(4)
msg = "".join(chr(rng.integers(32, 127)) for _ in range(25))
print(f"message: {msg!r}")

wf = bits_to_waveform(encode_message(msg), BIT_RATE, t0=0.0)
edges = edges_from_waveform(wf)
bounds = np.array([k * T for k in range(26)])
falling = edges.falling_times
interior = falling[~np.isclose(falling[:, None], bounds[None, :], atol=1).any(axis=1)]

t0 = float(interior[1])
print(f"anchoring on a data falling edge at {t0 / 1000:.1f} ms "
      f"(bit offset {(t0 % T) / (2 * DT):.0f} inside the packet)\n")

state = SyncState(t_prev=t0, period_us=T)
print("char  boundary[ms]  found  offset[bits]  note")
for k in range(16):
    prev = state.t_prev
    t_k, found = next_boundary(state, edges)
    offset = (t_k % T) / (2 * DT)
    slipped = found and t_k < prev + T - DT
    note = "slip" if slipped else ("locked" if offset < 0.01 or offset > 10.99 else "")
    print(f"{k:4d}  {t_k / 1000:11.2f}  {str(found):5}  {offset:11.2f}  {note}")
    if state.t_prev + T > wf.t_end * 1e6 + DT:
        break
