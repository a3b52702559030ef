"""Framing text into 11-bit packets and the LED drive waveform.

Each character becomes {0 start, 7 ASCII bits MSB-first, parity, 1 1 end}.
The line idles high, so every frame hands the receiver a guaranteed falling
edge at its start bit.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from evlink import bits_to_waveform, decode_packet_bits, encode_char, encode_message

print("Per-character framing (even parity):")
for c in "S O S":
    pkt = encode_char(c)
    bits = "".join(map(str, pkt.bits()))
    print(f"  {c!r}: start={bits[0]} data={bits[1:8]} parity={bits[8]} end={bits[9:]}")

print("\nRound trip through the frame decoder:")
pkt = encode_char("S")
print(f"  {pkt.bits()} -> {decode_packet_bits(pkt.bits())}")

message = "SOS"
bits = encode_message(message)
print(f"\n{message!r} encodes to {len(bits)} bits (11 per character):")
print(" ", "".join(map(str, bits)))

# the waveform: idle-high OOK at 500 bits/s
wf = bits_to_waveform(bits, bit_rate=500.0, t0=0.002)
print(f"\nWaveform: {len(wf.transitions)} transitions over "
      f"[{wf.t_start * 1e3:.1f}, {wf.t_end * 1e3:.1f}] ms")

t = np.linspace(0.0, wf.t_end + 0.002, 4000)
levels = wf.levels(t)
plt.figure(figsize=(10, 2.2))
plt.step(t * 1e3, levels, where="post")
plt.ylim(-0.2, 1.2)
plt.xlabel("time [ms]")
plt.ylabel("LED level")
plt.title(f"{message!r} as on/off keying, 500 bps, idle high")
plt.tight_layout()
plt.savefig("demos/out/01_waveform.png", dpi=120)
print("\nwrote demos/out/01_waveform.png")
