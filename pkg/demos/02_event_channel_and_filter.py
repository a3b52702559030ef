"""The event-camera channel and the asynchronous reconstruction.

A pixel fires +1/-1 events when the LED's log-intensity crosses contrast
thresholds. The receiver never rebuilds images: it feeds the events into an
event-driven high-pass filter and binarises the result with a hysteresis
trigger. This reproduces the classic two-row picture: filtered intensity with
threshold lines on top, recovered binary signal below.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from evlink import ChannelConfig, bits_to_waveform, encode_char, hysteresis_trigger
from evlink.channel import led_log_intensity, simulate_pixel

BIT_RATE = 500.0
cfg = ChannelConfig(c_pos=0.2, c_neg=0.2)

bits = encode_char("S").bits()
wf = bits_to_waveform(bits, BIT_RATE, t0=0.004)
intensity = led_log_intensity(wf, slew_rate=cfg.slew_rate, amplitude=cfg.amplitude)
events = simulate_pixel(intensity, cfg, wf.t_end + 0.006)
print(f"'S' packet -> {len(events)} events at one pixel "
      f"({np.sum(events['p'] > 0)} positive, {np.sum(events['p'] < 0)} negative)")

edges, trace = hysteresis_trigger(
    events,
    alpha=BIT_RATE / 3.0,  # decays over ~2 bit periods
    adaptive_window_us=11e6 / BIT_RATE,
    return_trace=True,
)
print(f"hysteresis trigger -> {len(edges)} edges (8 level transitions in the packet)")
for t, d in zip(edges.times, edges.directions):
    print(f"  {'rising ' if d > 0 else 'falling'} @ {t / 1000:.2f} ms")

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(10, 4), sharex=True)
ax1.plot(trace[:, 0] / 1000, trace[:, 1], ".-", ms=3, lw=0.8)
ax1.axhline(0, color="k", lw=0.5)
ax1.set_ylabel("filtered intensity")
ax1.set_title("asynchronous high-pass reconstruction of the 'S' packet")
level = 1
t_plot, l_plot = [0.0], [1]
for t, d in zip(edges.times, edges.directions):
    t_plot += [t / 1000, t / 1000]
    l_plot += [level, 1 if d > 0 else 0]
    level = 1 if d > 0 else 0
t_plot.append((wf.t_end + 0.006) * 1e3)
l_plot.append(level)
ax2.plot(t_plot, l_plot)
ax2.set_ylim(-0.2, 1.2)
ax2.set_xlabel("time [ms]")
ax2.set_ylabel("binarised")
fig.tight_layout()
fig.savefig("demos/out/02_filter_and_trigger.png", dpi=120)
print("\nwrote demos/out/02_filter_and_trigger.png")
