"""Event stream file formats.

Text CSV: header line `# events v1`, then one `t_us,u,v,p` line per event
with p in {0, 1} (0 = negative polarity), sorted by t, then u, then v.
Binary: packed little-endian records of u32 t_us, u16 u, u16 v, u8 p.
"""

from __future__ import annotations

import warnings

import numpy as np

from .channel import EVENT_DTYPE, empty_events

CSV_HEADER = "# events v1"
BINARY_DTYPE = np.dtype(
    [("t", "<u4"), ("u", "<u2"), ("v", "<u2"), ("p", "u1")]
)  # 9 bytes per record


def write_events_csv(path, events: np.ndarray) -> None:
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for t, u, v, p in zip(events["t"], events["u"], events["v"], events["p"]):
            f.write(f"{t},{u},{v},{1 if p > 0 else 0}\n")


def read_events_csv(path) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # empty payload is legal
        data = np.loadtxt(path, delimiter=",", comments="#", dtype=np.int64, ndmin=2)
    if data.size == 0:
        return empty_events()
    out = np.zeros(len(data), dtype=EVENT_DTYPE)
    out["t"] = data[:, 0]
    out["u"] = data[:, 1]
    out["v"] = data[:, 2]
    out["p"] = np.where(data[:, 3] > 0, 1, -1)
    return out


def write_events_binary(path, events: np.ndarray) -> None:
    rec = np.zeros(len(events), dtype=BINARY_DTYPE)
    rec["t"] = events["t"]
    rec["u"] = events["u"]
    rec["v"] = events["v"]
    rec["p"] = (events["p"] > 0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(rec.tobytes())


def read_events_binary(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    rec = np.frombuffer(raw, dtype=BINARY_DTYPE)
    out = np.zeros(len(rec), dtype=EVENT_DTYPE)
    out["t"] = rec["t"]
    out["u"] = rec["u"]
    out["v"] = rec["v"]
    out["p"] = np.where(rec["p"] > 0, 1, -1)
    return out


def write_events(path, events: np.ndarray, binary: bool | None = None) -> None:
    """Write an event stream; format from `binary` or the file extension."""
    if binary is None:
        binary = str(path).endswith((".bin", ".evt"))
    if binary:
        write_events_binary(path, events)
    else:
        write_events_csv(path, events)


def read_events(path, binary: bool | None = None) -> np.ndarray:
    if binary is None:
        binary = str(path).endswith((".bin", ".evt"))
    if binary:
        return read_events_binary(path)
    return read_events_csv(path)
