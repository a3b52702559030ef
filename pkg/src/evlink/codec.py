"""UART-style framing of ASCII text and the on/off waveform that drives the LED.

Frame layout (11 bits): one {0} start bit, 7 data bits, one parity bit, {1 1}
end bits. The line idles high, so the `{1 1 0}` pattern between consecutive
frames always produces a strong falling edge for the receiver to latch on to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

PACKET_BITS = 11
DATA_BITS = 7
IDLE_LEVEL = 1
DEFAULT_GAP_BITS = 16  # high bits inserted between consecutive messages


def parity_bit(data_bits, parity_mode: str = "even") -> int:
    """Parity bit over the data bits.

    "even" makes the total number of ones (data + parity) even, "odd" odd.
    """
    ones = int(np.sum(np.asarray(data_bits)))
    if parity_mode == "even":
        return ones % 2
    if parity_mode == "odd":
        return (ones + 1) % 2
    raise ValueError(f"unknown parity mode: {parity_mode!r}")


@dataclass(frozen=True)
class Packet:
    """One 11-bit frame: {0} start, 7 data bits, parity, {1 1} end."""

    data_bits: tuple[int, ...]
    parity: int
    start_bit: int = 0
    end_bits: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if len(self.data_bits) != DATA_BITS:
            raise ValueError(f"expected {DATA_BITS} data bits, got {len(self.data_bits)}")
        for b in (*self.data_bits, self.parity, self.start_bit, *self.end_bits):
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b!r}")
        if self.start_bit != 0 or self.end_bits != (1, 1):
            raise ValueError("framing must be start=0, end=(1,1)")

    def bits(self) -> np.ndarray:
        """The full 11-bit frame, transmission order."""
        return np.array(
            (self.start_bit, *self.data_bits, self.parity, *self.end_bits), dtype=np.uint8
        )


class PacketDecode(NamedTuple):
    char: str
    parity_ok: bool
    framing_ok: bool


def _char_bits(c: str, msb_first: bool) -> list[int]:
    code = ord(c)
    if code > 0x7F:
        raise ValueError(f"not a 7-bit ASCII character: {c!r}")
    bits = [(code >> i) & 1 for i in range(DATA_BITS - 1, -1, -1)]
    if not msb_first:
        bits.reverse()
    return bits


def encode_char(c: str, parity_mode: str = "even", msb_first: bool = True) -> Packet:
    """Frame a single ASCII character into an 11-bit packet."""
    bits = _char_bits(c, msb_first)
    return Packet(tuple(bits), parity_bit(bits, parity_mode))


def encode_message(
    text: str | Sequence[str],
    parity_mode: str = "even",
    gap_bits: int = DEFAULT_GAP_BITS,
    msb_first: bool = True,
) -> np.ndarray:
    """Encode text into a flat bit sequence of concatenated 11-bit frames.

    `text` may be a single string or a sequence of message strings; in the
    latter case `gap_bits` idle-high bits are inserted between consecutive
    messages (never inside one), so one n-character message is exactly 11*n
    bits long.
    """
    messages = [text] if isinstance(text, str) else list(text)
    chunks: list[np.ndarray] = []
    for i, msg in enumerate(messages):
        if i > 0 and gap_bits > 0:
            chunks.append(np.ones(gap_bits, dtype=np.uint8))
        for c in msg:
            chunks.append(encode_char(c, parity_mode, msb_first).bits())
    if not chunks:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(chunks)


def decode_packet_bits(
    bits, parity_mode: str = "even", msb_first: bool = True
) -> PacketDecode:
    """Decode one 11-bit frame into (char, parity_ok, framing_ok).

    The character is always decoded from the data bits; parity and framing
    validity are reported separately so the caller can decide what to trust.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (PACKET_BITS,):
        raise ValueError(f"expected exactly {PACKET_BITS} bits, got shape {bits.shape}")
    data = bits[1:1 + DATA_BITS]
    ordered = data if msb_first else data[::-1]
    code = 0
    for b in ordered:
        code = (code << 1) | int(b)
    parity_ok = int(bits[1 + DATA_BITS]) == parity_bit(data, parity_mode)
    framing_ok = bits[0] == 0 and bits[9] == 1 and bits[10] == 1
    return PacketDecode(chr(code), parity_ok, bool(framing_ok))


@dataclass
class Waveform:
    """Piecewise-constant LED drive level.

    `transitions[i] = (t_seconds, level)` means the level switches to `level`
    at that instant; before the first transition and after the last one the
    line sits at whatever level precedes/follows (idle-high at both ends for
    framed messages). Run-length merged: consecutive levels always alternate.
    """

    transitions: list[tuple[float, int]]
    bit_rate: float
    t_start: float
    t_end: float
    idle_level: int = IDLE_LEVEL

    def level_at(self, t: float) -> int:
        lev = self.idle_level
        for tt, ll in self.transitions:
            if tt > t:
                break
            lev = ll
        return lev

    def levels(self, times) -> np.ndarray:
        """Vectorised `level_at` over an array of times."""
        times = np.asarray(times, dtype=float)
        if not self.transitions:
            return np.full(times.shape, self.idle_level, dtype=np.uint8)
        tt = np.array([t for t, _ in self.transitions])
        ll = np.array([l for _, l in self.transitions], dtype=np.uint8)
        idx = np.searchsorted(tt, times, side="right")
        out = np.where(idx == 0, np.uint8(self.idle_level), ll[np.maximum(idx - 1, 0)])
        return out.astype(np.uint8)


def bits_to_waveform(bits, bit_rate: float, t0: float = 0.0) -> Waveform:
    """Map a bit sequence onto LED level transitions at multiples of 1/bit_rate.

    The line idles high before t0 and returns high after the last bit, so a
    leading 1 produces no transition.
    """
    if bit_rate <= 0:
        raise ValueError("bit_rate must be positive")
    bits = np.asarray(bits, dtype=np.uint8)
    period = 1.0 / bit_rate
    transitions: list[tuple[float, int]] = []
    level = IDLE_LEVEL
    for i, b in enumerate(bits):
        b = int(b)
        if b != level:
            transitions.append((t0 + i * period, b))
            level = b
    t_end = t0 + len(bits) * period
    if level != IDLE_LEVEL:
        transitions.append((t_end, IDLE_LEVEL))
    return Waveform(transitions, float(bit_rate), float(t0), float(t_end))


def waveform_to_bits(waveform: Waveform, n_bits: int | None = None) -> np.ndarray:
    """Noise-free inverse of `bits_to_waveform`: sample levels at bit midpoints."""
    period = 1.0 / waveform.bit_rate
    if n_bits is None:
        n_bits = int(round((waveform.t_end - waveform.t_start) / period))
    mids = waveform.t_start + (np.arange(n_bits) + 0.5) * period
    return waveform.levels(mids)


# -- serialisation -----------------------------------------------------------

def bits_to_string(bits) -> str:
    return "".join("1" if int(b) else "0" for b in np.asarray(bits))


def bits_from_string(s: str) -> np.ndarray:
    s = s.strip()
    if any(c not in "01" for c in s):
        raise ValueError("bit string may only contain '0' and '1'")
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def write_waveform_csv(path, waveform: Waveform) -> None:
    """Write a waveform as `t_seconds,level` CSV lines plus a metadata header."""
    with open(path, "w") as f:
        f.write("# waveform v1\n")
        f.write(f"# bit_rate={waveform.bit_rate!r}\n")
        f.write(f"# t_start={waveform.t_start!r}\n")
        f.write(f"# t_end={waveform.t_end!r}\n")
        f.write(f"# idle_level={waveform.idle_level}\n")
        for t, lev in waveform.transitions:
            f.write(f"{t!r},{lev}\n")


def read_waveform_csv(path) -> Waveform:
    meta = {}
    transitions: list[tuple[float, int]] = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("# ")
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            t_s, lev_s = line.split(",")
            transitions.append((float(t_s), int(lev_s)))
    if "bit_rate" not in meta:
        raise ValueError(f"{path}: missing '# bit_rate=' header")
    t_start = float(meta.get("t_start", transitions[0][0] if transitions else 0.0))
    t_end = float(meta.get("t_end", transitions[-1][0] if transitions else t_start))
    return Waveform(
        transitions,
        float(meta["bit_rate"]),
        t_start,
        t_end,
        idle_level=int(meta.get("idle_level", IDLE_LEVEL)),
    )
