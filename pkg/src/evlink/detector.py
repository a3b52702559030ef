"""Beacon blob detection, tracking and demodulation-slot management.

A flickering LED fires events at a high rate with positive and negative
polarities nearly balanced, so the per-pixel flicker index
count / (B + |sum of polarities|) separates beacons from drifting edges and
static clutter. Thresholded index maps become blobs (after morphological
closing), blobs are tracked by nearest-neighbour association, and the
highest-index candidates occupy the demodulation slots until parity feedback
demotes them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

CANDIDATE = "candidate"
DEMODULATING = "demodulating"
CONFIRMED = "confirmed"
DEMOTED = "demoted"


@dataclass(frozen=True)
class IndexMap:
    """Per-pixel event statistics over one sliding window.

    Arrays are (height, width), indexed [v, u].
    """

    counts: np.ndarray
    polarity_sum: np.ndarray
    window: tuple[float, float]
    b_offset: float

    @property
    def index(self) -> np.ndarray:
        return self.counts / (self.b_offset + np.abs(self.polarity_sum))


def compute_index_map(
    events: np.ndarray,
    window: tuple[float, float] | None = None,
    b_offset: float = 1.0,
    resolution: tuple[int, int] = (640, 480),
) -> IndexMap:
    """Accumulate event counts and polarity sums per pixel over a time window.

    `window` is (t0_us, t1_us), half-open; None uses the whole stream. Events
    must be time-sorted (simulator/file order).
    """
    if b_offset <= 0:
        raise ValueError("b_offset must be positive")
    width, height = resolution
    counts = np.zeros((height, width), dtype=np.int64)
    pol = np.zeros((height, width), dtype=np.int64)
    if window is not None:
        lo = int(np.searchsorted(events["t"], window[0], side="left"))
        hi = int(np.searchsorted(events["t"], window[1], side="left"))
        events = events[lo:hi]
    else:
        window = (
            float(events["t"][0]) if len(events) else 0.0,
            float(events["t"][-1]) if len(events) else 0.0,
        )
    if len(events):
        flat = events["v"].astype(np.int64) * width + events["u"]
        counts += np.bincount(flat, minlength=height * width).reshape(height, width)
        pol += np.bincount(
            flat, weights=events["p"].astype(np.float64), minlength=height * width
        ).reshape(height, width).astype(np.int64)
    return IndexMap(counts, pol, (float(window[0]), float(window[1])), float(b_offset))


@dataclass
class Blob:
    pixels: np.ndarray  # (n, 2) of (u, v)
    centroid: tuple[float, float]
    mean_index: float


def detect_blobs(
    index_map: IndexMap,
    index_threshold: float | None = None,
    morph_radius: int = 1,
    min_events: int = 10,
) -> list[Blob]:
    """Binarise the index map and extract connected blobs.

    Default threshold: half the map's max index, with pixels additionally
    required to hold at least `min_events` events. Closing with a square
    structuring element of the given radius fills holes; components use
    8-connectivity. Blobs come back sorted by mean index, highest first.
    """
    index = index_map.index
    if index_threshold is None:
        peak = float(index.max()) if index.size else 0.0
        if peak <= 0:
            return []
        index_threshold = 0.5 * peak
    mask = (index >= index_threshold) & (index_map.counts >= min_events)
    if not mask.any():
        return []
    if morph_radius > 0:
        size = 2 * morph_radius + 1
        mask = ndimage.binary_closing(mask, structure=np.ones((size, size), dtype=bool))
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    blobs: list[Blob] = []
    for lab in range(1, n + 1):
        vs, us = np.nonzero(labels == lab)
        pixels = np.column_stack((us, vs))
        centroid = (float(us.mean()), float(vs.mean()))
        blobs.append(Blob(pixels, centroid, float(index[vs, us].mean())))
    blobs.sort(key=lambda b: (-b.mean_index, b.centroid[1], b.centroid[0]))
    return blobs


@dataclass
class BlobTrack:
    """A tracked beacon candidate."""

    id: int
    centroid: tuple[float, float]
    pixels: np.ndarray
    mean_index: float
    state: str = CANDIDATE
    parity_history: list = field(default_factory=list)
    chars_decoded: int = 0
    misses: int = 0


def track_blobs(
    tracks: list[BlobTrack],
    detections: list[Blob],
    max_dist: float = 5.0,
    grace: int = 3,
    next_id: int = 0,
) -> tuple[list[BlobTrack], int]:
    """Associate detections with tracks by greedy nearest-neighbour matching.

    All candidate pairs within `max_dist` are taken best-first (ties broken by
    lower track id, then detection order); unmatched detections spawn fresh
    ids, unmatched tracks survive `grace` consecutive misses before retiring.
    """
    if max_dist <= 0:
        raise ValueError("max_dist must be positive")
    pairs = []
    for ti, tr in enumerate(tracks):
        for di, det in enumerate(detections):
            d = float(np.hypot(tr.centroid[0] - det.centroid[0], tr.centroid[1] - det.centroid[1]))
            if d <= max_dist:
                pairs.append((d, tr.id, di, ti))
    pairs.sort()
    used_tracks: set[int] = set()
    used_dets: set[int] = set()
    for d, _tid, di, ti in pairs:
        if ti in used_tracks or di in used_dets:
            continue
        used_tracks.add(ti)
        used_dets.add(di)
        tr = tracks[ti]
        det = detections[di]
        tr.centroid = det.centroid
        tr.pixels = det.pixels
        tr.mean_index = det.mean_index
        tr.misses = 0
    out: list[BlobTrack] = []
    for ti, tr in enumerate(tracks):
        if ti not in used_tracks:
            tr.misses += 1
            if tr.misses > grace:
                continue
        out.append(tr)
    for di, det in enumerate(detections):
        if di not in used_dets:
            out.append(BlobTrack(next_id, det.centroid, det.pixels, det.mean_index))
            next_id += 1
    return out, next_id


class BlobTracker:
    """Stateful wrapper around track_blobs keeping the id counter."""

    def __init__(self, max_dist: float = 5.0, grace: int = 3):
        self.max_dist = max_dist
        self.grace = grace
        self.tracks: list[BlobTrack] = []
        self._next_id = 0

    def update(self, detections: list[Blob]) -> list[BlobTrack]:
        self.tracks, self._next_id = track_blobs(
            self.tracks, detections, self.max_dist, self.grace, self._next_id
        )
        return self.tracks


class SlotManager:
    """Assigns the N demodulation slots to the best candidate tracks.

    Slots are filled by mean index, highest first. A track whose decoder
    reports rejection is demoted and its slot refilled by the next-highest
    candidate; demoted tracks become eligible again only once every
    never-tried candidate has had its turn.
    """

    def __init__(self, n_slots: int):
        if n_slots < 1:
            raise ValueError("need at least one slot")
        self.n_slots = n_slots
        self.slots: list[int | None] = [None] * n_slots
        self.tried: set[int] = set()

    def update(self, tracks: list[BlobTrack], rejected_ids=()) -> list[int | None]:
        by_id = {t.id: t for t in tracks}
        for tid in rejected_ids:
            if tid in by_id:
                by_id[tid].state = DEMOTED
        for i, tid in enumerate(self.slots):
            if tid is None:
                continue
            tr = by_id.get(tid)
            if tr is None or tr.state == DEMOTED:
                self.slots[i] = None
        assigned = {tid for tid in self.slots if tid is not None}
        fresh = [
            t for t in tracks
            if t.state != DEMOTED and t.id not in assigned and t.id not in self.tried
        ]
        fresh.sort(key=lambda t: (-t.mean_index, t.id))
        retry = [t for t in tracks if t.state == DEMOTED and t.id not in assigned]
        retry.sort(key=lambda t: (-t.mean_index, t.id))
        queue = fresh + retry
        for i in range(self.n_slots):
            if self.slots[i] is None and queue:
                tr = queue.pop(0)
                self.slots[i] = tr.id
                tr.state = DEMODULATING
                self.tried.add(tr.id)
        return list(self.slots)


def manage_slots(
    tracks: list[BlobTrack], n_slots: int, rejected_ids=(), manager: SlotManager | None = None
) -> list[int | None]:
    """One-shot slot assignment (see SlotManager for the stateful version)."""
    if manager is None:
        manager = SlotManager(n_slots)
    return manager.update(tracks, rejected_ids)


def write_index_map_csv(path, index_map: IndexMap) -> None:
    np.savetxt(path, index_map.index, fmt="%r", delimiter=",")


def write_track_log_csv(path, rows) -> None:
    """rows: iterables of (t_us, id, cu, cv, index, state)."""
    with open(path, "w") as f:
        f.write("t_us,id,cu,cv,index,state\n")
        for t, tid, cu, cv, idx, state in rows:
            f.write(f"{int(t)},{tid},{cu!r},{cv!r},{idx!r},{state}\n")
