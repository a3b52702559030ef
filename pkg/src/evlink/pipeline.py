"""End-to-end wiring: text -> waveform -> events -> blobs -> edges -> text.

The receiver scans leading sliding windows to find and track beacon blobs
(scenes are static: the simulator models no camera motion), fills the
demodulation slots with the highest-index candidates, and decodes each slot's
aggregated pixel events. Slots whose beacon is rejected by the parity rule
are refilled from the remaining candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import detector as det
from . import sync as sync_mod
from .channel import BeaconPlacement, simulate_scene, square_footprint
from .codec import Waveform, bits_to_waveform, encode_message
from .config import RunConfig
from .decoder import DecodedChar, decode_stream, decoded_text
from .demod import EdgeSequence, hysteresis_trigger
from .sync import NoSignalError, SyncState, packet_period_us


def transmit(messages, cfg: RunConfig) -> tuple[np.ndarray, Waveform]:
    """Encode one message (str) or several (sequence) into bits + waveform."""
    bits = encode_message(messages, cfg.parity_mode, cfg.gap_bits, cfg.msb_first)
    t0 = cfg.lead_bits / cfg.bit_rate
    return bits, bits_to_waveform(bits, cfg.bit_rate, t0)


def beacon_from_config(waveform: Waveform, cfg: RunConfig) -> BeaconPlacement:
    return BeaconPlacement(
        waveform, square_footprint(cfg.beacon_u, cfg.beacon_v, cfg.beacon_size)
    )


def simulate(waveform: Waveform, cfg: RunConfig, duration: float | None = None) -> np.ndarray:
    return simulate_scene([beacon_from_config(waveform, cfg)], cfg.channel_config(), duration=duration)


@dataclass
class DecodedBeacon:
    """One accepted demodulation slot's output."""

    track_id: int
    centroid: tuple[float, float]
    chars: list[DecodedChar]
    messages: list[str]
    sync_state: SyncState
    edges: EdgeSequence


@dataclass
class ReceiveResult:
    beacons: list[DecodedBeacon]
    tracks: list[det.BlobTrack]
    rejected_ids: list[int]
    traces: dict = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "".join("".join(b.messages) for b in self.beacons)


def _events_for_pixels(events: np.ndarray, pixels: np.ndarray) -> np.ndarray:
    keys = events["u"].astype(np.int64) << 32 | events["v"].astype(np.int64)
    want = pixels[:, 0].astype(np.int64) << 32 | pixels[:, 1].astype(np.int64)
    return events[np.isin(keys, want)]


def receive(events: np.ndarray, cfg: RunConfig, collect_traces: bool = False) -> ReceiveResult:
    """Run the full receiver over a scene event stream."""
    if len(events) == 0:
        raise NoSignalError("empty event stream")
    period = packet_period_us(cfg.bit_rate)
    window_us = cfg.window_packets * period
    hop_us = cfg.hop_packets * period
    t0 = float(events["t"][0])
    t_last = float(events["t"][-1])

    tracker = det.BlobTracker(cfg.max_track_dist, cfg.track_grace)
    traces: dict = {"tracks": [], "index_map": None}
    for k in range(cfg.max_scan_windows):
        w0 = t0 + k * hop_us
        if w0 > t_last:
            break
        imap = det.compute_index_map(events, (w0, w0 + window_us), cfg.b_offset, cfg.resolution)
        detections = det.detect_blobs(
            imap, cfg.index_threshold, cfg.morph_radius, cfg.min_blob_events
        )
        tracker.update(detections)
        if collect_traces:
            if traces["index_map"] is None and detections:
                traces["index_map"] = imap
            for tr in tracker.tracks:
                traces["tracks"].append(
                    (w0, tr.id, tr.centroid[0], tr.centroid[1], tr.mean_index, tr.state)
                )
    tracks = tracker.tracks
    if not tracks:
        raise NoSignalError("no beacon blobs detected")

    manager = det.SlotManager(cfg.n_slots)
    results: dict[int, DecodedBeacon | None] = {}
    rejected: list[int] = []
    while True:
        assignment = manager.update(tracks, rejected)
        rejected = []
        new_ids = [tid for tid in assignment if tid is not None and tid not in results]
        if not new_ids:
            break
        for tid in new_ids:
            track = next(t for t in tracks if t.id == tid)
            slot_events = _events_for_pixels(events, track.pixels)
            fixed = cfg.theta_hi is not None
            demod_out = hysteresis_trigger(
                slot_events,
                alpha=cfg.alpha,
                theta_hi=cfg.theta_hi if fixed else None,
                theta_lo=cfg.theta_lo if fixed else None,
                pos_weight=cfg.event_weight_pos,
                neg_weight=cfg.event_weight_neg,
                pixel_count=len(track.pixels),
                adaptive_window_us=None if fixed else period,
                hi_ratio=cfg.theta_hi_ratio,
                lo_ratio=cfg.theta_lo_ratio,
                return_trace=collect_traces,
            )
            edges, filter_trace = demod_out if collect_traces else (demod_out, None)
            sync_trace: list | None = [] if collect_traces else None
            try:
                chars, state = decode_stream(
                    edges,
                    cfg.bit_rate,
                    cfg.parity_mode,
                    cfg.msb_first,
                    min_chars=cfg.reject_min_chars,
                    parity_window=cfg.parity_window,
                    parity_min_ok=cfg.parity_min_ok,
                    trace=sync_trace,
                )
            except NoSignalError:
                rejected.append(tid)
                results[tid] = None
                continue
            finally:
                if collect_traces:
                    traces[f"filter_{tid}"] = filter_trace
                    traces[f"edges_{tid}"] = edges
                    traces[f"sync_{tid}"] = sync_trace
            track.parity_history = [c.parity_ok for c in chars if not c.is_idle]
            track.chars_decoded = sum(1 for c in chars if not c.is_idle)
            if state.status == sync_mod.REJECTED or track.chars_decoded == 0:
                rejected.append(tid)
                results[tid] = None
                continue
            if state.status == sync_mod.LOCKED:
                track.state = det.CONFIRMED
            results[tid] = DecodedBeacon(
                tid, track.centroid, chars, decoded_text(chars), state, edges
            )
    beacons = [results[tid] for tid in manager.slots if tid is not None and results.get(tid)]
    all_rejected = [tid for tid, r in results.items() if r is None]
    return ReceiveResult(beacons, tracks, all_rejected, traces if collect_traces else {})


def run_link(
    messages, cfg: RunConfig, duration: float | None = None, collect_traces: bool = False
) -> tuple[ReceiveResult, np.ndarray]:
    """Convenience end-to-end run; returns the receive result and the sent bits."""
    bits, waveform = transmit(messages, cfg)
    events = simulate(waveform, cfg, duration)
    result = receive(events, cfg, collect_traces)
    return result, bits
