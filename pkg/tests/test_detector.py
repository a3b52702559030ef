import numpy as np
import pytest

from evlink.channel import (
    BeaconPlacement,
    ChannelConfig,
    EVENT_DTYPE,
    PiecewiseLinear,
    led_log_intensity,
    simulate_pixel,
    simulate_scene,
    square_footprint,
)
from evlink.codec import bits_to_waveform, encode_message
from evlink.detector import (
    Blob,
    BlobTrack,
    BlobTracker,
    SlotManager,
    compute_index_map,
    detect_blobs,
    manage_slots,
    track_blobs,
)


def make_events(rows):
    out = np.zeros(len(rows), dtype=EVENT_DTYPE)
    for i, r in enumerate(rows):
        out[i] = r
    return out


def pixel_events(u, v, n_pos, n_neg, t0=0):
    rows = []
    t = t0
    for _ in range(n_pos):
        rows.append((t, u, v, 1))
        t += 10
    for _ in range(n_neg):
        rows.append((t, u, v, -1))
        t += 10
    return rows


class TestIndexMap:
    def test_balanced_flicker(self):
        ev = make_events(pixel_events(3, 4, 50, 50))
        imap = compute_index_map(ev, resolution=(10, 10))
        assert imap.index[4, 3] == pytest.approx(100.0)

    def test_unbalanced_drift(self):
        ev = make_events(pixel_events(2, 2, 100, 0))
        imap = compute_index_map(ev, resolution=(10, 10))
        assert imap.index[2, 2] == pytest.approx(100 / 101)

    def test_empty_window(self):
        ev = make_events([])
        imap = compute_index_map(ev, resolution=(8, 8))
        assert np.all(imap.index == 0)

    def test_window_slicing(self):
        ev = make_events([(100, 1, 1, 1), (200, 1, 1, -1), (300, 1, 1, 1)])
        imap = compute_index_map(ev, window=(150, 250), resolution=(4, 4))
        assert imap.counts[1, 1] == 1

    def test_index_invariant_under_polarity_swap(self):
        rng = np.random.default_rng(3)
        rows = [(int(t), 5, 5, int(p)) for t, p in zip(np.arange(100) * 7, rng.choice([1, -1], 100))]
        ev = make_events(rows)
        swapped = ev.copy()
        swapped["p"] = -swapped["p"]
        a = compute_index_map(ev, resolution=(10, 10)).index
        b = compute_index_map(swapped, resolution=(10, 10)).index
        assert np.array_equal(a, b)

    def test_balanced_beats_unbalanced_at_equal_count(self):
        balanced = make_events(pixel_events(1, 1, 40, 40))
        drift = make_events(pixel_events(2, 2, 60, 20))
        imap = compute_index_map(np.concatenate([balanced, drift]), resolution=(8, 8))
        assert imap.counts[1, 1] == imap.counts[2, 2]
        assert imap.index[1, 1] > imap.index[2, 2]

    def test_b_offset_validated(self):
        with pytest.raises(ValueError):
            compute_index_map(make_events([]), b_offset=0.0)


class TestDetectBlobs:
    def _map_from_counts(self, counts, pol=None):
        counts = np.asarray(counts, dtype=np.int64)
        if pol is None:
            pol = np.zeros_like(counts)
        from evlink.detector import IndexMap

        return IndexMap(counts, pol, (0.0, 1.0), 1.0)

    def test_hole_closed(self):
        counts = np.zeros((9, 9), dtype=int)
        counts[3:6, 3:6] = 60
        counts[4, 4] = 0  # hole below threshold
        imap = self._map_from_counts(counts)
        blobs = detect_blobs(imap, index_threshold=30.0, morph_radius=1, min_events=10)
        assert len(blobs) == 1
        assert len(blobs[0].pixels) == 9
        assert blobs[0].centroid == (4.0, 4.0)

    def test_distant_pixels_two_blobs(self):
        counts = np.zeros((20, 20), dtype=int)
        counts[2, 2] = 50
        counts[2, 13] = 80
        imap = self._map_from_counts(counts)
        blobs = detect_blobs(imap, index_threshold=10.0, morph_radius=1, min_events=10)
        assert len(blobs) == 2
        assert blobs[0].mean_index > blobs[1].mean_index  # sorted descending

    def test_zero_map_empty(self):
        imap = self._map_from_counts(np.zeros((6, 6), dtype=int))
        assert detect_blobs(imap) == []

    def test_default_threshold_half_of_max(self):
        counts = np.zeros((8, 8), dtype=int)
        counts[1, 1] = 100
        counts[5, 5] = 40  # below half of max
        imap = self._map_from_counts(counts)
        blobs = detect_blobs(imap, morph_radius=0)
        assert len(blobs) == 1

    def test_min_events_floor(self):
        counts = np.zeros((8, 8), dtype=int)
        counts[1, 1] = 6  # high index but few events
        imap = self._map_from_counts(counts)
        assert detect_blobs(imap, index_threshold=1.0, min_events=10) == []

    def test_eight_connectivity(self):
        counts = np.zeros((8, 8), dtype=int)
        counts[1, 1] = 50
        counts[2, 2] = 50  # diagonal neighbour
        imap = self._map_from_counts(counts)
        blobs = detect_blobs(imap, index_threshold=10.0, morph_radius=0, min_events=10)
        assert len(blobs) == 1


class TestTrackBlobs:
    def blob(self, u, v, idx=10.0):
        return Blob(np.array([[u, v]]), (float(u), float(v)), idx)

    def test_nearby_match_keeps_id(self):
        tracks = [BlobTrack(0, (10.0, 10.0), np.array([[10, 10]]), 5.0)]
        out, nid = track_blobs(tracks, [self.blob(11, 10)], max_dist=5.0)
        assert len(out) == 1 and out[0].id == 0
        assert out[0].centroid == (11.0, 10.0)

    def test_far_detection_new_id(self):
        tracks = [BlobTrack(0, (10.0, 10.0), np.array([[10, 10]]), 5.0)]
        out, nid = track_blobs(tracks, [self.blob(100, 100)], max_dist=5.0, next_id=1)
        ids = sorted(t.id for t in out)
        assert ids == [0, 1]
        assert nid == 2

    def test_greedy_min_assignment(self):
        # track 0 at x=0, track 1 at x=10; detections at x=4 and x=6.
        # best-pair-first matches (t1, x=6) small? distances: t0-d(4)=4, t0-d(6)=6,
        # t1-d(4)=6, t1-d(6)=4 -> greedy picks t0<->4 and t1<->6 (total 8, the minimum)
        tracks = [
            BlobTrack(0, (0.0, 0.0), np.array([[0, 0]]), 5.0),
            BlobTrack(1, (10.0, 0.0), np.array([[10, 0]]), 5.0),
        ]
        out, _ = track_blobs(tracks, [self.blob(4, 0), self.blob(6, 0)], max_dist=20.0)
        by_id = {t.id: t for t in out}
        assert by_id[0].centroid == (4.0, 0.0)
        assert by_id[1].centroid == (6.0, 0.0)

    def test_grace_then_retire(self):
        tracker = BlobTracker(max_dist=5.0, grace=2)
        tracker.update([self.blob(10, 10)])
        assert len(tracker.tracks) == 1
        tracker.update([])
        tracker.update([])
        assert len(tracker.tracks) == 1  # still within grace
        tracker.update([])
        assert tracker.tracks == []

    def test_determinism(self):
        rng = np.random.default_rng(8)
        dets1 = [self.blob(int(u), int(v)) for u, v in rng.integers(0, 50, (6, 2))]
        a = BlobTracker()
        b = BlobTracker()
        for _ in range(3):
            a.update(dets1)
            b.update(dets1)
        assert [(t.id, t.centroid) for t in a.tracks] == [(t.id, t.centroid) for t in b.tracks]


class TestSlotManager:
    def tracks(self):
        return [
            BlobTrack(0, (0.0, 0.0), np.array([[0, 0]]), 30.0),
            BlobTrack(1, (5.0, 5.0), np.array([[5, 5]]), 50.0),
            BlobTrack(2, (9.0, 9.0), np.array([[9, 9]]), 10.0),
        ]

    def test_top_n_by_index(self):
        slots = manage_slots(self.tracks(), 2)
        assert slots == [1, 0]

    def test_rejected_slot_refilled(self):
        tracks = self.tracks()
        mgr = SlotManager(2)
        assert mgr.update(tracks) == [1, 0]
        assert mgr.update(tracks, rejected_ids=[1]) == [2, 0]
        assert tracks[1].state == "demoted"

    def test_idle_slots_when_few_tracks(self):
        slots = manage_slots(self.tracks()[:1], 3)
        assert slots == [0, None, None]

    def test_demoted_only_after_fresh_exhausted(self):
        tracks = self.tracks()
        mgr = SlotManager(1)
        assert mgr.update(tracks) == [1]
        assert mgr.update(tracks, rejected_ids=[1]) == [0]  # fresh candidate first
        assert mgr.update(tracks, rejected_ids=[0]) == [2]  # last fresh one
        # all fresh tried: the demoted ones become eligible again
        assert mgr.update(tracks, rejected_ids=[2]) == [1]


class TestBeaconVersusDrift:
    def test_modulated_blob_outranks_drift(self):
        # a flickering beacon pixel and a monotone-drift pixel with a similar
        # event rate: the balanced polarity of the beacon wins the index
        bit_rate = 1000.0
        wf = bits_to_waveform(encode_message("INDEX TEST"), bit_rate, t0=0.0)
        cfg = ChannelConfig()
        beacon_ev = simulate_pixel(led_log_intensity(wf, amplitude=1.0), cfg, wf.t_end, u=1, v=1)
        n = len(beacon_ev)
        drift = PiecewiseLinear([0.0, wf.t_end], [0.0, (n + 0.5) * cfg.c_pos])
        drift_ev = simulate_pixel(drift, cfg, wf.t_end, u=5, v=5)
        assert abs(len(drift_ev) - n) <= 1
        ev = np.concatenate([beacon_ev, drift_ev])
        ev = ev[np.argsort(ev["t"], kind="stable")]
        imap = compute_index_map(ev, resolution=(10, 10))
        assert imap.index[1, 1] > imap.index[5, 5]


class TestSceneDetection:
    def test_beacon_found_in_scene(self):
        wf = bits_to_waveform(encode_message("FIND ME"), 500.0, t0=0.0)
        beacon = BeaconPlacement(wf, square_footprint(320, 240, 3))
        ev = simulate_scene([beacon], ChannelConfig())
        imap = compute_index_map(ev, window=(0, 44_000), resolution=(640, 480))
        blobs = detect_blobs(imap)
        assert len(blobs) == 1
        cu, cv = blobs[0].centroid
        assert abs(cu - 320) <= 1 and abs(cv - 240) <= 1
