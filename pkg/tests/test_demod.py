import math

import numpy as np
import pytest

from evlink.channel import ChannelConfig, led_log_intensity, simulate_pixel
from evlink.codec import bits_to_waveform, encode_char, encode_message
from evlink.demod import (
    EdgeSequence,
    HighpassFilter,
    alpha_for_bit_rate,
    edges_from_waveform,
    hysteresis_trigger,
)


def events_from(t_us, pol):
    out = np.zeros(len(t_us), dtype=[("t", np.int64), ("u", np.int32), ("v", np.int32), ("p", np.int8)])
    out["t"] = t_us
    out["p"] = pol
    return out


class TestHighpassFilter:
    def test_zero_elapsed_kick(self):
        f = HighpassFilter(alpha=100.0, pos_weight=0.2, neg_weight=0.2)
        assert f.update(0, +1) == pytest.approx(0.2)

    def test_decay_law(self):
        f = HighpassFilter(alpha=100.0, pos_weight=1.0, neg_weight=1.0)
        f.update(0, +1)
        # one time constant later the sample shows e^-1 of the kick
        assert f.sample(10_000) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_half_life(self):
        f = HighpassFilter(alpha=50.0)
        f.update(0, +1)
        t_half = int(round(math.log(2) / 50.0 * 1e6))  # quantised to 1 us
        assert f.sample(t_half) == pytest.approx(f.l_hat / 2, rel=1e-4)

    def test_sample_does_not_mutate(self):
        f = HighpassFilter(alpha=100.0)
        f.update(0, +1)
        before = (f.l_hat, f.t_last_us)
        f.sample(123_456)
        assert (f.l_hat, f.t_last_us) == before

    def test_far_future_decays_to_zero(self):
        f = HighpassFilter(alpha=100.0)
        f.update(0, +1)
        assert f.sample(100_000_000) == pytest.approx(0.0, abs=1e-12)

    def test_out_of_order_rejected(self):
        f = HighpassFilter(alpha=100.0)
        f.update(1000, +1)
        with pytest.raises(ValueError):
            f.update(999, +1)
        with pytest.raises(ValueError):
            f.sample(500)

    def test_impulse_decay_with_default_alpha(self):
        # alpha = f/3 decays an isolated impulse to e^(-2/3) over 2 bit periods
        bit_rate = 500.0
        f = HighpassFilter(alpha=alpha_for_bit_rate(bit_rate), pos_weight=1.0, neg_weight=1.0)
        f.update(0, +1)
        two_bits_us = int(round(2e6 / bit_rate))
        assert f.sample(two_bits_us) == pytest.approx(math.exp(-2.0 / 3.0), abs=1e-9)

    def test_alternating_events_geometric_bound(self):
        alpha = 300.0
        w = 0.4
        for delta_us in (500, 2000, 10_000):
            f = HighpassFilter(alpha=alpha, pos_weight=w, neg_weight=w)
            bound = w / (1.0 - math.exp(-alpha * delta_us * 1e-6))
            pol = 1
            for k in range(400):
                val = f.update(k * delta_us, pol)
                assert abs(val) <= bound + 1e-12
                pol = -pol


class TestEdgeSequence:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            EdgeSequence(np.array([10, 10]), np.array([1, -1]))
        with pytest.raises(ValueError):
            EdgeSequence(np.array([10, 20]), np.array([1, 1]))

    def test_level_reconstruction(self):
        e = EdgeSequence(np.array([100, 200]), np.array([-1, 1]))
        assert e.level_at(50) == 1
        assert e.level_at(100) == 0
        assert e.level_at(150) == 0
        assert e.level_at(200) == 1

    def test_falling_times(self):
        e = EdgeSequence(np.array([100, 200, 300]), np.array([-1, 1, -1]))
        assert list(e.falling_times) == [100, 300]


class TestHysteresisTrigger:
    def test_burst_gives_single_rising_edge(self):
        t = np.arange(0, 50, 1)
        ev = events_from(t, np.ones(len(t)))
        edges = hysteresis_trigger(
            ev, alpha=100.0, theta_hi=0.5, theta_lo=-0.5, initial="low", pos_weight=0.1, neg_weight=0.1
        )
        assert len(edges) == 1
        assert edges.directions[0] == 1

    def test_oscillation_inside_thresholds_silent(self):
        t = np.arange(0, 4000, 10)
        pol = np.where(np.arange(len(t)) % 2 == 0, 1, -1)
        ev = events_from(t, pol)
        edges = hysteresis_trigger(
            ev, alpha=100.0, theta_hi=5.0, theta_lo=-5.0, pos_weight=0.1, neg_weight=0.1
        )
        assert len(edges) == 0

    def test_s_packet_edge_count_matches_transitions(self):
        # 0 1010011 0 11 in an idle-high context has 8 level transitions
        bits = encode_char("S").bits()
        wf = bits_to_waveform(bits, 500.0, t0=0.01)
        assert len(wf.transitions) == 8
        cfg = ChannelConfig()
        ev = simulate_pixel(led_log_intensity(wf, amplitude=1.0), cfg, wf.t_end + 0.02)
        edges = hysteresis_trigger(
            ev, alpha=alpha_for_bit_rate(500.0), adaptive_window_us=22_000.0
        )
        assert len(edges) == 8
        assert list(edges.directions) == [-1, 1, -1, 1, -1, 1, -1, 1]

    def test_edges_near_true_transitions(self):
        # ideal channel: every trigger lands within 1.5 mean event spacings
        # of a true waveform transition
        text_bits = encode_message("EDGE TIMING")
        wf = bits_to_waveform(text_bits, 500.0, t0=0.01)
        cfg = ChannelConfig()
        ev = simulate_pixel(led_log_intensity(wf, amplitude=1.0), cfg, wf.t_end + 0.02)
        edges = hysteresis_trigger(ev, alpha=alpha_for_bit_rate(500.0), adaptive_window_us=22_000.0)
        true_t = np.array([t for t, _ in wf.transitions]) * 1e6
        assert len(edges) == len(true_t)
        spacing = (ev["t"][-1] - ev["t"][0]) / max(len(ev) - 1, 1)
        assert np.all(np.abs(edges.times - true_t) <= 1.5 * spacing)

    def test_alternation_guaranteed(self):
        rng = np.random.default_rng(0)
        t = np.cumsum(rng.integers(1, 50, size=3000))
        pol = np.where(rng.random(3000) < 0.5, 1, -1)
        edges = hysteresis_trigger(
            events_from(t, pol), alpha=200.0, theta_hi=0.3, theta_lo=-0.3
        )
        if len(edges) > 1:
            assert np.all(edges.directions[1:] != edges.directions[:-1])

    def test_threshold_validation(self):
        ev = events_from([0], [1])
        with pytest.raises(ValueError):
            hysteresis_trigger(ev, alpha=10.0, theta_hi=-0.1, theta_lo=0.1)
        with pytest.raises(ValueError):
            hysteresis_trigger(ev, alpha=10.0, theta_hi=0.5)  # half-specified
        with pytest.raises(ValueError):
            hysteresis_trigger(ev, alpha=10.0)  # adaptive without window


def test_edges_from_waveform_matches_transitions():
    wf = bits_to_waveform(encode_message("W"), 500.0, t0=0.004)
    edges = edges_from_waveform(wf)
    assert len(edges) == len(wf.transitions)
    assert edges.times[0] == 4000
