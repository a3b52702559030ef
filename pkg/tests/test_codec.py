import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evlink.codec import (
    DEFAULT_GAP_BITS,
    Packet,
    bits_from_string,
    bits_to_string,
    bits_to_waveform,
    decode_packet_bits,
    encode_char,
    encode_message,
    parity_bit,
    read_waveform_csv,
    waveform_to_bits,
    write_waveform_csv,
)
from evlink.corpus import SONNET_18

ascii_text = st.text(alphabet=st.characters(min_codepoint=0, max_codepoint=127), min_size=0, max_size=60)


class TestEncodeChar:
    def test_letter_s_matches_reference_waveform(self):
        # 'S' = 1010011 MSB-first, four ones -> even parity bit 0
        pkt = encode_char("S", "even")
        assert list(pkt.data_bits) == [1, 0, 1, 0, 0, 1, 1]
        assert pkt.parity == 0
        assert list(pkt.bits()) == [0, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1]

    def test_nul_even_parity(self):
        pkt = encode_char("\x00", "even")
        assert list(pkt.bits()) == [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1]

    def test_odd_parity_complements_even(self):
        for c in "Sa\x7f\x00":
            even = encode_char(c, "even").parity
            odd = encode_char(c, "odd").parity
            assert even != odd

    def test_non_ascii_rejected(self):
        with pytest.raises(ValueError):
            encode_char("é")

    def test_lsb_first_reverses_data(self):
        msb = encode_char("S", msb_first=True).data_bits
        lsb = encode_char("S", msb_first=False).data_bits
        assert msb == tuple(reversed(lsb))

    def test_packet_framing_enforced(self):
        with pytest.raises(ValueError):
            Packet((1, 0, 1, 0, 0, 1, 1), parity=0, start_bit=1)
        with pytest.raises(ValueError):
            Packet((1, 0, 1), parity=0)


class TestEncodeMessage:
    def test_sonnet_is_6798_bits(self):
        assert len(SONNET_18) == 618
        assert len(encode_message(SONNET_18)) == 6798

    def test_empty_message(self):
        assert len(encode_message("")) == 0

    def test_gap_only_between_messages(self):
        assert len(encode_message(["S", "S"], gap_bits=16)) == 11 + 16 + 11
        assert len(encode_message(["S", "S"], gap_bits=0)) == 22
        assert len(encode_message("SS", gap_bits=16)) == 22

    @given(ascii_text)
    def test_length_is_11n(self, text):
        assert len(encode_message(text)) == 11 * len(text)

    def test_gap_bits_are_high(self):
        bits = encode_message(["\x00", "\x00"], gap_bits=DEFAULT_GAP_BITS)
        assert np.all(bits[11:27] == 1)


class TestDecodePacketBits:
    def test_s_round_trip(self):
        out = decode_packet_bits([0, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1])
        assert out == ("S", True, True)

    def test_parity_flip_detected(self):
        out = decode_packet_bits([0, 1, 0, 1, 0, 0, 1, 1, 1, 1, 1])
        assert out.char == "S"
        assert not out.parity_ok
        assert out.framing_ok

    def test_framing_reported_separately(self):
        out = decode_packet_bits([1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1])
        assert not out.framing_ok
        assert out.parity_ok

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            decode_packet_bits([0, 1, 0])

    @pytest.mark.parametrize("parity_mode", ["even", "odd"])
    @pytest.mark.parametrize("msb_first", [True, False])
    def test_round_trip_all_ascii(self, parity_mode, msb_first):
        for code in range(128):
            pkt = encode_char(chr(code), parity_mode, msb_first)
            char, parity_ok, framing_ok = decode_packet_bits(pkt.bits(), parity_mode, msb_first)
            assert (char, parity_ok, framing_ok) == (chr(code), True, True)


class TestWaveform:
    def test_101_at_500bps(self):
        wf = bits_to_waveform([1, 0, 1], 500.0, t0=0.0)
        # idle is high, so the leading 1 produces no transition
        assert wf.transitions == [(0.002, 0), (0.004, 1)]
        assert wf.t_end == pytest.approx(0.006)

    def test_all_ones_no_transitions(self):
        wf = bits_to_waveform([1, 1, 1, 1], 1000.0)
        assert wf.transitions == []

    def test_s_packet_starts_with_falling_edge(self):
        wf = bits_to_waveform(encode_char("S").bits(), 500.0, t0=0.0)
        assert wf.transitions[0] == (0.0, 0)

    def test_trailing_zero_returns_to_idle(self):
        wf = bits_to_waveform([1, 0], 500.0)
        assert wf.transitions[-1] == (0.004, 1)

    @given(st.lists(st.integers(0, 1), min_size=0, max_size=200))
    @settings(max_examples=60)
    def test_transition_invariants_and_inverse(self, bits):
        wf = bits_to_waveform(bits, 1000.0, t0=0.25)
        ts = [t for t, _ in wf.transitions]
        levels = [l for _, l in wf.transitions]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert all(a != b for a, b in zip(levels, levels[1:]))
        # noise-free inverse: sampling at bit midpoints recovers the bits
        assert list(waveform_to_bits(wf)) == [int(b) for b in bits]

    def test_bad_bit_rate(self):
        with pytest.raises(ValueError):
            bits_to_waveform([1, 0], 0.0)


class TestSerialisation:
    def test_bit_string_round_trip(self):
        bits = encode_message("ROUND TRIP")
        assert np.array_equal(bits_from_string(bits_to_string(bits)), bits)

    def test_bit_string_rejects_junk(self):
        with pytest.raises(ValueError):
            bits_from_string("0102")

    def test_waveform_csv_round_trip(self, tmp_path):
        wf = bits_to_waveform(encode_message("CSV"), 1250.0, t0=0.125)
        path = tmp_path / "wf.csv"
        write_waveform_csv(path, wf)
        back = read_waveform_csv(path)
        assert back.transitions == wf.transitions
        assert back.bit_rate == wf.bit_rate
        assert back.t_start == wf.t_start
        assert back.t_end == wf.t_end


def test_parity_bit_modes():
    assert parity_bit([1, 0, 1, 0, 0, 1, 1], "even") == 0
    assert parity_bit([1, 0, 1, 0, 0, 1, 1], "odd") == 1
    with pytest.raises(ValueError):
        parity_bit([1, 0], "none")
