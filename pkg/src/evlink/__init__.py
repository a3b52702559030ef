"""Event-camera optical link: encode text onto a blinking LED, simulate the
DVS channel, and decode it back with asynchronous filtering, blob tracking,
falling-edge synchronisation and parity checking."""

from .channel import (
    EVENT_DTYPE,
    BeaconPlacement,
    ChannelConfig,
    led_log_intensity,
    simulate_pixel,
    simulate_scene,
    square_footprint,
)
from .codec import (
    Packet,
    Waveform,
    bits_to_waveform,
    decode_packet_bits,
    encode_char,
    encode_message,
    waveform_to_bits,
)
from .config import ConfigError, RunConfig
from .decoder import DecodedChar, decode_stream, decoded_text, slice_packet
from .demod import EdgeSequence, HighpassFilter, alpha_for_bit_rate, hysteresis_trigger
from .detector import (
    Blob,
    BlobTrack,
    BlobTracker,
    IndexMap,
    SlotManager,
    compute_index_map,
    detect_blobs,
    track_blobs,
)
from .metrics import EvalReport, compute_ber, compute_mer, evaluate_decode, sweep
from .pipeline import ReceiveResult, receive, run_link, simulate, transmit
from .sync import NoSignalError, SyncState, initialize, next_boundary, update_parity

__version__ = "0.1.0"

__all__ = [
    "BeaconPlacement",
    "Blob",
    "BlobTrack",
    "BlobTracker",
    "ChannelConfig",
    "ConfigError",
    "DecodedChar",
    "EVENT_DTYPE",
    "EdgeSequence",
    "EvalReport",
    "HighpassFilter",
    "IndexMap",
    "NoSignalError",
    "Packet",
    "ReceiveResult",
    "RunConfig",
    "SlotManager",
    "SyncState",
    "Waveform",
    "alpha_for_bit_rate",
    "bits_to_waveform",
    "compute_ber",
    "compute_index_map",
    "compute_mer",
    "decode_packet_bits",
    "decode_stream",
    "decoded_text",
    "detect_blobs",
    "encode_char",
    "encode_message",
    "evaluate_decode",
    "hysteresis_trigger",
    "initialize",
    "led_log_intensity",
    "next_boundary",
    "receive",
    "run_link",
    "simulate",
    "simulate_pixel",
    "simulate_scene",
    "slice_packet",
    "square_footprint",
    "sweep",
    "track_blobs",
    "transmit",
    "update_parity",
    "waveform_to_bits",
]
