"""Command-line entry point: encode / simulate / decode / evaluate / sweep.

Exit codes: 0 success, 2 no usable signal, 3 configuration error, 4 I/O error.
All commands are deterministic given their inputs and --seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import codec, decoder, demod, detector, eventio, metrics, pipeline
from .channel import ChannelConfig
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .sync import NoSignalError

EXIT_OK = 0
EXIT_NO_SIGNAL = 2
EXIT_CONFIG = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract reserves 2 for
    # "no signal", so usage/config problems map to 3
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="evlink", description=__doc__)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key"
    )
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="text -> bit file + waveform file")
    g = enc.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--text-file")
    enc.add_argument("--repeat", type=int, default=1, help="send the message this many times")
    enc.add_argument("--bits-out", help="write the bit sequence as an ASCII 0/1 string")
    enc.add_argument("--waveform-out", help="write the waveform CSV")

    sim = sub.add_parser("simulate", help="waveform file -> event file")
    sim.add_argument("--waveform", required=True)
    sim.add_argument("--events-out", required=True)
    sim.add_argument("--binary", action="store_true", help="write packed binary events")
    sim.add_argument("--duration", type=float, help="simulated span in seconds")

    dec = sub.add_parser("decode", help="event file -> text + sidecar CSV")
    dec.add_argument("--events", required=True)
    dec.add_argument("--text-out")
    dec.add_argument("--csv-out")
    dec.add_argument("--debug-traces", metavar="DIR", help="dump index/track/filter/edge/sync traces")

    ev = sub.add_parser("evaluate", help="event file vs reference text -> report CSV")
    ev.add_argument("--events", required=True)
    ev.add_argument("--reference-file", required=True)
    ev.add_argument("--repeat", type=int, default=1, help="reference was sent this many times")
    ev.add_argument("--report-out", required=True)

    sw = sub.add_parser("sweep", help="grid CSV x repetitions -> report CSV")
    sw.add_argument("--grid", required=True, help="CSV with bit_rate,noise_rate,amplitude,slew_rate[,refractory_us,jitter_std_us] rows")
    g = sw.add_mutually_exclusive_group(required=True)
    g.add_argument("--text")
    g.add_argument("--text-file")
    sw.add_argument("--reps", type=int, default=1)
    sw.add_argument("--report-out", required=True)
    return p


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    if args.seed is not None:
        cfg = apply_overrides(cfg, [f"seed={args.seed}"])
    return cfg.validate()


def _read_text(args) -> str:
    if getattr(args, "text", None) is not None:
        return args.text
    with open(args.text_file) as f:
        return f.read()


def cmd_encode(args, cfg: RunConfig) -> int:
    text = _read_text(args)
    messages = [text] * args.repeat if args.repeat > 1 else text
    bits, waveform = pipeline.transmit(messages, cfg)
    if args.bits_out:
        with open(args.bits_out, "w") as f:
            f.write(codec.bits_to_string(bits) + "\n")
    if args.waveform_out:
        codec.write_waveform_csv(args.waveform_out, waveform)
    print(f"characters: {len(text) * args.repeat}")
    print(f"bits: {len(bits)}")
    return EXIT_OK


def cmd_simulate(args, cfg: RunConfig) -> int:
    waveform = codec.read_waveform_csv(args.waveform)
    events = pipeline.simulate(waveform, cfg, args.duration)
    eventio.write_events(args.events_out, events, binary=args.binary or None)
    print(f"events: {len(events)}")
    return EXIT_OK


def _write_traces(trace_dir: str, result: pipeline.ReceiveResult) -> None:
    os.makedirs(trace_dir, exist_ok=True)
    traces = result.traces
    if traces.get("index_map") is not None:
        detector.write_index_map_csv(os.path.join(trace_dir, "index_map.csv"), traces["index_map"])
    detector.write_track_log_csv(os.path.join(trace_dir, "tracks.csv"), traces.get("tracks", []))
    for key, value in traces.items():
        if key.startswith("filter_") and value is not None:
            demod.write_trace_csv(os.path.join(trace_dir, f"{key}.csv"), value)
        elif key.startswith("edges_") and value is not None:
            demod.write_edges_csv(os.path.join(trace_dir, f"{key}.csv"), value)
        elif key.startswith("sync_") and value is not None:
            with open(os.path.join(trace_dir, f"{key}.csv"), "w") as f:
                f.write("char_index,t_k_us,found_edge,parity_ok,status\n")
                for idx, t_k, found, p_ok, status in value:
                    f.write(f"{idx},{int(round(t_k))},{int(found)},{int(p_ok)},{status}\n")


def cmd_decode(args, cfg: RunConfig) -> int:
    events = eventio.read_events(args.events)
    result = pipeline.receive(events, cfg, collect_traces=bool(args.debug_traces))
    if args.debug_traces:
        _write_traces(args.debug_traces, result)
    if args.text_out:
        with open(args.text_out, "w") as f:
            f.write(result.text)
    if args.csv_out:
        merged = [c for b in result.beacons for c in b.chars]
        decoder.write_decode_csv(args.csv_out, merged)
    if not result.beacons:
        print("no beacon accepted")
        return EXIT_NO_SIGNAL
    print(f"beacons: {len(result.beacons)}")
    print(f"characters: {sum(len(''.join(b.messages)) for b in result.beacons)}")
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    events = eventio.read_events(args.events)
    with open(args.reference_file) as f:
        reference = f.read()
    messages = [reference] * args.repeat
    try:
        result = pipeline.receive(events, cfg)
        accepted = bool(result.beacons)
        decoded = result.beacons[0].chars if accepted else []
    except NoSignalError:
        accepted, decoded = False, []
    report = metrics.evaluate_decode(decoded, messages, cfg.parity_mode, cfg.msb_first, accepted)
    row = metrics.SweepRow(
        cfg.bit_rate, cfg.noise_rate, cfg.amplitude, cfg.slew_rate, 0, report
    )
    metrics.write_report_csv(args.report_out, [row])
    print(f"mer: {report.mer!r}")
    print(f"ber: {report.ber!r}")
    return EXIT_OK


def _read_grid(path, cfg: RunConfig) -> list[tuple[float, ChannelConfig]]:
    base = cfg.channel_config()
    cells: list[tuple[float, ChannelConfig]] = []
    with open(path) as f:
        header = None
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [s.strip() for s in line.split(",")]
            if header is None and any(not _is_number(s) for s in parts):
                header = parts
                continue
            if header is None:
                header = ["bit_rate", "noise_rate", "amplitude", "slew_rate"][: len(parts)]
            row = dict(zip(header, parts))
            try:
                bit_rate = float(row.pop("bit_rate"))
                overrides = {k: float(v) for k, v in row.items()}
            except (KeyError, ValueError) as e:
                raise ConfigError(f"bad grid row {line!r}: {e}") from e
            unknown = set(overrides) - {
                "noise_rate", "amplitude", "slew_rate", "refractory_us", "jitter_std_us",
                "c_pos", "c_neg", "noise_pos_fraction",
            }
            if unknown:
                raise ConfigError(f"unknown grid columns: {sorted(unknown)}")
            cells.append((bit_rate, replace(base, **overrides)))
    if not cells:
        raise ConfigError(f"{path}: empty grid")
    return cells


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_sweep(args, cfg: RunConfig) -> int:
    text = _read_text(args)
    grid = _read_grid(args.grid, cfg)
    rows = metrics.sweep(grid, text, repetitions=args.reps, seed=cfg.seed, base_cfg=cfg)
    metrics.write_report_csv(args.report_out, rows)
    print(f"cells: {len(grid)}  rows: {len(rows)}")
    return EXIT_OK


_COMMANDS = {
    "encode": cmd_encode,
    "simulate": cmd_simulate,
    "decode": cmd_decode,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        return _COMMANDS[args.command](args, cfg)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NoSignalError as e:
        print(f"no signal: {e}", file=sys.stderr)
        return EXIT_NO_SIGNAL
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
