"""Command-line front end.

Subcommands: ``derive`` (generator diagnostics), ``optimize-placement``,
``ber-sweep``, ``mse-probe`` and ``snapshot``.  Exit codes: 0 success,
2 configuration/usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import channel as chan
from . import frame, harness
from .errors import ConfigError, NearSingularChannelError, NumericallySingularError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="config file (flat key/value format)")
    sub.add_argument("--seed", type=int, default=1, help="master seed (u64)")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--workers", type=int, default=None,
                     help="parallel workers (default: $UWOFDM_WORKERS or 1)")
    sub.add_argument("--channel", default="ensemble",
                     help="'ensemble' or 'fixed:<fixture path>'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwofdm",
        description="Unique-word OFDM simulation toolkit")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("derive", help="derive the redundancy generator and "
                                       "print its diagnostics")
    _add_common(p)

    p = subs.add_parser("optimize-placement",
                        help="search redundant-carrier placements")
    _add_common(p)
    p.add_argument("--strategy", choices=("greedy", "exhaustive"), default=None,
                   help="search strategy (default from config, else greedy)")

    p = subs.add_parser("ber-sweep", help="run a Monte-Carlo BER sweep")
    _add_common(p)

    p = subs.add_parser("mse-probe", help="per-carrier MSE probe on a fixed channel")
    _add_common(p)

    p = subs.add_parser("snapshot", help="search and save a pinned channel snapshot")
    _add_common(p)

    return parser


def _load_values(args) -> dict:
    return harness.parse_config_file(args.config) if args.config else {}


def _require_out(args) -> str:
    if not args.out:
        raise ConfigError("--out is required for this subcommand")
    return args.out


def cmd_derive(args) -> int:
    values = _load_values(args)
    config = harness.system_config_from(values)
    gen = frame.derive_generator(frame.build_subcarrier_map(config))
    rows, cols = gen.redundancy.shape
    print(f"generator shape: {rows} x {cols}")
    print(f"redundant energy trace(T T^H): {frame.redundant_energy_metric(gen):.10g}")
    print(f"tail system condition number: {gen.tail_condition:.10g}")
    return EXIT_OK


def cmd_optimize_placement(args) -> int:
    values = _load_values(args)
    config = harness.system_config_from(values)
    strategy = args.strategy or values.get("placement_strategy", "greedy")
    indices, metric = frame.optimize_placement(config, strategy)
    reference = frame.derive_generator(frame.build_subcarrier_map(config))
    print(f"strategy: {strategy}")
    print(f"indices: {list(indices)}")
    print(f"metric trace(T T^H): {metric:.10g}")
    print(f"configured placement metric: "
          f"{frame.redundant_energy_metric(reference):.10g}")
    return EXIT_OK


def cmd_ber_sweep(args) -> int:
    values = _load_values(args)
    spec = harness.sweep_spec_from(values, seed=args.seed, channel=args.channel)
    report = harness.run_ber_sweep(spec, workers=args.workers)
    out = _require_out(args)
    harness.write_ber_csv(out, report)
    print(f"wrote {len(report.points)} points to {out}")
    return EXIT_OK


def cmd_mse_probe(args) -> int:
    values = _load_values(args)
    config = harness.system_config_from(values)
    if not args.channel.startswith("fixed:"):
        raise ConfigError("mse-probe needs --channel fixed:<fixture path>")
    fixture = args.channel[len("fixed:"):]
    try:
        ch = chan.load_snapshot(fixture, guard_length=config.uw_length)
    except OSError as exc:
        raise ConfigError(f"cannot read channel fixture {fixture}: {exc}") from exc
    ebn0 = values.get("mse_ebn0_db", 15.0)
    n_symbols = values.get("mse_symbols", 100_000)
    rows = harness.run_mse_probe(config, ch, ebn0_db=ebn0,
                                 n_symbols=n_symbols, seed=args.seed)
    out = _require_out(args)
    harness.write_mse_csv(out, rows, metadata=(
        ("channel", args.channel),
        ("ebn0_db", harness._fmt(float(ebn0))),
        ("symbols", str(n_symbols)),
        ("seed", str(args.seed)),
        ("config_hash", harness.config_hash(config)),
    ))
    print(f"wrote {len(rows)} carriers to {out}")
    return EXIT_OK


def cmd_snapshot(args) -> int:
    values = _load_values(args)
    config = harness.system_config_from(values)
    predicate = chan.notch_predicate(config.active_indices)
    taps = values.get("channel_taps", chan.DEFAULT_TAP_COUNT)
    tau = values.get("rms_delay_spread_s", chan.DEFAULT_RMS_DELAY_SPREAD_S)
    ch, draw = chan.pinned_snapshot(
        args.seed, predicate, rms_delay_spread_s=tau,
        sample_rate_hz=config.sample_rate_hz, tap_count=taps,
        dft_size=config.dft_size, guard_length=config.uw_length)
    out = _require_out(args)
    chan.save_snapshot(out, ch, seed=args.seed, draw=draw,
                       dft_size=config.dft_size)
    power = np.abs(ch.active_response(config.active_indices)) ** 2
    depth = 10 * np.log10(power / power.mean())
    print(f"wrote snapshot (seed={args.seed}, draw={draw}) to {out}")
    print(f"deepest carriers [dB rel mean]: {np.sort(depth)[:3].round(2).tolist()}")
    return EXIT_OK


_COMMANDS = {
    "derive": cmd_derive,
    "optimize-placement": cmd_optimize_placement,
    "ber-sweep": cmd_ber_sweep,
    "mse-probe": cmd_mse_probe,
    "snapshot": cmd_snapshot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return code
    try:
        if args.seed < 0:
            raise ConfigError("--seed must be a non-negative integer")
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericallySingularError, NearSingularChannelError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def console_entry() -> None:
    sys.exit(main())
