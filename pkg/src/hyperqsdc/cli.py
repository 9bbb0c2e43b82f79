"""Command line entry points.

Three subcommands:

``simulate``      run a batch of sessions from a config file, write a
                  JSON stats document (and optional JSONL transcripts).
``attack-sweep``  rerun the configured scenario across one parameter
                  axis, write a CSV of pooled statistics per point.
``source-scan``   exact source fidelity and check error rates over an
                  (r, phi) grid, no sampling involved, write a CSV.

Every failure path prints a one-line diagnostic to stderr and exits
nonzero; success is silent apart from a timing note on stderr.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    SWEEP_AXES,
    attack_sweep,
    load_run_config,
    run,
    scan_csv,
    source_fidelity_scan,
    stats_text,
    sweep_csv,
    write_transcripts,
)
from .protocol import ConfigError


def _float_list(raw: str) -> list[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma separated list of numbers, got {raw!r}") from None


def _str_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _cmd_simulate(args) -> int:
    rc = load_run_config(args.config)
    seed = rc.seed if args.seed is None else args.seed
    stats, transcripts = run(rc, seed, collect_transcripts=args.transcripts)
    _write(args.out, stats_text(rc, seed, stats))
    if args.transcripts:
        write_transcripts(args.out + ".transcripts.jsonl", transcripts)
    print(
        f"{stats.sessions} sessions ({stats.accepted} accepted, {stats.aborted} aborted) "
        f"in {stats.wall_time:.2f}s -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_attack_sweep(args) -> int:
    rc = load_run_config(args.config)
    if args.axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {args.axis!r}; choose from {', '.join(SWEEP_AXES)}")
    values = _str_list(args.values) if args.axis == "strategy" else _float_list(args.values)
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    if args.axis in ("n_pairs", "sessions"):
        values = [int(v) for v in values]
    rows = attack_sweep(rc, args.axis, values)
    _write(args.out, sweep_csv(args.axis, rows))
    print(f"{len(rows)} sweep points -> {args.out}", file=sys.stderr)
    return 0


def _cmd_source_scan(args) -> int:
    rows = source_fidelity_scan(_float_list(args.r), _float_list(args.phi))
    _write(args.out, scan_csv(rows))
    print(f"{len(rows)} grid points -> {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperqsdc",
        description="Two-photon hyperentangled direct-communication simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run sessions from a config file")
    sim.add_argument("--config", required=True, help="INI config file path")
    sim.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    sim.add_argument("--out", required=True, help="stats JSON output path")
    sim.add_argument(
        "--transcripts",
        action="store_true",
        help="also write per-session event logs next to the stats file",
    )
    sim.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("attack-sweep", help="rerun a scenario across one parameter axis")
    sweep.add_argument("--config", required=True, help="INI config file path")
    sweep.add_argument("--axis", required=True, help=f"one of: {', '.join(SWEEP_AXES)}")
    sweep.add_argument("--values", required=True, help="comma separated axis values")
    sweep.add_argument("--out", required=True, help="CSV output path")
    sweep.set_defaults(func=_cmd_attack_sweep)

    scan = sub.add_parser("source-scan", help="exact source quality over an (r, phi) grid")
    scan.add_argument("--r", required=True, help="comma separated amplitude ratios")
    scan.add_argument("--phi", required=True, help="comma separated relative phases (radians)")
    scan.add_argument("--out", required=True, help="CSV output path")
    scan.set_defaults(func=_cmd_source_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
