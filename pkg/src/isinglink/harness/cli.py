"""Command-line entry point.

    isinglink detect-sweep  --config cfg.txt [--set key=value ...]
    isinglink precode-sweep --config cfg.txt ...
    isinglink heatmap       --config cfg.txt ...
    isinglink bench         --config cfg.txt ...

``--seed``, ``--workers`` and ``--out`` are shortcuts for the corresponding
config keys; ``--set`` overrides win over the config file.  Exit code 0 on
success, 2 with a diagnostic line on any error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import run_bench
from .config import build_config, config_hash, parse_kv_text
from .heatmap import run_integration_heatmap
from .sweeps import run_detection_sweep, run_precoding_sweep

_SUBCOMMANDS = {
    "detect-sweep": ("uplink_sweep", run_detection_sweep),
    "precode-sweep": ("downlink_sweep", run_precoding_sweep),
    "heatmap": ("heatmap", run_integration_heatmap),
    "bench": ("bench", run_bench),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isinglink",
        description="Ising-machine MIMO detection / precoding experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key=value config file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
        p.add_argument("--seed", type=int, help="shortcut for seed=...")
        p.add_argument("--workers", type=int, help="shortcut for n_workers=...")
        p.add_argument("--out", help="shortcut for output_path=...")
    return parser


def _collect_pairs(args) -> dict:
    pairs: dict[str, str] = {}
    if args.config is not None:
        pairs.update(parse_kv_text(Path(args.config).read_text()))
    for item in args.set:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        pairs[key.strip()] = value.strip()
    if args.seed is not None:
        pairs["seed"] = str(args.seed)
    if args.workers is not None:
        pairs["n_workers"] = str(args.workers)
    if args.out is not None:
        pairs["output_path"] = args.out
    return pairs


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    mode, runner = _SUBCOMMANDS[args.command]
    try:
        pairs = _collect_pairs(args)
        if pairs.get("mode", mode) != mode:
            raise ValueError(
                f"config mode {pairs['mode']!r} conflicts with subcommand {args.command!r}"
            )
        pairs["mode"] = mode
        cfg = build_config(pairs)
        result = runner(cfg)
    except Exception as exc:  # surface one diagnostic line, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"config_hash: {config_hash(cfg)}")
    if isinstance(result, dict):
        for entry in result["scaling"]:
            print(
                f"workers={entry['n_workers']}  wall={entry['wall_time_s']:.3f}s"
                f"  efficiency={entry['efficiency']:.2f}"
            )
        print(f"outputs_identical: {result['outputs_identical']}")
    else:
        for row in result:
            print(row)
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
