"""
Command-line scenario runner.

    zeno-lab run   --config scenario.json [--out-dir DIR] [--format csv|json|both] [--seed N]
    zeno-lab sweep --config sweep.json    [...]

Exit status: 0 success, 2 invalid config, 3 numerical failure.
The output directory defaults to $ZENO_LAB_OUT, then ./zeno_lab_out.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import FORMATS, load_config
from .errors import ConfigError, ZenoLabError
from .runner import run_scenario, run_sweep, write_report, write_sweep

log = logging.getLogger("zeno_lab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeno-lab", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run one scenario"), ("sweep", "sweep one parameter of a scenario")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON scenario config")
        p.add_argument("--out-dir", help="output directory (overrides config and $ZENO_LAB_OUT)")
        p.add_argument("--format", choices=("csv", "json", "both"), help="output format(s)")
        p.add_argument("--seed", type=int, help="random seed for stochastic collapse (overrides config)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _out_dir(args, cfg) -> str:
    return args.out_dir or cfg.out_dir or os.environ.get("ZENO_LAB_OUT") or "zeno_lab_out"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed", "must be an unsigned 64-bit integer")
            cfg = cfg.with_overrides(seed=args.seed)
        if args.format is not None:
            cfg = cfg.with_overrides(formats=FORMATS if args.format == "both" else (args.format,))
        out_dir = _out_dir(args, cfg)
        if args.command == "run":
            report = run_scenario(cfg)
            paths = write_report(report, out_dir, cfg.formats)
            last = report.rows[-1]
            print(
                f"{cfg.scenario}: k={report.k_analytic:.10g} (oracle {report.k_oracle:.10g}), "
                f"v0={report.v0:.10g}, P(N={last.N})={last.cumulative:.10g}, criterion={report.criterion}"
            )
        else:
            if cfg.sweep is None:
                raise ConfigError("sweep", "required for the sweep command")
            table = run_sweep(cfg)
            paths = write_sweep(table, out_dir, cfg.formats)
            print(f"{cfg.scenario}: swept {table.parameter} over {len(table.rows)} points")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ZenoLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
