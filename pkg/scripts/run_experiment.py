#!/usr/bin/env python3
"""Generate scenes, produce an episode dataset, and print metrics.

Usage:
    python scripts/run_experiment.py [--config scripts/example_config.json]
                                     [--out OUT_DIR] [--jobs N]

Thin wrapper over the `lifenav` CLI so a full run is a single command.
"""

import argparse
import sys

from lifenav.cli import main as cli_main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="scripts/example_config.json")
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--overwrite", action="store_true")
    args = parser.parse_args(argv)

    common = ["--config", args.config, "--jobs", str(args.jobs)]
    if args.out:
        common += ["--out", args.out]
    gen = common + (["--overwrite"] if args.overwrite else []) + ["gen-scenes"]
    code = cli_main(gen)
    if code != 0:
        return code
    return cli_main(common + ["run"])


if __name__ == "__main__":
    sys.exit(run())
