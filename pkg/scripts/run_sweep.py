#!/usr/bin/env python3
"""Run the compression x memory-length sweep and print the resulting grid.

Usage:
    python scripts/run_sweep.py [--config scripts/example_config.json]
                                [--out OUT_DIR] [--jobs N]

Each row is one (memory_length, compression_blocks) cell; cells whose
history would not fit in the token budget are rendered with "-" values.
"""

import argparse
import sys
from pathlib import Path

from lifenav.cli import main as cli_main
from lifenav.config import ExperimentConfig


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="scripts/example_config.json")
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args(argv)

    common = ["--config", args.config, "--jobs", str(args.jobs)]
    if args.out:
        common += ["--out", args.out]

    cfg = ExperimentConfig.from_json_file(args.config)
    out_dir = Path(args.out or cfg.out_dir)
    if not (out_dir / "scenes").is_dir():
        code = cli_main(common + ["gen-scenes"])
        if code != 0:
            return code
    code = cli_main(common + ["sweep"])
    if code != 0:
        return code
    print((out_dir / "sweep.csv").read_text())
    return 0


if __name__ == "__main__":
    sys.exit(run())
