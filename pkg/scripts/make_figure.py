#!/usr/bin/env python3
"""Render trajectory SVGs for episodes in a dataset.

Usage:
    python scripts/make_figure.py --out-dir OUT_DIR [--count N]

Expects OUT_DIR to contain dataset.jsonl and a scenes/ directory (as
written by `lifenav run`); writes figures/episode-NNN.svg next to them.
Exploration segments are solid; memory-recall segments are dashed.
"""

import argparse
import json
import sys
from pathlib import Path

from lifenav.datagen import read_dataset
from lifenav.plot import write_episode_svg
from lifenav.scene import load_scene


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out/example")
    parser.add_argument("--count", type=int, default=5)
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    episodes = read_dataset(out_dir / "dataset.jsonl")
    scenes = {}
    for path in sorted((out_dir / "scenes").glob("scene-*.json")):
        sid = json.loads(path.read_text())["scene_id"]
        scenes[sid] = path

    fig_dir = out_dir / "figures"
    fig_dir.mkdir(exist_ok=True)
    for i, episode in enumerate(episodes[: args.count]):
        scene = load_scene(scenes[episode.scene_id])
        svg_path = fig_dir / f"episode-{i:03d}.svg"
        write_episode_svg(scene, episode, svg_path)
        print(f"wrote {svg_path}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
