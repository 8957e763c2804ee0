"""Command-line entry point.

Subcommands: gen-scenes, run, sweep, plot, validate. A single JSON config
(--config) drives everything; flags override config values. Exit codes:
0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import datagen
from .compressor import NATIVE_TOKENS_PER_FRAME, CompressionConfig, token_count
from .config import ExperimentConfig
from .errors import LifenavError, ParseError, ValidationError
from .memory import max_history
from .metrics import per_category, spl, success_rate
from .plot import write_episode_svg
from .scene import generate_scene, load_scene, save_scene
from .datagen import (GoatEpisode, episode_seed, generate_goat_sequence,
                      generate_ovon_episode, read_dataset, write_dataset)

log = logging.getLogger("lifenav")

SWEEP_HEADER = ["memory_length", "compression_blocks", "r_spatial", "r_native",
                "tokens_per_frame", "feasible", "sr", "spl",
                "context_tokens", "attention_cost_proxy"]


def config_for_blocks(num_blocks: int, base: CompressionConfig) -> CompressionConfig:
    """Variant of the base compression config with a different block count."""
    final_width = base.channel_plan[-1] if base.channel_plan else 1280
    if num_blocks == 0:
        plan: tuple[int, ...] = ()
    elif num_blocks == len(base.channel_plan):
        plan = base.channel_plan
    else:
        plan = (64,) * (num_blocks - 1) + (final_width,)
    return replace(base, num_blocks=num_blocks, channel_plan=plan)


def tokens_per_frame_for_blocks(num_blocks: int, base: CompressionConfig) -> int:
    """Per-frame token cost of a sweep cell. Zero blocks is the
    uncompressed native baseline (the reported native token count);
    compressed cells use the pipeline's own count."""
    if num_blocks == 0:
        return NATIVE_TOKENS_PER_FRAME
    return token_count(config_for_blocks(num_blocks, base))


# -- episode generation helpers (top level so process pools can use them) --

def _episodes_for_scene(args):
    scene_path, cfg_doc = args
    cfg = ExperimentConfig.from_dict(cfg_doc)
    scene = load_scene(scene_path)
    tokens = token_count(cfg.compression)
    episodes = []
    for idx in range(cfg.episodes_per_scene):
        seed = episode_seed(scene.scene_id, idx, cfg.base_seed)
        if cfg.kind == "goat":
            episodes.append(generate_goat_sequence(
                scene, seed, cfg.num_subtasks, cfg.memory_length, cfg.explorer,
                tokens_per_frame=tokens, allowed_lengths=None))
        else:
            episodes.append(generate_ovon_episode(
                scene, seed, cfg.explorer, tokens_per_frame=tokens,
                max_frames=cfg.memory_length))
    return episodes


def _generate_all_episodes(cfg: ExperimentConfig, scene_paths, jobs: int):
    tasks = [(str(p), cfg.to_dict()) for p in scene_paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_episodes_for_scene, tasks))
    else:
        batches = [_episodes_for_scene(t) for t in tasks]
    return [ep for batch in batches for ep in batch]


def _all_outcomes(episodes):
    outcomes = []
    for ep in episodes:
        subs = ep.subtasks if isinstance(ep, GoatEpisode) else [ep]
        outcomes.extend(s.outcome for s in subs)
    return outcomes


def _metrics_csv(outcomes) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scope", "episodes", "sr", "spl"])
    writer.writerow(["overall", len(outcomes),
                     f"{success_rate(outcomes):.4f}", f"{spl(outcomes):.4f}"])
    for category in sorted(per_category(outcomes)):
        subset = [o for o in outcomes if o.category == category]
        writer.writerow([category, len(subset),
                         f"{success_rate(subset):.4f}", f"{spl(subset):.4f}"])
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------

def _scene_dir(out_dir: str) -> Path:
    return Path(out_dir) / "scenes"


def cmd_gen_scenes(cfg: ExperimentConfig, overwrite: bool) -> int:
    scene_dir = _scene_dir(cfg.out_dir)
    scene_dir.mkdir(parents=True, exist_ok=True)
    paths = [scene_dir / f"scene-{i:04d}.json" for i in range(cfg.num_scenes)]
    existing = [p for p in paths if p.exists()]
    if existing and not overwrite:
        raise ValidationError(
            f"{len(existing)} scene file(s) already exist in {scene_dir}; "
            "pass --overwrite to replace them")
    for i, path in enumerate(paths):
        scene = generate_scene(cfg.scene_seed + i, cfg.scene)
        save_scene(scene, path)
        log.info("wrote %s (%s)", path, scene.scene_id)
    print(f"generated {len(paths)} scene(s) in {scene_dir}")
    return 0


def _load_scene_paths(cfg: ExperimentConfig):
    scene_dir = _scene_dir(cfg.out_dir)
    paths = sorted(scene_dir.glob("scene-*.json"))
    if not paths:
        raise ValidationError(f"no scenes found in {scene_dir}; run gen-scenes first")
    return paths


def cmd_run(cfg: ExperimentConfig, jobs: int) -> int:
    scene_paths = _load_scene_paths(cfg)
    episodes = _generate_all_episodes(cfg, scene_paths, jobs)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset_path = out / "dataset.jsonl"
    metrics_path = out / "metrics.csv"
    write_dataset(episodes, dataset_path)
    outcomes = _all_outcomes(episodes)
    metrics_path.write_text(_metrics_csv(outcomes), encoding="utf-8")
    print(f"wrote {dataset_path} ({len(episodes)} episodes) and {metrics_path}")
    print(f"SR={success_rate(outcomes):.4f} SPL={spl(outcomes):.4f}")
    return 0


def cmd_sweep(cfg: ExperimentConfig, jobs: int) -> int:
    scene_paths = _load_scene_paths(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # behavior depends on memory length but not on the compression cell,
    # so GOAT runs are shared across rows of the same column
    runs_by_length: dict[int, list] = {}

    def goat_runs(length: int):
        if length not in runs_by_length:
            run_cfg = replace_config(cfg, kind="goat", memory_length=length)
            runs_by_length[length] = _generate_all_episodes(run_cfg, scene_paths, jobs)
        return runs_by_length[length]

    rows = []
    for num_blocks in cfg.sweep_blocks:
        for length in cfg.sweep_memory_lengths:
            tokens = tokens_per_frame_for_blocks(num_blocks, cfg.compression)
            r_spatial = 4 ** num_blocks
            r_native = NATIVE_TOKENS_PER_FRAME / tokens
            feasible = max_history(cfg.budget_tokens, tokens) >= length
            if feasible:
                episodes = goat_runs(length)
                outcomes = _all_outcomes(episodes)
                context = length * tokens
                rows.append([length, num_blocks, r_spatial, f"{r_native:.4f}",
                             tokens, "yes",
                             f"{success_rate(outcomes):.4f}", f"{spl(outcomes):.4f}",
                             context, context * context])
            else:
                rows.append([length, num_blocks, r_spatial, f"{r_native:.4f}",
                             tokens, "no", "-", "-", "-", "-"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    sweep_path = out / "sweep.csv"
    sweep_path.write_text(buf.getvalue(), encoding="utf-8")
    print(f"wrote {sweep_path} ({len(rows)} cells)")
    return 0


def replace_config(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    doc = cfg.to_dict()
    doc.update(kw)
    return ExperimentConfig.from_dict(doc)


def cmd_plot(dataset_path: str, scene_path: str, out_svg: str,
             index: int, cfg: ExperimentConfig) -> int:
    episodes = read_dataset(dataset_path)
    if not 0 <= index < len(episodes):
        raise ValidationError(
            f"episode index {index} out of range (dataset has {len(episodes)})")
    scene = load_scene(scene_path)
    episode = episodes[index]
    if episode.scene_id != scene.scene_id:
        raise ValidationError(
            f"episode {index} belongs to {episode.scene_id}, not {scene.scene_id}")
    write_episode_svg(scene, episode, out_svg, cfg.explorer)
    print(f"wrote {out_svg}")
    return 0


def cmd_validate(scene_paths, dataset_paths) -> int:
    for path in scene_paths:
        load_scene(path)
        print(f"OK scene {path}")
    for path in dataset_paths:
        episodes = read_dataset(path)
        print(f"OK dataset {path} ({len(episodes)} episodes)")
    return 0


# -- argument parsing ----------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifenav",
        description="Deterministic lifelong-navigation simulation workbench")
    parser.add_argument("--config", help="experiment config JSON file")
    parser.add_argument("--seed", type=int, help="override base seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--out", help="override output directory")
    parser.add_argument("--overwrite", action="store_true",
                        help="allow replacing existing output files")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-scenes", help="generate scene JSON files")
    sub.add_parser("run", help="generate episodes, write dataset + metrics")
    sub.add_parser("sweep", help="compression x memory-length grid report")
    plot = sub.add_parser("plot", help="render an episode trajectory SVG")
    plot.add_argument("--dataset", required=True)
    plot.add_argument("--scene", required=True)
    plot.add_argument("--svg", required=True)
    plot.add_argument("--index", type=int, default=0)
    val = sub.add_parser("validate", help="validate scene/dataset files")
    val.add_argument("--scene", action="append", default=[])
    val.add_argument("--dataset", action="append", default=[])
    return parser


def _setup_logging() -> None:
    level = os.environ.get("LIFENAV_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = (ExperimentConfig.from_json_file(args.config)
               if args.config else ExperimentConfig())
        if args.seed is not None:
            cfg.base_seed = args.seed
        if args.out:
            cfg.out_dir = args.out
        cfg.validate()
        start = time.monotonic()
        if args.command == "gen-scenes":
            code = cmd_gen_scenes(cfg, args.overwrite)
        elif args.command == "run":
            code = cmd_run(cfg, args.jobs)
        elif args.command == "sweep":
            code = cmd_sweep(cfg, args.jobs)
        elif args.command == "plot":
            code = cmd_plot(args.dataset, args.scene, args.svg, args.index, cfg)
        elif args.command == "validate":
            code = cmd_validate(args.scene, args.dataset)
        else:  # pragma: no cover
            parser.error(f"unknown command {args.command}")
        log.info("%s finished in %.2fs", args.command, time.monotonic() - start)
        return code
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LifenavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
