"""Acceptance gate: eleven end-to-end checks, each printing one PASS line
and enforcing its runtime budget. Oracles here are written independently
of the library implementations they check."""

import json
import time
from collections import deque
from contextlib import contextmanager

import numpy as np
import pytest

from lifenav.cli import main, tokens_per_frame_for_blocks
from lifenav.compressor import (NATIVE_TOKENS_PER_FRAME, CompressionConfig,
                                FeatureGrid, compression_ratio, pipeline_dims,
                                pixel_unshuffle, pseudo_features, token_count)
from lifenav.datagen import (ExplorerConfig, episode_seed,
                             generate_goat_sequence)
from lifenav.explore import (EXPLORED_FREE, EXPLORED_OBSTACLE, UNKNOWN,
                             ExplorationMap, Frontier, extract_frontiers,
                             select_subgoal)
from lifenav.memory import max_history
from lifenav.metrics import EpisodeOutcome, spl, success_rate
from lifenav.planner import shortest_path
from lifenav.rng import Rng, derive_key
from lifenav.scene import SceneParams, generate_scene


@contextmanager
def criterion(number: int, title: str, limit_s: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"FAIL criterion {number}: {title}")
        raise
    elapsed = time.monotonic() - start
    assert elapsed < limit_s, f"criterion {number} took {elapsed:.1f}s >= {limit_s}s"
    print(f"PASS criterion {number}: {title} ({elapsed:.2f}s)")


def test_01_token_pipeline_exactness():
    with criterion(1, "token pipeline dims and 30-token count", 1.0):
        cfg = CompressionConfig()
        dims = pipeline_dims(cfg)
        assert dims[0] == (45, 40)
        assert dims[1] == (48, 40)
        assert dims[2] == (24, 20)
        assert dims[3] == (12, 10)
        assert token_count(cfg) == 30


def test_02_compression_ratio_table():
    with criterion(2, "r_spatial {1,4,16,64} and r_native 598/30", 1.0):
        from lifenav.cli import config_for_blocks
        base = CompressionConfig()
        for n, expect in zip((0, 1, 2, 3), (1, 4, 16, 64)):
            r_spatial, _ = compression_ratio(config_for_blocks(n, base))
            assert r_spatial == expect
        _, r_native = compression_ratio(base)
        assert abs(r_native - 598 / 30) < 0.01


def test_03_pixel_unshuffle_lossless():
    with criterion(3, "pixel-unshuffle bitwise invertible on 100 grids", 5.0):
        rng = np.random.default_rng(7)
        for _ in range(100):
            h = 2 * int(rng.integers(1, 12))
            w = 2 * int(rng.integers(1, 12))
            c = int(rng.integers(1, 8))
            grid = FeatureGrid(rng.standard_normal((h, w, c)))
            out = pixel_unshuffle(grid)
            assert out.data.shape == (h // 2, w // 2, 4 * c)
            back = np.empty_like(grid.data)
            for di in range(2):
                for dj in range(2):
                    block = 2 * di + dj
                    back[di::2, dj::2, :] = out.data[:, :, block * c:(block + 1) * c]
            assert np.array_equal(back, grid.data)


def _random_explored_map(seed: int, size: int = 32) -> ExplorationMap:
    rng = Rng(seed)
    labels = np.empty((size, size), dtype=np.int8)
    for r in range(size):
        for c in range(size):
            u = rng.random()
            labels[r, c] = (UNKNOWN if u < 0.4
                            else EXPLORED_FREE if u < 0.85
                            else EXPLORED_OBSTACLE)
    return ExplorationMap(size, size, labels)


def _brute_force_frontiers(emap: ExplorationMap):
    """Independent enumeration + 8-connected clustering by DFS."""
    h, w = emap.height, emap.width
    labels = emap.labels
    cells = set()
    for r in range(h):
        for c in range(w):
            if labels[r, c] != EXPLORED_FREE:
                continue
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] == UNKNOWN:
                    cells.add((r, c))
                    break
    clusters = []
    remaining = set(cells)
    while remaining:
        seedc = min(remaining)
        stack = [seedc]
        remaining.discard(seedc)
        comp = {seedc}
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nb = (r + dr, c + dc)
                    if nb in remaining:
                        remaining.discard(nb)
                        comp.add(nb)
                        stack.append(nb)
        clusters.append(frozenset(comp))
    return cells, set(clusters)


def test_04_frontier_oracle_equivalence():
    with criterion(4, "frontier union and clusters match brute force "
                      "on 200 maps", 10.0):
        for seed in range(200):
            emap = _random_explored_map(derive_key(900, seed))
            frontiers = extract_frontiers(emap)
            union = {cell for f in frontiers for cell in f.cells}
            clusters = {frozenset(f.cells) for f in frontiers}
            oracle_union, oracle_clusters = _brute_force_frontiers(emap)
            assert union == oracle_union
            assert clusters == oracle_clusters


def _bfs_oracle_length(grid: np.ndarray, start, goal):
    if not (grid[start] and grid[goal]):
        return None
    h, w = grid.shape
    dist = {start: 0}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        if (r, c) == goal:
            return dist[(r, c)]
        for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (0 <= nb[0] < h and 0 <= nb[1] < w and grid[nb]
                    and nb not in dist):
                dist[nb] = dist[(r, c)] + 1
                queue.append(nb)
    return None


def test_05_planner_optimality():
    with criterion(5, "shortest_path length matches BFS oracle, "
                      "100 grids x 10 pairs", 10.0):
        rng = np.random.default_rng(11)
        for _ in range(100):
            grid = rng.random((32, 32)) > 0.3
            free = [tuple(map(int, rc)) for rc in np.argwhere(grid)]
            for _ in range(10):
                start = free[int(rng.integers(len(free)))]
                goal = free[int(rng.integers(len(free)))]
                expect = _bfs_oracle_length(grid, start, goal)
                path = shortest_path(grid, start, goal)
                if expect is None:
                    assert path is None
                else:
                    assert path is not None
                    assert len(path.waypoints) - 1 == expect


def test_06_spl_correctness():
    with criterion(6, "SPL hand cases exact; 10,000-set fuzz "
                      "0 <= SPL <= SR", 5.0):
        def out(success, length, shortest):
            return EpisodeOutcome(success=success, path_length=length,
                                  shortest_length=shortest, category="x",
                                  steps=1)
        assert spl([out(1, 10.0, 10.0)]) == 1.0
        assert spl([out(1, 20.0, 10.0)]) == 0.5
        assert spl([out(0, 5.0, 10.0)]) == 0.0
        rng = Rng(21)
        for _ in range(10_000):
            outs = [out(rng.randrange(2),
                        rng.random() * 50.0,
                        0.01 + rng.random() * 50.0)
                    for _ in range(1 + rng.randrange(8))]
            s = spl(outs)
            assert 0.0 <= s <= success_rate(outs) <= 1.0


def test_07_epsilon_greedy_distribution():
    with criterion(7, "min-cost frequency in [0.79, 0.81] at eps=0.2; "
                      "eps=0 deterministic", 5.0):
        frontiers = [Frontier(cells=((0, i),), representative=(0, i))
                     for i in range(3)]
        costs = {(0, 0): 5.0, (0, 1): 1.0, (0, 2): 9.0}

        def cost_of(f):
            return costs[f.representative]

        rng = Rng(33)
        wins = sum(select_subgoal(frontiers, cost_of, 0.2, rng)
                   .representative == (0, 1)
                   for _ in range(100_000))
        assert 0.79 <= wins / 100_000 <= 0.81
        rng = Rng(34)
        for _ in range(100):
            assert select_subgoal(frontiers, cost_of, 0.0, rng) is frontiers[1]


def test_08_lifelong_memory_benefit():
    with criterion(8, "memory agent: zero subtask-2 frontier subgoals and "
                      "strictly higher SPL over 50 scenes", 60.0):
        cfg = ExplorerConfig()
        mem_outcomes, nomem_outcomes = [], []
        qualifying = 0
        for i in range(50):
            scene = generate_scene(3000 + i, SceneParams())
            seed = episode_seed(scene.scene_id, 0)
            mem = generate_goat_sequence(scene, seed, 2, 500, cfg,
                                         target_policy="seen")
            targets = [(s.target_category, s.target_position)
                       for s in mem.subtasks]
            nomem = generate_goat_sequence(scene, seed, 2, 500, cfg,
                                           use_memory=False,
                                           subtask_targets=targets)
            seen_in_first = {cat for f in mem.subtasks[0].frames
                             for cat in f["categories"]}
            if mem.subtasks[1].target_category not in seen_in_first:
                continue
            qualifying += 1
            assert mem.subtasks[1].subgoals == []
            mem_outcomes.append(mem.subtasks[1].outcome)
            nomem_outcomes.append(nomem.subtasks[1].outcome)
        assert qualifying >= 30
        assert spl(mem_outcomes) > spl(nomem_outcomes)


def test_09_context_budget_arithmetic():
    with criterion(9, "max_history anchors and quadratic cost ratio", 1.0):
        assert max_history(29_900, 598, 0, 0) == 50
        assert max_history(9_000, 30, 0, 0) == 300
        ratio = (300 * 30) ** 2 / (50 * 598) ** 2
        assert abs(ratio - (9_000 / 29_900) ** 2) < 1e-9


ACCEPT_CONFIG = {
    "num_scenes": 3,
    "scene_seed": 4000,
    "scene": {"width": 16, "height": 16, "object_count": 3},
    "episodes_per_scene": 2,
    "kind": "goat",
    "num_subtasks": 2,
    "memory_length": 50,
}


def test_10_end_to_end_determinism(tmp_path):
    with criterion(10, "cmd_run twice -> byte-identical JSONL and CSV", 60.0):
        out_dir = tmp_path / "out"
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(
            dict(ACCEPT_CONFIG, out_dir=str(out_dir))))
        assert main(["--config", str(config_path), "gen-scenes"]) == 0
        assert main(["--config", str(config_path), "run"]) == 0
        first = ((out_dir / "dataset.jsonl").read_bytes(),
                 (out_dir / "metrics.csv").read_bytes())
        assert main(["--config", str(config_path), "run"]) == 0
        second = ((out_dir / "dataset.jsonl").read_bytes(),
                  (out_dir / "metrics.csv").read_bytes())
        assert first == second


def test_11_sweep_structure(tmp_path):
    with criterion(11, "full sweep grid matches compressor formulas; "
                       "over-budget cells are '-'", 300.0):
        out_dir = tmp_path / "out"
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(dict(
            ACCEPT_CONFIG, out_dir=str(out_dir),
            episodes_per_scene=1,
            sweep_blocks=[0, 1, 2, 3],
            sweep_memory_lengths=[50, 100, 200, 500])))
        assert main(["--config", str(config_path), "gen-scenes"]) == 0
        assert main(["--config", str(config_path), "sweep"]) == 0
        lines = (out_dir / "sweep.csv").read_text().strip().split("\n")
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 16
        base = CompressionConfig()
        seen_cells = set()
        for row in rows:
            length, blocks = int(row[0]), int(row[1])
            seen_cells.add((blocks, length))
            tokens = int(row[4])
            assert tokens == tokens_per_frame_for_blocks(blocks, base)
            assert int(row[2]) == 4 ** blocks
            assert float(row[3]) == pytest.approx(
                NATIVE_TOKENS_PER_FRAME / tokens, abs=1e-4)
            feasible = max_history(29_900, tokens) >= length
            assert row[5] == ("yes" if feasible else "no")
            if not feasible:
                assert row[6:] == ["-"] * 4
            else:
                assert float(row[7]) <= float(row[6]) <= 1.0
        assert seen_cells == {(b, m) for b in (0, 1, 2, 3)
                              for m in (50, 100, 200, 500)}
