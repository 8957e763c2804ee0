"""Explored-map maintenance, frontier extraction against a brute-force
oracle, and the epsilon-greedy subgoal policy against Monte Carlo counts."""

import numpy as np
import pytest

from conftest import make_scene
from lifenav.agent import Observation, observe, pose_from_yaw
from lifenav.errors import ExplorationExhausted, ValidationError
from lifenav.explore import (EXPLORED_FREE, EXPLORED_OBSTACLE, UNKNOWN,
                             ExplorationMap, Frontier, extract_frontiers,
                             frontier_mask, select_subgoal)
from lifenav.rng import Rng


def brute_force_frontiers(labels: np.ndarray):
    """Oracle: frontier cells and their 8-connected clusters by DFS."""
    h, w = labels.shape
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
        seed_cell = remaining.pop()
        comp = {seed_cell}
        stack = [seed_cell]
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    nb = (r + dr, c + dc)
                    if nb in remaining:
                        remaining.remove(nb)
                        comp.add(nb)
                        stack.append(nb)
        clusters.append(frozenset(comp))
    return cells, set(clusters)


def random_map(seed: int, h: int = 32, w: int = 32) -> ExplorationMap:
    rng = Rng(seed)
    labels = np.zeros((h, w), dtype=np.int8)
    for r in range(h):
        for c in range(w):
            u = rng.random()
            labels[r, c] = UNKNOWN if u < 0.4 else (
                EXPLORED_FREE if u < 0.85 else EXPLORED_OBSTACLE)
    return ExplorationMap(h, w, labels)


class TestExplorationMap:
    def test_empty_observation_is_identity(self, open_scene):
        emap = ExplorationMap.for_scene(open_scene)
        before = emap.labels.copy()
        pose = pose_from_yaw(0.125, 0.125, 0.0)
        emap.update(open_scene, Observation(set(), [], pose))
        np.testing.assert_array_equal(emap.labels, before)

    def test_full_visibility_all_explored_free(self, open_scene):
        emap = ExplorationMap.for_scene(open_scene)
        pose = pose_from_yaw(*open_scene.cell_center(5, 5), 0.0)
        obs = observe(open_scene, pose, fov_degrees=360, range_m=100.0)
        emap.update(open_scene, obs)
        assert (emap.labels == EXPLORED_FREE).all()

    def test_update_idempotent(self, open_scene):
        emap = ExplorationMap.for_scene(open_scene)
        pose = pose_from_yaw(*open_scene.cell_center(2, 2), 0.0)
        obs = observe(open_scene, pose, fov_degrees=90, range_m=2.0)
        first = emap.update(open_scene, obs).labels.copy()
        np.testing.assert_array_equal(emap.update(open_scene, obs).labels, first)

    def test_labels_match_ground_truth(self):
        scene = make_scene(["FFFF", "FOFF", "FFFF", "FFFF"])
        emap = ExplorationMap.for_scene(scene)
        pose = pose_from_yaw(*scene.cell_center(0, 0), 0.0)
        obs = observe(scene, pose, fov_degrees=360, range_m=10.0)
        emap.update(scene, obs)
        for (r, c) in obs.visible_cells:
            expect = EXPLORED_FREE if scene.is_free(r, c) else EXPLORED_OBSTACLE
            assert emap.labels[r, c] == expect

    def test_out_of_bounds_cell_rejected(self, open_scene):
        emap = ExplorationMap.for_scene(open_scene)
        pose = pose_from_yaw(0.125, 0.125, 0.0)
        with pytest.raises(ValidationError):
            emap.update(open_scene, Observation({(99, 0)}, [], pose))

    def test_explored_count_monotone(self, open_scene):
        emap = ExplorationMap.for_scene(open_scene)
        last = 0
        for col in range(5):
            pose = pose_from_yaw(*open_scene.cell_center(5, col), 0.0)
            emap.update(open_scene, observe(open_scene, pose, 90, 1.5))
            count = emap.explored_count()
            assert count >= last
            last = count


class TestExtractFrontiers:
    def test_fully_explored_no_frontiers(self):
        emap = ExplorationMap(4, 4, np.full((4, 4), EXPLORED_FREE, dtype=np.int8))
        assert extract_frontiers(emap) == []

    def test_column_frontier(self):
        labels = np.zeros((3, 3), dtype=np.int8)
        labels[:, 0] = EXPLORED_FREE
        frontiers = extract_frontiers(ExplorationMap(3, 3, labels))
        assert len(frontiers) == 1
        assert set(frontiers[0].cells) == {(0, 0), (1, 0), (2, 0)}
        assert frontiers[0].representative == (1, 0)

    def test_two_pockets_two_clusters(self):
        # explored pockets separated by a 2-cell-thick unexplored band
        labels = np.zeros((3, 8), dtype=np.int8)
        labels[:, 0] = EXPLORED_FREE
        labels[:, 7] = EXPLORED_FREE
        frontiers = extract_frontiers(ExplorationMap(3, 8, labels))
        assert len(frontiers) >= 2

    def test_oracle_equivalence_on_random_maps(self):
        for seed in range(40):
            emap = random_map(seed)
            frontiers = extract_frontiers(emap)
            union = {cell for f in frontiers for cell in f.cells}
            clusters = {frozenset(f.cells) for f in frontiers}
            oracle_cells, oracle_clusters = brute_force_frontiers(emap.labels)
            assert union == oracle_cells
            assert clusters == oracle_clusters

    def test_representative_is_centroid_nearest(self):
        for seed in range(10):
            for f in extract_frontiers(random_map(seed, 16, 16)):
                cr = sum(r for r, _ in f.cells) / len(f.cells)
                cc = sum(c for _, c in f.cells) / len(f.cells)
                best = min(f.cells,
                           key=lambda rc: ((rc[0] - cr) ** 2 + (rc[1] - cc) ** 2, rc))
                assert f.representative == best

    def test_output_sorted_by_representative(self):
        for seed in range(10):
            reps = [f.representative for f in extract_frontiers(random_map(seed))]
            assert reps == sorted(reps)

    def test_frontier_mask_matches_cells(self):
        emap = random_map(3)
        mask = frontier_mask(emap)
        cells, _ = brute_force_frontiers(emap.labels)
        assert {tuple(int(v) for v in rc) for rc in np.argwhere(mask)} == cells


def _abc():
    a = Frontier(cells=((0, 0),), representative=(0, 0))
    b = Frontier(cells=((0, 5),), representative=(0, 5))
    c = Frontier(cells=((5, 0),), representative=(5, 0))
    costs = {a: 3.0, b: 5.0, c: 5.0}
    return [a, b, c], costs.get, a, b, c


class TestSelectSubgoal:
    def test_greedy_when_epsilon_zero(self):
        frontiers, cost_of, a, _, _ = _abc()
        rng = Rng(0)
        assert all(select_subgoal(frontiers, cost_of, 0.0, rng) is a
                   for _ in range(100))

    def test_epsilon_one_never_minimum(self):
        frontiers, cost_of, a, b, c = _abc()
        rng = Rng(1)
        seen = {select_subgoal(frontiers, cost_of, 1.0, rng) for _ in range(200)}
        assert seen == {b, c}

    def test_monte_carlo_frequency(self):
        frontiers, cost_of, a, _, _ = _abc()
        rng = Rng(7)
        draws = 20_000
        hits = sum(select_subgoal(frontiers, cost_of, 0.2, rng) is a
                   for _ in range(draws))
        assert 0.78 <= hits / draws <= 0.82

    def test_single_frontier_always_returned(self):
        only = Frontier(cells=((1, 1),), representative=(1, 1))
        rng = Rng(2)
        assert select_subgoal([only], lambda f: 4.0, 1.0, rng) is only

    def test_unreachable_excluded_unless_all(self):
        frontiers, _, a, b, c = _abc()
        inf = float("inf")
        costs = {a: inf, b: 2.0, c: inf}
        rng = Rng(3)
        assert all(select_subgoal(frontiers, costs.get, 1.0, rng) is b
                   for _ in range(50))
        all_inf = {a: inf, b: inf, c: inf}
        assert select_subgoal(frontiers, all_inf.get, 0.5, rng) is a  # lexicographic

    def test_ties_break_lexicographic(self):
        frontiers, _, a, b, c = _abc()
        costs = {a: 5.0, b: 5.0, c: 5.0}
        rng = Rng(4)
        # all tie at the minimum: greedy branch, lexicographically first wins
        assert all(select_subgoal(frontiers, costs.get, 0.5, rng) is a
                   for _ in range(50))

    def test_empty_raises_exhausted(self):
        with pytest.raises(ExplorationExhausted):
            select_subgoal([], lambda f: 0.0, 0.2, Rng(0))

    def test_bad_epsilon_rejected(self):
        frontiers, cost_of, *_ = _abc()
        with pytest.raises(ValidationError):
            select_subgoal(frontiers, cost_of, 1.5, Rng(0))
