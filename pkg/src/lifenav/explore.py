"""Explored/unknown map maintenance and frontier-based subgoal selection.

A frontier cell is an explored-free cell with at least one unknown
4-neighbor; frontier clusters are the 8-connected components of that set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .agent import Observation
from .errors import ExplorationExhausted, ValidationError
from .rng import Rng
from .scene import Scene

UNKNOWN = 0
EXPLORED_FREE = 1
EXPLORED_OBSTACLE = 2

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


class ExplorationMap:
    """Per-cell knowledge labels; grows monotonically Unknown -> Explored*."""

    def __init__(self, height: int, width: int, labels: np.ndarray | None = None):
        self.height = height
        self.width = width
        if labels is None:
            labels = np.zeros((height, width), dtype=np.int8)
        self.labels = labels

    @classmethod
    def for_scene(cls, scene: Scene) -> "ExplorationMap":
        return cls(scene.height, scene.width)

    def copy(self) -> "ExplorationMap":
        return ExplorationMap(self.height, self.width, self.labels.copy())

    def explored_free(self) -> np.ndarray:
        return self.labels == EXPLORED_FREE

    def explored_count(self) -> int:
        return int((self.labels != UNKNOWN).sum())

    def update(self, scene: Scene, observation: Observation) -> "ExplorationMap":
        """Mark every visible cell per ground truth; in place, returns self."""
        free = scene.free_mask()
        for r, c in observation.visible_cells:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValidationError(f"observation cell {(r, c)} out of bounds")
            self.labels[r, c] = EXPLORED_FREE if free[r, c] else EXPLORED_OBSTACLE
        return self


@dataclass(frozen=True)
class Frontier:
    cells: tuple[tuple[int, int], ...]
    representative: tuple[int, int]


def frontier_mask(emap: ExplorationMap) -> np.ndarray:
    """Explored-free cells with an Unknown 4-neighbor (in-bounds only)."""
    labels = emap.labels
    unknown = labels == UNKNOWN
    has_unknown_nbr = np.zeros_like(unknown)
    has_unknown_nbr[:-1, :] |= unknown[1:, :]
    has_unknown_nbr[1:, :] |= unknown[:-1, :]
    has_unknown_nbr[:, :-1] |= unknown[:, 1:]
    has_unknown_nbr[:, 1:] |= unknown[:, :-1]
    return (labels == EXPLORED_FREE) & has_unknown_nbr


def extract_frontiers(emap: ExplorationMap) -> list[Frontier]:
    mask = frontier_mask(emap)
    comp, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    frontiers = []
    for k in range(1, n + 1):
        cells = [tuple(int(v) for v in rc) for rc in np.argwhere(comp == k)]
        cells.sort()
        centroid_r = sum(r for r, _ in cells) / len(cells)
        centroid_c = sum(c for _, c in cells) / len(cells)
        rep = min(cells, key=lambda rc: ((rc[0] - centroid_r) ** 2 + (rc[1] - centroid_c) ** 2, rc))
        frontiers.append(Frontier(cells=tuple(cells), representative=rep))
    frontiers.sort(key=lambda f: f.representative)
    return frontiers


def select_subgoal(frontiers: list[Frontier], cost_of, epsilon: float, rng: Rng) -> Frontier:
    """Min-cost frontier with probability 1-epsilon, otherwise a uniform
    draw over the non-minimum reachable candidates.

    Unreachable frontiers (cost +inf) never win unless every frontier is
    unreachable, in which case the lexicographically first is returned.
    """
    if not frontiers:
        raise ExplorationExhausted("no frontiers remain")
    if not 0.0 <= epsilon <= 1.0:
        raise ValidationError("epsilon must lie in [0, 1]")
    costs = [cost_of(f) for f in frontiers]
    finite = [(cost, f) for cost, f in zip(costs, frontiers) if cost != float("inf")]
    if not finite:
        return min(frontiers, key=lambda f: f.representative)
    min_cost = min(cost for cost, _ in finite)
    greedy = min((f for cost, f in finite if cost == min_cost),
                 key=lambda f: f.representative)
    if len(frontiers) == 1:
        return greedy
    remaining = [f for cost, f in finite if cost > min_cost]
    if remaining and rng.random() < epsilon:
        return remaining[rng.randrange(len(remaining))]
    return greedy
