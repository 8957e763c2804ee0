"""Deterministic 4-connected shortest paths and geodesic distances.

Planning runs over a boolean traversability mask (ground-truth Free cells,
or explored-free cells of a partial map). Among equal-length paths the
lexicographically smallest waypoint sequence is returned, so planning is a
pure function of its inputs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scene import DEFAULT_CELL_SIZE

# neighbor offsets in lexicographic order of the resulting cell
_NEIGHBORS = ((-1, 0), (0, -1), (0, 1), (1, 0))


@dataclass(frozen=True)
class Path:
    waypoints: tuple[tuple[int, int], ...]
    length_m: float


def _check_cell(traversable: np.ndarray, cell: tuple[int, int], name: str) -> None:
    h, w = traversable.shape
    r, c = cell
    if not (0 <= r < h and 0 <= c < w):
        raise ValidationError(f"{name} cell {cell} out of bounds for {h}x{w} grid")


def bfs_distances(traversable: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    """Grid of step counts from start over traversable cells; -1 unreachable."""
    _check_cell(traversable, start, "start")
    h, w = traversable.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    if not traversable[start]:
        return dist
    dist[start] = 0
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        d = dist[r, c] + 1
        for dr, dc in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and traversable[nr, nc] and dist[nr, nc] < 0:
                dist[nr, nc] = d
                queue.append((nr, nc))
    return dist


def shortest_path(traversable: np.ndarray, start: tuple[int, int],
                  goal: tuple[int, int],
                  cell_size: float = DEFAULT_CELL_SIZE) -> Path | None:
    """Minimum-length 4-connected path, canonical tie-break; None if unreachable."""
    _check_cell(traversable, start, "start")
    _check_cell(traversable, goal, "goal")
    if not traversable[start]:
        raise ValidationError(f"start cell {start} is not traversable")
    dist = bfs_distances(traversable, goal)
    if dist[start] < 0:
        return None
    # walk downhill from start; taking the lexicographically smallest
    # eligible neighbor at each step yields the canonical shortest path
    h, w = traversable.shape
    waypoints = [start]
    r, c = start
    while (r, c) != goal:
        d = dist[r, c]
        for dr, dc in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] == d - 1:
                r, c = nr, nc
                break
        waypoints.append((r, c))
    return Path(waypoints=tuple(waypoints), length_m=(len(waypoints) - 1) * cell_size)


def smooth_path(traversable: np.ndarray, start: tuple[int, int],
                goal: tuple[int, int], heading: tuple[int, int] | None = None,
                cell_size: float = DEFAULT_CELL_SIZE) -> Path | None:
    """Shortest path that prefers continuing straight at each step.

    Same length as shortest_path (greedy over BFS distances), but with far
    fewer direction changes, which keeps discrete turn counts low when the
    path is executed. Deterministic; heading is the (drow, dcol) the walker
    currently faces, if any.
    """
    _check_cell(traversable, start, "start")
    _check_cell(traversable, goal, "goal")
    if not traversable[start]:
        raise ValidationError(f"start cell {start} is not traversable")
    dist = bfs_distances(traversable, goal)
    if dist[start] < 0:
        return None
    h, w = traversable.shape
    waypoints = [start]
    r, c = start
    direction = heading
    while (r, c) != goal:
        d = dist[r, c]
        options = []
        for dr, dc in _NEIGHBORS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] == d - 1:
                options.append((dr, dc))
        chosen = direction if direction in options else options[0]
        direction = chosen
        r, c = r + chosen[0], c + chosen[1]
        waypoints.append((r, c))
    return Path(waypoints=tuple(waypoints), length_m=(len(waypoints) - 1) * cell_size)


def geodesic_distance(traversable: np.ndarray,
                      a_pos: tuple[float, float],
                      b_pos: tuple[float, float],
                      cell_size: float = DEFAULT_CELL_SIZE) -> float | None:
    """Shortest traversable distance between continuous positions.

    Same cell: straight-line distance. Otherwise the cell-path length plus
    each endpoint's straight-line offset to its own cell center, which
    keeps the measure symmetric and zero at coincident points.
    """
    a_cell = (int(math.floor(a_pos[1] / cell_size)), int(math.floor(a_pos[0] / cell_size)))
    b_cell = (int(math.floor(b_pos[1] / cell_size)), int(math.floor(b_pos[0] / cell_size)))
    _check_cell(traversable, a_cell, "a")
    _check_cell(traversable, b_cell, "b")
    if not traversable[a_cell] or not traversable[b_cell]:
        raise ValidationError("geodesic endpoints must map to traversable cells")
    if a_cell == b_cell:
        return math.hypot(a_pos[0] - b_pos[0], a_pos[1] - b_pos[1])
    path = shortest_path(traversable, a_cell, b_cell, cell_size)
    if path is None:
        return None

    def offset(pos, cell):
        cx = (cell[1] + 0.5) * cell_size
        cy = (cell[0] + 0.5) * cell_size
        return math.hypot(pos[0] - cx, pos[1] - cy)

    return path.length_m + offset(a_pos, a_cell) + offset(b_pos, b_cell)
