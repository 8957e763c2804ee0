"""Simulated worlds: occupancy grid + categorized object placements.

A Scene is immutable after construction. The grid is row-major with cell
(0, 0) at the origin corner; continuous coordinates use x along columns
and y along rows, so cell (r, c) spans
``[c*cell_size, (c+1)*cell_size) x [r*cell_size, (r+1)*cell_size)``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, ParseError, ValidationError
from .rng import Rng, derive_key

FREE = "F"
OBSTACLE = "O"

MIN_GRID_DIM = 8
DEFAULT_CELL_SIZE = 0.25

_CONNECTIVITY_RETRIES = 1000


@dataclass(frozen=True)
class ObjectInstance:
    object_id: str
    category: str
    x: float
    y: float


@dataclass
class SceneParams:
    width: int = 32
    height: int = 32
    obstacle_density: float = 0.2
    object_count: int = 5
    category_pool: tuple[str, ...] = (
        "book", "carpet", "piano", "freezer", "microwave",
        "mirror", "picture", "refrigerator", "rug", "plant",
    )
    cell_size: float = DEFAULT_CELL_SIZE

    def validate(self) -> None:
        if self.width < MIN_GRID_DIM or self.height < MIN_GRID_DIM:
            raise ValidationError(f"grid must be at least {MIN_GRID_DIM}x{MIN_GRID_DIM}")
        if not 0.0 <= self.obstacle_density <= 0.4:
            raise ValidationError("obstacle_density must lie in [0, 0.4]")
        if self.object_count < 1:
            raise ValidationError("object_count must be >= 1")
        if not self.category_pool:
            raise ValidationError("category_pool must be non-empty")
        if self.cell_size <= 0:
            raise ValidationError("cell_size must be positive")


@dataclass
class Scene:
    scene_id: str
    width: int
    height: int
    cell_size: float
    cells: str  # row-major string of 'F'/'O'
    objects: list[ObjectInstance]
    _free_mask: np.ndarray | None = field(default=None, repr=False, compare=False)

    # -- geometry helpers ------------------------------------------------

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(y / self.cell_size)), int(math.floor(x / self.cell_size)))

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.cell_size, (row + 0.5) * self.cell_size)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def label(self, row: int, col: int) -> str:
        return self.cells[row * self.width + col]

    def is_free(self, row: int, col: int) -> bool:
        return self.in_bounds(row, col) and self.label(row, col) == FREE

    def free_mask(self) -> np.ndarray:
        """Boolean (height, width) array, True where Free. Cached."""
        if self._free_mask is None:
            arr = np.frombuffer(self.cells.encode("ascii"), dtype=np.uint8)
            self._free_mask = (arr == ord(FREE)).reshape(self.height, self.width)
        return self._free_mask

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        if self.width < MIN_GRID_DIM or self.height < MIN_GRID_DIM:
            raise ValidationError(f"grid must be at least {MIN_GRID_DIM}x{MIN_GRID_DIM}")
        if len(self.cells) != self.width * self.height:
            raise ValidationError("cells length does not match width*height")
        if set(self.cells) - {FREE, OBSTACLE}:
            raise ValidationError("cells may only contain 'F' and 'O'")
        if FREE not in self.cells:
            raise ValidationError("scene has no Free cell")
        for obj in self.objects:
            if not obj.category:
                raise ValidationError(f"object {obj.object_id} has empty category")
            r, c = self.cell_of(obj.x, obj.y)
            if not self.in_bounds(r, c):
                raise ValidationError(f"object {obj.object_id} is out of bounds")
            if self.label(r, c) != FREE:
                raise ValidationError(f"object {obj.object_id} sits on an Obstacle cell")


def _connected(free: np.ndarray) -> bool:
    """Flood fill: do all Free cells form one 4-connected component?"""
    total = int(free.sum())
    if total == 0:
        return False
    h, w = free.shape
    seen = np.zeros_like(free, dtype=bool)
    start = tuple(int(v) for v in np.argwhere(free)[0])
    seen[start] = True
    queue = deque([start])
    count = 1
    while queue:
        r, c = queue.popleft()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < h and 0 <= nc < w and free[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                count += 1
                queue.append((nr, nc))
    return count == total


def generate_scene(seed: int, params: SceneParams) -> Scene:
    """Procedurally generate a connected scene. Pure in (seed, params)."""
    params.validate()
    h, w = params.height, params.width
    layout_rng = Rng(derive_key(seed, 1))
    free = None
    for _ in range(_CONNECTIVITY_RETRIES):
        candidate = np.ones((h, w), dtype=bool)
        for r in range(h):
            for c in range(w):
                if layout_rng.random() < params.obstacle_density:
                    candidate[r, c] = False
        if _connected(candidate):
            free = candidate
            break
    if free is None:
        raise GenerationError(
            f"no connected layout after {_CONNECTIVITY_RETRIES} retries "
            f"(density={params.obstacle_density})"
        )

    free_cells = [tuple(int(v) for v in rc) for rc in np.argwhere(free)]
    if params.object_count > len(free_cells):
        raise GenerationError("object_count exceeds number of Free cells")

    object_rng = Rng(derive_key(seed, 2))
    picks = object_rng.sample_indices(len(free_cells), params.object_count)
    cell_size = params.cell_size
    objects = []
    for i, pick in enumerate(picks):
        r, c = free_cells[pick]
        category = object_rng.choice(params.category_pool)
        x, y = (c + 0.5) * cell_size, (r + 0.5) * cell_size
        objects.append(ObjectInstance(object_id=f"obj-{i:03d}", category=category, x=x, y=y))

    rows = []
    for r in range(h):
        rows.append("".join(FREE if free[r, c] else OBSTACLE for c in range(w)))
    scene = Scene(
        scene_id=f"scene-{seed & 0xFFFFFFFFFFFFFFFF:016x}",
        width=w,
        height=h,
        cell_size=cell_size,
        cells="".join(rows),
        objects=objects,
    )
    scene.validate()
    return scene


# -- persistence ---------------------------------------------------------

def scene_to_dict(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "width": scene.width,
        "height": scene.height,
        "cell_size": scene.cell_size,
        "cells": scene.cells,
        "objects": [
            {"object_id": o.object_id, "category": o.category, "x": o.x, "y": o.y}
            for o in scene.objects
        ],
    }


def scene_from_dict(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")
    fields = ["scene_id", "width", "height", "cell_size", "cells", "objects"]
    for name in fields:
        if name not in doc:
            raise ParseError(f"missing field '{name}'")
    try:
        objects = [
            ObjectInstance(
                object_id=str(o["object_id"]),
                category=str(o["category"]),
                x=float(o["x"]),
                y=float(o["y"]),
            )
            for o in doc["objects"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed object entry: {exc}") from exc
    try:
        scene = Scene(
            scene_id=str(doc["scene_id"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
            cell_size=float(doc["cell_size"]),
            cells=str(doc["cells"]),
            objects=objects,
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed scene field: {exc}") from exc
    scene.validate()
    return scene


def save_scene(scene: Scene, path) -> None:
    scene.validate()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise ParseError(f"{path}: empty scene file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return scene_from_dict(doc)
