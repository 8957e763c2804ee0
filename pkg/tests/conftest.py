"""Shared fixtures and independent oracle helpers."""

from __future__ import annotations

import numpy as np
import pytest

from lifenav.scene import Scene, SceneParams, generate_scene


def make_scene(rows: list[str], objects=(), cell_size: float = 0.25,
               scene_id: str = "scene-test") -> Scene:
    """Build a Scene from row strings of 'F'/'O' for hand-crafted cases."""
    height = len(rows)
    width = len(rows[0])
    scene = Scene(
        scene_id=scene_id,
        width=width,
        height=height,
        cell_size=cell_size,
        cells="".join(rows),
        objects=list(objects),
    )
    # generated scenes enforce a minimum grid size; hand-built fixtures may
    # be smaller, so only run full validation when they meet it
    if width >= 8 and height >= 8:
        scene.validate()
    return scene


def flood_fill_components(free: np.ndarray) -> int:
    """Independent 4-connected component count over True cells."""
    h, w = free.shape
    seen = np.zeros_like(free, dtype=bool)
    count = 0
    for sr in range(h):
        for sc in range(w):
            if not free[sr, sc] or seen[sr, sc]:
                continue
            count += 1
            stack = [(sr, sc)]
            seen[sr, sc] = True
            while stack:
                r, c = stack.pop()
                for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= nr < h and 0 <= nc < w and free[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        stack.append((nr, nc))
    return count


@pytest.fixture
def small_scene() -> Scene:
    return generate_scene(42, SceneParams(width=16, height=16, object_count=3))


@pytest.fixture
def open_scene() -> Scene:
    """10x10 obstacle-free scene, no objects yet."""
    return make_scene(["F" * 10] * 10)
