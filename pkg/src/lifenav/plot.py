"""Deterministic SVG trajectory figures.

Hand-rolled SVG so identical inputs yield byte-identical files:
exploration segments are drawn as solid blue polylines, memory-recall
segments (subtasks with no frontier subgoals) as dashed pink ones.
"""

from __future__ import annotations

from .datagen import ExplorerConfig, GoatEpisode, replay_positions
from .scene import Scene

_PX_PER_M = 40.0

EXPLORE_STYLE = 'class="explore" fill="none" stroke="#1f5fd0" stroke-width="2"'
RECALL_STYLE = ('class="recall" fill="none" stroke="#e0569f" stroke-width="2" '
                'stroke-dasharray="6,4"')


def _fmt(v: float) -> str:
    return f"{v * _PX_PER_M:.1f}"


def _polyline(points, style: str) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'  <polyline {style} points="{pts}"/>'


def episode_svg(scene: Scene, episode, explorer_config: ExplorerConfig | None = None) -> str:
    """Render one dataset record (single-goal or lifelong) over its scene."""
    cfg = explorer_config or ExplorerConfig()
    width_px = scene.width * scene.cell_size * _PX_PER_M
    height_px = scene.height * scene.cell_size * _PX_PER_M
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px:.0f}" '
        f'height="{height_px:.0f}" viewBox="0 0 {width_px:.0f} {height_px:.0f}">',
        f'  <rect width="{width_px:.0f}" height="{height_px:.0f}" fill="#f8f8f5"/>',
    ]
    cs = scene.cell_size
    for r in range(scene.height):
        for c in range(scene.width):
            if not scene.is_free(r, c):
                lines.append(
                    f'  <rect x="{_fmt(c * cs)}" y="{_fmt(r * cs)}" '
                    f'width="{_fmt(cs)}" height="{_fmt(cs)}" fill="#555555"/>')

    subtasks = episode.subtasks if isinstance(episode, GoatEpisode) else [episode]
    for sub in subtasks:
        positions = replay_positions(scene, sub.start_pose, sub.actions, cfg)
        style = EXPLORE_STYLE if sub.subgoals else RECALL_STYLE
        lines.append(_polyline(positions, style))

    for obj in scene.objects:
        lines.append(f'  <circle cx="{_fmt(obj.x)}" cy="{_fmt(obj.y)}" r="4" '
                     f'fill="#2a9d4e"/>')
        lines.append(f'  <text x="{_fmt(obj.x)}" y="{_fmt(obj.y)}" dx="6" dy="-4" '
                     f'font-size="10" fill="#222222">{obj.category}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_episode_svg(scene: Scene, episode, path,
                      explorer_config: ExplorerConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(episode_svg(scene, episode, explorer_config))
