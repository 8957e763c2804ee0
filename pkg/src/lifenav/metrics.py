"""SR / SPL evaluation and efficiency report tables.

Published benchmark numbers appear only as labeled reference constants for
display next to simulated results; they are never asserted against.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass

from .errors import ValidationError

# published GOAT-Bench / HM3D-OVON reference results (SR, SPL), display only
REFERENCE_RESULTS = {
    "goat_val_seen": (65.5, 49.0),
    "goat_val_seen_synonyms": (66.8, 54.7),
    "goat_val_unseen": (62.7, 56.9),
    "ovon_val_unseen": (62.5, 34.9),
}


@dataclass
class EpisodeOutcome:
    success: int  # 0 or 1
    path_length: float        # realized forward-motion distance, meters
    shortest_length: float    # geodesic start-to-target distance, meters
    category: str
    steps: int
    context_tokens_final: int = 0


def success_rate(outcomes: list[EpisodeOutcome]) -> float:
    if not outcomes:
        raise ValidationError("success_rate needs at least one outcome")
    return sum(o.success for o in outcomes) / len(outcomes)


def spl(outcomes: list[EpisodeOutcome]) -> float:
    """Mean of S_i * L*_i / max(L_i, L*_i)."""
    if not outcomes:
        raise ValidationError("spl needs at least one outcome")
    total = 0.0
    for o in outcomes:
        if o.shortest_length <= 0:
            raise ValidationError("shortest_length must be positive for SPL")
        if o.success:
            total += o.shortest_length / max(o.path_length, o.shortest_length)
    return total / len(outcomes)


def per_category(outcomes: list[EpisodeOutcome]) -> dict[str, float]:
    groups: dict[str, list[int]] = {}
    for o in outcomes:
        groups.setdefault(o.category, []).append(o.success)
    return {cat: sum(vals) / len(vals) for cat, vals in sorted(groups.items())}


@dataclass
class RunStats:
    """One efficiency-table row: a (stored frames, compression blocks) cell."""
    frames: int
    num_blocks: int
    sr: float
    context_tokens: int
    attention_cost_proxy: int
    wall_clock_s: float


def config_label(frames: int, num_blocks: int) -> str:
    if num_blocks == 0:
        return f"{frames} (origin)"
    return f"{frames} ({4 ** num_blocks}x)"


EFFICIENCY_HEADER = ["config", "frames", "compression_blocks", "sr",
                     "context_tokens", "attention_cost_proxy", "wall_clock_s"]


def efficiency_report(stats: list[RunStats]) -> str:
    """CSV text: header plus one row per configuration, dot-decimal."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EFFICIENCY_HEADER)
    for s in stats:
        writer.writerow([
            config_label(s.frames, s.num_blocks),
            s.frames, s.num_blocks,
            f"{s.sr:.4f}", s.context_tokens, s.attention_cost_proxy,
            f"{s.wall_clock_s:.3f}",
        ])
    return buf.getvalue()
