"""Image-centric memory: ordered (pose, tokens) frame records with
sliding-window eviction and context-budget arithmetic.

Context cost is linear in stored frames; the attention cost proxy is its
square, modeling quadratic attention over the full context.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .agent import Pose
from .compressor import TokenSequence
from .errors import ValidationError


def pose_token_estimate(pose_text: str) -> int:
    """Whitespace-chunk token estimate for serialized pose text."""
    return len(pose_text.split())


@dataclass
class FrameRecord:
    frame_index: int
    pose: Pose
    pose_text: str
    token_count: int
    observed_categories: list[tuple[str, tuple[float, float]]] = field(default_factory=list)
    # token values are reproducible from seeds; kept only when materialized
    tokens: TokenSequence | None = None


@dataclass
class MemoryBank:
    max_frames: int
    tokens_per_frame: int
    system_prompt_tokens: int = 0
    instruction_tokens: int = 0
    pose_text_tokens: int = 0
    frames: list[FrameRecord] = field(default_factory=list)

    def append_frame(self, record: FrameRecord) -> None:
        """Append, evicting oldest frames FIFO once capacity is exceeded."""
        if self.frames and record.frame_index <= self.frames[-1].frame_index:
            raise ValidationError(
                f"frame_index {record.frame_index} not greater than "
                f"last index {self.frames[-1].frame_index}")
        self.frames.append(record)
        while len(self.frames) > self.max_frames:
            self.frames.pop(0)

    def context_tokens(self) -> int:
        per_frame = self.pose_text_tokens + self.tokens_per_frame
        return (self.system_prompt_tokens + self.instruction_tokens
                + per_frame * len(self.frames))

    def attention_cost_proxy(self) -> int:
        return self.context_tokens() ** 2

    def recall_target(self, category: str, case_insensitive: bool = False):
        """Most recent (position, frame_index) where category was observed,
        scanning newest-first; None if never observed (or evicted)."""
        if not category:
            raise ValidationError("category must be non-empty")
        needle = category.lower() if case_insensitive else category
        for record in reversed(self.frames):
            for cat, position in record.observed_categories:
                key = cat.lower() if case_insensitive else cat
                if key == needle:
                    return position, record.frame_index
        return None

    def observed_category_positions(self) -> list[tuple[str, tuple[float, float]]]:
        """Unique (category, position) pairs over retained frames, oldest first."""
        seen = []
        for record in self.frames:
            for item in record.observed_categories:
                if item not in seen:
                    seen.append(item)
        return seen


def max_history(budget_tokens: int, tokens_per_frame: int,
                pose_text_tokens: int = 0, fixed_overheads: int = 0) -> int:
    """How many frames fit in the budget; clamped at 0."""
    per_frame = tokens_per_frame + pose_text_tokens
    if per_frame <= 0:
        raise ValidationError("per-frame token cost must be positive")
    return max(0, (budget_tokens - fixed_overheads) // per_frame)
