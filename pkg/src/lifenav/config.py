"""Experiment configuration: one JSON document drives every CLI command."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .compressor import CompressionConfig
from .datagen import GOAT_MEMORY_LENGTHS, DEFAULT_MIN_STEPS, ExplorerConfig
from .errors import ParseError, ValidationError
from .scene import SceneParams

DEFAULT_BUDGET_TOKENS = 29_900  # 50 frames x 598 native tokens


@dataclass
class ExperimentConfig:
    num_scenes: int = 5
    scene_seed: int = 1000
    scene: SceneParams = field(default_factory=SceneParams)
    explorer: ExplorerConfig = field(default_factory=ExplorerConfig)
    compression: CompressionConfig = field(default_factory=CompressionConfig)
    kind: str = "ovon"  # dataset flavor for cmd_run: "ovon" or "goat"
    episodes_per_scene: int = 2
    base_seed: int = 0
    num_subtasks: int = 2
    memory_length: int = 50
    min_steps: int = DEFAULT_MIN_STEPS
    budget_tokens: int = DEFAULT_BUDGET_TOKENS
    sweep_blocks: tuple[int, ...] = (0, 1, 2, 3)
    sweep_memory_lengths: tuple[int, ...] = GOAT_MEMORY_LENGTHS
    out_dir: str = "out"

    def validate(self) -> None:
        if self.num_scenes < 1:
            raise ValidationError("num_scenes must be >= 1")
        if self.episodes_per_scene < 1:
            raise ValidationError("episodes_per_scene must be >= 1")
        if self.kind not in ("ovon", "goat"):
            raise ValidationError("kind must be 'ovon' or 'goat'")
        if not self.sweep_blocks or not self.sweep_memory_lengths:
            raise ValidationError("sweep axes must be non-empty")
        if self.min_steps < 0:
            raise ValidationError("min_steps must be >= 0")
        self.scene.validate()
        self.compression.validate()

    def to_dict(self) -> dict:
        return {
            "num_scenes": self.num_scenes,
            "scene_seed": self.scene_seed,
            "scene": {
                "width": self.scene.width, "height": self.scene.height,
                "obstacle_density": self.scene.obstacle_density,
                "object_count": self.scene.object_count,
                "category_pool": list(self.scene.category_pool),
                "cell_size": self.scene.cell_size,
            },
            "explorer": self.explorer.to_dict(),
            "compression": self.compression.to_dict(),
            "kind": self.kind,
            "episodes_per_scene": self.episodes_per_scene,
            "base_seed": self.base_seed,
            "num_subtasks": self.num_subtasks,
            "memory_length": self.memory_length,
            "min_steps": self.min_steps,
            "budget_tokens": self.budget_tokens,
            "sweep_blocks": list(self.sweep_blocks),
            "sweep_memory_lengths": list(self.sweep_memory_lengths),
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        cfg = cls()
        try:
            for key in ("num_scenes", "scene_seed", "kind", "episodes_per_scene",
                        "base_seed", "num_subtasks", "memory_length", "min_steps",
                        "budget_tokens", "out_dir"):
                if key in doc:
                    setattr(cfg, key, doc[key])
            if "scene" in doc:
                scene_doc = dict(doc["scene"])
                if "category_pool" in scene_doc:
                    scene_doc["category_pool"] = tuple(scene_doc["category_pool"])
                cfg.scene = SceneParams(**scene_doc)
            if "explorer" in doc:
                cfg.explorer = ExplorerConfig.from_dict(doc["explorer"])
            if "compression" in doc:
                cfg.compression = CompressionConfig.from_dict(doc["compression"])
            if "sweep_blocks" in doc:
                cfg.sweep_blocks = tuple(doc["sweep_blocks"])
            if "sweep_memory_lengths" in doc:
                cfg.sweep_memory_lengths = tuple(doc["sweep_memory_lengths"])
        except TypeError as exc:
            raise ParseError(f"bad config field: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(doc)
