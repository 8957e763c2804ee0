"""Episode generation: single-goal runs, lifelong multi-goal sequences,
short-trajectory filtering, and JSONL dataset files.

The control loop per goal: observe, fold the observation into the
explored map and memory, head straight for the target once seen,
otherwise pick an epsilon-greedy minimum-cost frontier and walk to it.
In lifelong sequences the pose, explored map, and memory bank persist
across subtasks; a remembered target is approached directly without
re-exploration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .agent import (Action, Pose, check_success, observe, pose_from_yaw,
                    serialize_pose, step)
from .errors import ParseError, ValidationError
from .explore import UNKNOWN, ExplorationMap, extract_frontiers, select_subgoal
from .memory import FrameRecord, MemoryBank, pose_token_estimate
from .metrics import EpisodeOutcome
from .planner import bfs_distances, geodesic_distance, smooth_path
from .rng import Rng, derive_key, mix64
from .scene import Scene

GOAT_MEMORY_LENGTHS = (50, 100, 200, 500)
DEFAULT_MIN_STEPS = 10
DEFAULT_STEP_CAP = 500
_TURN_UNITS = 12  # 360 / 30


@dataclass
class ExplorerConfig:
    fov_degrees: float = 90.0
    range_m: float = 5.0
    epsilon: float = 0.2
    step_cap: int = DEFAULT_STEP_CAP
    forward_step: float = 0.25
    turn_deg: float = 30.0
    success_radius: float = 1.0

    def to_dict(self) -> dict:
        return {
            "fov_degrees": self.fov_degrees, "range_m": self.range_m,
            "epsilon": self.epsilon, "step_cap": self.step_cap,
            "forward_step": self.forward_step, "turn_deg": self.turn_deg,
            "success_radius": self.success_radius,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExplorerConfig":
        return cls(**doc)


@dataclass
class Episode:
    scene_id: str
    seed: int
    kind: str  # "ovon" or "goat-subtask"
    instruction: str
    target_category: str
    target_position: tuple[float, float]
    start_pose: Pose
    actions: list[Action] = field(default_factory=list)
    subgoals: list[tuple[int, int, int]] = field(default_factory=list)  # (row, col, step)
    frames: list[dict] = field(default_factory=list)
    outcome: EpisodeOutcome | None = None
    failure_reason: str | None = None


@dataclass
class GoatEpisode:
    scene_id: str
    seed: int
    memory_length: int
    subtasks: list[Episode] = field(default_factory=list)


def episode_seed(scene_id: str, index: int, base_seed: int = 0) -> int:
    """Stable per-episode seed from scene id and episode index."""
    acc = mix64(base_seed)
    for ch in scene_id:
        acc = mix64(acc ^ ord(ch))
    return derive_key(acc, index)


def _heading_units(pose: Pose) -> int:
    return round(math.degrees(pose.yaw()) / 30.0) % _TURN_UNITS


def _turns_to(current_units: int, desired_units: int) -> list[Action]:
    left = (desired_units - current_units) % _TURN_UNITS
    right = _TURN_UNITS - left if left else 0
    if left == 0:
        return []
    if left <= right:
        return [Action.TURN_LEFT] * left
    return [Action.TURN_RIGHT] * right


_DIR_UNITS = {(0, 1): 0, (1, 0): 3, (0, -1): 6, (-1, 0): 9}  # (drow, dcol) -> 30 deg units


class _SubtaskRun:
    """Mutable state for one goal pursuit; owns no scene-level state.

    Every action is followed by an observation that is folded into the
    explored map and appended to the memory bank, so frame count tracks
    step count (memory length is measured in steps)."""

    def __init__(self, scene: Scene, pose: Pose, emap: ExplorationMap,
                 bank: MemoryBank, cfg: ExplorerConfig, next_frame_index: int,
                 target_category: str):
        self.scene = scene
        self.pose = pose
        self.emap = emap
        self.bank = bank
        self.cfg = cfg
        self.next_frame_index = next_frame_index
        self.target_category = target_category
        self.actions: list[Action] = []
        self.subgoals: list[tuple[int, int, int]] = []
        self.frames: list[dict] = []
        self.path_length = 0.0
        self.last_visible: list[tuple[str, str, tuple[float, float]]] = []
        # explored_count at which planning toward a sighted target last
        # failed; sightings are ignored until the map grows past it,
        # since connectivity can only change with newly explored cells
        self.blocked_at = -1

    def budget_left(self) -> int:
        return self.cfg.step_cap - len(self.actions)

    def cell(self) -> tuple[int, int]:
        x, y, _ = self.pose.position
        return self.scene.cell_of(x, y)

    def act(self, action: Action) -> None:
        before = self.pose.position
        self.pose = step(self.scene, self.pose, action,
                         self.cfg.forward_step, self.cfg.turn_deg)
        self.actions.append(action)
        if action is Action.MOVE_FORWARD and self.pose.position != before:
            self.path_length += self.cfg.forward_step
        self.observe_and_record()

    def observe_and_record(self) -> None:
        obs = observe(self.scene, self.pose, self.cfg.fov_degrees,
                      self.cfg.range_m, self.next_frame_index)
        self.emap.update(self.scene, obs)
        pose_text = serialize_pose(self.pose)
        record = FrameRecord(
            frame_index=self.next_frame_index,
            pose=self.pose,
            pose_text=pose_text,
            token_count=self.bank.tokens_per_frame,
            observed_categories=[(cat, pos) for _oid, cat, pos in obs.visible_objects],
        )
        self.bank.append_frame(record)
        self.frames.append({
            "index": record.frame_index,
            "pose_text": pose_text,
            "token_count": record.token_count,
            "categories": sorted({cat for _oid, cat, _pos in obs.visible_objects}),
        })
        self.next_frame_index += 1
        self.last_visible = obs.visible_objects

    def target_hits(self) -> list[tuple[float, float]]:
        if self.emap.explored_count() == self.blocked_at:
            return []
        return [pos for _oid, cat, pos in self.last_visible
                if cat == self.target_category]

    def walk(self, waypoints, stop_on_target: bool = False) -> str:
        """Follow 4-adjacent waypoints; 'ok', 'budget', or 'spotted'."""
        moves_per_cell = round(self.scene.cell_size / self.cfg.forward_step)
        for prev, nxt in zip(waypoints, waypoints[1:]):
            d = (nxt[0] - prev[0], nxt[1] - prev[1])
            for turn in _turns_to(_heading_units(self.pose), _DIR_UNITS[d]):
                if self.budget_left() <= 0:
                    return "budget"
                self.act(turn)
                if stop_on_target and self.target_hits():
                    return "spotted"
            for _ in range(moves_per_cell):
                if self.budget_left() <= 0:
                    return "budget"
                self.act(Action.MOVE_FORWARD)
                if stop_on_target and self.target_hits():
                    return "spotted"
        return "ok"

    def face_unknown(self, frontier) -> bool:
        """Turn toward the unknown cells beyond a reached frontier so the
        next observation can resolve it. False if the budget ran out."""
        h, w = self.emap.height, self.emap.width
        labels = self.emap.labels
        unknown = []
        for r, c in frontier.cells:
            for nr, nc in ((r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)):
                if 0 <= nr < h and 0 <= nc < w and labels[nr, nc] == UNKNOWN:
                    unknown.append((nr, nc))
        if not unknown:
            return True
        cy = sum(r for r, _ in unknown) / len(unknown)
        cx = sum(c for _, c in unknown) / len(unknown)
        tx, ty = self.scene.cell_center(0, 0)  # offset of a cell center
        gx = cx * self.scene.cell_size + tx
        gy = cy * self.scene.cell_size + ty
        x, y, _ = self.pose.position
        if (gx, gy) == (x, y):
            return True
        desired = round(math.degrees(math.atan2(gy - y, gx - x)) / 30.0) % _TURN_UNITS
        for turn in _turns_to(_heading_units(self.pose), desired):
            if self.budget_left() <= 0:
                return False
            self.act(turn)
        return True

    def plan_on_explored(self, goal_cell):
        units = _heading_units(self.pose)
        heading = {0: (0, 1), 3: (1, 0), 6: (0, -1), 9: (-1, 0)}.get(units)
        return smooth_path(self.emap.explored_free(), self.cell(), goal_cell,
                           heading=heading, cell_size=self.scene.cell_size)

    def plan_to_position(self, position: tuple[float, float]):
        """Path to the nearest reachable explored cell within the success
        radius of a continuous position; None if no such cell is reachable.
        Covers targets whose own cell was seen from afar and is not yet
        connected through explored space."""
        direct = self.plan_on_explored(self.scene.cell_of(*position))
        if direct is not None:
            return direct
        dist = bfs_distances(self.emap.explored_free(), self.cell())
        px, py = position
        radius = self.cfg.success_radius
        best = None
        h, w = self.emap.height, self.emap.width
        for r in range(h):
            for c in range(w):
                if dist[r, c] < 0:
                    continue
                cx, cy = self.scene.cell_center(r, c)
                if math.hypot(cx - px, cy - py) <= radius:
                    key = (int(dist[r, c]), r, c)
                    if best is None or key < best:
                        best = key
        if best is None:
            return None
        return self.plan_on_explored((best[1], best[2]))


def _run_subtask(scene: Scene, pose: Pose, emap: ExplorationMap, bank: MemoryBank,
                 target_category: str, target_position: tuple[float, float],
                 policy_rng: Rng, cfg: ExplorerConfig, next_frame_index: int,
                 seed: int, kind: str, use_recall: bool) -> tuple[Episode, Pose, int]:
    run = _SubtaskRun(scene, pose, emap, bank, cfg, next_frame_index, target_category)
    start_pose = pose
    reason = None
    done = False
    run.observe_and_record()

    if use_recall and not done:
        hit = bank.recall_target(target_category)
        if hit is not None:
            path = run.plan_to_position(hit[0])
            if path is not None:
                result = run.walk(path.waypoints)
                if result == "ok":
                    run.act(Action.STOP)
                    done = True
                elif result == "budget":
                    reason = "step_cap"
                    done = True

    iterations = 0
    while not done:
        iterations += 1
        if run.budget_left() <= 0 or iterations > cfg.step_cap:
            reason = "step_cap"
            break
        hits = run.target_hits()
        if hits:
            x, y, _ = run.pose.position
            goal_pos = min(hits, key=lambda p: ((p[0] - x) ** 2 + (p[1] - y) ** 2, p))
            path = run.plan_on_explored(scene.cell_of(*goal_pos))
            if path is not None:
                if run.walk(path.waypoints) == "ok":
                    run.act(Action.STOP)
                    done = True
                else:
                    reason = "step_cap"
                break
            # target seen but not yet connected through explored space:
            # keep exploring, ignoring sightings until the map grows
            run.blocked_at = run.emap.explored_count()
        explored_before = run.emap.explored_count()
        frontiers = extract_frontiers(run.emap)
        if not frontiers:
            reason = "exploration_exhausted"
            break
        dist = bfs_distances(run.emap.explored_free(), run.cell())

        def cost_of(f):
            reachable = [int(dist[cell]) for cell in f.cells if dist[cell] >= 0]
            return float(min(reachable)) if reachable else float("inf")

        frontier = select_subgoal(frontiers, cost_of, cfg.epsilon, policy_rng)
        if cost_of(frontier) == float("inf"):
            # every frontier is outside the 4-connected explored region
            # (visibility fringes); sweep the view and retry
            for _ in range(3):
                if run.budget_left() <= 0:
                    break
                run.act(Action.TURN_LEFT)
            if run.budget_left() <= 0:
                reason = "step_cap"
                break
            continue
        rep = frontier.representative
        run.subgoals.append((rep[0], rep[1], len(run.actions)))
        goal_cell = min((cell for cell in frontier.cells if dist[cell] >= 0),
                        key=lambda cell: (dist[cell], cell))
        path = run.plan_on_explored(goal_cell)
        if path is None:
            reason = "frontier_unreachable"
            break
        result = run.walk(path.waypoints, stop_on_target=True)
        if result == "budget":
            reason = "step_cap"
            break
        if result == "spotted":
            continue
        if not run.face_unknown(frontier):
            reason = "step_cap"
            break
        if (run.emap.explored_count() == explored_before
                and not path.waypoints[1:]):
            # standing on the frontier without learning anything new: a
            # full rotation resolves every unknown neighbor of this cell
            # (adjacent cells are never occluded), guaranteeing progress
            for _ in range(_TURN_UNITS):
                if run.budget_left() <= 0:
                    break
                run.act(Action.TURN_LEFT)
                if run.target_hits():
                    break

    # any instance of the target category counts, as in object-goal
    # evaluation; L* is the geodesic to the nearest instance
    goal_positions = [(o.x, o.y) for o in scene.objects
                      if o.category == target_category] or [target_position]
    success = 1 if done and reason is None and any(
        check_success(run.pose, gp, cfg.success_radius) for gp in goal_positions) else 0
    sx, sy, _ = start_pose.position
    free = scene.free_mask()
    shortest = min((d for gp in goal_positions
                    if (d := geodesic_distance(free, (sx, sy), gp, scene.cell_size))
                    is not None), default=None)
    if shortest is None or shortest <= 0:
        shortest = scene.cell_size  # degenerate; kept positive for SPL
    outcome = EpisodeOutcome(
        success=success,
        path_length=run.path_length,
        shortest_length=shortest,
        category=target_category,
        steps=len(run.actions),
        context_tokens_final=bank.context_tokens(),
    )
    episode = Episode(
        scene_id=scene.scene_id, seed=seed, kind=kind,
        instruction=f"Find the {target_category}",
        target_category=target_category, target_position=target_position,
        start_pose=start_pose, actions=run.actions, subgoals=run.subgoals,
        frames=run.frames, outcome=outcome, failure_reason=reason,
    )
    return episode, run.pose, run.next_frame_index


def _sample_start_pose(scene: Scene, rng: Rng) -> Pose:
    free = scene.free_mask()
    cells = [tuple(int(v) for v in rc) for rc in np.argwhere(free)]
    r, c = cells[rng.randrange(len(cells))]
    x, y = scene.cell_center(r, c)
    yaw = math.radians(30.0 * rng.randrange(_TURN_UNITS))
    return pose_from_yaw(x, y, yaw)


def _pick_target(candidates, pose: Pose, radius: float, rng: Rng):
    """Choose a (category, position) at least one success-radius away."""
    x, y, _ = pose.position
    far = [t for t in candidates
           if math.hypot(t[1][0] - x, t[1][1] - y) > radius]
    pool = far if far else candidates
    return pool[rng.randrange(len(pool))]


def generate_ovon_episode(scene: Scene, seed: int, explorer_config: ExplorerConfig,
                          tokens_per_frame: int = 30,
                          max_frames: int = 300) -> Episode:
    """Single-goal episode; deterministic in (scene, seed, configs)."""
    if not scene.objects:
        raise ValidationError("scene has no objects to navigate to")
    rng = Rng(derive_key(seed, 11))
    pose = _sample_start_pose(scene, rng)
    objects = [(o.category, (o.x, o.y)) for o in scene.objects]
    category, position = _pick_target(objects, pose, explorer_config.success_radius, rng)
    bank = MemoryBank(max_frames=max_frames, tokens_per_frame=tokens_per_frame,
                      pose_text_tokens=pose_token_estimate(serialize_pose(pose)))
    emap = ExplorationMap.for_scene(scene)
    policy_rng = Rng(derive_key(seed, 17, 0))
    episode, _, _ = _run_subtask(scene, pose, emap, bank, category, position,
                                 policy_rng, explorer_config, 0, seed, "ovon",
                                 use_recall=False)
    return episode


def generate_goat_sequence(scene: Scene, seed: int, num_subtasks: int,
                           memory_length: int, explorer_config: ExplorerConfig,
                           tokens_per_frame: int = 30, use_memory: bool = True,
                           target_policy: str = "random",
                           subtask_targets=None,
                           allowed_lengths=GOAT_MEMORY_LENGTHS) -> GoatEpisode:
    """Persistent multi-goal sequence: pose, explored map, and memory carry
    over between subtasks (unless use_memory is False, which resets the
    map and bank at each boundary for paired comparisons)."""
    if num_subtasks < 2:
        raise ValidationError("num_subtasks must be >= 2")
    if allowed_lengths is not None and memory_length not in allowed_lengths:
        raise ValidationError(f"memory_length must be one of {allowed_lengths}")
    if target_policy not in ("random", "seen"):
        raise ValidationError("target_policy must be 'random' or 'seen'")
    if not scene.objects:
        raise ValidationError("scene has no objects to navigate to")

    pose = _sample_start_pose(scene, Rng(derive_key(seed, 11)))
    bank = MemoryBank(max_frames=memory_length, tokens_per_frame=tokens_per_frame,
                      pose_text_tokens=pose_token_estimate(serialize_pose(pose)))
    emap = ExplorationMap.for_scene(scene)
    objects = [(o.category, (o.x, o.y)) for o in scene.objects]
    goat = GoatEpisode(scene_id=scene.scene_id, seed=seed, memory_length=memory_length)
    next_frame_index = 0

    for k in range(num_subtasks):
        if not use_memory and k > 0:
            bank.frames.clear()
            emap = ExplorationMap.for_scene(scene)
        if subtask_targets is not None:
            category, position = subtask_targets[k]
        else:
            target_rng = Rng(derive_key(seed, 13, k))
            candidates = objects
            if target_policy == "seen" and k > 0:
                seen = bank.observed_category_positions()
                if seen:
                    candidates = seen
            category, position = _pick_target(candidates, pose,
                                              explorer_config.success_radius,
                                              target_rng)
        policy_rng = Rng(derive_key(seed, 17, k))
        episode, pose, next_frame_index = _run_subtask(
            scene, pose, emap, bank, category, position, policy_rng,
            explorer_config, next_frame_index, seed, "goat-subtask",
            use_recall=use_memory)
        goat.subtasks.append(episode)
    return goat


def episode_steps(ep) -> int:
    if isinstance(ep, GoatEpisode):
        return sum(len(s.actions) for s in ep.subtasks)
    return len(ep.actions)


def filter_episodes(episodes: list, min_steps: int = DEFAULT_MIN_STEPS) -> list:
    """Drop overly short trajectories; stable order."""
    if min_steps < 0:
        raise ValidationError("min_steps must be >= 0")
    return [ep for ep in episodes if episode_steps(ep) >= min_steps]


# -- replay & persistence ------------------------------------------------

def replay_positions(scene: Scene, start_pose: Pose, actions: list[Action],
                     cfg: ExplorerConfig) -> list[tuple[float, float]]:
    """(x, y) after each action, starting with the start position."""
    pose = start_pose
    out = [pose.position[:2]]
    for action in actions:
        pose = step(scene, pose, action, cfg.forward_step, cfg.turn_deg)
        out.append(pose.position[:2])
    return out


def replay_final_pose(scene: Scene, start_pose: Pose, actions: list[Action],
                      cfg: ExplorerConfig) -> Pose:
    pose = start_pose
    for action in actions:
        pose = step(scene, pose, action, cfg.forward_step, cfg.turn_deg)
    return pose


def _pose_to_dict(pose: Pose) -> dict:
    return {"position": list(pose.position), "quaternion": list(pose.quaternion)}


def _pose_from_dict(doc: dict) -> Pose:
    return Pose(position=tuple(doc["position"]), quaternion=tuple(doc["quaternion"]))


def _outcome_to_dict(outcome: EpisodeOutcome) -> dict:
    return {
        "success": outcome.success,
        "L": outcome.path_length,
        "L_star": outcome.shortest_length,
        "steps": outcome.steps,
        "category": outcome.category,
        "context_tokens": outcome.context_tokens_final,
    }


def _outcome_from_dict(doc: dict) -> EpisodeOutcome:
    return EpisodeOutcome(
        success=int(doc["success"]), path_length=float(doc["L"]),
        shortest_length=float(doc["L_star"]), category=str(doc["category"]),
        steps=int(doc["steps"]), context_tokens_final=int(doc["context_tokens"]),
    )


def _subtask_to_dict(ep: Episode) -> dict:
    return {
        "instruction": ep.instruction,
        "target": {"category": ep.target_category,
                   "x": ep.target_position[0], "y": ep.target_position[1]},
        "start_pose": _pose_to_dict(ep.start_pose),
        "actions": [a.value for a in ep.actions],
        "subgoals": [{"row": r, "col": c, "step": s} for r, c, s in ep.subgoals],
        "frames": ep.frames,
        "outcome": _outcome_to_dict(ep.outcome),
        "failure_reason": ep.failure_reason,
    }


def _subtask_from_dict(doc: dict, scene_id: str, seed: int, kind: str) -> Episode:
    return Episode(
        scene_id=scene_id, seed=seed, kind=kind,
        instruction=str(doc["instruction"]),
        target_category=str(doc["target"]["category"]),
        target_position=(float(doc["target"]["x"]), float(doc["target"]["y"])),
        start_pose=_pose_from_dict(doc["start_pose"]),
        actions=[Action(a) for a in doc["actions"]],
        subgoals=[(g["row"], g["col"], g["step"]) for g in doc["subgoals"]],
        frames=list(doc["frames"]),
        outcome=_outcome_from_dict(doc["outcome"]),
        failure_reason=doc.get("failure_reason"),
    )


def episode_to_dict(ep) -> dict:
    if isinstance(ep, GoatEpisode):
        return {
            "scene_id": ep.scene_id, "seed": ep.seed, "kind": "goat",
            "memory_length": ep.memory_length,
            "subtasks": [_subtask_to_dict(s) for s in ep.subtasks],
        }
    return {"scene_id": ep.scene_id, "seed": ep.seed, "kind": "ovon",
            **_subtask_to_dict(ep)}


def episode_from_dict(doc: dict):
    try:
        kind = doc["kind"]
        scene_id, seed = str(doc["scene_id"]), int(doc["seed"])
        if kind == "goat":
            return GoatEpisode(
                scene_id=scene_id, seed=seed,
                memory_length=int(doc["memory_length"]),
                subtasks=[_subtask_from_dict(s, scene_id, seed, "goat-subtask")
                          for s in doc["subtasks"]],
            )
        if kind == "ovon":
            return _subtask_from_dict(doc, scene_id, seed, "ovon")
        raise ParseError(f"unknown episode kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed episode record: {exc}") from exc


def write_dataset(episodes: list, path) -> None:
    """JSONL, one episode per line, sorted by (scene_id, seed)."""
    ordered = sorted(episodes, key=lambda e: (e.scene_id, e.seed))
    with open(path, "w", encoding="utf-8") as fh:
        for ep in ordered:
            fh.write(json.dumps(episode_to_dict(ep), sort_keys=True,
                                separators=(",", ":")))
            fh.write("\n")


def read_dataset(path) -> list:
    episodes = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            episodes.append(episode_from_dict(doc))
    return episodes
