"""Agent kinematics, discrete actions, visibility, and pose text format.

All operations are pure functions; an episode owns its pose sequence.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .errors import ValidationError
from .scene import Scene

FORWARD_STEP_M = 0.25
TURN_DEG = 30.0
DEFAULT_FOV_DEG = 90.0
DEFAULT_RANGE_M = 5.0
SUCCESS_RADIUS_M = 1.0


class Action(enum.Enum):
    MOVE_FORWARD = "MOVE_FORWARD"
    TURN_LEFT = "TURN_LEFT"
    TURN_RIGHT = "TURN_RIGHT"
    STOP = "STOP"


@dataclass(frozen=True)
class Pose:
    """6-DOF pose: 3D position plus unit quaternion (w, x, y, z)."""

    position: tuple[float, float, float]
    quaternion: tuple[float, float, float, float]

    def yaw(self) -> float:
        """Heading about the vertical axis, radians in (-pi, pi]."""
        w, x, y, z = self.quaternion
        return math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))

    def unit_norm_error(self) -> float:
        return abs(math.sqrt(sum(q * q for q in self.quaternion)) - 1.0)


def pose_from_yaw(x: float, y: float, yaw: float) -> Pose:
    half = 0.5 * yaw
    return Pose(position=(x, y, 0.0), quaternion=(math.cos(half), 0.0, 0.0, math.sin(half)))


def _normalized(q: tuple[float, float, float, float]) -> tuple[float, float, float, float]:
    norm = math.sqrt(sum(v * v for v in q))
    return tuple(v / norm for v in q)


def step(scene: Scene, pose: Pose, action: Action,
         forward_step: float = FORWARD_STEP_M, turn_deg: float = TURN_DEG) -> Pose:
    """Apply one discrete action. Collisions are silent no-ops."""
    if action is Action.STOP:
        return pose
    if action is Action.MOVE_FORWARD:
        yaw = pose.yaw()
        x, y, z = pose.position
        nx = x + forward_step * math.cos(yaw)
        ny = y + forward_step * math.sin(yaw)
        r, c = scene.cell_of(nx, ny)
        if not scene.is_free(r, c):
            return pose
        return Pose(position=(nx, ny, z), quaternion=pose.quaternion)
    # turn: compose a yaw rotation, then renormalize to keep unit norm
    sign = 1.0 if action is Action.TURN_LEFT else -1.0
    half = 0.5 * math.radians(sign * turn_deg)
    cw, cz = math.cos(half), math.sin(half)
    w, x, y, z = pose.quaternion
    rotated = (
        cw * w - cz * z,
        cw * x - cz * y,
        cw * y + cz * x,
        cw * z + cz * w,
    )
    return Pose(position=pose.position, quaternion=_normalized(rotated))


@dataclass
class Observation:
    visible_cells: set[tuple[int, int]]
    visible_objects: list[tuple[str, str, tuple[float, float]]]  # (object_id, category, (x, y))
    pose: Pose
    frame_index: int = 0


def traverse_cells(x0: float, y0: float, x1: float, y1: float, cell_size: float):
    """Grid cells crossed by the segment (x0,y0)->(x1,y1), start to end.

    Amanatides-Woo traversal; on exact corner crossings the column step is
    taken first (deterministic tie rule).
    """
    inv = 1.0 / cell_size
    col = int(math.floor(x0 * inv))
    row = int(math.floor(y0 * inv))
    col1 = int(math.floor(x1 * inv))
    row1 = int(math.floor(y1 * inv))
    dx = x1 - x0
    dy = y1 - y0
    step_c = 1 if dx > 0 else -1
    step_r = 1 if dy > 0 else -1
    if dx != 0:
        next_cx = (col + (step_c > 0)) * cell_size
        t_max_x = (next_cx - x0) / dx
        t_dx = cell_size / abs(dx)
    else:
        t_max_x = math.inf
        t_dx = math.inf
    if dy != 0:
        next_cy = (row + (step_r > 0)) * cell_size
        t_max_y = (next_cy - y0) / dy
        t_dy = cell_size / abs(dy)
    else:
        t_max_y = math.inf
        t_dy = math.inf

    guard = 4 * (abs(col1 - col) + abs(row1 - row)) + 8
    for _ in range(guard):
        yield row, col
        if row == row1 and col == col1:
            return
        if t_max_x <= t_max_y:
            col += step_c
            t_max_x += t_dx
        else:
            row += step_r
            t_max_y += t_dy
    yield row1, col1  # numeric fallback; segment endpoints are always emitted


def _line_of_sight(scene: Scene, x0: float, y0: float, x1: float, y1: float) -> bool:
    """True if no Obstacle cell lies strictly between the endpoints' cells."""
    target = scene.cell_of(x1, y1)
    free = scene.free_mask()
    for r, c in traverse_cells(x0, y0, x1, y1, scene.cell_size):
        if (r, c) == target:
            return True
        if not scene.in_bounds(r, c) or not free[r, c]:
            return False
    return True


def observe(scene: Scene, pose: Pose,
            fov_degrees: float = DEFAULT_FOV_DEG,
            range_m: float = DEFAULT_RANGE_M,
            frame_index: int = 0) -> Observation:
    """Visibility: within range, within FOV, unblocked straight segment.

    The agent's own cell is always visible. An Obstacle cell is itself
    visible when the segment to its center is otherwise clear (seeing the
    wall surface).
    """
    if not 0 < fov_degrees <= 360:
        raise ValidationError("fov_degrees must lie in (0, 360]")
    if range_m <= 0:
        raise ValidationError("range_m must be positive")

    x, y, _ = pose.position
    cs = scene.cell_size
    yaw = pose.yaw()
    half_fov = math.radians(fov_degrees) / 2.0 + 1e-9
    full_circle = fov_degrees >= 360.0

    r_lo = max(0, int(math.floor((y - range_m) / cs)))
    r_hi = min(scene.height - 1, int(math.floor((y + range_m) / cs)))
    c_lo = max(0, int(math.floor((x - range_m) / cs)))
    c_hi = min(scene.width - 1, int(math.floor((x + range_m) / cs)))

    own = scene.cell_of(x, y)
    visible: set[tuple[int, int]] = {own}
    range_sq = range_m * range_m
    for r in range(r_lo, r_hi + 1):
        cy = (r + 0.5) * cs
        for c in range(c_lo, c_hi + 1):
            if (r, c) == own:
                continue
            cx = (c + 0.5) * cs
            ddx, ddy = cx - x, cy - y
            if ddx * ddx + ddy * ddy > range_sq:
                continue
            if not full_circle:
                rel = math.atan2(ddy, ddx) - yaw
                rel = (rel + math.pi) % (2.0 * math.pi) - math.pi
                if abs(rel) > half_fov:
                    continue
            if _line_of_sight(scene, x, y, cx, cy):
                visible.add((r, c))

    objects = [
        (o.object_id, o.category, (o.x, o.y))
        for o in scene.objects
        if scene.cell_of(o.x, o.y) in visible
    ]
    return Observation(visible_cells=visible, visible_objects=objects,
                       pose=pose, frame_index=frame_index)


def check_success(pose: Pose, target_position: tuple[float, float],
                  radius_m: float = SUCCESS_RADIUS_M) -> bool:
    """Within the success radius of the target, boundary inclusive."""
    x, y, _ = pose.position
    tx, ty = target_position
    return math.hypot(x - tx, y - ty) <= radius_m


def serialize_pose(pose: Pose) -> str:
    x, y, z = pose.position
    w, qx, qy, qz = pose.quaternion
    return (f"P=({x:.3f},{y:.3f},{z:.3f}) "
            f"Q=({w:.3f},{qx:.3f},{qy:.3f},{qz:.3f})")


_POSE_RE = re.compile(
    r"^P=\(([-\d.]+),([-\d.]+),([-\d.]+)\) "
    r"Q=\(([-\d.]+),([-\d.]+),([-\d.]+),([-\d.]+)\)$"
)


def parse_pose(text: str) -> Pose:
    m = _POSE_RE.match(text)
    if not m:
        raise ValidationError(f"unparseable pose text: {text!r}")
    vals = [float(g) for g in m.groups()]
    return Pose(position=tuple(vals[:3]), quaternion=tuple(vals[3:]))
