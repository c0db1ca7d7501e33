"""Scripted user-agent that obeys guidance cues.

The agent stands in for the study participant: it holds the camera,
turns toward cued directions, advances on Forward, and reaches out on
arrival.  Yaw is compass-like (positive = turning right), pitch positive
= looking up.  With no cue it sweeps the camera slowly side to side.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..guidance import Direction
from ..perception import Pose
from .scene import CAM_BASE, Scene


@dataclass(frozen=True)
class AgentParams:
    turn_rate_deg_s: float = 90.0
    move_speed_m_s: float = 0.5
    reach_m: float = 0.3
    touch_radius_m: float = 0.05
    reaction_delay_s: float = 0.2
    heading_sd_deg: float = 0.0
    speed_jitter: float = 0.0
    sweep_half_angle_deg: float = 60.0
    sweep_rate_deg_s: float = 30.0
    seed: int = 0

    def __post_init__(self):
        if min(self.turn_rate_deg_s, self.move_speed_m_s, self.reach_m,
               self.touch_radius_m) <= 0:
            raise ValueError("rates and radii must be positive")


def _rot_y(deg):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(deg):
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def pose_from_heading(position, yaw_deg, pitch_deg):
    """Camera pose from position + compass yaw + pitch (up positive)."""
    rot = _rot_y(-yaw_deg) @ _rot_x(pitch_deg) @ CAM_BASE
    return Pose(rot, np.asarray(position, dtype=np.float64))


@dataclass
class AgentState:
    params: AgentParams
    position: np.ndarray
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    sweep_dir: float = 1.0
    pending: tuple = None      # (receive_time_s, cue) awaiting reaction delay
    active_cue: object = None
    rem_az_deg: float = 0.0
    rem_el_deg: float = 0.0
    undesired_touches: int = 0
    touching: set = field(default_factory=set)
    rng: object = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).copy()
        if self.rng is None:
            self.rng = np.random.default_rng(self.params.seed)

    @property
    def pose(self):
        return pose_from_heading(self.position, self.yaw_deg, self.pitch_deg)

    @property
    def forward(self):
        return self.pose.rotation @ np.array([0.0, 0.0, 1.0])

    @property
    def hand(self):
        """Grasp point: camera position plus reach along the view axis."""
        return self.position + self.params.reach_m * self.forward


def agent_from_scene(scene: Scene, params: AgentParams):
    return AgentState(params=params, position=scene.camera_start.translation.copy())


def _point_box_distance(point, lo, hi):
    d = np.maximum(np.maximum(lo - point, 0.0), point - hi)
    return float(np.linalg.norm(d))


def agent_step(state: AgentState, cue, dt_s, scene: Scene, now_s=0.0):
    """Advance the agent one step; ``cue`` is a newly emitted cue or None.

    Cues take effect after the reaction delay.  Turning is dead-reckoned
    against the cue's azimuth/elevation; a cue whose turn budget is spent
    (and that is not Arrived) degrades to walking forward.
    """
    if dt_s <= 0:
        raise ValueError("dt_s must be positive")
    p = state.params
    if cue is not None:
        state.pending = (now_s, cue)
    if state.pending is not None and now_s - state.pending[0] >= p.reaction_delay_s - 1e-9:
        _, active = state.pending
        state.active_cue = active
        state.rem_az_deg = abs(active.azimuth_deg)
        state.rem_el_deg = abs(active.elevation_deg)
        state.pending = None

    turn = p.turn_rate_deg_s * dt_s
    if p.heading_sd_deg > 0:
        turn += float(state.rng.normal(0.0, p.heading_sd_deg)) * dt_s
    speed = p.move_speed_m_s
    if p.speed_jitter > 0:
        speed *= max(0.0, 1.0 + float(state.rng.normal(0.0, p.speed_jitter)))

    active = state.active_cue
    if active is None:
        # Idle scan sweep: slow yaw oscillation.  The sweep pauses while
        # a cue awaits the reaction delay, so the heading the cue was
        # computed against is still valid when the agent acts on it.
        if state.pending is None:
            step = p.sweep_rate_deg_s * dt_s * state.sweep_dir
            state.yaw_deg += step
            if abs(state.yaw_deg) >= p.sweep_half_angle_deg:
                state.yaw_deg = math.copysign(p.sweep_half_angle_deg, state.yaw_deg)
                state.sweep_dir = -state.sweep_dir
    elif active.direction is not Direction.ARRIVED:
        # Dead-reckon the cue: null the azimuth first, then elevation,
        # then walk the view axis.  Signs follow the cue's angles (a
        # negative azimuth is a target to the left -> yaw decreases).
        if state.rem_az_deg > 1e-9 and abs(active.azimuth_deg) > 1e-9:
            d = min(turn, state.rem_az_deg)
            state.yaw_deg += math.copysign(d, active.azimuth_deg)
            state.rem_az_deg -= d
        elif state.rem_el_deg > 1e-9 and abs(active.elevation_deg) > 1e-9:
            d = min(turn, state.rem_el_deg)
            state.pitch_deg += math.copysign(d, active.elevation_deg)
            state.rem_el_deg -= d
        else:
            state.position += speed * dt_s * state.forward
    # Direction.ARRIVED: hold position, hand stays extended.

    _count_touches(state, scene)
    return state


def _count_touches(state: AgentState, scene: Scene):
    # First-entry semantics: each re-entry after a full exit counts again.
    hand = state.hand
    for obj in scene.objects:
        if obj.id == scene.target_id:
            continue
        inside = _point_box_distance(hand, obj.lo, obj.hi) <= state.params.touch_radius_m
        if inside and obj.id not in state.touching:
            state.undesired_touches += 1
            state.touching.add(obj.id)
        elif not inside:
            state.touching.discard(obj.id)


def hand_on_target(state: AgentState, scene: Scene):
    t = scene.target
    return _point_box_distance(state.hand, t.lo, t.hi) <= state.params.touch_radius_m
