"""End-to-end seeded trials on a virtual clock.

One trial wires the session FSM, detection tick scheduler, mock
detector, anchor maintenance, guidance policy, and the scripted agent
into a single deterministic loop.  Search time runs from task start to
the first established anchor; guidance time from there to grasp.
"""

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .. import guidance as gd
from .. import session as ss
from ..clients import MockDetectorClient, MockNoise, vlm_detect
from ..clock import TickScheduler, VirtualClock
from ..intent import MockIntentResolver, resolve_intent
from ..perception import (CameraIntrinsics, NoDepth, bbox_depth, to_world,
                          unproject, update_anchor)
from .agent import AgentParams, agent_from_scene, agent_step, hand_on_target
from .render import oracle_detect, render_depth
from .scene import ConfigError, Scene, scene_hash

METHODS = ("navisense", "description-only", "oneshot-query")


@dataclass(frozen=True)
class TrialConfig:
    intr: CameraIntrinsics = CameraIntrinsics(fx=40.0, fy=40.0, cx=32.0, cy=24.0,
                                              width=64, height=48)
    detect_interval_s: float = 1.0
    clock_step_s: float = 0.05
    timeout_s: float = 120.0
    max_range_m: float = 5.0
    ema_alpha: float = 0.5
    min_confidence: float = 0.3
    occlusion_eps_m: float = 0.01
    method: str = "navisense"
    # Angular error (deg, sd) applied to the single coarse cue of the
    # non-guided presets; they emulate interaction patterns, not products.
    description_cue_sd_deg: float = 2.5
    oneshot_cue_sd_deg: float = 4.0
    noise: MockNoise = MockNoise()
    guidance: gd.GuidanceConfig = gd.DEFAULT_CONFIG
    session: ss.SessionConfig = ss.DEFAULT_CONFIG

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method preset {self.method!r}")


@dataclass
class TrialRecord:
    search_time_s: float
    guidance_time_s: float
    total_time_s: float
    undesired_touches: int
    success: bool
    timed_out: bool
    seed: int
    method: str
    target_label: str
    scene_hash: str
    transcript: list = None

    def to_json_line(self):
        d = {k: v for k, v in dataclasses.asdict(self).items() if k != "transcript"}
        return json.dumps(d, sort_keys=True)


def run_trial(scene: Scene, agent_params: AgentParams, cfg: TrialConfig, seed):
    """Run one full retrieval trial; deterministic given the seed."""
    if cfg.timeout_s <= 0 or cfg.clock_step_s <= 0:
        raise ConfigError("timeout_s and clock_step_s must be positive")
    client_seed, agent_seed, cue_seed = np.random.SeedSequence(seed).spawn(3)
    cue_rng = np.random.default_rng(cue_seed)

    clock = VirtualClock(cfg.clock_step_s)
    scheduler = TickScheduler(cfg.detect_interval_s)
    agent = agent_from_scene(scene, agent_params)
    agent.rng = np.random.default_rng(agent_seed)

    def oracle(snapshot_pose, query, rng, force_wrong=False):
        return oracle_detect(scene, snapshot_pose, cfg.intr, query, rng,
                             occlusion_eps_m=cfg.occlusion_eps_m,
                             force_wrong=force_wrong)

    client = MockDetectorClient(oracle, noise=cfg.noise, seed=client_seed, now=clock.now)

    target_label = scene.target.label
    session_cfg = cfg.session
    continuous = cfg.method == "navisense"
    single_query = cfg.method == "oneshot-query"
    if not continuous:
        session_cfg = dataclasses.replace(session_cfg, refresh_anchor_in_guiding=False)

    state = ss.SessionState.idle()
    transcript = []
    anchor = None
    anchor_time = None
    prev_cue = None
    pending_cue = None  # cue to hand the agent this step
    detections_sent = 0
    success = False
    timed_out = False

    def dispatch(event):
        nonlocal state
        prev = state
        state, actions = ss.step(state, event, session_cfg)
        transcript.append({
            "monotonic_time_s": clock.now(),
            "event": event.kind.value,
            "prev_state": prev.kind.value,
            "next_state": state.kind.value,
            "actions": [a.kind.value for a in actions],
        })
        for action in actions:
            handle(action)

    def handle(action):
        nonlocal anchor, anchor_time, detections_sent, pending_cue
        if action.kind is ss.ActionKind.REQUEST_DETECTION:
            detections_sent += 1
            det = vlm_detect(agent.pose, action.query, client)
            dispatch(ss.SessionEvent(ss.EventKind.DETECTION_RESULT, detection=det))
        elif action.kind is ss.ActionKind.ESTABLISH_ANCHOR:
            det = action.detection
            frame = render_depth(scene, agent.pose, cfg.intr, cfg.max_range_m)
            try:
                depth = bbox_depth(frame, det.bbox)
            except NoDepth:
                return  # keep scanning
            point_cam = unproject(det.center(), depth, cfg.intr)
            point_world = to_world(point_cam, agent.pose)
            anchor = update_anchor(anchor, point_world, clock.now(),
                                   alpha=cfg.ema_alpha, confidence=det.confidence)
            if det.confidence >= cfg.min_confidence:
                first = anchor_time is None
                dispatch(ss.SessionEvent(ss.EventKind.ANCHOR_ESTABLISHED, anchor=anchor))
                if first and anchor_time is None:
                    anchor_time = clock.now()
                if first and not continuous:
                    # Degraded presets: exactly one cue, at localization,
                    # blurred by the coarse-description angular error.
                    cue = gd.compute_cue(anchor, agent.pose, cfg.guidance)
                    sd = (cfg.oneshot_cue_sd_deg if single_query
                          else cfg.description_cue_sd_deg)
                    if sd > 0:
                        cue = dataclasses.replace(
                            cue,
                            azimuth_deg=cue.azimuth_deg + float(cue_rng.normal(0.0, sd)),
                            elevation_deg=cue.elevation_deg + float(cue_rng.normal(0.0, sd)))
                    pending_cue = cue

    # Scripted task preamble (all at t = 0).
    dispatch(ss.SessionEvent(ss.EventKind.SYSTEM_READY))
    utterance = f"find the {target_label}"
    dispatch(ss.SessionEvent(ss.EventKind.UTTERANCE_CAPTURED, text=utterance))
    intent = resolve_intent(utterance, resolver=MockIntentResolver())
    dispatch(ss.SessionEvent(ss.EventKind.INTENT_RESOLVED, intent=intent))
    dispatch(ss.SessionEvent(ss.EventKind.SPEECH_DONE))

    while True:
        now = clock.advance()
        if now > cfg.timeout_s + 1e-9:
            timed_out = True
            dispatch(ss.SessionEvent(ss.EventKind.TIMEOUT))
            now = cfg.timeout_s
            break
        tick = scheduler.poll(now)
        if tick is not None and not (single_query and detections_sent >= 1):
            dispatch(ss.SessionEvent(ss.EventKind.DETECTION_TICK))

        cue = pending_cue
        pending_cue = None
        if continuous and state.kind is ss.StateKind.GUIDING and anchor is not None:
            candidate = gd.compute_cue(anchor, agent.pose, cfg.guidance)
            emitted = gd.throttle(prev_cue, (now, candidate), cfg.guidance.min_gap_s)
            if emitted is not None:
                prev_cue = (now, emitted)
                cue = emitted
        agent_step(agent, cue, cfg.clock_step_s, scene, now_s=now)

        if anchor_time is not None and hand_on_target(agent, scene):
            success = True
            if state.kind is ss.StateKind.GUIDING:
                dispatch(ss.SessionEvent(ss.EventKind.TARGET_REACHED))
            break

    end = now
    if anchor_time is None:
        search, guide = end, 0.0
    else:
        search, guide = anchor_time, end - anchor_time
    return TrialRecord(
        search_time_s=search,
        guidance_time_s=guide,
        total_time_s=search + guide,
        undesired_touches=agent.undesired_touches,
        success=success and hand_on_target(agent, scene),
        timed_out=timed_out,
        seed=int(seed),
        method=cfg.method,
        target_label=target_label,
        scene_hash=scene_hash(scene),
        transcript=transcript,
    )
