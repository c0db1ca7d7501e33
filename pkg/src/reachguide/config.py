"""Structured run configuration: one human-editable YAML file.

Every numeric default in the engine appears here, so ``gen-config``
exposes the full tuning surface.  Unknown keys are rejected with the
offending key path named.
"""

import copy

import yaml

from .clients import MockNoise
from .guidance import GuidanceConfig
from .perception import CameraIntrinsics
from .session import SessionConfig, ShakeConfig
from .sim.agent import AgentParams
from .sim.scene import DEFAULT_OBJECTS, DEFAULT_SHELF, ConfigError, build_shelf_scene
from .sim.trial import METHODS, TrialConfig

DEFAULTS = {
    "scene": {
        "target": "rotini",
        "shelf": dict(DEFAULT_SHELF),
        "objects": [
            {"id": oid, "label": label, "half_extents": list(he)}
            for oid, label, he in DEFAULT_OBJECTS
        ],
    },
    "camera": {"fx": 40.0, "fy": 40.0, "cx": 32.0, "cy": 24.0, "width": 64, "height": 48},
    "trial": {
        "detect_interval_s": 1.0,
        "clock_step_s": 0.05,
        "timeout_s": 120.0,
        "max_range_m": 5.0,
        "ema_alpha": 0.5,
        "min_confidence": 0.3,
        "occlusion_eps_m": 0.01,
        "description_cue_sd_deg": 2.5,
        "oneshot_cue_sd_deg": 4.0,
    },
    "agent": {
        "turn_rate_deg_s": 90.0,
        "move_speed_m_s": 0.5,
        "reach_m": 0.3,
        "touch_radius_m": 0.05,
        "reaction_delay_s": 0.2,
        "heading_sd_deg": 0.0,
        "speed_jitter": 0.0,
        "sweep_half_angle_deg": 60.0,
        "sweep_rate_deg_s": 30.0,
    },
    "guidance": {
        "dir_threshold_deg": 10.0,
        "arrival_m": 0.15,
        "near_m": 0.3,
        "far_m": 1.0,
        "pulse_rates_hz": [1.0, 3.0, 8.0, 12.0],
        "duty": 0.5,
        "min_gap_s": 1.5,
    },
    "session": {"refresh_anchor_in_guiding": True},
    "shake": {"window_s": 0.5, "peak_g": 2.0, "min_peaks": 3},
    "noise": {
        "miss_prob": 0.0,
        "false_positive_prob": 0.0,
        "latency_mean_s": 0.0,
        "latency_sd_s": 0.0,
    },
    "run": {
        "trials": 3,
        "participants": 1,
        "methods": ["navisense"],
        "objects": ["rotini", "cups", "milk"],
    },
}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        key_path = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {key_path}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {key_path} must be a mapping")
            out[key] = _merge(base[key], value, key_path)
        else:
            out[key] = value
    return out


def load_config(path=None):
    """Load a YAML config merged over the defaults; None gives defaults."""
    if path is None:
        return copy.deepcopy(DEFAULTS)
    with open(path) as f:
        doc = yaml.safe_load(f) or {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    return _merge(DEFAULTS, doc)


def reference_yaml():
    """The full default config, round-trippable through load_config."""
    return yaml.safe_dump(DEFAULTS, sort_keys=False)


def scene_from_config(cfg, target=None):
    sc = cfg["scene"]
    objects = [(o["id"], o["label"], tuple(o["half_extents"])) for o in sc["objects"]]
    return build_shelf_scene(objects=objects, target_id=target or sc["target"],
                             shelf=sc["shelf"])


def intrinsics_from_config(cfg):
    return CameraIntrinsics(**cfg["camera"])


def agent_params_from_config(cfg, seed=0):
    return AgentParams(seed=seed, **cfg["agent"])


def trial_config_from_config(cfg, method="navisense"):
    g = dict(cfg["guidance"])
    g["pulse_rates_hz"] = tuple(g["pulse_rates_hz"])
    return TrialConfig(
        intr=intrinsics_from_config(cfg),
        method=method,
        noise=MockNoise(**cfg["noise"]),
        guidance=GuidanceConfig(**g),
        session=SessionConfig(refresh_anchor_in_guiding=cfg["session"]["refresh_anchor_in_guiding"]),
        **cfg["trial"],
    )


def shake_config_from_config(cfg):
    return ShakeConfig(**cfg["shake"])
