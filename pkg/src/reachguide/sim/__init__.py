from .scene import Scene, SceneObject, build_shelf_scene, randomize_positions, scene_hash
from .render import render_depth, project, oracle_detect
from .agent import AgentParams, AgentState, agent_step
from .trial import TrialConfig, TrialRecord, run_trial

__all__ = [
    "Scene", "SceneObject", "build_shelf_scene", "randomize_positions", "scene_hash",
    "render_depth", "project", "oracle_detect",
    "AgentParams", "AgentState", "agent_step",
    "TrialConfig", "TrialRecord", "run_trial",
]
