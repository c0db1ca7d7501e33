"""reachguide: deterministic object-retrieval guidance engine.

Session state machine, conversational intent resolution, depth-based 3D
target localization, audio-haptic guidance policy, a seeded scene
simulator with a scripted agent, and the evaluation statistics to
compare guidance methods - all runnable from the ``reachguide`` CLI.
"""

__version__ = "0.1.0"
