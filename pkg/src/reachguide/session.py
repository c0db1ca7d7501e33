"""Application session state machine.

Six states (Idle, Listening, Processing, Speaking, Scanning, Guiding)
driven by a pure transition function ``step``.  Unmatched (state, event)
pairs are explicit no-ops: same state back, no actions.  Shaking the
device cancels from any non-Idle state back to Listening.
"""

import enum
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .intent import Intent, IntentKind


class StateKind(enum.Enum):
    IDLE = "Idle"
    LISTENING = "Listening"
    PROCESSING = "Processing"
    SPEAKING = "Speaking"
    SCANNING = "Scanning"
    GUIDING = "Guiding"


@dataclass(frozen=True)
class SessionState:
    kind: StateKind
    query: str = ""          # active object query (Scanning / Guiding)
    pending_query: str = ""  # FindObject query awaiting speech completion (Speaking)
    anchor: object = None    # active TargetAnchor reference (Guiding)

    def __post_init__(self):
        if self.kind in (StateKind.SCANNING, StateKind.GUIDING) and not self.query:
            raise ValueError(f"{self.kind.value} state requires a non-empty query")

    @staticmethod
    def idle():
        return SessionState(StateKind.IDLE)


class EventKind(enum.Enum):
    SYSTEM_READY = "SystemReady"
    UTTERANCE_CAPTURED = "UtteranceCaptured"
    INTENT_RESOLVED = "IntentResolved"
    SPEECH_DONE = "SpeechDone"
    DETECTION_TICK = "DetectionTick"
    DETECTION_RESULT = "DetectionResult"
    ANCHOR_ESTABLISHED = "AnchorEstablished"
    TARGET_REACHED = "TargetReached"
    SHAKE = "Shake"
    CLIENT_ERROR = "ClientError"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class SessionEvent:
    kind: EventKind
    text: str = ""            # UtteranceCaptured
    intent: Intent = None     # IntentResolved
    detection: object = None  # DetectionResult payload (None = no detection)
    anchor: object = None     # AnchorEstablished
    error_kind: str = ""      # ClientError

    def __post_init__(self):
        if self.kind is EventKind.UTTERANCE_CAPTURED and not self.text:
            raise ValueError("UtteranceCaptured requires non-empty text")


class ActionKind(enum.Enum):
    START_LISTENING = "StartListening"
    CALL_INTENT_RESOLVER = "CallIntentResolver"
    SPEAK = "Speak"
    START_SCAN_LOOP = "StartScanLoop"
    REQUEST_DETECTION = "RequestDetection"
    ESTABLISH_ANCHOR = "EstablishAnchor"
    EMIT_CUE = "EmitCue"
    STOP_ALL_FEEDBACK = "StopAllFeedback"
    LOG_ERROR = "LogError"


@dataclass(frozen=True)
class SessionAction:
    kind: ActionKind
    text: str = ""
    query: str = ""
    detection: object = None
    cue: object = None
    error_kind: str = ""


@dataclass(frozen=True)
class SessionConfig:
    refresh_anchor_in_guiding: bool = True
    timeout_s: float = 120.0
    confirmation_template: str = "Okay, looking for {query}."
    error_template: str = "Sorry, I hit a problem ({kind}). Please try again."


DEFAULT_CONFIG = SessionConfig()


def step(state: SessionState, event: SessionEvent, config: SessionConfig = DEFAULT_CONFIG):
    """Pure transition function: (state, event) -> (state', actions)."""
    k, e = state.kind, event.kind

    # Global interrupts first.
    if e is EventKind.SHAKE:
        if k is StateKind.IDLE:
            return state, []
        return SessionState(StateKind.LISTENING), [SessionAction(ActionKind.STOP_ALL_FEEDBACK)]
    if e is EventKind.TIMEOUT:
        return SessionState(StateKind.LISTENING), [SessionAction(ActionKind.STOP_ALL_FEEDBACK)]
    if e is EventKind.CLIENT_ERROR and k in (StateKind.PROCESSING, StateKind.SCANNING):
        notice = config.error_template.format(kind=event.error_kind or "error")
        return (SessionState(StateKind.SPEAKING),
                [SessionAction(ActionKind.LOG_ERROR, error_kind=event.error_kind),
                 SessionAction(ActionKind.SPEAK, text=notice)])

    if k is StateKind.IDLE:
        if e is EventKind.SYSTEM_READY:
            return SessionState(StateKind.LISTENING), [SessionAction(ActionKind.START_LISTENING)]

    elif k is StateKind.LISTENING:
        if e is EventKind.UTTERANCE_CAPTURED:
            return (SessionState(StateKind.PROCESSING),
                    [SessionAction(ActionKind.CALL_INTENT_RESOLVER, text=event.text)])

    elif k is StateKind.PROCESSING:
        if e is EventKind.INTENT_RESOLVED and event.intent is not None:
            intent = event.intent
            if intent.kind is IntentKind.FIND_OBJECT:
                confirmation = config.confirmation_template.format(query=intent.query)
                return (SessionState(StateKind.SPEAKING, pending_query=intent.query),
                        [SessionAction(ActionKind.SPEAK, text=confirmation)])
            return (SessionState(StateKind.SPEAKING),
                    [SessionAction(ActionKind.SPEAK, text=intent.text)])

    elif k is StateKind.SPEAKING:
        if e is EventKind.SPEECH_DONE:
            if state.pending_query:
                q = state.pending_query
                return (SessionState(StateKind.SCANNING, query=q),
                        [SessionAction(ActionKind.START_SCAN_LOOP, query=q)])
            return SessionState(StateKind.LISTENING), []

    elif k is StateKind.SCANNING:
        if e is EventKind.DETECTION_TICK:
            return state, [SessionAction(ActionKind.REQUEST_DETECTION, query=state.query)]
        if e is EventKind.DETECTION_RESULT:
            if event.detection is None:
                return state, []
            return state, [SessionAction(ActionKind.ESTABLISH_ANCHOR, detection=event.detection)]
        if e is EventKind.ANCHOR_ESTABLISHED:
            return SessionState(StateKind.GUIDING, query=state.query, anchor=event.anchor), []

    elif k is StateKind.GUIDING:
        if e is EventKind.DETECTION_TICK:
            if config.refresh_anchor_in_guiding:
                return state, [SessionAction(ActionKind.REQUEST_DETECTION, query=state.query)]
            return state, []
        if e is EventKind.DETECTION_RESULT:
            if event.detection is None or not config.refresh_anchor_in_guiding:
                return state, []
            return state, [SessionAction(ActionKind.ESTABLISH_ANCHOR, detection=event.detection)]
        if e is EventKind.ANCHOR_ESTABLISHED:
            return replace(state, anchor=event.anchor), []
        if e is EventKind.TARGET_REACHED:
            return SessionState(StateKind.LISTENING), [SessionAction(ActionKind.STOP_ALL_FEEDBACK)]

    return state, []


def run_session(initial: SessionState, events, config: SessionConfig = DEFAULT_CONFIG):
    """Fold ``step`` over an ordered event stream.

    Returns a transcript of (event, state_after, actions) triples; the
    final state is the transcript's last state (or ``initial`` when the
    stream is empty).
    """
    transcript = []
    state = initial
    for event in events:
        state, actions = step(state, event, config)
        transcript.append((event, state, actions))
    return transcript


def transcript_records(transcript, initial: SessionState, times=None):
    """Transcript as JSON-serializable dicts, one per event."""
    records = []
    prev = initial
    for i, (event, state, actions) in enumerate(transcript):
        records.append({
            "monotonic_time_s": None if times is None else times[i],
            "event": event.kind.value,
            "prev_state": prev.kind.value,
            "next_state": state.kind.value,
            "actions": [a.kind.value for a in actions],
        })
        prev = state
    return records


def export_transcript(transcript, initial, path, times=None):
    """Newline-delimited JSON export, one record per event."""
    with open(path, "w") as f:
        for rec in transcript_records(transcript, initial, times):
            f.write(json.dumps(rec) + "\n")


@dataclass(frozen=True)
class AccelSample:
    timestamp: float      # seconds, monotonic
    acceleration: tuple   # 3-vector, units of g


@dataclass(frozen=True)
class ShakeConfig:
    window_s: float = 0.5
    peak_g: float = 2.0
    min_peaks: int = 3


def detect_shake(window, config: ShakeConfig = ShakeConfig()):
    """Shake gesture: enough high-excess-acceleration peaks in the
    trailing window.  Empty windows signal no gesture, never an error."""
    if not window:
        return False
    t_end = window[-1].timestamp
    peaks = 0
    for s in window:
        if s.timestamp < t_end - config.window_s:
            continue
        mag = float(np.linalg.norm(s.acceleration))
        if mag - 1.0 > config.peak_g:
            peaks += 1
    return peaks >= config.min_peaks
