"""Utterance-to-intent resolution.

A user utterance (plain text) resolves to one of three intents: find an
object (with a query string), ask a clarifying question back, or plain
chat.  Resolution is pluggable: a deterministic rule-based resolver for
offline simulation, or a remote LLM endpoint speaking a strict
line-oriented reply grammar (``INTENT:`` / ``QUERY:`` / ``TEXT:``).
"""

import enum
import re
from dataclasses import dataclass, field


class InvalidUtterance(ValueError):
    """Empty or whitespace-only utterance."""


class IntentKind(enum.Enum):
    FIND_OBJECT = "find"
    CLARIFY = "clarify"
    CHAT = "chat"


@dataclass(frozen=True)
class Intent:
    kind: IntentKind
    query: str = ""                 # FIND_OBJECT only; normalized
    attributes: tuple = ()          # FIND_OBJECT descriptor phrases
    text: str = ""                  # CLARIFY question / CHAT reply

    def __post_init__(self):
        if self.kind is IntentKind.FIND_OBJECT and not self.query:
            raise ValueError("FindObject intent requires a non-empty query")


@dataclass(frozen=True)
class DialogueTurn:
    speaker: str  # "user" | "system"
    text: str


_STOP_PREFIXES = ("my", "the", "a", "an", "some")

_FIND_PATTERNS = [
    re.compile(r"\b(?:find|locate|get)\b\s+(.+)", re.IGNORECASE),
    re.compile(r"\blooking\s+for\b\s+(.+)", re.IGNORECASE),
    re.compile(r"\bwhere\s+(?:is|are)\b\s+(.+)", re.IGNORECASE),
]

DEFAULT_NEED_PHRASES = {
    "i'm thirsty": "Would you like me to find a water bottle or a soft drink?",
    "i am thirsty": "Would you like me to find a water bottle or a soft drink?",
}


def normalize_query(text, strip_possessive=True):
    """Lowercase, strip punctuation and leading articles/possessives."""
    q = text.strip().lower()
    q = re.sub(r"[^\w\s'-]", " ", q)
    q = re.sub(r"\s+", " ", q).strip()
    if strip_possessive:
        words = q.split()
        while words and words[0] in _STOP_PREFIXES:
            words = words[1:]
        q = " ".join(words)
    return q


class MockIntentResolver:
    """Ordered pattern rules standing in for the conversational model.

    Rule order: find-phrases, then configured need-phrases mapping to a
    clarification question, then a generic chat fallback.  Stateless and
    deterministic.
    """

    def __init__(self, need_phrases=None, strip_possessive=True,
                 chat_reply="I can help you find objects. Try: find my coffee cup."):
        self.need_phrases = dict(DEFAULT_NEED_PHRASES if need_phrases is None else need_phrases)
        self.strip_possessive = strip_possessive
        self.chat_reply = chat_reply

    def resolve(self, utterance, history=()):
        for pat in _FIND_PATTERNS:
            m = pat.search(utterance)
            if m:
                rest = m.group(1)
                attributes = ()
                if " with " in rest:
                    rest, attr = rest.split(" with ", 1)
                    attr = normalize_query(attr, self.strip_possessive)
                    if attr:
                        attributes = (attr,)
                query = normalize_query(rest, self.strip_possessive)
                if query:
                    return Intent(IntentKind.FIND_OBJECT, query=query, attributes=attributes)
        lowered = normalize_query(utterance, strip_possessive=False)
        for phrase, question in self.need_phrases.items():
            if normalize_query(phrase, strip_possessive=False) in lowered:
                return Intent(IntentKind.CLARIFY, text=question)
        return Intent(IntentKind.CHAT, text=self.chat_reply)


def resolve_intent(utterance, history=(), resolver=None):
    """Resolve one utterance; raises InvalidUtterance on empty input."""
    if utterance is None or not utterance.strip():
        raise InvalidUtterance("utterance is empty")
    if resolver is None:
        resolver = MockIntentResolver()
    return resolver.resolve(utterance.strip(), history)


_INSTRUCTION = (
    "You are an assistive object-retrieval agent. Reply in exactly this grammar:\n"
    "INTENT: find|clarify|chat\n"
    "QUERY: <object query, find only>\n"
    "TEXT: <question or reply, clarify/chat only>\n"
)


def build_prompt(utterance, history=()):
    lines = [_INSTRUCTION, ""]
    for turn in history:
        lines.append(f"{turn.speaker}: {turn.text}")
    lines.append(f"user: {utterance}")
    return "\n".join(lines)


def parse_reply(reply, strip_possessive=True):
    """Parse the line grammar; anything malformed degrades to Chat(raw)."""
    fields = {}
    for line in reply.splitlines():
        if ":" in line:
            key, _, value = line.partition(":")
            fields.setdefault(key.strip().upper(), value.strip())
    kind = fields.get("INTENT", "").lower()
    if kind == "find":
        query = normalize_query(fields.get("QUERY", ""), strip_possessive)
        if query:
            return Intent(IntentKind.FIND_OBJECT, query=query)
    elif kind == "clarify":
        text = fields.get("TEXT") or fields.get("QUERY") or ""
        if text:
            return Intent(IntentKind.CLARIFY, text=text)
    elif kind == "chat":
        return Intent(IntentKind.CHAT, text=fields.get("TEXT", reply))
    return Intent(IntentKind.CHAT, text=reply)


def remote_resolve(utterance, history, client, strip_possessive=True):
    """Resolve via a remote LLM endpoint.

    Network failures surface as ``clients.ClientError``; malformed reply
    bodies never fail, they degrade to a Chat intent carrying the raw
    reply.
    """
    if utterance is None or not utterance.strip():
        raise InvalidUtterance("utterance is empty")
    reply = client.complete(build_prompt(utterance.strip(), history))
    return parse_reply(reply, strip_possessive)
