"""Detector / LLM client abstractions.

Deterministic mock clients drive the simulator; generic HTTP adapters
cover live endpoints.  Every call - success or failure - appends exactly
one latency-log entry.
"""

import csv
import math
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field

import numpy as np

from .perception import Detection2D


class ClientError(RuntimeError):
    """Client call failed after retries; ``kind`` is one of
    timeout/connection/http/protocol."""

    def __init__(self, kind, message=""):
        super().__init__(message or kind)
        self.kind = kind


class EmptyLog(ValueError):
    """Latency statistics requested on an empty log."""


@dataclass(frozen=True)
class ClientConfig:
    endpoint: str = ""
    timeout_s: float = 5.0
    max_retries: int = 2
    auth_env_var: str = ""
    retry_backoff_s: float = 0.2

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


@dataclass
class LatencyLog:
    entries: list = field(default_factory=list)  # (call_id, start_s, duration_s, outcome)

    def append(self, call_id, start_s, duration_s, outcome):
        if duration_s < 0:
            raise ValueError("duration must be >= 0")
        self.entries.append((call_id, start_s, duration_s, outcome))

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["call_id", "start_s", "duration_s", "outcome"])
            writer.writerows(self.entries)

    @staticmethod
    def read_csv(path):
        log = LatencyLog()
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            for row in reader:
                log.append(row["call_id"], float(row["start_s"]),
                           float(row["duration_s"]), row["outcome"])
        return log


def nearest_rank(sorted_values, q):
    """Nearest-rank percentile: 1-based index ceil(q * n)."""
    n = len(sorted_values)
    idx = max(1, math.ceil(q * n))
    return sorted_values[idx - 1]


def latency_report(log: LatencyLog):
    """(mean_s, p50_s, p99_s, count, error_rate) over the whole log.

    Percentiles are nearest-rank (not interpolated) so small-sample
    values are exact order statistics.
    """
    if not log.entries:
        raise EmptyLog("latency log is empty")
    durations = sorted(e[2] for e in log.entries)
    n = len(durations)
    mean = sum(durations) / n
    errors = sum(1 for e in log.entries if e[3] != "ok")
    return mean, nearest_rank(durations, 0.50), nearest_rank(durations, 0.99), n, errors / n


def _bearer_headers(config: ClientConfig):
    headers = {"Content-Type": "application/octet-stream"}
    if config.auth_env_var:
        token = os.environ.get(config.auth_env_var, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
    return headers


class _HttpCaller:
    """Shared POST-with-retries plumbing; one latency entry per call."""

    def __init__(self, config: ClientConfig, log=None, sleep=time.sleep):
        self.config = config
        self.log = log if log is not None else LatencyLog()
        self._sleep = sleep
        self._calls = 0

    def post(self, body: bytes):
        self._calls += 1
        call_id = f"call-{self._calls}"
        start = time.monotonic()
        last_err = None
        for attempt in range(1 + self.config.max_retries):
            if attempt:
                self._sleep(self.config.retry_backoff_s)
            try:
                req = urllib.request.Request(self.config.endpoint, data=body,
                                             headers=_bearer_headers(self.config))
                with urllib.request.urlopen(req, timeout=self.config.timeout_s) as resp:
                    payload = resp.read()
                self.log.append(call_id, start, time.monotonic() - start, "ok")
                return payload
            except urllib.error.HTTPError as err:
                last_err = ClientError("http", f"status {err.code}")
            except TimeoutError:
                last_err = ClientError("timeout", "request timed out")
            except urllib.error.URLError as err:
                if isinstance(err.reason, TimeoutError) or "timed out" in str(err.reason):
                    last_err = ClientError("timeout", str(err.reason))
                else:
                    last_err = ClientError("connection", str(err.reason))
            except OSError as err:
                last_err = ClientError("connection", str(err))
        outcome = "timeout" if last_err.kind == "timeout" else "error"
        self.log.append(call_id, start, time.monotonic() - start, outcome)
        raise last_err


class HttpDetectorClient:
    """POSTs frame bytes + newline + query; expects five whitespace-
    separated numbers (box corners and confidence) or an empty body for
    no detection."""

    def __init__(self, config: ClientConfig, log=None, sleep=time.sleep):
        self._caller = _HttpCaller(config, log, sleep)

    @property
    def log(self):
        return self._caller.log

    def detect(self, snapshot, query):
        frame_bytes = snapshot if isinstance(snapshot, (bytes, bytearray)) else bytes(snapshot or b"")
        payload = self._caller.post(bytes(frame_bytes) + b"\n" + query.encode())
        text = payload.decode(errors="replace").strip()
        if not text or text.lower() == "none":
            return None
        parts = text.split()
        if len(parts) != 5:
            raise ClientError("protocol", f"expected 5 fields, got {len(parts)}")
        try:
            u0, v0, u1, v1, conf = (float(p) for p in parts)
        except ValueError:
            raise ClientError("protocol", f"non-numeric reply: {text!r}")
        return Detection2D(bbox=(u0, v0, u1, v1), label=query, confidence=conf)


class HttpLLMClient:
    """POSTs a plain-text prompt; reply body is plain text."""

    def __init__(self, config: ClientConfig, log=None, sleep=time.sleep):
        self._caller = _HttpCaller(config, log, sleep)

    @property
    def log(self):
        return self._caller.log

    def complete(self, prompt: str) -> str:
        return self._caller.post(prompt.encode()).decode(errors="replace")


@dataclass(frozen=True)
class MockNoise:
    miss_prob: float = 0.0
    false_positive_prob: float = 0.0
    latency_mean_s: float = 0.0
    latency_sd_s: float = 0.0


class MockDetectorClient:
    """Delegates to the simulator's geometric oracle with configurable
    miss / false-positive noise; fully deterministic under a seed."""

    def __init__(self, oracle, noise: MockNoise = MockNoise(), seed=0, now=None):
        self._oracle = oracle       # (snapshot, query, rng) -> Detection2D | None
        self.noise = noise
        self.rng = np.random.default_rng(seed)
        self._now = now if now is not None else time.monotonic
        self._calls = 0
        self.log = LatencyLog()

    def detect(self, snapshot, query):
        self._calls += 1
        start = self._now()
        duration = 0.0
        if self.noise.latency_mean_s > 0:
            duration = max(0.0, float(self.rng.normal(self.noise.latency_mean_s,
                                                      self.noise.latency_sd_s)))
        detection = self._oracle(snapshot, query, self.rng)
        if detection is not None and self.rng.random() < self.noise.miss_prob:
            detection = None
        if detection is None and self.rng.random() < self.noise.false_positive_prob:
            detection = self._oracle(snapshot, query, self.rng, force_wrong=True)
        self.log.append(f"call-{self._calls}", start, duration, "ok")
        return detection


def vlm_detect(snapshot, query, client):
    """Single detection request through any detector client."""
    if not query:
        raise ValueError("query must be non-empty")
    return client.detect(snapshot, query)
