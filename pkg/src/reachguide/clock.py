"""Virtual clock and fixed-cadence detection tick scheduling."""

import math
import time


class VirtualClock:
    """Deterministic monotonic time advancing in fixed steps.

    Time is derived from an integer step count so identical runs produce
    bit-identical timestamps.
    """

    def __init__(self, step_s=0.05):
        if step_s <= 0:
            raise ValueError("step_s must be positive")
        self.step_s = step_s
        self.steps = 0

    def now(self):
        return self.steps * self.step_s

    def advance(self, n=1):
        self.steps += n
        return self.now()


class WallClock:
    def now(self):
        return time.monotonic()


def scan_ticks(horizon_s, interval_s):
    """Detection tick times on a virtual clock: exact multiples of the interval.

    Count is floor(horizon / interval); a horizon shorter than one
    interval yields no ticks.
    """
    if interval_s <= 0:
        raise ValueError("interval_s must be positive")
    n = math.floor(horizon_s / interval_s)
    return [k * interval_s for k in range(1, n + 1)]


class TickScheduler:
    """Emits at most one due tick per poll; missed ticks are dropped.

    The drop (never burst) policy keeps a stalled detector from flooding
    the event queue when the clock jumps.
    """

    def __init__(self, interval_s=1.0):
        if interval_s <= 0:
            raise ValueError("interval_s must be positive")
        self.interval_s = interval_s
        self._next_k = 1

    def poll(self, now_s):
        """Return the due tick time, or None if no tick is due."""
        due = self._next_k * self.interval_s
        if now_s + 1e-12 < due:
            return None
        # Drop any intermediate ticks; schedule strictly after `now`.
        k = math.floor((now_s + 1e-12) / self.interval_s)
        self._next_k = k + 1
        return k * self.interval_s
