"""Injectable clocks: wall time for deployment, simulated time for tests and replays."""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float: ...

    def advance(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.time()

    def advance(self, seconds: float) -> None:
        time.sleep(seconds)


class SimulatedClock:
    """Manually advanced clock; `advance` costs no wall time."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot advance backwards")
        self._now += seconds

    def advance_to(self, instant: float) -> None:
        if instant > self._now:
            self._now = float(instant)
