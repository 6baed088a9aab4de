"""Millisecond clock abstraction so block timestamps and finality timing are injectable."""

from __future__ import annotations

import time


class WallClock:
    """Real time. Mining work advances nothing; wall time already passed."""

    def now_ms(self) -> int:
        return time.time_ns() // 1_000_000

    def on_work(self, attempts: int) -> None:
        pass

    def advance(self, ms: int) -> None:
        pass


class SimClock:
    """Virtual clock for deterministic runs.

    Starts at a fixed epoch and only moves when told to. Proof-of-work
    mining reports its attempt count through ``on_work``; each attempt
    advances the clock by ``work_tick_ms`` so finality series are fully
    reproducible yet still shaped by the actual search effort.
    """

    def __init__(self, start_ms: int = 1_700_000_000_000, work_tick_ms: int = 1):
        self._now = start_ms
        self.work_tick_ms = work_tick_ms

    def now_ms(self) -> int:
        return self._now

    def advance(self, ms: int) -> None:
        if ms < 0:
            raise ValueError("clock cannot move backwards")
        self._now += ms

    def on_work(self, attempts: int) -> None:
        self._now += attempts * self.work_tick_ms
