"""Deterministic discrete-event core: event queue, clock, seeded random stream.

Every moving part of the simulator runs through this module.  Two runs with
the same inputs must dispatch the exact same event sequence, so ordering is
fully specified: events fire in ascending (fire_time, seq) order, where seq
is the global scheduling counter.
"""

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable


class PastTimeError(ValueError):
    """Raised when an event is scheduled before the current clock."""


@dataclass(frozen=True, order=True)
class Event:
    fire_time: float
    seq: int
    target: str = field(compare=False)
    payload: Any = field(compare=False)


class EventQueue:
    """Min-heap of events keyed by (fire_time, seq).

    seq starts at 1 and increases by 1 per schedule() call, so ties on
    fire_time always resolve in scheduling order and the dispatch sequence
    is reproducible byte for byte.
    """

    def __init__(self):
        self._heap = []
        self._next_seq = 1
        self.clock = 0.0

    def __len__(self):
        return len(self._heap)

    def schedule(self, fire_time: float, target: str, payload: Any = None) -> Event:
        if fire_time < self.clock:
            raise PastTimeError(
                f"cannot schedule at {fire_time} before clock {self.clock}")
        ev = Event(fire_time, self._next_seq, target, payload)
        self._next_seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.clock = ev.fire_time
        return ev

    def run_until(self, t_end: float, dispatch: Callable[[Event], None]) -> int:
        """Dispatch every event with fire_time <= t_end, in order.

        Returns the number of events processed.  The clock ends at t_end
        even when the queue drains early.
        """
        processed = 0
        while self._heap and self._heap[0].fire_time <= t_end:
            dispatch(self.pop())
            processed += 1
        self.clock = t_end
        return processed


MASK64 = (1 << 64) - 1


class RngStream:
    """Seeded splitmix64 stream producing floats in [0, 1).

    The generator is spelled out so any implementation can reproduce it
    draw for draw:

        state = (state + 0x9E3779B97F4A7C15) mod 2^64
        z = state
        z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
        z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
        z = z XOR (z >> 31)
        draw = (z >> 11) / 2^53

    Each draw() advances the state exactly once; draw_count tracks how many
    values have been produced.
    """

    def __init__(self, seed: int):
        self._state = seed & MASK64
        self.seed = seed & MASK64
        self.draw_count = 0

    def _next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def draw(self) -> float:
        self.draw_count += 1
        return (self._next_u64() >> 11) / float(1 << 53)
