"""Network-layer queues: per-class FIFOs under a strict-priority scheduler.

Counter convention: `queued` counts every enqueue attempt (accepted or
dropped), so at any instant

    queued == dequeued + dropped + len(queue)

holds for both queue types.
"""

from dataclasses import dataclass
from enum import Enum

PRIORITY_CLASSES = 3
DEFAULT_CAPACITY = 50


@dataclass(frozen=True)
class Packet:
    packet_id: int
    src: str
    dst: str
    priority_class: int
    size: int

    def __post_init__(self):
        if not 0 <= self.priority_class < PRIORITY_CLASSES:
            raise ValueError("priority_class out of range")
        if self.size <= 0:
            raise ValueError("size must be positive")


class EnqueueResult(Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


class FifoQueue:
    """Bounded FIFO with tail drop and lifetime counters."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items = []
        self.queued = 0
        self.dequeued = 0
        self.dropped = 0
        self.peak_size = 0

    def __len__(self):
        return len(self._items)

    def enqueue(self, packet: Packet) -> EnqueueResult:
        self.queued += 1
        if len(self._items) >= self.capacity:
            self.dropped += 1
            return EnqueueResult.DROPPED
        self._items.append(packet)
        if len(self._items) > self.peak_size:
            self.peak_size = len(self._items)
        return EnqueueResult.ACCEPTED

    def dequeue(self):
        if not self._items:
            return None
        self.dequeued += 1
        return self._items.pop(0)


class StrictPriorityQueue:
    """One FifoQueue per priority class; class 0 always drains first."""

    def __init__(self, capacity_per_class: int = DEFAULT_CAPACITY):
        self.classes = [FifoQueue(capacity_per_class)
                        for _ in range(PRIORITY_CLASSES)]

    def __len__(self):
        return sum(len(q) for q in self.classes)

    def enqueue(self, packet: Packet) -> EnqueueResult:
        return self.classes[packet.priority_class].enqueue(packet)

    def dequeue(self):
        for q in self.classes:
            if len(q):
                return q.dequeue()
        return None

    @property
    def queued(self):
        return sum(q.queued for q in self.classes)

    @property
    def dequeued(self):
        return sum(q.dequeued for q in self.classes)

    @property
    def dropped(self):
        return sum(q.dropped for q in self.classes)

    @property
    def peak_size(self):
        return max(q.peak_size for q in self.classes)
