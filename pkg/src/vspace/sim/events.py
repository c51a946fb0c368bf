"""In-process message layer: FIFO per sender, seed-driven interleaving across senders."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Iterator


@dataclass(frozen=True)
class Event:
    sender: str
    kind: str
    body: Any = None


class EventBus:
    def __init__(self, rng: random.Random) -> None:
        self._rng = rng
        self._queues: dict[str, deque[Event]] = {}
        self.delivered = 0

    def send(self, sender: str, kind: str, body: Any = None) -> None:
        self._queues.setdefault(sender, deque()).append(Event(sender, kind, body))

    def __len__(self) -> int:
        return sum(len(q) for q in self._queues.values())

    def drain(self) -> Iterator[Event]:
        """Deliver everything queued; the next sender is drawn uniformly among non-empty queues."""
        while True:
            ready = [s for s, q in self._queues.items() if q]
            if not ready:
                return
            sender = ready[self._rng.randrange(len(ready))]
            self.delivered += 1
            yield self._queues[sender].popleft()
