"""Closed-form receiver drop analysis.

A receiver gets ``received`` messages over a window of ``rt`` seconds while
processing ``pr`` messages per second into a drop-tail queue of ``qsize``
slots. The processed count ``rt * pr`` is always rounded up: a message that
has started processing no longer needs a queue slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Guards ceil() against float noise such as 0.1 * 30 = 3.0000000000000004.
_EPS = 1e-9


class Unsatisfiable(ValueError):
    """No finite receive time avoids drops (zero processing rate)."""


@dataclass(frozen=True)
class QueueAnalysisCase:
    sent_messages: int
    incoming_rate: float
    processing_rate: float
    queue_size: int

    def __post_init__(self):
        if not self.incoming_rate > 0:
            raise ValueError("incoming_rate must be positive")
        if self.processing_rate < 0:
            raise ValueError("processing_rate must be non-negative")
        if self.sent_messages < 0 or self.queue_size < 0:
            raise ValueError("counts must be non-negative")

    @property
    def receive_time(self) -> float:
        return receive_time(self)

    @property
    def will_drop(self) -> bool:
        return will_drop(self.sent_messages, self.receive_time, self.processing_rate, self.queue_size)

    @property
    def min_queue_size(self) -> int:
        return min_queue_size(self.sent_messages, self.receive_time, self.processing_rate)


def processed_count(rt: float, pr: float) -> int:
    """Messages taken into processing during ``rt``, rounded up."""
    x = rt * pr
    return max(0, math.ceil(x - _EPS))


def receive_time(case: QueueAnalysisCase) -> float:
    if not case.incoming_rate > 0:
        raise ValueError("incoming_rate must be positive")
    return case.sent_messages / case.incoming_rate


def will_drop(received: int, rt: float, pr: float, qsize: int) -> bool:
    """True when ``received`` exceeds what processing plus the queue can hold."""
    return received > processed_count(rt, pr) + qsize


def min_queue_size(received: int, rt: float, pr: float) -> int:
    return max(0, received - processed_count(rt, pr))


def safe_receive_time(received: int, qsize: int, pr: float) -> float:
    """Shortest receive window for which the burst fits without drops.

    Raises :class:`Unsatisfiable` when ``pr`` is zero and the queue alone
    cannot hold the burst.
    """
    backlog = received - qsize
    if backlog <= 0:
        return 0.0
    if pr <= 0:
        raise Unsatisfiable(f"{backlog} messages exceed the queue and nothing is ever processed")
    return backlog / pr
