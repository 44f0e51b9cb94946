"""Access-link queueing disciplines.

Every discipline exposes the same small surface used by the engine:
``enqueue(pkt, now_ns) -> Outcome``, ``dequeue(now_ns) -> Packet | None``,
``next_wakeup_ns() -> int | None``, ``has_eligible(now_ns)`` and
``backlog_bytes()``.
"""
from enum import IntEnum


class Outcome(IntEnum):
    ACCEPTED = 0
    DROPPED_NONCONFORMANT = 1   # tail drop of a non-conformant arrival
    DROPPED_CONFORMANT = 2      # conformant arrival dropped, nothing to preempt
    SWAPPED = 3                 # conformant arrival dropped with counter swap
    DROPPED_CSFQ = 4            # probabilistic CSFQ drop
    PENDING = 5                 # still queued when the run ended


from .drr_tbm import DrrTbmScheduler, SubscriberState, set_quanta  # noqa: E402
from .rr_tbf import RrTbfScheduler  # noqa: E402
from .csfq_tbm import (CsfqTbmScheduler, FlowRateEstimator, AlphaEstimator,  # noqa: E402
                       amended_alpha, drop_probability)

DISCIPLINES = ("drr_tbm", "rr_tbf", "csfq_tbm")

__all__ = [
    "Outcome", "DrrTbmScheduler", "SubscriberState", "set_quanta",
    "RrTbfScheduler", "CsfqTbmScheduler", "FlowRateEstimator",
    "AlphaEstimator", "amended_alpha", "drop_probability", "DISCIPLINES",
]
