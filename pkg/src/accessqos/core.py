"""Shared domain types, unit helpers and the simulation clock.

Simulated time is an integer count of nanoseconds everywhere inside the
library. Public helpers convert to and from seconds at the edges.
"""
from dataclasses import dataclass
import math

NS_PER_S = 1_000_000_000
DEFAULT_MAX_PACKET = 1500
# weights are token rates expressed in Mb/s
WEIGHT_UNIT_BPS = 1_000_000


def to_ns(seconds):
    """Convert seconds to integer nanoseconds (nearest)."""
    return int(round(seconds * NS_PER_S))


def to_seconds(ns):
    return ns / NS_PER_S


def transmission_time(size_bytes, rate_bps):
    """Serialization time in seconds of ``size_bytes`` at ``rate_bps``."""
    if rate_bps <= 0:
        raise ValueError("rate must be positive")
    return 8.0 * size_bytes / rate_bps


def transmission_ns(size_bytes, rate_bps):
    """Serialization time in whole nanoseconds, rounded up."""
    if rate_bps <= 0:
        raise ValueError("rate must be positive")
    num = 8 * size_bytes * NS_PER_S
    rate = int(rate_bps)
    if rate == rate_bps:
        return -(-num // rate)
    return math.ceil(num / rate_bps)


class Packet:
    """One packet travelling from a source to a subscriber."""

    __slots__ = ("subscriber_id", "size_bytes", "arrival_ns", "conformant",
                 "sequence_no", "index", "tcp_seq")

    def __init__(self, subscriber_id, size_bytes, arrival_ns, sequence_no=0,
                 conformant=False, index=-1, tcp_seq=-1):
        self.subscriber_id = subscriber_id
        self.size_bytes = size_bytes
        self.arrival_ns = arrival_ns
        self.sequence_no = sequence_no
        self.conformant = conformant
        self.index = index
        self.tcp_seq = tcp_seq

    @property
    def arrival_time(self):
        return self.arrival_ns / NS_PER_S

    def __repr__(self):
        tag = "C" if self.conformant else "N"
        return (f"Packet(sub={self.subscriber_id}, seq={self.sequence_no}, "
                f"{self.size_bytes}B, t={self.arrival_time:.9f}s, {tag})")


@dataclass(frozen=True)
class LinkConfig:
    capacity_bps: float
    propagation_delay_s: float = 0.0

    def __post_init__(self):
        if self.capacity_bps <= 0:
            raise ValueError("link capacity must be positive")
        if self.propagation_delay_s < 0:
            raise ValueError("propagation delay must be non-negative")


@dataclass(frozen=True)
class SubscriberContract:
    """Service contract of one subscriber: token bucket plus buffer."""

    token_rate_bps: float
    bucket_bytes: int
    queue_bytes: int

    @property
    def weight(self):
        return self.token_rate_bps / WEIGHT_UNIT_BPS

    def validate(self, max_packet=DEFAULT_MAX_PACKET):
        errors = []
        if self.token_rate_bps <= 0:
            errors.append("token rate must be positive")
        if self.bucket_bytes < max_packet:
            errors.append(f"bucket ({self.bucket_bytes} B) smaller than max packet ({max_packet} B)")
        if self.queue_bytes < max_packet:
            errors.append(f"queue ({self.queue_bytes} B) smaller than max packet ({max_packet} B)")
        return errors


class Clock:
    """Monotone simulation clock in integer nanoseconds."""

    def __init__(self):
        self.ns = 0

    def now(self):
        return self.ns / NS_PER_S

    def advance_to(self, ns):
        if ns < self.ns:
            raise ValueError(f"time would go backwards: {ns} < {self.ns}")
        self.ns = ns
