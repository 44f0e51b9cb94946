"""Traffic sources: constant bit rate, one-shot burst and a greedy AIMD TCP.

Open-loop sources (CBR, burst) have fully determined schedules and can
produce their emissions for a whole time window at once as numpy arrays;
the engine merges them into one arrival stream. The TCP source is
closed-loop and is driven by acknowledgement and loss callbacks.
"""
from dataclasses import dataclass
import math

import numpy as np

from .core import NS_PER_S, to_ns, transmission_ns


@dataclass
class CbrSource:
    packet_bytes: int
    period: float
    start_time: float = 0.0
    stop_time: float = None

    def __post_init__(self):
        if self.packet_bytes <= 0 or self.period <= 0:
            raise ValueError("CBR source needs a positive packet size and period")
        self.start_ns = to_ns(self.start_time)
        self.period_ns = to_ns(self.period)
        self.stop_ns = None if self.stop_time is None else to_ns(self.stop_time)

    @property
    def rate_bps(self):
        return self.packet_bytes * 8 / self.period

    def next_emission(self, t_ns):
        """First emission at or after ``t_ns`` as ``(time_ns, size)``, or None."""
        k = max(0, -(-(t_ns - self.start_ns) // self.period_ns))
        t = self.start_ns + k * self.period_ns
        if self.stop_ns is not None and t >= self.stop_ns:
            return None
        return t, self.packet_bytes

    def emissions(self, t0_ns, t1_ns):
        """Emission times and sizes in ``[t0_ns, t1_ns)``."""
        if self.stop_ns is not None:
            t1_ns = min(t1_ns, self.stop_ns)
        k0 = max(0, -(-(t0_ns - self.start_ns) // self.period_ns))
        k1 = max(0, -(-(t1_ns - self.start_ns) // self.period_ns))
        times = self.start_ns + self.period_ns * np.arange(k0, k1, dtype=np.int64)
        return times, np.full(times.shape, self.packet_bytes, dtype=np.int64)


@dataclass
class BurstSource:
    burst_bytes: int
    packet_bytes: int
    start_time: float
    injection_rate_bps: float = 10e9

    def __post_init__(self):
        if self.burst_bytes <= 0 or self.packet_bytes <= 0:
            raise ValueError("burst source needs positive sizes")
        self.start_ns = to_ns(self.start_time)
        self.count = -(-self.burst_bytes // self.packet_bytes)
        self.gap_ns = transmission_ns(self.packet_bytes, self.injection_rate_bps)
        last = self.burst_bytes - (self.count - 1) * self.packet_bytes
        self._sizes = np.full(self.count, self.packet_bytes, dtype=np.int64)
        self._sizes[-1] = last
        self._times = self.start_ns + self.gap_ns * np.arange(self.count, dtype=np.int64)

    def next_emission(self, t_ns):
        k = int(np.searchsorted(self._times, t_ns, side="left"))
        if k >= self.count:
            return None
        return int(self._times[k]), int(self._sizes[k])

    def emissions(self, t0_ns, t1_ns):
        lo, hi = np.searchsorted(self._times, [t0_ns, t1_ns], side="left")
        return self._times[lo:hi], self._sizes[lo:hi]


@dataclass
class TcpSpec:
    """Configuration of a greedy TCP source (instantiated per run)."""
    mss_bytes: int = 1000
    start_time: float = 0.0
    rtt: float = None


class GreedyTcpSource:
    """Reno-style AIMD window for an always-backlogged sender.

    The window is counted in segments. Slow start adds one segment per
    acknowledged segment, congestion avoidance adds ``1/cwnd``; a loss halves
    the window at most once per window of data (NewReno-style recovery
    point), a timeout restarts from one segment.
    """

    def __init__(self, mss_bytes=1000, rtt_s=0.010, start_time=0.0,
                 initial_ssthresh=float("inf")):
        self.mss_bytes = mss_bytes
        self.rtt_s = rtt_s
        self.start_time = start_time
        self.cwnd = 1.0
        self.ssthresh = initial_ssthresh
        self.in_flight = 0
        self.next_seq = 0
        self.recover = -1
        self.losses = 0

    @property
    def state(self):
        return "slow-start" if self.cwnd < self.ssthresh else "congestion-avoidance"

    def can_send(self):
        return self.in_flight < int(self.cwnd)

    def on_send(self):
        seq = self.next_seq
        self.next_seq += 1
        self.in_flight += 1
        return seq

    def tcp_on_ack(self, acked_bytes=None):
        segs = 1.0 if acked_bytes is None else acked_bytes / self.mss_bytes
        self.in_flight = max(0, self.in_flight - math.ceil(segs))
        if self.cwnd < self.ssthresh:
            self.cwnd += segs
        else:
            self.cwnd += segs / self.cwnd
        return self.cwnd

    def tcp_on_loss(self, seq=None):
        """Loss of segment ``seq``; returns True if the window was cut."""
        if self.in_flight > 0 and seq is not None:
            self.in_flight -= 1
        if seq is not None and seq <= self.recover:
            return False
        self.ssthresh = max(self.cwnd / 2.0, 1.0)
        self.cwnd = self.ssthresh
        self.recover = self.next_seq - 1
        self.losses += 1
        return True

    def tcp_on_timeout(self):
        self.ssthresh = max(self.cwnd / 2.0, 1.0)
        self.cwnd = 1.0
        self.in_flight = 0
        self.recover = self.next_seq - 1
        return self.cwnd


def merge_emissions(sources, t0_ns, t1_ns):
    """Merge open-loop sources into one ``(times, subscriber, sizes)`` stream.

    ``sources`` is a sequence of ``(subscriber_id, source)``; ties in time are
    broken by position in that sequence.
    """
    times, subs, sizes, order = [], [], [], []
    for pos, (sub, src) in enumerate(sources):
        t, s = src.emissions(t0_ns, t1_ns)
        if t.size:
            times.append(t)
            sizes.append(s)
            subs.append(np.full(t.shape, sub, dtype=np.int64))
            order.append(np.full(t.shape, pos, dtype=np.int64))
    if not times:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    times = np.concatenate(times)
    idx = np.lexsort((np.concatenate(order), times))
    return times[idx], np.concatenate(subs)[idx], np.concatenate(sizes)[idx]


def offered_bits(source, t0_ns, t1_ns):
    _, sizes = source.emissions(t0_ns, t1_ns)
    return 8 * int(sizes.sum())


__all__ = ["CbrSource", "BurstSource", "TcpSpec", "GreedyTcpSource",
           "merge_emissions", "offered_bits", "NS_PER_S"]
