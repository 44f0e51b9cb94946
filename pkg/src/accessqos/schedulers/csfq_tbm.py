"""Core-stateless fair queueing with token bucket meters (CSFQ-TBM).

All packets share one FIFO. Conformant packets are only subject to tail
drop. Non-conformant packets of subscriber ``i`` are dropped with
probability ``max(0, 1 - alpha * w_i / r_i)`` where ``r_i`` is an
exponentially averaged arrival rate and ``alpha`` the estimated normalized
fair rate of the excess bandwidth. Above the buffer threshold ``alpha`` is
scaled by ``threshold / occupancy`` before use.
"""
from collections import deque
import math
import random

from ..core import NS_PER_S
from ..token_bucket import TokenBucket
from . import Outcome


class FlowRateEstimator:
    """Exponential averaging of an arrival rate, ``K`` in seconds."""

    __slots__ = ("rate", "last_arrival", "k_ns")

    def __init__(self, k):
        self.rate = 0.0
        self.last_arrival = None
        self.k_ns = k * NS_PER_S

    @property
    def K(self):
        return self.k_ns / NS_PER_S

    def update(self, size_bytes, now_ns):
        """Fold one arrival of ``size_bytes`` at ``now_ns``; return bits/s."""
        last = self.last_arrival
        self.last_arrival = now_ns
        if last is None:
            return self.rate
        gap = now_ns - last
        if gap <= 0:
            gap = 1
        inst = 8.0 * size_bytes * NS_PER_S / gap
        if self.k_ns <= 0:
            self.rate = inst
            return inst
        e = math.exp(-gap / self.k_ns)
        self.rate = (1.0 - e) * inst + e * self.rate
        return self.rate

    def current(self, now_ns):
        """Estimate decayed over the silence since the last arrival."""
        if self.last_arrival is None or self.k_ns <= 0:
            return self.rate
        gap = now_ns - self.last_arrival
        return self.rate * math.exp(-gap / self.k_ns) if gap > 0 else self.rate


def drop_probability(flow_rate, alpha, weight):
    if flow_rate <= 0:
        return 0.0
    return max(0.0, 1.0 - alpha * weight / flow_rate)


def amended_alpha(alpha, occupancy_bytes, threshold_bytes):
    """Buffer-based amendment: shrink alpha in proportion to excess occupancy."""
    if occupancy_bytes > threshold_bytes > 0:
        return alpha * threshold_bytes / occupancy_bytes
    return alpha


class AlphaEstimator:
    """Estimator of the normalized fair rate over the excess bandwidth.

    While the non-conformant arrival rate exceeds the excess capacity the
    estimate is corrected once per ``k_alpha`` by the ratio of excess capacity
    to accepted rate; otherwise it becomes the largest per-weight flow rate
    seen during the last ``k_alpha``.
    """

    def __init__(self, k_alpha):
        self.alpha = 0.0
        self.k_alpha_ns = int(k_alpha * NS_PER_S)
        self.arrivals = FlowRateEstimator(k_alpha)
        self.accepted = FlowRateEstimator(k_alpha)
        self.conformant = FlowRateEstimator(k_alpha)
        self.congested = False
        self.start_ns = 0
        self.tmp_alpha = 0.0
        self.epoch_max = 0.0

    @property
    def arrival_rate_est(self):
        return self.arrivals.rate

    @property
    def accepted_rate_est(self):
        return self.accepted.rate

    def excess_capacity(self, capacity_bps, now_ns):
        return max(0.0, capacity_bps - self.conformant.current(now_ns))

    def update(self, size_bytes, label, dropped, c_ex, now_ns):
        """Fold one non-conformant arrival; ``label`` is its rate per weight."""
        a = self.arrivals.update(size_bytes, now_ns)
        if not dropped:
            self.accepted.update(size_bytes, now_ns)
        if a >= c_ex:
            if label > self.epoch_max:
                self.epoch_max = label
            if not self.congested:
                self.congested = True
                self.start_ns = now_ns
                if self.alpha <= 0.0:
                    self.alpha = max(self.tmp_alpha, label)
            elif now_ns > self.start_ns + self.k_alpha_ns:
                f = self.accepted.current(now_ns)
                if f > 0.0 and self.alpha > 0.0:
                    self.alpha *= c_ex / f
                else:
                    # nothing accepted yet: restart from the largest demand seen
                    self.alpha = self.epoch_max
                self.start_ns = now_ns
                self.epoch_max = 0.0
        else:
            if self.congested:
                self.congested = False
                self.start_ns = now_ns
                self.tmp_alpha = label
            elif now_ns < self.start_ns + self.k_alpha_ns:
                if label > self.tmp_alpha:
                    self.tmp_alpha = label
            else:
                self.alpha = max(self.tmp_alpha, label)
                self.start_ns = now_ns
                self.tmp_alpha = 0.0
        return self.alpha


class CsfqTbmScheduler:
    name = "csfq_tbm"

    def __init__(self, contracts, capacity_bps, fifo_bytes=16_000_000,
                 threshold_bytes=64_000, k=0.1, k_alpha=0.2, seed=0, now_ns=0, **_):
        self.capacity_bps = capacity_bps
        self.fifo_bytes = fifo_bytes
        self.threshold_bytes = threshold_bytes
        self.meters = [TokenBucket(c.token_rate_bps, c.bucket_bytes, now_ns=now_ns)
                       for c in contracts]
        self.weights = [c.weight for c in contracts]
        self.flows = [FlowRateEstimator(k) for _ in contracts]
        self.alpha_est = AlphaEstimator(k_alpha)
        self.rng = random.Random(seed)
        self.fifo = deque()
        self.occupancy = 0

    @property
    def alpha(self):
        return self.alpha_est.alpha

    def effective_alpha(self):
        return amended_alpha(self.alpha_est.alpha, self.occupancy, self.threshold_bytes)

    def backlog_bytes(self):
        return self.occupancy

    def has_eligible(self, now_ns):
        return bool(self.fifo)

    def next_wakeup_ns(self):
        return None

    def enqueue(self, pkt, now_ns):
        i = pkt.subscriber_id
        size = pkt.size_bytes
        est = self.alpha_est
        if self.meters[i].meter(size, now_ns):
            pkt.conformant = True
            est.conformant.update(size, now_ns)
        else:
            pkt.conformant = False
            w = self.weights[i]
            rate = self.flows[i].update(size, now_ns)
            p = drop_probability(rate, self.effective_alpha(), w)
            dropped = p > 0.0 and self.rng.random() < p
            c_ex = est.excess_capacity(self.capacity_bps, now_ns)
            est.update(size, rate / w, dropped, c_ex, now_ns)
            if dropped:
                return Outcome.DROPPED_CSFQ
        if self.occupancy + size > self.fifo_bytes:
            return (Outcome.DROPPED_CONFORMANT if pkt.conformant
                    else Outcome.DROPPED_NONCONFORMANT)
        self.fifo.append(pkt)
        self.occupancy += size
        return Outcome.ACCEPTED

    def dequeue(self, now_ns=0):
        if not self.fifo:
            return None
        pkt = self.fifo.popleft()
        self.occupancy -= pkt.size_bytes
        return pkt
