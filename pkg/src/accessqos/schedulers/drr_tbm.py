"""Deficit round-robin with token bucket meters (DRR-TBM).

Each subscriber owns one physical FIFO. Two byte counters split that FIFO
into logical conformant (``cc``) and non-conformant (``nc``) budgets, so
conformant bytes get priority without ever reordering packets:

* arrivals are metered; an overflowing conformant arrival is discarded but
  moves its size from ``nc`` to ``cc`` (counter swap), which has the same
  effect as preempting a queued non-conformant packet;
* service first visits ``conformant_list`` round-robin, charging ``cc``;
* only when no conformant budget covers a head packet does DRR run over
  ``nonconformant_list``, charging the deficit counter and ``nc``.
"""
from collections import deque
from fractions import Fraction
import math

from ..core import DEFAULT_MAX_PACKET
from ..token_bucket import TokenBucket
from . import Outcome


def set_quanta(weights, max_packet=DEFAULT_MAX_PACKET):
    """Quanta proportional to weights, the smallest equal to ``max_packet``."""
    weights = [getattr(w, "weight", w) for w in weights]
    if not weights:
        return []
    if any(not w > 0 for w in weights):
        raise ValueError("all weights must be positive")
    exact = [Fraction(w).limit_denominator(10**9) for w in weights]
    wmin = min(exact)
    return [math.ceil(w / wmin * max_packet) for w in exact]


class SubscriberState:
    __slots__ = ("queue", "bytes", "capacity", "cc", "nc", "dc", "quantum", "meter")

    def __init__(self, capacity, quantum, meter):
        self.queue = deque()
        self.bytes = 0
        self.capacity = capacity
        self.cc = 0
        self.nc = 0
        self.dc = 0
        self.quantum = quantum
        self.meter = meter


class DrrTbmScheduler:
    name = "drr_tbm"

    def __init__(self, contracts, max_packet=DEFAULT_MAX_PACKET, quanta=None, now_ns=0):
        if quanta is None:
            quanta = set_quanta(contracts, max_packet)
        if len(quanta) != len(contracts):
            raise ValueError("one quantum per subscriber is required")
        self.max_packet = max_packet
        self.states = [
            SubscriberState(c.queue_bytes, q,
                            TokenBucket(c.token_rate_bps, c.bucket_bytes, now_ns=now_ns))
            for c, q in zip(contracts, quanta)
        ]
        n = len(self.states)
        self.conformant_list = deque()
        self.nonconformant_list = deque()
        self.in_cl = [False] * n
        self.in_ncl = [False] * n
        # the head of nonconformant_list keeps its leftover deficit
        self.continued = False

    @property
    def quanta(self):
        return [s.quantum for s in self.states]

    def backlog_bytes(self):
        return sum(s.bytes for s in self.states)

    def has_eligible(self, now_ns):
        return any(s.queue for s in self.states)

    def next_wakeup_ns(self):
        return None

    def enqueue(self, pkt, now_ns):
        i = pkt.subscriber_id
        s = self.states[i]
        size = pkt.size_bytes
        conformant = s.meter.meter(size, now_ns)
        pkt.conformant = conformant
        if s.bytes + size > s.capacity:
            if conformant and s.nc >= size:
                s.cc += size
                s.nc -= size
                self._relist(i, s)
                return Outcome.SWAPPED
            return Outcome.DROPPED_CONFORMANT if conformant else Outcome.DROPPED_NONCONFORMANT
        s.queue.append(pkt)
        s.bytes += size
        if conformant:
            s.cc += size
            if not self.in_cl[i]:
                self.conformant_list.append(i)
                self.in_cl[i] = True
        else:
            s.nc += size
            if not self.in_ncl[i]:
                self.nonconformant_list.append(i)
                self.in_ncl[i] = True
                s.dc = 0
        return Outcome.ACCEPTED

    def _relist(self, i, s):
        # keep every backlogged subscriber reachable from at least one list
        if not s.queue:
            return
        size = s.queue[0].size_bytes
        if s.cc >= size and not self.in_cl[i]:
            self.conformant_list.append(i)
            self.in_cl[i] = True
        if (s.nc >= size or s.cc < size) and not self.in_ncl[i]:
            self.nonconformant_list.append(i)
            self.in_ncl[i] = True
            s.dc = 0

    def dequeue(self, now_ns=0):
        states = self.states
        cl = self.conformant_list
        while cl:
            i = cl.popleft()
            self.in_cl[i] = False
            s = states[i]
            if not s.queue:
                continue
            size = s.queue[0].size_bytes
            if s.cc >= size:
                s.cc -= size
                pkt = s.queue.popleft()
                s.bytes -= size
                if s.queue and s.cc >= s.queue[0].size_bytes:
                    cl.append(i)
                    self.in_cl[i] = True
                self._relist(i, s)
                return pkt

        ncl = self.nonconformant_list
        while ncl:
            i = ncl.popleft()
            self.in_ncl[i] = False
            s = states[i]
            if not self.continued:
                s.dc += s.quantum
            self.continued = False
            if not s.queue:
                s.dc = 0
                continue
            size = s.queue[0].size_bytes
            # a head the conformant budget cannot cover falls to this phase
            if not (s.nc >= size or s.cc < size):
                s.dc = 0
                continue
            if s.dc < size:
                ncl.append(i)
                self.in_ncl[i] = True
                continue
            s.dc -= size
            if s.nc >= size:
                s.nc -= size
            else:
                s.cc -= size - s.nc
                s.nc = 0
            pkt = s.queue.popleft()
            s.bytes -= size
            if s.queue:
                size = s.queue[0].size_bytes
                if s.nc >= size or s.cc < size:
                    if s.dc >= size:
                        self.continued = True
                        ncl.appendleft(i)
                    else:
                        ncl.append(i)
                    self.in_ncl[i] = True
                    self._relist(i, s)
                    return pkt
            s.dc = 0
            self._relist(i, s)
            return pkt
        return None

    def check_counters(self):
        """Return a list of counter-invariant violations (empty when consistent)."""
        bad = []
        for i, s in enumerate(self.states):
            queued = sum(p.size_bytes for p in s.queue)
            if queued != s.bytes or s.cc + s.nc != queued or s.cc < 0 or s.nc < 0:
                bad.append((i, s.cc, s.nc, queued))
            if s.dc > s.quantum + self.max_packet:
                bad.append((i, "dc", s.dc))
        return bad
