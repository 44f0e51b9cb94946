"""Per-subscriber token bucket filters served round-robin.

A subscriber's head packet is released once its shaper holds enough tokens.
Released subscribers wait in ``ready`` (served in turn); the others sit in a
heap keyed by release time so the engine can schedule a wake-up.
"""
from collections import deque
import heapq

from ..token_bucket import TokenBucket
from . import Outcome


class ShapedQueue:
    __slots__ = ("queue", "bytes", "capacity", "shaper", "head_release_ns")

    def __init__(self, capacity, shaper):
        self.queue = deque()
        self.bytes = 0
        self.capacity = capacity
        self.shaper = shaper
        self.head_release_ns = None


class RrTbfScheduler:
    name = "rr_tbf"

    def __init__(self, contracts, now_ns=0, **_):
        self.queues = [
            ShapedQueue(c.queue_bytes,
                        TokenBucket(c.token_rate_bps, c.bucket_bytes, now_ns=now_ns))
            for c in contracts
        ]
        self.ready = deque()
        self.pending = []

    def backlog_bytes(self):
        return sum(q.bytes for q in self.queues)

    def _schedule_head(self, i, q, now_ns):
        release = q.shaper.next_conformance_ns(q.queue[0].size_bytes, now_ns)
        q.head_release_ns = release
        if release <= now_ns:
            self.ready.append(i)
        else:
            heapq.heappush(self.pending, (release, i))

    def enqueue(self, pkt, now_ns):
        i = pkt.subscriber_id
        q = self.queues[i]
        size = pkt.size_bytes
        if q.bytes + size > q.capacity:
            return Outcome.DROPPED_NONCONFORMANT
        q.queue.append(pkt)
        q.bytes += size
        if len(q.queue) == 1:
            self._schedule_head(i, q, now_ns)
        return Outcome.ACCEPTED

    def _release(self, now_ns):
        pending = self.pending
        while pending and pending[0][0] <= now_ns:
            self.ready.append(heapq.heappop(pending)[1])

    def dequeue(self, now_ns):
        self._release(now_ns)
        if not self.ready:
            return None
        i = self.ready.popleft()
        q = self.queues[i]
        pkt = q.queue.popleft()
        q.bytes -= pkt.size_bytes
        if not q.shaper.meter(pkt.size_bytes, now_ns):
            raise AssertionError("released packet failed its shaper")
        pkt.conformant = True
        if q.queue:
            self._schedule_head(i, q, now_ns)
        else:
            q.head_release_ns = None
        return pkt

    def next_wakeup_ns(self):
        return self.pending[0][0] if self.pending else None

    def has_eligible(self, now_ns):
        return bool(self.ready) or bool(self.pending and self.pending[0][0] <= now_ns)
