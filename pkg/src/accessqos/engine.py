"""Deterministic discrete-event simulation of one shared access link.

Packets flow source -> (backbone, one-way delay) -> access switch discipline
-> access link -> UNI serializer -> subscriber. TCP acknowledgements and loss
notifications return to the sender over a fixed delay of half the RTT.

Events at the same nanosecond are handled in a fixed order: link completion,
open-loop arrivals (in source declaration order), then heap events in
insertion order, then shaper wake-ups.
"""
from array import array
from dataclasses import dataclass
import heapq
import random

import numpy as np

from .core import NS_PER_S, Packet, to_ns, transmission_ns, transmission_time
from .schedulers import (CsfqTbmScheduler, DrrTbmScheduler, Outcome,
                         RrTbfScheduler)
from .scenario import ScenarioError, validate_scenario
from .traffic import BurstSource, CbrSource, GreedyTcpSource, merge_emissions

__all__ = ["EventLog", "Event", "Simulation", "run", "run_repetitions", "is_stochastic", "transmission_time",
           "build_scheduler"]

INF = 1 << 62
CHUNK_NS = NS_PER_S

# heap event kinds
TCP_ARRIVAL, TCP_ACK, TCP_LOSS, TCP_START = range(4)


@dataclass(frozen=True)
class Event:
    """Heap entry view; the engine stores these as plain tuples."""
    time_ns: int
    priority: int
    kind: int
    payload: tuple


class EventLog:
    """Per-packet records of one run.

    In ``full`` mode every arrival gets a row (subscriber, size, arrival,
    conformance, transmission start, departure, outcome). In ``departures``
    mode only delivered packets are kept, plus per-subscriber arrival and
    drop counts; this is enough for throughput metrics on very long runs.
    """

    def __init__(self, n_subscribers, mode="full"):
        if mode not in ("full", "departures"):
            raise ValueError(f"unknown log mode {mode!r}")
        self.mode = mode
        self.n_subscribers = n_subscribers
        self.horizon_ns = 0
        self.discipline = None
        self.seed = None
        self.subscriber = array("l")
        self.size = array("l")
        self.arrival_ns = array("q")
        self.conformant = array("b")
        self.start_ns = array("q")
        self.departure_ns = array("q")
        self.outcome = array("b")
        self.sequence_no = array("q")
        self.dep_subscriber = array("l")
        self.dep_size = array("l")
        self.dep_ns = array("q")
        self.arrivals_per_sub = [0] * n_subscribers
        self.drops_per_sub = [[0] * len(Outcome) for _ in range(n_subscribers)]
        self.audit_violations = 0
        self._np = None

    def __len__(self):
        return len(self.subscriber) if self.mode == "full" else len(self.dep_ns)

    @property
    def horizon(self):
        return self.horizon_ns / NS_PER_S

    def arrays(self):
        """Numpy views of the full-mode columns (cached)."""
        if self.mode != "full":
            raise ValueError("per-packet arrays require a full-mode log")
        if self._np is None:
            self._np = {
                "subscriber": np.frombuffer(self.subscriber, dtype=np.int64) if len(self.subscriber) else np.empty(0, np.int64),
                "size": np.frombuffer(self.size, dtype=np.int64) if len(self.size) else np.empty(0, np.int64),
                "arrival_ns": np.frombuffer(self.arrival_ns, dtype=np.int64) if len(self.arrival_ns) else np.empty(0, np.int64),
                "conformant": np.frombuffer(self.conformant, dtype=np.int8).astype(bool) if len(self.conformant) else np.empty(0, bool),
                "start_ns": np.frombuffer(self.start_ns, dtype=np.int64) if len(self.start_ns) else np.empty(0, np.int64),
                "departure_ns": np.frombuffer(self.departure_ns, dtype=np.int64) if len(self.departure_ns) else np.empty(0, np.int64),
                "outcome": np.frombuffer(self.outcome, dtype=np.int8) if len(self.outcome) else np.empty(0, np.int8),
                "sequence_no": np.frombuffer(self.sequence_no, dtype=np.int64) if len(self.sequence_no) else np.empty(0, np.int64),
            }
        return self._np

    def departures(self):
        """``(subscriber, size, departure_ns)`` of every delivered packet."""
        if self.mode == "full":
            a = self.arrays()
            done = a["departure_ns"] >= 0
            return a["subscriber"][done], a["size"][done], a["departure_ns"][done]
        as_np = lambda col, dt: np.frombuffer(col, dtype=dt) if len(col) else np.empty(0, dt)
        return (as_np(self.dep_subscriber, np.int64), as_np(self.dep_size, np.int64),
                as_np(self.dep_ns, np.int64))

    def conservation(self):
        """Per subscriber: (arrivals, departures, drops, residual)."""
        subs, _, _ = self.departures()
        dep = np.bincount(subs, minlength=self.n_subscribers)
        out = []
        for i in range(self.n_subscribers):
            drops = sum(self.drops_per_sub[i][o] for o in
                        (Outcome.DROPPED_NONCONFORMANT, Outcome.DROPPED_CONFORMANT,
                         Outcome.SWAPPED, Outcome.DROPPED_CSFQ))
            residual = self.drops_per_sub[i][Outcome.PENDING]
            out.append((self.arrivals_per_sub[i], int(dep[i]), drops, residual))
        return out

    def to_csv(self, path):
        """Raw per-packet dump (full mode only)."""
        a = self.arrays()
        with open(path, "w") as fh:
            fh.write("subscriber,sequence_no,size_bytes,arrival_ns,conformant,"
                     "start_ns,departure_ns,outcome\n")
            for row in zip(a["subscriber"].tolist(), a["sequence_no"].tolist(),
                           a["size"].tolist(), a["arrival_ns"].tolist(),
                           a["conformant"].astype(int).tolist(), a["start_ns"].tolist(),
                           a["departure_ns"].tolist(), a["outcome"].tolist()):
                fh.write(",".join(map(str, row)) + "\n")


def build_scheduler(scenario, seed=0, now_ns=0):
    contracts = scenario.contracts()
    d = scenario.discipline
    t = scenario.topology
    if d.name == "drr_tbm":
        return DrrTbmScheduler(contracts, max_packet=t.max_packet, now_ns=now_ns)
    if d.name == "rr_tbf":
        return RrTbfScheduler(contracts, now_ns=now_ns)
    if d.name == "csfq_tbm":
        return CsfqTbmScheduler(contracts, t.access_rate_bps, fifo_bytes=d.fifo_bytes,
                                threshold_bytes=d.threshold_bytes, k=d.k,
                                k_alpha=d.k_alpha, seed=seed, now_ns=now_ns)
    raise ValueError(f"unknown discipline {d.name!r}")


class Simulation:
    def __init__(self, scenario, seed=None, log_mode="full", audit=False):
        errors = validate_scenario(scenario)
        if errors:
            raise ScenarioError(errors)
        self.scenario = scenario
        self.seed = scenario.run.seed if seed is None else seed
        rng = random.Random(self.seed)
        topo = scenario.topology
        self.n = sum(g.count for g in scenario.groups)
        self.horizon_ns = to_ns(scenario.run.horizon)
        self.scheduler = build_scheduler(scenario, seed=rng.getrandbits(63))
        self.log = EventLog(self.n, log_mode)
        self.log.discipline = scenario.discipline.name
        self.log.seed = self.seed
        self.log.horizon_ns = self.horizon_ns
        self.audit = audit

        self.half_rtt_ns = to_ns(topo.rtt_s / 2)
        self.access_delay_ns = to_ns(topo.access_delay_s)
        self.forward_ns = self.half_rtt_ns - self.access_delay_ns
        self.access_rate = topo.access_rate_bps
        self.uni_rate = topo.uni_rate_bps
        self.backbone_rate = topo.backbone_rate_bps

        jitter = scenario.run.jitter
        self.open_loop = []
        self.tcp = {}
        for sub, b in scenario.bindings():
            p = b.params
            offset = rng.uniform(0.0, jitter) if jitter > 0 else 0.0
            if b.kind == "cbr":
                period = p["period"] if "period" in p else p["packet"] * 8 / p["rate"]
                src = CbrSource(p["packet"], period, p.get("start", 0.0) + offset, p.get("stop"))
                self.open_loop.append((sub, src))
            elif b.kind == "burst":
                src = BurstSource(p["bytes"], p["packet"], p["start"] + offset,
                                  p.get("injection_rate", topo.backbone_rate_bps))
                self.open_loop.append((sub, src))
            else:
                self.tcp[sub] = GreedyTcpSource(p.get("mss", 1000), topo.rtt_s,
                                                p.get("start", 0.0) + offset)

    def run(self):
        log = self.log
        full = log.mode == "full"
        n = self.n
        horizon = self.horizon_ns
        sched = self.scheduler
        enqueue = sched.enqueue
        dequeue = sched.dequeue
        heap = []
        push = heapq.heappush
        pop = heapq.heappop
        counter = 0

        tcp = self.tcp
        tcp_free = {}
        for sub, src in sorted(tcp.items()):
            tcp_free[sub] = 0
            counter += 1
            push(heap, (to_ns(src.start_time), counter, TCP_START, sub, 0, 0))

        access_rate, uni_rate, bb_rate = self.access_rate, self.uni_rate, self.backbone_rate
        tx_cache, uni_cache, bb_cache = {}, {}, {}

        def tx_ns(size, cache, rate):
            v = cache.get(size)
            if v is None:
                v = cache[size] = transmission_ns(size, rate)
            return v

        half_rtt = self.half_rtt_ns
        fwd = self.forward_ns
        acc_delay = self.access_delay_ns
        uni_free = [0] * n
        seq = [0] * n
        arrivals_per_sub = log.arrivals_per_sub
        drops_per_sub = log.drops_per_sub

        L_sub, L_size, L_arr = log.subscriber.append, log.size.append, log.arrival_ns.append
        L_conf, L_start, L_dep = log.conformant.append, log.start_ns.append, log.departure_ns.append
        L_out, L_seq = log.outcome.append, log.sequence_no.append
        col_start, col_dep, col_conf = log.start_ns, log.departure_ns, log.conformant
        D_sub, D_size, D_ns = log.dep_subscriber.append, log.dep_size.append, log.dep_ns.append
        n_logged = 0

        s_times, s_subs, s_sizes = [], [], []
        ptr = 0
        chunk_end = 0
        link_until = INF
        current = None
        wake = INF
        audit = self.audit
        accepted = Outcome.ACCEPTED

        def tcp_send(sub, t):
            nonlocal counter
            src = tcp[sub]
            free = tcp_free[sub]
            size = src.mss_bytes
            gap = tx_ns(size, bb_cache, bb_rate)
            while src.can_send():
                s = src.on_send()
                e = (t if t > free else free) + gap
                free = e
                counter += 1
                push(heap, (e + fwd, counter, TCP_ARRIVAL, sub, size, s))
            tcp_free[sub] = free

        while True:
            if ptr < len(s_times):
                t_arr = s_times[ptr]
            else:
                while ptr >= len(s_times) and chunk_end < horizon:
                    hi = min(chunk_end + CHUNK_NS, horizon)
                    tt, ss, zz = merge_emissions(self.open_loop, chunk_end, hi)
                    s_times, s_subs, s_sizes = tt.tolist(), ss.tolist(), zz.tolist()
                    ptr = 0
                    chunk_end = hi
                t_arr = s_times[ptr] if ptr < len(s_times) else INF
            t_heap = heap[0][0] if heap else INF
            t = link_until
            if t_arr < t:
                t = t_arr
            if t_heap < t:
                t = t_heap
            if wake < t:
                t = wake
            if t >= horizon:
                break

            if t == link_until:
                pkt = current
                sub = pkt.subscriber_id
                size = pkt.size_bytes
                if full:
                    col_dep[pkt.index] = t
                    col_conf[pkt.index] = pkt.conformant
                else:
                    D_sub(sub)
                    D_size(size)
                    D_ns(t)
                if pkt.tcp_seq >= 0:
                    u = uni_free[sub]
                    reach = t + acc_delay
                    delivered = (reach if reach > u else u) + tx_ns(size, uni_cache, uni_rate)
                    uni_free[sub] = delivered
                    counter += 1
                    push(heap, (delivered + half_rtt, counter, TCP_ACK, sub, size, pkt.tcp_seq))
                current = None
                link_until = INF
            elif t == t_arr:
                sub = s_subs[ptr]
                size = s_sizes[ptr]
                ptr += 1
                pkt = Packet(sub, size, t, seq[sub], False, n_logged)
                seq[sub] += 1
                arrivals_per_sub[sub] += 1
                outcome = enqueue(pkt, t)
                if full:
                    n_logged += 1
                    L_sub(sub); L_size(size); L_arr(t); L_conf(pkt.conformant)
                    L_start(-1); L_dep(-1); L_out(outcome); L_seq(pkt.sequence_no)
                if outcome != accepted:
                    drops_per_sub[sub][outcome] += 1
            elif t == t_heap:
                _, _, kind, sub, size, tseq = pop(heap)
                if kind == TCP_ARRIVAL:
                    pkt = Packet(sub, size, t, seq[sub], False, n_logged, tseq)
                    seq[sub] += 1
                    arrivals_per_sub[sub] += 1
                    outcome = enqueue(pkt, t)
                    if full:
                        n_logged += 1
                        L_sub(sub); L_size(size); L_arr(t); L_conf(pkt.conformant)
                        L_start(-1); L_dep(-1); L_out(outcome); L_seq(pkt.sequence_no)
                    if outcome != accepted:
                        drops_per_sub[sub][outcome] += 1
                        counter += 1
                        push(heap, (t + half_rtt, counter, TCP_LOSS, sub, size, tseq))
                elif kind == TCP_ACK:
                    tcp[sub].tcp_on_ack(size)
                    tcp_send(sub, t)
                elif kind == TCP_LOSS:
                    tcp[sub].tcp_on_loss(tseq)
                    tcp_send(sub, t)
                else:
                    tcp_send(sub, t)
            else:
                wake = INF

            if current is None:
                pkt = dequeue(t)
                if pkt is not None:
                    current = pkt
                    link_until = t + tx_ns(pkt.size_bytes, tx_cache, access_rate)
                    if full:
                        col_start[pkt.index] = t
                    wake = INF
                else:
                    if audit and sched.has_eligible(t):
                        log.audit_violations += 1
                    w = sched.next_wakeup_ns()
                    wake = INF if w is None else w

        # anything still queued or on the wire is residual
        if full:
            a = log.arrays()
            pending = (a["outcome"] == accepted) & (a["departure_ns"] < 0)
            a["outcome"][pending] = Outcome.PENDING
            for sub, cnt in enumerate(np.bincount(a["subscriber"][pending], minlength=n).tolist()):
                drops_per_sub[sub][Outcome.PENDING] = cnt
        else:
            dep = np.bincount(np.frombuffer(log.dep_subscriber, dtype=np.int64)
                              if len(log.dep_subscriber) else np.empty(0, np.int64),
                              minlength=n)
            for sub in range(n):
                dropped = sum(drops_per_sub[sub])
                drops_per_sub[sub][Outcome.PENDING] = arrivals_per_sub[sub] - dropped - int(dep[sub])
        self.tcp_sources = tcp
        return log


def run(scenario, seed=None, log_mode="full", audit=False):
    """Simulate ``scenario`` once and return its :class:`EventLog`."""
    return Simulation(scenario, seed=seed, log_mode=log_mode, audit=audit).run()


def _series_reducer(log, bin_width):
    from .metrics import bin_throughput
    return bin_throughput(log, bin_width)


def _run_one(args):
    scenario, seed, log_mode, reduce, reduce_args, audit = args
    log = run(scenario, seed=seed, log_mode=log_mode, audit=audit)
    return reduce(log, *reduce_args)


def is_stochastic(scenario):
    """True when repetitions can differ (random drops or start jitter)."""
    return scenario.discipline.name == "csfq_tbm" or scenario.run.jitter > 0


def run_repetitions(scenario, repetitions=None, seed=None, reduce=None, reduce_args=None,
                    log_mode="full", workers=None, audit=False):
    """Run independent repetitions and reduce each event log.

    Repetition ``r`` uses seed ``seed + r``. Results are ordered by repetition
    index whatever the worker count. When nothing in the scenario is random,
    every repetition is identical and the first result is reused.
    """
    import os
    from concurrent.futures import ProcessPoolExecutor

    repetitions = scenario.run.repetitions if repetitions is None else repetitions
    seed = scenario.run.seed if seed is None else seed
    if reduce is None:
        reduce, reduce_args = _series_reducer, (scenario.run.bin_width,)
    reduce_args = tuple(reduce_args or ())
    seeds = [seed + r for r in range(repetitions)]
    if not is_stochastic(scenario):
        first = _run_one((scenario, seeds[0], log_mode, reduce, reduce_args, audit))
        return [first] * repetitions
    jobs = [(scenario, s, log_mode, reduce, reduce_args, audit) for s in seeds]
    workers = min(repetitions, workers or os.cpu_count() or 1)
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))
