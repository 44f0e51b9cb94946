"""Builders shared by scheduler tests."""
import random

from accessqos.core import Packet, SubscriberContract
from accessqos.schedulers import DrrTbmScheduler, Outcome
from accessqos.token_bucket import TokenBucket


def contract(rate=10e6, bucket=1_000_000, queue=1_000_000):
    return SubscriberContract(rate, bucket, queue)


def starve_meters(sched):
    """Empty every meter so all later arrivals are non-conformant."""
    for s in sched.states:
        s.meter = TokenBucket(1, 1500, tokens_bytes=0)


class Feeder:
    """Numbers packets per subscriber and tracks queued bytes independently."""

    def __init__(self, sched, n):
        self.sched = sched
        self.seq = [0] * n
        self.shadow = [0] * n
        self.count = 0

    def offer(self, sub, size, t):
        pkt = Packet(sub, size, t, self.seq[sub])
        self.seq[sub] += 1
        out = self.sched.enqueue(pkt, t)
        if out == Outcome.ACCEPTED:
            self.shadow[sub] += size
        return out

    def take(self, t):
        pkt = self.sched.dequeue(t)
        if pkt is not None:
            self.shadow[pkt.subscriber_id] -= pkt.size_bytes
            self.count += 1
        return pkt


def adversarial_drr_run(packets, seed, n=6):
    """Drive DRR-TBM with overloads and mixed conformance.

    Returns a dict with the delivered packet count, the number of counter
    swaps and the violations of sequence order, counter consistency and
    work conservation. Counters are checked after every operation for the touched subscriber
    and in full every 500 operations.
    """
    rng = random.Random(seed)
    contracts = [contract(rate=rng.choice([1e6, 5e6, 20e6, 80e6]),
                          bucket=rng.choice([1500, 4000, 20000]),
                          queue=rng.choice([1500, 3000, 6000, 15000]))
                 for _ in range(n)]
    sched = DrrTbmScheduler(contracts)
    feed = Feeder(sched, n)
    last = [-1] * n
    seq_bad = counter_bad = idle_bad = swaps = 0
    t = 0
    ops = 0

    def check(i):
        s = sched.states[i]
        return s.cc < 0 or s.nc < 0 or s.cc + s.nc != feed.shadow[i] or s.bytes != feed.shadow[i]

    while feed.count < packets:
        t += rng.randint(0, 20_000)
        # bursts of arrivals outpace service and force overflows and swaps
        for _ in range(rng.choice([0, 1, 1, 2, 5, 12])):
            i = rng.randrange(n)
            out = feed.offer(i, rng.choice([64, 500, 1000, 1500, rng.randint(40, 1500)]), t)
            swaps += out == Outcome.SWAPPED
            counter_bad += check(i)
        for _ in range(rng.choice([1, 1, 2, 3])):
            pkt = feed.take(t)
            if pkt is None:
                idle_bad += any(feed.shadow)
                break
            i = pkt.subscriber_id
            if pkt.sequence_no <= last[i]:
                seq_bad += 1
            last[i] = pkt.sequence_no
            counter_bad += check(i)
        ops += 1
        if ops % 500 == 0:
            counter_bad += len(sched.check_counters())
    counter_bad += len(sched.check_counters())
    return {"delivered": feed.count, "swaps": swaps, "sequence": seq_bad,
            "counters": counter_bad, "idle": idle_bad}


def mini_scenario(groups, sources, discipline="drr_tbm", horizon=5.0, access_rate=100e6,
                  seed=1, extra_discipline="", bin_width=1.0):
    """Scenario text from ``(name, count, rate, bucket, queue)`` groups and source lines."""
    from accessqos.scenario import parse_scenario

    lines = ["[topology]", f"access_rate = {access_rate!r}", "[subscribers]"]
    for name, count, rate, bucket, queue in groups:
        lines.append(f"{name} count={count} token_rate={rate!r} bucket={bucket} queue={queue}")
    lines.append("[sources]")
    lines.extend(sources)
    lines += ["[discipline]", f"name = {discipline}", extra_discipline,
              "[run]", f"horizon = {horizon!r}", f"seed = {seed}", f"bin_width = {bin_width!r}"]
    return parse_scenario("\n".join(lines), "mini")
