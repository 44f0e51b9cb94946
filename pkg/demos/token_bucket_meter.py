"""
Metering versus shaping
=======================

The same token bucket (2.5 Mb/s, 1 MB) applied to a 16 Mb/s CBR stream.
As a meter it only tags packets; as a shaper (RR+TBF) it holds them back
and drops what does not fit in the queue.
"""
from accessqos import TokenBucket, parse_scenario, run, window_throughput
from accessqos.schedulers import Outcome

tb = TokenBucket(2.5e6, 1_000_000)
period_ns = 500_000                      # 1000 B every 0.5 ms
tags = [tb.meter(1000, k * period_ns) for k in range(240_000)]

# the full bucket passes the head of the stream untouched
first_miss = tags.index(False)
print("first non-conformant packet   :", f"t = {first_miss * period_ns / 1e9:.4f} s")
late = tags[120_000:]
print("conformant share after 60 s  :", f"{sum(late) / len(late):.4f}",
      f"(token rate / offered = {2.5 / 16:.4f})")

# The shaper as a scheduler: one subscriber, nothing else on the link.
scenario = parse_scenario("""
[subscribers]
sub count=1 token_rate=2.5e6 bucket=1e6 queue=1e6
[sources]
sub cbr packet=1000 period=0.0005 start=0
[discipline]
name = rr_tbf
[run]
horizon = 30
""")
log = run(scenario)
a = log.arrays()
dropped = (a["outcome"] == Outcome.DROPPED_NONCONFORMANT)[a["arrival_ns"] > 10 * 10**9]
print("\nshaped throughput 10-30 s    :", f"{window_throughput(log, 10, 30)[0] / 1e6:.3f} Mb/s")
print("drop rate after 10 s         :", f"{dropped.mean():.4f} (13.5/16 = {13.5 / 16:.4f})")
