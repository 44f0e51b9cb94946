"""
Mixed UDP and TCP traffic on a shared access link
=================================================

Sixteen subscribers in four groups (token rates 2.5, 5, 7.5, 10 Mb/s).
Groups 1-3 switch on 16 Mb/s CBR streams at 0, 60 and 120 s, group 4 starts
greedy TCP at 180 s. The script prints group throughput every 10 s for each
discipline, then the 40 s window averages next to the fair-rate oracle.

Usage: python experiment1_timeline.py [horizon_s]   (default 240)
"""
import sys

import numpy as np

from accessqos import bin_throughput, bundled_scenario, fair_rate, run

horizon = float(sys.argv[1]) if len(sys.argv) > 1 else 240.0
base = bundled_scenario("experiment1").with_overrides(horizon=horizon)
groups = np.array(base.subscriber_groups())
names = list(dict.fromkeys(groups))

tokens = np.repeat([2.5e6, 5e6, 7.5e6], 4)
oracle = tokens + fair_rate(100e6 - tokens.sum(), 16e6 - tokens, tokens / 1e6).allocations_bps
print("oracle for 140-180 s:", np.round(oracle[::4] / 1e6, 3), "Mb/s per flow\n")

for disc in ("drr_tbm", "rr_tbf", "csfq_tbm"):
    series = bin_throughput(run(base.with_overrides(discipline=disc)), 1.0)
    print(f"{disc}: mean Mb/s per flow in each group")
    print("   t  " + " ".join(f"{n:>7}" for n in names))
    for t in range(0, int(horizon), 10):
        row = [series.rates[groups == n, t:t + 10].mean() / 1e6 for n in names]
        print(f"{t:>4}  " + " ".join(f"{v:7.3f}" for v in row))
    for lo, hi in ((140, 180), (200, 240)):
        if hi <= horizon:
            m = series.window_mean(lo, hi)
            print(f"  [{lo},{hi}):", " ".join(f"{m[groups == n].mean() / 1e6:.3f}" for n in names))
    print()
