"""
A conformant burst meets a busy link
====================================

Subscriber 0 has a 10 MB token bucket and receives one 10 MB burst at
t = 10 s; three neighbours push 50 Mb/s each. DRR-TBM sends the burst at
once; CSFQ-TBM must first drain the FIFO it shares with everyone.
"""
import numpy as np

from accessqos import bin_throughput, bundled_scenario, run

base = bundled_scenario("burst")
for disc in ("drr_tbm", "csfq_tbm", "rr_tbf"):
    log = run(base.with_overrides(discipline=disc))
    a = log.arrays()
    mine = a["subscriber"] == 0
    arrive = a["arrival_ns"][mine].min()
    start = a["start_ns"][mine][a["start_ns"][mine] >= 0].min()
    end = a["departure_ns"][mine].max()
    print(f"{disc}: burst waits {(start - arrive) / 1e6:8.3f} ms, "
          f"last byte out at {end / 1e9:.3f} s")
    rates = bin_throughput(log, 0.1).rates / 1e6
    print("   t     burst  neighbours (100 ms bins, Mb/s)")
    for k in range(95, min(rates.shape[1], 125), 3):
        print(f"{k / 10:5.1f}  {rates[0, k]:7.2f}  " + " ".join(f"{v:6.2f}" for v in rates[1:, k]))
    print()
