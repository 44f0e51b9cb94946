"""
Sharing excess bandwidth by weight
==================================

Twelve UDP subscribers share a 100 Mb/s access link. Their token rates
(2.5, 5 and 7.5 Mb/s, four of each) are guaranteed; the remaining 40 Mb/s
is split in proportion to those rates. Each subscriber offers 16 Mb/s.
"""
import numpy as np

from accessqos import fair_rate

capacity = 100e6
tokens = np.repeat([2.5e6, 5e6, 7.5e6], 4)
weights = tokens / 1e6          # a weight is the token rate in Mb/s
offered = np.full(12, 16e6)

# only non-conformant traffic competes for the excess
excess = capacity - tokens.sum()
sol = fair_rate(excess, offered - tokens, weights)
print(f"excess capacity  {excess / 1e6:.1f} Mb/s")
print(f"fair rate alpha  {sol.alpha / 1e6:.4f} Mb/s per unit weight")

total = tokens + sol.allocations_bps
for rate in (2.5e6, 5e6, 7.5e6):
    share = total[tokens == rate][0]
    print(f"token rate {rate / 1e6:>4} Mb/s -> {share / 1e6:.3f} Mb/s")

# When a group's demand is below its fair share it keeps its demand and the
# rest is redistributed among the others.
light = offered.copy()
light[:4] = 3e6
sol = fair_rate(capacity - tokens.sum(), np.maximum(light - tokens, 0), weights)
print("\nwith group 1 offering only 3 Mb/s:")
print(np.round((tokens + sol.allocations_bps)[::4] / 1e6, 3), "Mb/s per flow")
