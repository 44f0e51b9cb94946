"""
Counter swapping in DRR-TBM
===========================

One physical FIFO per subscriber, split into conformant (CC) and
non-conformant (NC) byte budgets. A conformant packet that finds the queue
full is discarded, but its size moves from NC to CC, so the next bytes to
leave are treated as conformant. Packet order never changes.
"""
from accessqos import DrrTbmScheduler, SubscriberContract, TokenBucket
from accessqos.core import Packet


def show(step, s):
    st = s.states[0]
    print(f"{step:<34} queue={len(st.queue)} pkts  CC={st.cc:>5}  NC={st.nc:>5}"
          f"  lists: C={list(s.conformant_list)} N={list(s.nonconformant_list)}")


contract = SubscriberContract(10e6, 1500, 3000)
s = DrrTbmScheduler([contract])
# start with an empty bucket so the first arrivals are non-conformant
s.states[0].meter = TokenBucket(10e6, 1500, tokens_bytes=0)

s.enqueue(Packet(0, 1000, 0, 0), 0)
s.enqueue(Packet(0, 1000, 0, 1), 0)
s.enqueue(Packet(0, 1000, 0, 2), 0)
show("three non-conformant arrivals", s)

# 0.8 ms later the bucket holds 1000 B: this arrival is conformant
out = s.enqueue(Packet(0, 1000, 800_000, 3), 800_000)
show(f"conformant arrival -> {out.name}", s)

for _ in range(3):
    p = s.dequeue(800_000)
    show(f"sent seq {p.sequence_no}", s)

# Three backlogged subscribers with quanta 1:2:3 share the link in that ratio.
s = DrrTbmScheduler([contract] * 3, quanta=[1000, 2000, 3000])
for st in s.states:
    st.meter = TokenBucket(1, 1500, tokens_bytes=0)
    st.capacity = 10**9
seq = [0, 0, 0]
for i in range(3):
    for _ in range(50):
        s.enqueue(Packet(i, 1000, 0, seq[i]), 0)
        seq[i] += 1
sent = [0, 0, 0]
for _ in range(60):
    sent[s.dequeue(0).subscriber_id] += 1
print("\npackets sent in 60 services with quanta 1:2:3 ->", sent)
