"""Excess-bandwidth allocation for shared access networks.

Three access-link disciplines (DRR with token bucket meters, round-robin
over token bucket filters, CSFQ with token bucket meters), a packet-level
simulator to drive them, and the weighted fair-rate oracle they are judged
against.
"""
__version__ = "0.1.0"

from .core import LinkConfig, Packet, SubscriberContract, to_ns, to_seconds, transmission_time
from .engine import run, run_repetitions
from .fair_rate import FairRateProblem, FairRateSolution, fair_rate, solve_alpha
from .metrics import bin_throughput, summarize, window_throughput
from .scenario import bundled_scenario, load_scenario, parse_scenario, serialize_scenario
from .schedulers import CsfqTbmScheduler, DrrTbmScheduler, Outcome, RrTbfScheduler
from .token_bucket import TokenBucket
