import numpy as np
import pytest

from accessqos.engine import EventLog, is_stochastic, run, run_repetitions
from accessqos.metrics import window_throughput
from accessqos.schedulers import Outcome
from helpers import mini_scenario
from oracles import sequence_violations, work_conservation_violations

GROUPS = [("a", 2, 2.5e6, 1_000_000, 1_000_000), ("b", 2, 7.5e6, 1_000_000, 1_000_000)]
UDP = ["a cbr packet=1000 period=0.0005 start=0", "b cbr packet=700 rate=30e6 start=0.3"]
TCP = UDP + ["b[1] tcp mss=1000 start=0.5"]


def test_no_sources_gives_empty_log():
    log = run(mini_scenario(GROUPS, [], horizon=2.0))
    assert len(log) == 0
    assert window_throughput(log, 0, 2).tolist() == [0.0] * 4


def test_single_source_on_idle_link_is_lossless():
    sc = mini_scenario([("a", 1, 1e6, 1500, 1_000_000)],
                       ["a cbr packet=1000 period=0.001 start=0.1"], horizon=1.0)
    a = run(sc).arrays()
    done = a["departure_ns"] >= 0
    assert np.all(a["outcome"][done] == Outcome.ACCEPTED)
    np.testing.assert_array_equal(a["start_ns"][done], a["arrival_ns"][done])
    np.testing.assert_array_equal(a["departure_ns"][done] - a["start_ns"][done], 80_000)


@pytest.mark.parametrize("discipline", ["drr_tbm", "rr_tbf", "csfq_tbm"])
def test_log_invariants(discipline):
    sc = mini_scenario(GROUPS, TCP, discipline=discipline, horizon=3.0)
    log = run(sc, audit=True)
    a = log.arrays()
    sent = a["start_ns"] >= 0
    done = a["departure_ns"] >= 0
    # causality: no packet starts before it arrives or ends before it starts
    assert np.all(a["start_ns"][sent] >= a["arrival_ns"][sent])
    assert np.all(a["departure_ns"][done] > a["start_ns"][done])
    # the link carries one packet at a time
    order = np.argsort(a["start_ns"][done])
    assert np.all(a["start_ns"][done][order][1:] >= a["departure_ns"][done][order][:-1])
    assert sequence_violations(a["subscriber"], a["sequence_no"], a["start_ns"]) == 0
    accepted = np.isin(a["outcome"], [Outcome.ACCEPTED, Outcome.PENDING])
    if discipline != "rr_tbf":
        assert work_conservation_violations(a["arrival_ns"], a["start_ns"], a["size"],
                                            100e6, accepted, 3 * 10**9) == 0
    assert log.audit_violations == 0
    for arrivals, departures, drops, residual in log.conservation():
        assert arrivals == departures + drops + residual


def test_residual_packets_marked_pending():
    sc = mini_scenario(GROUPS, TCP, horizon=1.0)
    a = run(sc).arrays()
    pending = a["outcome"] == Outcome.PENDING
    assert pending.any()
    assert np.all(a["departure_ns"][pending] < 0)


def test_tcp_source_ramps_up():
    sc = mini_scenario([("t", 1, 10e6, 1_000_000, 1_000_000)], ["t tcp mss=1000 start=0"],
                       horizon=3.0)
    log = run(sc)
    assert window_throughput(log, 1.0, 3.0)[0] > 0.9 * 100e6


def test_determinism():
    sc = mini_scenario(GROUPS, TCP, discipline="csfq_tbm", horizon=2.0, seed=4)
    a, b = run(sc).arrays(), run(sc).arrays()
    for key in a:
        assert np.array_equal(a[key], b[key]), key


def test_departures_mode_agrees_with_full():
    sc = mini_scenario(GROUPS, TCP, horizon=2.0)
    full = run(sc)
    compact = run(sc, log_mode="departures")
    for x, y in zip(full.departures(), compact.departures()):
        assert np.array_equal(np.sort(x), np.sort(y))
    with pytest.raises(ValueError):
        compact.arrays()


def test_repetitions_reuse_deterministic_runs():
    sc = mini_scenario(GROUPS, UDP, horizon=1.0)
    assert not is_stochastic(sc)
    out = run_repetitions(sc, repetitions=3, seed=1)
    assert out[0] is out[2]
    st = mini_scenario(GROUPS, UDP, discipline="csfq_tbm", horizon=1.0)
    assert is_stochastic(st)
    res = run_repetitions(st, repetitions=2, seed=1, workers=1)
    assert res[0] is not res[1]


def test_event_log_csv_dump(tmp_path):
    log = run(mini_scenario(GROUPS, UDP, horizon=0.01))
    assert isinstance(log, EventLog)
    path = tmp_path / "packets.csv"
    log.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("subscriber,sequence_no,")
    assert len(lines) == len(log) + 1
