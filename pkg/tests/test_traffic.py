import numpy as np
import pytest

from accessqos.traffic import BurstSource, CbrSource, GreedyTcpSource, merge_emissions, offered_bits


def test_cbr_schedule():
    src = CbrSource(1000, 0.0005, start_time=60.0)
    t, s = src.emissions(0, 60_002_000_000)
    assert t.tolist() == [60_000_000_000, 60_000_500_000, 60_001_000_000, 60_001_500_000]
    assert set(s.tolist()) == {1000}
    assert src.rate_bps == 16e6
    assert src.next_emission(60_000_000_001) == (60_000_500_000, 1000)


def test_cbr_stop_and_windows_tile():
    src = CbrSource(500, 0.001, start_time=0.0, stop_time=0.01)
    whole, _ = src.emissions(0, 10**9)
    parts = np.concatenate([src.emissions(a, a + 3_000_000)[0] for a in range(0, 12_000_000, 3_000_000)])
    assert whole.size == 10
    assert np.array_equal(whole, parts)
    assert src.next_emission(10_000_000) is None


def test_burst_of_ten_megabytes():
    src = BurstSource(10_000_000, 1000, start_time=2.0)
    t, s = src.emissions(0, 10 * 10**9)
    assert t.size == 10_000
    assert s.sum() == 10_000_000
    assert t[0] == 2 * 10**9 and t[1] - t[0] == 800
    assert offered_bits(src, 0, 10**11) == 80_000_000


def test_burst_last_packet_may_be_short():
    src = BurstSource(2500, 1000, start_time=0.0)
    assert src.emissions(0, 10**9)[1].tolist() == [1000, 1000, 500]


def test_tcp_slow_start_and_loss():
    tcp = GreedyTcpSource()
    assert tcp.cwnd == 1 and tcp.state == "slow-start"
    assert tcp.can_send()
    tcp.on_send()
    assert not tcp.can_send()
    tcp.tcp_on_ack()
    assert tcp.cwnd == 2
    tcp.cwnd = 64
    for _ in range(64):
        tcp.on_send()
    assert tcp.tcp_on_loss(5)
    assert tcp.cwnd == 32 and tcp.ssthresh == 32
    assert tcp.state == "congestion-avoidance"
    # further losses from the same window do not cut again
    assert not tcp.tcp_on_loss(6)
    assert tcp.cwnd == 32


def test_tcp_congestion_avoidance_growth():
    tcp = GreedyTcpSource(initial_ssthresh=10)
    tcp.cwnd = 10.0
    for _ in range(10):
        tcp.tcp_on_ack()
    assert tcp.cwnd == pytest.approx(11.0, abs=0.05)


def test_tcp_timeout_restarts_window():
    tcp = GreedyTcpSource()
    tcp.cwnd = 20
    assert tcp.tcp_on_timeout() == 1
    assert tcp.ssthresh == 10


def test_merge_breaks_ties_by_source_order():
    a = CbrSource(100, 0.001)
    b = CbrSource(200, 0.002)
    t, subs, sizes = merge_emissions([(5, a), (2, b)], 0, 4_000_000)
    assert t.tolist() == [0, 0, 1_000_000, 2_000_000, 2_000_000, 3_000_000]
    assert subs.tolist() == [5, 2, 5, 5, 2, 5]
    assert sizes.tolist() == [100, 200, 100, 100, 200, 100]
    empty = merge_emissions([], 0, 10)
    assert all(x.size == 0 for x in empty)
