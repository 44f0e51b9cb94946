import pytest

from accessqos.scenario import (ScenarioError, bundled_scenario, parse_scenario,
                                serialize_scenario)


@pytest.mark.parametrize("name", ["experiment1", "burst", "scalability"])
def test_round_trip(name):
    sc = bundled_scenario(name)
    again = parse_scenario(serialize_scenario(sc), name)
    assert again == sc
    assert serialize_scenario(again) == serialize_scenario(sc)


def test_experiment1_layout():
    sc = bundled_scenario("experiment1")
    assert len(sc.contracts()) == 16
    assert [g.name for g in sc.groups] == ["group1", "group2", "group3", "group4"]
    assert sorted({b.params["start"] for _, b in sc.bindings()}) == [0, 60, 120, 180]
    assert [c.weight for c in sc.contracts()[::4]] == [2.5, 5, 7.5, 10]
    assert sc.topology.access_rate_bps == 100e6


def test_burst_layout():
    sc = bundled_scenario("burst")
    contracts = sc.contracts()
    assert len(contracts) == 4
    assert {c.token_rate_bps for c in contracts} == {10e6}
    assert {c.bucket_bytes for c in contracts} == {10_000_000}
    kinds = [(sub, b.kind) for sub, b in sc.bindings()]
    assert kinds.count((0, "burst")) == 1
    cbr = [b for _, b in sc.bindings() if b.kind == "cbr"]
    assert len(cbr) == 3 and all(b.params["rate"] == 50e6 for b in cbr)
    assert [b.params["bytes"] for _, b in sc.bindings() if b.kind == "burst"] == [10_000_000]


def test_scalability_layout():
    sc = bundled_scenario("scalability")
    assert len(sc.contracts()) == 160
    assert sc.topology.access_rate_bps == 1e9


def test_empty_file_lists_required_parts():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario("")
    text = "\n".join(exc.value.errors)
    assert "[subscribers]" in text and "[run]" in text


def test_all_errors_reported_with_lines():
    bad = """[topology]
access_rate = -5
colour = blue
[subscribers]
g count=2 token_rate=0 bucket=1e6 queue=1e6
[sources]
h cbr packet=1000 period=0.001
g cbr packet=1000
g[5] tcp
[run]
horizon = 0
"""
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(bad)
    errs = exc.value.errors
    joined = "\n".join(errs)
    assert "line 3: unknown key 'colour'" in joined
    assert "access_rate_bps must be positive" in joined
    assert "line 5: group 'g': token_rate must be positive" in joined
    assert "line 7: source bound to undeclared subscriber group 'h'" in joined
    assert "line 8: cbr source needs exactly one of" in joined
    assert "line 9: g[5]: index out of range" in joined
    assert "horizon must be positive" in joined
    assert len(errs) >= 7


def test_overrides():
    sc = bundled_scenario("experiment1").with_overrides(discipline="csfq_tbm", horizon=10.0)
    assert sc.discipline.name == "csfq_tbm" and sc.run.horizon == 10.0
    assert sc.digest() != bundled_scenario("experiment1").digest()
