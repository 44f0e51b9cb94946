import json

from accessqos.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main, parse_vector

MINI = """[topology]
access_rate = 100e6
[subscribers]
g count=2 token_rate=5e6 bucket=1e6 queue=1e6
[sources]
g cbr packet=1000 rate=70e6 start=0
[discipline]
name = csfq_tbm
[run]
horizon = 2
repetitions = 2
bin_width = 0.5
"""


def test_vector_syntax():
    assert parse_vector("2.5x2,5") == [2.5, 2.5, 5.0]


def test_oracle_example(capsys):
    code = main(["oracle", "40e6", "--w", "2.5x4,5x4,7.5x4", "--d", "13.5e6x4,11e6x4,8.5e6x4"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "alpha = 666666.667" in out


def test_oracle_zero_demands_and_single_flow(capsys):
    assert main(["oracle", "10e6", "--w", "1x3", "--d", "0x3"]) == EXIT_OK
    assert capsys.readouterr().out.count(" 0\n") == 3
    assert main(["oracle", "10e6", "--w", "2", "--d", "4e6"]) == EXIT_OK
    assert "4e+06" in capsys.readouterr().out.splitlines()[-1]


def test_oracle_bad_input(capsys):
    assert main(["oracle", "10e6", "--w", "1,1", "--d", "1e6"]) == EXIT_INVALID
    assert "error" in capsys.readouterr().err
    assert main(["oracle", "10e6", "--w", "abc", "--d", "1"]) == EXIT_INVALID
    assert main(["nonsense"]) == EXIT_INVALID


def test_run_writes_deterministic_outputs(tmp_path):
    scen = tmp_path / "mini.scenario"
    scen.write_text(MINI)
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        assert main(["run", str(scen), "--out-dir", str(d), "--summary-window", "0.5:2"]) == EXIT_OK
        outs.append(d)
    for name in ("series.csv", "summary_0p5_2.csv", "manifest.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["discipline"] == "csfq_tbm"
    assert len(manifest["scenario_sha256"]) == 64


def test_run_uses_env_out_dir(tmp_path, monkeypatch):
    scen = tmp_path / "mini.scenario"
    scen.write_text(MINI)
    monkeypatch.setenv("ACCESSQOS_OUT", str(tmp_path / "envout"))
    assert main(["run", str(scen), "--repetitions", "1", "--horizon", "0.5"]) == EXIT_OK
    assert (tmp_path / "envout" / "series.csv").exists()


def test_report_reads_run_output(tmp_path, capsys):
    scen = tmp_path / "mini.scenario"
    scen.write_text(MINI.replace("csfq_tbm", "drr_tbm"))
    out = tmp_path / "o"
    assert main(["run", str(scen), "--out-dir", str(out)]) == EXIT_OK
    capsys.readouterr()
    assert main(["report", str(out), "--window", "1:2", "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    text = capsys.readouterr().out
    assert "group g" in text
    assert (tmp_path / "s.csv").read_text().startswith("flow,mean_bps,ci95_bps")


def test_run_errors(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text("[subscribers]\n[run]\n")
    assert main(["run", str(bad), "--out-dir", str(tmp_path)]) == EXIT_INVALID
    assert "horizon" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.scenario")]) == EXIT_RUNTIME
    scen = tmp_path / "mini.scenario"
    scen.write_text(MINI)
    assert main(["run", str(scen), "--out-dir", str(tmp_path), "--summary-window", "1:9"]) == EXIT_INVALID
