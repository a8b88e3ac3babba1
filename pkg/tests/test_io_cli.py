import json
import math

import pytest

from cavitycat import acceptance, cli
from cavitycat.errors import ConfigError
from cavitycat.io import ScenarioConfig, parse_complex, parse_grid, parse_pi_list, parse_pi_multiple


@pytest.mark.parametrize("text,value", [("3.7pi", 3.7), ("pi", 1), ("3.7*pi", 3.7), ("1.9", 1.9), ("-0.5 pi", -0.5), ("2e-1pi", 0.2)])
def test_parse_pi(text, value):
    assert parse_pi_multiple(text) == pytest.approx(value * math.pi, rel=1e-15)


@pytest.mark.parametrize("text", ["", "abc", "3.7pie", "pi pi"])
def test_parse_pi_rejects(text):
    with pytest.raises(ConfigError):
        parse_pi_multiple(text)


def test_parse_lists_and_numbers():
    assert parse_pi_list("3.7pi,1.9pi") == [3.7 * math.pi, 1.9 * math.pi]
    assert parse_complex("2+1i") == 2 + 1j
    assert parse_grid("6,0.05").re_min == -6
    with pytest.raises(ConfigError):
        parse_grid("1,2,3")
    with pytest.raises(ConfigError):
        parse_complex("two")


def test_config_from_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"alpha": 4, "gts": ["3.7pi", "1.9pi"], "grid": "6,0.1"}))
    cfg = ScenarioConfig.load(path)
    assert cfg.alpha == 4 and cfg.gts[1] == pytest.approx(1.9 * math.pi)
    assert cfg.grid.step == 0.1


def test_config_errors_are_located(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "alpha": 4,\n "gts": [1,]\n}')
    with pytest.raises(ConfigError, match="line 3"):
        ScenarioConfig.load(path)
    with pytest.raises(ConfigError, match="gts"):
        ScenarioConfig.from_mapping({"alpha": 4})


def test_cli_prepare_and_render(tmp_path, capsys):
    state = tmp_path / "state.json"
    assert cli.main(["prepare", "--alpha", "4", "--gts", "3.7pi,1.9pi", "--out", str(state)]) == 0
    doc = json.loads(state.read_text())
    assert doc["n_max"] == 58
    assert doc["metadata"]["gts_pi"] == pytest.approx([3.7, 1.9])
    assert 0 < doc["metadata"]["joint_prob"] < 1

    q = tmp_path / "q.csv"
    assert cli.main(["qfunc", "--state", str(state), "--grid", "2,0.5", "--out", str(q)]) == 0
    lines = q.read_text().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == 1 + 81

    w1, w4 = tmp_path / "w1.csv", tmp_path / "w4.csv"
    for path, t in ((w1, "1"), (w4, "4")):
        assert cli.main(["wigner", "--state", str(state), "--grid", "3,0.25", "--threads", t, "--out", str(path)]) == 0
    assert w1.read_bytes() == w4.read_bytes()

    js = tmp_path / "w.json"
    assert cli.main(["wigner", "--alpha", "4", "--gts", "3.7,1.9", "--approx", "--grid", "3,0.5", "--json", str(js), "--out", str(tmp_path / "a.csv")]) == 0
    assert set(json.loads(js.read_text())) == {"re_range", "im_range", "step", "values"}


def test_cli_scan_report(tmp_path):
    report = tmp_path / "peaks.txt"
    out = tmp_path / "scan.csv"
    code = cli.main(["scan", "--alpha", "4", "--gts", "3.7pi,1.9pi", "--nphi", "360", "--out", str(out), "--report", str(report)])
    assert code == 0
    assert out.read_text().startswith("phi,pg\n")
    text = report.read_text()
    assert text.startswith("peaks")
    assert "branch_signs" in text


def test_cli_qzeros(capsys):
    assert cli.main(["qzeros", "2", "1"]) == 0
    out = capsys.readouterr().out
    assert "closed_form |gamma| = 3.14159265359" in out
    assert cli.main(["qzeros", "4", "1"]) == cli.EXIT_CONFIG


def test_cli_decohere(tmp_path):
    assert cli.main(["decohere", "--alpha-prime", "2", "--kappa-t", "0,0.1", "--grid", "3,0.5", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "decoherence_summary.json").read_text())
    assert [s["kappa_t"] for s in summary] == [0, 0.1]
    assert (tmp_path / "wigner_kt1.csv").exists()


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["prepare", "--alpha", "4"]) == cli.EXIT_CONFIG
    assert cli.main(["prepare", "--alpha", "4", "--gts", "x"]) == cli.EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_cli_numerical_guard():
    assert cli.main(["prepare", "--alpha", "8", "--gts", "1", "--nmax", "100"]) == cli.EXIT_NUMERICAL


def test_cli_accept_failure_exit(monkeypatch, capsys):
    failing = acceptance.CriterionResult(1, "stub", False)
    monkeypatch.setattr(acceptance, "CRITERIA", (lambda: failing,))
    assert cli.main(["accept"]) == cli.EXIT_ACCEPT
    assert json.loads(capsys.readouterr().out.splitlines()[-1]) == {"passed": False, "failed": [1]}
