import json
import subprocess
import sys

import numpy as np
import pytest

from superperiod.cli import (CONFIG_SCHEMA, DEFAULTS, ConfigError, build_report, decode_complex, encode, main,
                             render_text, resolve_config, run_scenario)
from superperiod.elliptic import TWO_PI_I
from superperiod.scenarios import Report


def _cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_expand_even_passes(capsys):
    code, out, _ = _run(["expand-even", "--no-timestamp"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["ok"] and rep["failures"] == []
    assert rep["config"]["mode"] == "even"
    # every default is spelled out in the report
    assert set(DEFAULTS) <= set(rep["config"])
    assert {c["source"] for c in rep["comparisons"]} <= {"PAPER", "DERIVED", "TRIVIAL"}


def test_exit_code_on_failed_comparison(tmp_path, capsys):
    code, out, err = _run(["expand-even", "--no-timestamp", "--config", _cfg(tmp_path, {"tol_series": 1e-300})],
                          capsys)
    assert code == 1
    rep = json.loads(out)
    assert rep["failures"]
    for name in rep["failures"]:
        assert name in err


@pytest.mark.parametrize("bad", [{"N": 0}, {"tau1": [0.0, -1.0]}, {"unknown": 1}, {"q": [-1e-3]},
                                 {"taut1": [0.1, 1.0]}])
def test_exit_code_on_bad_config(tmp_path, capsys, bad):
    code, out, err = _run(["expand-even", "--config", _cfg(tmp_path, bad)], capsys)
    assert code == 2
    assert out == "" and "invalid config" in err


def test_unreadable_config(tmp_path, capsys):
    code, _, err = _run(["expand-even", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and "missing.json" in err
    p = tmp_path / "broken.json"
    p.write_text("{")
    code, _, err = _run(["expand-even", "--config", str(p)], capsys)
    assert code == 2 and "not valid JSON" in err


def test_periods_needs_points(capsys):
    code, _, err = _run(["periods"], capsys)
    assert code == 2 and "points" in err


def test_unwritable_output(tmp_path, capsys):
    code, _, err = _run(["expand-even", "--out", str(tmp_path / "no" / "such" / "dir.json")], capsys)
    assert code == 2 and "dir.json" in err


def test_deterministic_reports(capsys):
    _, a, _ = _run(["expand-super", "--no-timestamp"], capsys)
    _, b, _ = _run(["expand-super", "--no-timestamp"], capsys)
    assert a == b
    _, c, _ = _run(["expand-super"], capsys)
    rep = json.loads(c)
    assert "timestamp" in rep and "timing" in rep
    assert "timestamp" not in json.loads(a)


def test_json_round_trip_is_bit_identical():
    rep, _ = run_scenario({"mode": "plus_plus"}, timestamp=False)
    text = json.dumps(rep)
    back = json.loads(text)
    assert back == rep
    coeffs = decode_complex(back["series"]["Omega12"]["1"]["coeffs"])
    assert coeffs[2] == complex(rep["series"]["Omega12"]["1"]["coeffs"][2][0],
                                rep["series"]["Omega12"]["1"]["coeffs"][2][1])
    x = np.array([1 / 3 + 2j / 7, np.pi - 1e-300j, -0.0 + 0j])
    assert [decode_complex(v) for v in json.loads(json.dumps(encode(x)))] == list(x)


def test_super_omega12_serialization():
    rep, code = run_scenario({"mode": "plus_plus"}, timestamp=False)
    assert code == 0
    entry = rep["series"]["Omega12"]
    assert list(entry) == ["1", "eta1*eta2"]
    eta = entry["eta1*eta2"]["coeffs"]
    body = entry["1"]["coeffs"]
    assert eta[0] == [0.0, 0.0] and body[0] == [0.0, 0.0] and body[1] == [0.0, 0.0]
    assert complex(*body[2]) == pytest.approx(TWO_PI_I, abs=1e-12)
    assert complex(*eta[1]) == pytest.approx(TWO_PI_I, abs=1e-12)


def test_empty_report_has_schema_header():
    cfg = resolve_config({"mode": "even"})
    rep = build_report(encode(cfg), Report(), 0.0, timestamp=False)
    assert rep["schema"].startswith("superperiod-report/")
    assert rep["series"] == {} and rep["tables"] == {} and rep["comparisons"] == []
    assert rep["ok"]
    assert render_text(rep).startswith(rep["schema"])


def test_text_format_and_out(tmp_path, capsys):
    out = tmp_path / "r.txt"
    code, stdout, _ = _run(["expand-even", "--format", "text", "--no-timestamp", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    text = out.read_text()
    assert text.splitlines()[0].startswith("superperiod-report/")
    assert any(line.startswith("PASS") for line in text.splitlines())
    assert "elapsed" not in text


def test_batch_with_jobs(tmp_path, capsys):
    items = [{"tau1": [0.0, 1.7], "tau2": [0.3, 2.1]}, {"tau1": [0.1, 1.3], "tau2": [-0.2, 1.6]}]
    path = _cfg(tmp_path, items)
    code, a, _ = _run(["expand-even", "--no-timestamp", "--jobs", "2", "--config", path], capsys)
    assert code == 0
    _, b, _ = _run(["expand-even", "--no-timestamp", "--jobs", "1", "--config", path], capsys)
    assert a == b
    assert len(json.loads(a)["reports"]) == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SUPERPERIOD_SEED", "7")
    _, a, _ = _run(["suite", "grassmann", "--no-timestamp"], capsys)
    _, b, _ = _run(["suite", "grassmann", "--no-timestamp"], capsys)
    assert a == b
    assert json.loads(a)["config"]["seed"] == 7
    monkeypatch.setenv("SUPERPERIOD_SEED", "8")
    _, c, _ = _run(["suite", "grassmann", "--no-timestamp"], capsys)
    assert json.loads(c)["tables"]["laws"] != json.loads(a)["tables"]["laws"]


@pytest.mark.parametrize("argv", [["expand-mm"], ["mumford"], ["oracle-compare"], ["probe-log"],
                                  ["suite", "elliptic"], ["suite", "mumford"]])
def test_subcommands_pass(argv, capsys):
    code, out, _ = _run(argv + ["--no-timestamp"], capsys)
    assert code == 0, json.loads(out)["failures"]


def test_oracle_compare_table(capsys):
    _, out, _ = _run(["oracle-compare", "--no-timestamp"], capsys)
    rows = json.loads(out)["tables"]["oracle"]
    assert 12 <= rows[0]["ratio_to_next"] <= 20


def test_periods_subcommand(tmp_path, capsys):
    pts = [[-3.0, 0.1], [-1.0, -0.2], [0.1, 0.2], [0.9, 0.0], [3.5, 0.2], [4.2, 0.0]]
    code, out, _ = _run(["periods", "--no-timestamp", "--config", _cfg(tmp_path, {"points": pts})], capsys)
    assert code == 0
    Om = np.array(decode_complex(json.loads(out)["tables"]["Omega"]))
    assert np.allclose(Om, Om.T, atol=1e-8)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "superperiod", "expand-even", "--no-timestamp",
                          "--format", "text"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "ok=True" in res.stdout


def test_schema_lists_every_mode():
    assert set(CONFIG_SCHEMA["properties"]["mode"]["enum"]) == {
        "even", "plus_plus", "minus_minus", "hyperelliptic", "oracle", "suite"}
    with pytest.raises(ConfigError):
        resolve_config({})
