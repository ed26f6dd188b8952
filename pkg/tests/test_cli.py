import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from oscitrace.cli import DEFAULTS, main, parse_config, parse_lambda_grid, run
from oscitrace.errors import ConfigError


def write_json(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def without_timestamp(text):
    doc = json.loads(text)
    doc.pop("timestamp")
    return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------- parsing

def test_minimal_config_fills_defaults():
    cfg = parse_config(document={"command": "compare", "k": 5, "n": 2, "amplitude": "gaussian"})
    assert cfg.command == "compare"
    assert (cfg.dims.k, cfg.dims.n) == (5, 2)
    for key in DEFAULTS:
        assert key in cfg.values
    assert "tolerance" in cfg.defaults_used and "amplitude" not in cfg.defaults_used
    assert len(cfg.lambdas) == 7 and cfg.lambdas[0] == pytest.approx(1e3) and cfg.lambdas[-1] == pytest.approx(1e6)


def test_k2_names_the_hypothesis():
    with pytest.raises(ConfigError, match="H2"):
        parse_config(document={"command": "compare", "k": 2, "n": 1})


def test_unknown_key_suggests_fix():
    with pytest.raises(ConfigError, match="tolerance") as ei:
        parse_config(document={"command": "compare", "k": 5, "n": 2, "tolerence": 1e-8})
    assert "tolerence" in str(ei.value)


def test_nested_unknown_key_has_path():
    with pytest.raises(ConfigError, match="test_function"):
        parse_config(document={"command": "trace-coeff", "symbol": {"preset": "re-complex-power", "k": 5},
                               "test_function": {"knd": "fejer"}})


def test_regime_k_below_2n_rejected():
    with pytest.raises(ConfigError, match="k < 2n"):
        parse_config(document={"command": "predict", "k": 3, "n": 2})


def test_inhomogeneous_symbol_rejected_outside_flow_check():
    recs = [{"powers": [4, 0], "coeff": 1.0}, {"powers": [5, 0], "coeff": 0.1}]
    with pytest.raises(ConfigError, match="degree"):
        parse_config(document={"command": "liouville", "symbol": recs})
    cfg = parse_config(document={"command": "flow-check", "symbol": recs})
    assert [p.k for p in cfg.flow_parts] == [4, 5]


def test_overrides_take_precedence(tmp_path):
    path = write_json(tmp_path, "c.json", {"command": "predict", "k": 5, "n": 2, "seed": 3})
    cfg = parse_config(path, {"seed": 9})
    assert cfg["seed"] == 9


@pytest.mark.parametrize("spec,expected", [("1,10,100", (1.0, 10.0, 100.0)), ([2, 4], (2.0, 4.0))])
def test_lambda_grid_forms(spec, expected):
    assert parse_lambda_grid(spec) == expected


def test_lambda_grid_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_lambda_grid("a:b")
    with pytest.raises(ConfigError):
        parse_lambda_grid("1,-2")


# ---------------------------------------------------------------- commands

def test_compare_report(tmp_path):
    cfg = parse_config(document={"command": "compare", "k": 5, "n": 2})
    status, report, csv_text = run(cfg, timestamp="T")
    assert status == 0
    res = report["result"]
    text = json.dumps(res)
    assert "0.8" in text
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    assert list(rows[0].keys()) == ["lambda", "value", "predicted", "abs_err", "rel_err"]
    assert len(rows) == 7


def test_liouville_quintic(tmp_path):
    sym = write_json(tmp_path, "s.json", [{"powers": [5, 0], "coeff": 1}, {"powers": [3, 2], "coeff": -10},
                                           {"powers": [1, 4], "coeff": 5}])
    out = tmp_path / "r.json"
    assert main(["liouville", "--symbol", sym, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["liouville_volume"]["value"] == pytest.approx(2.0, abs=1e-9)


def test_flow_check_passes(tmp_path):
    out = tmp_path / "r.json"
    assert main(["flow-check", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["result"]["summary"] == "PASS"


def test_reruns_are_byte_identical(tmp_path):
    out, csv_path = tmp_path / "r.json", tmp_path / "r.csv"
    args = ["predict", "--k", "5", "--n", "2", "--seed", "4", "--out", str(out), "--csv", str(csv_path)]
    runs = []
    for _ in range(2):
        assert main(args) == 0
        runs.append((out.read_text(), csv_path.read_bytes()))
    assert without_timestamp(runs[0][0]) == without_timestamp(runs[1][0])
    assert runs[0][1] == runs[1][1]
    cfg = parse_config(document={"command": "predict", "k": 5, "n": 2})
    a, b = (json.dumps(run(cfg, timestamp="T")[1], sort_keys=True) for _ in range(2))
    assert a == b


def test_trace_coeff_carries_error_estimates(tmp_path):
    out = tmp_path / "r.json"
    cfgp = write_json(tmp_path, "c.json", {"command": "trace-coeff",
                                           "symbol": {"preset": "re-complex-power", "k": 5}})
    assert main(["trace-coeff", "--config", cfgp, "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["leading_value"]["value"] == pytest.approx(0.172522094256, rel=1e-9)
    assert "error_estimate" in json.dumps(rep["result"])


# ---------------------------------------------------------------- exit codes

def test_exit_code_tolerance_not_met(tmp_path, capsys):
    cfgp = write_json(tmp_path, "c.json", {"command": "compare", "k": 5, "n": 2, "rel_tolerance": 1e-12})
    assert main(["compare", "--config", cfgp, "--out", str(tmp_path / "r.json")]) == 2
    assert "tolerance" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["compare", "--k", "2", "--n", "1"],
    ["compare", "--k", "3", "--n", "2"],
    ["compare", "--bogus"],
    ["teleport"],
])
def test_exit_code_errors(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_exit_code_typo_config(tmp_path):
    cfgp = write_json(tmp_path, "c.json", {"command": "compare", "k": 5, "n": 2, "tolerence": 1})
    assert main(["compare", "--config", cfgp]) == 1


def test_console_script_installed():
    exe = shutil.which("oscitrace")
    cmd = [exe] if exe else [sys.executable, "-m", "oscitrace.cli"]
    proc = subprocess.run(cmd + ["predict", "--k", "5", "--n", "2"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "predict"
