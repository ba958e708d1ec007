import csv
import io
import json
import math

import pytest

from startail import cli
from startail.rate_core import StarParams, phi
from startail.variational import c_crit


def run(capsys, *args):
    code = cli.main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_rate_c_zero(capsys):
    code, out, _ = run(capsys, "rate", "--r", "2", "--n", "100", "--p", "0.05", "--eps", "1",
                       "--c", "0")
    assert code == 0
    rec = json.loads(out)
    assert rec["rate"] == pytest.approx(phi(1.0) * StarParams(2, 100, 0.05).mu, rel=1e-15)
    assert set(rec["cases"]) == {"PoissonTransition", "Intermediate", "Fractional", "Dense"}
    assert "phi_n" in rec and rec["regime"]["kind"] == "PoissonTransition"


def test_rate_dense(capsys):
    code, out, _ = run(capsys, "rate", "--r", "2", "--n", "100", "--p", "0.3", "--eps", "1")
    rec = json.loads(out)
    assert rec["regime"]["kind"] == "Dense"
    assert rec["rate"] == pytest.approx(1e4 * 0.09 * math.log(1 / 0.3), rel=1e-14)


@pytest.mark.parametrize("p", ["1.0", "1.5", "0", "-0.1"])
def test_rate_bad_p_exit_2(capsys, p):
    code, _, err = run(capsys, "rate", "--r", "2", "--n", "100", "--p", p, "--eps", "1")
    assert code == 2
    assert "p" in err.split("error:")[1].split(":")[0]


def test_missing_field_named(capsys):
    code, _, err = run(capsys, "rate", "--r", "2", "--n", "100", "--p", "0.3")
    assert code == 2 and "eps" in err


def test_unknown_command_exit_2(capsys):
    code, _, _ = run(capsys, "nonsense")
    assert code == 2


def test_minimize_cases(capsys):
    cc = c_crit(1.0, 2)
    code, out, _ = run(capsys, "minimize", "--r", "2", "--eps", "1", "--c", str(0.5 * cc))
    assert json.loads(out)["minimizers"] == [0.0]
    code, out, _ = run(capsys, "minimize", "--r", "2", "--eps", "1", "--c", str(2 * cc),
                       "--verify")
    rec = json.loads(out)
    assert code == 0 and len(rec["minimizers"]) == 1 and 0 < rec["minimizers"][0] < 1
    assert rec["grid_check"]["ok"]


def test_critical_and_classify(capsys):
    code, out, _ = run(capsys, "critical", "--r", "2", "--eps", "1")
    rec = json.loads(out)
    assert rec["c_crit"] == pytest.approx(c_crit(1.0, 2))
    assert rec["alpha1"] < rec["alpha0"]
    code, out, _ = run(capsys, "classify", "--r", "2", "--n", "100", "--p", "0.3")
    assert json.loads(out)["regime"]["kind"] == "Dense"


def test_exact_commands(capsys):
    code, out, _ = run(capsys, "exact", "--kind", "gnp", "--n", "6", "--p", "0.3", "--r", "2",
                       "--eps", "0.5")
    assert code == 0
    assert json.loads(out)["tail"] == pytest.approx(0.1999507596406376, rel=1e-12)
    code, out, _ = run(capsys, "exact", "--kind", "iid", "--n", "3", "--N", "4", "--p", "0.3",
                       "--r", "2", "--distribution", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["support", "log_mass"]
    code, out, _ = run(capsys, "exact", "--joint", "--n", "3", "--N", "4", "--p", "0.3",
                       "--r", "2", "--R", "4")
    rec = json.loads(out)
    assert code == 0 and any("Y'' degenerate" in s for s in rec["notes"])


def test_exact_guard_reported(capsys):
    code, _, err = run(capsys, "exact", "--kind", "gnp", "--n", "9", "--p", "0.3", "--r", "2",
                       "--eps", "1")
    assert code == 2 and "graph_n" in err and "7" in err


def test_simulate_samples_zero(capsys):
    code, _, err = run(capsys, "simulate", "--r", "2", "--n", "6", "--p", "0.3", "--eps", "0.5",
                       "--samples", "0")
    assert code == 2 and "samples" in err


def test_simulate_json_record(capsys):
    code, out, _ = run(capsys, "simulate", "--r", "2", "--n", "6", "--p", "0.3", "--eps", "0.5",
                       "--samples", "5000", "--seed", "3", "--compare-rate")
    rec = json.loads(out)
    for key in ("estimator", "params", "seed", "samples", "estimate", "log_estimate",
                "std_error"):
        assert key in rec
    assert "rate_comparison" in rec


def test_simulate_tilted_bad_R(capsys):
    code, _, err = run(capsys, "simulate", "--estimator", "tilted", "--r", "2", "--n", "10",
                       "--N", "9", "--p", "0.2", "--eps", "1", "--R", "1")
    assert code == 2 and "R" in err


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"r": 2, "n": 6, "p": 0.3, "eps": 0.5, "samples": 4000,
                               "seed": 1}))
    code, out1, _ = run(capsys, "simulate", "--config", str(cfg))
    code, out2, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "2")
    assert json.loads(out1)["seed"] == 1 and json.loads(out2)["seed"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(capsys, "simulate", "--config", str(bad))
    assert code == 2 and "bogus" in err


def test_sweep_csv(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"r": 2, "p": 0.3, "eps": 0.5, "samples": 2000,
                               "sweep": [{"n": 5}, {"n": 6}, {"n": 7}]}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["params.n"] for r in rows] == ["5", "6", "7"]


def test_verify_suites(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "convex_sum")
    recs = json.loads(out)
    assert code == 0 and all(r["ok"] for r in recs)
    code, _, err = run(capsys, "verify", "--suite", "nope")
    assert code == 2 and "suite" in err


def test_verify_failure_exit_1(monkeypatch, capsys):
    from startail import checks
    monkeypatch.setitem(checks.SUITES, "broken",
                        lambda: [checks.CheckResult("broken", "x", False)])
    code, _, _ = run(capsys, "verify", "--suite", "broken")
    assert code == 1


def test_curves(tmp_path, capsys):
    code, out, _ = run(capsys, "curves", "--r", "2", "--eps", "1", "--outdir", str(tmp_path))
    rec = json.loads(out)
    assert len(rec["curves"]) == 4
    assert abs(rec["fprime_min_at_alpha0"]) < 1e-9
    lines = (tmp_path / "curve_0.csv").read_text().splitlines()
    assert lines[0] == "delta,f,g,h" and len(lines) == 1001
    code, out, _ = run(capsys, "curves", "--r", "2", "--eps", "1", "--alpha", "0.3",
                       "--points", "7")
    assert out.splitlines()[0] == "delta,f,g,h" and len(out.splitlines()) == 8


def test_json_round_trip(capsys):
    for args in (["critical", "--r", "3", "--eps", "0.5"],
                 ["rate", "--r", "2", "--n", "50", "--p", "0.1", "--eps", "1"],
                 ["minimize", "--r", "2", "--eps", "1", "--c", "7"]):
        _, out, _ = run(capsys, *args)
        obj = json.loads(out)
        assert json.loads(json.dumps(obj, indent=2)) == obj
        assert json.dumps(obj, indent=2) + "\n" == out


def test_output_path(tmp_path, capsys):
    dest = tmp_path / "o.json"
    code, out, _ = run(capsys, "critical", "--r", "2", "--eps", "1", "--output", str(dest))
    assert out == "" and json.loads(dest.read_text())["r"] == 2
