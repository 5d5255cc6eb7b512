import json
import subprocess
import sys
from pathlib import Path

import pytest

from risklab.cli import main, validate_config

SPIKE_PROBLEM = {
    "spectrum": {"kind": "spike", "params": {"n": 100}, "d": 10000},
    "sigma2": 0.25,
    "design": "gaussian",
}
POWER_LAW_PROBLEM = {
    "spectrum": {"kind": "power_law", "params": {"a": 2.0, "r": 1.0}, "d": 500},
    "sigma2": 1.0,
    "design": "gaussian",
}


def _write(tmp_path, name, config):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def _read_csv(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestBoundsCommand:
    def test_spike_reports_ell_star(self, tmp_path):
        cfg = _write(tmp_path, "c.json",
                     {"problem": SPIKE_PROBLEM, "params": {"n": 100}})
        out = tmp_path / "out"
        assert main(["bounds", "--config", cfg, "--out", str(out)]) == 0
        rows = _read_csv(out / "result.csv")
        lower = next(r for r in rows if r["bound"] == "gd_lower")
        assert lower["ell_star"] == "1"

    def test_run_json_records_seed_and_version(self, tmp_path):
        import risklab

        cfg = _write(tmp_path, "c.json",
                     {"problem": SPIKE_PROBLEM, "params": {"n": 100}})
        out = tmp_path / "out"
        main(["bounds", "--config", cfg, "--out", str(out), "--seed", "77"])
        run = json.loads((out / "run.json").read_text())
        assert run["seed"] == 77
        assert run["version"] == risklab.__version__
        assert run["command"] == "bounds"


class TestRatesCommand:
    def test_theory_column(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "params": {"a": 2.0, "r_list": [1.0], "algorithms": ["sgd"],
                       "n_grid": [64, 128, 256]},
            "trials": 2, "seed": 1,
        })
        out = tmp_path / "out"
        assert main(["rates", "--config", cfg, "--out", str(out)]) == 0
        (row,) = _read_csv(out / "result.csv")
        assert float(row["theory"]) == pytest.approx(-0.8)
        assert (out / "plotdata_sgd_r1.csv").exists()


class TestSimulateCommand:
    def test_sgd_exact_row(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "problem": POWER_LAW_PROBLEM,
            "params": {"n": 50, "estimator": {"kind": "sgd", "eta0": 0.05}},
            "trials": 20, "seed": 4,
        })
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        rows = _read_csv(out / "result.csv")
        methods = {r["method"] for r in rows}
        assert "monte_carlo" in methods and "exact_recursion" in methods
        mc = next(r for r in rows if r["method"] == "monte_carlo")
        exact = next(r for r in rows if r["method"] == "exact_recursion")
        diff = abs(float(mc["mean"]) - float(exact["mean"]))
        assert diff <= 5.0 * float(mc["stderr"])


class TestSweepCommand:
    def test_creates_output_dir_and_repeats_identically(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "problem": POWER_LAW_PROBLEM,
            "params": {"n": 40, "algorithm": "ridge",
                       "grid": {"start": 1e-3, "stop": 1.0, "points": 6}},
            "trials": 4, "seed": 2,
        })
        out1, out2 = tmp_path / "a" / "deep", tmp_path / "b"
        assert main(["sweep", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(out2)]) == 0
        assert (out1 / "result.csv").read_bytes() == \
            (out2 / "result.csv").read_bytes()
        assert (out1 / "plotdata_sweep.csv").read_bytes() == \
            (out2 / "plotdata_sweep.csv").read_bytes()

    def test_exactly_one_best_row(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "problem": POWER_LAW_PROBLEM,
            "params": {"n": 40, "algorithm": "sgd",
                       "grid": [0.01, 0.05, 0.1]},
            "trials": 2, "seed": 0,
        })
        out = tmp_path / "out"
        main(["sweep", "--config", cfg, "--out", str(out)])
        rows = _read_csv(out / "result.csv")
        assert sum(r["best"] == "true" for r in rows) == 1


class TestCompareCommand:
    def test_ridge_comparison(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "problem": POWER_LAW_PROBLEM,
            "params": {"n": 50, "against": "ridge",
                       "lambda_grid": [0.01, 0.1]},
            "trials": 3, "seed": 0,
        })
        out = tmp_path / "out"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        rows = _read_csv(out / "result.csv")
        assert len(rows) == 2
        assert all(float(r["ratio_mean"]) > 0 for r in rows)


class TestSeparationCommand:
    def test_memory_guard_exit_code(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "params": {"n_grid": [64], "memory_budget": 1000},
            "trials": 2, "seed": 0,
        })
        assert main(["separation", "--config", cfg,
                     "--out", str(tmp_path / "out")]) == 3

    def test_small_run(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "params": {"n_grid": [16]}, "trials": 2, "seed": 0,
        })
        out = tmp_path / "out"
        assert main(["separation", "--config", cfg, "--out", str(out)]) == 0
        (row,) = _read_csv(out / "result.csv")
        assert row["ell_star"] == "1"


class TestValidation:
    def test_spike_dimension_error(self, tmp_path):
        bad = dict(SPIKE_PROBLEM)
        bad["spectrum"] = {"kind": "spike", "params": {"n": 100}, "d": 100}
        cfg = _write(tmp_path, "c.json",
                     {"problem": bad, "params": {"n": 100}})
        diags = validate_config(cfg, "bounds")
        assert any("d >= n^2" in d for d in diags)
        assert main(["bounds", "--config", cfg,
                     "--out", str(tmp_path / "out")]) == 2

    def test_small_n_sgd_warning(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {
            "problem": {"spectrum": {"kind": "spike", "params": {"n": 50},
                                     "d": 2500},
                        "sigma2": 0.25},
            "params": {"n": 50}})
        diags = validate_config(cfg, "bounds")
        assert any(d.startswith("warning") and "n >= 100" in d for d in diags)
        assert not any(d.startswith("error") for d in diags)

    def test_clean_config(self, tmp_path):
        cfg = _write(tmp_path, "c.json",
                     {"problem": SPIKE_PROBLEM, "params": {"n": 100}})
        assert validate_config(cfg, "bounds") == []

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        diags = validate_config(str(path), "bounds")
        assert any(d.startswith("error") for d in diags)

    def test_unknown_command_exits_2(self, tmp_path):
        cfg = _write(tmp_path, "c.json", {"problem": SPIKE_PROBLEM})
        with pytest.raises(SystemExit) as exc:
            main(["explode", "--config", cfg])
        assert exc.value.code == 2


class TestEntryPoint:
    def test_console_script(self, tmp_path):
        cfg = _write(tmp_path, "c.json",
                     {"problem": SPIKE_PROBLEM, "params": {"n": 100}})
        out = tmp_path / "out"
        proc = subprocess.run(
            [sys.executable, "-m", "risklab.cli", "bounds", "--config", cfg,
             "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert (out / "result.csv").exists()
