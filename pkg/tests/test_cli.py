import json
import math
from pathlib import Path

import pytest

from zeno_lab.cli import main
from zeno_lab.config import parse_config
from zeno_lab.errors import ConfigError
from zeno_lab.runner import load_report, read_survival_csv, read_sweep_csv, rerun, run_scenario

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

GISIN = {
    "scenario": "gisin_two_level",
    "model": {"alpha": 1.0, "lambda": 1.0, "omega": 0.0},
    "protocol": {"total_time": 1.0, "n_measurements": [10, 100, 1000]},
}
RABI = {"scenario": "linear_rabi", "model": {"alpha": 1.0}, "protocol": {"total_time": 1.0, "n_measurements": 1}}


def write_config(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw), encoding="utf-8")
    return str(path)


def run_cli(tmp_path, raw, *extra, command="run"):
    out = tmp_path / "out"
    code = main([command, "--config", write_config(tmp_path, raw), "--out-dir", str(out), *extra])
    return code, out


class TestRun:
    def test_gisin_criterion(self, tmp_path):
        code, out = run_cli(tmp_path, GISIN)
        assert code == 0
        report = load_report(out / "gisin_two_level_report.json")
        assert report.criterion is True
        cum = [r.cumulative for r in report.rows]
        assert cum[0] < cum[1] < cum[2]
        assert report.k_analytic == pytest.approx(0.5, rel=1e-12)
        assert report.k_closed_form == pytest.approx(0.5)
        assert report.k_oracle == pytest.approx(0.5, rel=1e-3)
        assert report.delta_e is None

    def test_rabi(self, tmp_path):
        code, out = run_cli(tmp_path, RABI)
        assert code == 0
        (row,) = read_survival_csv(out / "linear_rabi_survival.csv")
        assert row.cumulative == pytest.approx(math.cos(0.5) ** 2, abs=1e-8)
        report = load_report(out / "linear_rabi_report.json")
        assert report.delta_e == pytest.approx(0.5)
        assert report.s == pytest.approx(1.0, rel=1e-6)

    def test_soliton_k(self, tmp_path):
        raw = {"scenario": "nlse_soliton", "model": {"eta": 1.0, "u": 2.0}, "protocol": {"total_time": 1.0, "n_measurements": 100}}
        code, out = run_cli(tmp_path, raw, "--format", "json")
        assert code == 0
        report = load_report(out / "nlse_soliton_report.json")
        assert report.k_analytic == pytest.approx(4 / 3, rel=1e-10)
        assert report.k_oracle == pytest.approx(report.k_analytic, rel=1e-2)
        assert not (out / "nlse_soliton_survival.csv").exists()

    def test_custom_linear(self, tmp_path):
        raw = {
            "scenario": "custom_linear",
            "model": {"hamiltonian_real": [[1, 0.5], [0.5, -1]], "initial_state_real": [1, 0]},
            "protocol": {"total_time": 1.0, "n_measurements": [5, 50]},
        }
        code, out = run_cli(tmp_path, raw)
        assert code == 0
        report = load_report(out / "custom_linear_report.json")
        assert report.delta_e == pytest.approx(0.5)
        assert report.k_analytic == pytest.approx(0.25, rel=1e-12)

    @pytest.mark.parametrize("name", ["linear_rabi.json", "nlse_soliton.json"])
    def test_shipped_configs(self, tmp_path, name):
        assert main(["run", "--config", str(CONFIG_DIR / name), "--out-dir", str(tmp_path)]) == 0


class TestSweep:
    def sweep(self, tmp_path, raw):
        code, out = run_cli(tmp_path, raw, command="sweep")
        assert code == 0
        return read_sweep_csv(next(out.glob("*.csv")))

    def test_lambda(self, tmp_path):
        rows = self.sweep(tmp_path, dict(GISIN, sweep={"lambda": [2.0, 0.0, 1.0]}))
        assert [r["param"] for r in rows] == [0.0, 1.0, 2.0]
        assert [r["k"] for r in rows] == pytest.approx([0.25, 0.5, 1.25], rel=1e-12)
        for r in rows:
            assert r["cumulative_N10"] < r["cumulative_N100"] < r["cumulative_N1000"]

    def test_soliton_u(self, tmp_path):
        raw = {
            "scenario": "nlse_soliton",
            "model": {"eta": 1.0},
            "protocol": {"total_time": 1.0, "n_measurements": [10]},
            "sweep": {"u": [0.0, 1.0, 2.0]},
        }
        rows = self.sweep(tmp_path, raw)
        assert [r["k"] for r in rows] == pytest.approx([0.0, 1 / 3, 4 / 3], rel=1e-10, abs=1e-12)

    def test_empty_grid(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, dict(GISIN, sweep={"lambda": []}), command="sweep")
        assert code == 2
        assert "sweep.lambda" in capsys.readouterr().err

    def test_multi_parameter_rejected(self, tmp_path):
        code, _ = run_cli(tmp_path, dict(GISIN, sweep={"lambda": [0.0], "alpha": [1.0]}), command="sweep")
        assert code == 2

    def test_sweep_without_grid(self, tmp_path):
        assert run_cli(tmp_path, GISIN, command="sweep")[0] == 2

    def test_json_output(self, tmp_path):
        code, out = run_cli(tmp_path, dict(RABI, sweep={"alpha": [1.0, 2.0]}), "--format", "json", command="sweep")
        assert code == 0
        payload = json.loads((out / "linear_rabi_sweep_alpha.json").read_text())
        assert [r["k"] for r in payload["rows"]] == pytest.approx([0.25, 1.0])


class TestValidation:
    @pytest.mark.parametrize(
        "patch, field",
        [
            ({"colour": 1}, "colour"),
            ({"model": {"alpha": 1.0, "gamma": 2.0}}, "model.gamma"),
            ({"protocol": {"total_time": 1.0, "n_measurements": [100, 10]}}, "protocol.n_measurements"),
            ({"protocol": {"total_time": -1.0, "n_measurements": 1}}, "protocol.total_time"),
            ({"integrator": {"dt": 0.5}}, "integrator.dt"),
            ({"integrator": {"method": "splitstep"}}, "integrator.method"),
            ({"model": {"alpha": -1.0}}, "model.alpha"),
            ({"scenario": "harmonic"}, "scenario"),
        ],
    )
    def test_field_named(self, tmp_path, capsys, patch, field):
        code, out = run_cli(tmp_path, dict(RABI, **patch))
        assert code == 2
        assert field in capsys.readouterr().err
        assert not out.exists()

    def test_soliton_too_wide_for_grid(self):
        raw = {"scenario": "nlse_soliton", "model": {"eta": 0.2}, "protocol": {"total_time": 1.0, "n_measurements": 10}}
        with pytest.raises(ConfigError) as info:
            parse_config(raw)
        assert info.value.field == "model"

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        assert main(["run", "--config", str(path)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2

    def test_seed_out_of_range(self, tmp_path):
        assert run_cli(tmp_path, RABI, "--seed", str(2**64))[0] == 2


class TestDivergence:
    @pytest.mark.parametrize(
        "raw",
        [
            {"scenario": "nlse_soliton", "model": {"u": 2.0}, "protocol": {"total_time": 1.0, "n_measurements": 100},
             "integrator": {"dt": 1e-3}},
            {"scenario": "gisin_two_level", "model": {"alpha": 1000.0, "lambda": 5.0},
             "protocol": {"total_time": 1.0, "n_measurements": 10}, "integrator": {"dt": 0.01}},
        ],
    )
    def test_exit_code_and_diagnostics(self, tmp_path, capsys, raw):
        code, out = run_cli(tmp_path, raw)
        assert code == 3
        err = capsys.readouterr().err
        assert "diverged" in err and "step" in err
        assert not out.exists()


class TestOutputs:
    def test_env_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ZENO_LAB_OUT", str(tmp_path / "env"))
        assert main(["run", "--config", write_config(tmp_path, RABI)]) == 0
        assert (tmp_path / "env" / "linear_rabi_survival.csv").exists()

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ZENO_LAB_OUT", str(tmp_path / "env"))
        code, out = run_cli(tmp_path, RABI)
        assert code == 0 and out.exists() and not (tmp_path / "env").exists()

    def test_seed_override(self, tmp_path):
        raw = dict(GISIN, protocol={"total_time": 1.0, "n_measurements": [10, 100], "collapse_mode": "stochastic",
                                    "trials": 2000, "seed": 1})
        _, out = run_cli(tmp_path, raw, "--seed", "77", "--format", "json")
        report = load_report(out / "gisin_two_level_report.json")
        assert report.config["protocol"]["seed"] == 77
        assert all(r.stochastic is not None for r in report.rows)

    def test_csv_only(self, tmp_path):
        _, out = run_cli(tmp_path, RABI, "--format", "csv")
        assert sorted(p.name for p in out.iterdir()) == ["linear_rabi_survival.csv"]

    def test_survival_header(self, tmp_path):
        _, out = run_cli(tmp_path, RABI)
        assert (out / "linear_rabi_survival.csv").read_text().splitlines()[0] == "N,tau,cumulative,analytic_product,asymptotic"

    def test_identical_bytes(self, tmp_path):
        raw = dict(GISIN, protocol={"total_time": 1.0, "n_measurements": [10, 100], "collapse_mode": "stochastic",
                                    "trials": 1000, "seed": 9})
        cfg = write_config(tmp_path, raw)
        main(["run", "--config", cfg, "--out-dir", str(tmp_path / "a")])
        main(["run", "--config", cfg, "--out-dir", str(tmp_path / "b")])
        name = "gisin_two_level_survival.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        ja = json.loads((tmp_path / "a" / "gisin_two_level_report.json").read_text())
        jb = json.loads((tmp_path / "b" / "gisin_two_level_report.json").read_text())
        ja.pop("wall_time"), jb.pop("wall_time")
        assert ja == jb

    def test_files_reload_to_report_values(self, tmp_path):
        _, out = run_cli(tmp_path, GISIN)
        report = load_report(out / "gisin_two_level_report.json")
        csv_rows = read_survival_csv(out / "gisin_two_level_survival.csv")
        assert [(r.N, r.tau, r.cumulative, r.analytic_product, r.asymptotic) for r in csv_rows] == [
            (r.N, r.tau, r.cumulative, r.analytic_product, r.asymptotic) for r in report.rows
        ]

    def test_echoed_config_reruns_bitwise(self, tmp_path):
        first = run_scenario(parse_config(GISIN))
        second = rerun(load_report_from(first, tmp_path))
        assert [r.cumulative for r in second.rows] == [r.cumulative for r in first.rows]
        assert second.k_oracle == first.k_oracle


def load_report_from(report, tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps(report.to_dict()), encoding="utf-8")
    return load_report(path)
