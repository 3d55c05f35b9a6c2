"""Scenario registry fixtures, output determinism, CLI contract."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from capillary.cli import main as cli_main
from capillary.core import TimeSeries
from capillary.errors import UnknownScenarioError
from capillary.harness import (
    OrderTable,
    PAPER_PENDANT,
    PAPER_SESSILE,
    build_scenario,
    emit_profiles,
    emit_timeseries,
    run_scenario,
    scenario_names,
    write_order_tables,
)
from capillary.harness_config import resolve_config
from capillary.schemes import run_simulation

# frozen parameter blocks of the published experiments
FROZEN = {
    "table2": dict(beta=0.0, kappa=0.1, sigma=-math.cos(3.9 * math.pi / 8), theta0=0.0),
    "breathing": dict(beta=0.1, theta_in=3 * math.pi / 16, amplitude=0.2,
                      dt=2 * math.pi * 15 / 1500, n_grid=1000),
    "teapot": dict(beta=3.0, kappa=5.0, sigma=-0.8, theta0=0.0, dt=0.002, n_grid=600,
                   a0=2.4, b0=2.9),
    "groove": dict(beta=0.3, kappa=0.3, sigma=-0.95, theta0=0.3, dt=0.08, n_grid=1000,
                   A=0.1, k=5.0, a0=-3.0, b0=3.0),
    "pendant-bulge": dict(kappa=-28.028, theta_in=3 * math.pi / 16, u_m0=0.3,
                          theta_young=2.7 * math.pi / 8),
    "pendant-lightbulb": dict(kappa=-15.05, theta_in=5 * math.pi / 16, u_m0=0.3,
                              theta_young=4.7 * math.pi / 8),
}


class TestScenarioRegistry:
    def test_names(self):
        assert scenario_names() == [
            "breathing", "groove", "pendant", "sessile", "table2", "teapot",
        ]

    def test_unknown(self):
        with pytest.raises(UnknownScenarioError):
            build_scenario("volcano")

    def test_table2_block(self):
        sc = build_scenario("table2", M=10)
        f = FROZEN["table2"]
        assert sc.params.beta == f["beta"]
        assert sc.params.kappa == f["kappa"]
        assert sc.params.sigma == pytest.approx(f["sigma"])
        assert sc.config.dt == pytest.approx(0.1)
        assert sc.config.n_grid == 80  # N = 8M

    def test_breathing_block(self):
        sc = build_scenario("breathing")
        f = FROZEN["breathing"]
        assert sc.params.beta == f["beta"]
        assert sc.config.dt == pytest.approx(f["dt"])
        assert sc.config.n_grid == f["n_grid"]
        assert sc.initial.a == pytest.approx(-3.0, abs=1e-12)
        assert sc.initial.b == pytest.approx(3.0, abs=1e-12)
        assert sc.config.order == "first"

    def test_teapot_block(self):
        sc = build_scenario("teapot")
        f = FROZEN["teapot"]
        assert (sc.params.beta, sc.params.kappa, sc.params.sigma) == (
            f["beta"], f["kappa"], f["sigma"])
        assert (sc.config.dt, sc.config.n_grid) == (f["dt"], f["n_grid"])
        assert (sc.initial.a, sc.initial.b) == (f["a0"], f["b0"])
        assert sc.config.order == "second"
        assert sc.manifest_extras["bond_number"] == pytest.approx(0.1312, abs=2e-3)

    def test_groove_block(self):
        sc = build_scenario("groove")
        f = FROZEN["groove"]
        assert (sc.params.beta, sc.params.kappa, sc.params.sigma, sc.params.theta0) == (
            f["beta"], f["kappa"], f["sigma"], f["theta0"])
        assert (sc.config.dt, sc.config.n_grid) == (f["dt"], f["n_grid"])
        assert (sc.initial.a, sc.initial.b) == (f["a0"], f["b0"])

    def test_pendant_blocks(self):
        for shape in ("bulge", "lightbulb"):
            sc = build_scenario("pendant", shape=shape)
            f = FROZEN[f"pendant-{shape}"]
            assert sc.params.kappa == f["kappa"]
            assert sc.params.sigma == pytest.approx(-math.cos(f["theta_young"]))
            assert sc.dae_initial.u_m == f["u_m0"]
            assert sc.dae_initial.theta == pytest.approx(f["theta_in"])
            assert sc.final_time == PAPER_PENDANT[shape]["T"]


class TestOrderTable:
    def test_alpha_definition(self):
        t = OrderTable.from_errors("first", [40, 80], [1e-2, 5e-3])
        assert t.rows[0][2] is None
        assert t.rows[1][2] == pytest.approx(1.0)

    def test_csv_layout(self, tmp_path):
        t = OrderTable.from_errors("first", [40, 80], [1e-2, 5e-3])
        path = write_order_tables({"first": t}, tmp_path / "orders.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "order,M,error,alpha"
        assert lines[1].startswith("first,40,0.01")
        assert lines[1].endswith(",")  # alpha empty on the first row


class TestOutputs:
    def test_run_scenario_writes_files(self, tmp_path):
        man = run_scenario("table2", {"M": 5, "order": "first"}, out_dir=tmp_path)
        assert Path(man["outputs"]["timeseries"]).exists()
        assert Path(man["outputs"]["profiles"]).exists()
        assert Path(man["manifest_path"]).exists()
        loaded = json.loads(Path(man["manifest_path"]).read_text())
        assert loaded["config_hash"] == man["config_hash"]
        assert loaded["derived"]["b0_matches_printed"] == "text"

    def test_determinism_byte_identical(self, tmp_path):
        m1 = run_scenario("table2", {"M": 5, "order": "first"}, out_dir=tmp_path / "r1")
        m2 = run_scenario("table2", {"M": 5, "order": "first"}, out_dir=tmp_path / "r2")
        b1 = Path(m1["outputs"]["timeseries"]).read_bytes()
        b2 = Path(m2["outputs"]["timeseries"]).read_bytes()
        assert b1 == b2
        assert m1["config_hash"] == m2["config_hash"]

    def test_profiles_round_trip(self, tmp_path):
        sc = build_scenario("table2", M=5)
        series = run_simulation(sc.initial, sc.substrate, sc.params, sc.config)
        path = emit_timeseries(series, tmp_path / "ts.csv")
        back = TimeSeries.parse_rows(path.read_text().splitlines())
        for r0, r1 in zip(series.rows, back.rows):
            assert r0.b == r1.b and r0.energy == r1.energy

    def test_header_only_profiles(self, tmp_path):
        series = TimeSeries()
        path = emit_profiles(series, tmp_path / "profiles.csv")
        assert path.read_text() == "t,x,h,w\n"

    def test_breathing_snapshot_count(self):
        sc = build_scenario("breathing", n_periods=1.0, steps_per_span=100)
        series = run_simulation(sc.initial, sc.substrate, sc.params, sc.config, sc.schedule)
        # cadence pi/2 over [0, 2 pi]: snapshots at 0, pi/2, pi, 3pi/2, 2pi
        assert len(series.snapshots) == 5

    def test_env_var_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CAPILLARY_OUT_DIR", str(tmp_path / "envroot"))
        man = run_scenario("sessile", {"final_time": 0.05, "n_quad": 2000})
        assert str(tmp_path / "envroot") in man["outputs"]["trajectory"]

    def test_dae_outputs(self, tmp_path):
        man = run_scenario(
            "pendant", {"shape": "bulge", "final_time": 0.2, "n_quad": 500},
            out_dir=tmp_path,
        )
        traj = Path(man["outputs"]["trajectory"]).read_text().splitlines()
        assert traj[0] == "t,b,u_m,theta,lambda"
        prof = Path(man["outputs"]["profile"]).read_text().splitlines()
        assert prof[0] == "u,X"
        assert len(prof) == 502  # n_quad + 1 samples


class TestConfigFile:
    def _config(self):
        return {
            "order": "first",
            "dt": 0.02,
            "n_grid": 40,
            "final_time": 0.1,
            "params": {"beta": 1.0, "kappa": 0.2, "sigma": -0.5},
            "substrate": {"substrate": "flat"},
            "initial": {"a0": -1.0, "b0": 1.0, "coefficients": [1.0, 0.0, -1.0]},
        }

    def test_json_config(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(self._config()))
        rc = cli_main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "custom" / "timeseries.csv").exists()

    def test_toml_config(self, tmp_path):
        cfg = self._config()
        toml = "\n".join([
            'order = "first"', "dt = 0.02", "n_grid = 40", "final_time = 0.1",
            "[params]", "beta = 1.0", "kappa = 0.2", "sigma = -0.5",
            "[substrate]", 'substrate = "flat"',
            "[initial]", "a0 = -1.0", "b0 = 1.0", "coefficients = [1.0, 0.0, -1.0]",
        ])
        cfg_path = tmp_path / "run.toml"
        cfg_path.write_text(toml)
        resolved = resolve_config(__import__("capillary.harness_config", fromlist=["load_config_file"]).load_config_file(cfg_path))
        assert resolved["config"].dt == 0.02
        series = run_simulation(
            resolved["initial"], resolved["substrate"],
            resolved["params"], resolved["config"],
        )
        assert len(series.rows) == 6

    def test_polynomial_initial_is_lifted(self, tmp_path):
        resolved = resolve_config(self._config())
        h = np.asarray(resolved["initial"].heights)
        assert h[0] == 0.0 and h[-1] == 0.0


class TestCli:
    def test_run_exit_code_and_json(self, tmp_path, capsys):
        rc = cli_main(["run", "table2", "--M", "5", "--order", "first",
                       "--out-dir", str(tmp_path)])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert "manifest" in out and "final" in out

    def test_dae_subcommand(self, tmp_path, capsys):
        rc = cli_main(["dae", "pendant", "--shape", "bulge", "--T", "0.1",
                       "--n-quad", "500", "--out-dir", str(tmp_path)])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["final"]["b"] > 0

    def test_unknown_scenario_json_error(self, tmp_path, capsys):
        rc = cli_main(["converge", "volcano", "--M", "5"])
        assert rc != 0
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "UnknownScenarioError"
