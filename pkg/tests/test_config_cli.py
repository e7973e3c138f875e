import json

import numpy as np
import pytest
import yaml

from prodnet import toy
from prodnet.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from prodnet.config import RunConfig
from prodnet.errors import ConfigError
from prodnet.tables import read_columns, write_rows


@pytest.fixture
def toy_dir(tmp_path):
    return toy.write_toy(tmp_path / "toy")


def edit_config(toy_dir, **changes):
    path = toy_dir / "toy.yaml"
    data = yaml.safe_load(path.read_text())
    for key, value in changes.items():
        if value is None:
            data.pop(key, None)
        else:
            data[key] = value
    path.write_text(yaml.safe_dump(data))
    return path


class TestConfig:
    def test_bundled_config_loads(self):
        cfg = RunConfig.load(toy.config_path())
        assert cfg.production_function().value == "ihs2"
        assert cfg.scenario_spec().supply == "s5"
        assert cfg.missing_paths() == []
        assert len(cfg.config_hash()) == 64

    def test_unknown_keys(self):
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"economy": {"io_table": "x.csv"}, "colour": "red"})
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"economy": {"io_table": "x.csv"}, "scenario": {"suply": "s1"}})
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({"economy": {"io_table": "x.csv"}, "params": {"tau": 0}})
        with pytest.raises(ConfigError):
            RunConfig.from_mapping({})

    def test_preset_and_overrides(self):
        cfg = RunConfig.load(toy.config_path()).with_overrides(kind="linear", scenario="stress")
        assert cfg.production_function().value == "linear"
        assert cfg.scenario_spec().overrides == {"D35": 0.7}
        assert cfg.scenario_name() == "stress"
        cfg2 = RunConfig.load(toy.config_path()).with_overrides(scenario="s3")
        assert cfg2.scenario_spec().supply == "s3"

    def test_hash_tracks_inputs(self, toy_dir):
        a = RunConfig.load(toy_dir / "toy.yaml").config_hash()
        with open(toy_dir / "inventory_targets.csv", "a") as fh:
            fh.write("")
        assert RunConfig.load(toy_dir / "toy.yaml").config_hash() == a
        cfg = RunConfig.load(toy_dir / "toy.yaml").with_overrides(kind="leontief")
        assert cfg.config_hash() != a


class TestCLI:
    def test_validate(self, toy_dir, capsys):
        assert main(["validate", "--config", str(toy_dir / "toy.yaml")]) == EXIT_OK
        assert "OK 5 industries" in capsys.readouterr().out

    def test_validate_reports_missing_file(self, toy_dir, capsys):
        (toy_dir / "ratings.csv").unlink()
        assert main(["validate", "--config", str(toy_dir / "toy.yaml")]) == EXIT_INVALID
        assert "missing file" in capsys.readouterr().out
        assert main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", str(toy_dir / "o")]) == EXIT_INVALID

    def test_validate_reports_bad_table(self, toy_dir, capsys):
        text = (toy_dir / "io_table.csv").read_text().splitlines()
        cells = text[1].split(",")
        cells[-1] = str(float(cells[-1]) * 2)
        text[1] = ",".join(cells)
        (toy_dir / "io_table.csv").write_text("\n".join(text) + "\n")
        assert main(["validate", "--config", str(toy_dir / "toy.yaml")]) == EXIT_INVALID
        assert "MarketClearingViolation" in capsys.readouterr().out

    def test_bad_config_is_invalid(self, toy_dir):
        path = edit_config(toy_dir, kind="cobb_douglas")
        assert main(["run", "--config", str(path)]) == EXIT_INVALID

    def test_runtime_failure_exit_code(self, toy_dir):
        cols = read_columns(toy_dir / "attributes.csv")
        rows = zip(cols["industry_code"], cols["rli"], cols["ess"], cols["ppi"], ["1.0"] * 5)
        write_rows(toy_dir / "attributes.csv", ["industry_code", "rli", "ess", "ppi", "eps_d"], rows)
        code = main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", str(toy_dir / "o")])
        assert code == EXIT_RUNTIME

    def test_run_outputs(self, toy_dir, tmp_path):
        out = tmp_path / "run"
        assert main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", str(out)]) == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["outputs"]) == {"trajectory.csv", "aggregate.csv", "monthly_panel.csv"}
        assert manifest["kind"] == "ihs2" and manifest["scenario"] == "s5"
        agg = read_columns(out / "aggregate.csv")
        assert len(agg["day"]) == 182

    def test_run_is_deterministic(self, toy_dir, tmp_path):
        for name in ("a", "b"):
            main(["run", "--config", str(toy_dir / "toy.yaml"), "--scenario", "stress", "--out", str(tmp_path / name)])
        for f in ("trajectory.csv", "aggregate.csv", "monthly_panel.csv", "manifest.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_relative_out_uses_working_directory(self, toy_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", "rel"]) == EXIT_OK
        assert (tmp_path / "rel" / "trajectory.csv").is_file()

    def test_calibrate(self, toy_dir, tmp_path):
        out = tmp_path / "cal"
        assert main(["calibrate", "--config", str(toy_dir / "toy.yaml"), "--out", str(out)]) == EXIT_OK
        cal = read_columns(out / "calibration.csv")
        assert cal["industry_code"] == list(toy.TOY_CODES)
        assert all(float(u) >= 1.0 for u in cal["upstreamness"])
        assert abs(sum(float(t) for t in cal["theta0"]) - 1.0) < 1e-12

    def test_sweep_grid(self, toy_dir, tmp_path):
        path = edit_config(toy_dir, sweep={"axes": {"tau": [5, 30], "gamma_h": [0.02, 0.05]}})
        out = tmp_path / "sw"
        assert main(["sweep", "--config", str(path), "--out", str(out)]) == EXIT_OK
        cols = read_columns(out / "sweep.csv")
        cells = {(t, g) for t, g in zip(cols["tau"], cols["gamma_h"])}
        assert len(cells) == 4
        assert len(cols["day"]) == 4 * 182

    def test_single_shock_demand_identical_across_kinds(self, toy_dir, tmp_path):
        path = edit_config(toy_dir, single_shock={"mode": "demand", "grid": [0.5], "kinds": ["leontief", "linear"],
                                                  "window_days": 20})
        out = tmp_path / "ss"
        assert main(["single-shock", "--config", str(path), "--out", str(out)]) == EXIT_OK
        cols = read_columns(out / "single_shock.csv")
        by_kind = {}
        for code, kind, frac in zip(cols["industry_code"], cols["kind"], cols["fraction"]):
            by_kind.setdefault(kind, {})[code] = float(frac)
        for code, v in by_kind["leontief"].items():
            assert v == pytest.approx(by_kind["linear"][code], rel=1e-9)
        assert (out / "regressions.csv").is_file()

    def test_metrics_identical_panels(self, toy_dir, tmp_path, capsys):
        run_out = tmp_path / "r"
        main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", str(run_out)])
        panel = run_out / "monthly_panel.csv"
        out = tmp_path / "m"
        assert main(["metrics", str(panel), str(panel), "--out", str(out)]) == EXIT_OK
        cols = read_columns(out / "metrics.csv")
        assert float(cols["afe_sectoral"][0]) == 0.0 and float(cols["afe_aggregate"][0]) == 0.0

    def test_empirical_panel_in_config(self, toy_dir, tmp_path):
        first = tmp_path / "first"
        main(["run", "--config", str(toy_dir / "toy.yaml"), "--out", str(first)])
        (toy_dir / "panel.csv").write_bytes((first / "monthly_panel.csv").read_bytes())
        path = edit_config(toy_dir, empirical_panel="panel.csv")
        out = tmp_path / "second"
        assert main(["run", "--config", str(path), "--out", str(out)]) == EXIT_OK
        cols = read_columns(out / "metrics.csv")
        assert float(cols["afe_sectoral"][0]) == 0.0

    def test_survey_and_matrix_inputs(self, toy_dir, tmp_path):
        codes = list(toy.TOY_CODES)
        rng = np.random.default_rng(0)
        write_rows(toy_dir / "survey.csv", ["industry_code", "year", "begin_stock", "end_stock", "turnover"],
                   [[c, y, *rng.uniform(5, 50, 2), 365.0] for c in codes[:-1] for y in (2017, 2018)])
        ratings = toy.generate()["ratings"]
        write_rows(toy_dir / "crit.csv", ["input_code", *codes], [[c, *row] for c, row in zip(codes, ratings)])
        economy = {"io_table": "io_table.csv", "criticality_matrix": "crit.csv",
                   "inventory_survey": "survey.csv", "service_codes": ["G47"]}
        path = edit_config(toy_dir, economy=economy)
        assert main(["validate", "--config", str(path)]) == EXIT_OK
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_OK
