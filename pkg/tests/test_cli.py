import json

import pytest
from click.testing import CliRunner

from cokfluct.cli import RunConfig, main
from cokfluct.ensembles import ConfigError


def make_config(tmp_path, **overrides):
    cfg = {
        "schema_version": 1,
        "ensemble": {
            "p": 2,
            "kind": "block_triangular",
            "k": 4,
            "block_sizes": [8, 8, 8, 8],
            "A_dist": {"kind": "uniform_range", "low": -100, "high": 100},
            "B_dist": {"kind": "uniform_range", "low": -100, "high": 100},
            "master_seed": 12345,
        },
        "trials": 100,
        "groups": [{"p": 2, "lambda": [1]}],
        "lambdas": [[1]],
        "d": 1,
        "output_dir": str(tmp_path / "run"),
        "reproducible": True,
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestRunConfig:
    def test_round_trip(self, tmp_path):
        path = make_config(tmp_path)
        cfg = RunConfig.from_dict(json.loads(path.read_text()))
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_missing_fields_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"schema_version": 1})
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"schema_version": 99, "ensemble": {}, "trials": 1})


class TestSimulate:
    def test_smoke_outputs(self, tmp_path):
        runner = CliRunner()
        res = runner.invoke(main, ["simulate", "--config", str(make_config(tmp_path))])
        assert res.exit_code == 0, res.output
        out = tmp_path / "run"
        for name in ("config.json", "report.json", "hom_moments.csv", "l_moments.csv", "centered_histogram.csv"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["counts"]["included"] == 100
        assert "meta" not in report  # reproducible strips the timestamp

    def test_byte_identical_reruns(self, tmp_path):
        runner = CliRunner()
        cfg = make_config(tmp_path)
        assert runner.invoke(main, ["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")]).exit_code == 0
        assert runner.invoke(main, ["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--workers", "2"]).exit_code == 0
        for name in ("report.json", "hom_moments.csv", "l_moments.csv", "centered_histogram.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_flag_overrides(self, tmp_path):
        runner = CliRunner()
        cfg = make_config(tmp_path)
        res = runner.invoke(
            main,
            ["simulate", "--config", str(cfg), "--trials", "7", "--out", str(tmp_path / "c")],
        )
        assert res.exit_code == 0
        report = json.loads((tmp_path / "c" / "report.json").read_text())
        assert report["trials"] == 7

    def test_unbalanced_distribution_exits_2(self, tmp_path):
        runner = CliRunner()
        cfg = make_config(
            tmp_path,
            ensemble={
                "p": 2, "kind": "matrix_product", "k": 2, "n": 4,
                "A_dist": {"kind": "constant", "value": 0},
                "master_seed": 1,
            },
        )
        res = runner.invoke(main, ["simulate", "--config", str(cfg)])
        assert res.exit_code == 2
        assert "balanced" in res.output

    def test_malformed_json_exits_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        res = CliRunner().invoke(main, ["simulate", "--config", str(path)])
        assert res.exit_code == 2

    def test_missing_config_exits_2(self):
        res = CliRunner().invoke(main, ["simulate"])
        assert res.exit_code == 2


class TestVerify:
    @pytest.mark.parametrize("suite", ["identity", "balanced", "chains", "decomposition"])
    def test_suites_pass(self, suite):
        res = CliRunner().invoke(main, ["verify", suite])
        assert res.exit_code == 0, res.output
        assert "FAIL" not in res.output

    def test_cok_suite(self):
        res = CliRunner().invoke(main, ["verify", "cok"])
        assert res.exit_code == 0, res.output
        assert "100 random instances" in res.output

    def test_unknown_suite_rejected(self):
        res = CliRunner().invoke(main, ["verify", "nope"])
        assert res.exit_code == 2


class TestTheory:
    def test_values(self):
        res = CliRunner().invoke(
            main,
            ["theory", "--group", "2:1", "--group", "2:1,1", "--lam", "1", "--p", "2"],
        )
        assert res.exit_code == 0
        assert "G=2:(1)  ell=1  c=[1, 1]  limit=1" in res.output
        assert "G=2:(1,1)  ell=2  c=[1, 4, 3]  limit=3/2" in res.output
        assert "moment=1" in res.output

    def test_lattice_guard_exits_2(self):
        res = CliRunner().invoke(main, ["theory", "--group", "2:13"])
        assert res.exit_code == 2


class TestCompare:
    def test_self_compare(self, tmp_path):
        runner = CliRunner()
        cfg = make_config(tmp_path)
        runner.invoke(main, ["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")])
        res = runner.invoke(
            main,
            ["compare", str(tmp_path / "x" / "report.json"), str(tmp_path / "x" / "report.json")],
        )
        assert res.exit_code == 0
        assert json.loads(res.output)["tv_distance"] == 0.0

    def test_mismatched_reports_exit_2(self, tmp_path):
        runner = CliRunner()
        cfg_a = make_config(tmp_path)
        runner.invoke(main, ["simulate", "--config", str(cfg_a), "--out", str(tmp_path / "a")])
        cfg_b = make_config(tmp_path, d=2, lambdas=[[1]])
        runner.invoke(main, ["simulate", "--config", str(cfg_b), "--out", str(tmp_path / "b")])
        res = runner.invoke(
            main,
            ["compare", str(tmp_path / "a" / "report.json"), str(tmp_path / "b" / "report.json")],
        )
        assert res.exit_code == 2
