"""Tests for the r1tc command-line interface."""

import json

import pytest
from click.testing import CliRunner

from r1tc.cli import _parse_anchor, cli


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


class TestCheck:
    def test_strong_instance(self, runner, data_dir):
        result = runner.invoke(cli, ["check", str(data_dir / "strong_3x3x3.txt")])
        assert result.exit_code == 0
        assert "strongly rank-1 completable: yes" in result.stdout
        assert "nullspace dimension: 1" in result.stdout

    def test_json(self, runner, data_dir):
        result = runner.invoke(cli, ["check", str(data_dir / "weak_3x3x3.txt"), "--out", "json"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["nullspace_dim"] == 2

    def test_rejects_order4(self, runner, data_dir):
        result = runner.invoke(cli, ["check", str(data_dir / "order4_2x2x2x2.txt")])
        assert result.exit_code == 1


class TestComplete:
    def test_json_output(self, runner, data_dir):
        result = runner.invoke(cli, ["complete", str(data_dir / "strong_3x3x3.txt"), "--out", "json"])
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["status"] == "completed"
        assert data["c"] == pytest.approx([-1, -1, 1], abs=1e-10)

    def test_text_output(self, runner, data_dir):
        result = runner.invoke(cli, ["complete", str(data_dir / "strong_3x3x3.txt")])
        assert result.exit_code == 0
        assert "status: completed" in result.stdout
        assert "c = (-1, -1, 1)" in result.stdout

    def test_moment_certifies_infeasibility(self, runner, data_dir):
        result = runner.invoke(
            cli, ["complete", str(data_dir / "infeasible_2x2x1.txt"), "-m", "moment", "--max-level", "3"]
        )
        assert result.exit_code == 4
        assert "certified infeasible (numerical)" in result.stdout

    def test_inconclusive_exit_code(self, runner, data_dir):
        result = runner.invoke(cli, ["complete", str(data_dir / "weak_3x3x3.txt"), "-m", "nuclear"])
        assert result.exit_code == 3
        assert "deferred nuclear: rank_failure" in result.stdout

    def test_order4_file(self, runner, data_dir):
        result = runner.invoke(
            cli, ["complete", str(data_dir / "order4_2x2x2x2.txt"), "-m", "iterative", "--ordering", "col"]
        )
        assert result.exit_code == 0
        assert "d = (1, 0.5)" in result.stdout

    def test_malformed_file(self, runner, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("dims 2 2 2\n1 1 x 1\n", encoding="utf-8")
        result = runner.invoke(cli, ["complete", str(path)])
        assert result.exit_code == 1

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["complete", str(tmp_path / "missing.txt")])
        assert result.exit_code == 2

    def test_config_file(self, runner, data_dir, tmp_path):
        config = tmp_path / "r1tc.yaml"
        config.write_text("unknown_key: 1\n", encoding="utf-8")
        result = runner.invoke(cli, ["--config", str(config), "complete", str(data_dir / "strong_3x3x3.txt")])
        assert result.exit_code == 1


class TestExperiment:
    def test_json(self, runner):
        result = runner.invoke(
            cli, ["experiment", "--mode", "iterative_strong", "--n", "3", "--trials", "2", "--out", "json"]
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["success_rate"] == 1.0
        assert len(data["trials"]) == 2

    def test_sweep_with_strong_is_rejected(self, runner):
        result = runner.invoke(
            cli, ["experiment", "--mode", "nuclear", "--n", "3", "--strong", "--sweep", "0.3,0.4"]
        )
        assert result.exit_code == 1

    def test_sweep_report(self, runner, tmp_path):
        report = tmp_path / "sweep"
        result = runner.invoke(
            cli,
            ["experiment", "--mode", "nuclear", "--n", "2", "--sweep", "1.0", "--trials", "1",
             "--report", str(report), "--out", "json"],
        )
        assert result.exit_code == 0
        assert json.loads(result.stdout)["minimum_density"] == 1.0
        assert (tmp_path / "sweep.md").exists()


class TestParseAnchor:
    def test_one_based(self):
        assert _parse_anchor("1,2,3") == (0, 1, 2)
        assert _parse_anchor(None) is None

    @pytest.mark.parametrize("text", ["1,2", "0,1,1", "a,b,c"])
    def test_invalid(self, text):
        import click

        with pytest.raises(click.BadParameter):
            _parse_anchor(text)
