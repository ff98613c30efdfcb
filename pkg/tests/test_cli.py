"""Tests for the command-line interface."""

import json
import os
import shutil
import tempfile

import numpy as np
import pandas as pd
from click.testing import CliRunner

from vragt.cli import EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_VALIDATION, cli

SMALL = {
    "graph": {"n": 10, "p": 0.3},
    "iterations": 50,
    "record_every": 10,
    "num_seeds": 2,
}


class TestCli:
    """Test the vragt commands end to end."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up temp files."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write_config(self, data, name: str = "config.json") -> str:
        path = os.path.join(self.temp_dir, name)
        with open(path, 'w') as f:
            f.write(data if isinstance(data, str) else json.dumps(data))
        return path

    def test_version(self):
        """Test the version option."""
        result = self.runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_run(self):
        """Test a small run."""
        out = os.path.join(self.temp_dir, "out")
        result = self.runner.invoke(cli, ["run", "-c", self.write_config(SMALL), "-o", out, "--seeds", "3"])

        assert result.exit_code == 0, result.output
        assert "3 seed file(s)" in result.output
        assert sorted(os.listdir(out)) == [
            "aggregate.csv", "metadata.json", "seed_0.csv", "seed_1.csv", "seed_2.csv",
        ]

    def test_validate_passes(self):
        """Test that the default schedules validate with rate 0.3."""
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(SMALL)])
        assert result.exit_code == 0, result.output
        assert "Status: PASSED" in result.output
        assert "Predicted rate exponent: 0.3" in result.output

    def test_validate_json(self):
        """Test the JSON report and saved copy."""
        saved = os.path.join(self.temp_dir, "report.json")
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(SMALL), "-f", "json", "-o", saved])
        assert result.exit_code == 0, result.output
        with open(saved, 'r') as f:
            assert json.load(f)["passed"] is True

    def test_validate_equal_exponents(self):
        """Test that e_alpha = e_beta exits with the validation code."""
        config = dict(SMALL, sched={"alpha": {"e": 0.6}})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_VALIDATION
        assert "lim alpha/beta = 0" in result.output

    def test_validate_disconnected_graph(self):
        """Test that two disjoint cycles fail validation."""
        lines = ["n 6", "2 1", "3 2", "1 3", "5 4", "6 5", "4 6"]
        graph = os.path.join(self.temp_dir, "g.txt")
        with open(graph, 'w') as f:
            f.write("\n".join(lines) + "\n")
        config = dict(SMALL, graph={"file": graph})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_VALIDATION

    def test_run_refuses_failed_validation(self):
        """Test that run stops on failed preconditions without --force."""
        config = dict(SMALL, sched={"alpha": {"e": 0.6}})
        out = os.path.join(self.temp_dir, "out")
        result = self.runner.invoke(cli, ["run", "-c", self.write_config(config), "-o", out])
        assert result.exit_code == EXIT_VALIDATION

    def test_unknown_key(self):
        """Test that a typo in the config exits with the config code."""
        config = dict(SMALL, graph={"nodes": 10})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_CONFIG
        assert "Configuration error" in result.output

    def test_malformed_json(self):
        """Test that unreadable JSON exits with the config code."""
        out = os.path.join(self.temp_dir, "out")
        result = self.runner.invoke(cli, ["run", "-c", self.write_config("{oops"), "-o", out])
        assert result.exit_code == EXIT_CONFIG

    def test_single_agent_ring(self):
        """Test that a generated ring with one agent is a config error."""
        config = dict(SMALL, graph={"n": 1})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_CONFIG

    def test_missing_graph_file(self):
        """Test that a nonexistent edge-list file is an input error."""
        config = dict(SMALL, graph={"file": os.path.join(self.temp_dir, "absent.txt")})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_CONFIG
        assert "could not read" in result.output

    def test_missing_problem_file(self):
        """Test that a nonexistent instance file is an input error."""
        config = dict(SMALL, problem={"file": os.path.join(self.temp_dir, "absent.txt")})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_CONFIG

    def test_self_loop_in_edge_list(self):
        """Test that a self-loop in the edge list is an input error."""
        graph = os.path.join(self.temp_dir, "g.txt")
        with open(graph, 'w') as f:
            f.write("n 3\n1 1\n2 1\n3 2\n1 3\n")
        config = dict(SMALL, graph={"file": graph})
        result = self.runner.invoke(cli, ["validate", "-c", self.write_config(config)])
        assert result.exit_code == EXIT_CONFIG
        assert "self-loop" in result.output

    def test_divergence(self):
        """Test that a diverging run exits with the divergence code."""
        config = dict(
            SMALL,
            iterations=1000,
            algorithm="r_push_pull",
            problem={"r": 50.0},
            baseline={"beta": 0.5, "alpha": 1.0},
        )
        out = os.path.join(self.temp_dir, "out")
        result = self.runner.invoke(cli, ["run", "-c", self.write_config(config), "-o", out, "--force"])
        assert result.exit_code == EXIT_DIVERGENCE
        assert "Diverged" in result.output

    def test_fit_rate(self):
        """Test fitting a CSV from the command line."""
        k = np.arange(10, 210, 10)
        path = os.path.join(self.temp_dir, "curve.csv")
        pd.DataFrame({"k": k, "opt_gap": 5.0 * k ** -0.5}).to_csv(path, index=False, float_format="%.17g")

        result = self.runner.invoke(cli, ["fit-rate", path, "--k-lo", "10", "--k-hi", "200", "--json"])
        assert result.exit_code == 0, result.output
        fit = json.loads(result.output)
        assert abs(fit["slope"] + 0.5) < 1e-9
        assert fit["points"] == 20

    def test_fit_rate_too_few_points(self):
        """Test that a narrow window is an error."""
        path = os.path.join(self.temp_dir, "curve.csv")
        pd.DataFrame({"k": [1, 2, 3], "opt_gap": [1.0, 0.5, 0.3]}).to_csv(path, index=False)
        result = self.runner.invoke(cli, ["fit-rate", path, "--k-lo", "1", "--k-hi", "3"])
        assert result.exit_code == 1
        assert "Error:" in result.output

    def test_sweep(self):
        """Test a two-cell sweep."""
        out = os.path.join(self.temp_dir, "sweep")
        result = self.runner.invoke(cli, [
            "sweep", "-c", self.write_config(SMALL), "-o", out,
            "-p", "sched.gamma=0.5,0.8", "--seeds", "1",
        ])
        assert result.exit_code == 0, result.output
        assert sorted(os.listdir(out)) == ["sched.gamma=0.5", "sched.gamma=0.8"]
        assert os.path.exists(os.path.join(out, "sched.gamma=0.5", "seed_0.csv"))
        assert "2 cell(s)" in result.output

    def test_sweep_bad_param(self):
        """Test that --param needs key=values."""
        result = self.runner.invoke(cli, ["sweep", "-o", self.temp_dir, "-p", "sched.gamma"])
        assert result.exit_code == EXIT_CONFIG
