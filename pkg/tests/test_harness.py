"""Tests for the experiment runner, rate fitting and sweeps."""

import json
import os
import shutil
import tempfile

import numpy as np
import pandas as pd
import pytest

from vragt.config import config_from_dict
from vragt.errors import InsufficientDataError, InvalidInputError, ValidationFailedError
from vragt.formatter import read_result_csv
from vragt.harness import (
    AGGREGATE_FILE,
    METADATA_FILE,
    ExperimentRunner,
    build_experiment,
    cell_name,
    fit_rate,
    metric_series,
    sweep,
)
from vragt.graph import Digraph
from vragt.parser import write_graph
from vragt.validator import ExperimentValidator

SMALL = {
    "graph": {"n": 4, "p": 0.0},
    "iterations": 100,
    "record_every": 10,
    "num_seeds": 2,
}


def small_config(**extra):
    data = dict(SMALL)
    data.update(extra)
    return config_from_dict(data)


def runner(config, **kwargs) -> ExperimentRunner:
    return ExperimentRunner(config, validator=ExperimentValidator(samples=100), **kwargs)


class TestBuildExperiment:
    """Test construction of graphs, problems and schedules from a config."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up temp files."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_generated(self):
        """Test the generated ring and ridge instance."""
        ex = build_experiment(small_config())
        assert ex.graph.n == 4
        assert ex.problem.n == 4
        assert ex.eigen is not None
        assert ex.noise_pull.d == 2

    def test_baseline_pins_schedules(self):
        """Test that R-Push-Pull runs on constant factors."""
        ex = build_experiment(small_config(algorithm="r_push_pull", sched={"gamma": 0.5}))
        assert ex.sched.at(1) == ex.sched.at(500) == (0.01, 0.01, 1.0)
        assert ex.sched.gamma == 0.5

    def test_graph_file_size_mismatch(self):
        """Test that the problem must match the graph file."""
        path = os.path.join(self.temp_dir, "g.txt")
        write_graph(Digraph.from_pairs(3, [(1, 0), (2, 1), (0, 2)]), path)
        instance = os.path.join(self.temp_dir, "inst.txt")
        with open(instance, 'w') as f:
            f.write("1 1 1 0\n2\n4\n")
        with pytest.raises(InvalidInputError):
            build_experiment(config_from_dict({"graph": {"file": path}, "problem": {"file": instance}}))


class TestExperimentRunner:
    """Test running seeds and writing result files."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up temp files."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def out(self, name: str = "run") -> str:
        return os.path.join(self.temp_dir, name)

    def test_writes_all_files(self):
        """Test seed CSVs, aggregate and metadata."""
        summary = runner(small_config()).run(self.out())

        for name in ("seed_0.csv", "seed_1.csv", AGGREGATE_FILE, METADATA_FILE):
            assert os.path.exists(os.path.join(self.out(), name))
        frame = read_result_csv(os.path.join(self.out(), "seed_0.csv"))
        assert list(frame.columns) == ["k", "opt_gap", "consensus", "tracking", "conservation_residual"]
        assert frame["k"].tolist() == [1] + list(range(10, 101, 10))
        assert summary.report.passed

    def test_aggregate_is_seed_mean(self):
        """Test that the aggregate mean matches the per-seed files."""
        runner(small_config()).run(self.out())
        seeds = [read_result_csv(os.path.join(self.out(), f"seed_{s}.csv")) for s in (0, 1)]
        agg = read_result_csv(os.path.join(self.out(), AGGREGATE_FILE))

        expected = (seeds[0]["opt_gap"] + seeds[1]["opt_gap"]) / 2
        np.testing.assert_allclose(agg["opt_gap_mean"], expected, rtol=1e-12)

    def test_rerun_is_byte_identical(self):
        """Test that the same config and seeds reproduce the aggregate exactly."""
        runner(small_config()).run(self.out("a"))
        runner(small_config()).run(self.out("b"))
        with open(os.path.join(self.out("a"), AGGREGATE_FILE), 'rb') as f:
            first = f.read()
        with open(os.path.join(self.out("b"), AGGREGATE_FILE), 'rb') as f:
            second = f.read()
        assert first == second

    def test_thread_count_does_not_change_results(self):
        """Test that the worker pool preserves results and seed order."""
        runner(small_config(num_seeds=3)).run(self.out("one"))
        runner(small_config(num_seeds=3), threads=2).run(self.out("two"))
        for name in ("seed_2.csv", AGGREGATE_FILE):
            with open(os.path.join(self.out("one"), name), 'rb') as f:
                first = f.read()
            with open(os.path.join(self.out("two"), name), 'rb') as f:
                second = f.read()
            assert first == second

    def test_metadata(self):
        """Test the metadata record."""
        runner(small_config(seeds=[3, 5])).run(self.out())
        with open(os.path.join(self.out(), METADATA_FILE), 'r') as f:
            meta = json.load(f)
        assert meta["seeds"] == [3, 5]
        assert meta["forced"] is False
        assert meta["warnings"] == []
        assert meta["config"]["graph"]["n"] == 4
        assert meta["validation"]["passed"] is True

    def test_validation_failure_blocks_run(self):
        """Test that a failed precondition stops the run."""
        config = small_config(sched={"alpha": {"e": 0.6}})
        with pytest.raises(ValidationFailedError):
            runner(config).run(self.out())
        assert not os.path.exists(os.path.join(self.out(), AGGREGATE_FILE))

    def test_force_records_warnings(self):
        """Test that forcing past validation is recorded."""
        config = small_config(sched={"alpha": {"e": 0.6}})
        summary = runner(config, force=True).run(self.out())
        with open(os.path.join(self.out(), METADATA_FILE), 'r') as f:
            meta = json.load(f)

        assert meta["forced"] is True
        assert meta["warnings"]
        assert summary.warnings == meta["warnings"]

    def test_baseline_run(self):
        """Test that R-Push-Pull writes the same file layout."""
        summary = runner(small_config(algorithm="r_push_pull", sched={"gamma": 0.5})).run(self.out())
        assert summary.report.predicted_rate is None
        assert len(summary.seed_files) == 2

    def test_invalid_threads(self):
        """Test that the pool needs at least one worker."""
        with pytest.raises(InvalidInputError):
            ExperimentRunner(small_config(), threads=0)


class TestFitRate:
    """Test log-log rate fitting."""

    def setup_method(self):
        """Set up a synthetic power law."""
        self.k = np.unique(np.round(np.logspace(0, 4, 40)))
        self.frame = pd.DataFrame({"k": self.k, "opt_gap": 3.0 * self.k ** -0.8})

    def test_exact_power_law(self):
        """Test that a clean power law is recovered."""
        fit = fit_rate(self.frame, "opt_gap", 1e2, 1e4)
        assert fit.slope == pytest.approx(-0.8, abs=1e-6)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-6)
        assert fit.r2 == pytest.approx(1.0)

    def test_constant_series(self):
        """Test a flat series."""
        frame = pd.DataFrame({"k": self.k, "opt_gap": np.full(len(self.k), 2.0)})
        fit = fit_rate(frame, "opt_gap", 1.0, 1e4)
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.predict(50.0) == pytest.approx(2.0)

    def test_refit_of_prediction(self):
        """Test that fitting the fitted curve gives the same line."""
        fit = fit_rate(self.frame, "opt_gap", 1e2, 1e4)
        again = fit_rate(pd.DataFrame({"k": self.k, "opt_gap": fit.predict(self.k)}), "opt_gap", 1e2, 1e4)
        assert again.slope == pytest.approx(fit.slope, abs=1e-9)
        assert again.intercept == pytest.approx(fit.intercept, abs=1e-9)

    def test_too_few_points(self):
        """Test that short windows are rejected."""
        with pytest.raises(InsufficientDataError):
            fit_rate(self.frame.head(5), "opt_gap", 1.0, 1e4)

    def test_nonpositive_points_dropped(self):
        """Test that zeros do not enter the logarithm."""
        frame = self.frame.copy()
        frame.loc[frame.index[-1], "opt_gap"] = 0.0
        fit = fit_rate(frame, "opt_gap", 1e2, 1e4)
        assert fit.slope == pytest.approx(-0.8, abs=1e-6)

    def test_invalid_window(self):
        """Test window bounds."""
        with pytest.raises(InvalidInputError):
            fit_rate(self.frame, "opt_gap", 100.0, 10.0)

    def test_composite_metric(self):
        """Test that a+b sums the named columns."""
        frame = self.frame.assign(consensus=self.frame["opt_gap"])
        fit = fit_rate(frame, "opt_gap+consensus", 1e2, 1e4)
        assert fit.intercept == pytest.approx(np.log(6.0), abs=1e-6)

    def test_aggregate_mean_preferred(self):
        """Test that aggregate frames are fitted on the mean column."""
        frame = pd.DataFrame({"k": self.k, "opt_gap_mean": self.k ** -0.5, "opt_gap_median": self.k ** -1.0})
        np.testing.assert_allclose(metric_series(frame, "opt_gap"), self.k ** -0.5)

    def test_unknown_metric(self):
        """Test that a missing column is reported with the metrics on hand."""
        with pytest.raises(InvalidInputError, match="available: opt_gap"):
            metric_series(self.frame, "tracking")

    def test_export_text(self):
        """Test the summary line."""
        text = fit_rate(self.frame, "opt_gap", 1e2, 1e4).export_text()
        assert text.startswith("opt_gap on [100, 10000]: slope -0.800000")


class TestSweep:
    """Test parameter sweeps."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up temp files."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_cell_name(self):
        """Test directory naming."""
        assert cell_name({"sched.gamma": 0.5}) == "sched.gamma=0.5"
        assert cell_name({"a": 1, "b": [1, 2]}) == "a=1__b=[1,2]"

    def test_product_of_values(self):
        """Test that every combination gets its own directory."""
        base = dict(SMALL, num_seeds=1, iterations=20)
        cells = sweep(base, {"sched.gamma": [0.5, 0.8], "noise.sigma2_pull": [1.0]}, self.temp_dir)

        assert len(cells) == 2
        names = sorted(os.listdir(self.temp_dir))
        assert names == ["sched.gamma=0.5__noise.sigma2_pull=1.0", "sched.gamma=0.8__noise.sigma2_pull=1.0"]
        assert cells[0].summary.aggregate["k"].iloc[-1] == 20

    def test_empty_parameters(self):
        """Test that a sweep needs a parameter."""
        with pytest.raises(InvalidInputError):
            sweep(dict(SMALL), {}, self.temp_dir)
