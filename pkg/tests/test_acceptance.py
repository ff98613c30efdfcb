"""Long Monte Carlo convergence checks.

These take minutes; deselect them with ``pytest -m "not slow"``.
"""

import numpy as np
import pandas as pd
import pytest

from vragt.algorithm import run_vra_tracking
from vragt.config import config_from_dict
from vragt.formatter import AggregateFormatter
from vragt.graph import build_weights, ring_plus_random
from vragt.harness import ExperimentRunner, fit_rate
from vragt.noise import Channel, NoiseModel
from vragt.schedules import PowerLawSchedule

pytestmark = pytest.mark.slow

THREADS = 4


def aggregate(config) -> pd.DataFrame:
    runner = ExperimentRunner(config, threads=THREADS)
    return AggregateFormatter().aggregate(runner.run_seeds(config.seed_list()))


def at(frame: pd.DataFrame, column: str, k: int) -> float:
    return float(frame.loc[frame["k"] == k, column].iloc[0])


class TestConvergenceRates:
    """Empirical rates against their predicted exponents."""

    def test_aggregation_error_rate(self):
        """Test that the tracking error decays like eta_k."""
        w = build_weights(ring_plus_random(10, 0.3, np.random.default_rng(0)))
        curve = run_vra_tracking(
            w, PowerLawSchedule(a=0.5, e=0.8), NoiseModel(25.0, channel=Channel.PUSH, d=2),
            T=10_000, trials=200, record_every=100,
        )
        frame = pd.DataFrame({"k": curve.k, "tracking": curve.tracking})
        fit = fit_rate(frame, "tracking", 1e2, 1e4)
        assert -0.95 <= fit.slope <= -0.65

    def test_composite_error_rate(self):
        """Test the optimality-plus-consensus decay on the default schedules."""
        config = config_from_dict({
            "graph": {"n": 10},
            "problem": {"r": 0.5},
            "noise": {"sigma2_pull": 1.0, "sigma2_push": 1.0},
            "iterations": 100_000,
            "record_every": 1000,
            "num_seeds": 50,
        })
        fit = fit_rate(aggregate(config), "opt_gap+consensus", 1e3, 1e5)
        assert -0.45 <= fit.slope <= -0.15

    def test_growing_noise_still_converges(self):
        """Test convergence under slowly growing noise variance."""
        config = config_from_dict({
            "graph": {"n": 10},
            "noise": {"sigma2_pull": 1.0, "sigma2_push": 1.0, "growth_pull": 0.1, "growth_push": 0.1},
            "iterations": 100_000,
            "record_every": 1000,
            "num_seeds": 20,
        })
        frame = aggregate(config)
        assert at(frame, "opt_gap_median", 100_000) < 0.01 * at(frame, "opt_gap_median", 100)


class TestBaselineComparison:
    """VRA-GT against R-Push-Pull on the default network."""

    def test_crossover(self):
        """Test that the baseline starts faster but stalls at its noise floor."""
        common = {"iterations": 20_000, "record_every": 100, "num_seeds": 20}
        vra = aggregate(config_from_dict(common))
        rpp = aggregate(config_from_dict(dict(
            common, algorithm="r_push_pull", sched={"gamma": 0.5},
            baseline={"beta": 0.01, "alpha": 0.01},
        )))

        assert at(rpp, "opt_gap_mean", 100) < at(vra, "opt_gap_mean", 100)
        tail = rpp.loc[rpp["k"] >= 15_000, "opt_gap_mean"].mean()
        assert at(vra, "opt_gap_mean", 20_000) < tail
