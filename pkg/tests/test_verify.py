"""Empirical cross-checks: boundedness ratios, decay fits, sweep."""

from __future__ import annotations

import math
from dataclasses import replace

import pytest

from conftest import ODE_BENCHMARK_RATE, ode_benchmark
from impulse_stab import (
    CoefficientSpec,
    SweepFamily,
    empirical_boundedness,
    empirical_decay,
    falsification_sweep,
    sample_problem,
    validate,
)


class TestBoundedness:
    def test_benchmark_worst_ratio_is_e(self):
        """Trial 0 (x0 = 1, no history) peaks at the left limit e before
        the first impulse; every other trial is a scaled copy with a
        denominator at least as large."""
        result = empirical_boundedness(ode_benchmark(), trials=12, seed=3)
        assert result.worst_trial == 0
        assert 2.5 < result.k_emp < 2.9
        assert result.k_emp == pytest.approx(math.e, rel=1e-6)
        assert len(result.ratios) == 12
        assert result.ratios[result.worst_trial] == result.k_emp
        assert max(result.ratios) == result.k_emp

    def test_deterministic_in_seed(self):
        a = empirical_boundedness(ode_benchmark(), trials=8, seed=11)
        b = empirical_boundedness(ode_benchmark(), trials=8, seed=11)
        c = empirical_boundedness(ode_benchmark(), trials=8, seed=12)
        assert a.ratios == b.ratios
        assert a.ratios != c.ratios

    def test_forcing_is_ignored(self):
        forced = replace(ode_benchmark(), forcing=CoefficientSpec.constant(5.0))
        a = empirical_boundedness(forced, trials=4, seed=2)
        b = empirical_boundedness(ode_benchmark(), trials=4, seed=2)
        assert a.ratios == b.ratios

    def test_unbounded_problem_reports_large_ratio(self):
        growing = ode_benchmark()
        growing = replace(
            growing,
            impulses=replace(growing.impulses, gains=(1.5,), periodic_gain=1.5),
        )
        result = empirical_boundedness(growing, trials=2)
        assert result.k_emp > 100.0

    def test_needs_a_trial(self):
        with pytest.raises(ValueError, match="at least one trial"):
            empirical_boundedness(ode_benchmark(), trials=0)


class TestDecay:
    def test_benchmark_rate(self):
        fit = empirical_decay(ode_benchmark(horizon=12.0))
        assert not fit.trivial
        assert fit.lam_hat == pytest.approx(ODE_BENCHMARK_RATE, rel=0.02)
        assert fit.n_hat > 0.0

    def test_requires_enough_intervals(self):
        with pytest.raises(ValueError, match="at least 10 impulse intervals, got 5"):
            empirical_decay(ode_benchmark(horizon=5.0))


class TestSampling:
    def test_counter_based_determinism(self):
        family = SweepFamily()
        a = sample_problem(family, seed=7, sample_id=3)
        b = sample_problem(family, seed=7, sample_id=3)
        assert a.to_dict() == b.to_dict()
        other = sample_problem(family, seed=7, sample_id=4)
        assert a.to_dict() != other.to_dict()

    def test_samples_are_in_scope(self):
        family = SweepFamily()
        for i in range(8):
            p = sample_problem(family, seed=42, sample_id=i)
            assert validate(p, p.horizon).ok
            _, gains = p.impulses.unroll(p.horizon)
            assert all(g >= 0.0 for g in gains)


class TestSweep:
    def test_small_sweep_clean_and_logged(self, tmp_path):
        csv = tmp_path / "sweep.csv"
        family = SweepFamily(trials=4)
        bad = falsification_sweep(family, samples=12, seed=42, csv_path=csv)
        assert bad == []
        lines = csv.read_text().splitlines()
        assert lines[0] == "sample_id,criterion,verdict,bound,observed,ratio,flag"
        assert len(lines) > 1
        for line in lines[1:]:
            fields = line.split(",")
            assert len(fields) == 7
            assert fields[-1] == "ok"
        # every confirmed bound actually dominated its measurement
        for line in lines[1:]:
            fields = line.split(",")
            if not fields[1].endswith(":decay"):
                assert float(fields[4]) <= float(fields[3]) * 1.05
