"""Fundamental/Cauchy functions, the representation formula, envelope fits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from conftest import ODE_BENCHMARK_RATE, ode_benchmark
from impulse_stab import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    Problem,
    SolveOptions,
    Term,
    default_s_grid,
    fit_envelope,
    fit_trajectory_envelope,
    fundamental,
    fundamental_table,
    representation_solution,
    solve,
    table_to_csv,
)
from impulse_stab.fundamental import interval_maxima


def _benchmark_x(t: float, s: float) -> float:
    """Closed form for the benchmark: impulses in (s, t] each contribute a
    factor 0.25 on top of the exponential flow."""
    jumps = math.floor(t) - math.floor(s)
    return 0.25**jumps * math.exp(t - s)


class TestFundamentalBasics:
    def test_unit_start_and_zero_before(self):
        table = fundamental_table(
            ode_benchmark(), [0.0, 0.5, 1.0], SolveOptions(step=1e-2), horizon=3.0
        )
        for s in (0.0, 0.5, 1.0):
            assert table.eval(s, s) == 1.0
        assert table.eval(0.2, 0.5) == 0.0
        with pytest.raises(ValueError, match="not on the table grid"):
            table.eval(1.0, 0.25)

    def test_closed_form_grid(self):
        s_grid = [0.0, 0.5, 1.0, 1.5, 2.0]
        table = fundamental_table(
            ode_benchmark(), s_grid, SolveOptions(step=1e-3), horizon=3.0
        )
        for s in s_grid:
            for t in (2.25, 2.75, 3.0):
                assert table.eval(t, s) == pytest.approx(
                    _benchmark_x(t, s), rel=1e-9
                ), (t, s)

    def test_impulse_at_start_not_applied(self):
        """X(t, tau_j) applies only the jumps strictly after tau_j."""
        run = fundamental(ode_benchmark(), 1.0, SolveOptions(step=1e-3), horizon=1.9)
        assert run.eval(1.9) == pytest.approx(math.exp(0.9), rel=1e-10)

    def test_left_limit_identity_at_impulse(self):
        """X(t, tau - eps) -> B X(t, tau) as eps -> 0."""
        eps = 1e-6
        table = fundamental_table(
            ode_benchmark(), [1.0 - eps, 1.0], SolveOptions(step=1e-3), horizon=3.0
        )
        lhs = table.eval(3.0, 1.0 - eps)
        rhs = 0.25 * table.eval(3.0, 1.0)
        assert lhs == pytest.approx(rhs, rel=3.0 * eps)

    def test_cauchy_variant_ignores_impulses(self):
        run = fundamental(
            ode_benchmark(), 0.0, SolveOptions(step=1e-3), horizon=2.0, impulsive=False
        )
        assert run.eval(2.0) == pytest.approx(math.exp(2.0), rel=1e-10)
        assert not bool(run.is_impulse.any())

    def test_delayed_fundamental_with_jump(self):
        """Hand recursion: a = 0.5, lag 1, one impulse at 1.5 with gain 0.5."""
        p = Problem(
            terms=(Term(CoefficientSpec.constant(0.5), DelaySpec.constant_lag(1.0)),),
            impulses=ImpulseSchedule(times=(1.5,), gains=(0.5,)),
            x0=0.0,
            horizon=2.5,
        )
        run = fundamental(p, 0.0, SolveOptions(step=1e-2), horizon=2.5)
        assert run.eval(0.5) == pytest.approx(1.0, abs=1e-13)
        assert run.eval(1.25) == pytest.approx(1.125, abs=1e-13)
        assert run.eval_left(1.5) == pytest.approx(1.25, abs=1e-13)
        assert run.eval(1.5) == pytest.approx(0.625, abs=1e-13)
        assert run.eval(1.75) == pytest.approx(0.75, abs=1e-13)
        assert run.eval(2.5) == pytest.approx(1.15625, abs=1e-12)

    def test_delayed_fundamental_polynomial_recursion(self):
        """Without impulses X(t, 0) follows the step-by-step polynomial
        recursion with zero prehistory."""
        a = 0.7
        p = Problem(
            terms=(Term(CoefficientSpec.constant(a), DelaySpec.constant_lag(1.0)),),
            x0=0.0,
            horizon=3.0,
        )
        segments = []
        prev = Polynomial([0.0])
        val = 1.0
        for _ in range(3):
            seg = (a * prev).integ() + val
            segments.append(seg)
            val = seg(1.0)
            prev = seg
        run = fundamental(p, 0.0, SolveOptions(step=1e-2), horizon=3.0)
        for probe in (0.4, 1.0, 1.6, 2.0, 2.4, 3.0):
            j = min(int(probe), 2)
            want = segments[j](probe - j)
            assert run.eval(probe) == pytest.approx(want, abs=5e-13), probe


class TestRepresentation:
    def _forced_problem(self) -> Problem:
        return Problem(
            terms=(Term(CoefficientSpec.constant(0.5), DelaySpec.constant_lag(0.4)),),
            impulses=ImpulseSchedule(times=(1.0, 2.0), gains=(0.5, 0.5)),
            history=HistorySpec.constant(0.8),
            forcing=CoefficientSpec.constant(0.3),
            x0=1.0,
            horizon=2.4,
        )

    def test_matches_direct_solution(self):
        p = self._forced_problem()
        opts = SolveOptions(step=2e-3)
        grid = default_s_grid(p, 2.4, 8.0 * opts.step)
        table = fundamental_table(p, grid, opts, horizon=2.4)
        direct = solve(p, opts, horizon=2.4)
        for t in (0.7, 1.0, 1.3, 2.0, 2.3):
            want = direct.eval(t)
            got = representation_solution(p, table, t, opts)
            assert abs(got - want) / (1.0 + abs(want)) < 1e-4, t

    def test_jump_forcing_is_linear_in_alpha(self):
        p = self._forced_problem()
        opts = SolveOptions(step=2e-3)
        grid = default_s_grid(p, 2.4, 8.0 * opts.step)
        table = fundamental_table(p, grid, opts, horizon=2.4)
        base = representation_solution(p, table, 2.3, opts)
        shifted = representation_solution(
            p, table, 2.3, opts, jump_forcing=[(1.0, 0.25), (2.0, -0.5)]
        )
        want = base + 0.25 * table.eval(2.3, 1.0) - 0.5 * table.eval(2.3, 2.0)
        assert shifted == pytest.approx(want, rel=1e-14)

    def test_grid_requirements(self):
        p = self._forced_problem()
        opts = SolveOptions(step=1e-3)
        coarse = fundamental_table(p, [0.0, 1.0, 2.0, 2.4], opts, horizon=2.4)
        with pytest.raises(ValueError, match="too coarse"):
            representation_solution(p, coarse, 2.4, opts)
        gapped = fundamental_table(
            p, [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.1, 1.3, 2.0, 2.4], opts, horizon=2.4
        )
        with pytest.raises(ValueError, match="must contain impulse time 1"):
            representation_solution(p, gapped, 1.3, SolveOptions(step=0.05))
        offset = fundamental_table(p, [0.2, 0.4, 0.6], opts, horizon=2.4)
        with pytest.raises(ValueError, match="must start at 0"):
            representation_solution(p, offset, 0.6, SolveOptions(step=0.05))


class TestEnvelopes:
    def test_fit_on_benchmark_table(self):
        table = fundamental_table(
            ode_benchmark(), [0.0, 0.5, 1.0], SolveOptions(step=1e-2), horizon=10.0
        )
        fit = fit_envelope(table)
        assert fit.lam_hat == pytest.approx(ODE_BENCHMARK_RATE, rel=0.02)
        # the amplitude is inflated to dominate every sample
        for s, run in zip(table.s_grid, table.runs):
            u = run.t - float(s)
            bound = fit.n_hat * np.exp(-fit.lam_hat * u)
            assert np.all(np.abs(run.x) <= bound * (1.0 + 1e-12))

    def test_fit_trajectory(self):
        traj = solve(ode_benchmark(12.0), SolveOptions(step=1e-2), horizon=12.0)
        fit = fit_trajectory_envelope(traj)
        assert fit.lam_hat == pytest.approx(ODE_BENCHMARK_RATE, rel=0.02)
        assert not fit.trivial

    def test_trivial_and_insufficient(self):
        p = Problem(
            terms=(Term(CoefficientSpec.constant(0.5), DelaySpec.constant_lag(0.5)),),
            impulses=ImpulseSchedule(times=(1.0,), gains=(0.5,), period=1.0, periodic_gain=0.5),
            history=HistorySpec.zero(),
            x0=0.0,
        )
        zero_run = solve(p, SolveOptions(step=1e-2), horizon=5.0)
        fit = fit_trajectory_envelope(zero_run)
        assert fit.trivial and fit.n_hat == 0.0
        short = solve(ode_benchmark(), SolveOptions(step=1e-2), horizon=2.0)
        with pytest.raises(ValueError, match="insufficient data"):
            fit_trajectory_envelope(short)

    def test_interval_maxima_catches_left_limits(self):
        run = solve(ode_benchmark(), SolveOptions(step=1e-2), horizon=2.5)
        maxima = interval_maxima(run, 0.0)
        # on [0, 1] the supremum is the left limit e at the first jump
        u, v = maxima[0]
        assert u == pytest.approx(1.0, abs=1e-12)
        assert v == pytest.approx(math.e, rel=1e-9)


class TestGridAndCsv:
    def test_default_s_grid(self):
        p = Problem(
            terms=(Term(CoefficientSpec.piecewise([0.7], [0.5, 0.2]), DelaySpec.identity()),),
            impulses=ImpulseSchedule(times=(1.0, 2.0), gains=(0.5, 0.5)),
            forcing=CoefficientSpec.piecewise([1.3], [0.0, 0.1]),
            x0=1.0,
        )
        grid = default_s_grid(p, 3.0, 0.5)
        assert grid[0] == 0.0 and grid[-1] == 3.0
        assert grid == sorted(grid)
        for must in (0.7, 1.0, 1.3, 2.0):
            assert must in grid
        assert max(b - a for a, b in zip(grid, grid[1:])) <= 0.5 + 1e-12
        with pytest.raises(ValueError, match="spacing must be positive"):
            default_s_grid(p, 3.0, 0.0)

    def test_table_to_csv(self, tmp_path):
        table = fundamental_table(
            ode_benchmark(), [0.0, 1.0], SolveOptions(step=0.25), horizon=2.0
        )
        path = tmp_path / "table.csv"
        table_to_csv(table, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "s,t,X"
        assert len(lines) == 1 + sum(len(r.t) for r in table.runs)


class TestPositivity:
    def test_nonnegative_data_gives_positive_kernel(self):
        p = Problem(
            terms=(
                Term(CoefficientSpec.constant(0.4), DelaySpec.constant_lag(0.3)),
                Term(CoefficientSpec.table([(0.0, 0.1), (2.0, 0.6)]), DelaySpec.identity()),
            ),
            impulses=ImpulseSchedule(times=(0.8,), gains=(0.7,), period=0.8, periodic_gain=0.7),
            x0=1.0,
        )
        table = fundamental_table(
            p, [0.0, 0.4, 0.8, 1.6], SolveOptions(step=2e-3), horizon=4.0
        )
        for run in table.runs:
            assert float(np.min(run.x)) >= -1e-12
            assert float(np.min(run.x_left)) >= -1e-12
