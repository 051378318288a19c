"""Gain synthesis: certified-by-construction designs and failure modes."""

from __future__ import annotations

import math

import pytest

from impulse_stab import (
    CoefficientSpec,
    DelaySpec,
    ImpulseSchedule,
    ImpulseStabError,
    InfeasibleError,
    Problem,
    SynthesisRequest,
    Term,
    check_thm3,
    check_thm5,
    synthesize_per_interval,
    synthesize_uniform,
)


def plant(a: float = 0.5, delta: float = 0.5, horizon: float | None = 12.0) -> Problem:
    """Impulse-free scalar plant; synthesis supplies the schedule."""
    delay = DelaySpec.identity() if delta == 0.0 else DelaySpec.constant_lag(delta)
    return Problem(
        terms=(Term(CoefficientSpec.constant(a), delay),),
        impulses=ImpulseSchedule(),
        x0=1.0,
        horizon=horizon,
    )


class TestUniform:
    def test_stable_target_gain_formula(self):
        result = synthesize_uniform(plant())
        assert result.sigma == 1.0
        assert result.gains == (pytest.approx(0.45, abs=1e-15),)
        assert result.reasons == ()
        sched = result.problem.impulses
        assert sched.times == (1.0,) and sched.period == 1.0
        assert sched.gains == result.gains and sched.periodic_gain == result.gains[0]
        assert result.problem.horizon == 12.0
        assert result.report.criterion == "thm5"
        assert result.report.verdict == "exponentially-stable"
        assert result.report.margin == pytest.approx(0.05, abs=1e-12)

    def test_exponential_target_reserves_residual(self):
        result = synthesize_uniform(plant(), SynthesisRequest(target="exponential"))
        # eps = (1 - 0.9)(1 - 0.5)/2 = 0.025, gain = 0.9 (0.5 - 0.025)
        assert result.gains[0] == pytest.approx(0.4275, abs=1e-15)
        assert result.report.verdict == "exponentially-stable"
        assert result.report.margin == pytest.approx(0.0725, abs=1e-12)

    def test_report_matches_fresh_check(self):
        """The emitted certificate must be exactly what a later check of
        the synthesized problem reproduces."""
        for req in (None, SynthesisRequest(target="exponential", safety=0.7)):
            result = synthesize_uniform(plant(), req)
            fresh = check_thm5(result.problem)
            assert fresh.verdict == result.report.verdict
            assert fresh.margin == result.report.margin
            assert fresh.certificate == result.report.certificate

    def test_explicit_spacing(self):
        result = synthesize_uniform(plant(), SynthesisRequest(spacing=0.5))
        assert result.sigma == 0.5
        # q = 0.5 * 0.5 = 0.25 over the half-unit window
        assert result.gains[0] == pytest.approx(0.9 * 0.75, abs=1e-15)
        assert result.problem.impulses.period == 0.5

    def test_spacing_shrinks_until_feasible(self):
        result = synthesize_uniform(plant(a=1.5, delta=0.0, horizon=None))
        want_sigma = (1.0 - 1e-6) / 1.5
        assert result.sigma == pytest.approx(want_sigma, rel=1e-12)
        assert result.reasons[0].startswith("spacing shrunk to")
        assert any(r.startswith("near-zero gains") for r in result.reasons)
        assert result.problem.horizon == pytest.approx(20.0 * result.sigma)
        assert result.report.ok

    def test_fixed_spacing_infeasible(self):
        with pytest.raises(InfeasibleError, match=r"infeasible: q = 1\.2 > 1"):
            synthesize_uniform(
                plant(a=0.6), SynthesisRequest(spacing=2.0, allow_shrink=False)
            )
        assert issubclass(InfeasibleError, ImpulseStabError)

    def test_window_scan_covers_coefficient_tail(self):
        """A coefficient that grows past its last breakpoint must be
        measured on the tail, not only near zero."""
        p = Problem(
            terms=(
                Term(CoefficientSpec.piecewise([2.0], [0.2, 0.8]), DelaySpec.constant_lag(0.3)),
            ),
            impulses=ImpulseSchedule(),
            x0=1.0,
            horizon=None,
        )
        result = synthesize_uniform(p)
        assert result.sigma == 1.0
        assert result.gains[0] == pytest.approx(0.9 * 0.2, abs=1e-15)
        assert result.report.verdict == "exponentially-stable"

    def test_request_validation(self):
        with pytest.raises(ValueError, match="target must be"):
            SynthesisRequest(target="weird")
        with pytest.raises(ValueError, match="safety must lie strictly"):
            SynthesisRequest(safety=1.0)
        with pytest.raises(ValueError, match="spacing must be positive"):
            SynthesisRequest(spacing=-1.0)
        with pytest.raises(ValueError, match="number or 'auto'"):
            SynthesisRequest(spacing="fast")

    def test_rejects_signed_coefficients(self):
        with pytest.raises(ValueError, match="nonnegative coefficients"):
            synthesize_uniform(plant(a=-0.5))


class TestPerInterval:
    def test_equal_grid_gains(self):
        result = synthesize_per_interval(plant(a=0.4, delta=0.25), (1.0, 2.0, 3.0))
        cap = math.exp(-0.3) - 0.1
        assert result.sigma is None
        assert result.gains == tuple(pytest.approx(0.9 * cap, rel=1e-15) for _ in range(3))
        assert result.problem.impulses.times == (1.0, 2.0, 3.0)
        assert result.problem.impulses.period is None
        assert result.problem.horizon == 3.0
        assert result.report.criterion == "thm3"
        assert result.report.verdict == "stable"
        # (0.9 cap + 0.1) e^{0.3} = 0.9 + 0.01 e^{0.3}
        assert result.report.margin == pytest.approx(
            0.1 - 0.01 * math.exp(0.3), abs=1e-14
        )

    def test_report_matches_fresh_check(self):
        result = synthesize_per_interval(plant(a=0.4, delta=0.25), (1.0, 2.0, 3.0))
        fresh = check_thm3(result.problem)
        assert fresh.margin == result.report.margin
        assert fresh.certificate == result.report.certificate

    def test_virtual_last_interval_mirrors_final_gap(self):
        result = synthesize_per_interval(plant(a=0.3, delta=0.5), (1.0, 2.0, 4.0))
        g1, g2, g3 = result.gains
        assert g3 == g2
        assert g1 > g2
        assert g1 == pytest.approx(0.9 * (math.exp(-0.15) - 0.15), rel=1e-15)
        assert g2 == pytest.approx(0.9 * (math.exp(-0.45) - 0.15), rel=1e-15)

    def test_infeasible_interval(self):
        with pytest.raises(
            InfeasibleError, match=r"infeasible at interval 1: integral load 1\.5 exceeds 1"
        ):
            synthesize_per_interval(plant(a=1.5, delta=2.0), (1.0, 2.0))

    def test_grid_validation(self):
        p = plant(a=0.4, delta=0.25)
        with pytest.raises(ValueError, match="strictly increasing"):
            synthesize_per_interval(p, (1.0, 1.0))
        with pytest.raises(ValueError, match="at least two impulse times"):
            synthesize_per_interval(p, (1.0,))
        with pytest.raises(ValueError, match="safety must lie strictly"):
            synthesize_per_interval(p, (1.0, 2.0), safety=0.0)

    def test_requires_single_simple_term(self):
        two = Problem(
            terms=(
                Term(CoefficientSpec.constant(0.2), DelaySpec.identity()),
                Term(CoefficientSpec.constant(0.2), DelaySpec.constant_lag(0.5)),
            ),
            impulses=ImpulseSchedule(),
            x0=1.0,
        )
        with pytest.raises(ValueError, match="single delay term"):
            synthesize_per_interval(two, (1.0, 2.0))
        wiggly = Problem(
            terms=(
                Term(
                    CoefficientSpec.constant(0.2),
                    DelaySpec.table(((1.0, 0.8), (1.3, 1.0), (1.45, 1.4), (1.6, 1.0), (2.0, 0.5))),
                ),
            ),
            impulses=ImpulseSchedule(),
            x0=1.0,
        )
        with pytest.raises(ValueError, match="single-crossing delays"):
            synthesize_per_interval(wiggly, (1.0, 2.0))
