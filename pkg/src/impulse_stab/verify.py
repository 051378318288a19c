"""Empirical cross-checks of the certificates.

``empirical_boundedness`` measures the worst ratio of a homogeneous
solution's sup-norm to its data size over randomized trials;
``empirical_decay`` fits the observed decay rate; and
``falsification_sweep`` runs the whole pipeline over a randomized family
of in-scope problems, confirming every certified verdict against those
measurements and returning any discrepancy found.

Randomness is counter-based: each trial and each sample derives its own
generator from (seed, index), so results do not depend on the worker
count or on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import map_indexed
from .criteria import (
    EXP_STABLE,
    check_mu,
    check_thm2,
    check_thm3,
    check_thm4,
    check_thm5,
    check_thm6,
)
from .fundamental import EnvelopeFit, fit_trajectory_envelope
from .integrator import SolveOptions, solve
from .model import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    Problem,
    Term,
)

__all__ = [
    "BoundednessResult",
    "empirical_boundedness",
    "empirical_decay",
    "SweepFamily",
    "SweepRecord",
    "sample_problem",
    "falsification_sweep",
]

_BOUND_TOLERANCE = 1.05
_DECAY_FRACTION = 0.5


@dataclass(frozen=True)
class BoundednessResult:
    k_emp: float
    worst_trial: int
    ratios: tuple[float, ...]


def _homogeneous(problem: Problem) -> Problem:
    return replace(problem, forcing=CoefficientSpec.constant(0.0))


def _trial_data(problem: Problem, horizon: float, seed: int, i: int) -> tuple[float, HistorySpec]:
    if i == 0:
        return 1.0, HistorySpec.zero()
    if i == 1:
        return 1.0, HistorySpec.constant(1.0)
    rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
    lag = max(problem.max_lag(0.0, horizon), 1e-6)
    npieces = int(rng.integers(1, 9))
    breakpoints = np.sort(rng.uniform(-lag, 0.0, npieces - 1))
    values = rng.uniform(-1.0, 1.0, npieces)
    x0 = float(rng.uniform(-1.0, 1.0))
    return x0, HistorySpec.piecewise(tuple(breakpoints), tuple(values))


def empirical_boundedness(
    problem: Problem,
    trials: int = 50,
    horizon: float | None = None,
    seed: int = 42,
    options: SolveOptions | None = None,
) -> BoundednessResult:
    """Worst observed ratio sup|x| / (|x0| + sup|phi|) over randomized
    homogeneous trials.

    Trial 0 runs from x0 = 1 with zero history and trial 1 from x0 = 1
    with unit history; later trials draw x0 in [-1, 1] and a
    right-continuous piecewise-constant history with at most 8 pieces.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    hi = problem.resolve_horizon(horizon)
    base = _homogeneous(problem)

    def one(i: int) -> float:
        x0, hist = _trial_data(base, hi, seed, i)
        prob = replace(base, x0=x0, history=hist)
        traj = solve(prob, options, horizon=hi)
        denom = abs(x0) + hist.sup_abs()
        if denom == 0.0:
            return 0.0
        peak = float(np.max(np.abs(traj.x)))
        if np.any(traj.is_impulse):
            peak = max(peak, float(np.max(np.abs(traj.x_left[traj.is_impulse]))))
        return peak / denom

    ratios = map_indexed(one, trials)
    worst = int(np.argmax(ratios))
    return BoundednessResult(
        k_emp=float(ratios[worst]), worst_trial=worst, ratios=tuple(ratios)
    )


def empirical_decay(
    problem: Problem,
    horizon: float | None = None,
    options: SolveOptions | None = None,
    min_intervals: int = 10,
) -> EnvelopeFit:
    """Fitted decay rate of the homogeneous solution from x0 = 1, phi = 1.

    Requires the horizon to cover at least ``min_intervals`` impulse
    intervals; raises ``ValueError("insufficient data")`` when fewer than
    three intervals have a nonzero maximum.
    """
    hi = problem.resolve_horizon(horizon)
    times, _ = problem.impulses.unroll(hi)
    if len(times) < min_intervals:
        raise ValueError(
            f"horizon must cover at least {min_intervals} impulse intervals, got {len(times)}"
        )
    prob = replace(
        _homogeneous(problem), x0=1.0, history=HistorySpec.constant(1.0)
    )
    traj = solve(prob, options, horizon=hi)
    return fit_trajectory_envelope(traj)


# ---------------------------------------------------------------------------
# randomized falsification sweep


@dataclass(frozen=True)
class SweepFamily:
    """Distribution of randomized in-scope problems for the sweep."""

    a_range: tuple[float, float] = (0.05, 1.0)
    sigma_range: tuple[float, float] = (0.5, 2.0)
    lag_frac_range: tuple[float, float] = (0.0, 1.0)
    gain_frac_range: tuple[float, float] = (0.05, 1.2)
    p_piecewise: float = 0.35
    p_table_delay: float = 0.15
    p_signed: float = 0.2
    p_two_terms: float = 0.15
    intervals: int = 12
    trials: int = 8
    step: float = 5e-3


@dataclass(frozen=True)
class SweepRecord:
    sample_id: int
    criterion: str
    verdict: str
    bound: float
    observed: float
    ratio: float
    flag: str

    def csv_row(self) -> str:
        return (
            f"{self.sample_id},{self.criterion},{self.verdict},"
            f"{self.bound!r},{self.observed!r},{self.ratio!r},{self.flag}\n"
        )


def _sample_coefficient(rng, family: SweepFamily, scale: float, sigma: float, horizon: float):
    base = float(rng.uniform(*family.a_range)) * scale
    signed = rng.random() < family.p_signed
    if rng.random() < family.p_piecewise:
        half = 0.5 * sigma
        nb = max(1, int(horizon / half) - 1)
        breakpoints = tuple(half * (n + 1) for n in range(nb))
        hi_level = base
        lo_level = (
            -float(rng.uniform(0.0, 0.25 * base + 0.02))
            if signed
            else float(rng.uniform(0.0, base))
        )
        values = tuple(hi_level if n % 2 == 0 else lo_level for n in range(nb + 1))
        return CoefficientSpec.piecewise(breakpoints, values)
    if signed:
        # constant negative dip is out of scope for the nonneg criteria but
        # exercises the sign-splitting one
        lo_level = -float(rng.uniform(0.0, 0.25 * base + 0.02))
        return CoefficientSpec.piecewise((0.75 * sigma,), (base, lo_level))
    return CoefficientSpec.constant(base)


def _sample_delay(rng, family: SweepFamily, sigma: float, horizon: float) -> DelaySpec:
    u = rng.random()
    lag_hi = family.lag_frac_range[1] * sigma
    if u < family.p_table_delay:
        lag_a = float(rng.uniform(0.1, 0.6)) * lag_hi
        lag_b = float(rng.uniform(0.6, 1.0)) * lag_hi
        pts = []
        t = 0.0
        toggle = False
        while t <= horizon + sigma:
            lag = lag_a if toggle else lag_b
            pts.append((t, t - lag))
            toggle = not toggle
            t += 0.5 * sigma
        return DelaySpec.table(pts)
    if u < 0.6:
        frac = float(rng.uniform(*family.lag_frac_range))
        return DelaySpec.constant_lag(frac * sigma)
    return DelaySpec.identity()


def sample_problem(family: SweepFamily, seed: int, sample_id: int) -> Problem:
    """Deterministic sample: same (seed, sample_id) always gives the same
    problem regardless of how many others are drawn."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, sample_id]))
    sigma = float(rng.uniform(*family.sigma_range))
    horizon = family.intervals * sigma
    m = 2 if rng.random() < family.p_two_terms else 1
    terms = []
    for _ in range(m):
        coef = _sample_coefficient(rng, family, 1.0 / m, sigma, horizon)
        delay = _sample_delay(rng, family, sigma, horizon)
        terms.append(Term(coef, delay))
    q_pos = 0.0
    for term in terms:
        pos, _ = term.coefficient.split_signs()
        q_pos = max(q_pos, pos.sliding_sup(sigma, horizon))
    frac = float(rng.uniform(*family.gain_frac_range))
    gain = max(0.0, frac * (1.0 - m * q_pos))
    times = tuple(sigma * (j + 1) for j in range(family.intervals))
    gains = (gain,) * len(times)
    return Problem(
        terms=tuple(terms),
        impulses=ImpulseSchedule(times=times, gains=gains),
        history=HistorySpec.constant(1.0),
        forcing=CoefficientSpec.constant(0.0),
        x0=1.0,
        horizon=horizon,
    )


def _reports_for(problem: Problem, sample_id: int, options: SolveOptions):
    hi = problem.horizon
    nonneg = problem.coefficients_nonnegative(0.0, hi)
    reports = []
    if nonneg:
        reports.append(check_thm5(problem))
        if problem.m == 1:
            reports.append(check_thm4(problem))
            try:
                reports.append(check_thm3(problem))
            except ValueError:
                pass
            if problem.terms[0].delay.kind != "table":
                reports.append(check_mu(problem))
        if problem.m > 1 or sample_id % 5 == 0:
            reports.append(check_thm2(problem, options))
    else:
        reports.append(check_thm6(problem))
    return [r for r in reports if r.ok]


def falsification_sweep(
    family: SweepFamily | None = None,
    samples: int = 200,
    seed: int = 42,
    csv_path=None,
) -> list[SweepRecord]:
    """Check every certified verdict in a randomized family against
    empirical measurements; returns the discrepancies (empty when the
    implementation and the certificates agree).

    Each confirmation produces one record: solution bounds are compared
    with the worst boundedness ratio (flag "bound-exceeded" past a 5%
    allowance) and exponential certificates additionally with the fitted
    decay rate (flag "slow-decay" below half the certified rate).  When
    ``csv_path`` is given every record is written, discrepant or not.
    """
    family = family or SweepFamily()
    options = SolveOptions(step=family.step)

    def one(i: int) -> list[SweepRecord]:
        problem = sample_problem(family, seed, i)
        recs: list[SweepRecord] = []
        for report in _reports_for(problem, i, options):
            cert = report.certificate or {}
            bound = cert.get("solution_bound")
            if bound is None:
                continue
            measured = empirical_boundedness(
                problem,
                trials=family.trials,
                horizon=problem.horizon,
                seed=seed * 1_000_003 + i,
                options=options,
            )
            ratio = measured.k_emp / bound if bound > 0.0 else math.inf
            flag = "ok" if measured.k_emp <= bound * _BOUND_TOLERANCE else "bound-exceeded"
            recs.append(
                SweepRecord(
                    sample_id=i,
                    criterion=report.criterion,
                    verdict=report.verdict,
                    bound=float(bound),
                    observed=float(measured.k_emp),
                    ratio=float(ratio),
                    flag=flag,
                )
            )
            if report.verdict == EXP_STABLE and "lambda" in cert:
                lam_cert = float(cert["lambda"])
                try:
                    fit = empirical_decay(problem, options=options)
                except ValueError:
                    continue  # decayed below measurability: nothing to refute
                lam_hat = fit.lam_hat
                target = _DECAY_FRACTION * lam_cert
                ok = fit.trivial or lam_hat >= target
                recs.append(
                    SweepRecord(
                        sample_id=i,
                        criterion=f"{report.criterion}:decay",
                        verdict=report.verdict,
                        bound=target,
                        observed=float(min(lam_hat, 1e308)),
                        ratio=float(lam_hat / target) if target > 0.0 else math.inf,
                        flag="ok" if ok else "slow-decay",
                    )
                )
        return recs

    all_records = [r for chunk in map_indexed(one, samples) for r in chunk]
    if csv_path is not None:
        with open(csv_path, "w", encoding="utf-8") as f:
            f.write("sample_id,criterion,verdict,bound,observed,ratio,flag\n")
            for r in all_records:
                f.write(r.csv_row())
    return [r for r in all_records if r.flag != "ok"]
