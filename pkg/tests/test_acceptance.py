"""Acceptance suite: the nine end-to-end guarantees at fixed tolerances.

Each test measures one guarantee, records a one-line PASS/FAIL entry for
the terminal summary, and then asserts.  Oracles are closed forms or
independently generated data; nothing here reuses the implementation's
own intermediate results as the expected value.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from conftest import (
    ODE_BENCHMARK_RATE,
    constant_lag_problem,
    ode_benchmark,
    record_acceptance,
    uniform_instance,
)
from impulse_stab import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    Problem,
    SolveOptions,
    SweepFamily,
    Term,
    check_mu,
    check_thm3,
    check_thm4,
    check_thm5,
    check_thm6,
    default_s_grid,
    empirical_boundedness,
    empirical_decay,
    falsification_sweep,
    fit_trajectory_envelope,
    fundamental_table,
    representation_solution,
    sample_problem,
    save_problem,
    solve,
    synthesize_per_interval,
    synthesize_uniform,
)
from impulse_stab.cli import main as cli_main


def _finish(name: str, ok: bool, detail: str) -> None:
    record_acceptance(name, ok, detail)
    assert ok, f"{name}: {detail}"


def _benchmark_max_rel_err(step: float, horizon: float = 10.0) -> float:
    """Worst relative error of the integrated benchmark against the
    closed form 0.25^floor(t) e^t, left limits included."""
    traj = solve(ode_benchmark(horizon), SolveOptions(step=step), horizon=horizon)
    t = traj.t
    exact = 0.25 ** np.floor(t) * np.exp(t)
    worst = float(np.max(np.abs(traj.x - exact) / exact))
    imp = traj.is_impulse
    if np.any(imp):
        tj = t[imp]
        exact_left = 0.25 ** (np.floor(tj) - 1.0) * np.exp(tj)
        worst = max(
            worst, float(np.max(np.abs(traj.x_left[imp] - exact_left) / exact_left))
        )
    return worst


# 1 -------------------------------------------------------------------------


def test_benchmark_accuracy():
    err = _benchmark_max_rel_err(1e-3)
    traj = solve(ode_benchmark(), SolveOptions(step=1e-3), horizon=10.0)
    lam_hat = fit_trajectory_envelope(traj).lam_hat
    lo, hi = 0.98 * ODE_BENCHMARK_RATE, 1.02 * ODE_BENCHMARK_RATE
    ok = err < 1e-6 and lo <= lam_hat <= hi
    _finish(
        "benchmark-accuracy",
        ok,
        f"max rel err {err:.3g} < 1e-06; rate {lam_hat:.6g} in [{lo:.6g}, {hi:.6g}]",
    )


# 2 -------------------------------------------------------------------------


def _forced_problem(i: int) -> Problem:
    rng = np.random.default_rng(np.random.SeedSequence([777, i]))
    sigma = float(rng.choice([0.8, 1.0, 1.25]))
    a = float(rng.uniform(0.2, 0.8))
    lag = float(rng.uniform(0.1, 0.9)) * sigma
    gain = float(rng.uniform(0.1, 0.7))
    r0 = float(rng.uniform(0.1, 0.5)) * (1.0 if rng.random() < 0.5 else -1.0)
    npieces = int(rng.integers(1, 4))
    breaks = tuple(np.sort(rng.uniform(-lag, 0.0, npieces - 1)))
    vals = tuple(
        float(v * s)
        for v, s in zip(rng.uniform(0.3, 1.0, npieces), rng.choice([-1.0, 1.0], npieces))
    )
    return Problem(
        terms=(Term(CoefficientSpec.constant(a), DelaySpec.constant_lag(lag)),),
        impulses=ImpulseSchedule(
            times=(sigma,), gains=(gain,), period=sigma, periodic_gain=gain
        ),
        history=HistorySpec.piecewise(breaks, vals),
        forcing=CoefficientSpec.constant(r0),
        x0=float(rng.uniform(-1.0, 1.0)),
        horizon=5.0,
    )


def test_representation_formula():
    step = 2.5e-3
    options = SolveOptions(step=step)
    worst = 0.0
    for i in range(20):
        problem = _forced_problem(i)
        rng = np.random.default_rng(np.random.SeedSequence([778, i]))
        direct = solve(problem, options, horizon=5.0)
        grid = default_s_grid(problem, 5.0, 8.0 * step * 0.999)
        table = fundamental_table(problem, grid, options, horizon=5.0)
        for t in rng.uniform(0.5, 5.0, 10):
            t = float(t)
            rep = representation_solution(problem, table, t, options)
            ref = direct.eval(t)
            worst = max(worst, abs(rep - ref) / (1.0 + abs(ref)))
    _finish(
        "representation-formula",
        worst < 1e-3,
        f"20 forced problems, 10 probes each: worst normalized diff {worst:.3g} < 0.001",
    )


# 3 -------------------------------------------------------------------------


def test_nonnegative_kernel():
    family = SweepFamily(p_signed=0.0, intervals=5)
    options = SolveOptions(step=5e-3)
    low = math.inf
    for i in range(100):
        problem = sample_problem(family, seed=2024, sample_id=i)
        sigma = problem.impulses.times[0]
        table = fundamental_table(
            problem, (0.0, sigma, 2.0 * sigma), options, horizon=problem.horizon
        )
        for run in table.runs:
            low = min(low, float(np.min(run.x)))
            if np.any(run.is_impulse):
                low = min(low, float(np.min(run.x_left[run.is_impulse])))
    _finish(
        "nonnegative-kernel",
        low >= -1e-12,
        f"100 nonnegative problems: min fundamental value {low:.3g} >= -1e-12",
    )


# 4 -------------------------------------------------------------------------


def _dominance_pair(i: int) -> tuple[Problem, Problem]:
    rng = np.random.default_rng(np.random.SeedSequence([4242, i]))
    sigma = float(rng.uniform(0.6, 1.4))
    horizon = 4.0 * sigma
    c = float(rng.uniform(0.0, 1.0))
    if rng.random() < 0.5:
        breaks = (0.5 * sigma, 1.5 * sigma, 2.5 * sigma)
        vals = tuple(float(v) for v in rng.uniform(0.1, 0.9, 4))
        coef = CoefficientSpec.piecewise(breaks, vals)
        cand_coef = CoefficientSpec.piecewise(breaks, tuple(c * v for v in vals))
    else:
        a = float(rng.uniform(0.1, 0.9))
        coef = CoefficientSpec.constant(a)
        cand_coef = CoefficientSpec.constant(c * a)
    if rng.random() < 0.5:
        delay = DelaySpec.constant_lag(float(rng.uniform(0.1, 1.0)) * sigma)
    else:
        delay = DelaySpec.identity()
    g = float(rng.uniform(0.1, 1.0))
    d = float(rng.uniform(0.0, 1.0))
    times = (sigma, 2.0 * sigma, 3.0 * sigma)

    def build(cf, gain):
        return Problem(
            terms=(Term(cf, delay),),
            impulses=ImpulseSchedule(times=times, gains=(gain,) * 3),
            x0=1.0,
            horizon=horizon,
        )

    return build(cand_coef, d * g), build(coef, g)


def test_dominance_ordering():
    options = SolveOptions(step=5e-3)
    worst = -math.inf
    for i in range(50):
        cand, ref = _dominance_pair(i)
        horizon = ref.horizon
        starts = (0.0, 0.5 * float(ref.impulses.times[0]))
        cand_table = fundamental_table(cand, starts, options, horizon=horizon)
        ref_table = fundamental_table(ref, starts, options, horizon=horizon)
        for s, run_c, run_r in zip(starts, cand_table.runs, ref_table.runs):
            for t in np.linspace(s, horizon, 81):
                t = float(t)
                worst = max(worst, run_c.eval(t) - run_r.eval(t))
            for tau in ref.impulses.times:
                if tau > s:
                    worst = max(worst, run_c.eval_left(tau) - run_r.eval_left(tau))
    _finish(
        "dominance-ordering",
        worst <= 1e-9,
        f"50 scaled pairs: max X_candidate - X_reference = {worst:.3g} <= 1e-09",
    )


# 5 -------------------------------------------------------------------------


def test_falsification_sweep():
    bad = falsification_sweep(samples=200, seed=42)
    detail = (
        "200-sample sweep: no discrepancies"
        if not bad
        else f"{len(bad)} discrepancies, first: {bad[0]}"
    )
    _finish("falsification-sweep", bad == [], detail)


# 6 -------------------------------------------------------------------------


def test_certified_envelope():
    problem = uniform_instance()
    table = fundamental_table(
        problem, (0.0, 1.0, 2.0, 3.0), SolveOptions(step=2e-3), horizon=12.0
    )
    worst = -math.inf
    for s, run in zip(table.s_grid, table.runs):
        bound = 2.0609 * np.exp(-0.22314 * (run.t - float(s))) + 1e-6
        worst = max(worst, float(np.max(run.x - bound)))
        if np.any(run.is_impulse):
            tj = run.t[run.is_impulse]
            bound_left = 2.0609 * np.exp(-0.22314 * (tj - float(s))) + 1e-6
            worst = max(worst, float(np.max(run.x_left[run.is_impulse] - bound_left)))
    _finish(
        "certified-envelope",
        worst <= 0.0,
        f"X(t,s) vs 2.0609 exp(-0.22314 (t-s)) + 1e-6: max excess {worst:.3g} <= 0",
    )


# 7 -------------------------------------------------------------------------


def test_criteria_consistency():
    diffs = []

    simple = constant_lag_problem(0.3, 0.5, 0.5, horizon=8.0)
    r3, r4 = check_thm3(simple), check_thm4(simple)
    d1 = abs(r4.margin - r3.margin)
    d1 = max(
        d1,
        max(
            abs(e3["value"] - e4["value"]) for e3, e4 in zip(r3.intervals, r4.intervals)
        ),
    )
    diffs.append(("thm4=thm3", d1))

    no_lag = constant_lag_problem(0.5, 0.0, 0.4, horizon=8.0)
    rmu, r3b = check_mu(no_lag), check_thm3(no_lag)
    d2 = abs(rmu.margin - r3b.margin)
    d2 = max(
        d2,
        max(
            abs(em["value"] - e3["value"]) for em, e3 in zip(rmu.intervals, r3b.intervals)
        ),
    )
    diffs.append(("mu=thm3", d2))

    nonneg = uniform_instance()
    r5, r6 = check_thm5(nonneg), check_thm6(nonneg)
    d3 = abs(r6.margin - r5.margin)
    for key, val in (r5.certificate or {}).items():
        d3 = max(d3, abs(r6.certificate[key] - val))
    diffs.append(("thm6=thm5", d3))

    worst = max(d for _, d in diffs)
    _finish(
        "criteria-consistency",
        worst < 1e-12,
        "; ".join(f"{name} diff {d:.3g}" for name, d in diffs) + " (all < 1e-12)",
    )


# 8 -------------------------------------------------------------------------


def _cert_diff(left: dict, right: dict) -> float:
    worst = 0.0
    if set(left) != set(right):
        return math.inf
    for key, val in left.items():
        other = right[key]
        if isinstance(val, float) or isinstance(other, float):
            worst = max(worst, abs(float(val) - float(other)))
        elif val != other:
            return math.inf
    return worst


def test_synthesis_recertification(tmp_path):
    plant = Problem(
        terms=(Term(CoefficientSpec.constant(0.5), DelaySpec.constant_lag(0.5)),),
        impulses=ImpulseSchedule(),
        x0=1.0,
        horizon=12.0,
    )
    parts = []
    ok = True

    uniform = synthesize_uniform(plant)
    upath = tmp_path / "uniform.json"
    ureport = tmp_path / "uniform_report.json"
    save_problem(uniform.problem, upath)
    code = cli_main(
        ["check", str(upath), "--criterion", "thm5", "--report", str(ureport)]
    )
    loaded = json.loads(ureport.read_text())
    drift = _cert_diff(uniform.report.certificate, loaded["certificate"])
    drift = max(drift, abs(loaded["margin"] - uniform.report.margin))
    cert = uniform.report.certificate
    k_emp = empirical_boundedness(uniform.problem, trials=10, seed=5).k_emp
    lam_hat = empirical_decay(uniform.problem).lam_hat
    u_ok = (
        code == 0
        and loaded["verdict"] == uniform.report.verdict
        and drift <= 1e-12
        and k_emp <= cert["solution_bound"] * 1.05
        and lam_hat >= 0.5 * cert["lambda"]
    )
    ok = ok and u_ok
    parts.append(
        f"uniform/thm5 drift {drift:.3g}, K_emp {k_emp:.4g} <= "
        f"{cert['solution_bound'] * 1.05:.4g}, rate {lam_hat:.4g} >= "
        f"{0.5 * cert['lambda']:.4g}"
    )

    per = synthesize_per_interval(plant, (1.0, 2.0, 3.0, 4.0, 5.0, 6.0))
    ppath = tmp_path / "per_interval.json"
    preport = tmp_path / "per_interval_report.json"
    save_problem(per.problem, ppath)
    code = cli_main(["check", str(ppath), "--criterion", "thm3", "--report", str(preport)])
    loaded = json.loads(preport.read_text())
    drift = _cert_diff(per.report.certificate, loaded["certificate"])
    drift = max(drift, abs(loaded["margin"] - per.report.margin))
    bound = per.report.certificate["solution_bound"]
    k_emp = empirical_boundedness(per.problem, trials=10, seed=5).k_emp
    p_ok = (
        code == 0
        and loaded["verdict"] == per.report.verdict
        and drift <= 1e-12
        and k_emp <= bound * 1.05
    )
    ok = ok and p_ok
    parts.append(f"per-interval/thm3 drift {drift:.3g}, K_emp {k_emp:.4g} <= {bound * 1.05:.4g}")

    _finish("synthesis-recertification", ok, "; ".join(parts))


# 9 -------------------------------------------------------------------------


def test_convergence_order():
    steps = (4e-2, 2e-2, 1e-2, 5e-3)
    errs = [_benchmark_max_rel_err(s) for s in steps]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(r >= 4.0 for r in ratios)
    _finish(
        "convergence-order",
        ok,
        "halving ratios " + ", ".join(f"{r:.1f}" for r in ratios) + " all >= 4",
    )
