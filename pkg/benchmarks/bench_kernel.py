"""Compare the compiled integration kernel against the pure-Python one.

Runs the same representative problem (two delayed terms, piecewise
coefficient, periodic impulses) through both backends at several step
sizes and prints wall-clock times, speedup, and the largest deviation
between the two trajectories.

Usage: python benchmarks/bench_kernel.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from impulse_stab import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    Problem,
    SolveOptions,
    Term,
    solve,
)
from impulse_stab import _kernel


def make_problem() -> Problem:
    coef = CoefficientSpec.piecewise((0.5, 1.0, 1.5), (0.6, 0.2, 0.5, 0.3))
    terms = (
        Term(coef, DelaySpec.constant_lag(0.4)),
        Term(CoefficientSpec.constant(0.2), DelaySpec.table([(0.0, -0.5), (2.0, 1.0)])),
    )
    return Problem(
        terms=terms,
        impulses=ImpulseSchedule(times=(1.0,), gains=(0.4,), period=1.0, periodic_gain=0.4),
        history=HistorySpec.table([(-1.0, 0.5), (0.0, 1.0)]),
        forcing=CoefficientSpec.constant(0.1),
        x0=1.0,
        horizon=40.0,
    )


def run(problem: Problem, step: float, impl, repeat: int) -> tuple[float, np.ndarray]:
    best = float("inf")
    traj = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = solve(problem, SolveOptions(step=step), impl=impl)
        best = min(best, time.perf_counter() - t0)
    return best, traj.x


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    try:
        compiled, _ = _kernel._select("c")
    except ImportError:
        compiled = None
    fallback, _ = _kernel._select("python")
    if compiled is None:
        print("compiled kernel unavailable; timing the fallback only")

    problem = make_problem()
    print(f"{'step':>8} {'nodes':>9} {'python':>10} {'compiled':>10} {'speedup':>8} {'max|diff|':>10}")
    for step in (1e-2, 1e-3, 1e-4):
        t_py, x_py = run(problem, step, fallback, args.repeat)
        if compiled is None:
            print(f"{step:>8g} {len(x_py):>9} {t_py:>10.4f} {'-':>10} {'-':>8} {'-':>10}")
            continue
        t_c, x_c = run(problem, step, compiled, args.repeat)
        diff = float(np.max(np.abs(x_py - x_c)))
        print(
            f"{step:>8g} {len(x_py):>9} {t_py:>10.4f} {t_c:>10.4f} "
            f"{t_py / t_c:>8.2f} {diff:>10.3e}"
        )


if __name__ == "__main__":
    main()
