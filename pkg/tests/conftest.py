"""Shared problem factories and the acceptance summary hook.

The factories build the small family of closed-form instances that the
unit tests and the acceptance suite both lean on, so the oracle values
live next to the problems they describe.
"""

from __future__ import annotations

import math

from impulse_stab import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    Problem,
    Term,
)


# ---------------------------------------------------------------------------
# closed-form benchmark: x' = x, jumps by 0.25 at every integer


def ode_benchmark(horizon: float = 10.0) -> Problem:
    """x' = x(t) with x(j) = 0.25 x(j - 0) at j = 1, 2, ...

    Between jumps the flow is a plain exponential, so the solution is
    exactly 0.25**floor(t) * exp(t) and the left limit at an integer j
    is 0.25**(j-1) * exp(j).
    """
    return Problem(
        terms=(Term(CoefficientSpec.constant(1.0), DelaySpec.identity()),),
        impulses=ImpulseSchedule(times=(1.0,), gains=(0.25,), period=1.0, periodic_gain=0.25),
        history=HistorySpec.zero(),
        x0=1.0,
        horizon=horizon,
    )


def ode_benchmark_exact(t: float) -> float:
    return 0.25 ** math.floor(t) * math.exp(t)


def ode_benchmark_exact_left(t: float) -> float:
    """Left limit; differs from the value only at the jump times."""
    f = math.floor(t)
    if t == f and f >= 1:
        return 0.25 ** (f - 1) * math.exp(t)
    return ode_benchmark_exact(t)


ODE_BENCHMARK_RATE = math.log(4.0) - 1.0


# ---------------------------------------------------------------------------
# the uniform-criterion worked instance and its certificate


def uniform_instance(horizon: float = 12.0) -> Problem:
    """A = 0.5, lag 0.5, impulses at 1, 2, ... with gain 0.3.

    Certificate values (window sigma = rho = 1): q = 0.5, K = e^0.5,
    eps = 1 - q - B = 0.2, N = e^0.5 / 0.8, lambda = -ln(0.8).
    """
    return Problem(
        terms=(Term(CoefficientSpec.constant(0.5), DelaySpec.constant_lag(0.5)),),
        impulses=ImpulseSchedule(times=(1.0,), gains=(0.3,), period=1.0, periodic_gain=0.3),
        history=HistorySpec.zero(),
        x0=1.0,
        horizon=horizon,
    )


UNIFORM_Q = 0.5
UNIFORM_K = math.exp(0.5)
UNIFORM_EPS = 0.2
UNIFORM_N = math.exp(0.5) / 0.8
UNIFORM_LAMBDA = -math.log(0.8)


# ---------------------------------------------------------------------------
# generic single-term constant-data builder


def constant_lag_problem(
    a: float,
    delta: float,
    gain: float,
    sigma: float = 1.0,
    horizon: float = 10.0,
    history_value: float = 0.0,
    x0: float = 1.0,
) -> Problem:
    delay = DelaySpec.identity() if delta == 0.0 else DelaySpec.constant_lag(delta)
    history = (
        HistorySpec.zero() if history_value == 0.0 else HistorySpec.constant(history_value)
    )
    return Problem(
        terms=(Term(CoefficientSpec.constant(a), delay),),
        impulses=ImpulseSchedule(
            times=(sigma,), gains=(gain,), period=sigma, periodic_gain=gain
        ),
        history=history,
        x0=x0,
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion in the summary

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        state = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{name}: {state} ({detail})")
