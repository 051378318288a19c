"""Synthesis of stabilizing impulse gains.

Two entry points: a uniform design (equal spacing sigma, one gain B
everywhere, certified by the sliding-integral criterion) and a
per-interval design for a user-chosen time grid (one gain per interval,
certified by the single-crossing interval bound).  Both return the
synthesized problem together with the certifying report, so the result
is certified by construction rather than by a separate argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .criteria import CriterionReport, check_thm3, check_thm5
from .model import (
    CoefficientSpec,
    ImpulseSchedule,
    ImpulseStabError,
    InvalidProblemError,
    Problem,
    validate,
)

__all__ = [
    "InfeasibleError",
    "SynthesisRequest",
    "SynthesisResult",
    "synthesize_uniform",
    "synthesize_per_interval",
]

_Q_SLACK = 1e-6
_NEAR_ZERO_GAIN = 1e-3


class InfeasibleError(ImpulseStabError):
    """No gain assignment can satisfy the requested criterion."""


@dataclass(frozen=True)
class SynthesisRequest:
    """Uniform-design request.

    ``spacing`` is a number or "auto"; with ``allow_shrink`` (the
    default) an infeasible spacing is bisected downward until the
    sliding integral fits under 1/m, while ``allow_shrink=False`` makes
    it a hard constraint.  ``safety`` in (0, 1) scales the gains below
    the certifiable threshold.
    """

    target: str = "stable"
    spacing: float | str = "auto"
    safety: float = 0.9
    allow_shrink: bool = True

    def __post_init__(self):
        if self.target not in ("stable", "exponential"):
            raise ValueError("target must be 'stable' or 'exponential'")
        if not (0.0 < self.safety < 1.0):
            raise ValueError("safety must lie strictly between 0 and 1")
        if not isinstance(self.spacing, str):
            if self.spacing <= 0.0:
                raise ValueError("spacing must be positive")
        elif self.spacing != "auto":
            raise ValueError("spacing must be a number or 'auto'")


@dataclass(frozen=True)
class SynthesisResult:
    problem: Problem
    report: CriterionReport
    sigma: float | None
    gains: tuple[float, ...]
    reasons: tuple[str, ...] = ()


def _require_nonneg(problem: Problem, horizon: float) -> None:
    for i, term in enumerate(problem.terms):
        if term.coefficient.inf(0.0, horizon) < 0.0:
            raise ValueError(
                f"synthesis requires nonnegative coefficients; term {i} takes negative values"
            )


def _q_of(problem: Problem, window: float) -> float:
    """Largest sliding integral over a window, exact over all of [0, inf)
    because the coefficients are constant past their last structure
    point."""
    q = 0.0
    for c in problem.coefficients():
        kinks = c._kinks()
        hi = max(window, (kinks[-1] + window) if kinks else window)
        q = max(q, c.sliding_sup(window, hi))
    return q


def synthesize_uniform(
    problem: Problem, request: SynthesisRequest | None = None, horizon: float | None = None
) -> SynthesisResult:
    """Design tau_j = j sigma with a single gain B.

    The spacing is taken from the request (bisected downward when the
    sliding integral exceeds 1/m and shrinking is allowed); the gain is
    ``safety * (1 - mq)`` for a stability target and
    ``safety * (1 - mq - eps)`` with ``eps = (1 - safety)(1 - mq)/2``
    for an exponential target.  The returned report re-runs the uniform
    criterion on the synthesized problem, so the certificate always
    matches what a later check of the emitted file reproduces.
    """
    request = request or SynthesisRequest()
    probe_hi = max(
        (k for t in problem.terms for k in t.coefficient._kinks()), default=0.0
    ) + 1.0
    base_report = validate(replace(problem, impulses=ImpulseSchedule()), probe_hi)
    if not base_report.ok:
        raise InvalidProblemError(base_report)
    _require_nonneg(problem, probe_hi)
    m = problem.m
    reasons: list[str] = []

    sigma0 = 1.0 if isinstance(request.spacing, str) else float(request.spacing)
    threshold = (1.0 - _Q_SLACK) / m
    q0 = _q_of(problem, sigma0)
    if q0 <= threshold:
        sigma = sigma0
    else:
        if not request.allow_shrink:
            raise InfeasibleError(f"infeasible: q = {q0:g} > {1.0 / m:g}")
        lo, hi_s = 0.0, sigma0
        for _ in range(60):
            mid = 0.5 * (lo + hi_s)
            if mid > 0.0 and _q_of(problem, mid) <= threshold:
                lo = mid
            else:
                hi_s = mid
        if lo <= 0.0:
            raise InfeasibleError(f"infeasible: q = {q0:g} > {1.0 / m:g}")
        sigma = lo
        reasons.append(f"spacing shrunk to {sigma:.9g} to fit the sliding integral")

    q = _q_of(problem, sigma)
    mq = m * q
    if request.target == "exponential":
        eps = (1.0 - request.safety) * (1.0 - mq) / 2.0
        gain = request.safety * (1.0 - mq - eps)
    else:
        gain = request.safety * (1.0 - mq)
    gain = max(gain, 0.0)
    if gain < _NEAR_ZERO_GAIN:
        reasons.append(f"near-zero gains: B = {gain:.3g}")

    hi = problem.horizon if problem.horizon is not None else 20.0 * sigma
    schedule = ImpulseSchedule(
        times=(sigma,), gains=(gain,), period=sigma, periodic_gain=gain
    )
    synth = replace(problem, impulses=schedule, horizon=hi)
    report = check_thm5(synth, horizon=horizon)
    if request.target == "exponential" and report.verdict != "exponentially-stable":
        reasons.extend(report.reasons or ("exponential certificate unavailable, stability only",))
    return SynthesisResult(
        problem=synth,
        report=report,
        sigma=sigma,
        gains=(gain,),
        reasons=tuple(reasons),
    )


def synthesize_per_interval(
    problem: Problem, impulse_times, safety: float = 0.9
) -> SynthesisResult:
    """One gain per interval of a user-chosen impulse grid.

    For each interval the largest certifiable gain solves
    (B + I_below) exp(I_above) = 1 around the delay's separation point;
    the emitted gain is ``safety`` times that, floored at zero.  The last
    time reuses a virtual interval of the same length as the final gap.
    Raises :class:`InfeasibleError` when an interval admits no
    nonnegative gain at all.
    """
    if not (0.0 < safety < 1.0):
        raise ValueError("safety must lie strictly between 0 and 1")
    if problem.m != 1:
        raise ValueError("per-interval synthesis requires single delay term")
    times = tuple(float(t) for t in impulse_times)
    if len(times) < 2:
        raise ValueError("need at least two impulse times")
    if times[0] <= 0.0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("impulse times must be positive and strictly increasing")
    horizon = times[-1]
    _require_nonneg(problem, horizon)
    term = problem.terms[0]

    from .criteria import _separate_interval  # shared exact separation

    bounds = list(times) + [times[-1] + (times[-1] - times[-2])]
    gains = []
    for j, (a, b) in enumerate(zip(bounds, bounds[1:]), start=1):
        sep = _separate_interval(term.delay, j, a, b)
        if sep.kind == "general":
            raise ValueError(
                f"per-interval synthesis requires single-crossing delays (interval {j})"
            )
        t_j = sep.t_split
        i_below = term.coefficient.integrate(a, t_j)
        i_above = term.coefficient.integrate(t_j, b)
        cap = math.exp(-i_above) - i_below
        if cap < 0.0:
            raise InfeasibleError(
                f"infeasible at interval {j}: integral load {i_below * math.exp(i_above):.6g} "
                "exceeds 1 with zero gain"
            )
        gains.append(safety * max(cap, 0.0))

    schedule = ImpulseSchedule(times=times, gains=tuple(gains))
    synth = replace(problem, impulses=schedule, horizon=horizon)
    report = check_thm3(synth, horizon=horizon)
    reasons = tuple(
        f"near-zero gains: B_{j + 1} = {g:.3g}"
        for j, g in enumerate(gains)
        if g < _NEAR_ZERO_GAIN
    )
    return SynthesisResult(
        problem=synth,
        report=report,
        sigma=None,
        gains=tuple(gains),
        reasons=reasons,
    )
