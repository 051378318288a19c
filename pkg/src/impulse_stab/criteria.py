"""Explicit sufficient stability criteria for impulsive delay equations.

Every checker returns a :class:`CriterionReport` whose verdict is
"stable", "exponentially-stable" or "inconclusive"; the criteria are
sufficient conditions, so no checker ever claims instability.  A
nonnegative margin always accompanies a passing verdict and a negative
one an inconclusive verdict (precondition failures report margin -1).

Checkers and their ids:

* ``thm2``  - per-interval auxiliary problem: restart the equation at each
  impulse time from the gain with unit prehistory and require the value
  at the next impulse time to stay at most one (within a small guard).
* ``thm3``  - closed-form bound (B_j + int A over the sub-tau_j part) *
  exp(int A over the rest) <= 1 for delays that leave each impulse time's
  level at a single separation point.
* ``mu``    - the constant-lag specialization of thm3 with the two-branch
  formula depending on whether the lag fits inside the interval.
* ``thm4``  - the general alternation fold for delays that cross the
  level several times per interval.
* ``thm5``  - uniform bound via the sliding-window integral q: q <= 1/m
  and gains at most 1 - mq give stability with constant exp(mq); a
  positive residual epsilon upgrades to an exponential certificate.
* ``thm6``  - sign-changing coefficients: apply thm5 to the positive
  parts and absorb the negative parts as a perturbation, requiring
  sup sum A_k^- < lambda / N strictly.

All integrals, suprema and separation points are computed exactly for
the representable coefficient and delay classes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .integrator import SolveOptions, solve
from .model import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    ImpulseStabError,
    InvalidProblemError,
    Problem,
    Term,
    sum_specs,
    validate,
)

__all__ = [
    "CriterionReport",
    "IntervalSeparation",
    "SeparationAnalysis",
    "find_separation_points",
    "check_thm2",
    "check_thm3",
    "check_mu",
    "check_thm4",
    "check_thm5",
    "check_thm6",
    "check_dominance",
    "check_auto",
    "DominanceError",
    "history_mass",
    "CRITERIA",
]

STABLE = "stable"
EXP_STABLE = "exponentially-stable"
INCONCLUSIVE = "inconclusive"

_THM2_GUARD = 1e-6
_THM6_REL_MARGIN = 1e-9


class DominanceError(ImpulseStabError, ValueError):
    pass


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    verdict: str
    margin: float
    intervals: tuple[dict, ...] = ()
    certificate: dict | None = None
    reasons: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.verdict != INCONCLUSIVE

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "margin": self.margin,
            "certificate": self.certificate,
            "intervals": list(self.intervals),
            "reasons": list(self.reasons),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _inconclusive(criterion: str, *reasons: str, margin: float = -1.0) -> CriterionReport:
    return CriterionReport(criterion, INCONCLUSIVE, margin, reasons=tuple(reasons))


def _check_valid(problem: Problem, horizon: float) -> None:
    report = validate(problem, horizon)
    if not report.ok:
        raise InvalidProblemError(report)


def _unrolled(problem: Problem, horizon: float) -> tuple[list[float], list[float]]:
    return problem.impulses.unroll(horizon)


def _interval_list(problem: Problem, horizon: float, tail_from: int):
    """(j, tau_j, tau_{j+1}, B_j) for the impulse intervals fully inside
    the horizon; j counts impulse times from 1."""
    times, gains = _unrolled(problem, horizon)
    out = []
    for i in range(len(times) - 1):
        j = i + 1
        if j < tail_from:
            continue
        out.append((j, times[i], times[i + 1], gains[i]))
    return out


def _coverage_reason(problem: Problem, horizon: float) -> str | None:
    if not problem.impulses.covers(horizon):
        return (
            "impulse schedule does not cover the horizon: no impulses after "
            f"t={problem.impulses.times[-1] if problem.impulses.times else 0.0:g}"
        )
    return None


def _nonneg_reason(problem: Problem, horizon: float) -> str | None:
    for i, term in enumerate(problem.terms):
        if term.coefficient.inf(0.0, horizon) < 0.0:
            return f"coefficient of term {i} takes negative values; thm6 applies"
    return None


def _gain_reason(problem: Problem, horizon: float) -> str | None:
    _, gains = _unrolled(problem, horizon)
    if any(g < 0.0 for g in gains):
        return "negative impulse gains are outside the scope of the criteria"
    return None


def history_mass(pairs, horizon: float) -> float:
    """sum_k of the integral of A_k over { t in [0, horizon] : h_k(t) < 0 },
    the weight with which the prehistory enters the representation."""
    total = 0.0
    for coef, delay in pairs:
        if delay.is_identity():
            continue
        nodes = [0.0, *delay.crossings(0.0, 0.0, horizon), horizon]
        for lo, hi in zip(nodes, nodes[1:]):
            if delay.eval(0.5 * (lo + hi)) < 0.0:
                total += coef.integrate(lo, hi)
    return total


def _bound_certificate(problem: Problem, horizon: float, sigma: float, K: float) -> dict:
    mass = history_mass(((t.coefficient, t.delay) for t in problem.terms), horizon)
    return {
        "sigma": sigma,
        "K": K,
        "history_mass": mass,
        "solution_bound": K * max(1.0, mass),
    }


# ---------------------------------------------------------------------------
# separation of the delayed argument around each impulse time


@dataclass(frozen=True)
class IntervalSeparation:
    """Alternation of h around tau_j on one impulse interval.

    ``points`` lists [tau_j, p_1, ..., tau_{j+1}] so that consecutive
    pairs alternate between a "below" phase (h <= tau_j) and an "above"
    phase (h >= tau_j), starting below; empty phases are allowed, and a
    trailing empty above phase pads the count to even.  ``kind`` is
    "simple" (one crossing, possibly degenerate), "all-below" (h never
    returns above tau_j) or "general".
    """

    j: int
    tau_lo: float
    tau_hi: float
    kind: str
    points: tuple[float, ...]

    @property
    def t_split(self) -> float:
        return self.points[1]


@dataclass(frozen=True)
class SeparationAnalysis:
    intervals: tuple[IntervalSeparation, ...]

    @property
    def kind(self) -> str:
        if all(iv.kind in ("simple", "all-below") for iv in self.intervals):
            return "simple"
        return "general"


def _separate_interval(delay: DelaySpec, j: int, a: float, b: float) -> IntervalSeparation:
    cross = delay.crossings(a, a, b)
    nodes = sorted({a, b, *cross, *(k for k in delay._kinks() if a < k < b)})
    signs: list[int] = []
    for lo, hi in zip(nodes, nodes[1:]):
        g = delay.eval(0.5 * (lo + hi)) - a
        signs.append(0 if g == 0.0 else (1 if g > 0.0 else -1))
    prev = 0
    for i, s in enumerate(signs):
        if s == 0:
            signs[i] = prev
        else:
            prev = s
    signs = [s if s != 0 else -1 for s in signs]

    pts = [a]
    phase = -1
    for lo, s in zip(nodes, signs):
        if s != phase:
            pts.append(lo)
            phase = s
    pts.append(b)
    if (len(pts) - 1) % 2 == 1:
        pts.append(b)
    if len(pts) == 3:
        kind = "all-below" if pts[1] == b else "simple"
    else:
        kind = "general"
    return IntervalSeparation(j=j, tau_lo=a, tau_hi=b, kind=kind, points=tuple(pts))


def find_separation_points(
    delay: DelaySpec, impulses: ImpulseSchedule, horizon: float | None = None
) -> SeparationAnalysis:
    """Classify h against tau_j on every impulse interval within the
    horizon (default: the schedule's own extent).

    Crossing points are exact roots on the linear pieces of h, so they
    meet any bisection tolerance down to roundoff.
    """
    if horizon is None:
        horizon = impulses.default_horizon()
        if horizon is None:
            raise ValueError("no horizon given and none derivable from the schedule")
    times, _ = impulses.unroll(horizon)
    ivs = []
    for i in range(len(times) - 1):
        ivs.append(_separate_interval(delay, i + 1, times[i], times[i + 1]))
    return SeparationAnalysis(intervals=tuple(ivs))


# ---------------------------------------------------------------------------
# thm2: per-interval auxiliary problems


def check_thm2(
    problem: Problem,
    options: SolveOptions | None = None,
    horizon: float | None = None,
    tail_from: int = 1,
) -> CriterionReport:
    """Interval test by direct integration of the auxiliary problem.

    On each impulse interval the equation is restarted from the gain with
    unit prehistory; stability follows when every end value stays below
    one.  A guard of 1e-6 keeps integration error from flipping the
    comparison, so the verdict requires 1 - y(tau_{j+1}) >= 1e-6.
    """
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    options = options or SolveOptions()
    for reason in (
        _nonneg_reason(problem, hi),
        _gain_reason(problem, hi),
        _coverage_reason(problem, hi),
    ):
        if reason:
            return _inconclusive("thm2", reason)
    ivs = _interval_list(problem, hi, tail_from)
    if not ivs:
        return _inconclusive("thm2", "needs at least two impulse times within the horizon")

    entries = []
    worst = -math.inf
    for j, a, b, gain in ivs:
        aux = Problem(
            terms=problem.terms,
            impulses=ImpulseSchedule(),
            history=HistorySpec.constant(1.0),
            forcing=CoefficientSpec.constant(0.0),
            x0=gain,
            horizon=b,
        )
        traj = solve(aux, options, start=a, horizon=b, check=False)
        y_end = float(traj.x[-1])
        entries.append({"j": j, "value": y_end})
        worst = max(worst, y_end)
    # shifted by the guard so that margin >= 0 iff the verdict passes
    margin = (1.0 - worst) - _THM2_GUARD
    sigma, _ = problem.impulses.spacing(hi)
    q_sum = sum_specs(problem.coefficients()).sliding_sup(sigma, hi)
    cert = _bound_certificate(problem, hi, sigma, math.exp(q_sum))
    if tail_from > 1:
        cert.pop("solution_bound", None)
    if margin >= 0.0:
        return CriterionReport("thm2", STABLE, margin, tuple(entries), cert)
    return CriterionReport(
        "thm2",
        INCONCLUSIVE,
        margin,
        tuple(entries),
        cert,
        (f"max interval value {worst:.6g} not below 1 with guard {_THM2_GUARD:g}",),
    )


# ---------------------------------------------------------------------------
# closed-form interval criteria (thm3, mu, thm4)


def _single_term(problem: Problem, name: str) -> Term:
    if problem.m != 1:
        raise ValueError(f"{name} requires single delay term")
    return problem.terms[0]


def _interval_value_fold(coef: CoefficientSpec, gain: float, pts: tuple[float, ...]) -> float:
    """Fold B_j through the below/above alternation: additive integrals on
    below phases, exponential factors on above phases."""
    v = gain
    below = True
    for lo, hi in zip(pts, pts[1:]):
        if below:
            v = v + coef.integrate(lo, hi)
        else:
            v = v * math.exp(coef.integrate(lo, hi))
        below = not below
    return v


def _closed_form_report(
    criterion: str,
    problem: Problem,
    horizon: float,
    values: list[tuple[int, float]],
    extra_cert: dict | None = None,
) -> CriterionReport:
    entries = tuple({"j": j, "value": v} for j, v in values)
    worst = max(v for _, v in values)
    margin = 1.0 - worst
    sigma, _ = problem.impulses.spacing(horizon)
    q_sum = sum_specs(problem.coefficients()).sliding_sup(sigma, horizon)
    cert = _bound_certificate(problem, horizon, sigma, math.exp(q_sum))
    if extra_cert:
        cert.update(extra_cert)
    if margin >= 0.0:
        return CriterionReport(criterion, STABLE, margin, entries, cert)
    return CriterionReport(
        criterion,
        INCONCLUSIVE,
        margin,
        entries,
        cert,
        (f"max interval value {worst:.6g} exceeds 1",),
    )


def check_thm3(
    problem: Problem, horizon: float | None = None, tail_from: int = 1
) -> CriterionReport:
    """Single-crossing interval bound.

    Each interval contributes (B_j + int_{tau_j}^{t_j} A) *
    exp(int_{t_j}^{tau_{j+1}} A) with t_j the separation point of h
    around tau_j; all values at most one certify stability.
    """
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    term = _single_term(problem, "thm3")
    for reason in (
        _nonneg_reason(problem, hi),
        _gain_reason(problem, hi),
        _coverage_reason(problem, hi),
    ):
        if reason:
            return _inconclusive("thm3", reason)
    ivs = _interval_list(problem, hi, tail_from)
    if not ivs:
        return _inconclusive("thm3", "needs at least two impulse times within the horizon")
    values = []
    for j, a, b, gain in ivs:
        sep = _separate_interval(term.delay, j, a, b)
        if sep.kind == "general":
            return _inconclusive(
                "thm3",
                f"delay alternates around tau_{j}; thm4 applies",
            )
        t_j = sep.t_split
        v = (gain + term.coefficient.integrate(a, t_j)) * math.exp(
            term.coefficient.integrate(t_j, b)
        )
        values.append((j, v))
    return _closed_form_report("thm3", problem, hi, values)


def check_mu(
    problem: Problem, horizon: float | None = None, tail_from: int = 1
) -> CriterionReport:
    """Constant-lag specialization of the interval bound.

    mu_j = (B_j + int_{tau_j}^{tau_j + delta} A) * exp(int over the rest)
    when the lag fits in the interval, else B_j + int over the whole
    interval; sup mu_j <= 1 certifies stability.
    """
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    term = _single_term(problem, "mu")
    if term.delay.kind == "table":
        raise ValueError("mu requires a constant lag")
    delta = term.delay.delta if term.delay.kind == "constant_lag" else 0.0
    for reason in (
        _nonneg_reason(problem, hi),
        _gain_reason(problem, hi),
        _coverage_reason(problem, hi),
    ):
        if reason:
            return _inconclusive("mu", reason)
    ivs = _interval_list(problem, hi, tail_from)
    if not ivs:
        return _inconclusive("mu", "needs at least two impulse times within the horizon")
    values = []
    for j, a, b, gain in ivs:
        if delta < b - a:
            v = (gain + term.coefficient.integrate(a, a + delta)) * math.exp(
                term.coefficient.integrate(a + delta, b)
            )
        else:
            v = gain + term.coefficient.integrate(a, b)
        values.append((j, v))
    return _closed_form_report("mu", problem, hi, values, {"delta": delta})


def check_thm4(
    problem: Problem, horizon: float | None = None, tail_from: int = 1
) -> CriterionReport:
    """General alternation fold; reduces to thm3 on single-crossing
    intervals."""
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    term = _single_term(problem, "thm4")
    for reason in (
        _nonneg_reason(problem, hi),
        _gain_reason(problem, hi),
        _coverage_reason(problem, hi),
    ):
        if reason:
            return _inconclusive("thm4", reason)
    ivs = _interval_list(problem, hi, tail_from)
    if not ivs:
        return _inconclusive("thm4", "needs at least two impulse times within the horizon")
    values = []
    for j, a, b, gain in ivs:
        sep = _separate_interval(term.delay, j, a, b)
        values.append((j, _interval_value_fold(term.coefficient, gain, sep.points)))
    return _closed_form_report("thm4", problem, hi, values)


# ---------------------------------------------------------------------------
# thm5: uniform sliding-integral criterion


def check_thm5(
    problem: Problem, horizon: float | None = None, eps: float | None = None
) -> CriterionReport:
    """Uniform criterion: with q the largest sliding integral of any
    coefficient over a window of the largest gap, q <= 1/m and gains at
    most 1 - mq give stability with constant exp(mq); gains at most
    1 - mq - eps with the largest lag at most the smallest gap give an
    exponential certificate N = exp(mq)/(1-eps), lambda = -ln(1-eps)/rho.

    Without a user-supplied eps the maximal residual is used.
    """
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    for reason in (
        _nonneg_reason(problem, hi),
        _gain_reason(problem, hi),
        _coverage_reason(problem, hi),
    ):
        if reason:
            return _inconclusive("thm5", reason)
    if not problem.impulses.gaps(hi):
        return _inconclusive("thm5", "schedule has no impulses within the horizon")
    sigma, rho = problem.impulses.spacing(hi)
    m = problem.m
    q = max(c.sliding_sup(sigma, hi) for c in problem.coefficients())
    mq = m * q
    _, gains = _unrolled(problem, hi)
    sup_b = max(gains)
    cert = {"m": m, "q": q, "sigma": sigma, "rho": rho, "K": math.exp(mq)}
    if mq > 1.0:
        return CriterionReport(
            "thm5",
            INCONCLUSIVE,
            1.0 - mq,
            certificate=cert,
            reasons=(f"mq = {mq:.6g} exceeds 1",),
        )
    margin = (1.0 - mq) - sup_b
    if margin < 0.0:
        return CriterionReport(
            "thm5",
            INCONCLUSIVE,
            margin,
            certificate=cert,
            reasons=(f"largest gain {sup_b:.6g} exceeds 1 - mq = {1.0 - mq:.6g}",),
        )
    mass = history_mass(((t.coefficient, t.delay) for t in problem.terms), hi)
    cert["history_mass"] = mass
    cert["solution_bound"] = math.exp(mq) * max(1.0, mass)
    eps_star = 1.0 - mq - sup_b
    if eps is None:
        eps_eff = eps_star
    else:
        if eps <= 0.0:
            raise ValueError("eps must be positive")
        if eps > eps_star:
            return CriterionReport(
                "thm5",
                INCONCLUSIVE,
                eps_star - eps,
                certificate=cert,
                reasons=(
                    f"requested eps {eps:g} exceeds the available residual {eps_star:.6g}",
                ),
            )
        eps_eff = eps
    max_lag = problem.max_lag(0.0, hi)
    reasons: tuple[str, ...] = ()
    if eps_eff > 0.0 and max_lag <= rho:
        cert["eps"] = eps_eff
        cert["N"] = math.exp(mq) / (1.0 - eps_eff)
        cert["lambda"] = -math.log(1.0 - eps_eff) / rho
        return CriterionReport("thm5", EXP_STABLE, margin, certificate=cert)
    if eps_eff > 0.0 and max_lag > rho:
        reasons = (
            "exponential certificate unavailable, stability only: largest lag "
            f"{max_lag:.6g} exceeds the smallest gap {rho:.6g}",
        )
    return CriterionReport("thm5", STABLE, margin, certificate=cert, reasons=reasons)


# ---------------------------------------------------------------------------
# thm6: sign-changing coefficients


def _positive_problem(problem: Problem) -> tuple[Problem, list[CoefficientSpec]]:
    pos_terms = []
    negs = []
    for term in problem.terms:
        pos, neg = term.coefficient.split_signs()
        pos_terms.append(Term(pos, term.delay))
        negs.append(neg)
    return (
        Problem(
            terms=tuple(pos_terms),
            impulses=problem.impulses,
            history=problem.history,
            forcing=problem.forcing,
            x0=problem.x0,
            horizon=problem.horizon,
        ),
        negs,
    )


def check_thm6(
    problem: Problem, horizon: float | None = None, eps: float | None = None
) -> CriterionReport:
    """Sign-splitting criterion.

    The positive parts must pass the uniform criterion with an
    exponential certificate (N, lambda); the negative parts then count as
    a perturbation and must satisfy sup_t sum_k A_k^-(t) < lambda / N
    strictly (relative slack at least 1e-9).  With no negative part the
    report coincides with the uniform criterion's.
    """
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    if reason := _gain_reason(problem, hi):
        return _inconclusive("thm6", reason)
    pos_problem, negs = _positive_problem(problem)
    base = check_thm5(pos_problem, horizon=hi, eps=eps)
    neg_sum = sum_specs(negs)
    b_minus = neg_sum.sup(0.0, hi)
    cert = dict(base.certificate or {})
    cert["aminus_sup"] = b_minus

    if b_minus <= 0.0:
        # pure reduction: inherit the uniform criterion's report verbatim
        return CriterionReport(
            "thm6", base.verdict, base.margin, base.intervals, cert, base.reasons
        )
    if base.verdict != EXP_STABLE:
        return CriterionReport(
            "thm6",
            INCONCLUSIVE,
            base.margin if base.margin < 0.0 else -1.0,
            certificate=cert,
            reasons=(
                "positive parts yield no exponential certificate: "
                + "; ".join(base.reasons or ("margin exhausted",)),
            ),
        )
    lam = cert["lambda"]
    n_cert = cert["N"]
    threshold = lam / n_cert
    cert["perturbation_threshold"] = threshold
    rel_slack = 1.0 - b_minus / threshold
    if rel_slack < _THM6_REL_MARGIN:
        return CriterionReport(
            "thm6",
            INCONCLUSIVE,
            rel_slack - _THM6_REL_MARGIN,
            certificate=cert,
            reasons=(
                f"sup of negative parts {b_minus:.6g} not strictly below "
                f"lambda/N = {threshold:.6g}",
            ),
        )
    c0 = b_minus * n_cert / lam
    # decay rate retained after absorbing the perturbation: largest mu with
    # N b^- exp(mu rho_bar) / (lambda - mu) at most halfway between c0 and 1
    rho_bar = problem.max_lag(0.0, hi)
    target = 0.5 * (1.0 + c0)
    lo_mu, hi_mu = 0.0, lam
    for _ in range(80):
        mid = 0.5 * (lo_mu + hi_mu)
        c_mid = n_cert * b_minus * math.exp(mid * rho_bar) / (lam - mid) if mid < lam else math.inf
        if c_mid <= target:
            lo_mu = mid
        else:
            hi_mu = mid
    mu = lo_mu
    mass_total = history_mass(
        [
            (sum_specs(list(term.coefficient.split_signs())), term.delay)
            for term in problem.terms
        ],
        hi,
    )
    cert["lambda_effective"] = mu
    cert["N_effective"] = n_cert / (1.0 - target)
    cert["history_mass"] = mass_total
    cert["solution_bound"] = n_cert * max(1.0, mass_total) / (1.0 - c0)
    margin = min(base.margin, rel_slack)
    # the effective pair replaces the positive-part certificate
    cert["lambda"] = mu
    cert["N"] = cert["N_effective"]
    return CriterionReport("thm6", EXP_STABLE, margin, certificate=cert)


# ---------------------------------------------------------------------------
# dominance comparison


def _spec_min_diff(upper: CoefficientSpec, lower: CoefficientSpec, horizon: float) -> tuple[float, float]:
    """(min of upper - lower, argmin) over [0, horizon], exact for the
    representable classes (both functions are piecewise linear between
    the merged structure points)."""
    probes = {0.0, horizon}
    for spec in (upper, lower):
        probes.update(k for k in spec._kinks() if 0.0 <= k <= horizon)
    worst = math.inf
    worst_t = 0.0
    for t in sorted(probes):
        for side in (1, -1):
            d = upper.eval(t, side) - lower.eval(t, side)
            if d < worst:
                worst = d
                worst_t = t
    return worst, worst_t


def check_dominance(
    candidate: Problem,
    reference: Problem,
    horizon: float | None = None,
    criterion: str = "auto",
) -> CriterionReport:
    """Comparison test: a candidate whose coefficients and gains are
    squeezed between zero and a certified reference's inherits the
    reference's verdict (the fundamental functions are ordered
    0 <= X_candidate <= X_reference pointwise).

    Requires identical delays and impulse times; raises
    :class:`DominanceError` when the ordering fails, naming a time where
    it does.
    """
    hi = reference.resolve_horizon(horizon)
    _check_valid(reference, hi)
    _check_valid(candidate, hi)
    if candidate.m != reference.m:
        raise DominanceError("structure mismatch: different number of terms")
    for i, (tc, tr) in enumerate(zip(candidate.terms, reference.terms)):
        if tc.delay != tr.delay:
            raise DominanceError(f"structure mismatch: delays differ in term {i}")
    ct, cg = candidate.impulses.unroll(hi)
    rt, rg = reference.impulses.unroll(hi)
    if ct != rt:
        raise DominanceError("structure mismatch: impulse times differ")

    slack = math.inf
    for i, (tc, tr) in enumerate(zip(candidate.terms, reference.terms)):
        d, t_at = _spec_min_diff(tr.coefficient, tc.coefficient, hi)
        if d < 0.0:
            raise DominanceError(
                f"dominance violated at t={t_at:g}: candidate coefficient exceeds reference"
            )
        low, t_low = _spec_min_diff(tc.coefficient, CoefficientSpec.constant(0.0), hi)
        if low < 0.0:
            raise DominanceError(
                f"dominance violated at t={t_low:g}: candidate coefficient negative"
            )
        slack = min(slack, d, low)
    for j, (gc, gr) in enumerate(zip(cg, rg)):
        if gc < 0.0:
            raise DominanceError(f"dominance violated at impulse {j + 1}: negative gain")
        if gc > gr:
            raise DominanceError(
                f"dominance violated at impulse {j + 1}: candidate gain exceeds reference"
            )
        slack = min(slack, gc, gr - gc)

    ref_report = check_auto(reference, horizon=hi) if criterion == "auto" else CRITERIA[
        criterion
    ](reference, horizon=hi)
    cert = dict(ref_report.certificate or {})
    cert["dominates"] = True
    cert["reference_criterion"] = ref_report.criterion
    margin = min(ref_report.margin, slack)
    reasons = ref_report.reasons
    if ref_report.ok:
        reasons = ("inherited from reference verdict by coefficient/gain dominance",) + reasons
    return CriterionReport(
        "thm1", ref_report.verdict, margin, ref_report.intervals, cert, reasons
    )


# ---------------------------------------------------------------------------
# dispatcher


CRITERIA = {
    "thm2": check_thm2,
    "thm3": check_thm3,
    "mu": check_mu,
    "thm4": check_thm4,
    "thm5": check_thm5,
    "thm6": check_thm6,
}


def check_auto(
    problem: Problem,
    options: SolveOptions | None = None,
    horizon: float | None = None,
    tail_from: int = 1,
) -> CriterionReport:
    """Try the criteria in order of decreasing strength/cheapness and
    return the first conclusive report; signed coefficients go straight
    to the sign-splitting criterion."""
    hi = problem.resolve_horizon(horizon)
    _check_valid(problem, hi)
    nonneg = problem.coefficients_nonnegative(0.0, hi)
    attempts: list[CriterionReport] = []
    if not nonneg:
        attempts.append(check_thm6(problem, horizon=hi))
    else:
        plans = [
            lambda: check_thm5(problem, horizon=hi),
            lambda: check_mu(problem, horizon=hi, tail_from=tail_from),
            lambda: check_thm3(problem, horizon=hi, tail_from=tail_from),
            lambda: check_thm4(problem, horizon=hi, tail_from=tail_from),
            lambda: check_thm2(problem, options, horizon=hi, tail_from=tail_from),
        ]
        for plan in plans:
            try:
                attempts.append(plan())
            except ValueError:
                continue
            if attempts[-1].ok:
                break
    for rep in attempts:
        if rep.ok:
            return rep
    reasons = tuple(
        f"{rep.criterion}: {rep.verdict}" + (f" ({rep.reasons[0]})" if rep.reasons else "")
        for rep in attempts
    )
    margin = max((rep.margin for rep in attempts), default=-1.0)
    return CriterionReport("auto", INCONCLUSIVE, margin, reasons=reasons)
