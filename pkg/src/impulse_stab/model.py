"""Data model for scalar linear impulsive delay differential equations.

The problem class handled by this package is

    x'(t) = sum_k A_k(t) * x[h_k(t)] + r(t),    t >= 0,
    x(tau_j) = B_j * x(tau_j - 0),              0 < tau_1 < tau_2 < ...,
    x(xi) = phi(xi) for xi < 0,                 x(0) = x0,

with solutions right-continuous at the impulse times.  Coefficients,
delays, the history and the forcing term are restricted to finitely
representable forms (constants, piecewise-constant steps, sampled
piecewise-linear tables) so that every integral, supremum and crossing
used by the stability criteria can be computed exactly, not just
approximated.

Conventions used throughout:

* piecewise-constant functions are right-continuous at their breakpoints
  and take ``values[i]`` on the i-th piece, with ``len(values) ==
  len(breakpoints) + 1``;
* sampled tables are interpolated linearly and clamped to their end
  values outside the sampled range (delay tables instead extend with
  slope one so the lag stays constant);
* impulse times are strictly positive and strictly increasing, and an
  optional periodic rule extends the explicit list indefinitely.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace

__all__ = [
    "ImpulseStabError",
    "ProblemFormatError",
    "InvalidProblemError",
    "CoefficientSpec",
    "DelaySpec",
    "ImpulseSchedule",
    "HistorySpec",
    "Term",
    "Problem",
    "ValidationReport",
    "validate",
    "eval_coefficient",
    "integrate_coefficient",
    "split_signs",
    "sliding_sup_integral",
    "sum_specs",
    "sup_of_sum",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "save_problem",
]

_EPS = 2.220446049250313e-16

C_CONSTANT, C_PIECEWISE, C_TABLE = 0, 1, 2
D_IDENTITY, D_LAG, D_TABLE = 0, 1, 2
H_ZERO, H_CONSTANT, H_TABLE, H_PIECEWISE = 0, 1, 2, 3


class ImpulseStabError(Exception):
    """Base class for errors raised by this package."""


class ProblemFormatError(ImpulseStabError, ValueError):
    """Raised when a problem file or dictionary is malformed."""


class InvalidProblemError(ImpulseStabError, ValueError):
    """Raised when a structurally well-formed problem violates the
    standing hypotheses (increasing impulse times, h(t) <= t, ...)."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("; ".join(report.violations) or "invalid problem")
        self.report = report


def _as_float(x, ctx: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise ProblemFormatError(f"{ctx}: expected a number, got {x!r}") from None
    if not math.isfinite(v):
        raise ProblemFormatError(f"{ctx}: expected a finite number, got {x!r}")
    return v


def _float_tuple(xs, ctx: str) -> tuple[float, ...]:
    if not isinstance(xs, (list, tuple)):
        raise ProblemFormatError(f"{ctx}: expected a list")
    return tuple(_as_float(x, ctx) for x in xs)


def _check_keys(d: dict, allowed: set[str], ctx: str) -> None:
    if not isinstance(d, dict):
        raise ProblemFormatError(f"{ctx}: expected an object")
    for key in d:
        if key not in allowed:
            raise ProblemFormatError(f"{ctx}: unknown key: {key}")


# ---------------------------------------------------------------------------
# coefficient-shaped functions (also used for the forcing term)


@dataclass(frozen=True)
class CoefficientSpec:
    """A scalar function of time in one of three exactly integrable forms.

    kind "constant" uses ``value``; kind "piecewise" uses right-continuous
    steps over ``breakpoints``; kind "table" interpolates ``points``
    linearly and clamps outside the sampled range.
    """

    kind: str
    value: float = 0.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "piecewise", "table"):
            raise ValueError(f"unknown coefficient kind: {self.kind}")
        if self.kind == "piecewise" and len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("piecewise spec needs len(values) == len(breakpoints) + 1")
        if self.kind == "table" and len(self.points) < 2:
            raise ValueError("table spec needs at least two points")

    @classmethod
    def constant(cls, value: float) -> "CoefficientSpec":
        return cls("constant", value=float(value))

    @classmethod
    def piecewise(cls, breakpoints, values) -> "CoefficientSpec":
        return cls(
            "piecewise",
            breakpoints=tuple(float(b) for b in breakpoints),
            values=tuple(float(v) for v in values),
        )

    @classmethod
    def table(cls, points) -> "CoefficientSpec":
        return cls("table", points=tuple((float(t), float(v)) for t, v in points))

    # -- evaluation ---------------------------------------------------------

    def eval(self, t: float, side: int = 1) -> float:
        """Value at ``t``; ``side=-1`` returns the left limit at breakpoints."""
        if self.kind == "constant":
            return self.value
        if self.kind == "piecewise":
            if side >= 0:
                i = bisect_right(self.breakpoints, t)
            else:
                i = bisect_left(self.breakpoints, t)
            return self.values[i]
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if t <= xs[0]:
            return ys[0]
        if t >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, t) - 1
        u = (t - xs[i]) / (xs[i + 1] - xs[i])
        return ys[i] + u * (ys[i + 1] - ys[i])

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def _kinks(self) -> tuple[float, ...]:
        if self.kind == "piecewise":
            return self.breakpoints
        if self.kind == "table":
            return tuple(p[0] for p in self.points)
        return ()

    def pieces(self, a: float, b: float):
        """Yield ``(t0, t1, v0, v1)`` linear segments covering [a, b].

        Constant pieces have v0 == v1; the union of segments is exact for
        every representable kind.
        """
        if b < a:
            raise ValueError("pieces: need a <= b")
        cuts = [a]
        for k in self._kinks():
            if a < k < b:
                cuts.append(k)
        cuts.append(b)
        if self.kind == "table":
            for t0, t1 in zip(cuts, cuts[1:]):
                yield t0, t1, self.eval(t0), self.eval(t1)
        else:
            for t0, t1 in zip(cuts, cuts[1:]):
                v = self.eval(t0)
                yield t0, t1, v, v

    def integrate(self, a: float, b: float) -> float:
        """Exact integral over [a, b] (sign-reversed when b < a)."""
        if b < a:
            return -self.integrate(b, a)
        total = 0.0
        for t0, t1, v0, v1 in self.pieces(a, b):
            if self.kind == "table":
                # Simpson on each linear segment; exact for this class.
                vm = 0.5 * (v0 + v1)
                total += (t1 - t0) * (v0 + 4.0 * vm + v1) / 6.0
            else:
                total += (t1 - t0) * v0
        return total

    def sup(self, a: float, b: float) -> float:
        """Exact supremum over [a, b]."""
        best = -math.inf
        for _, _, v0, v1 in self.pieces(a, b):
            best = max(best, v0, v1)
        return best

    def inf(self, a: float, b: float) -> float:
        worst = math.inf
        for _, _, v0, v1 in self.pieces(a, b):
            worst = min(worst, v0, v1)
        return worst

    def nonnegative(self, a: float, b: float) -> bool:
        return self.inf(a, b) >= 0.0

    def is_zero(self) -> bool:
        if self.kind == "constant":
            return self.value == 0.0
        if self.kind == "piecewise":
            return all(v == 0.0 for v in self.values)
        return all(p[1] == 0.0 for p in self.points)

    def sliding_sup(self, window: float, horizon: float) -> float:
        """sup over t in [0, horizon - window] of the integral over
        [t, t + window].

        For constant and piecewise kinds the supremum is exact: the
        windowed integral is piecewise linear in t with kinks only where
        the window edges cross a breakpoint.  Table kinds use the same
        kink candidates plus a dense scan with step <= window / 256.
        The spec is constant past its last structural point, so scanning
        up to that point plus one window also bounds the tail exactly.
        """
        if window <= 0.0:
            raise ValueError("sliding_sup: window must be positive")
        if window > horizon:
            raise ValueError("sliding_sup: window exceeds horizon")
        kinks = self._kinks()
        hi = max(horizon, (kinks[-1] + window) if kinks else 0.0)
        t_max = hi - window
        cands = {0.0, t_max}
        for k in kinks:
            for c in (k, k - window):
                if 0.0 <= c <= t_max:
                    cands.add(c)
        if self.kind == "table":
            n = int(math.ceil(t_max / (window / 256.0))) if t_max > 0.0 else 0
            for i in range(1, n):
                cands.add(t_max * i / n)
        best = -math.inf
        for c in sorted(cands):
            best = max(best, self.integrate(c, c + window))
        return best

    def split_signs(self) -> tuple["CoefficientSpec", "CoefficientSpec"]:
        """Return (positive part, negative part), both nonnegative specs
        with ``pos - neg`` recomposing this spec exactly."""
        if self.kind == "constant":
            return (
                CoefficientSpec.constant(max(self.value, 0.0)),
                CoefficientSpec.constant(max(-self.value, 0.0)),
            )
        if self.kind == "piecewise":
            pos = tuple(max(v, 0.0) for v in self.values)
            neg = tuple(max(-v, 0.0) for v in self.values)
            return (
                CoefficientSpec("piecewise", breakpoints=self.breakpoints, values=pos),
                CoefficientSpec("piecewise", breakpoints=self.breakpoints, values=neg),
            )
        # Insert exact zero crossings so each part stays piecewise linear.
        pts = list(self.points)
        refined = [pts[0]]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if (v0 > 0.0 > v1) or (v0 < 0.0 < v1):
                tc = t0 + (0.0 - v0) * (t1 - t0) / (v1 - v0)
                if t0 < tc < t1:
                    refined.append((tc, 0.0))
            refined.append((t1, v1))
        pos = tuple((t, max(v, 0.0)) for t, v in refined)
        neg = tuple((t, max(-v, 0.0)) for t, v in refined)
        return CoefficientSpec("table", points=pos), CoefficientSpec("table", points=neg)

    def pack(self) -> tuple[int, float, tuple[float, ...], tuple[float, ...]]:
        """Flatten to (kind code, scalar, xs, ys) for the stepping kernel."""
        if self.kind == "constant":
            return C_CONSTANT, self.value, (), ()
        if self.kind == "piecewise":
            return C_PIECEWISE, 0.0, self.breakpoints, self.values
        xs = tuple(p[0] for p in self.points)
        ys = tuple(p[1] for p in self.points)
        return C_TABLE, 0.0, xs, ys

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "piecewise":
            return {
                "kind": "piecewise",
                "breakpoints": list(self.breakpoints),
                "values": list(self.values),
            }
        return {"kind": "table", "points": [list(p) for p in self.points]}

    @classmethod
    def from_dict(cls, d: dict, ctx: str) -> "CoefficientSpec":
        _check_keys(d, {"kind", "value", "breakpoints", "values", "points"}, ctx)
        kind = d.get("kind")
        if kind == "constant":
            _check_keys(d, {"kind", "value"}, ctx)
            return cls.constant(_as_float(d.get("value", 0.0), ctx))
        if kind == "piecewise":
            _check_keys(d, {"kind", "breakpoints", "values"}, ctx)
            bps = _float_tuple(d.get("breakpoints", []), ctx)
            vals = _float_tuple(d.get("values", []), ctx)
            if len(vals) != len(bps) + 1:
                raise ProblemFormatError(
                    f"{ctx}: piecewise needs len(values) == len(breakpoints) + 1"
                )
            return cls("piecewise", breakpoints=bps, values=vals)
        if kind == "table":
            _check_keys(d, {"kind", "points"}, ctx)
            pts = d.get("points")
            if not isinstance(pts, (list, tuple)) or len(pts) < 2:
                raise ProblemFormatError(f"{ctx}: table needs at least two points")
            out = []
            for p in pts:
                if not isinstance(p, (list, tuple)) or len(p) != 2:
                    raise ProblemFormatError(f"{ctx}: table points must be [t, v] pairs")
                out.append((_as_float(p[0], ctx), _as_float(p[1], ctx)))
            return cls("table", points=tuple(out))
        raise ProblemFormatError(f"{ctx}: unknown kind: {kind!r}")


def eval_coefficient(spec: CoefficientSpec, t: float, side: int = 1) -> float:
    return spec.eval(t, side)


def integrate_coefficient(spec: CoefficientSpec, a: float, b: float) -> float:
    return spec.integrate(a, b)


def split_signs(spec: CoefficientSpec) -> tuple[CoefficientSpec, CoefficientSpec]:
    return spec.split_signs()


def sliding_sup_integral(spec: CoefficientSpec, window: float, horizon: float) -> float:
    return spec.sliding_sup(window, horizon)


def sum_specs(specs) -> CoefficientSpec:
    """Exact sum of coefficient specs.

    Sums of constants/steps stay piecewise-constant; once a table is
    involved the sum is piecewise linear and is returned as a table over
    the union of kink positions (exact for this class).
    """
    specs = list(specs)
    if not specs:
        return CoefficientSpec.constant(0.0)
    if len(specs) == 1:
        return specs[0]
    if all(s.kind in ("constant", "piecewise") for s in specs):
        bps = sorted({b for s in specs for b in s._kinks()})
        values = []
        probes = ([bps[0] - 1.0] if bps else [0.0]) + list(bps)
        for p in probes:
            values.append(sum(s.eval(p) for s in specs))
        if not bps:
            return CoefficientSpec.constant(values[0])
        return CoefficientSpec("piecewise", breakpoints=tuple(bps), values=tuple(values))
    kinks = sorted({k for s in specs for k in s._kinks()})
    lo = min(kinks) - 1.0
    hi = max(kinks) + 1.0
    xs = [lo, *kinks, hi]
    pts = tuple((x, sum(s.eval(x) for s in specs)) for x in xs)
    return CoefficientSpec("table", points=pts)


def sup_of_sum(specs, a: float, b: float) -> float:
    """Exact sup over [a, b] of the pointwise sum of specs."""
    return sum_specs(specs).sup(a, b)


# ---------------------------------------------------------------------------
# delays


@dataclass(frozen=True)
class DelaySpec:
    """Deviating argument h(t) <= t.

    Kinds: "identity" (h(t) = t), "constant_lag" (h(t) = t - delta) and
    "table" (piecewise linear through ``points``, extended with slope one
    beyond the sampled range so the lag freezes at its end values).
    """

    kind: str
    delta: float = 0.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "constant_lag", "table"):
            raise ValueError(f"unknown delay kind: {self.kind}")
        if self.kind == "table" and len(self.points) < 2:
            raise ValueError("table delay needs at least two points")

    @classmethod
    def identity(cls) -> "DelaySpec":
        return cls("identity")

    @classmethod
    def constant_lag(cls, delta: float) -> "DelaySpec":
        return cls("constant_lag", delta=float(delta))

    @classmethod
    def table(cls, points) -> "DelaySpec":
        return cls("table", points=tuple((float(t), float(h)) for t, h in points))

    def eval(self, t: float) -> float:
        if self.kind == "identity":
            return t
        if self.kind == "constant_lag":
            return t - self.delta
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if t <= xs[0]:
            return ys[0] - (xs[0] - t)
        if t >= xs[-1]:
            return ys[-1] + (t - xs[-1])
        i = bisect_right(xs, t) - 1
        u = (t - xs[i]) / (xs[i + 1] - xs[i])
        return ys[i] + u * (ys[i + 1] - ys[i])

    def __call__(self, t: float) -> float:
        return self.eval(t)

    def is_identity(self) -> bool:
        return self.kind == "identity" or (self.kind == "constant_lag" and self.delta == 0.0)

    def _kinks(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.points) if self.kind == "table" else ()

    def max_lag(self, a: float, b: float) -> float:
        """sup of t - h(t) over [a, b]; the lag is piecewise linear so the
        supremum sits at a kink or an endpoint."""
        if self.kind == "identity":
            return 0.0
        if self.kind == "constant_lag":
            return self.delta
        cands = [a, b] + [k for k in self._kinks() if a < k < b]
        return max(t - self.eval(t) for t in cands)

    def crossings(self, level: float, a: float, b: float) -> list[float]:
        """Times in (a, b) where h crosses ``level``, found exactly on the
        linear pieces (satisfies any root tolerance down to roundoff)."""
        if self.kind == "identity":
            return [level] if a < level < b else []
        if self.kind == "constant_lag":
            t = level + self.delta
            return [t] if a < t < b else []
        nodes = sorted({a, b, *[k for k in self._kinks() if a < k < b]})
        out: list[float] = []
        for t0, t1 in zip(nodes, nodes[1:]):
            v0 = self.eval(t0) - level
            v1 = self.eval(t1) - level
            if v0 == 0.0 and a < t0:
                out.append(t0)
            if (v0 > 0.0 > v1) or (v0 < 0.0 < v1):
                tc = t0 + (0.0 - v0) * (t1 - t0) / (v1 - v0)
                if t0 < tc < t1:
                    out.append(tc)
        dedup: list[float] = []
        for t in sorted(out):
            if not dedup or t - dedup[-1] > 4.0 * _EPS * max(1.0, abs(t)):
                dedup.append(t)
        return dedup

    def pack(self) -> tuple[int, float, tuple[float, ...], tuple[float, ...]]:
        if self.kind == "identity":
            return D_IDENTITY, 0.0, (), ()
        if self.kind == "constant_lag":
            return D_LAG, self.delta, (), ()
        xs = tuple(p[0] for p in self.points)
        ys = tuple(p[1] for p in self.points)
        return D_TABLE, 0.0, xs, ys

    def to_dict(self) -> dict:
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "constant_lag":
            return {"kind": "constant_lag", "delta": self.delta}
        return {"kind": "table", "points": [list(p) for p in self.points]}

    @classmethod
    def from_dict(cls, d: dict, ctx: str) -> "DelaySpec":
        _check_keys(d, {"kind", "delta", "points"}, ctx)
        kind = d.get("kind")
        if kind == "identity":
            _check_keys(d, {"kind"}, ctx)
            return cls.identity()
        if kind == "constant_lag":
            _check_keys(d, {"kind", "delta"}, ctx)
            return cls.constant_lag(_as_float(d.get("delta", 0.0), ctx))
        if kind == "table":
            _check_keys(d, {"kind", "points"}, ctx)
            pts = d.get("points")
            if not isinstance(pts, (list, tuple)) or len(pts) < 2:
                raise ProblemFormatError(f"{ctx}: table needs at least two points")
            out = []
            for p in pts:
                if not isinstance(p, (list, tuple)) or len(p) != 2:
                    raise ProblemFormatError(f"{ctx}: table points must be [t, h] pairs")
                out.append((_as_float(p[0], ctx), _as_float(p[1], ctx)))
            return cls("table", points=tuple(out))
        raise ProblemFormatError(f"{ctx}: unknown kind: {kind!r}")


# ---------------------------------------------------------------------------
# impulses


@dataclass(frozen=True)
class ImpulseSchedule:
    """Impulse times with multiplicative gains, optionally extended by a
    periodic rule (next time = previous + period, with a fixed gain)."""

    times: tuple[float, ...] = ()
    gains: tuple[float, ...] = ()
    period: float | None = None
    periodic_gain: float | None = None

    def __post_init__(self):
        if len(self.times) != len(self.gains):
            raise ValueError("times and gains must have equal length")
        if (self.period is None) != (self.periodic_gain is None):
            raise ValueError("periodic rule needs both period and gain")

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def unroll(self, horizon: float) -> tuple[list[float], list[float]]:
        """Times in (0, horizon] with their gains, periodic rule applied."""
        times = [t for t in self.times if 0.0 < t <= horizon]
        gains = [g for t, g in zip(self.times, self.gains) if 0.0 < t <= horizon]
        if self.periodic and self.period > 0.0:
            t = (self.times[-1] if self.times else 0.0) + self.period
            guard = 0
            while t <= horizon and guard < 100_000_000:
                times.append(t)
                gains.append(self.periodic_gain)
                t += self.period
                guard += 1
        return times, gains

    def covers(self, horizon: float) -> bool:
        """Whether the schedule keeps placing impulses up to ``horizon``:
        either it is periodic or the tail past the last explicit time is
        no longer than the largest scheduled gap."""
        if self.periodic:
            return self.period > 0.0
        if not self.times:
            return False
        gaps = self.gaps(self.times[-1])
        return horizon - self.times[-1] <= max(gaps)

    def gaps(self, horizon: float) -> list[float]:
        """Consecutive gaps of the unrolled schedule, including the leading
        interval (0, tau_1]."""
        times, _ = self.unroll(horizon)
        if not times:
            return []
        out = [times[0]]
        out.extend(b - a for a, b in zip(times, times[1:]))
        return out

    def spacing(self, horizon: float) -> tuple[float, float]:
        """(max gap, min gap) of the unrolled schedule within horizon."""
        gaps = self.gaps(horizon)
        if not gaps:
            raise ValueError("schedule has no impulses within horizon")
        return max(gaps), min(gaps)

    def default_horizon(self) -> float | None:
        if self.times:
            return self.times[-1]
        if self.periodic and self.period > 0.0:
            return 20.0 * self.period
        return None

    def to_dict(self) -> dict:
        d: dict = {"times": list(self.times), "gains": list(self.gains)}
        if self.periodic:
            d["periodic"] = {"period": self.period, "gain": self.periodic_gain}
        return d

    @classmethod
    def from_dict(cls, d: dict, ctx: str) -> "ImpulseSchedule":
        _check_keys(d, {"times", "gains", "periodic"}, ctx)
        times = _float_tuple(d.get("times", []), f"{ctx}.times")
        gains = _float_tuple(d.get("gains", []), f"{ctx}.gains")
        if len(times) != len(gains):
            raise ProblemFormatError(f"{ctx}: times and gains must have equal length")
        period = None
        pgain = None
        if "periodic" in d:
            p = d["periodic"]
            _check_keys(p, {"period", "gain"}, f"{ctx}.periodic")
            period = _as_float(p.get("period"), f"{ctx}.periodic.period")
            pgain = _as_float(p.get("gain"), f"{ctx}.periodic.gain")
        return cls(times=times, gains=gains, period=period, periodic_gain=pgain)


# ---------------------------------------------------------------------------
# history


@dataclass(frozen=True)
class HistorySpec:
    """Prehistory phi on (-inf, 0).

    Kinds: "zero", "constant", "table" (piecewise linear, clamped to its
    end values) and "piecewise" (right-continuous steps, the form used
    for randomized boundedness trials).
    """

    kind: str
    value: float = 0.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "table", "piecewise"):
            raise ValueError(f"unknown history kind: {self.kind}")
        if self.kind == "piecewise" and len(self.values) != len(self.breakpoints) + 1:
            raise ValueError("piecewise history needs len(values) == len(breakpoints) + 1")
        if self.kind == "table" and len(self.points) < 2:
            raise ValueError("table history needs at least two points")

    @classmethod
    def zero(cls) -> "HistorySpec":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "HistorySpec":
        return cls("constant", value=float(value))

    @classmethod
    def table(cls, points) -> "HistorySpec":
        return cls("table", points=tuple((float(t), float(v)) for t, v in points))

    @classmethod
    def piecewise(cls, breakpoints, values) -> "HistorySpec":
        return cls(
            "piecewise",
            breakpoints=tuple(float(b) for b in breakpoints),
            values=tuple(float(v) for v in values),
        )

    def _kinks(self) -> tuple[float, ...]:
        """Points where phi jumps or changes slope."""
        if self.kind == "piecewise":
            return self.breakpoints
        if self.kind == "table":
            return tuple(p[0] for p in self.points)
        return ()

    def eval(self, xi: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value
        if self.kind == "piecewise":
            return self.values[bisect_right(self.breakpoints, xi)]
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if xi <= xs[0]:
            return ys[0]
        if xi >= xs[-1]:
            return ys[-1]
        i = bisect_right(xs, xi) - 1
        u = (xi - xs[i]) / (xs[i + 1] - xs[i])
        return ys[i] + u * (ys[i + 1] - ys[i])

    def __call__(self, xi: float) -> float:
        return self.eval(xi)

    def sup_abs(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "piecewise":
            return max(abs(v) for v in self.values)
        return max(abs(p[1]) for p in self.points)

    def is_zero(self) -> bool:
        return self.sup_abs() == 0.0

    def pack(self) -> tuple[int, float, tuple[float, ...], tuple[float, ...]]:
        if self.kind == "zero":
            return H_ZERO, 0.0, (), ()
        if self.kind == "constant":
            return H_CONSTANT, self.value, (), ()
        if self.kind == "table":
            xs = tuple(p[0] for p in self.points)
            ys = tuple(p[1] for p in self.points)
            return H_TABLE, 0.0, xs, ys
        return H_PIECEWISE, 0.0, self.breakpoints, self.values

    def to_dict(self) -> dict:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "table":
            return {"kind": "table", "points": [list(p) for p in self.points]}
        return {
            "kind": "piecewise",
            "breakpoints": list(self.breakpoints),
            "values": list(self.values),
        }

    @classmethod
    def from_dict(cls, d: dict, ctx: str) -> "HistorySpec":
        _check_keys(d, {"kind", "value", "breakpoints", "values", "points"}, ctx)
        kind = d.get("kind")
        if kind == "zero":
            _check_keys(d, {"kind"}, ctx)
            return cls.zero()
        if kind == "constant":
            _check_keys(d, {"kind", "value"}, ctx)
            return cls.constant(_as_float(d.get("value", 0.0), ctx))
        if kind == "table":
            _check_keys(d, {"kind", "points"}, ctx)
            pts = d.get("points")
            if not isinstance(pts, (list, tuple)) or len(pts) < 2:
                raise ProblemFormatError(f"{ctx}: table needs at least two points")
            out = []
            for p in pts:
                if not isinstance(p, (list, tuple)) or len(p) != 2:
                    raise ProblemFormatError(f"{ctx}: table points must be [t, v] pairs")
                out.append((_as_float(p[0], ctx), _as_float(p[1], ctx)))
            return cls("table", points=tuple(out))
        if kind == "piecewise":
            _check_keys(d, {"kind", "breakpoints", "values"}, ctx)
            bps = _float_tuple(d.get("breakpoints", []), ctx)
            vals = _float_tuple(d.get("values", []), ctx)
            if len(vals) != len(bps) + 1:
                raise ProblemFormatError(
                    f"{ctx}: piecewise needs len(values) == len(breakpoints) + 1"
                )
            return cls("piecewise", breakpoints=bps, values=vals)
        raise ProblemFormatError(f"{ctx}: unknown kind: {kind!r}")


# ---------------------------------------------------------------------------
# full problem


@dataclass(frozen=True)
class Term:
    coefficient: CoefficientSpec
    delay: DelaySpec


@dataclass(frozen=True)
class Problem:
    """One scalar impulsive delay equation instance."""

    terms: tuple[Term, ...]
    impulses: ImpulseSchedule = field(default_factory=ImpulseSchedule)
    history: HistorySpec = field(default_factory=HistorySpec.zero)
    forcing: CoefficientSpec = field(default_factory=lambda: CoefficientSpec.constant(0.0))
    x0: float = 0.0
    horizon: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("problem needs at least one term")

    @property
    def m(self) -> int:
        return len(self.terms)

    def coefficients(self) -> list[CoefficientSpec]:
        return [t.coefficient for t in self.terms]

    def delays(self) -> list[DelaySpec]:
        return [t.delay for t in self.terms]

    def max_lag(self, a: float, b: float) -> float:
        return max(t.delay.max_lag(a, b) for t in self.terms)

    def coefficients_nonnegative(self, a: float, b: float) -> bool:
        return all(t.coefficient.nonnegative(a, b) for t in self.terms)

    def resolve_horizon(self, horizon: float | None = None) -> float:
        """Explicit horizon, else the problem's own, else the schedule's
        last impulse time."""
        if horizon is not None:
            return float(horizon)
        if self.horizon is not None:
            return self.horizon
        h = self.impulses.default_horizon()
        if h is None:
            raise ValueError("no horizon given and none derivable from the schedule")
        return h

    def to_dict(self) -> dict:
        d = {
            "terms": [
                {"coefficient": t.coefficient.to_dict(), "delay": t.delay.to_dict()}
                for t in self.terms
            ],
            "impulses": self.impulses.to_dict(),
            "history": self.history.to_dict(),
            "forcing": self.forcing.to_dict(),
            "x0": self.x0,
        }
        if self.horizon is not None:
            d["horizon"] = self.horizon
        return d


def problem_from_dict(d: dict) -> Problem:
    _check_keys(d, {"terms", "impulses", "history", "forcing", "x0", "horizon"}, "problem")
    raw_terms = d.get("terms")
    if not isinstance(raw_terms, (list, tuple)) or not raw_terms:
        raise ProblemFormatError("problem: terms must be a non-empty list")
    terms = []
    for i, rt in enumerate(raw_terms):
        ctx = f"terms[{i}]"
        _check_keys(rt, {"coefficient", "delay"}, ctx)
        if "coefficient" not in rt or "delay" not in rt:
            raise ProblemFormatError(f"{ctx}: needs coefficient and delay")
        terms.append(
            Term(
                CoefficientSpec.from_dict(rt["coefficient"], f"{ctx}.coefficient"),
                DelaySpec.from_dict(rt["delay"], f"{ctx}.delay"),
            )
        )
    impulses = ImpulseSchedule.from_dict(d.get("impulses", {}), "impulses")
    history = HistorySpec.from_dict(d.get("history", {"kind": "zero"}), "history")
    forcing = CoefficientSpec.from_dict(d.get("forcing", {"kind": "constant", "value": 0.0}), "forcing")
    x0 = _as_float(d.get("x0", 0.0), "x0")
    horizon = None
    if "horizon" in d:
        horizon = _as_float(d["horizon"], "horizon")
    return Problem(
        terms=tuple(terms),
        impulses=impulses,
        history=history,
        forcing=forcing,
        x0=x0,
        horizon=horizon,
    )


def load_problem(path) -> Problem:
    """Read a problem from a JSON file; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ProblemFormatError(f"invalid JSON: {e}") from None
    if not isinstance(d, dict):
        raise ProblemFormatError("problem file must contain a JSON object")
    return problem_from_dict(d)


def problem_to_dict(problem: Problem) -> dict:
    return problem.to_dict()


def save_problem(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(problem.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    nonneg_coefficients: bool
    nonneg_gains: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(problem: Problem, horizon: float | None = None) -> ValidationReport:
    """Check the standing hypotheses and return every violation found.

    (a1) impulse times strictly positive, strictly increasing, and the
         periodic extension (if any) has positive period;
    (a2) coefficients and forcing are bounded with increasing structure
         points;
    (a3) every delayed argument satisfies h(t) <= t;
    (a4) the history is bounded.
    """
    v: list[str] = []
    try:
        hi = problem.resolve_horizon(horizon)
    except ValueError:
        hi = max((k for t in problem.terms for k in t.coefficient._kinks()), default=0.0)
        hi = max(hi, 10.0)

    sched = problem.impulses
    for j, t in enumerate(sched.times):
        if t <= 0.0:
            v.append(f"(a1): impulse times must be positive, got {t:g}")
            break
    for a, b in zip(sched.times, sched.times[1:]):
        if b <= a:
            v.append(f"(a1): impulse times not strictly increasing at {b:g}")
            break
    if sched.periodic and sched.period <= 0.0:
        v.append(f"(a1): periodic extension needs a positive period, got {sched.period:g}")
    for g in sched.gains:
        if not math.isfinite(g):
            v.append("(a1): impulse gains must be finite")
            break

    def _structure_sorted(spec: CoefficientSpec, name: str) -> None:
        ks = spec._kinks()
        for a, b in zip(ks, ks[1:]):
            if b <= a:
                v.append(f"(a2): {name} structure points not strictly increasing at {b:g}")
                return
        vals = spec.values if spec.kind == "piecewise" else tuple(p[1] for p in spec.points)
        if spec.kind == "constant":
            vals = (spec.value,)
        for val in vals:
            if not math.isfinite(val):
                v.append(f"(a2): {name} values must be finite")
                return

    for i, term in enumerate(problem.terms):
        _structure_sorted(term.coefficient, f"terms[{i}].coefficient")
    _structure_sorted(problem.forcing, "forcing")

    for i, term in enumerate(problem.terms):
        d = term.delay
        if d.kind == "constant_lag" and d.delta < 0.0:
            v.append(f"(a3): h(t) > t at t=0 (negative lag {d.delta:g})")
            continue
        if d.kind == "table":
            ks = d._kinks()
            for a, b in zip(ks, ks[1:]):
                if b <= a:
                    v.append(f"(a3): terms[{i}].delay points not strictly increasing at {b:g}")
                    break
            worst_t = None
            worst = 0.0
            for t in set(ks) | {0.0, hi}:
                excess = d.eval(t) - t
                if excess > worst:
                    worst = excess
                    worst_t = t
            if worst_t is not None:
                v.append(f"(a3): h(t) > t at t={worst_t:g}")

    if problem.history.kind != "zero":
        hvals: tuple[float, ...]
        if problem.history.kind == "constant":
            hvals = (problem.history.value,)
        elif problem.history.kind == "piecewise":
            hvals = problem.history.values
        else:
            hvals = tuple(p[1] for p in problem.history.points)
        if any(not math.isfinite(x) for x in hvals):
            v.append("(a4): history values must be finite")

    if not math.isfinite(problem.x0):
        v.append("x0 must be finite")

    nonneg_a = all(
        t.coefficient.inf(0.0, max(hi, 1.0)) >= 0.0 for t in problem.terms
    )
    nonneg_b = all(g >= 0.0 for g in sched.gains) and (
        sched.periodic_gain is None or sched.periodic_gain >= 0.0
    )
    return ValidationReport(tuple(v), nonneg_a, nonneg_b)


def zero_forcing(problem: Problem) -> Problem:
    """Copy of the problem with the forcing term removed."""
    return replace(problem, forcing=CoefficientSpec.constant(0.0))
