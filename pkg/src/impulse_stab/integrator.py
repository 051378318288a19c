"""Method-of-steps integration of scalar impulsive delay equations.

The solver advances classical RK4 over a mesh forced through every
impulse time, every structure point of the coefficients and forcing, and
the first generation of delay-induced kinks (the images of the start time
and of each impulse under t -> t + lag, plus exact crossing points for
table delays).  Between impulses the solution is C^1 away from those
points, so RK4 with cubic Hermite dense output keeps its fourth order.
Impulses are applied as exact multiplications at their nodes; both the
left limit and the post-jump value are stored for every node.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace

import numpy as np

from . import _kernel
from .model import (
    CoefficientSpec,
    HistorySpec,
    ImpulseStabError,
    InvalidProblemError,
    Problem,
    validate,
)

__all__ = ["SolveOptions", "Trajectory", "SolverError", "solve", "build_mesh"]

_EPS = 2.220446049250313e-16
_MAX_NODES = 100_000_000


class SolverError(ImpulseStabError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    """Integration controls.

    ``step`` is the target mesh spacing (clamped down so at least four
    steps fit in the smallest impulse gap); ``interpolation`` selects the
    dense-output and delayed-lookup scheme ("cubic-hermite" or "linear").
    """

    step: float = 1e-3
    horizon: float | None = None
    interpolation: str = "cubic-hermite"

    def __post_init__(self):
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if self.interpolation not in ("cubic-hermite", "linear"):
            raise ValueError("interpolation must be 'cubic-hermite' or 'linear'")


@dataclass(frozen=True)
class Trajectory:
    """A computed solution on [start, horizon].

    ``x`` holds right-continuous node values, ``x_left`` the left limits
    (they differ only at impulse nodes).  Evaluation between nodes uses
    the same interpolant the solver used for delayed lookups.
    """

    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    x_left: np.ndarray
    dx_left: np.ndarray
    is_impulse: np.ndarray
    start: float
    horizon: float
    history: HistorySpec
    interpolation: str

    @property
    def impulse_times(self) -> np.ndarray:
        return self.t[self.is_impulse]

    def _seg_value(self, j: int, tt: float) -> float:
        t0 = self.t[j]
        t1 = self.t[j + 1]
        h = t1 - t0
        u = (tt - t0) / h
        y0 = self.x[j]
        y1 = self.x_left[j + 1]
        if self.interpolation == "linear":
            return y0 + u * (y1 - y0)
        d0 = self.dx[j]
        d1 = self.dx_left[j + 1]
        u2 = u * u
        u3 = u2 * u
        return (
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * (h * d0)
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * (h * d1)
        )

    def eval(self, tt: float) -> float:
        """Right-continuous value at ``tt``; history before the start."""
        if tt < self.start:
            return self.history.eval(tt)
        if tt > self.horizon * (1.0 + 4.0 * _EPS) + 4.0 * _EPS:
            raise ValueError(f"t={tt:g} beyond horizon {self.horizon:g}")
        tlist = self.t
        j = int(np.searchsorted(tlist, tt, side="right")) - 1
        if j < 0:
            j = 0
        tol = 4.0 * _EPS * max(1.0, abs(tt))
        if j + 1 < len(tlist) and tlist[j + 1] - tt <= tol:
            return float(self.x[j + 1])
        if tt - tlist[j] <= tol or j + 1 >= len(tlist):
            return float(self.x[j])
        return float(self._seg_value(j, tt))

    def eval_left(self, tt: float) -> float:
        """Left limit at ``tt``."""
        if tt <= self.start:
            return self.history.eval(tt) if tt < self.start else float(self.x[0])
        if tt > self.horizon * (1.0 + 4.0 * _EPS) + 4.0 * _EPS:
            raise ValueError(f"t={tt:g} beyond horizon {self.horizon:g}")
        tlist = self.t
        j = int(np.searchsorted(tlist, tt, side="right")) - 1
        tol = 4.0 * _EPS * max(1.0, abs(tt))
        if j + 1 < len(tlist) and tlist[j + 1] - tt <= tol:
            return float(self.x_left[j + 1])
        if tt - tlist[j] <= tol:
            return float(self.x_left[j])
        if j + 1 >= len(tlist):
            return float(self.x[j])
        return float(self._seg_value(j, tt))

    def interval_bounds(self) -> list[float]:
        """Start, impulse times, horizon: the natural partition of the run."""
        out = [self.start]
        for tt in self.impulse_times:
            if tt > out[-1]:
                out.append(float(tt))
        if self.horizon > out[-1]:
            out.append(self.horizon)
        return out

    def to_csv(self, path) -> None:
        """Write ``t,x,is_impulse,left_limit`` rows; the left-limit column
        is filled only at impulse nodes."""
        with open(path, "w", encoding="utf-8") as f:
            f.write("t,x,is_impulse,left_limit\n")
            for i in range(len(self.t)):
                imp = bool(self.is_impulse[i])
                left = repr(float(self.x_left[i])) if imp else ""
                f.write(f"{float(self.t[i])!r},{float(self.x[i])!r},{int(imp)},{left}\n")


def _merge_close(points: list[float], keep: set[float]) -> list[float]:
    """Sort and deduplicate mesh seeds, dropping non-essential points that
    sit within a few ulps of an essential one (impulse times win)."""
    out: list[float] = []
    for p in sorted(points):
        if out:
            tol = 32.0 * _EPS * max(1.0, abs(p))
            if p - out[-1] <= tol:
                if p in keep and out[-1] in keep and p != out[-1]:
                    raise SolverError(f"impulse times too close to separate near t={p:g}")
                if p in keep and out[-1] not in keep:
                    out[-1] = p
                continue
        out.append(p)
    return out


def build_mesh(
    problem: Problem, options: SolveOptions, start: float, horizon: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mesh for [start, horizon]: impulse times, structure points and
    first-generation delay kinks, filled uniformly to the target step."""
    if horizon < start:
        raise SolverError(f"horizon {horizon:g} must not precede start {start:g}")
    if horizon == start:
        return (
            np.array([start], dtype=np.float64),
            np.zeros(1, dtype=np.int8),
            np.zeros(1, dtype=np.float64),
        )
    imp_times, imp_gains = problem.impulses.unroll(horizon)
    imp_times = [t for t in imp_times if t > start]
    imp_gains = imp_gains[len(imp_gains) - len(imp_times):]

    seeds = [start, horizon]
    for term in problem.terms:
        for k in term.coefficient._kinks():
            if start < k < horizon:
                seeds.append(k)
        d = term.delay
        for k in d._kinks():
            if start < k < horizon:
                seeds.append(k)
        if d.kind == "constant_lag" and d.delta > 0.0:
            for src in [start, *imp_times]:
                p = src + d.delta
                if start < p < horizon:
                    # place the kink so that p - delta reproduces the source
                    # time exactly, keeping the delayed lookup on-node
                    for _ in range(4):
                        if p - d.delta >= src:
                            break
                        p = math.nextafter(p, math.inf)
                    seeds.append(p)
        elif d.kind == "table":
            for src in [start, *imp_times]:
                seeds.extend(d.crossings(src, start, horizon))
    for k in problem.forcing._kinks():
        if start < k < horizon:
            seeds.append(k)
    seeds.extend(imp_times)

    essential = set(imp_times) | {start, horizon}
    base = _merge_close(seeds, essential)

    step = options.step
    if imp_times:
        gaps = [imp_times[0] - start]
        gaps.extend(b - a for a, b in zip(imp_times, imp_times[1:]))
        min_gap = min(gaps)
        if min_gap / 4.0 < step:
            step = min_gap / 4.0
    if step <= 0.0 or (horizon - start) / step > _MAX_NODES:
        raise SolverError("step underflow: mesh would exceed the node limit")

    total = 0
    counts = []
    for a, b in zip(base, base[1:]):
        c = max(1, int(math.ceil((b - a) / step - 1e-9)))
        counts.append(c)
        total += c
    if total + 1 > _MAX_NODES:
        raise SolverError("step underflow: mesh would exceed the node limit")

    node_t = np.empty(total + 1, dtype=np.float64)
    node_imp = np.zeros(total + 1, dtype=np.int8)
    node_gain = np.zeros(total + 1, dtype=np.float64)
    pos = 0
    for (a, b), c in zip(zip(base, base[1:]), counts):
        for i in range(c):
            node_t[pos] = a + (b - a) * (i / c) if i else a
            pos += 1
    node_t[pos] = base[-1]

    gain_at = dict(zip(imp_times, imp_gains))
    idx = np.searchsorted(node_t, list(gain_at.keys()))
    for (tt, g), i in zip(gain_at.items(), idx):
        node_imp[i] = 1
        node_gain[i] = g
    return node_t, node_imp, node_gain


def solve(
    problem: Problem,
    options: SolveOptions | None = None,
    start: float = 0.0,
    horizon: float | None = None,
    check: bool = True,
    impl=None,
) -> Trajectory:
    """Integrate the problem from ``start`` with ``x(start) = x0``.

    Impulses strictly after ``start`` are applied; the problem's history
    serves for arguments before ``start`` (runs started later than zero
    pair with shift-invariant histories such as zero or a constant, which
    is how the fundamental-function and auxiliary solves use this).
    """
    options = options or SolveOptions()
    hi = problem.resolve_horizon(horizon if horizon is not None else options.horizon)
    if check:
        report = validate(problem, hi)
        if not report.ok:
            raise InvalidProblemError(report)
    node_t, node_imp, node_gain = build_mesh(problem, options, start, hi)
    pack = _kernel.PackedProblem(problem)
    val, der, lval, lder = _kernel.run_mesh(
        pack,
        node_t,
        node_imp,
        node_gain,
        problem.x0,
        start,
        options.interpolation == "linear",
        impl=impl,
    )
    if not np.all(np.isfinite(val)):
        bad = int(np.argmax(~np.isfinite(val)))
        raise SolverError(f"solution became non-finite near t={node_t[bad]:g}")
    return Trajectory(
        t=node_t,
        x=val,
        dx=der,
        x_left=lval,
        dx_left=lder,
        is_impulse=node_imp.astype(bool),
        start=start,
        horizon=hi,
        history=problem.history,
        interpolation=options.interpolation,
    )


def eval_trajectory(traj: Trajectory, t: float) -> float:
    return traj.eval(t)


def eval_trajectory_left(traj: Trajectory, t: float) -> float:
    return traj.eval_left(t)
