"""Command-line front end.

Subcommands: validate, simulate, check, synthesize, verify, fundamental.
Every command exits 0 on success/certified, 1 when a verdict is
inconclusive, a design is infeasible or an empirical bound is exceeded,
and 2 on input errors.  Machine-readable artifacts (CSV, JSON) go to the
paths given by ``--out``/``--report``; standard output carries a short
human-readable summary.
"""

from __future__ import annotations

import argparse
import json
import sys

from .criteria import (
    CRITERIA,
    check_auto,
    check_thm2,
)
from .fundamental import fit_envelope, fundamental_table, table_to_csv
from .integrator import SolveOptions, solve
from .model import (
    ImpulseStabError,
    InvalidProblemError,
    Problem,
    ProblemFormatError,
    load_problem,
    save_problem,
    validate,
)
from .synth import (
    InfeasibleError,
    SynthesisRequest,
    synthesize_per_interval,
    synthesize_uniform,
)
from .verify import empirical_boundedness

__all__ = ["main"]

_DEFAULT_STEP = 1e-3
_DEFAULT_TRIALS = 50
_DEFAULT_SEED = 42
_DEFAULT_KMAX = 100.0


def _default_horizon(problem: Problem) -> float:
    """Last impulse time plus five inter-impulse gaps (five periods for a
    purely periodic schedule)."""
    sched = problem.impulses
    if sched.periodic and sched.period > 0.0:
        base = sched.times[-1] if sched.times else 0.0
        return base + 5.0 * sched.period
    if sched.times:
        sigma = max(sched.gaps(sched.times[-1]))
        return sched.times[-1] + 5.0 * sigma
    raise ValueError("no horizon given and none derivable from the schedule")


def _resolve_horizon(problem: Problem, flag: float | None) -> tuple[float, bool]:
    """(horizon, explicit) where explicit means the user or the file asked
    for it, as opposed to the derived default."""
    if flag is not None:
        return float(flag), True
    if problem.horizon is not None:
        return problem.horizon, True
    return _default_horizon(problem), False


def _check_coverage(problem: Problem, horizon: float, explicit: bool) -> None:
    """An explicitly requested horizon must stay inside what the schedule
    provides; the derived default deliberately overshoots by design."""
    if not explicit:
        return
    sched = problem.impulses
    if not sched.times and not sched.periodic:
        return  # no impulses at all: plain delay equation, nothing to exhaust
    if not sched.covers(horizon):
        raise ValueError(
            f"schedule exhausted before horizon {horizon:g}: "
            f"last impulse at {sched.times[-1]:g} and no periodic rule"
        )


def cmd_validate(args) -> int:
    problem = load_problem(args.path)
    report = validate(problem, horizon=args.horizon)
    if report.ok:
        print("OK")
        return 0
    for msg in report.violations:
        print(msg)
    return 2


def cmd_simulate(args) -> int:
    problem = load_problem(args.path)
    horizon, explicit = _resolve_horizon(problem, args.horizon)
    _check_coverage(problem, horizon, explicit)
    traj = solve(problem, SolveOptions(step=args.step), horizon=horizon)
    if args.out:
        traj.to_csv(args.out)
        print(f"wrote {len(traj.t)} rows to {args.out}")
    tf = float(traj.t[-1])
    print(f"simulated [0, {horizon:g}] at step {args.step:g}: x({tf:g}) = {float(traj.x[-1])!r}")
    return 0


def _summarize(report) -> None:
    print(f"{report.criterion}: {report.verdict} (margin {report.margin:.6g})")
    for reason in report.reasons:
        print(f"  note: {reason}")
    if report.certificate:
        for key, val in report.certificate.items():
            print(f"  {key} = {val:.6g}" if isinstance(val, float) else f"  {key} = {val}")


def cmd_check(args) -> int:
    problem = load_problem(args.path)
    options = SolveOptions(step=args.step)
    if args.criterion == "auto":
        report = check_auto(problem, options, horizon=args.horizon, tail_from=args.tail_from)
    elif args.criterion == "thm2":
        report = check_thm2(problem, options, horizon=args.horizon, tail_from=args.tail_from)
    elif args.criterion in ("thm5", "thm6"):
        report = CRITERIA[args.criterion](problem, horizon=args.horizon)
    else:
        report = CRITERIA[args.criterion](
            problem, horizon=args.horizon, tail_from=args.tail_from
        )
    _summarize(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(report.to_json())
        print(f"wrote report to {args.report}")
    return 0 if report.ok else 1


def cmd_synthesize(args) -> int:
    problem = load_problem(args.path)
    if args.times is not None:
        times = [float(tok) for tok in args.times.split(",") if tok.strip()]
        result = synthesize_per_interval(problem, times, safety=args.safety)
    else:
        spacing: float | str = "auto"
        shrink = True
        if args.sigma is not None and args.sigma != "auto":
            spacing = float(args.sigma)
            shrink = False
        request = SynthesisRequest(
            target=args.target, spacing=spacing, safety=args.safety, allow_shrink=shrink
        )
        result = synthesize_uniform(problem, request, horizon=args.horizon)
    if result.sigma is not None:
        print(f"spacing sigma = {result.sigma!r}")
    gains = result.gains
    if len(set(gains)) == 1:
        print(f"gains B_j = {gains[0]!r} ({len(gains)} impulses)")
    else:
        print("gains " + ", ".join(repr(g) for g in gains))
    for reason in result.reasons:
        print(f"  note: {reason}")
    _summarize(result.report)
    if args.out:
        save_problem(result.problem, args.out)
        print(f"wrote problem to {args.out}")
    return 0 if result.report.ok else 1


def cmd_verify(args) -> int:
    problem = load_problem(args.path)
    horizon, explicit = _resolve_horizon(problem, args.horizon)
    _check_coverage(problem, horizon, explicit)
    result = empirical_boundedness(
        problem,
        trials=args.trials,
        horizon=horizon,
        seed=args.seed,
        options=SolveOptions(step=args.step),
    )
    print(
        f"K_emp = {result.k_emp!r} over {args.trials} trials "
        f"(worst trial {result.worst_trial})"
    )
    if result.k_emp > args.kmax:
        print(f"unbounded: K_emp exceeds --kmax {args.kmax:g}")
        return 1
    return 0


def _parse_s_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("s-grid range must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0.0:
            raise ValueError("s-grid step must be positive")
        grid = []
        k = 0
        while True:
            s = start + k * step
            if s > stop + 1e-12 * max(1.0, abs(stop)):
                break
            grid.append(min(s, stop))
            k += 1
        return grid
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_fundamental(args) -> int:
    problem = load_problem(args.path)
    horizon, explicit = _resolve_horizon(problem, args.horizon)
    _check_coverage(problem, horizon, explicit)
    s_grid = _parse_s_grid(args.s_grid)
    table = fundamental_table(
        problem,
        s_grid,
        SolveOptions(step=args.step),
        horizon=horizon,
        impulsive=not args.no_impulses,
    )
    name = "C" if args.no_impulses else "X"
    print(f"computed {name}(t,s) for {len(s_grid)} start points on [0, {horizon:g}]")
    if args.out:
        table_to_csv(table, args.out)
        print(f"wrote table to {args.out}")
    if args.fit:
        fit = fit_envelope(table)
        print(json.dumps(fit.to_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impulse-stab",
        description=(
            "Simulate scalar impulsive delay equations, check stabilization "
            "criteria, and synthesize impulse gains."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, step=True, horizon=True):
        p.add_argument("path", help="problem file (JSON)")
        if horizon:
            p.add_argument("--horizon", type=float, default=None)
        if step:
            p.add_argument("--step", type=float, default=_DEFAULT_STEP)

    p = sub.add_parser("validate", help="check a problem file against the hypotheses")
    add_common(p, step=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="integrate and write a trajectory CSV")
    add_common(p)
    p.add_argument("--out", default=None, help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="run a stabilization criterion")
    add_common(p)
    p.add_argument(
        "--criterion",
        choices=["auto", *sorted(CRITERIA)],
        default="auto",
    )
    p.add_argument("--tail-from", type=int, default=1, dest="tail_from",
                   help="ignore impulse intervals before this index")
    p.add_argument("--report", default=None, help="JSON report path")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", help="design stabilizing impulse gains")
    add_common(p, step=False)
    p.add_argument("--target", choices=["stable", "exponential"], default="stable")
    p.add_argument("--sigma", default=None,
                   help="impulse spacing (number, or 'auto' to bisect)")
    p.add_argument("--safety", type=float, default=0.9)
    p.add_argument("--times", default=None,
                   help="comma-separated impulse times for per-interval gains")
    p.add_argument("--out", default=None, help="write the synthesized problem here")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="empirical boundedness over random data")
    add_common(p)
    p.add_argument("--trials", type=int, default=_DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=_DEFAULT_SEED)
    p.add_argument("--kmax", type=float, default=_DEFAULT_KMAX,
                   help="exit 1 when the measured ratio exceeds this")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fundamental", help="tabulate the fundamental function")
    add_common(p)
    p.add_argument("--s-grid", required=True, dest="s_grid",
                   help="start times: 'start:step:stop' or comma list")
    p.add_argument("--out", default=None, help="CSV path for the table")
    p.add_argument("--fit", action="store_true",
                   help="print a fitted exponential envelope as JSON")
    p.add_argument("--no-impulses", action="store_true", dest="no_impulses",
                   help="tabulate the impulse-free kernel instead")
    p.set_defaults(func=cmd_fundamental)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except InvalidProblemError as exc:
        for msg in exc.report.violations:
            print(msg, file=sys.stderr)
        return 2
    except (ProblemFormatError, ImpulseStabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
