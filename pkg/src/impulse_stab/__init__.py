"""Stabilization of scalar linear delay equations by impulses.

The package simulates scalar linear impulsive delay differential
equations, computes their fundamental (Cauchy) functions, checks
explicit stabilization criteria with machine-checkable certificates,
synthesizes stabilizing impulse gains, and cross-checks every
certificate empirically.

Set ``IMPULSE_STAB_BACKEND`` to ``python``/``c``/``auto`` to pick the
integration kernel and ``IMPULSE_STAB_THREADS`` to cap internal
parallelism (0 = automatic).
"""

from ._kernel import backend_name
from .criteria import (
    CRITERIA,
    EXP_STABLE,
    INCONCLUSIVE,
    STABLE,
    CriterionReport,
    DominanceError,
    SeparationAnalysis,
    check_auto,
    check_dominance,
    check_mu,
    check_thm2,
    check_thm3,
    check_thm4,
    check_thm5,
    check_thm6,
    find_separation_points,
)
from .fundamental import (
    EnvelopeFit,
    FundamentalTable,
    default_s_grid,
    fit_envelope,
    fit_trajectory_envelope,
    fundamental,
    fundamental_table,
    representation_solution,
    table_to_csv,
)
from .integrator import (
    SolveOptions,
    SolverError,
    Trajectory,
    eval_trajectory,
    eval_trajectory_left,
    solve,
)
from .model import (
    CoefficientSpec,
    DelaySpec,
    HistorySpec,
    ImpulseSchedule,
    ImpulseStabError,
    InvalidProblemError,
    Problem,
    ProblemFormatError,
    Term,
    ValidationReport,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
    validate,
    zero_forcing,
)
from .synth import (
    InfeasibleError,
    SynthesisRequest,
    SynthesisResult,
    synthesize_per_interval,
    synthesize_uniform,
)
from .verify import (
    BoundednessResult,
    SweepFamily,
    SweepRecord,
    empirical_boundedness,
    empirical_decay,
    falsification_sweep,
    sample_problem,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CRITERIA",
    "EXP_STABLE",
    "INCONCLUSIVE",
    "STABLE",
    "CriterionReport",
    "DominanceError",
    "SeparationAnalysis",
    "check_auto",
    "check_dominance",
    "check_mu",
    "check_thm2",
    "check_thm3",
    "check_thm4",
    "check_thm5",
    "check_thm6",
    "find_separation_points",
    "EnvelopeFit",
    "FundamentalTable",
    "default_s_grid",
    "fit_envelope",
    "fit_trajectory_envelope",
    "fundamental",
    "fundamental_table",
    "representation_solution",
    "table_to_csv",
    "SolveOptions",
    "SolverError",
    "Trajectory",
    "eval_trajectory",
    "eval_trajectory_left",
    "solve",
    "CoefficientSpec",
    "DelaySpec",
    "HistorySpec",
    "ImpulseSchedule",
    "ImpulseStabError",
    "InvalidProblemError",
    "Problem",
    "ProblemFormatError",
    "Term",
    "ValidationReport",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "save_problem",
    "validate",
    "zero_forcing",
    "InfeasibleError",
    "SynthesisRequest",
    "SynthesisResult",
    "synthesize_per_interval",
    "synthesize_uniform",
    "BoundednessResult",
    "SweepFamily",
    "SweepRecord",
    "empirical_boundedness",
    "empirical_decay",
    "falsification_sweep",
    "sample_problem",
    "__version__",
]
