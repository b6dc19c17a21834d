"""Optimal LQR feedback gains via gradient flows of a feedback-parametrized
Bellman error, with baseline cost flows, a policy-iteration oracle, and a
benchmark harness."""

from .bellman import (
    BellmanEval,
    BellmanGradient,
    bellman_error,
    bellman_error_closed_form_2d,
    bellman_gradient,
)
from .bench import (
    BenchConfig,
    BenchRecord,
    BenchResult,
    BenchSummary,
    GridResult,
    grid_eval,
    instance_seed,
    random_instance,
    run_benchmark,
    sample_stabilizing_gain,
)
from .cost_flow import (
    CostEval,
    lqr_cost,
    lqr_cost_closed_form_2d,
    lqr_gradient,
    natural_gradient,
)
from .flow import (
    CONVERGED_GRAD_TOL,
    FLOW_KINDS,
    REACHED_T_MAX,
    STEP_FAILURE,
    FlowConfig,
    FlowSample,
    FlowTrajectory,
    flow_rhs,
    integrate,
    normalized_residuals,
)
from .lqr_core import (
    AssumptionReport,
    KleinmanResult,
    SystemInstance,
    ValueSolution,
    care_residual,
    check_assumptions,
    closed_loop,
    demo_system,
    in_sigma_set,
    in_stabilizing_set,
    kleinman,
    lyapunov_solve,
    solve_value_lyapunov,
)
from .matlin import TOL, Spectrum, Tolerances

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "BellmanEval",
    "BellmanGradient",
    "BenchConfig",
    "BenchRecord",
    "BenchResult",
    "BenchSummary",
    "CONVERGED_GRAD_TOL",
    "CostEval",
    "FLOW_KINDS",
    "FlowConfig",
    "FlowSample",
    "FlowTrajectory",
    "GridResult",
    "KleinmanResult",
    "REACHED_T_MAX",
    "STEP_FAILURE",
    "Spectrum",
    "SystemInstance",
    "TOL",
    "Tolerances",
    "ValueSolution",
    "bellman_error",
    "bellman_error_closed_form_2d",
    "bellman_gradient",
    "care_residual",
    "check_assumptions",
    "closed_loop",
    "demo_system",
    "flow_rhs",
    "grid_eval",
    "in_sigma_set",
    "in_stabilizing_set",
    "instance_seed",
    "integrate",
    "kleinman",
    "lqr_cost",
    "lqr_cost_closed_form_2d",
    "lqr_gradient",
    "lyapunov_solve",
    "natural_gradient",
    "normalized_residuals",
    "random_instance",
    "run_benchmark",
    "sample_stabilizing_gain",
    "solve_value_lyapunov",
]
