"""
Fractional programming with the quadratic transform
"""

from .utils import (
    FracoptError,
    NotPositiveDefinite,
    NonConvergent,
    BisectionFailed,
    DegenerateTrace,
    SolverFailure,
    InvalidParams,
    dbm_to_watts,
    watts_to_dbm,
    derive_seed
)
from .linalg import (
    ConstraintSpec,
    hermitian_solve,
    spectral_upper_bound,
    project_ball,
    project_group_ball,
    project_iterate,
    regularized_inverse_bisection,
    group_regularized_inverse_bisection
)
from .model import (
    RatioProblem,
    denominator,
    ratio_value,
    objective,
    optimal_y,
    f_q,
    dmat,
    gradient,
    f_t,
    random_ratio_problem,
    random_feasible_point,
    save_problem,
    load_problem
)
from .solvers import (
    SolverOptions,
    ConvergenceTrace,
    step_conventional,
    step_nonhomogeneous,
    step_extrapolated,
    extrapolation_step,
    step_gradient_baseline,
    step_polyak,
    run,
    save_trace_csv,
    load_trace_csv,
    SOLVER_IDS
)
from .log_fp import (
    LogFPProblem,
    log_objective,
    dual_transform_surrogate,
    optimal_t,
    step_generalized,
    step_wmmse_classic,
    run_log,
    LOG_SOLVER_IDS
)
from .isac import (
    IsacScenario,
    steering_vector,
    steering_derivative,
    fisher_information,
    compile_isac,
    generate_isac_scenario,
    solve_isac
)
from .mimo import (
    MimoNetwork,
    generate_mimo_network,
    mimo_sinr,
    compile_mimo,
    solve_mimo,
    weighted_sum_rate
)
from .rates import RateFit, fit_rate, cmd_rates
from .experiments import RunConfig, build_run_config, cmd_synthetic, cmd_isac, cmd_mimo, EXPERIMENT_PRESETS
from .verify import cmd_verify, SUITES

__all__ = [
    'FracoptError',
    'NotPositiveDefinite',
    'NonConvergent',
    'BisectionFailed',
    'DegenerateTrace',
    'SolverFailure',
    'InvalidParams',
    'dbm_to_watts',
    'watts_to_dbm',
    'derive_seed',
    'ConstraintSpec',
    'hermitian_solve',
    'spectral_upper_bound',
    'project_ball',
    'project_group_ball',
    'project_iterate',
    'regularized_inverse_bisection',
    'group_regularized_inverse_bisection',
    'RatioProblem',
    'denominator',
    'ratio_value',
    'objective',
    'optimal_y',
    'f_q',
    'dmat',
    'gradient',
    'f_t',
    'random_ratio_problem',
    'random_feasible_point',
    'save_problem',
    'load_problem',
    'SolverOptions',
    'ConvergenceTrace',
    'step_conventional',
    'step_nonhomogeneous',
    'step_extrapolated',
    'extrapolation_step',
    'step_gradient_baseline',
    'step_polyak',
    'run',
    'save_trace_csv',
    'load_trace_csv',
    'SOLVER_IDS',
    'LogFPProblem',
    'log_objective',
    'dual_transform_surrogate',
    'optimal_t',
    'step_generalized',
    'step_wmmse_classic',
    'run_log',
    'LOG_SOLVER_IDS',
    'IsacScenario',
    'steering_vector',
    'steering_derivative',
    'fisher_information',
    'compile_isac',
    'generate_isac_scenario',
    'solve_isac',
    'MimoNetwork',
    'generate_mimo_network',
    'mimo_sinr',
    'compile_mimo',
    'solve_mimo',
    'weighted_sum_rate',
    'RateFit',
    'fit_rate',
    'cmd_rates',
    'RunConfig',
    'build_run_config',
    'cmd_synthetic',
    'cmd_isac',
    'cmd_mimo',
    'EXPERIMENT_PRESETS',
    'cmd_verify',
    'SUITES'
]
