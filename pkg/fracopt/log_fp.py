"""
Logarithmic fractional programming
Weighted sum of log(1 + ratio) solved through the Lagrangian dual
transform: the auxiliary t moves every ratio out of the logarithm, after
which one quadratic-transform iteration is applied to the weighted hat
ratios M̂_i = M_i / (1 + M_i). The classic WMMSE update is kept as its own
MMSE-receiver formulation.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .linalg import ConstraintSpec, hermitian_solve, project_iterate
from .model import RatioProblem, as_iterate, gradient, ratio_values
from .solvers import (
    SolverOptions,
    ConvergenceTrace,
    SolverState,
    canonical_solver_id,
    extrapolation_step,
    iterate_until_converged,
    solve_ellipsoid_blocks,
    stationarity_residual,
    step_conventional,
    step_extrapolated,
    step_nonhomogeneous,
)
from .utils import DEFAULT_BISECTION_TOL, complex_normal

logger = logging.getLogger(__name__)

LOG_SOLVER_IDS = (
    "wmmse_classic",
    "generalized_conventional",
    "generalized_nonhomogeneous",
    "generalized_extrapolated",
)
LOG_SOLVER_ALIASES = {
    "wmmse": "wmmse_classic",
    "conventional": "generalized_conventional",
    "nonhomogeneous": "generalized_nonhomogeneous",
    "extrapolated": "generalized_extrapolated",
}
INNER_SOLVERS = ("conventional", "nonhomogeneous", "extrapolated")


@dataclass(frozen=True, eq=False)
class LogFPProblem:
    """
    Maximize Σ_i μ_i log(1 + M_i(x)) with M_i the ratio of a RatioProblem
    whose denominators carry noise·I.
    """
    A: np.ndarray
    B: np.ndarray
    mu: np.ndarray
    noise: Union[float, np.ndarray]
    constraints: Sequence[ConstraintSpec]
    owners: Optional[np.ndarray] = None
    base: RatioProblem = field(init=False, repr=False)

    def __post_init__(self):
        base = RatioProblem(A=self.A, B=self.B, weights=self.mu, denom_regularizer=self.noise,
                            constraints=self.constraints, m=1, owners=self.owners)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "A", base.A)
        object.__setattr__(self, "B", base.B)
        object.__setattr__(self, "mu", base.weights)
        object.__setattr__(self, "constraints", base.constraints)
        object.__setattr__(self, "owners", base.owners)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def num_blocks(self) -> int:
        return self.base.num_blocks

    @property
    def iterate_shape(self) -> tuple:
        return self.base.iterate_shape


def random_log_problem(rng: np.random.Generator, cells: int = 2, users: int = 2, M: int = 4, N: int = 2,
                       p_max: float = 1.0, noise: float = 1.0, mu=None) -> LogFPProblem:
    """
    Unit-scale interference network: CN(0, 1) channels, one group-ball
    budget per transmitter, users·cells single-stream receivers.
    """
    n = cells * users
    cell_of = np.repeat(np.arange(cells), users)
    channels = complex_normal(rng, (n, cells, N, M))
    B = channels[:, cell_of].copy()
    B[np.arange(n), np.arange(n)] = 0.0
    constraints = [ConstraintSpec.group_ball(range(c * users, (c + 1) * users), p_max) for c in cell_of]
    return LogFPProblem(A=channels[np.arange(n), cell_of], B=B, mu=np.ones(n) if mu is None else mu,
                        noise=noise, constraints=constraints)


def ratio_problem(p: LogFPProblem) -> RatioProblem:
    """The plain ratios M_i with weights μ_i."""
    return p.base


def hat_problem(p: LogFPProblem, t) -> RatioProblem:
    """Hat ratios M̂_i weighted by μ_i(1 + t_i)."""
    t = np.asarray(t, dtype=float)
    if t.shape != (p.n,):
        raise ValueError(f"Expected {p.n} t values, got shape {t.shape}")
    return RatioProblem(A=p.base.A, B=p.base.B, weights=p.mu * (1.0 + t), denom_regularizer=p.base.reg,
                        constraints=p.constraints, m=1, owners=p.owners, numerator_in_denominator=True)


def optimal_t(p: LogFPProblem, x) -> np.ndarray:
    """t_i = M_i(x), the maximizer of the dual-transform surrogate over t."""
    return ratio_values(p.base, x)


def log_objective(p: LogFPProblem, x) -> float:
    """Σ_i μ_i log(1 + M_i(x))."""
    return float(np.dot(p.mu, np.log1p(optimal_t(p, x))))


def hat_ratio_values(p: LogFPProblem, x) -> np.ndarray:
    """M̂_i(x) for every ratio."""
    return ratio_values(hat_problem(p, np.zeros(p.n)), x)


def dual_transform_surrogate(p: LogFPProblem, x, t) -> float:
    """
    h(x, t) = Σ μ_i(1 + t_i) M̂_i(x) + Σ μ_i (log(1 + t_i) − t_i).

    Args:
        p: Problem
        x: Iterate
        t: Nonnegative auxiliary vector

    Returns:
        float: Lower bound on log_objective(p, x), tight at t = optimal_t(p, x)
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    hat = hat_ratio_values(p, x)
    return float(np.dot(p.mu * (1.0 + t), hat) + np.dot(p.mu, np.log1p(t) - t))


def log_gradient(p: LogFPProblem, x) -> np.ndarray:
    """Conjugate-coordinate gradient of the log objective (envelope of h at t*)."""
    x = as_iterate(p.base, x)
    return gradient(hat_problem(p, optimal_t(p, x)), x)


def step_generalized(p: LogFPProblem, x, inner: str = "nonhomogeneous",
                     memory: Optional[Tuple[np.ndarray, int]] = None, lambda_mode: str = "frobenius",
                     bisection_tol: float = DEFAULT_BISECTION_TOL, scale: float = 1.0) -> np.ndarray:
    """
    Update t, then run one inner quadratic-transform iteration on the hat ratios.

    Args:
        p: Problem
        x: Current feasible iterate
        inner: conventional, nonhomogeneous or extrapolated
        memory: (x_prev, k) for the extrapolated inner step
        lambda_mode: Spectral bound used by the nonhomogeneous steps
        bisection_tol: Tolerance of the conventional subproblem
        scale: Multiplier on the extrapolation schedule

    Returns:
        np.ndarray: Next iterate of shape (K, d, 1)
    """
    if inner not in INNER_SOLVERS:
        raise ValueError(f"Unknown inner solver: {inner}")
    x = as_iterate(p.base, x)
    if inner == "conventional":
        return step_conventional(hat_problem(p, optimal_t(p, x)), x, bisection_tol)
    if inner == "nonhomogeneous":
        return step_nonhomogeneous(hat_problem(p, optimal_t(p, x)), x, lambda_mode)

    x_prev, k = memory if memory is not None else (x, 1)
    x_prev = as_iterate(p.base, x_prev)
    eta = scale * extrapolation_step(k)
    nu = x + eta * (x - x_prev)
    return step_extrapolated(hat_problem(p, optimal_t(p, nu)), x_prev, x, k, lambda_mode, scale)


def mmse_receivers(p: LogFPProblem, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    MMSE receive filters and their mean-square errors.

    Returns:
        tuple: (u of shape (n, ℓ), e of shape (n,)) with u_i = J_i^{-1} A_i x_i
        for the total received covariance J_i
    """
    xv = as_iterate(p.base, x)[..., 0]
    signal = np.einsum("ild,id->il", p.base.A, xv[p.owners])
    received = np.einsum("ikld,kd->ikl", p.base.B, xv)
    covariance = (np.einsum("ikl,ikp->ilp", received, received.conj())
                  + np.einsum("il,ip->ilp", signal, signal.conj())
                  + p.base.reg[:, None, None] * np.eye(p.base.ell))
    u = np.stack([hermitian_solve(covariance[i], signal[i]) for i in range(p.n)])
    mse = 1.0 - np.real(np.einsum("il,il->i", u.conj(), signal))
    return u, mse


def step_wmmse_classic(p: LogFPProblem, x, bisection_tol: float = DEFAULT_BISECTION_TOL) -> np.ndarray:
    """
    Classic WMMSE iteration: MMSE receivers, MSE weights w = 1/e, then the
    weighted transmit update with one bisection multiplier per power budget.
    """
    u, mse = mmse_receivers(p, x)
    weights = p.mu / mse
    bhu = np.einsum("ikld,il->ikd", p.base.B.conj(), u)
    ahu = np.einsum("ild,il->id", p.base.A.conj(), u)

    covariance = np.einsum("i,ikd,ike->kde", weights, bhu, bhu.conj())
    np.add.at(covariance, p.owners, np.einsum("i,id,ie->ide", weights, ahu, ahu.conj()))
    target = np.zeros((p.num_blocks, p.base.d), dtype=complex)
    np.add.at(target, p.owners, weights[:, None] * ahu)

    out = solve_ellipsoid_blocks(p.constraints, covariance, target[..., np.newaxis], bisection_tol)
    return out


def run_log(p: LogFPProblem, x0, algorithm: str = "generalized_nonhomogeneous",
            opts: Optional[SolverOptions] = None) -> ConvergenceTrace:
    """
    Run a logarithmic-FP solver; every record carries the SINR vector t.

    Args:
        p: Problem
        x0: Starting point (projected if infeasible)
        algorithm: One of LOG_SOLVER_IDS (or its alias)
        opts: Solver options

    Returns:
        ConvergenceTrace: Weighted sum of logs per iteration
    """
    opts = opts or SolverOptions()
    solver = canonical_solver_id(algorithm, LOG_SOLVER_IDS, LOG_SOLVER_ALIASES)
    x0 = project_iterate(p.constraints, as_iterate(p.base, x0))
    latest = {}

    def objective_fn(x):
        latest["t"] = optimal_t(p, x)
        return float(np.dot(p.mu, np.log1p(latest["t"])))

    def step_fn(state: SolverState) -> SolverState:
        k = state.k + 1
        if solver == "wmmse_classic":
            x_new = step_wmmse_classic(p, state.x, opts.bisection_tol)
        elif solver == "generalized_conventional":
            x_new = step_generalized(p, state.x, "conventional", bisection_tol=opts.bisection_tol)
        elif solver == "generalized_nonhomogeneous":
            x_new = step_generalized(p, state.x, "nonhomogeneous", lambda_mode=opts.lambda_mode)
        else:
            x_new = step_generalized(p, state.x, "extrapolated", memory=(state.x_prev, max(k - 1, 1)),
                                     lambda_mode=opts.lambda_mode, scale=opts.extrapolation_scale)
        return SolverState(x=x_new, x_prev=state.x, g_prev=state.g_prev, k=k)

    return iterate_until_converged(solver, x0, objective_fn, step_fn, opts,
                                   aux_fn=lambda state: latest["t"],
                                   residual_fn=lambda x: stationarity_residual(p.constraints, x, log_gradient(p, x)))
