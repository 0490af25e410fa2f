"""
Quadratic-transform solvers
Conventional (closed-form ellipsoid step), nonhomogeneous (gradient
projection), Nesterov-extrapolated, diminishing-step gradient and Polyak
variants, plus the shared outer loop and trace export.
"""
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from .linalg import (
    SPECTRAL_MODES,
    group_regularized_inverse_bisection,
    hermitian_solve,
    jittered,
    project_iterate,
    spectral_upper_bound,
)
from .model import RatioProblem, as_iterate, dmats, gradient, linear_terms, objective, optimal_y
from .utils import DEFAULT_BISECTION_TOL, DEFAULT_REL_OBJ_TOL, LAMBDA_FLOOR, STATIONARITY_STEP, STATIONARITY_TOL

logger = logging.getLogger(__name__)

# Canonical solver ids and their accepted aliases
SOLVER_IDS = ("conventional", "nonhomogeneous", "extrapolated", "gradient", "polyak")
SOLVER_ALIASES = {
    "alg1": "conventional",
    "alg2": "nonhomogeneous",
    "alg3": "extrapolated",
}
MONOTONE_SOLVERS = ("conventional", "nonhomogeneous")

TRACE_COLUMNS = ["iter", "elapsed_s", "objective"]
TRACE_FLOAT_FORMAT = "%.17g"


def canonical_solver_id(name: str, known=SOLVER_IDS, aliases=SOLVER_ALIASES) -> str:
    """Resolve an alias such as 'alg2' to its canonical id."""
    key = str(name).strip().lower()
    key = aliases.get(key, key)
    if key not in known:
        raise ValueError(f"Unknown solver: {name}")
    return key


@dataclass(frozen=True)
class SolverOptions:
    """Outer-loop settings shared by every solver."""
    max_iters: int = 500
    rel_obj_tol: float = DEFAULT_REL_OBJ_TOL
    lambda_mode: str = "frobenius"
    record_wall_time: bool = True
    seed: int = 0
    extrapolation_scale: float = 1.0
    bisection_tol: float = DEFAULT_BISECTION_TOL
    log_every: int = 0
    # None stops on the objective change alone
    stationarity_tol: Optional[float] = STATIONARITY_TOL

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if not self.rel_obj_tol > 0:
            raise ValueError(f"rel_obj_tol must be positive, got {self.rel_obj_tol}")
        if self.lambda_mode not in SPECTRAL_MODES:
            raise ValueError(f"Unknown lambda mode: {self.lambda_mode}")
        if self.extrapolation_scale < 0:
            raise ValueError("extrapolation_scale must be nonnegative")
        if not self.bisection_tol > 0:
            raise ValueError("bisection_tol must be positive")
        if self.stationarity_tol is not None and not self.stationarity_tol > 0:
            raise ValueError(f"stationarity_tol must be positive or None, got {self.stationarity_tol}")

    def to_dict(self) -> dict:
        return {
            "max_iters": self.max_iters,
            "rel_obj_tol": self.rel_obj_tol,
            "lambda_mode": self.lambda_mode,
            "record_wall_time": self.record_wall_time,
            "seed": self.seed,
            "extrapolation_scale": self.extrapolation_scale,
            "bisection_tol": self.bisection_tol,
            "stationarity_tol": self.stationarity_tol,
        }


@dataclass
class SolverState:
    """Iterate plus the memory the accelerated variants need."""
    x: np.ndarray
    x_prev: np.ndarray
    g_prev: np.ndarray
    k: int = 0
    t: Optional[np.ndarray] = None


class TraceRecord(NamedTuple):
    iter: int
    elapsed: float
    objective: float
    t: Optional[tuple] = None


@dataclass
class ConvergenceTrace:
    """Per-iteration objective history of one solver run."""
    solver: str
    records: List[TraceRecord] = field(default_factory=list)
    final_x: Optional[np.ndarray] = None
    termination: str = "running"
    initial_objective: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    @property
    def iterations(self) -> np.ndarray:
        return np.array([r.iter for r in self.records], dtype=int)

    @property
    def elapsed(self) -> np.ndarray:
        return np.array([r.elapsed for r in self.records], dtype=float)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records], dtype=float)

    @property
    def final_objective(self) -> float:
        if not self.records:
            return float(self.initial_objective) if self.initial_objective is not None else float("nan")
        return self.records[-1].objective

    def to_frame(self, with_t: bool = False) -> pd.DataFrame:
        frame = pd.DataFrame({
            "iter": self.iterations,
            "elapsed_s": self.elapsed,
            "objective": self.objectives,
        })
        if with_t and self.records and self.records[0].t is not None:
            t = np.array([r.t for r in self.records], dtype=float)
            for i in range(t.shape[1]):
                frame[f"t_{i + 1}"] = t[:, i]
        return frame


def extrapolation_step(k: int) -> float:
    """Nesterov schedule η_k = max{(k − 2)/(k + 1), 0}."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return max((k - 2) / (k + 1), 0.0)


def block_lambdas(d: np.ndarray, mode: str = "frobenius") -> np.ndarray:
    """One spectral bound per block matrix, floored at LAMBDA_FLOOR."""
    return np.array([max(spectral_upper_bound(d_b, mode), LAMBDA_FLOOR) for d_b in d])


def solve_ellipsoid_blocks(constraints, d: np.ndarray, c: np.ndarray,
                           bisection_tol: float = DEFAULT_BISECTION_TOL) -> np.ndarray:
    """
    Maximize Σ_b 2Re tr(X_b^H C_b) − tr(X_b^H D_b X_b) over the feasible set.

    Ball blocks use the multiplier bisection, groups share one multiplier.
    """
    out = np.zeros_like(c)
    solved_groups = set()
    for b, spec in enumerate(constraints):
        if spec.kind == "unconstrained":
            out[b] = hermitian_solve(jittered(d[b]), c[b]) if np.any(c[b]) else 0.0
        elif spec.kind == "ball":
            solutions, _ = group_regularized_inverse_bisection([jittered(d[b])], [c[b]], spec.radius2, bisection_tol)
            out[b] = solutions[0]
        elif spec.members not in solved_groups:
            solved_groups.add(spec.members)
            members = spec.members
            solutions, _ = group_regularized_inverse_bisection(
                [jittered(d[j]) for j in members], [c[j] for j in members], spec.radius2, bisection_tol)
            for j, s in zip(members, solutions):
                out[j] = s
    return out


def step_conventional(p: RatioProblem, x, bisection_tol: float = DEFAULT_BISECTION_TOL) -> np.ndarray:
    """One iteration of the conventional quadratic transform."""
    x = as_iterate(p, x)
    y = optimal_y(p, x)
    return solve_ellipsoid_blocks(p.constraints, dmats(p, y), linear_terms(p, y), bisection_tol)


def _nonhomogeneous_update(p: RatioProblem, z: np.ndarray, lambda_mode: str) -> np.ndarray:
    y = optimal_y(p, z)
    d = dmats(p, y)
    lam = block_lambdas(d, lambda_mode)
    target = z + (linear_terms(p, y) - np.einsum("kde,kem->kdm", d, z)) / lam[:, None, None]
    return project_iterate(p.constraints, target)


def step_nonhomogeneous(p: RatioProblem, x, lambda_mode: str = "frobenius") -> np.ndarray:
    """One iteration of the nonhomogeneous quadratic transform (z = x)."""
    return _nonhomogeneous_update(p, as_iterate(p, x), lambda_mode)


def step_extrapolated(p: RatioProblem, x_prev, x_curr, k: int, lambda_mode: str = "frobenius",
                      scale: float = 1.0) -> np.ndarray:
    """
    Nonhomogeneous step taken at ν = x_curr + η_k (x_curr − x_prev).

    ν itself may be infeasible; only the result is projected.
    """
    x_prev = as_iterate(p, x_prev)
    x_curr = as_iterate(p, x_curr)
    eta = scale * extrapolation_step(k)
    nu = x_curr + eta * (x_curr - x_prev) if eta else x_curr
    return _nonhomogeneous_update(p, nu, lambda_mode)


def step_gradient_baseline(p: RatioProblem, x, k: int) -> np.ndarray:
    """Projected gradient ascent with diminishing stepsize 1/k."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    x = as_iterate(p, x)
    return project_iterate(p.constraints, x + gradient(p, x) / k)


def step_polyak(p: RatioProblem, g_prev, x_curr, k: int, lambda_mode: str = "frobenius",
                scale: float = 1.0):
    """
    Project first, extrapolate second.

    Returns:
        tuple: (x', g) where g is the plain nonhomogeneous step from x_curr,
        to be passed back as g_prev next time
    """
    g = step_nonhomogeneous(p, x_curr, lambda_mode)
    eta = scale * extrapolation_step(k)
    if not eta:
        return g, g
    return project_iterate(p.constraints, g + eta * (g - as_iterate(p, g_prev))), g


def stationarity_residual(constraints, x: np.ndarray, grad: np.ndarray, s: float = STATIONARITY_STEP) -> float:
    """‖P(x + s·grad) − x‖ / s for any ascent direction grad."""
    moved = project_iterate(constraints, x + s * grad)
    return float(np.linalg.norm(moved - x) / s)


def is_stationary(residual: float, x: np.ndarray, tol: float = STATIONARITY_TOL) -> bool:
    """Residual within tol·(1 + ‖x‖)."""
    return residual <= tol * (1.0 + float(np.linalg.norm(x)))


def projected_gradient_residual(p: RatioProblem, x, s: float = STATIONARITY_STEP) -> float:
    """Stationarity measure ‖P(x + s·grad) − x‖ / s."""
    x = as_iterate(p, x)
    return stationarity_residual(p.constraints, x, gradient(p, x), s)


def advance(p: RatioProblem, state: SolverState, solver: str, opts: SolverOptions) -> SolverState:
    """Apply one iteration of `solver` and return the next state."""
    k = state.k + 1
    # iteration k extrapolates with η_{k−1}
    schedule_k = max(k - 1, 1)
    if solver == "conventional":
        x_new = step_conventional(p, state.x, opts.bisection_tol)
        g = state.g_prev
    elif solver == "nonhomogeneous":
        x_new = step_nonhomogeneous(p, state.x, opts.lambda_mode)
        g = state.g_prev
    elif solver == "extrapolated":
        x_new = step_extrapolated(p, state.x_prev, state.x, schedule_k, opts.lambda_mode,
                                  opts.extrapolation_scale)
        g = state.g_prev
    elif solver == "gradient":
        x_new = step_gradient_baseline(p, state.x, k)
        g = state.g_prev
    elif solver == "polyak":
        x_new, g = step_polyak(p, state.g_prev, state.x, schedule_k, opts.lambda_mode,
                               opts.extrapolation_scale)
    else:
        raise ValueError(f"Unknown solver: {solver}")
    return SolverState(x=x_new, x_prev=state.x, g_prev=g, k=k)


def iterate_until_converged(solver: str, x0: np.ndarray, objective_fn: Callable[[np.ndarray], float],
                            step_fn: Callable[[SolverState], SolverState], opts: SolverOptions,
                            aux_fn: Optional[Callable[[SolverState], Optional[np.ndarray]]] = None,
                            residual_fn: Optional[Callable[[np.ndarray], float]] = None
                            ) -> ConvergenceTrace:
    """
    Outer loop shared by every solver family.

    Only time spent inside step_fn counts toward the elapsed column. A small
    objective change ends the run only once residual_fn reports a stationary
    iterate (skipped when residual_fn or opts.stationarity_tol is None);
    otherwise the loop continues up to max_iters.

    Args:
        solver: Solver id recorded in the trace
        x0: Feasible starting point
        objective_fn: Objective evaluated after every iteration
        step_fn: Maps a SolverState to the next one
        opts: Stopping rule and bookkeeping options
        aux_fn: Optional per-iteration auxiliary vector (stored as record.t)
        residual_fn: Optional stationarity residual of an iterate

    Returns:
        ConvergenceTrace: One record per iteration
    """
    f_prev = objective_fn(x0)
    trace = ConvergenceTrace(solver=solver, initial_objective=f_prev,
                             metadata={"options": opts.to_dict()})
    state = SolverState(x=x0, x_prev=x0.copy(), g_prev=x0.copy(), k=0)
    logger.info(f"Starting {solver}: f0={f_prev:.10g}, max_iters={opts.max_iters}")

    elapsed = 0.0
    trace.termination = "max_iters"
    for k in range(1, opts.max_iters + 1):
        started = time.perf_counter()
        state = step_fn(state)
        if opts.record_wall_time:
            elapsed += time.perf_counter() - started

        f = objective_fn(state.x)
        aux = aux_fn(state) if aux_fn is not None else None
        trace.records.append(TraceRecord(k, elapsed, f, None if aux is None else tuple(float(v) for v in aux)))

        if opts.log_every and k % opts.log_every == 0:
            logger.debug(f"{solver} iter {k}: f={f:.12g}")
        if abs(f - f_prev) / max(abs(f), 1.0) < opts.rel_obj_tol:
            if residual_fn is None or opts.stationarity_tol is None:
                trace.termination = "tolerance"
                break
            residual = residual_fn(state.x)
            trace.metadata["residual"] = residual
            if is_stationary(residual, state.x, opts.stationarity_tol):
                trace.termination = "tolerance"
                break
            logger.debug(f"{solver} iter {k}: objective stalled but residual {residual:.3e} is above tolerance")
        f_prev = f

    trace.final_x = state.x
    logger.info(f"Finished {solver}: {len(trace.records)} iterations, f={trace.final_objective:.10g}, "
                f"reason={trace.termination}")
    return trace


def run(p: RatioProblem, x0, algorithm: str = "nonhomogeneous",
        opts: Optional[SolverOptions] = None) -> ConvergenceTrace:
    """
    Run one solver on a RatioProblem.

    Args:
        p: Problem
        x0: Starting point (projected onto the feasible set if needed)
        algorithm: Solver id or alias (alg1, alg2, alg3)
        opts: Solver options

    Returns:
        ConvergenceTrace: Objective per iteration plus the final iterate
    """
    opts = opts or SolverOptions()
    solver = canonical_solver_id(algorithm)
    x0 = project_iterate(p.constraints, as_iterate(p, x0))
    return iterate_until_converged(
        solver, x0,
        objective_fn=lambda x: objective(p, x),
        step_fn=lambda state: advance(p, state, solver, opts),
        opts=opts,
        residual_fn=lambda x: projected_gradient_residual(p, x),
    )


def with_zero_extrapolation(opts: SolverOptions) -> SolverOptions:
    """Copy of opts with the extrapolation schedule forced to zero."""
    return replace(opts, extrapolation_scale=0.0)


def save_trace_csv(trace: ConvergenceTrace, path, with_t: bool = False) -> Path:
    """
    Write a trace as CSV with header iter,elapsed_s,objective.

    Args:
        trace: Trace to write
        path: Output file
        with_t: Append t_1..t_n columns when the trace carries them

    Returns:
        Path: Written file
    """
    path = Path(path)
    trace.to_frame(with_t).to_csv(path, index=False, float_format=TRACE_FLOAT_FORMAT, lineterminator="\n")
    return path


def load_trace_csv(path, solver: Optional[str] = None) -> ConvergenceTrace:
    """Read a CSV written by save_trace_csv."""
    path = Path(path)
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path.name} is missing trace columns: {', '.join(missing)}")
    t_columns = [c for c in frame.columns if c.startswith("t_")]
    records = []
    for row in frame.itertuples(index=False):
        values = row._asdict()
        t = tuple(float(values[c]) for c in t_columns) if t_columns else None
        records.append(TraceRecord(int(values["iter"]), float(values["elapsed_s"]), float(values["objective"]), t))
    return ConvergenceTrace(solver=solver or path.stem, records=records, termination="loaded")
