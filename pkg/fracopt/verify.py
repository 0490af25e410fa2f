"""
Executable property suites
Each suite draws seeded random instances and checks one structural claim
(surrogate sandwich, gradient, gradient-projection identity, monotone
ascent, WMMSE equivalence, compiled-objective faithfulness, ...).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.linalg import eigh

from .isac import compile_isac, generate_isac_scenario, isac_objective
from .linalg import project_iterate, regularized_inverse_bisection
from .log_fp import (
    dual_transform_surrogate,
    hat_problem,
    hat_ratio_values,
    log_objective,
    optimal_t,
    random_log_problem,
    step_generalized,
    step_wmmse_classic,
)
from .mimo import compile_mimo, generate_mimo_network, weighted_sum_rate
from .model import (
    dmats,
    f_q,
    f_t,
    gradient,
    nonhomogeneous_bound,
    objective,
    optimal_y,
    random_feasible_point,
    random_ratio_problem,
    ratio_values,
)
from .rates import fit_rate
from .solvers import MONOTONE_SOLVERS, SolverOptions, block_lambdas, run, step_nonhomogeneous
from .utils import complex_normal

logger = logging.getLogger(__name__)

DEFAULT_VERIFY_SEED = 42
GRID_POINTS = 10_000


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, condition: bool, message: str):
        self.checks += 1
        if not condition:
            self.failures.append(message)

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks, "failures": self.failures}


def _rel_close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def finite_difference_gradient(fun: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """
    Central differences mapped to conjugate coordinates: ∂f/∂Re + j·∂f/∂Im.

    Args:
        fun: Real-valued function of a complex array
        x: Evaluation point
        h: Step on each real coordinate

    Returns:
        np.ndarray: Gradient estimate with the shape of x
    """
    x = np.asarray(x, dtype=complex)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        for direction in (1.0, 1j):
            step = np.zeros_like(x)
            step[index] = h * direction
            slope = (fun(x + step) - fun(x - step)) / (2.0 * h)
            grad[index] += slope * direction
    return grad


def bisection_grid_oracle(d: np.ndarray, target: np.ndarray, radius2: float, points: int = GRID_POINTS) -> float:
    """
    Smallest ellipsoid distance (s − d⁻¹t)^H d (s − d⁻¹t) over s = (d + ηI)⁻¹t
    with ‖s‖² ≤ radius2, found by a two-level η grid on the eigenbasis.
    """
    eigenvalues, vectors = eigh(d)
    weights = np.abs(vectors.conj().T @ target) ** 2

    def norm2(eta):
        return np.sum(weights / (eigenvalues + eta[:, None]) ** 2, axis=1)

    def distance(eta):
        gap = 1.0 / (eigenvalues + eta[:, None]) - 1.0 / eigenvalues
        return np.sum(eigenvalues * weights * gap ** 2, axis=1)

    if norm2(np.zeros(1))[0] <= radius2:
        return 0.0
    upper = 1.0
    while norm2(np.array([upper]))[0] > radius2:
        upper *= 2.0
    coarse = np.linspace(0.0, upper, points)
    first = int(np.argmax(norm2(coarse) <= radius2))
    fine = np.linspace(coarse[first - 1], coarse[first], points)
    feasible = fine[norm2(fine) <= radius2]
    return float(distance(feasible[:1])[0])


def suite_bisection(rng: np.random.Generator, instances: int = 10) -> SuiteResult:
    result = SuiteResult("bisection")
    for trial in range(instances):
        g = complex_normal(rng, (5, 5))
        d = g @ g.conj().T + 0.1 * np.eye(5)
        target = complex_normal(rng, 5) * 5.0
        solution, eta = regularized_inverse_bisection(d, target, 1.0)
        center = np.linalg.solve(d, target)
        value = float(np.real(np.vdot(solution - center, d @ (solution - center))))
        oracle = bisection_grid_oracle(d, target, 1.0)
        result.check(abs(value - oracle) <= 1e-6 * max(1.0, oracle),
                     f"trial {trial}: bisection objective {value:.12g} vs grid {oracle:.12g}")
        norm2 = float(np.real(np.vdot(solution, solution)))
        result.check(norm2 <= 1.0 + 1e-10, f"trial {trial}: infeasible solution, norm² {norm2:.12g}")
        result.check(abs(eta * (norm2 - 1.0)) <= 1e-10 * max(eta, 1.0),
                     f"trial {trial}: complementary slackness violated (η={eta:.6g})")
    return result


def suite_sandwich(rng: np.random.Generator, samples: int = 1000) -> SuiteResult:
    result = SuiteResult("sandwich")
    for trial in range(samples):
        p = random_ratio_problem(rng, n=3, d=4, ell=2, m=2)
        x = random_feasible_point(p, rng)
        y = complex_normal(rng, (p.n, p.ell, p.m))
        z = complex_normal(rng, p.iterate_shape)
        lam = block_lambdas(dmats(p, y))
        fo, fq, ft = objective(p, x), f_q(p, x, y), f_t(p, x, y, z, lam)
        tol = 1e-9 * max(1.0, abs(fo))
        result.check(ft <= fq + tol, f"sample {trial}: f_t {ft:.12g} > f_q {fq:.12g}")
        result.check(fq <= fo + tol, f"sample {trial}: f_q {fq:.12g} > f_o {fo:.12g}")
        y_star = optimal_y(p, x)
        result.check(_rel_close(f_q(p, x, y_star), fo, 1e-9), f"sample {trial}: f_q(y*) differs from f_o")
        result.check(_rel_close(f_t(p, x, y, x, lam), fq, 1e-9), f"sample {trial}: f_t(z=x) differs from f_q")
    return result


def suite_nonhomogeneous_bound(rng: np.random.Generator, samples: int = 1000) -> SuiteResult:
    result = SuiteResult("nonhomogeneous_bound")
    for trial in range(samples):
        dim = int(rng.integers(1, 6))
        g = complex_normal(rng, (dim, dim))
        low = 0.5 * (g + g.conj().T)
        h = complex_normal(rng, (dim, dim))
        high = low + h @ h.conj().T
        x, z = complex_normal(rng, dim), complex_normal(rng, dim)
        quad = float(np.real(np.vdot(x, low @ x)))
        bound = nonhomogeneous_bound(low, high, x, z)
        result.check(quad <= bound + 1e-9 * max(1.0, abs(bound)), f"sample {trial}: bound violated")
        result.check(_rel_close(nonhomogeneous_bound(low, high, x, x), quad, 1e-9),
                     f"sample {trial}: bound not tight at z = x")
    return result


def suite_gradient(rng: np.random.Generator, instances: int = 20) -> SuiteResult:
    result = SuiteResult("gradient")
    for trial in range(instances):
        p = random_ratio_problem(rng, n=int(rng.integers(1, 4)), d=int(rng.integers(2, 6)), ell=2,
                                 m=int(rng.integers(1, 3)), radius2=None)
        x = complex_normal(rng, p.iterate_shape)
        analytic = gradient(p, x)
        numeric = finite_difference_gradient(lambda v: objective(p, v), x)
        error = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-12)
        result.check(error <= 1e-6, f"instance {trial}: relative gradient error {error:.3e}")
    return result


def suite_gp_equivalence(rng: np.random.Generator, instances: int = 20, iterations: int = 50) -> SuiteResult:
    result = SuiteResult("gp_equivalence")
    for trial in range(instances):
        p = random_ratio_problem(rng, n=3, d=5, ell=2, m=2)
        x = random_feasible_point(p, rng)
        for k in range(iterations):
            lam = block_lambdas(dmats(p, optimal_y(p, x)))
            expected = project_iterate(p.constraints, x + gradient(p, x) / (2.0 * lam[:, None, None]))
            x_next = step_nonhomogeneous(p, x)
            deviation = float(np.max(np.abs(x_next - expected)))
            result.check(deviation <= 1e-10, f"instance {trial}, iteration {k}: deviation {deviation:.3e}")
            x = x_next
    return result


def suite_monotonicity(rng: np.random.Generator, instances: int = 100, iterations: int = 500) -> SuiteResult:
    result = SuiteResult("monotonicity")
    opts = SolverOptions(max_iters=iterations, rel_obj_tol=1e-300, record_wall_time=False)
    for trial in range(instances):
        p = random_ratio_problem(rng)
        x0 = random_feasible_point(p, rng)
        for solver in MONOTONE_SOLVERS:
            values = np.concatenate([[objective(p, x0)], run(p, x0, solver, opts).objectives])
            drops = values[:-1] - values[1:]
            worst = float(np.max(drops / np.maximum(1.0, np.abs(values[:-1]))))
            result.check(worst <= 1e-9, f"instance {trial}, {solver}: relative decrease {worst:.3e}")
    return result


def suite_log_fp(rng: np.random.Generator, samples: int = 500) -> SuiteResult:
    result = SuiteResult("log_fp")
    for trial in range(samples):
        p = random_log_problem(rng)
        x = random_feasible_point(p.base, rng)
        t = optimal_t(p, x)
        g = log_objective(p, x)
        result.check(_rel_close(dual_transform_surrogate(p, x, t), g, 1e-10),
                     f"sample {trial}: surrogate not tight at t*")
        hat = hat_ratio_values(p, x)
        result.check(np.allclose(hat, t / (1.0 + t), rtol=1e-10, atol=1e-12),
                     f"sample {trial}: hat ratios differ from M/(1+M)")
        t_random = t * rng.uniform(0.0, 2.0, size=t.shape)
        result.check(dual_transform_surrogate(p, x, t_random) <= g + 1e-9 * max(1.0, abs(g)),
                     f"sample {trial}: surrogate above the objective")

        if trial < 10:
            q = hat_problem(p, t)
            lam = block_lambdas(dmats(q, optimal_y(q, x)))
            numeric = finite_difference_gradient(lambda v: log_objective(p, v), x)
            expected = project_iterate(p.constraints, x + numeric / (2.0 * lam[:, None, None]))
            deviation = float(np.max(np.abs(step_generalized(p, x, "nonhomogeneous") - expected)))
            result.check(deviation <= 1e-8, f"sample {trial}: composite step deviates by {deviation:.3e}")
    return result


def suite_wmmse_equivalence(rng: np.random.Generator, instances: int = 10, iterations: int = 10) -> SuiteResult:
    result = SuiteResult("wmmse_equivalence")
    for trial in range(instances):
        p = random_log_problem(rng, cells=2, users=2, M=6, N=2)
        x_classic = x_general = random_feasible_point(p.base, rng)
        for k in range(iterations):
            x_classic = step_wmmse_classic(p, x_classic)
            x_general = step_generalized(p, x_general, "conventional")
            deviation = float(np.max(np.abs(x_classic - x_general)))
            result.check(deviation <= 1e-9, f"instance {trial}, iteration {k}: deviation {deviation:.3e}")
    return result


def suite_compile(rng: np.random.Generator, precoders: int = 100) -> SuiteResult:
    result = SuiteResult("compile")
    seed = int(rng.integers(2**32))
    scenario = generate_isac_scenario({"M": 8, "N": 2, "N_r": 8}, seed)
    compiled = compile_isac(scenario)
    for trial in range(precoders):
        v = random_feasible_point(compiled, rng)
        direct = isac_objective(scenario, v[0], v[1])
        result.check(_rel_close(objective(compiled, v), direct, 1e-10), f"isac precoder {trial}: mismatch")

    net = generate_mimo_network({"L": 3, "Q": 2, "M": 8, "N": 2}, seed)
    problem = compile_mimo(net)
    for trial in range(precoders):
        v = random_feasible_point(problem.base, rng)
        direct = weighted_sum_rate(net, v)
        result.check(_rel_close(log_objective(problem, v), direct, 1e-10), f"mimo precoder {trial}: mismatch")
        sinr = ratio_values(problem.base, v)
        result.check(np.all(sinr >= 0), f"mimo precoder {trial}: negative SINR")
    return result


def suite_rates(rng: np.random.Generator) -> SuiteResult:
    result = SuiteResult("rates")
    k = np.arange(1, 201)
    f_star = float(rng.normal())
    for power in (1, 2):
        fit = fit_rate(k, f_star - 1.0 / k ** power, f_star)
        result.check(abs(fit.slope + power) <= 1e-6, f"1/k^{power} trace: slope {fit.slope:.9f}")
    return result


SUITES: Dict[str, Callable[[np.random.Generator], SuiteResult]] = {
    "bisection": suite_bisection,
    "sandwich": suite_sandwich,
    "nonhomogeneous_bound": suite_nonhomogeneous_bound,
    "gradient": suite_gradient,
    "gp_equivalence": suite_gp_equivalence,
    "monotonicity": suite_monotonicity,
    "log_fp": suite_log_fp,
    "wmmse_equivalence": suite_wmmse_equivalence,
    "compile": suite_compile,
    "rates": suite_rates,
}


def cmd_verify(suite: Optional[str] = None, seed: int = DEFAULT_VERIFY_SEED) -> dict:
    """
    Run one property suite, or all of them when suite is empty.

    Args:
        suite: Suite id from SUITES, or None/'' for all
        seed: Seed of the random instances

    Returns:
        dict: Machine-readable report with per-suite results

    Raises:
        ValueError: for an unknown suite id
    """
    if suite and suite not in SUITES:
        raise ValueError(f"Unknown suite: {suite}")
    names = [suite] if suite else list(SUITES)
    results = []
    for name in names:
        # each suite keeps its own stream whether it runs alone or with the others
        rng = np.random.default_rng([int(seed) % 2**64, list(SUITES).index(name)])
        outcome = SUITES[name](rng)
        logger.info(f"Suite {name}: {outcome.checks} checks, {len(outcome.failures)} failure(s)")
        results.append(outcome.to_dict())
    failures = sum(len(r["failures"]) for r in results)
    return {"seed": seed, "suites": results, "failures": failures, "passed": failures == 0}
