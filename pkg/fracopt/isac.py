"""
Two-BS integrated sensing and communication precoding
BS 1 serves user 1 and senses a target, BS 2 serves user 2. The objective
is the Fisher information of the target angle plus weighted user SINRs.

Geometry convention: both arrays lie along the x-axis with broadside +y,
so the target angle seen from BS 1 is θ = atan2(Δx, Δy).
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import ConstraintSpec, hermitian_solve, jittered, project_ball, regularized_inverse_bisection
from .model import RatioProblem, random_feasible_point
from .solvers import ConvergenceTrace, SolverOptions, block_lambdas, run
from .utils import DEFAULT_BISECTION_TOL, InvalidParams, complex_normal, dbm_to_watts

logger = logging.getLogger(__name__)

# Simulation defaults (positions in meters, powers in dBm)
ISAC_DEFAULTS = {
    "M": 64,
    "N": 2,
    "N_r": 72,
    "omega1": 1e5,
    "omega2": 1e5,
    "noise_dbm": -80.0,
    "radar_noise_dbm": -80.0,
    "p_max_dbm": 20.0,
    "alpha": 1.0,
    "bs1": [0.0, 0.0],
    "bs2": [250.0, 0.0],
    "user1": [-10.0, 100.0],
    "user2": [350.0, 100.0],
    "target": [200.0, 200.0],
}

PATH_LOSS_INTERCEPT_DB = 32.6
PATH_LOSS_SLOPE_DB = 36.7


@dataclass(frozen=True, eq=False)
class IsacScenario:
    """Physical ISAC configuration; channels are N×M (users) and N_r×M (G)."""
    M: int
    N: int
    N_r: int
    theta: float
    alpha: float
    noise_r: float
    noise_1: float
    noise_2: float
    p_max: float
    omega1: float
    omega2: float
    H11: np.ndarray
    H12: np.ndarray
    H21: np.ndarray
    H22: np.ndarray
    G: np.ndarray
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if min(self.noise_r, self.noise_1, self.noise_2) <= 0:
            raise InvalidParams("Noise powers must be positive")
        if self.p_max <= 0:
            raise InvalidParams(f"p_max must be positive, got {self.p_max}")
        if self.alpha < 0:
            raise InvalidParams(f"alpha must be nonnegative, got {self.alpha}")
        if self.omega1 < 0 or self.omega2 < 0:
            raise InvalidParams("SINR weights must be nonnegative")
        for name, shape in (("H11", (self.N, self.M)), ("H12", (self.N, self.M)), ("H21", (self.N, self.M)),
                            ("H22", (self.N, self.M)), ("G", (self.N_r, self.M))):
            value = np.asarray(getattr(self, name), dtype=complex)
            if value.shape != shape:
                raise InvalidParams(f"{name} must have shape {shape}, got {value.shape}")
            object.__setattr__(self, name, value)

    @property
    def a_dot(self) -> np.ndarray:
        return steering_derivative(self.theta, self.M, self.N_r)


def isac_path_loss_db(distance_m: float) -> float:
    """32.6 + 36.7·log10(d) with d in meters."""
    if distance_m <= 0:
        raise InvalidParams(f"Distance must be positive, got {distance_m}")
    return PATH_LOSS_INTERCEPT_DB + PATH_LOSS_SLOPE_DB * np.log10(distance_m)


def steering_vector(theta: float, count: int) -> np.ndarray:
    """Uniform linear array response with entries exp(−jπ k sinθ)."""
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    k = np.arange(count)
    return np.exp(-1j * np.pi * k * np.sin(theta))


def _steering_vector_derivative(theta: float, count: int) -> np.ndarray:
    k = np.arange(count)
    return -1j * np.pi * k * np.cos(theta) * steering_vector(theta, count)


def steering_derivative(theta: float, M: int, N_r: int) -> np.ndarray:
    """∂/∂θ of a_r(θ) a_t(θ)^T, shape (N_r, M)."""
    if M < 1 or N_r < 1:
        raise ValueError("Antenna counts must be at least 1")
    a_t = steering_vector(theta, M)
    a_r = steering_vector(theta, N_r)
    return (np.outer(_steering_vector_derivative(theta, N_r), a_t)
            + np.outer(a_r, _steering_vector_derivative(theta, M)))


def fisher_information(s: IsacScenario, v1, v2) -> float:
    """J_θ = α v1^H Ȧ^H (σ_r² I + G v2 v2^H G^H)^{-1} Ȧ v1."""
    v1 = np.asarray(v1, dtype=complex).reshape(-1)
    v2 = np.asarray(v2, dtype=complex).reshape(-1)
    echo = s.a_dot @ v1
    gv = s.G @ v2
    covariance = s.noise_r * np.eye(s.N_r) + np.outer(gv, gv.conj())
    return float(s.alpha * np.real(np.vdot(echo, hermitian_solve(covariance, echo))))


def isac_sinr(s: IsacScenario, v1, v2, user: int) -> float:
    """SINR of user 1 or 2."""
    v1 = np.asarray(v1, dtype=complex).reshape(-1)
    v2 = np.asarray(v2, dtype=complex).reshape(-1)
    if user == 1:
        signal, interference, noise = s.H11 @ v1, s.H12 @ v2, s.noise_1
    elif user == 2:
        signal, interference, noise = s.H22 @ v2, s.H21 @ v1, s.noise_2
    else:
        raise ValueError(f"user must be 1 or 2, got {user}")
    covariance = noise * np.eye(s.N) + np.outer(interference, interference.conj())
    return float(np.real(np.vdot(signal, hermitian_solve(covariance, signal))))


def isac_objective(s: IsacScenario, v1, v2) -> float:
    """J_θ + ω1·SINR1 + ω2·SINR2."""
    return (fisher_information(s, v1, v2)
            + s.omega1 * isac_sinr(s, v1, v2, 1)
            + s.omega2 * isac_sinr(s, v1, v2, 2))


def _pad_rows(matrix: np.ndarray, rows: int) -> np.ndarray:
    out = np.zeros((rows, matrix.shape[1]), dtype=complex)
    out[:matrix.shape[0]] = matrix
    return out


def compile_isac(s: IsacScenario) -> RatioProblem:
    """
    Three ratios (J_θ, SINR1, SINR2) over the two precoders.

    Numerator rows are zero-padded to max(N_r, N); padded rows only see the
    noise term of their denominator.
    """
    ell = max(s.N_r, s.N)
    A = np.stack([
        _pad_rows(np.sqrt(s.alpha) * s.a_dot, ell),
        _pad_rows(s.H11, ell),
        _pad_rows(s.H22, ell),
    ])
    B = np.zeros((3, 2, ell, s.M), dtype=complex)
    B[0, 1] = _pad_rows(s.G, ell)
    B[1, 1] = _pad_rows(s.H12, ell)
    B[2, 0] = _pad_rows(s.H21, ell)
    return RatioProblem(
        A=A,
        B=B,
        weights=np.array([1.0, s.omega1, s.omega2]),
        denom_regularizer=np.array([s.noise_r, s.noise_1, s.noise_2]),
        constraints=[ConstraintSpec.ball(s.p_max)] * 2,
        m=1,
        owners=np.array([0, 0, 1]),
    )


def _isac_surrogate_terms(s: IsacScenario, v1, v2):
    """Optimal y_r, y_1, y_2 and the resulting D_1, D_2, c_1, c_2."""
    a_dot = s.a_dot
    g2, h12v2, h21v1 = s.G @ v2, s.H12 @ v2, s.H21 @ v1
    y_r = hermitian_solve(s.noise_r * np.eye(s.N_r) + np.outer(g2, g2.conj()), a_dot @ v1)
    y_1 = hermitian_solve(s.noise_1 * np.eye(s.N) + np.outer(h12v2, h12v2.conj()), s.H11 @ v1)
    y_2 = hermitian_solve(s.noise_2 * np.eye(s.N) + np.outer(h21v1, h21v1.conj()), s.H22 @ v2)

    h21y2 = s.H21.conj().T @ y_2
    gy_r = s.G.conj().T @ y_r
    h12y1 = s.H12.conj().T @ y_1
    d_1 = s.omega2 * np.outer(h21y2, h21y2.conj())
    d_2 = s.alpha * np.outer(gy_r, gy_r.conj()) + s.omega1 * np.outer(h12y1, h12y1.conj())
    c_1 = s.alpha * (a_dot.conj().T @ y_r) + s.omega1 * (s.H11.conj().T @ y_1)
    c_2 = s.omega2 * (s.H22.conj().T @ y_2)
    return d_1, d_2, c_1, c_2


def isac_step_conventional(s: IsacScenario, v1, v2, bisection_tol: float = DEFAULT_BISECTION_TOL):
    """Closed-form precoder update with one multiplier per BS."""
    v1 = np.asarray(v1, dtype=complex).reshape(-1)
    v2 = np.asarray(v2, dtype=complex).reshape(-1)
    d_1, d_2, c_1, c_2 = _isac_surrogate_terms(s, v1, v2)
    new_v1, _ = regularized_inverse_bisection(jittered(d_1), c_1, s.p_max, bisection_tol)
    new_v2, _ = regularized_inverse_bisection(jittered(d_2), c_2, s.p_max, bisection_tol)
    return new_v1, new_v2


def isac_step_nonhomogeneous(s: IsacScenario, v1, v2, lambda_mode: str = "frobenius"):
    """Matrix-inverse-free update v̂ = z + (c − D z)/λ followed by power clipping."""
    v1 = np.asarray(v1, dtype=complex).reshape(-1)
    v2 = np.asarray(v2, dtype=complex).reshape(-1)
    d_1, d_2, c_1, c_2 = _isac_surrogate_terms(s, v1, v2)
    lam_1, lam_2 = block_lambdas(np.stack([d_1, d_2]), lambda_mode)
    new_v1 = project_ball(v1 + (c_1 - d_1 @ v1) / lam_1, s.p_max)
    new_v2 = project_ball(v2 + (c_2 - d_2 @ v2) / lam_2, s.p_max)
    return new_v1, new_v2


def generate_isac_scenario(params: Optional[dict] = None, seed: int = 0) -> IsacScenario:
    """
    Build an ISAC scenario with Rayleigh fading scaled by distance path loss.

    Args:
        params: Overrides of ISAC_DEFAULTS
        seed: Fading seed

    Returns:
        IsacScenario: Deterministic for a given (params, seed)
    """
    unknown = set(params or {}) - set(ISAC_DEFAULTS)
    if unknown:
        raise InvalidParams(f"Unknown ISAC parameters: {', '.join(sorted(unknown))}")
    config = {**ISAC_DEFAULTS, **(params or {})}
    M, N, N_r = int(config["M"]), int(config["N"]), int(config["N_r"])
    if min(M, N, N_r) < 1:
        raise InvalidParams("Antenna counts must be at least 1")

    bs = [np.asarray(config["bs1"], dtype=float), np.asarray(config["bs2"], dtype=float)]
    users = [np.asarray(config["user1"], dtype=float), np.asarray(config["user2"], dtype=float)]
    target = np.asarray(config["target"], dtype=float)

    rng = np.random.default_rng(int(seed) % 2**64)

    def fading(rows: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
        gain = 10.0 ** (-isac_path_loss_db(float(np.linalg.norm(dst - src))) / 10.0)
        return np.sqrt(gain) * complex_normal(rng, (rows, M))

    channels = {f"H{i + 1}{j + 1}": fading(N, bs[j], users[i]) for i in range(2) for j in range(2)}
    G = fading(N_r, bs[1], bs[0])
    delta = target - bs[0]
    theta = float(np.arctan2(delta[0], delta[1]))

    noise = dbm_to_watts(config["noise_dbm"])
    return IsacScenario(
        M=M, N=N, N_r=N_r, theta=theta, alpha=float(config["alpha"]),
        noise_r=dbm_to_watts(config["radar_noise_dbm"]), noise_1=noise, noise_2=noise,
        p_max=dbm_to_watts(config["p_max_dbm"]),
        omega1=float(config["omega1"]), omega2=float(config["omega2"]),
        G=G, params=config, seed=int(seed), **channels,
    )


def solve_isac(s: IsacScenario, algorithm: str = "nonhomogeneous", opts: Optional[SolverOptions] = None,
               x0: Optional[np.ndarray] = None) -> ConvergenceTrace:
    """
    Run a quadratic-transform solver on the compiled ISAC problem.

    The default start is a projected CN(0, 1) draw seeded by opts.seed.
    """
    opts = opts or SolverOptions()
    p = compile_isac(s)
    if x0 is None:
        x0 = random_feasible_point(p, np.random.default_rng(int(opts.seed) % 2**64))
    trace = run(p, x0, algorithm, opts)
    trace.metadata["experiment"] = "isac"
    return trace
