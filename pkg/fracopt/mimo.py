"""
Multi-cell massive-MIMO downlink weighted sum-rate precoding
Hexagonal layout with wrap-around distances, log-distance path loss with
log-normal shadowing, Rayleigh fading, and the compilation of the
weighted sum-rate problem into a LogFPProblem.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import ConstraintSpec, hermitian_solve
from .log_fp import LogFPProblem, run_log
from .model import random_feasible_point
from .solvers import ConvergenceTrace, SolverOptions
from .utils import InvalidParams, complex_normal, dbm_to_watts

logger = logging.getLogger(__name__)

# Simulation defaults (distances in km, powers in dBm)
MIMO_DEFAULTS = {
    "L": 7,
    "Q": 6,
    "M": 128,
    "N": 4,
    "isd_km": 0.8,
    "p_max_dbm": 20.0,
    "noise_dbm": -90.0,
    "mu": 1.0,
    "shadowing_db": 8.0,
    "guard_km": 0.01,
}

MAX_CELLS = 7
PATH_LOSS_INTERCEPT_DB = 128.1
PATH_LOSS_SLOPE_DB = 37.6


@dataclass(frozen=True, eq=False)
class MimoNetwork:
    """
    Channels H[l, q, i] (N×M) go from BS i to user q of cell l.
    """
    L: int
    Q: int
    M: int
    N: int
    isd_km: float
    H: np.ndarray
    mu: np.ndarray
    noise: float
    p_max: float
    bs_positions: np.ndarray
    user_positions: np.ndarray
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.Q > self.M:
            raise InvalidParams(f"Q={self.Q} users per cell exceed M={self.M} antennas")
        if self.noise <= 0:
            raise InvalidParams(f"Noise power must be positive, got {self.noise}")
        H = np.asarray(self.H, dtype=complex)
        if H.shape != (self.L, self.Q, self.L, self.N, self.M):
            raise InvalidParams(f"H has shape {H.shape}, expected {(self.L, self.Q, self.L, self.N, self.M)}")
        mu = np.broadcast_to(np.asarray(self.mu, dtype=float), (self.L, self.Q)).copy()
        if np.any(mu < 0):
            raise InvalidParams("Rate weights must be nonnegative")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "mu", mu)


def path_loss_db(distance_km: float) -> float:
    """128.1 + 37.6·log10(d) with d in km, shadowing excluded."""
    distance_km = np.asarray(distance_km, dtype=float)
    if np.any(distance_km <= 0):
        raise InvalidParams("Distances must be positive")
    return PATH_LOSS_INTERCEPT_DB + PATH_LOSS_SLOPE_DB * np.log10(distance_km)


def hex_layout(L: int, isd_km: float) -> np.ndarray:
    """
    BS positions: the center cell, then neighbours at 60° steps.

    Args:
        L: Number of cells (1 to 7)
        isd_km: Inter-site distance

    Returns:
        np.ndarray: (L, 2) coordinates in km
    """
    if not 1 <= L <= MAX_CELLS:
        raise InvalidParams(f"L must be between 1 and {MAX_CELLS}, got {L}")
    angles = np.deg2rad(60.0 * np.arange(MAX_CELLS - 1))
    ring = isd_km * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return np.vstack([np.zeros((1, 2)), ring])[:L]


def cluster_lattice(isd_km: float) -> np.ndarray:
    """Columns are the two translation vectors tiling the 7-cell cluster."""
    s1 = isd_km * np.array([2.5, np.sqrt(3.0) / 2.0])
    rotation = np.array([[0.5, -np.sqrt(3.0) / 2.0], [np.sqrt(3.0) / 2.0, 0.5]])
    return np.column_stack([s1, rotation @ s1])


def wrap_distance(a, b, isd_km: float) -> np.ndarray:
    """
    Distance from a to the nearest periodic image of b.

    Args:
        a: Point(s) (..., 2) in km
        b: Point(s) (..., 2) in km, broadcast against a
        isd_km: Inter-site distance defining the cluster lattice

    Returns:
        np.ndarray: Wrap-around distances
    """
    basis = cluster_lattice(isd_km)
    delta = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    coords = np.rint(delta @ np.linalg.inv(basis).T)
    best = None
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            shift = (coords + np.array([da, db])) @ basis.T
            dist = np.linalg.norm(delta - shift, axis=-1)
            best = dist if best is None else np.minimum(best, dist)
    return best


def _inside_hexagon(points: np.ndarray, isd_km: float) -> np.ndarray:
    angles = np.deg2rad([0.0, 60.0, 120.0])
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return np.all(np.abs(points @ normals.T) <= isd_km / 2.0, axis=-1)


def sample_users(rng: np.random.Generator, count: int, isd_km: float, guard_km: float) -> np.ndarray:
    """Uniform points in a hexagonal cell centred at the origin, outside the guard disk."""
    circumradius = isd_km / np.sqrt(3.0)
    points = np.empty((0, 2))
    while points.shape[0] < count:
        draw = rng.uniform([-isd_km / 2.0, -circumradius], [isd_km / 2.0, circumradius], size=(4 * count, 2))
        keep = _inside_hexagon(draw, isd_km) & (np.linalg.norm(draw, axis=1) >= guard_km)
        points = np.vstack([points, draw[keep]])
    return points[:count]


def generate_mimo_network(params: Optional[dict] = None, seed: int = 0) -> MimoNetwork:
    """
    Draw a wrapped-around hexagonal network.

    Args:
        params: Overrides of MIMO_DEFAULTS
        seed: Any integer; reduced modulo 2**64

    Returns:
        MimoNetwork: Deterministic for a given (params, seed)
    """
    unknown = set(params or {}) - set(MIMO_DEFAULTS)
    if unknown:
        raise InvalidParams(f"Unknown MIMO parameters: {', '.join(sorted(unknown))}")
    config = {**MIMO_DEFAULTS, **(params or {})}
    L, Q, M, N = (int(config[k]) for k in ("L", "Q", "M", "N"))
    isd = float(config["isd_km"])
    if min(Q, M, N) < 1:
        raise InvalidParams("Q, M and N must be at least 1")
    if Q > M:
        raise InvalidParams(f"Q={Q} users per cell exceed M={M} antennas")
    if isd <= 0 or config["guard_km"] < 0 or config["guard_km"] >= isd / 2.0:
        raise InvalidParams("Need isd_km > 0 and 0 <= guard_km < isd_km / 2")
    if config["shadowing_db"] < 0:
        raise InvalidParams("shadowing_db must be nonnegative")

    rng = np.random.default_rng(int(seed) % 2**64)
    bs = hex_layout(L, isd)
    users = np.stack([bs[l] + sample_users(rng, Q, isd, config["guard_km"]) for l in range(L)])

    # distances[l, q, i]: user (l, q) to BS i
    distances = wrap_distance(users[:, :, None, :], bs[None, None, :, :], isd)
    shadowing = config["shadowing_db"] * rng.standard_normal(distances.shape)
    gain = 10.0 ** (-(path_loss_db(distances) + shadowing) / 10.0)
    H = np.sqrt(gain)[..., None, None] * complex_normal(rng, (L, Q, L, N, M))

    logger.debug(f"Generated {L}-cell network, {Q} users per cell, seed={seed}")
    return MimoNetwork(
        L=L, Q=Q, M=M, N=N, isd_km=isd, H=H, mu=config["mu"],
        noise=dbm_to_watts(config["noise_dbm"]), p_max=dbm_to_watts(config["p_max_dbm"]),
        bs_positions=bs, user_positions=users, params=config, seed=int(seed),
    )


def _as_precoders(net: MimoNetwork, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v.reshape(net.L, net.Q, net.M)


def mimo_sinr(net: MimoNetwork, v, l: int, q: int) -> float:
    """SINR of user q in cell l with all other streams as interference."""
    v = _as_precoders(net, v)
    # received[i, j]: stream (i, j) as seen by user (l, q)
    received = np.einsum("inm,ijm->ijn", net.H[l, q], v)
    signal = received[l, q].copy()
    received[l, q] = 0.0
    interference = received.reshape(-1, net.N)
    covariance = net.noise * np.eye(net.N) + interference.T @ interference.conj()
    return float(np.real(np.vdot(signal, hermitian_solve(covariance, signal))))


def weighted_sum_rate(net: MimoNetwork, v) -> float:
    """Σ μ_{lq} log(1 + SINR_{lq}) in nats."""
    return float(sum(net.mu[l, q] * np.log1p(mimo_sinr(net, v, l, q))
                     for l in range(net.L) for q in range(net.Q)))


def compile_mimo(net: MimoNetwork) -> LogFPProblem:
    """
    One ratio and one precoder block per user, block index l·Q + q.

    Every block of cell l belongs to that BS's group-ball power budget.
    """
    n = net.L * net.Q
    cell_of = np.repeat(np.arange(net.L), net.Q)
    user_channels = net.H.reshape(n, net.L, net.N, net.M)
    A = user_channels[np.arange(n), cell_of]
    B = user_channels[:, cell_of].copy()
    B[np.arange(n), np.arange(n)] = 0.0
    constraints = [ConstraintSpec.group_ball(range(l * net.Q, (l + 1) * net.Q), net.p_max) for l in cell_of]
    return LogFPProblem(A=A, B=B, mu=net.mu.reshape(-1), noise=net.noise, constraints=constraints)


def matched_filter(h, p_max: float) -> np.ndarray:
    """√P·h^c/‖h‖, the capacity-achieving precoder of a single-antenna receiver."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    return np.sqrt(p_max) * h.conj() / np.linalg.norm(h)


def solve_mimo(net: MimoNetwork, algorithm: str = "generalized_nonhomogeneous",
               opts: Optional[SolverOptions] = None, x0: Optional[np.ndarray] = None) -> ConvergenceTrace:
    """
    Weighted sum-rate maximization with one of LOG_SOLVER_IDS or its alias.

    The default start is a projected CN(0, 1) draw seeded by opts.seed.
    """
    opts = opts or SolverOptions()
    p = compile_mimo(net)
    if x0 is None:
        x0 = random_feasible_point(p.base, np.random.default_rng(int(opts.seed) % 2**64))
    trace = run_log(p, x0, algorithm, opts)
    trace.metadata["experiment"] = "mimo"
    return trace
