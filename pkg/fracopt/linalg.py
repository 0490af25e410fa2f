"""
Complex linear-algebra primitives shared by every solver
Hermitian PD solves, spectral bounds, norm-ball projections and the
Lagrange-multiplier bisection for power-constrained quadratic subproblems
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .utils import (
    DEFAULT_BISECTION_TOL,
    HERMITIAN_RTOL,
    JITTER_SCALE,
    MAX_BRACKET_DOUBLINGS,
    MAX_HALVINGS,
    POWER_ITERATION_MAX_ITERS,
    POWER_ITERATION_TOL,
    BisectionFailed,
    NonConvergent,
    NotPositiveDefinite,
    complex_normal,
)

logger = logging.getLogger(__name__)

# complex128 arrays; the aliases document intent in signatures
CMatrix = np.ndarray
CVector = np.ndarray
HermitianPD = np.ndarray

CONSTRAINT_KINDS = ("unconstrained", "ball", "group_ball")
SPECTRAL_MODES = ("frobenius", "exact")


@dataclass(frozen=True)
class ConstraintSpec:
    """Feasible set of one variable block."""
    kind: str = "unconstrained"
    radius2: Optional[float] = None
    members: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise ValueError(f"Unknown constraint kind: {self.kind}")
        if self.kind != "unconstrained":
            if self.radius2 is None or not float(self.radius2) > 0:
                raise ValueError(f"Ball constraints need radius2 > 0, got {self.radius2}")
        if self.kind == "group_ball":
            if not self.members:
                raise ValueError("group_ball constraints need at least one member")
            object.__setattr__(self, "members", tuple(int(j) for j in self.members))

    @classmethod
    def unconstrained(cls) -> "ConstraintSpec":
        return cls("unconstrained")

    @classmethod
    def ball(cls, radius2: float) -> "ConstraintSpec":
        return cls("ball", float(radius2))

    @classmethod
    def group_ball(cls, members: Sequence[int], radius2: float) -> "ConstraintSpec":
        return cls("group_ball", float(radius2), tuple(members))

    def to_dict(self) -> dict:
        document = {"kind": self.kind}
        if self.radius2 is not None:
            document["radius2"] = self.radius2
        if self.members is not None:
            document["members"] = list(self.members)
        return document

    @classmethod
    def from_dict(cls, document: dict) -> "ConstraintSpec":
        members = document.get("members")
        return cls(document["kind"], document.get("radius2"),
                   tuple(members) if members is not None else None)


def check_hermitian(m: np.ndarray) -> np.ndarray:
    """
    Validate a square finite Hermitian matrix and return its exact Hermitian part.

    Args:
        m: Candidate matrix

    Returns:
        np.ndarray: (m + m^H) / 2
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matrix has non-finite entries")
    scale = max(np.linalg.norm(m), 1.0)
    if np.linalg.norm(m - m.conj().T) > HERMITIAN_RTOL * scale:
        raise ValueError("Matrix is not Hermitian")
    return 0.5 * (m + m.conj().T)


def hermitian_solve(m: HermitianPD, rhs: CMatrix) -> CMatrix:
    """
    Solve m·s = rhs for Hermitian positive definite m via Cholesky.

    Args:
        m: Hermitian PD matrix (dim × dim)
        rhs: Right-hand side vector or matrix with dim rows

    Returns:
        np.ndarray: Solution with the shape of rhs

    Raises:
        ValueError: if m is not square, finite and Hermitian
        NotPositiveDefinite: if the factorization breaks down
    """
    m = check_hermitian(m)
    rhs = np.asarray(rhs)
    if m.shape[0] != rhs.shape[0]:
        raise ValueError(f"Dimension mismatch: {m.shape} vs rhs {rhs.shape}")
    try:
        factor = cho_factor(m, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed for a {m.shape[0]}x{m.shape[0]} matrix") from exc
    return cho_solve(factor, rhs, check_finite=False)


def jittered(d: np.ndarray) -> np.ndarray:
    """Add JITTER_SCALE·tr(d)/dim to the diagonal of a PSD matrix."""
    dim = d.shape[0]
    shift = JITTER_SCALE * float(np.real(np.trace(d))) / dim
    if shift <= 0:
        return d
    return d + shift * np.eye(dim)


def _power_iteration(m: np.ndarray, tol: float, max_iters: int) -> float:
    rng = np.random.default_rng(0)
    v = complex_normal(rng, m.shape[0])
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(max_iters):
        w = m @ v
        rho_new = float(np.real(np.vdot(v, w)))
        residual = np.linalg.norm(w - rho_new * v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        if residual <= tol * abs(rho_new) or abs(rho_new - rho) <= tol * tol * abs(rho_new):
            return rho_new
        v = w / norm_w
        rho = rho_new
    raise NonConvergent(f"Power iteration did not converge within {max_iters} iterations")


def spectral_upper_bound(m: HermitianPD, mode: str = "frobenius") -> float:
    """
    Upper bound on the largest eigenvalue of a Hermitian PSD matrix.

    Args:
        m: Hermitian PSD matrix
        mode: "frobenius" (‖m‖_F) or "exact" (power iteration)

    Returns:
        float: λ with λ ≥ λ_max(m) up to the power-iteration tolerance
    """
    if mode not in SPECTRAL_MODES:
        raise ValueError(f"Unknown spectral mode: {mode}")
    frobenius = float(np.linalg.norm(m))
    if mode == "frobenius" or frobenius == 0.0:
        return frobenius
    rho = _power_iteration(np.asarray(m), POWER_ITERATION_TOL, POWER_ITERATION_MAX_ITERS)
    # the Rayleigh quotient approaches λ_max from below
    return min(rho * (1.0 + POWER_ITERATION_TOL), frobenius)


def project_ball(v: CVector, radius2: float) -> CVector:
    """
    Euclidean (Frobenius for matrices) projection onto {‖v‖² ≤ radius2}.

    Args:
        v: Vector or matrix block
        radius2: Squared radius (power budget)

    Returns:
        np.ndarray: v itself if feasible, else v scaled onto the sphere
    """
    v = np.array(v, dtype=complex)
    norm2 = float(np.real(np.vdot(v, v)))
    if norm2 <= radius2:
        return v
    return v * np.sqrt(radius2 / norm2)


def project_group_ball(blocks: Sequence[CVector], radius2: float) -> List[CVector]:
    """
    Projection onto {Σ_j ‖block_j‖² ≤ radius2}: one common scaling for all blocks.

    Args:
        blocks: Blocks sharing a single budget (the precoders of one BS)
        radius2: Squared radius

    Returns:
        list: Projected blocks
    """
    blocks = [np.array(b, dtype=complex) for b in blocks]
    total = sum(float(np.real(np.vdot(b, b))) for b in blocks)
    if total <= radius2:
        return blocks
    factor = np.sqrt(radius2 / total)
    return [b * factor for b in blocks]


def project_iterate(constraints: Sequence[ConstraintSpec], blocks: np.ndarray) -> np.ndarray:
    """
    Apply every block's constraint to a stacked iterate.

    Args:
        constraints: One ConstraintSpec per block
        blocks: Array of shape (K, d, m) (or (K, d))

    Returns:
        np.ndarray: Feasible copy of blocks; each group is projected once
    """
    out = np.array(blocks, dtype=complex)
    projected_groups = set()
    for b, spec in enumerate(constraints):
        if spec.kind == "ball":
            out[b] = project_ball(out[b], spec.radius2)
        elif spec.kind == "group_ball":
            if spec.members in projected_groups:
                continue
            projected_groups.add(spec.members)
            scaled = project_group_ball([out[j] for j in spec.members], spec.radius2)
            for j, block in zip(spec.members, scaled):
                out[j] = block
    return out


def is_feasible(constraints: Sequence[ConstraintSpec], blocks: np.ndarray, rtol: float = 1e-9) -> bool:
    """Check every constraint with relative slack rtol."""
    seen = set()
    for b, spec in enumerate(constraints):
        if spec.kind == "ball":
            if np.real(np.vdot(blocks[b], blocks[b])) > spec.radius2 * (1.0 + rtol):
                return False
        elif spec.kind == "group_ball" and spec.members not in seen:
            seen.add(spec.members)
            total = sum(np.real(np.vdot(blocks[j], blocks[j])) for j in spec.members)
            if total > spec.radius2 * (1.0 + rtol):
                return False
    return True


def _squared_norm(solutions: Sequence[np.ndarray]) -> float:
    return sum(float(np.real(np.vdot(s, s))) for s in solutions)


def group_regularized_inverse_bisection(ds: Sequence[HermitianPD], targets: Sequence[np.ndarray],
                                        radius2: float, tol: float = DEFAULT_BISECTION_TOL):
    """
    Solve s_j(η) = (d_j + ηI)^{-1} target_j for the smallest η ≥ 0 with Σ‖s_j‖² ≤ radius2.

    η = 0 is tried first; otherwise the bracket [0, 1] is doubled until
    feasible and then halved until the squared-norm slack is within
    tol·radius2 (or MAX_HALVINGS is reached). The feasible end is returned.

    Args:
        ds: Hermitian PSD matrices (PD whenever η = 0 is to be accepted)
        targets: Right-hand sides, one per matrix
        radius2: Shared power budget
        tol: Relative tolerance on the squared-norm slack

    Returns:
        tuple: (list of solutions, η)

    Raises:
        BisectionFailed: if no feasible η is found within MAX_BRACKET_DOUBLINGS doublings
    """
    ds = [np.asarray(d) for d in ds]
    targets = [np.asarray(t, dtype=complex) for t in targets]
    if not radius2 > 0:
        raise ValueError(f"radius2 must be positive, got {radius2}")
    if all(not np.any(t) for t in targets):
        return [np.zeros_like(t) for t in targets], 0.0

    def solve(eta: float):
        return [hermitian_solve(d + eta * np.eye(d.shape[0]), t) for d, t in zip(ds, targets)]

    try:
        solutions = solve(0.0)
        if _squared_norm(solutions) <= radius2:
            return solutions, 0.0
    except NotPositiveDefinite:
        pass

    lo, hi = 0.0, 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        try:
            best = solve(hi)
            if _squared_norm(best) <= radius2:
                break
        except NotPositiveDefinite:
            pass
        lo, hi = hi, 2.0 * hi
    else:
        raise BisectionFailed(f"No feasible multiplier found below {hi:g}")

    for _ in range(MAX_HALVINGS):
        if radius2 - _squared_norm(best) <= tol * radius2:
            break
        mid = 0.5 * (lo + hi)
        candidate = solve(mid)
        if _squared_norm(candidate) > radius2:
            lo = mid
        else:
            hi, best = mid, candidate
    return best, hi


def regularized_inverse_bisection(d: HermitianPD, target: np.ndarray, radius2: float,
                                  tol: float = DEFAULT_BISECTION_TOL):
    """
    Single-block version of group_regularized_inverse_bisection.

    Returns:
        tuple: (solution, η)
    """
    solutions, eta = group_regularized_inverse_bisection([d], [target], radius2, tol)
    return solutions[0], eta
