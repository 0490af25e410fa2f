"""
Sum-of-weighted-ratios problems
Ratios, objective, the quadratic-transform surrogate f_q, the
nonhomogeneous surrogate f_t and the conjugate-coordinate gradient.

Iterates are stacked arrays of shape (K, d, m); a vector iterate of
shape (K, d) is the m = 1 case and goes through the same code path.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .linalg import ConstraintSpec, hermitian_solve, project_iterate
from .utils import complex_normal, complex_to_pairs, pairs_to_complex

logger = logging.getLogger(__name__)

PROBLEM_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class RatioProblem:
    """
    Weighted sum of matrix ratios tr((A_i X_o(i))^H S_i^{-1} A_i X_o(i)) with
    S_i = reg_i·I + Σ_k B_ik X_k X_k^H B_ik^H (+ A_i X X^H A_i^H for hat ratios).

    A has shape (n, ℓ, d), B has shape (n, K, ℓ, d); ratio i's numerator acts
    on block owners[i].

    Weights only need to be nonnegative. A zero weight keeps the ratio in the
    problem but drops it from the objective, which is how a single user of a
    network is singled out.
    """
    A: np.ndarray
    B: np.ndarray
    weights: np.ndarray
    denom_regularizer: Union[float, np.ndarray]
    constraints: Sequence[ConstraintSpec]
    m: int = 1
    owners: Optional[np.ndarray] = None
    numerator_in_denominator: bool = False
    reg: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        if A.ndim != 3:
            raise ValueError(f"A must have shape (n, ell, d), got {A.shape}")
        n, ell, d = A.shape
        if B.ndim != 4 or B.shape[0] != n or B.shape[2:] != (ell, d):
            raise ValueError(f"B must have shape ({n}, K, {ell}, {d}), got {B.shape}")
        num_blocks = B.shape[1]

        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.shape != (n,):
            raise ValueError(f"Expected {n} weights, got {weights.shape[0]}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("Weights must be finite and nonnegative")

        reg = np.broadcast_to(np.asarray(self.denom_regularizer, dtype=float), (n,)).copy()
        if np.any(reg < 0):
            raise ValueError("denom_regularizer must be nonnegative")

        owners = np.arange(n) if self.owners is None else np.asarray(self.owners, dtype=int).reshape(-1)
        if owners.shape != (n,) or np.any(owners < 0) or np.any(owners >= num_blocks):
            raise ValueError(f"owners must list one block index in [0, {num_blocks}) per ratio")

        constraints = tuple(self.constraints)
        if len(constraints) != num_blocks:
            raise ValueError(f"Expected {num_blocks} constraint specs, got {len(constraints)}")
        if int(self.m) < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "reg", reg)
        object.__setattr__(self, "owners", owners)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "m", int(self.m))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def ell(self) -> int:
        return self.A.shape[1]

    @property
    def d(self) -> int:
        return self.A.shape[2]

    @property
    def num_blocks(self) -> int:
        return self.B.shape[1]

    @property
    def iterate_shape(self) -> tuple:
        return (self.num_blocks, self.d, self.m)


def as_iterate(p: RatioProblem, x) -> np.ndarray:
    """Return x as a complex (K, d, m) array, accepting (K, d) vector iterates."""
    x = np.asarray(x, dtype=complex)
    if x.ndim == 2:
        x = x[..., np.newaxis]
    if x.shape != p.iterate_shape:
        raise ValueError(f"Iterate shape {x.shape} does not match problem shape {p.iterate_shape}")
    return x


def _numerators(p: RatioProblem, x: np.ndarray) -> np.ndarray:
    # A_i X_o(i), shape (n, ℓ, m)
    return np.einsum("ild,idm->ilm", p.A, x[p.owners])


def denominators(p: RatioProblem, x) -> np.ndarray:
    """All denominator matrices S_i, shape (n, ℓ, ℓ)."""
    x = as_iterate(p, x)
    bx = np.einsum("ikld,kdm->iklm", p.B, x)
    s = np.einsum("iklm,ikpm->ilp", bx, bx.conj())
    if p.numerator_in_denominator:
        ax = _numerators(p, x)
        s = s + np.einsum("ilm,ipm->ilp", ax, ax.conj())
    return s + p.reg[:, None, None] * np.eye(p.ell)


def denominator(p: RatioProblem, x, i: int) -> np.ndarray:
    """Denominator matrix of ratio i."""
    if not 0 <= i < p.n:
        raise IndexError(f"Ratio index {i} out of range for n={p.n}")
    return denominators(p, x)[i]


def optimal_y(p: RatioProblem, x) -> np.ndarray:
    """Y_i = S_i^{-1} A_i X_i, shape (n, ℓ, m)."""
    x = as_iterate(p, x)
    ax = _numerators(p, x)
    s = denominators(p, x)
    return np.stack([hermitian_solve(s[i], ax[i]) for i in range(p.n)])


def ratio_values(p: RatioProblem, x) -> np.ndarray:
    """All n ratio values tr(M_i(X))."""
    x = as_iterate(p, x)
    ax = _numerators(p, x)
    y = optimal_y(p, x)
    return np.real(np.einsum("ilm,ilm->i", ax.conj(), y))


def ratio_value(p: RatioProblem, x, i: int) -> float:
    """Value of ratio i."""
    if not 0 <= i < p.n:
        raise IndexError(f"Ratio index {i} out of range for n={p.n}")
    return float(ratio_values(p, x)[i])


def objective(p: RatioProblem, x) -> float:
    """Σ_i ω_i tr(M_i(X))."""
    return float(np.dot(p.weights, ratio_values(p, x)))


def f_q(p: RatioProblem, x, y) -> float:
    """Quadratic-transform surrogate; equals objective(p, x) at y = optimal_y(p, x)."""
    x = as_iterate(p, x)
    y = np.asarray(y, dtype=complex)
    ax = _numerators(p, x)
    s = denominators(p, x)
    linear = 2.0 * np.real(np.einsum("ilm,ilm->i", ax.conj(), y))
    quadratic = np.real(np.einsum("ilm,ilp,ipm->i", y.conj(), s, y))
    return float(np.dot(p.weights, linear - quadratic))


def dmats(p: RatioProblem, y) -> np.ndarray:
    """D_b = Σ_i ω_i B_ib^H Y_i Y_i^H B_ib for every block, shape (K, d, d)."""
    y = np.asarray(y, dtype=complex)
    bhy = np.einsum("ikld,ilm->ikdm", p.B.conj(), y)
    d = np.einsum("i,ikdm,ikem->kde", p.weights, bhy, bhy.conj())
    if p.numerator_in_denominator:
        ahy = np.einsum("ild,ilm->idm", p.A.conj(), y)
        own = np.einsum("i,idm,iem->ide", p.weights, ahy, ahy.conj())
        np.add.at(d, p.owners, own)
    return d


def dmat(p: RatioProblem, y, b: int) -> np.ndarray:
    """D matrix of block b."""
    return dmats(p, y)[b]


def linear_terms(p: RatioProblem, y) -> np.ndarray:
    """C_b = Σ_{i owned by b} ω_i A_i^H Y_i, shape (K, d, m)."""
    y = np.asarray(y, dtype=complex)
    weighted = p.weights[:, None, None] * np.einsum("ild,ilm->idm", p.A.conj(), y)
    c = np.zeros(p.iterate_shape, dtype=complex)
    np.add.at(c, p.owners, weighted)
    return c


def gradient(p: RatioProblem, x) -> np.ndarray:
    """
    Gradient of the objective in conjugate coordinates.

    Uses the ∂/∂Re + j·∂/∂Im convention, so each block is
    2(C_b − D_b X_b) with y = optimal_y(p, x).

    Args:
        p: Problem
        x: Iterate

    Returns:
        np.ndarray: Gradient of shape (K, d, m)
    """
    x = as_iterate(p, x)
    y = optimal_y(p, x)
    return 2.0 * (linear_terms(p, y) - np.einsum("kde,kem->kdm", dmats(p, y), x))


def f_t(p: RatioProblem, x, y, z, lam) -> float:
    """
    Nonhomogeneous surrogate.

    Args:
        p: Problem
        x: Iterate
        y: Auxiliary Y (n, ℓ, m)
        z: Auxiliary Z, same shape as x
        lam: One λ_b ≥ λ_max(D_b) per block (scalar broadcasts)

    Returns:
        float: Lower bound on f_q(p, x, y), tight at z = x
    """
    x = as_iterate(p, x)
    z = as_iterate(p, z)
    y = np.asarray(y, dtype=complex)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (p.num_blocks,))
    d = dmats(p, y)
    c = linear_terms(p, y)
    dz = np.einsum("kde,kem->kdm", d, z)
    lz = lam[:, None, None] * z
    cross = 2.0 * np.real(np.vdot(x, c) + np.vdot(x, lz - dz))
    z_term = np.real(np.vdot(z, dz - lz))
    x_term = float(np.dot(lam, np.real(np.einsum("kdm,kdm->k", x.conj(), x))))
    reg_term = float(np.dot(p.weights * p.reg, np.real(np.einsum("ilm,ilm->i", y.conj(), y))))
    return float(cross + z_term - x_term - reg_term)


def nonhomogeneous_bound(low: np.ndarray, high: np.ndarray, x: np.ndarray, z: np.ndarray) -> float:
    """
    Right-hand side of x^H L x ≤ x^H K x + 2Re{x^H (L − K) z} + z^H (K − L) z for L ⪯ K.

    Args:
        low: Hermitian L
        high: Hermitian K with L ⪯ K
        x: Evaluation point
        z: Expansion point

    Returns:
        float: Bound value, equal to x^H L x at z = x
    """
    diff = low - high
    return float(np.real(np.vdot(x, high @ x) + 2.0 * np.vdot(x, diff @ z) - np.vdot(z, diff @ z)))


def random_ratio_problem(rng: np.random.Generator, n: int = 5, d: int = 9, ell: int = 4,
                         m: Optional[int] = None, radius2: Optional[float] = 10.0,
                         regularizer: float = 1.0, weights=None) -> RatioProblem:
    """
    Draw a synthetic instance with i.i.d. CN(0, 1) coefficients.

    Args:
        rng: Random generator
        n: Number of ratios (and blocks)
        d: Rows of each variable block
        ell: Numerator dimension
        m: Columns of each variable block (defaults to ell)
        radius2: Trace budget tr(X X^H) per block; None leaves blocks unconstrained
        regularizer: Multiple of I added to every denominator
        weights: Ratio weights (defaults to all ones)

    Returns:
        RatioProblem: The instance
    """
    m = ell if m is None else m
    A = complex_normal(rng, (n, ell, d))
    B = complex_normal(rng, (n, n, ell, d))
    spec = ConstraintSpec.unconstrained() if radius2 is None else ConstraintSpec.ball(radius2)
    return RatioProblem(A=A, B=B, weights=np.ones(n) if weights is None else weights,
                        denom_regularizer=regularizer, constraints=[spec] * n, m=m)


def random_feasible_point(p: RatioProblem, rng: np.random.Generator) -> np.ndarray:
    """Projected i.i.d. CN(0, 1) starting point."""
    return project_iterate(p.constraints, complex_normal(rng, p.iterate_shape))


def problem_to_dict(p: RatioProblem) -> dict:
    """Serialize a problem to a JSON-compatible document."""
    return {
        "version": PROBLEM_FORMAT_VERSION,
        "n": p.n,
        "d": p.d,
        "m": p.m,
        "ell": p.ell,
        "num_blocks": p.num_blocks,
        "weights": p.weights.tolist(),
        "denom_regularizer": p.reg.tolist(),
        "owners": p.owners.tolist(),
        "numerator_in_denominator": p.numerator_in_denominator,
        "constraints": [spec.to_dict() for spec in p.constraints],
        "A": complex_to_pairs(p.A),
        "B": complex_to_pairs(p.B),
    }


def problem_from_dict(document: dict) -> RatioProblem:
    """Inverse of problem_to_dict."""
    version = document.get("version", PROBLEM_FORMAT_VERSION)
    if version != PROBLEM_FORMAT_VERSION:
        raise ValueError(f"Unsupported problem format version: {version}")
    n, ell, d = document["n"], document["ell"], document["d"]
    A = pairs_to_complex(document["A"]).reshape(n, ell, d)
    B = pairs_to_complex(document["B"]).reshape(n, document["num_blocks"], ell, d)
    return RatioProblem(
        A=A,
        B=B,
        weights=np.asarray(document["weights"], dtype=float),
        denom_regularizer=np.asarray(document["denom_regularizer"], dtype=float),
        constraints=[ConstraintSpec.from_dict(c) for c in document["constraints"]],
        m=document["m"],
        owners=np.asarray(document["owners"], dtype=int),
        numerator_in_denominator=bool(document["numerator_in_denominator"]),
    )


def save_problem(p: RatioProblem, path) -> Path:
    """Write a problem as JSON."""
    path = Path(path)
    path.write_text(json.dumps(problem_to_dict(p)), encoding="utf-8")
    return path


def load_problem(path) -> RatioProblem:
    """Read a problem written by save_problem."""
    return problem_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
