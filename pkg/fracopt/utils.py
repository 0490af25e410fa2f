"""
Shared utilities for the fractional-programming modules
"""
import hashlib
import json

import numpy as np

# Constants
DEFAULT_BISECTION_TOL = 1e-10
MAX_BRACKET_DOUBLINGS = 200
MAX_HALVINGS = 60
POWER_ITERATION_TOL = 1e-8
POWER_ITERATION_MAX_ITERS = 10000
HERMITIAN_RTOL = 1e-12
JITTER_SCALE = 1e-12
LAMBDA_FLOOR = 1e-12
FEASIBILITY_TOL = 1e-9
DEFAULT_REL_OBJ_TOL = 1e-8
STATIONARITY_STEP = 1e-4
STATIONARITY_TOL = 1e-4
MILLIWATTS_PER_WATT = 1000.0


class FracoptError(Exception):
    """Base class for numerical failures raised by the library."""


class NotPositiveDefinite(FracoptError):
    """A matrix expected to be Hermitian positive definite failed to factor."""


class NonConvergent(FracoptError):
    """An inner iterative routine exceeded its iteration cap."""


class BisectionFailed(FracoptError):
    """The Lagrange multiplier bracket could not be established."""


class DegenerateTrace(FracoptError):
    """A convergence trace carries no usable optimality gap."""


class SolverFailure(FracoptError):
    """A benchmark run failed; wraps the underlying error."""


class InvalidParams(FracoptError, ValueError):
    """Scenario or network parameters are out of range."""


def dbm_to_watts(power_dbm: float) -> float:
    """
    Convert a power level in dBm to linear watts.

    Args:
        power_dbm: Power in dBm

    Returns:
        float: Power in watts, 10^((P_dBm - 30) / 10)
    """
    return 10.0 ** ((power_dbm - 30.0) / 10.0)


def watts_to_dbm(power_watts: float) -> float:
    """
    Convert a linear power in watts to dBm.

    Args:
        power_watts: Power in watts (must be positive)

    Returns:
        float: Power in dBm
    """
    if power_watts <= 0:
        raise ValueError(f"Power must be positive, got {power_watts}")
    return 10.0 * np.log10(power_watts * MILLIWATTS_PER_WATT)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """
    Draw i.i.d. circularly-symmetric CN(0, 1) entries.

    Args:
        rng: Numpy random generator
        shape: Output shape

    Returns:
        np.ndarray: complex128 array with unit-variance entries
    """
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def derive_seed(seed: int, index: int) -> int:
    """
    Split a parent seed into the child seed of run `index`.

    The rule is fixed so a Monte-Carlo batch reproduces regardless of how
    runs are scheduled across workers.
    """
    state = np.random.SeedSequence([int(seed) % 2**64, int(index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def complex_to_pairs(array: np.ndarray) -> list:
    """Encode a complex array as nested lists of [re, im] pairs."""
    array = np.asarray(array, dtype=complex)
    return np.stack([array.real, array.imag], axis=-1).tolist()


def pairs_to_complex(pairs) -> np.ndarray:
    """Decode nested [re, im] pairs back into a complex128 array."""
    raw = np.asarray(pairs, dtype=float)
    if raw.shape[-1] != 2:
        raise ValueError("Complex entries must be encoded as [re, im] pairs")
    return raw[..., 0] + 1j * raw[..., 1]


def stable_hash(document: dict) -> str:
    """
    Hash a JSON-serializable document independently of key order.

    Args:
        document: Parameters to hash

    Returns:
        str: Hex sha256 digest of the canonical JSON text
    """
    text = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
