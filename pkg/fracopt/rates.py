"""
Empirical convergence-rate fits
Least-squares slope of log(f* − f_k) against log k; about −1 for O(1/k)
decay and −2 for O(1/k²).
"""
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from .solvers import ConvergenceTrace, load_trace_csv
from .utils import DegenerateTrace

logger = logging.getLogger(__name__)

# Constants
GAP_FLOOR = 1e-12
MIN_TRACE_LENGTH = 20
F_STAR_MODES = ("best",)


@dataclass(frozen=True)
class RateFit:
    """Fitted power law gap ≈ exp(intercept)·k^slope."""
    slope: float
    intercept: float
    r2: float
    window: Tuple[int, int]
    f_star: float
    points: int

    def to_dict(self) -> dict:
        document = asdict(self)
        document["window"] = list(self.window)
        return document


def fit_rate(iterations: Sequence[int], objectives: Sequence[float], f_star: float,
             min_iter: int = 1) -> RateFit:
    """
    Fit log(f_star − f_k) = intercept + slope·log k where the gap exceeds GAP_FLOOR.

    Args:
        iterations: Iteration indices k ≥ 1
        objectives: Objective values f_k
        f_star: Reference optimum
        min_iter: First iteration allowed in the window

    Returns:
        RateFit: Slope, intercept, r² and the window used

    Raises:
        DegenerateTrace: if fewer than two points have a usable gap
    """
    k = np.asarray(iterations, dtype=float)
    gap = float(f_star) - np.asarray(objectives, dtype=float)
    mask = (gap > GAP_FLOOR) & (k >= max(min_iter, 1))
    if np.count_nonzero(mask) < 2:
        raise DegenerateTrace(f"Only {np.count_nonzero(mask)} iterations have a gap above {GAP_FLOOR:g}")

    result = linregress(np.log(k[mask]), np.log(gap[mask]))
    r2 = float(np.clip(result.rvalue ** 2, 0.0, 1.0)) if np.isfinite(result.rvalue) else 1.0
    window = (int(k[mask][0]), int(k[mask][-1]))
    return RateFit(float(result.slope), float(result.intercept), r2, window, float(f_star),
                   int(np.count_nonzero(mask)))


def fit_trace(trace: ConvergenceTrace, f_star: float, min_iter: int = 1) -> RateFit:
    """fit_rate applied to a ConvergenceTrace."""
    return fit_rate(trace.iterations, trace.objectives, f_star, min_iter)


def resolve_f_star(traces: Sequence[ConvergenceTrace], f_star: Union[str, float]) -> float:
    """'best' means the largest objective recorded by any trace."""
    if isinstance(f_star, str):
        if f_star not in F_STAR_MODES:
            return float(f_star)
        return float(max(np.max(t.objectives) for t in traces))
    return float(f_star)


def fit_traces(traces: Sequence[ConvergenceTrace], f_star: Union[str, float] = "best",
               min_iter: int = 1) -> List[RateFit]:
    """
    Fit every trace against a common reference optimum.

    Raises:
        DegenerateTrace: if a trace is shorter than MIN_TRACE_LENGTH
    """
    if not traces:
        raise ValueError("No traces given")
    for trace in traces:
        if len(trace.records) < MIN_TRACE_LENGTH:
            raise DegenerateTrace(f"Trace {trace.solver} has {len(trace.records)} iterations, "
                                  f"need at least {MIN_TRACE_LENGTH}")
    reference = resolve_f_star(traces, f_star)
    return [fit_trace(trace, reference, min_iter) for trace in traces]


def cmd_rates(paths: Sequence[Union[str, Path]], f_star: Union[str, float] = "best", min_iter: int = 1,
              out_dir: Optional[Path] = None) -> List[dict]:
    """
    Fit rates for trace CSV files and optionally write rates.json.

    Args:
        paths: Trace CSV files
        f_star: 'best' or a number
        min_iter: First iteration of the fit window
        out_dir: Directory receiving rates.json

    Returns:
        list: One dict per trace with the file name and its fit
    """
    traces = [load_trace_csv(path) for path in paths]
    fits = fit_traces(traces, f_star, min_iter)
    results = [{"trace": Path(path).name, **fit.to_dict()} for path, fit in zip(paths, fits)]
    for item in results:
        logger.info(f"{item['trace']}: slope={item['slope']:.4f}, r2={item['r2']:.4f}, window={item['window']}")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "rates.json").write_text(json.dumps(results, indent=2), encoding="utf-8")
    return results
