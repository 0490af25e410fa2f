"""
Benchmark sweeps for the synthetic, ISAC and massive-MIMO experiments
Each sweep builds its instances sequentially from derived seeds, runs every
(instance, solver) pair on a thread pool, writes one trace CSV per run and
finishes with a single-threaded aggregation pass.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .isac import ISAC_DEFAULTS, compile_isac, generate_isac_scenario, solve_isac
from .log_fp import LOG_SOLVER_ALIASES, LOG_SOLVER_IDS
from .mimo import MIMO_DEFAULTS, compile_mimo, generate_mimo_network, solve_mimo
from .model import random_feasible_point, random_ratio_problem
from .scenarios import save_scenario, scenario_hash
from .solvers import (
    SOLVER_ALIASES,
    SOLVER_IDS,
    TRACE_FLOAT_FORMAT,
    ConvergenceTrace,
    SolverOptions,
    canonical_solver_id,
    run,
    save_trace_csv,
)
from .utils import FracoptError, SolverFailure, derive_seed

logger = logging.getLogger(__name__)

SYNTHETIC_DEFAULTS = {
    "n": 5,
    "d": 9,
    "ell": 4,
    "m": 4,
    "radius2": 10.0,
    "regularizer": 1.0,
}

# Default sweep settings per experiment; --scale and --config override them
EXPERIMENT_PRESETS = {
    "synthetic": {
        "solvers": ["conventional", "nonhomogeneous", "extrapolated", "gradient", "polyak"],
        "instances": 100,
        "seed": 0,
        "max_iters": 500,
        "rel_obj_tol": 1e-10,
        "scale": dict(SYNTHETIC_DEFAULTS),
    },
    "isac": {
        "solvers": ["conventional", "nonhomogeneous", "extrapolated"],
        "instances": 1,
        "seed": 0,
        "max_iters": 200,
        "rel_obj_tol": 1e-10,
        "stationarity_tol": None,
        "scale": {},
    },
    "mimo": {
        "solvers": ["wmmse_classic", "generalized_nonhomogeneous", "generalized_extrapolated"],
        "instances": 1,
        "seed": 0,
        "max_iters": 100,
        "rel_obj_tol": 1e-10,
        "stationarity_tol": None,
        "scale": {},
    },
}

SCALE_KEYS = {
    "synthetic": set(SYNTHETIC_DEFAULTS),
    "isac": set(ISAC_DEFAULTS),
    "mimo": set(MIMO_DEFAULTS),
}

OPTION_KEYS = ("max_iters", "rel_obj_tol", "lambda_mode", "record_wall_time", "extrapolation_scale",
               "bisection_tol", "stationarity_tol")
DEFAULT_TIME_POINTS = 100


def solver_ids_for(experiment: str) -> Tuple[tuple, dict]:
    """Known ids and aliases of the solvers an experiment accepts."""
    if experiment == "mimo":
        return LOG_SOLVER_IDS, LOG_SOLVER_ALIASES
    return SOLVER_IDS, SOLVER_ALIASES


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved sweep configuration."""
    experiment: str
    solvers: Tuple[str, ...]
    instances: int
    seed: int
    options: SolverOptions
    scale: dict = field(default_factory=dict)
    out_dir: Path = Path("output")
    jobs: int = 1
    time_points: int = DEFAULT_TIME_POINTS
    with_t: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_PRESETS:
            raise ValueError(f"Unknown experiment: {self.experiment}")
        if int(self.instances) < 1:
            raise ValueError(f"instances must be at least 1, got {self.instances}")
        if int(self.jobs) < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")
        if int(self.time_points) < 2:
            raise ValueError(f"time_points must be at least 2, got {self.time_points}")
        if not self.solvers:
            raise ValueError("At least one solver is required")
        known, aliases = solver_ids_for(self.experiment)
        solvers = tuple(dict.fromkeys(canonical_solver_id(s, known, aliases) for s in self.solvers))
        unknown = set(self.scale) - SCALE_KEYS[self.experiment]
        if unknown:
            raise ValueError(f"Unknown scale keys for {self.experiment}: {', '.join(sorted(unknown))}")
        object.__setattr__(self, "solvers", solvers)
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "solvers": list(self.solvers),
            "instances": self.instances,
            "seed": self.seed,
            "options": self.options.to_dict(),
            "scale": dict(self.scale),
            "jobs": self.jobs,
            "time_points": self.time_points,
            "with_t": self.with_t,
        }


def build_run_config(experiment: str, document: Optional[dict] = None, out_dir: Optional[Path] = None) -> RunConfig:
    """
    Resolve preset → document into a RunConfig.

    Args:
        experiment: synthetic, isac or mimo
        document: Flat settings (solvers, instances, seed, jobs, option keys)
            plus a nested 'scale' dict; later sources already merged in
        out_dir: Output directory

    Returns:
        RunConfig: Validated configuration
    """
    if experiment not in EXPERIMENT_PRESETS:
        raise ValueError(f"Unknown experiment: {experiment}")
    preset = EXPERIMENT_PRESETS[experiment]
    document = document or {}
    merged = {**preset, **{k: v for k, v in document.items() if k != "scale"}}
    scale = {**preset["scale"], **document.get("scale", {})}

    seed = int(merged.get("seed", 0))
    options = SolverOptions(seed=seed, **{k: merged[k] for k in OPTION_KEYS if k in merged})
    return RunConfig(
        experiment=experiment,
        solvers=tuple(merged["solvers"]),
        instances=int(merged["instances"]),
        seed=seed,
        options=options,
        scale=scale,
        out_dir=Path(out_dir) if out_dir is not None else Path("output") / experiment,
        jobs=int(merged.get("jobs", 1)),
        time_points=int(merged.get("time_points", DEFAULT_TIME_POINTS)),
        with_t=bool(merged.get("with_t", False)),
    )


@dataclass
class Instance:
    """One generated problem shared by every solver of a sweep."""
    seed: int
    x0: np.ndarray
    solve: Callable[[str, SolverOptions, np.ndarray], ConvergenceTrace]
    scenario_hash: Optional[str] = None


def _synthetic_instance(config: RunConfig, seed: int) -> Instance:
    rng = np.random.default_rng(seed)
    p = random_ratio_problem(rng, **config.scale)
    x0 = random_feasible_point(p, rng)
    return Instance(seed, x0, lambda solver, opts, start: run(p, start, solver, opts))


def _isac_instance(config: RunConfig, seed: int) -> Instance:
    scenario = generate_isac_scenario(config.scale, seed)
    save_scenario(scenario, config.out_dir / f"scenario_{seed}.json")
    x0 = random_feasible_point(compile_isac(scenario), np.random.default_rng(seed))
    return Instance(seed, x0, lambda solver, opts, start: solve_isac(scenario, solver, opts, start),
                    scenario_hash(scenario))


def _mimo_instance(config: RunConfig, seed: int) -> Instance:
    net = generate_mimo_network(config.scale, seed)
    save_scenario(net, config.out_dir / f"scenario_{seed}.json")
    x0 = random_feasible_point(compile_mimo(net).base, np.random.default_rng(seed))
    return Instance(seed, x0, lambda solver, opts, start: solve_mimo(net, solver, opts, start),
                    scenario_hash(net))


INSTANCE_BUILDERS = {
    "synthetic": _synthetic_instance,
    "isac": _isac_instance,
    "mimo": _mimo_instance,
}


def run_file_name(seed: int, solver: str) -> str:
    return f"run_{seed}_{solver}.csv"


def _run_one(config: RunConfig, instance: Instance, solver: str) -> Tuple[int, str, ConvergenceTrace]:
    opts = replace(config.options, seed=instance.seed)
    try:
        trace = instance.solve(solver, opts, instance.x0)
    except FracoptError as exc:
        raise SolverFailure(f"{solver} failed on instance seed {instance.seed}: {exc}") from exc
    save_trace_csv(trace, config.out_dir / run_file_name(instance.seed, solver), with_t=config.with_t)
    logger.info(f"Run seed={instance.seed} solver={solver}: {len(trace.records)} iterations, "
                f"f={trace.final_objective:.10g}")
    return instance.seed, solver, trace


def aggregate_iterations(traces: Dict[str, List[ConvergenceTrace]]) -> pd.DataFrame:
    """
    Mean objective per iteration for every solver.

    Runs that stopped early keep contributing their last objective.
    """
    length = max(len(t.records) for runs in traces.values() for t in runs)
    index = pd.Index(np.arange(1, length + 1), name="iter")
    columns = {}
    for solver, runs in traces.items():
        per_run = pd.concat([pd.Series(t.objectives, index=t.iterations) for t in runs], axis=1)
        columns[solver] = per_run.reindex(index).ffill().mean(axis=1)
    return pd.DataFrame(columns, index=index).reset_index()


def aggregate_time(traces: Dict[str, List[ConvergenceTrace]], points: int = DEFAULT_TIME_POINTS) -> pd.DataFrame:
    """
    Mean objective on a common time grid; each trace is linearly interpolated
    from (0, initial objective) and held at its last value afterwards.
    """
    horizon = max(float(t.elapsed[-1]) for runs in traces.values() for t in runs)
    grid = np.linspace(0.0, horizon, points)
    columns = {"time_s": grid}
    for solver, runs in traces.items():
        curves = []
        for t in runs:
            times = np.concatenate([[0.0], t.elapsed])
            values = np.concatenate([[t.initial_objective], t.objectives])
            curves.append(np.interp(grid, times, values))
        columns[solver] = np.mean(curves, axis=0)
    return pd.DataFrame(columns)


def run_sweep(config: RunConfig) -> dict:
    """
    Build instances, run every solver on each, write traces, aggregates and meta.json.

    Args:
        config: Resolved configuration

    Returns:
        dict: Summary with per-run results and the files written

    Raises:
        SolverFailure: if any run fails
    """
    config.out_dir.mkdir(parents=True, exist_ok=True)
    builder = INSTANCE_BUILDERS[config.experiment]
    instances = [builder(config, derive_seed(config.seed, i)) for i in range(config.instances)]
    logger.info(f"{config.experiment}: {len(instances)} instance(s) x {len(config.solvers)} solver(s), "
                f"jobs={config.jobs}")

    finished = {}
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        futures = [pool.submit(_run_one, config, instance, solver)
                   for instance in instances for solver in config.solvers]
        for future in as_completed(futures):
            seed, solver, trace = future.result()
            finished[(seed, solver)] = trace

    traces = {solver: [finished[(inst.seed, solver)] for inst in instances] for solver in config.solvers}
    files = [run_file_name(inst.seed, solver) for inst in instances for solver in config.solvers]

    aggregate_iterations(traces).to_csv(config.out_dir / "aggregate_iterations.csv", index=False,
                                        float_format=TRACE_FLOAT_FORMAT, lineterminator="\n")
    aggregate_time(traces, config.time_points).to_csv(config.out_dir / "aggregate_time.csv", index=False,
                                                      float_format=TRACE_FLOAT_FORMAT, lineterminator="\n")
    files += ["aggregate_iterations.csv", "aggregate_time.csv"]

    runs = []
    for inst in instances:
        for solver in config.solvers:
            trace = finished[(inst.seed, solver)]
            runs.append({
                "seed": inst.seed,
                "solver": solver,
                "file": run_file_name(inst.seed, solver),
                "iterations": len(trace.records),
                "initial_objective": trace.initial_objective,
                "final_objective": trace.final_objective,
                "termination": trace.termination,
                "mean_iteration_time_s": float(trace.elapsed[-1] / len(trace.records)),
            })

    meta = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "scenario_hashes": {str(inst.seed): inst.scenario_hash for inst in instances if inst.scenario_hash},
        "runs": runs,
    }
    (config.out_dir / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    files.append("meta.json")
    if config.experiment != "synthetic":
        files += [f"scenario_{inst.seed}.json" for inst in instances]

    return {"experiment": config.experiment, "out_dir": str(config.out_dir), "runs": runs, "files": files}


def cmd_synthetic(config: RunConfig) -> dict:
    """Random matrix-ratio instances, every requested solver from a shared start."""
    return run_sweep(_expect(config, "synthetic"))


def cmd_isac(config: RunConfig) -> dict:
    """Two-BS ISAC scenarios."""
    return run_sweep(_expect(config, "isac"))


def cmd_mimo(config: RunConfig) -> dict:
    """Wrapped-around multi-cell MIMO networks."""
    return run_sweep(_expect(config, "mimo"))


def _expect(config: RunConfig, experiment: str) -> RunConfig:
    if config.experiment != experiment:
        raise ValueError(f"Expected a {experiment} configuration, got {config.experiment}")
    return config


EXPERIMENT_COMMANDS = {
    "synthetic": cmd_synthetic,
    "isac": cmd_isac,
    "mimo": cmd_mimo,
}
