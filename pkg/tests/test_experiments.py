"""
Unit tests for the benchmark sweeps
"""
import json
import unittest
import tempfile
import shutil
from pathlib import Path
import sys
import os

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose

# Add parent directory to path to import our modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from fracopt.experiments import (
    EXPERIMENT_PRESETS,
    Instance,
    _run_one,
    aggregate_iterations,
    aggregate_time,
    build_run_config,
    cmd_isac,
    cmd_mimo,
    cmd_synthetic,
    run_file_name,
)
from fracopt.scenarios import load_scenario, scenario_hash
from fracopt.solvers import ConvergenceTrace, TraceRecord
from fracopt.utils import NotPositiveDefinite, SolverFailure, derive_seed

TINY_SYNTHETIC = {"n": 2, "d": 3, "ell": 2, "m": 2}


def make_trace(objectives, step=0.1, initial=0.0):
    records = [TraceRecord(k + 1, step * (k + 1), f) for k, f in enumerate(objectives)]
    return ConvergenceTrace("test", records=records, initial_objective=initial)


class TestRunConfig(unittest.TestCase):

    def test_synthetic_preset(self):
        config = build_run_config("synthetic")
        self.assertEqual(config.instances, 100)
        self.assertEqual(config.options.max_iters, 500)
        self.assertEqual(config.scale["d"], 9)
        self.assertEqual(config.solvers, tuple(EXPERIMENT_PRESETS["synthetic"]["solvers"]))

    def test_aliases_are_resolved(self):
        config = build_run_config("synthetic", {"solvers": ["alg1", "alg3", "conventional"]})
        self.assertEqual(config.solvers, ("conventional", "extrapolated"))

    def test_mimo_uses_log_solver_ids(self):
        config = build_run_config("mimo", {"solvers": ["wmmse", "nonhomogeneous"]})
        self.assertEqual(config.solvers, ("wmmse_classic", "generalized_nonhomogeneous"))

    def test_invalid_documents(self):
        cases = [
            ("synthetic", {"solvers": ["newton"]}),
            ("synthetic", {"instances": 0}),
            ("synthetic", {"jobs": 0}),
            ("synthetic", {"scale": {"antennas": 3}}),
            ("isac", {"scale": {"n": 3}}),
            ("synthetic", {"max_iters": 0}),
        ]
        for experiment, document in cases:
            with self.subTest(document=document):
                with self.assertRaises(ValueError):
                    build_run_config(experiment, document)
        with self.assertRaises(ValueError):
            build_run_config("uplink")

    def test_scale_overrides_merge_with_preset(self):
        config = build_run_config("synthetic", {"scale": {"d": 64}})
        self.assertEqual(config.scale["d"], 64)
        self.assertEqual(config.scale["n"], 5)

    def test_options_carry_seed(self):
        config = build_run_config("isac", {"seed": 9, "max_iters": 7, "rel_obj_tol": 1e-6})
        self.assertEqual(config.options.seed, 9)
        self.assertEqual(config.options.max_iters, 7)
        self.assertEqual(config.to_dict()["options"]["rel_obj_tol"], 1e-6)


class TestAggregation(unittest.TestCase):

    def test_iterations_forward_fill(self):
        traces = {"a": [make_trace([1.0, 2.0, 3.0]), make_trace([5.0])]}
        frame = aggregate_iterations(traces)
        self.assertEqual(list(frame.columns), ["iter", "a"])
        assert_allclose(frame["a"], [3.0, 3.5, 4.0])

    def test_time_interpolation(self):
        traces = {"a": [make_trace([2.0, 4.0], step=1.0, initial=0.0)],
                  "b": [make_trace([1.0], step=0.5, initial=1.0)]}
        frame = aggregate_time(traces, points=5)
        assert_allclose(frame["time_s"], [0.0, 0.5, 1.0, 1.5, 2.0])
        assert_allclose(frame["a"], [0.0, 1.0, 2.0, 3.0, 4.0])
        assert_allclose(frame["b"], [1.0, 1.0, 1.0, 1.0, 1.0])


class TestSweeps(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up test fixtures"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_single_run_single_row(self):
        config = build_run_config("synthetic", {"instances": 1, "solvers": ["alg1"], "max_iters": 1,
                                                "scale": TINY_SYNTHETIC}, self.temp_dir)
        summary = cmd_synthetic(config)

        runs = sorted(self.temp_dir.glob("run_*.csv"))
        self.assertEqual(len(runs), 1)
        self.assertEqual(runs[0].name, run_file_name(derive_seed(0, 0), "conventional"))
        self.assertEqual(len(runs[0].read_text().splitlines()), 2)
        self.assertEqual(summary["runs"][0]["iterations"], 1)
        self.assertTrue((self.temp_dir / "meta.json").exists())

    def test_same_seed_same_aggregate(self):
        document = {"instances": 2, "solvers": ["alg1", "alg2"], "max_iters": 5, "jobs": 2,
                    "rel_obj_tol": 1e-300, "scale": TINY_SYNTHETIC, "seed": 31}
        first = self.temp_dir / "first"
        second = self.temp_dir / "second"
        cmd_synthetic(build_run_config("synthetic", document, first))
        cmd_synthetic(build_run_config("synthetic", document, second))
        self.assertEqual((first / "aggregate_iterations.csv").read_bytes(),
                         (second / "aggregate_iterations.csv").read_bytes())

    def test_aggregate_equals_mean_of_runs(self):
        document = {"instances": 3, "solvers": ["alg2"], "max_iters": 6, "rel_obj_tol": 1e-300,
                    "scale": TINY_SYNTHETIC, "seed": 5}
        cmd_synthetic(build_run_config("synthetic", document, self.temp_dir))

        aggregate = pd.read_csv(self.temp_dir / "aggregate_iterations.csv")
        runs = [pd.read_csv(path)["objective"].to_numpy() for path in sorted(self.temp_dir.glob("run_*.csv"))]
        self.assertEqual(len(runs), 3)
        assert_allclose(aggregate["nonhomogeneous"].to_numpy(), np.mean(runs, axis=0), rtol=1e-12)

    def test_conventional_average_stays_ahead(self):
        document = {"instances": 10, "solvers": ["alg1", "alg2"], "max_iters": 50, "seed": 2}
        cmd_synthetic(build_run_config("synthetic", document, self.temp_dir))

        aggregate = pd.read_csv(self.temp_dir / "aggregate_iterations.csv")
        conventional = aggregate["conventional"].to_numpy()
        nonhomogeneous = aggregate["nonhomogeneous"].to_numpy()
        scale = max(1.0, np.abs(conventional).max())
        self.assertTrue(np.all(conventional >= nonhomogeneous - 1e-9 * scale))

    def test_meta_document(self):
        document = {"instances": 1, "solvers": ["conventional", "polyak"], "max_iters": 2,
                    "scale": TINY_SYNTHETIC}
        cmd_synthetic(build_run_config("synthetic", document, self.temp_dir))
        meta = json.loads((self.temp_dir / "meta.json").read_text())
        self.assertEqual(meta["experiment"], "synthetic")
        self.assertEqual([r["solver"] for r in meta["runs"]], ["conventional", "polyak"])
        self.assertEqual(meta["config"]["scale"]["d"], 3)
        self.assertEqual(meta["scenario_hashes"], {})

    def test_isac_sweep_writes_scenario(self):
        document = {"instances": 1, "solvers": ["alg1", "alg2"], "max_iters": 3,
                    "scale": {"M": 4, "N": 1, "N_r": 4}}
        summary = cmd_isac(build_run_config("isac", document, self.temp_dir))

        seed = derive_seed(0, 0)
        scenario = load_scenario(self.temp_dir / f"scenario_{seed}.json")
        self.assertEqual(scenario.M, 4)
        meta = json.loads((self.temp_dir / "meta.json").read_text())
        self.assertEqual(meta["scenario_hashes"][str(seed)], scenario_hash(scenario))
        self.assertIn(f"scenario_{seed}.json", summary["files"])
        self.assertIn("aggregate_time.csv", summary["files"])

    def test_mimo_sweep_with_t_columns(self):
        document = {"instances": 1, "solvers": ["wmmse", "nonhomogeneous"], "max_iters": 3, "with_t": True,
                    "scale": {"L": 2, "Q": 1, "M": 2, "N": 1}}
        cmd_mimo(build_run_config("mimo", document, self.temp_dir))
        path = self.temp_dir / run_file_name(derive_seed(0, 0), "wmmse_classic")
        header = path.read_text().splitlines()[0]
        self.assertEqual(header, "iter,elapsed_s,objective,t_1,t_2")

    def test_wrong_experiment_rejected(self):
        config = build_run_config("isac", {"instances": 1}, self.temp_dir)
        with self.assertRaises(ValueError):
            cmd_synthetic(config)

    def test_failed_run_is_wrapped(self):
        def broken(solver, opts, start):
            raise NotPositiveDefinite("factorization failed")

        config = build_run_config("synthetic", {"instances": 1}, self.temp_dir)
        instance = Instance(seed=1, x0=np.zeros((1, 1, 1)), solve=broken)
        with self.assertRaises(SolverFailure):
            _run_one(config, instance, "conventional")


if __name__ == '__main__':
    unittest.main()
