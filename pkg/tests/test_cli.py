"""
Unit tests for the command-line entry point and its helpers
"""
import json
import unittest
import tempfile
import shutil
from pathlib import Path
import sys
import os

import numpy as np

# Add parent directory to path to import our modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import app
from fracopt.solvers import ConvergenceTrace, TraceRecord, save_trace_csv
from utils.cli_helpers import (
    get_output_directory,
    load_config_file,
    merge_settings,
    parse_scale,
    parse_solver_list,
)


class TestCliHelpers(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up test fixtures"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_parse_solver_list(self):
        self.assertEqual(parse_solver_list("alg1, alg2 ,polyak"), ["alg1", "alg2", "polyak"])
        self.assertIsNone(parse_solver_list(None))
        with self.assertRaises(ValueError):
            parse_solver_list(" , ")

    def test_parse_scale(self):
        self.assertEqual(parse_scale("d=64,n=3"), {"d": 64, "n": 3})
        self.assertEqual(parse_scale("bs1=[1.5, 2],alpha=0.5"), {"bs1": [1.5, 2], "alpha": 0.5})
        self.assertEqual(parse_scale("name=plain"), {"name": "plain"})
        self.assertEqual(parse_scale(None), {})
        with self.assertRaises(ValueError):
            parse_scale("d64")

    def test_merge_settings(self):
        merged = merge_settings({"seed": 1, "scale": {"d": 9, "n": 5}},
                                {"seed": None, "jobs": 4, "scale": {"d": 64}})
        self.assertEqual(merged, {"seed": 1, "jobs": 4, "scale": {"d": 64, "n": 5}})

    def test_load_config_file(self):
        path = self.temp_dir / "config.json"
        path.write_text(json.dumps({"instances": 2}))
        self.assertEqual(load_config_file(path), {"instances": 2})
        self.assertEqual(load_config_file(None), {})
        with self.assertRaises(ValueError):
            load_config_file(self.temp_dir / "missing.json")
        path.write_text("[1, 2]")
        with self.assertRaises(ValueError):
            load_config_file(path)

    def test_output_directory(self):
        self.assertEqual(get_output_directory(self.temp_dir, "out", self.temp_dir / "x"),
                         (self.temp_dir / "out").resolve())
        self.assertEqual(get_output_directory(self.temp_dir, None, self.temp_dir / "x"), self.temp_dir / "x")


class TestMain(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.temp_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        """Clean up test fixtures"""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def write_trace(self, name, length, power=1):
        k = np.arange(1, length + 1)
        trace = ConvergenceTrace(name, records=[TraceRecord(int(i), 0.01 * i, 2.0 - 1.0 / i ** power) for i in k])
        return str(save_trace_csv(trace, self.temp_dir / f"{name}.csv"))

    def test_synthetic_command(self):
        code = app.main(["-q", "synthetic", "--instances", "1", "--solvers", "alg1", "--iters", "1",
                         "--scale", "n=2,d=3,ell=2,m=2", "--out", str(self.temp_dir)])
        self.assertEqual(code, app.EXIT_OK)
        runs = list(self.temp_dir.glob("run_*_conventional.csv"))
        self.assertEqual(len(runs), 1)
        self.assertEqual(len(runs[0].read_text().splitlines()), 2)

    def test_config_file_and_flags(self):
        config = self.temp_dir / "config.json"
        config.write_text(json.dumps({"instances": 1, "solvers": ["alg2"], "max_iters": 2,
                                      "scale": {"n": 2, "d": 3, "ell": 2, "m": 2}}))
        out = self.temp_dir / "out"
        code = app.main(["-q", "synthetic", "--config", str(config), "--iters", "3", "--out", str(out)])
        self.assertEqual(code, app.EXIT_OK)
        meta = json.loads((out / "meta.json").read_text())
        self.assertEqual(meta["config"]["options"]["max_iters"], 3)
        self.assertEqual(meta["config"]["solvers"], ["nonhomogeneous"])

    def test_unknown_solver_is_usage_error(self):
        code = app.main(["-q", "synthetic", "--solvers", "newton", "--out", str(self.temp_dir)])
        self.assertEqual(code, app.EXIT_USAGE)

    def test_bad_scale_is_usage_error(self):
        code = app.main(["-q", "isac", "--scale", "antennas=4", "--out", str(self.temp_dir)])
        self.assertEqual(code, app.EXIT_USAGE)

    def test_invalid_scenario_is_usage_error(self):
        code = app.main(["-q", "mimo", "--instances", "1", "--scale", "Q=4,M=2", "--out", str(self.temp_dir)])
        self.assertEqual(code, app.EXIT_USAGE)

    def test_unknown_subcommand(self):
        with self.assertRaises(SystemExit) as ctx:
            app.main(["uplink"])
        self.assertEqual(ctx.exception.code, 2)

    def test_rates_command(self):
        paths = [self.write_trace("alg2", 50, 1), self.write_trace("alg3", 50, 2)]
        code = app.main(["-q", "rates", *paths, "--f-star", "2.0", "--out", str(self.temp_dir)])
        self.assertEqual(code, app.EXIT_OK)
        fits = json.loads((self.temp_dir / "rates.json").read_text())
        self.assertAlmostEqual(fits[0]["slope"], -1.0, places=6)
        self.assertAlmostEqual(fits[1]["slope"], -2.0, places=6)

    def test_rates_short_trace_fails(self):
        code = app.main(["-q", "rates", self.write_trace("short", 5)])
        self.assertEqual(code, app.EXIT_FAILURE)

    def test_rates_missing_file(self):
        code = app.main(["-q", "rates", str(self.temp_dir / "missing.csv")])
        self.assertEqual(code, app.EXIT_USAGE)

    def test_verify_single_suite(self):
        self.assertEqual(app.main(["-q", "verify", "rates"]), app.EXIT_OK)

    def test_verify_unknown_suite(self):
        self.assertEqual(app.main(["-q", "verify", "nope"]), app.EXIT_USAGE)


if __name__ == '__main__':
    unittest.main()
