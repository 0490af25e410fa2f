"""
Unit tests for the executable property suites
"""
import inspect

import pytest
import numpy as np
from numpy.testing import assert_allclose

from fracopt.verify import (
    SUITES,
    SuiteResult,
    bisection_grid_oracle,
    cmd_verify,
    finite_difference_gradient,
    suite_bisection,
    suite_compile,
    suite_gp_equivalence,
    suite_gradient,
    suite_nonhomogeneous_bound,
    suite_log_fp,
    suite_monotonicity,
    suite_sandwich,
    suite_wmmse_equivalence,
)


class TestVerify:
    """Test suite for the property suites, run at reduced size"""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(42)

    def test_finite_difference_of_squared_norm(self, rng):
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        grad = finite_difference_gradient(lambda v: float(np.vdot(v, v).real), x)
        assert_allclose(grad, 2.0 * x, atol=1e-8)

    def test_grid_oracle_interior_point(self):
        assert bisection_grid_oracle(np.eye(2), np.array([0.1, 0.1]), 1.0) == 0.0

    def test_suite_result_bookkeeping(self):
        result = SuiteResult("demo")
        result.check(True, "never recorded")
        result.check(False, "recorded")
        assert result.checks == 2
        assert not result.passed
        assert result.to_dict() == {"suite": "demo", "passed": False, "checks": 2, "failures": ["recorded"]}

    @pytest.mark.parametrize("suite, kwargs", [
        (suite_bisection, {"instances": 3}),
        (suite_sandwich, {"samples": 20}),
        (suite_nonhomogeneous_bound, {"samples": 20}),
        (suite_gradient, {"instances": 3}),
        (suite_gp_equivalence, {"instances": 2, "iterations": 5}),
        (suite_monotonicity, {"instances": 1, "iterations": 30}),
        (suite_log_fp, {"samples": 3}),
        (suite_wmmse_equivalence, {"instances": 2, "iterations": 3}),
        (suite_compile, {"precoders": 3}),
    ])
    def test_suites_pass(self, rng, suite, kwargs):
        result = suite(rng, **kwargs)
        assert result.checks > 0
        assert result.passed, result.failures

    def test_cmd_verify_single_suite(self):
        report = cmd_verify("rates")
        assert report["passed"]
        assert [s["suite"] for s in report["suites"]] == ["rates"]
        assert report["seed"] == 42

    def test_cmd_verify_unknown_suite(self):
        with pytest.raises(ValueError, match="Unknown suite"):
            cmd_verify("nope")

    def test_registry(self):
        assert {"sandwich", "nonhomogeneous_bound", "gp_equivalence", "wmmse_equivalence", "compile"} <= set(SUITES)


    @pytest.mark.parametrize("suite, expected", [
        (suite_sandwich, {"samples": 1000}),
        (suite_nonhomogeneous_bound, {"samples": 1000}),
        (suite_log_fp, {"samples": 500}),
        (suite_compile, {"precoders": 100}),
        (suite_monotonicity, {"instances": 100, "iterations": 500}),
    ])
    def test_full_run_sample_counts(self, suite, expected):
        defaults = {name: param.default for name, param in inspect.signature(suite).parameters.items()}
        for name, count in expected.items():
            assert defaults[name] == count

if __name__ == "__main__":
    pytest.main([__file__])
