"""
Unit tests for the complex linear-algebra primitives
"""
import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_allclose

# Add parent directory to path to import our modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from fracopt.linalg import (
    ConstraintSpec,
    check_hermitian,
    group_regularized_inverse_bisection,
    hermitian_solve,
    is_feasible,
    jittered,
    project_ball,
    project_group_ball,
    project_iterate,
    regularized_inverse_bisection,
    spectral_upper_bound,
)
from fracopt.utils import NotPositiveDefinite, complex_normal


def random_hpd(rng, dim, shift=0.1):
    g = complex_normal(rng, (dim, dim))
    return g @ g.conj().T + shift * np.eye(dim)


class TestHermitianSolve(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.rng = np.random.default_rng(7)

    def test_identity_returns_rhs(self):
        rhs = complex_normal(self.rng, 3)
        assert_allclose(hermitian_solve(np.eye(3), rhs), rhs)

    def test_diagonal_solve(self):
        solution = hermitian_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0]))
        assert_allclose(solution, [1.0, 1.0])

    def test_matches_dense_solver(self):
        """Cholesky solve agrees with a generic LU solve"""
        m = random_hpd(self.rng, 6)
        rhs = complex_normal(self.rng, 6)
        assert_allclose(hermitian_solve(m, rhs), np.linalg.solve(m, rhs), rtol=1e-9, atol=1e-12)

    def test_matrix_right_hand_side(self):
        m = random_hpd(self.rng, 4)
        rhs = complex_normal(self.rng, (4, 3))
        solution = hermitian_solve(m, rhs)
        self.assertEqual(solution.shape, (4, 3))
        assert_allclose(m @ solution, rhs, atol=1e-10)

    def test_indefinite_matrix_raises(self):
        with self.assertRaises(NotPositiveDefinite):
            hermitian_solve(-np.eye(3), np.ones(3))

    def test_dimension_mismatch_raises(self):
        with self.assertRaises(ValueError):
            hermitian_solve(np.eye(3), np.ones(2))

    def test_non_hermitian_matrix_raises(self):
        """Only the lower triangle reaches the factorization, so asymmetry must be caught first"""
        with self.assertRaises(ValueError):
            hermitian_solve(np.array([[2.0, 5.0], [0.0, 2.0]]), np.ones(2))

    def test_rounding_level_asymmetry_accepted(self):
        m = random_hpd(self.rng, 5)
        m[0, 1] += 1e-15
        solution = hermitian_solve(m, np.ones(5))
        assert_allclose(m @ solution, np.ones(5), atol=1e-9)


class TestSpectralBound(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.rng = np.random.default_rng(11)

    def test_frobenius_of_identity(self):
        self.assertAlmostEqual(spectral_upper_bound(np.eye(4)), 2.0)

    def test_exact_diagonal(self):
        self.assertAlmostEqual(spectral_upper_bound(np.diag([1.0, 3.0]), "exact"), 3.0, places=6)

    def test_exact_matches_eigendecomposition(self):
        m = random_hpd(self.rng, 8)
        expected = np.linalg.eigvalsh(m)[-1]
        self.assertLessEqual(abs(spectral_upper_bound(m, "exact") - expected), 1e-6 * expected)

    def test_bounds_dominate_largest_eigenvalue(self):
        for trial in range(5):
            with self.subTest(trial=trial):
                m = random_hpd(self.rng, 5)
                largest = np.linalg.eigvalsh(m)[-1]
                self.assertGreaterEqual(spectral_upper_bound(m), largest)
                self.assertLessEqual(spectral_upper_bound(m, "exact"), spectral_upper_bound(m))

    def test_zero_matrix(self):
        self.assertEqual(spectral_upper_bound(np.zeros((3, 3)), "exact"), 0.0)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            spectral_upper_bound(np.eye(2), "gershgorin")


class TestProjections(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.rng = np.random.default_rng(3)

    def test_project_ball_cases(self):
        cases = [
            ((1.0, 0.0), 4.0, (1.0, 0.0)),
            ((3.0, 4.0), 25.0, (3.0, 4.0)),
            ((3.0, 4.0), 1.0, (0.6, 0.8)),
        ]
        for v, radius2, expected in cases:
            with self.subTest(v=v, radius2=radius2):
                assert_allclose(project_ball(np.array(v), radius2), expected)

    def test_project_ball_idempotent(self):
        v = complex_normal(self.rng, (4, 2)) * 3.0
        once = project_ball(v, 2.0)
        assert_allclose(project_ball(once, 2.0), once)
        self.assertAlmostEqual(np.linalg.norm(once) ** 2, 2.0)

    def test_group_projection_inside(self):
        blocks = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        for out, block in zip(project_group_ball(blocks, 4.0), blocks):
            assert_allclose(out, block)

    def test_group_projection_scales_together(self):
        out = project_group_ball([np.array([2.0, 0.0]), np.array([0.0, 2.0])], 2.0)
        assert_allclose(out[0], [1.0, 0.0])
        assert_allclose(out[1], [0.0, 1.0])

    def test_group_projection_matches_concatenation(self):
        blocks = [complex_normal(self.rng, 3) for _ in range(3)]
        joined = project_ball(np.concatenate(blocks), 1.5)
        assert_allclose(np.concatenate(project_group_ball(blocks, 1.5)), joined)

    def test_project_iterate_mixed_constraints(self):
        group = ConstraintSpec.group_ball([1, 2], 1.0)
        constraints = [ConstraintSpec.ball(1.0), group, group, ConstraintSpec.unconstrained()]
        blocks = complex_normal(self.rng, (4, 3, 1)) * 4.0
        out = project_iterate(constraints, blocks)

        self.assertTrue(is_feasible(constraints, out))
        self.assertAlmostEqual(np.linalg.norm(out[0]) ** 2, 1.0)
        self.assertAlmostEqual(np.linalg.norm(out[1:3]) ** 2, 1.0)
        assert_allclose(out[3], blocks[3])

    def test_is_feasible_detects_violation(self):
        constraints = [ConstraintSpec.ball(1.0)]
        self.assertFalse(is_feasible(constraints, np.full((1, 2, 1), 1.0)))
        self.assertTrue(is_feasible(constraints, np.full((1, 2, 1), 0.5)))


class TestConstraintSpec(unittest.TestCase):

    def test_ball_requires_positive_radius(self):
        with self.assertRaises(ValueError):
            ConstraintSpec.ball(0.0)

    def test_group_requires_members(self):
        with self.assertRaises(ValueError):
            ConstraintSpec("group_ball", 1.0, ())

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            ConstraintSpec("box", 1.0)

    def test_dict_round_trip(self):
        spec = ConstraintSpec.group_ball([0, 1, 2], 0.1)
        self.assertEqual(ConstraintSpec.from_dict(spec.to_dict()), spec)


class TestBisection(unittest.TestCase):

    def setUp(self):
        """Set up test fixtures"""
        self.rng = np.random.default_rng(5)

    def test_active_scalar_case(self):
        solution, eta = regularized_inverse_bisection(np.array([[1.0]]), np.array([2.0]), 1.0)
        assert_allclose(solution, [1.0])
        self.assertAlmostEqual(eta, 1.0)

    def test_interior_scalar_case(self):
        solution, eta = regularized_inverse_bisection(np.array([[1.0]]), np.array([0.5]), 1.0)
        assert_allclose(solution, [0.5])
        self.assertEqual(eta, 0.0)

    def test_zero_target(self):
        solution, eta = regularized_inverse_bisection(np.eye(3), np.zeros(3), 1.0)
        assert_allclose(solution, np.zeros(3))
        self.assertEqual(eta, 0.0)

    def test_large_radius_gives_unregularized_solve(self):
        d = random_hpd(self.rng, 4)
        target = complex_normal(self.rng, 4)
        solution, eta = regularized_inverse_bisection(d, target, 1e12)
        self.assertEqual(eta, 0.0)
        assert_allclose(solution, np.linalg.solve(d, target), rtol=1e-9)

    def test_complementary_slackness(self):
        for trial in range(5):
            with self.subTest(trial=trial):
                d = random_hpd(self.rng, 5)
                target = complex_normal(self.rng, 5) * 5.0
                solution, eta = regularized_inverse_bisection(d, target, 1.0)
                norm2 = np.linalg.norm(solution) ** 2
                self.assertLessEqual(norm2, 1.0 + 1e-12)
                if eta > 0:
                    self.assertGreater(norm2, 1.0 - 1e-9)
                assert_allclose((d + eta * np.eye(5)) @ solution, target, atol=1e-9)

    def test_group_shares_multiplier(self):
        ds = [random_hpd(self.rng, 3), random_hpd(self.rng, 4)]
        targets = [complex_normal(self.rng, 3) * 4.0, complex_normal(self.rng, 4) * 4.0]
        solutions, eta = group_regularized_inverse_bisection(ds, targets, 2.0)
        total = sum(np.linalg.norm(s) ** 2 for s in solutions)
        self.assertGreater(eta, 0.0)
        self.assertAlmostEqual(total, 2.0, places=8)
        for d, s, t in zip(ds, solutions, targets):
            assert_allclose((d + eta * np.eye(d.shape[0])) @ s, t, atol=1e-9)

    def test_singular_matrix_uses_positive_multiplier(self):
        """A rank-deficient d is only solved with η > 0"""
        u = complex_normal(self.rng, 3)
        d = np.outer(u, u.conj())
        solution, eta = regularized_inverse_bisection(d, complex_normal(self.rng, 3), 1.0)
        self.assertGreater(eta, 0.0)
        self.assertLessEqual(np.linalg.norm(solution) ** 2, 1.0)


class TestHelpers(unittest.TestCase):

    def test_check_hermitian_rejects_asymmetric(self):
        with self.assertRaises(ValueError):
            check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_check_hermitian_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            check_hermitian(np.array([[np.nan]]))

    def test_jittered_shifts_diagonal(self):
        d = np.diag([2.0, 4.0])
        shifted = jittered(d)
        self.assertGreater(shifted[0, 0], 2.0)
        self.assertAlmostEqual(shifted[0, 0] - 2.0, 3e-12, delta=1e-15)
        assert_allclose(jittered(np.zeros((2, 2))), np.zeros((2, 2)))


if __name__ == '__main__':
    unittest.main()
