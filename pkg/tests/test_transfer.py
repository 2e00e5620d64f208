"""Tests for RK4 transfer matrices with step halving."""
import numpy as np
import pytest
from scipy.linalg import expm

from spectral_tori.core.transfer import (
    MonodromyError,
    half_step_samples,
    ordered_product,
    refined_path_transfer,
    refined_transfer_matrix,
    unimodular_multipliers,
)

ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)


def constant_sampler(a: np.ndarray):
    def sampler(steps: int) -> np.ndarray:
        return np.broadcast_to(a, (2 * steps + 1, 2, 2)).copy()

    return sampler


class TestOrderedProduct:
    """Tests for the pairwise product."""

    def test_order(self):
        """Should multiply later factors on the left."""
        a = np.array([[1.0, 1.0], [0.0, 1.0]])
        b = np.array([[1.0, 0.0], [1.0, 1.0]])
        c = np.array([[2.0, 0.0], [0.0, 0.5]])
        np.testing.assert_allclose(ordered_product(np.stack([a, b, c])), c @ b @ a)


class TestHalfStepSamples:
    """Tests for trigonometric interpolation to half steps."""

    def test_interpolates_sine(self):
        """Should reproduce a band-limited signal on the finer grid, closing the period."""
        s = np.arange(16) / 16
        fine = half_step_samples(np.sin(2.0 * np.pi * s), 16)
        expected = np.sin(2.0 * np.pi * np.arange(33) / 32)
        np.testing.assert_allclose(fine, expected, atol=1e-12)


class TestRefinedTransfer:
    """Tests for Richardson-refined transfer matrices."""

    def test_constant_system_matches_exponential(self):
        """Should agree with the matrix exponential for constant coefficients."""
        result = refined_transfer_matrix(constant_sampler(ROTATION), tolerance=1e-12)
        np.testing.assert_allclose(result.matrix, expm(ROTATION), atol=1e-10)
        assert result.error <= 1e-12

    def test_no_refinements_fails(self):
        """Should raise when no refinement pass is allowed."""
        with pytest.raises(MonodromyError) as exc_info:
            refined_transfer_matrix(constant_sampler(ROTATION), max_refinements=0)
        assert exc_info.value.code == "MONODROMY_NOT_CONVERGED"
        assert exc_info.value.exit_code == 2

    def test_path_transfer_nodes(self):
        """Should return the cumulative transfer at every node."""
        result = refined_path_transfer(constant_sampler(ROTATION), 4)
        assert result.matrix.shape == (5, 2, 2)
        np.testing.assert_allclose(result.matrix[0], np.eye(2))
        np.testing.assert_allclose(result.matrix[2], expm(0.5 * ROTATION), atol=1e-10)
        np.testing.assert_allclose(result.matrix[4], expm(ROTATION), atol=1e-10)


class TestUnimodularMultipliers:
    """Tests for multipliers from a trace."""

    def test_elliptic(self):
        """Should return the unit-circle pair for |trace| < 2."""
        first, second = unimodular_multipliers(2.0 * np.cos(0.7))
        assert abs(first) == pytest.approx(1.0)
        assert first * second == pytest.approx(1.0)
        assert sorted([np.angle(first), np.angle(second)]) == pytest.approx([-0.7, 0.7])

    def test_hyperbolic_ordering(self):
        """Should put the multiplier of larger modulus first."""
        first, second = unimodular_multipliers(-3.0)
        assert abs(first) > 1.0 > abs(second)
        assert first + second == pytest.approx(-3.0)

    def test_large_traces_keep_product_one(self):
        """Should keep k * (1/k) = 1 and the trace when |Tr| is huge."""
        traces = np.array([1e4, 1e8, 2.0 * np.cosh(10.0 * np.pi), -1e8, 1e6j])
        first, second = unimodular_multipliers(traces)
        np.testing.assert_allclose(first * second, 1.0, rtol=0, atol=1e-14)
        np.testing.assert_allclose(first + second, traces, rtol=1e-14)
        assert np.all(np.abs(first) >= 1.0)

