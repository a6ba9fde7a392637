"""
Unit tests for vector activation operators.
"""

import math

import numpy as np
import pytest

from proxnet.core.exceptions import DimensionMismatchException, InvalidParameterException
from proxnet.services import activation_operators as ops
from proxnet.services import scalar_activations as sa


class TestApply:
    """Test operator evaluation."""

    def test_separable_relu(self):
        """Test coordinatewise ReLU."""
        out = ops.separable(["relu", "relu"]).apply([-1.0, 2.0])
        np.testing.assert_array_equal(out, [0.0, 2.0])

    def test_separable_mixed(self):
        """Test different activations per coordinate."""
        r = ops.separable([sa.satlin(), "relu", sa.tanh(), "satlin"])
        out = r.apply([2.0, -1.0, 0.5, -3.0])
        np.testing.assert_allclose(out, [1.0, 0.0, math.tanh(0.5), -1.0])

    def test_softmax_at_zero(self):
        """Test that softmax minus the uniform vector vanishes at 0."""
        np.testing.assert_allclose(ops.softmax(4).apply(np.zeros(4)), np.zeros(4), atol=1e-16)

    def test_softmax_value(self):
        """Test a hand-computed softmax value."""
        out = ops.softmax(3).apply([math.log(3.0), 0.0, 0.0])
        np.testing.assert_allclose(out, [4.0 / 15.0, -2.0 / 15.0, -2.0 / 15.0], atol=1e-15)

    def test_softmax_large_inputs(self):
        """Test overflow safety."""
        out = ops.softmax(2).apply([1000.0, 0.0])
        np.testing.assert_allclose(out, [0.5, -0.5])

    def test_dimension_check(self):
        """Test that apply validates the input length."""
        with pytest.raises(DimensionMismatchException):
            ops.softmax(3).apply([1.0, 2.0])


class TestSandwich:
    """Test Lᵀ∘R∘L operators."""

    def test_identity_L(self):
        """Test that L = Id leaves the inner operator unchanged."""
        r = ops.make_sandwich(np.eye(3), ops.uniform("tanh", 3))
        x = np.array([0.3, -2.0, 1.0])
        np.testing.assert_allclose(r.apply(x), np.tanh(x))

    def test_half_identity(self):
        """Test a contracted ReLU sandwich."""
        r = ops.make_sandwich(0.5 * np.eye(2), ops.uniform("relu", 2))
        np.testing.assert_allclose(r.apply([2.0, -2.0]), [0.5, 0.0])

    def test_rectangular(self):
        """Test an L mapping R^3 into R^2."""
        L = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        r = ops.make_sandwich(L, ops.uniform("satlin", 2))
        assert r.dim == 3
        np.testing.assert_allclose(r.apply([3.0, -0.5, 9.0]), [1.0, -0.5, 0.0])

    def test_norm_too_large(self):
        """Test that ‖L‖ > 1 is rejected."""
        with pytest.raises(InvalidParameterException):
            ops.make_sandwich(2.0 * np.eye(2), ops.uniform("relu", 2))

    def test_shape_mismatch(self):
        """Test that L must map into the inner space."""
        with pytest.raises(DimensionMismatchException):
            ops.make_sandwich(np.eye(3), ops.uniform("relu", 2))


class TestCombinations:
    """Test operator-level closure operations."""

    def test_convex_combination(self):
        """Test weighted sums."""
        r = ops.convex_combination(
            [(0.25, ops.uniform("relu", 2)), (0.75, ops.uniform("identity", 2))]
        )
        np.testing.assert_allclose(r.apply([-4.0, 4.0]), [-3.0, 4.0])

    def test_single_term_returns_operator(self):
        """Test that one full-weight term is the operator itself."""
        inner = ops.softmax(3)
        assert ops.convex_combination([(1.0, inner)]) is inner

    def test_convex_weights_checked(self):
        """Test weight validation."""
        with pytest.raises(InvalidParameterException):
            ops.convex_combination([(0.7, ops.softmax(2)), (0.7, ops.softmax(2))])

    def test_complement_and_half_difference(self):
        """Test complement and half difference."""
        relu = ops.uniform("relu", 2)
        np.testing.assert_allclose(ops.complement(relu).apply([-2.0, 3.0]), [-2.0, 0.0])
        hd = ops.half_difference(ops.uniform("identity", 2), relu)
        np.testing.assert_allclose(hd.apply([-2.0, 3.0]), [-2.0, 1.5])

    def test_half_difference_dimensions(self):
        """Test that operands must share a dimension."""
        with pytest.raises(DimensionMismatchException):
            ops.half_difference(ops.softmax(2), ops.softmax(3))


class TestRangeMetadata:
    """Test range radius and conjugate flags."""

    def test_separable_bounded(self):
        """Test the radius of a box range."""
        r = ops.separable(["satlin", "tanh", "sigmoid_shifted"])
        assert r.range_bounded
        assert r.range_radius == pytest.approx(math.sqrt(1.0 + 1.0 + 0.25))
        assert r.conjugate_full_domain

    def test_separable_unbounded(self):
        """Test that one unbounded coordinate makes the range unbounded."""
        r = ops.separable(["satlin", "relu"])
        assert not r.range_bounded
        assert not r.conjugate_full_domain

    def test_softmax(self):
        """Test softmax metadata."""
        r = ops.softmax(4)
        assert r.range_radius == pytest.approx(math.sqrt(0.75))
        assert r.conjugate_full_domain

    def test_sandwich_radius(self):
        """Test that the radius scales with ‖L‖."""
        r = ops.make_sandwich(0.5 * np.eye(2), ops.uniform("satlin", 2))
        assert r.range_radius == pytest.approx(0.5 * math.sqrt(2.0))

    def test_complement_unknown(self):
        """Test that complement ranges are reported unbounded."""
        assert not ops.complement(ops.uniform("satlin", 2)).range_bounded


class TestFirmNonexpansive:
    """Test the sampled firm-nonexpansiveness check."""

    def test_relu(self):
        """Test that ReLU passes with negligible violation."""
        report = ops.check_firm_nonexpansive(ops.uniform("relu", 3), samples=1000)
        assert report.passed
        assert report.worst_violation <= 1e-12

    def test_softmax(self):
        """Test that the shifted softmax passes."""
        assert ops.check_firm_nonexpansive(ops.softmax(3), samples=1000).passed

    def test_identity(self):
        """Test that the identity has zero violation."""
        report = ops.check_firm_nonexpansive(ops.uniform("identity", 2), samples=100)
        assert report.passed
        assert report.worst_violation == pytest.approx(0.0, abs=1e-12)

    def test_composed_structures(self):
        """Test sandwich, convex and half-difference operators."""
        rng = np.random.default_rng(2)
        L = rng.normal(size=(3, 4))
        L /= np.linalg.norm(L, ord=2)
        structures = [
            ops.make_sandwich(L, ops.separable(["tanh", "relu", "elliot"])),
            ops.convex_combination([(0.4, ops.softmax(4)), (0.6, ops.uniform("isru", 4))]),
            ops.half_difference(ops.softmax(4), ops.uniform("satlin", 4)),
            ops.complement(ops.uniform("arctan2pi", 4)),
        ]
        for r in structures:
            assert ops.check_firm_nonexpansive(r, samples=500, seed=4).passed

    def test_expansive_map_fails(self):
        """Test that a non-activation is caught."""

        class Doubling(ops.ActivationOperator):
            structure = ops.OperatorStructure.SEPARABLE

            def _apply(self, x):
                return 2.0 * x

            @property
            def range_radius(self):
                return math.inf

            def describe(self):
                return "doubling"

        report = ops.check_firm_nonexpansive(Doubling(2), samples=10)
        assert not report.passed
        assert report.worst_violation > 0

    def test_samples_positive(self):
        """Test the sample-count precondition."""
        with pytest.raises(InvalidParameterException):
            ops.check_firm_nonexpansive(ops.softmax(2), samples=0)


class TestNormInequality:
    """Test the triangle-gap inequality used by the certificate bounds."""

    @pytest.mark.parametrize("dim", [2, 5, 20])
    def test_nonnegative(self, dim):
        """Test nonnegativity on random pairs."""
        rng = np.random.default_rng(dim)
        for _ in range(10_000):
            x = rng.normal(size=dim) * rng.exponential()
            y = rng.normal(size=dim) * rng.exponential()
            assert ops.triangle_gap_slack(x, y) >= -1e-10

    def test_parallel_vectors(self):
        """Test the equality case x = y."""
        assert ops.triangle_gap_slack([1.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
