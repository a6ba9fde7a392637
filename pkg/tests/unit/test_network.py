"""
Unit tests for layers and networks.
"""

import numpy as np
import pytest

from proxnet.core.exceptions import DimensionMismatchException, InvalidParameterException
from proxnet.services.activation_operators import softmax, uniform
from proxnet.services.network import Layer, Network
from tests.factories import make_layer


class TestLayer:
    """Test single-layer validation and evaluation."""

    def test_apply(self):
        """Test x ↦ R(Wx + b)."""
        layer = make_layer([[1.0, -1.0], [2.0, 0.0]], [0.5, -10.0], "relu")
        np.testing.assert_allclose(layer.apply(np.array([1.0, 3.0])), [0.0, 0.0])
        np.testing.assert_allclose(layer.apply(np.array([3.0, 1.0])), [2.5, 0.0])

    def test_bias_length(self):
        """Test that the bias must match the weight rows."""
        with pytest.raises(DimensionMismatchException):
            Layer(W=np.eye(2), b=np.zeros(3), R=uniform("relu", 2))

    def test_activation_dimension(self):
        """Test that the activation must match the weight rows."""
        with pytest.raises(DimensionMismatchException):
            Layer(W=np.eye(2), b=np.zeros(2), R=softmax(3))

    def test_non_finite_weights(self):
        """Test that NaN weights are rejected."""
        with pytest.raises(InvalidParameterException):
            make_layer([[np.nan]])

    def test_weights_are_read_only(self):
        """Test that stored weights cannot be mutated."""
        W = np.eye(2)
        layer = make_layer(W)
        W[0, 0] = 5.0
        assert layer.W[0, 0] == 1.0
        with pytest.raises(ValueError):
            layer.W[0, 0] = 3.0

    def test_norms(self):
        """Test cached norms."""
        layer = make_layer(np.diag([3.0, -4.0]), [3.0, 4.0])
        assert layer.weight_norm == pytest.approx(4.0)
        assert layer.bias_norm == pytest.approx(5.0)
        assert not layer.is_zero
        assert make_layer(np.zeros((2, 2))).is_zero


class TestNetwork:
    """Test network construction and forward evaluation."""

    def test_contractive_forward(self, contractive_net):
        """Test the 1-d contraction."""
        assert contractive_net.forward([0.0])[0] == pytest.approx(1.0)
        assert contractive_net.forward([2.0])[0] == pytest.approx(2.0)
        assert contractive_net(np.array([4.0]))[0] == pytest.approx(3.0)

    def test_relu_pair(self, relu_pair_net):
        """Test two identity-weight ReLU layers."""
        np.testing.assert_allclose(relu_pair_net.forward([-3.0, 4.0]), [0.0, 4.0])

    def test_layer_outputs(self, contractive_net, relu_pair_net):
        """Test intermediate signals."""
        outs = contractive_net.layer_outputs([0.0])
        assert len(outs) == 1
        np.testing.assert_allclose(outs[0], [1.0])
        x = np.array([0.5, 1.5])
        outs = relu_pair_net.layer_outputs(x)
        assert len(outs) == 2
        for out in outs:
            np.testing.assert_allclose(out, x)

    def test_three_layer_chain(self):
        """Test a rectangular chain R^2 → R^3 → R^1 → R^2 against hand composition."""
        W1 = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        W2 = np.array([[1.0, -1.0, 0.5]])
        W3 = np.array([[2.0], [-1.0]])
        net = Network.from_layers(
            [
                make_layer(W1, activation="relu"),
                make_layer(W2, [0.25]),
                make_layer(W3, activation="satlin"),
            ]
        )
        x = np.array([1.0, -2.0])
        s1 = np.maximum(W1 @ x, 0.0)
        s2 = W2 @ s1 + 0.25
        s3 = np.clip(W3 @ s2, -1.0, 1.0)
        outs = net.layer_outputs(x)
        np.testing.assert_allclose(outs[0], s1)
        np.testing.assert_allclose(outs[1], s2)
        np.testing.assert_allclose(outs[2], s3)
        assert net.dims == [2, 3, 1, 2]

    def test_broken_chain(self):
        """Test that consecutive dimensions must agree."""
        with pytest.raises(DimensionMismatchException):
            Network.from_layers([make_layer(np.zeros((3, 2))), make_layer(np.zeros((2, 2)))])

    def test_not_closed(self):
        """Test that the last layer must map back into H_0."""
        with pytest.raises(DimensionMismatchException):
            Network.from_layers([make_layer(np.zeros((3, 2)))])

    def test_empty(self):
        """Test that a network needs layers."""
        with pytest.raises(InvalidParameterException):
            Network.from_layers([])

    def test_input_dimension(self, contractive_net):
        """Test that forward validates the input."""
        with pytest.raises(DimensionMismatchException):
            contractive_net.forward([1.0, 2.0])


class TestOutputNormBound:
    """Test the norm bound on partial compositions."""

    def test_single_layer(self, contractive_net):
        """Test ‖W‖·‖x‖ + ‖b‖."""
        assert contractive_net.output_norm_bound(1, 1, 2.0) == pytest.approx(2.0)

    def test_two_layers(self):
        """Test the recursive bound."""
        net = Network.from_layers(
            [make_layer(2.0 * np.eye(2), [1.0, 0.0]), make_layer(0.5 * np.eye(2))]
        )
        assert net.output_norm_bound(1, 2, 1.0) == pytest.approx(1.5)

    def test_nonexpansive_unbiased(self, relu_pair_net):
        """Test that unit weights without bias preserve the norm bound."""
        assert relu_pair_net.output_norm_bound(1, 2, 3.0) == pytest.approx(3.0)

    def test_bound_holds(self, deep_net):
        """Test the bound on random inputs."""
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(size=5) * 3.0
            out = deep_net.forward(x)
            bound = deep_net.output_norm_bound(1, 3, float(np.linalg.norm(x)))
            assert np.linalg.norm(out) <= bound + 1e-12

    def test_invalid_range(self, contractive_net):
        """Test the layer-range precondition."""
        with pytest.raises(InvalidParameterException):
            contractive_net.output_norm_bound(2, 1, 1.0)
        with pytest.raises(InvalidParameterException):
            contractive_net.output_norm_bound(1, 1, -1.0)
