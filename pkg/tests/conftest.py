"""
Pytest configuration and fixtures.
"""

from pathlib import Path

import numpy as np
import pytest

from proxnet.services.activation_operators import separable
from proxnet.services.network import Layer, Network
from tests.factories import make_layer, seeded_orthogonal


@pytest.fixture
def contractive_net() -> Network:
    """Tx = 0.5x + 1 on the real line, fixed point 2."""
    return Network.from_layers([make_layer([[0.5]], [1.0])])


@pytest.fixture
def translation_net() -> Network:
    """Tx = x + 1, no fixed point."""
    return Network.from_layers([make_layer([[1.0]], [1.0])])


@pytest.fixture
def identity_net() -> Network:
    """A single identity layer on R^3."""
    return Network.from_layers([make_layer(np.eye(3))])


@pytest.fixture
def relu_pair_net() -> Network:
    """Two identity-weight ReLU layers on R^2."""
    return Network.from_layers(
        [make_layer(np.eye(2), activation="relu"), make_layer(np.eye(2), activation="relu")]
    )


@pytest.fixture
def deep_net() -> Network:
    """Five-dimensional three-layer tanh network with weights 0.5 times orthogonal matrices."""
    rng = np.random.default_rng(7)
    layers = [
        make_layer(0.5 * seeded_orthogonal(5, rng), rng.normal(size=5), "tanh")
        for _ in range(3)
    ]
    return Network.from_layers(layers)


@pytest.fixture
def satlin_net() -> Network:
    """Two saturated-linear layers on R^2 with unit-norm weights."""
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    return Network.from_layers(
        [
            Layer(W=rot, b=np.array([0.3, -0.2]), R=separable(["satlin", "satlin"])),
            Layer(W=0.5 * np.eye(2), b=np.zeros(2), R=separable(["satlin", "satlin"])),
        ]
    )


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a YAML experiment file and return its path."""

    def _write(text: str, name: str = "experiment.yaml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
