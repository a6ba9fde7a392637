"""
Unit tests for experiment configuration ingestion.
"""

import numpy as np
import pytest

from proxnet.core.exceptions import ConfigException, InvalidActivationException
from proxnet.services import config_service as cs
from proxnet.services.activation_operators import OperatorStructure
from proxnet.services.vi_checker import BlockPoint

CONTRACTIVE = """
network:
  layers:
    - rows: 1
      cols: 1
      weights: [0.5]
      bias: [1.0]
stop:
  tol: 1.0e-9
"""


class TestLoadConfig:
    """Test YAML loading and validation."""

    def test_minimal(self, write_config):
        """Test defaults around a one-layer network."""
        config = cs.load_config(write_config(CONTRACTIVE))
        assert config.seed == 0
        assert config.stop.tol == 1e-9
        assert config.schedule.lambda_at(0) == 1.0
        assert config.perturbation is None
        assert config.network.layers[0].activation == "identity"

    def test_overrides(self, write_config):
        """Test command-line overrides."""
        config = cs.load_config(write_config(CONTRACTIVE), seed=5, tol=1e-3, max_iter=7)
        assert config.seed == 5
        assert config.stop.tol == 1e-3
        assert config.stop.max_iter == 7

    def test_perturbation_inherits_seed(self, write_config):
        """Test that perturbation directions follow the experiment seed."""
        path = write_config(CONTRACTIVE + "seed: 11\nperturbation:\n  c_nu: 1.0\n")
        assert cs.load_config(path).perturbation.seed == 11
        path = write_config(CONTRACTIVE + "seed: 11\nperturbation:\n  seed: 2\n", "explicit.yaml")
        assert cs.load_config(path).perturbation.seed == 2

    def test_missing_file(self, tmp_path):
        """Test a missing config file."""
        with pytest.raises(ConfigException):
            cs.load_config(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, write_config):
        """Test unparsable YAML."""
        with pytest.raises(ConfigException):
            cs.load_config(write_config("network: [unclosed\n"))

    def test_not_a_mapping(self, write_config):
        """Test a top-level list."""
        with pytest.raises(ConfigException):
            cs.load_config(write_config("- 1\n- 2\n"))

    def test_unknown_key(self, write_config):
        """Test that unknown keys are rejected with their location."""
        with pytest.raises(ConfigException) as exc_info:
            cs.load_config(write_config(CONTRACTIVE + "colour: red\n"))
        assert "colour" in exc_info.value.message

    def test_invalid_schedule(self, write_config):
        """Test that schedule validation errors surface as config errors."""
        text = CONTRACTIVE + "schedule:\n  mode: averaged\n  value: 3.0\n  alpha: 0.5\n"
        with pytest.raises(ConfigException) as exc_info:
            cs.load_config(write_config(text))
        assert "schedule" in exc_info.value.message


class TestLoadExperiment:
    """Test building networks and points from configs."""

    def test_contractive(self, write_config):
        """Test the one-layer contraction."""
        exp = cs.load_experiment(write_config(CONTRACTIVE))
        assert exp.network.forward([2.0])[0] == pytest.approx(2.0)
        np.testing.assert_array_equal(exp.x0, [0.0])
        assert exp.x_ref is None

    def test_files_relative_to_config(self, write_config, tmp_path):
        """Test weight, bias, start and reference files next to the config."""
        (tmp_path / "W1.txt").write_text("# weights\n0 -1\n1 0\n", encoding="utf-8")
        (tmp_path / "b1.txt").write_text("0.5\n-0.5\n", encoding="utf-8")
        (tmp_path / "x0.txt").write_text("1 2\n", encoding="utf-8")
        text = """
network:
  layers:
    - rows: 2
      cols: 2
      weights: W1.txt
      bias: b1.txt
      activation: satlin
start:
  x0: x0.txt
reference: [0.0, 0.0]
output:
  trace: out/trace.csv
"""
        exp = cs.load_experiment(write_config(text))
        np.testing.assert_array_equal(exp.network.layers[0].W, [[0.0, -1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(exp.network.layers[0].b, [0.5, -0.5])
        np.testing.assert_array_equal(exp.x0, [1.0, 2.0])
        np.testing.assert_array_equal(exp.x_ref, [0.0, 0.0])
        assert exp.output_path(exp.config.output.trace) == exp.base_dir / "out" / "trace.csv"
        assert exp.output_path(None) is None

    def test_random_start_is_seeded(self, write_config):
        """Test that a random start depends only on the seed."""
        path = write_config(CONTRACTIVE + "start:\n  x0: random\n")
        a = cs.load_experiment(path, seed=3).x0
        b = cs.load_experiment(path, seed=3).x0
        c = cs.load_experiment(path, seed=4).x0
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert -1.0 <= a[0] <= 1.0

    def test_nested_weights(self, write_config):
        """Test nested inline matrices."""
        text = """
network:
  layers:
    - rows: 2
      cols: 2
      weights: [[1.0, 0.0], [0.0, 0.5]]
      activation: relu
"""
        exp = cs.load_experiment(write_config(text))
        np.testing.assert_allclose(exp.network.forward([-1.0, 4.0]), [0.0, 2.0])

    def test_wrong_entry_count(self, write_config):
        """Test that flat weights must fill the declared shape."""
        text = "network:\n  layers:\n    - {rows: 2, cols: 2, weights: [1.0, 2.0, 3.0]}\n"
        with pytest.raises(ConfigException):
            cs.load_experiment(write_config(text))

    def test_broken_chain(self, write_config):
        """Test that dimension errors become config errors."""
        text = """
network:
  layers:
    - {rows: 2, cols: 1, weights: [1.0, 1.0]}
    - {rows: 1, cols: 1, weights: [1.0]}
"""
        with pytest.raises(ConfigException):
            cs.load_experiment(write_config(text))

    def test_missing_weight_file(self, write_config):
        """Test a weight path that does not exist."""
        text = "network:\n  layers:\n    - {rows: 1, cols: 1, weights: missing.txt}\n"
        with pytest.raises(ConfigException):
            cs.load_experiment(write_config(text))

    def test_wrong_reference_length(self, write_config):
        """Test that the reference must live in H_0."""
        with pytest.raises(ConfigException):
            cs.load_experiment(write_config(CONTRACTIVE + "reference: [1.0, 2.0]\n"))


class TestActivationDescriptors:
    """Test activation descriptor parsing."""

    def test_catalog_key(self):
        """Test a plain key applied to every coordinate."""
        r = cs.parse_activation("prelu:0.5", 2)
        np.testing.assert_allclose(r.apply([-2.0, 2.0]), [-1.0, 2.0])

    def test_separable(self):
        """Test per-coordinate descriptors."""
        r = cs.parse_activation({"separable": ["relu", "satlin"]}, 2)
        np.testing.assert_allclose(r.apply([-2.0, 2.0]), [0.0, 1.0])
        with pytest.raises(ConfigException):
            cs.parse_activation({"separable": ["relu"]}, 2)

    def test_softmax(self):
        """Test the softmax descriptor and its dimension check."""
        assert cs.parse_activation({"softmax": 3}, 3).structure is OperatorStructure.SOFTMAX
        with pytest.raises(ConfigException):
            cs.parse_activation({"softmax": 2}, 3)

    def test_sandwich(self, tmp_path):
        """Test inline and file-based L."""
        r = cs.parse_activation({"sandwich": {"L": [[0.5, 0.0]], "inner": "relu"}}, 2)
        assert r.dim == 2
        np.testing.assert_allclose(r.apply([2.0, 7.0]), [0.5, 0.0])
        (tmp_path / "L.txt").write_text("1 0\n", encoding="utf-8")
        r = cs.parse_activation({"sandwich": {"L": "L.txt", "inner": "satlin"}}, 2, tmp_path)
        np.testing.assert_allclose(r.apply([3.0, 1.0]), [1.0, 0.0])
        with pytest.raises(ConfigException):
            cs.parse_activation({"sandwich": {"L": [[1.0, 0.0, 0.0]], "inner": "relu"}}, 2)

    def test_operator_combinators(self):
        """Test operator-level convex, complement and half difference."""
        r = cs.parse_activation({"convex": [[0.5, {"softmax": 2}], [0.5, "identity"]]}, 2)
        assert r.structure is OperatorStructure.CONVEX_COMBINATION
        r = cs.parse_activation({"complement": "relu"}, 2)
        np.testing.assert_allclose(r.apply([-2.0, 3.0]), [-2.0, 0.0])
        r = cs.parse_activation({"half_difference": ["identity", "relu"]}, 2)
        np.testing.assert_allclose(r.apply([-2.0, 3.0]), [-2.0, 1.5])

    def test_scalar_combinator_uniform(self):
        """Test a scalar combinator applied coordinatewise."""
        r = cs.parse_activation({"scale": {"activation": "tanh", "alpha": 0.5, "beta": 2.0}}, 3)
        assert r.structure is OperatorStructure.SEPARABLE
        np.testing.assert_allclose(r.apply([0.0, 1.0, -1.0]), 0.5 * np.tanh([0.0, 2.0, -2.0]))

    def test_scalar_descriptors(self):
        """Test nested scalar combinators."""
        act = cs.parse_scalar_activation({"compose": ["relu", {"complement": "satlin"}]})
        assert act.eval(3.0) == pytest.approx(2.0)
        act = cs.parse_scalar_activation({"convex": [[0.5, "relu"], [0.5, "identity"]]})
        assert act.eval(-2.0) == pytest.approx(-1.0)

    @pytest.mark.parametrize(
        "desc",
        [
            42,
            {"relu": 1, "tanh": 2},
            {"compose": ["relu"]},
            {"scale": "tanh"},
            {"convex": []},
            {"mystery": "relu"},
        ],
    )
    def test_malformed(self, desc):
        """Test malformed descriptors."""
        with pytest.raises(ConfigException):
            cs.parse_activation(desc, 2)

    def test_unknown_key(self):
        """Test that unknown catalog names keep their own error."""
        with pytest.raises(InvalidActivationException):
            cs.parse_activation("swish", 2)


class TestNumericFiles:
    """Test matrix, vector and block-point files."""

    def test_matrix_shape(self, tmp_path):
        """Test the optional shape check."""
        path = tmp_path / "M.txt"
        path.write_text("1 2 3\n4 5 6\n", encoding="utf-8")
        assert cs.load_matrix(path).shape == (2, 3)
        with pytest.raises(ConfigException):
            cs.load_matrix(path, (3, 2))

    def test_malformed_matrix(self, tmp_path):
        """Test ragged and non-numeric rows."""
        path = tmp_path / "M.txt"
        path.write_text("1 2\n3\n", encoding="utf-8")
        with pytest.raises(ConfigException):
            cs.load_matrix(path)
        path.write_text("1 x\n", encoding="utf-8")
        with pytest.raises(ConfigException):
            cs.load_matrix(path)

    def test_non_finite(self, tmp_path):
        """Test that NaN entries are rejected."""
        path = tmp_path / "v.txt"
        path.write_text("1 nan\n", encoding="utf-8")
        with pytest.raises(ConfigException):
            cs.load_vector(path)

    def test_vector_layout(self, tmp_path):
        """Test that rows and columns both read as a flat vector."""
        path = tmp_path / "v.txt"
        path.write_text("1\n2\n3\n", encoding="utf-8")
        np.testing.assert_array_equal(cs.load_vector(path, 3), [1.0, 2.0, 3.0])
        with pytest.raises(ConfigException):
            cs.load_vector(path, 2)

    def test_block_point(self, tmp_path):
        """Test one component per line with differing lengths."""
        path = tmp_path / "p.txt"
        path.write_text("# x_1\n1 2 3\n\n4.5 -1\n", encoding="utf-8")
        p = cs.load_block_point(path)
        assert len(p) == 2
        np.testing.assert_array_equal(p.components[1], [4.5, -1.0])

    def test_block_point_written(self, tmp_path):
        """Test that written points read back exactly."""
        p = BlockPoint.from_vectors([[0.1, 1.0 / 3.0], [-2.0]])
        path = tmp_path / "p.txt"
        cs.write_block_point(p, path)
        q = cs.load_block_point(path)
        np.testing.assert_array_equal(q.concat(), p.concat())

    def test_block_point_errors(self, tmp_path):
        """Test empty and non-numeric point files."""
        path = tmp_path / "p.txt"
        path.write_text("# nothing\n", encoding="utf-8")
        with pytest.raises(ConfigException):
            cs.load_block_point(path)
        path.write_text("1 two\n", encoding="utf-8")
        with pytest.raises(ConfigException) as exc_info:
            cs.load_block_point(path)
        assert exc_info.value.details["line"] == 1
        with pytest.raises(ConfigException):
            cs.load_block_point(tmp_path / "missing.txt")
