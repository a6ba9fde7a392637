"""
Experiment configuration ingestion.

YAML experiment files, whitespace-separated matrix/vector/point files and activation descriptors
are turned into validated domain objects. Every failure surfaces as a ConfigException.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from pydantic import ValidationError

from proxnet.core.exceptions import ConfigException, ProxNetException
from proxnet.core.logging import get_logger
from proxnet.schemas.config import ExperimentConfig, LayerConfig, MatrixSource, VectorSource
from proxnet.services import activation_operators as ops
from proxnet.services import scalar_activations as sa
from proxnet.services.network import Layer, Network
from proxnet.services.vi_checker import BlockPoint
from proxnet.utils.linalg import FloatArray

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class LoadedExperiment:
    """A validated config together with the objects it describes."""

    config: ExperimentConfig
    base_dir: Path
    network: Network
    x0: FloatArray
    x_ref: FloatArray | None

    def output_path(self, value: str | None) -> Path | None:
        """Resolve an output path relative to the config file."""
        if value is None:
            return None
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def _resolve(value: str, base_dir: Path) -> Path:
    path = Path(value)
    resolved = path if path.is_absolute() else base_dir / path
    logger.debug("Resolved path %s", resolved)
    if not resolved.is_file():
        raise ConfigException(f"File not found: {resolved}", details={"path": str(resolved)})
    return resolved


def _loadtxt(path: Path) -> FloatArray:
    try:
        data = np.loadtxt(path, dtype=np.float64, ndmin=2, comments="#")
    except ValueError as e:
        raise ConfigException(f"Malformed numeric file {path}: {str(e)}") from e
    if not np.all(np.isfinite(data)):
        raise ConfigException(f"Non-finite entries in {path}", details={"path": str(path)})
    return data


def load_matrix(path: str | Path, shape: tuple[int, int] | None = None) -> FloatArray:
    """
    Read a matrix file: one row per line, entries separated by whitespace, '#' comments.

    Raises:
        ConfigException: If the file is missing, malformed or has the wrong shape
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigException(f"File not found: {path}", details={"path": str(path)})
    matrix = _loadtxt(path)
    if shape is not None and matrix.shape != shape:
        raise ConfigException(
            f"Matrix in {path} has shape {matrix.shape}, expected {shape}",
            details={"path": str(path), "shape": list(matrix.shape), "expected": list(shape)},
        )
    return matrix


def load_vector(path: str | Path, dim: int | None = None) -> FloatArray:
    """
    Read a vector file: entries separated by whitespace or newlines.

    Raises:
        ConfigException: If the file is missing, malformed or has the wrong length
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigException(f"File not found: {path}", details={"path": str(path)})
    vector = _loadtxt(path).ravel()
    if dim is not None and vector.shape[0] != dim:
        raise ConfigException(
            f"Vector in {path} has length {vector.shape[0]}, expected {dim}",
            details={"path": str(path)},
        )
    return vector


def load_block_point(path: str | Path) -> BlockPoint:
    """
    Read a block point: one component per line, entries separated by whitespace.

    Raises:
        ConfigException: If the file is missing or a line is not numeric
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigException(f"File not found: {path}", details={"path": str(path)})
    components = []
    for line_num, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            values = np.array([float(tok) for tok in stripped.split()], dtype=np.float64)
        except ValueError as e:
            raise ConfigException(
                f"Line {line_num} of {path} is not numeric", details={"line": line_num}
            ) from e
        if not np.all(np.isfinite(values)):
            raise ConfigException(
                f"Line {line_num} of {path} has non-finite entries", details={"line": line_num}
            )
        components.append(values)
    if not components:
        raise ConfigException(f"Point file {path} is empty", details={"path": str(path)})
    return BlockPoint(tuple(components))


def write_block_point(p: BlockPoint, path: str | Path) -> None:
    """Write a block point in the format read by load_block_point."""
    lines = [" ".join(repr(float(v)) for v in comp) for comp in p.components]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _matrix(source: MatrixSource, shape: tuple[int, int], base_dir: Path) -> FloatArray:
    if isinstance(source, str):
        return load_matrix(_resolve(source, base_dir), shape)
    data = np.asarray(source, dtype=np.float64)
    if data.ndim == 1:
        if data.shape[0] != shape[0] * shape[1]:
            raise ConfigException(
                f"Expected {shape[0] * shape[1]} row-major entries, got {data.shape[0]}",
                details={"shape": list(shape)},
            )
        data = data.reshape(shape)
    if data.shape != shape:
        raise ConfigException(
            f"Matrix has shape {data.shape}, expected {shape}", details={"shape": list(shape)}
        )
    return data


def _vector(source: VectorSource, dim: int, base_dir: Path) -> FloatArray:
    if isinstance(source, str):
        return load_vector(_resolve(source, base_dir), dim)
    vector = np.asarray(source, dtype=np.float64)
    if vector.shape != (dim,):
        raise ConfigException(
            f"Vector has length {vector.size}, expected {dim}", details={"dim": dim}
        )
    return vector


# ---------------------------------------------------------------------------
# activation descriptors
# ---------------------------------------------------------------------------


def _single_key(desc: dict[str, Any]) -> tuple[str, Any]:
    if len(desc) != 1:
        raise ConfigException(
            "Activation descriptor must have exactly one key", details={"keys": list(desc)}
        )
    return next(iter(desc.items()))


def _pair(value: Any, name: str) -> tuple[Any, Any]:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigException(f"'{name}' needs a list of two descriptors")
    return value[0], value[1]


def _weighted(value: Any) -> list[tuple[float, Any]]:
    if not isinstance(value, list) or not value:
        raise ConfigException("'convex' needs a list of [weight, descriptor] pairs")
    items = []
    for entry in value:
        weight, desc = _pair(entry, "convex")
        items.append((float(weight), desc))
    return items


def parse_scalar_activation(desc: Any) -> sa.ScalarActivation:
    """
    Build a scalar activation from a catalog key or a combinator mapping.

    Raises:
        ConfigException: If the descriptor is malformed
        InvalidActivationException: If a key is unknown or a closure rule is violated
    """
    if isinstance(desc, str):
        return sa.from_key(desc)
    if not isinstance(desc, dict):
        raise ConfigException(f"Unsupported scalar activation descriptor: {desc!r}")

    name, value = _single_key(desc)
    if name == "scale":
        if not isinstance(value, dict) or "activation" not in value:
            raise ConfigException("'scale' needs {activation, alpha, beta}")
        return sa.scale(
            parse_scalar_activation(value["activation"]),
            float(value.get("alpha", 1.0)),
            float(value.get("beta", 1.0)),
        )
    if name == "convex":
        return sa.convex_combination(
            [(w, parse_scalar_activation(d)) for w, d in _weighted(value)]
        )
    if name == "complement":
        return sa.complement(parse_scalar_activation(value))
    if name in ("compose", "half_difference", "reflected_compose"):
        first, second = _pair(value, name)
        builder = {
            "compose": sa.compose,
            "half_difference": sa.half_difference,
            "reflected_compose": sa.reflected_compose,
        }[name]
        return builder(parse_scalar_activation(first), parse_scalar_activation(second))
    raise ConfigException(f"Unknown scalar combinator '{name}'")


def parse_activation(desc: Any, dim: int, base_dir: Path | None = None) -> ops.ActivationOperator:
    """
    Build an activation operator on R^dim from its descriptor.

    Raises:
        ConfigException: If the descriptor is malformed or its dimension does not match
        InvalidActivationException: If a key is unknown or a closure rule is violated
    """
    base_dir = base_dir or Path.cwd()
    if isinstance(desc, str):
        return ops.uniform(sa.from_key(desc), dim)
    if not isinstance(desc, dict):
        raise ConfigException(f"Unsupported activation descriptor: {desc!r}")

    name, value = _single_key(desc)
    if name == "separable":
        if not isinstance(value, list) or len(value) != dim:
            raise ConfigException(
                f"'separable' needs {dim} scalar descriptors", details={"dim": dim}
            )
        return ops.separable([parse_scalar_activation(d) for d in value])
    if name == "softmax":
        if int(value) != dim:
            raise ConfigException(f"softmax dimension {value} does not match {dim}")
        return ops.softmax(dim)
    if name == "sandwich":
        if not isinstance(value, dict) or "L" not in value or "inner" not in value:
            raise ConfigException("'sandwich' needs {L, inner}")
        raw_L = value["L"]
        L = (
            load_matrix(_resolve(raw_L, base_dir))
            if isinstance(raw_L, str)
            else np.atleast_2d(np.asarray(raw_L, dtype=np.float64))
        )
        if L.shape[1] != dim:
            raise ConfigException(
                f"Sandwich matrix must have {dim} columns", details={"shape": list(L.shape)}
            )
        return ops.make_sandwich(L, parse_activation(value["inner"], int(L.shape[0]), base_dir))
    if name == "convex":
        return ops.convex_combination(
            [(w, parse_activation(d, dim, base_dir)) for w, d in _weighted(value)]
        )
    if name == "complement":
        return ops.complement(parse_activation(value, dim, base_dir))
    if name == "half_difference":
        first, second = _pair(value, name)
        return ops.half_difference(
            parse_activation(first, dim, base_dir), parse_activation(second, dim, base_dir)
        )
    # a scalar combinator applied coordinatewise
    return ops.uniform(parse_scalar_activation(desc), dim)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def build_layer(layer: LayerConfig, base_dir: Path) -> Layer:
    W = _matrix(layer.weights, (layer.rows, layer.cols), base_dir)
    b = np.zeros(layer.rows) if layer.bias is None else _vector(layer.bias, layer.rows, base_dir)
    R = parse_activation(layer.activation, layer.rows, base_dir)
    return Layer(W=W, b=b, R=R)


def build_network(config: ExperimentConfig, base_dir: Path | None = None) -> Network:
    """
    Build the network an experiment describes.

    Raises:
        ConfigException: If a layer cannot be built
    """
    base_dir = base_dir or Path.cwd()
    try:
        layers = [build_layer(layer, base_dir) for layer in config.network.layers]
        return Network.from_layers(layers)
    except ConfigException:
        raise
    except ProxNetException as e:
        raise ConfigException(e.message, details=e.details) from e
    except (TypeError, ValueError) as e:
        raise ConfigException(f"Malformed network: {str(e)}") from e


def read_yaml(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigException(f"Config file not found: {path}", details={"path": str(path)})
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigException(f"Invalid YAML in {path}: {str(e)}") from e
    if not isinstance(raw, dict):
        raise ConfigException(f"Config {path} must be a mapping")
    return raw


def load_config(
    path: str | Path,
    seed: int | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
) -> ExperimentConfig:
    """
    Read and validate an experiment file, applying command-line overrides.

    Raises:
        ConfigException: If the file is missing, not YAML or fails validation
    """
    raw = read_yaml(path)
    if seed is not None:
        raw["seed"] = seed
    stop = dict(raw.get("stop") or {})
    if tol is not None:
        stop["tol"] = tol
    if max_iter is not None:
        stop["max_iter"] = max_iter
    if stop:
        raw["stop"] = stop
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigException(
            f"Invalid config at '{location}': {first['msg']}",
            details={"errors": e.error_count()},
        ) from e


def _start_point(config: ExperimentConfig, dim: int, base_dir: Path) -> FloatArray:
    x0 = config.start.x0
    if x0 == "zeros":
        return np.zeros(dim)
    if x0 == "random":
        return np.random.default_rng(config.seed).uniform(-1.0, 1.0, size=dim)
    return _vector(x0, dim, base_dir)


def load_experiment(
    path: str | Path,
    seed: int | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
) -> LoadedExperiment:
    """
    Load a config and build its network, starting point and reference point.

    Raises:
        ConfigException: On any malformed input
    """
    path = Path(path)
    config = load_config(path, seed=seed, tol=tol, max_iter=max_iter)
    base_dir = path.resolve().parent
    network = build_network(config, base_dir)
    x0 = _start_point(config, network.dim, base_dir)
    x_ref = None if config.reference is None else _vector(config.reference, network.dim, base_dir)
    logger.debug("Experiment loaded from %s: %s", path, "; ".join(network.describe()))
    return LoadedExperiment(
        config=config, base_dir=base_dir, network=network, x0=x0, x_ref=x_ref
    )
