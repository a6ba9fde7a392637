"""
Layered prox-affine networks.

A layer is T_i: x ↦ R_i(W_i x + b_i); a network composes T = T_m ∘ … ∘ T_1 on a dimension chain
H_0 → H_1 → … → H_m with H_m = H_0, so that T can be iterated.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from proxnet.core.exceptions import (
    DimensionMismatchException,
    InvalidParameterException,
)
from proxnet.services.activation_operators import ActivationOperator
from proxnet.utils.linalg import FloatArray, as_matrix, as_vector, spectral_norm


@dataclass(frozen=True, eq=False)
class Layer:
    """One prox-affine layer x ↦ R(Wx + b)."""

    W: FloatArray
    b: FloatArray
    R: ActivationOperator

    def __post_init__(self) -> None:
        W = as_matrix(self.W).copy()
        if not np.all(np.isfinite(W)):
            raise InvalidParameterException("Weight matrix has non-finite entries")
        b = as_vector(self.b).copy()
        if b.shape[0] != W.shape[0]:
            raise DimensionMismatchException(
                "Bias length must equal the number of weight rows",
                details={"rows": int(W.shape[0]), "bias": int(b.shape[0])},
            )
        if self.R.dim != W.shape[0]:
            raise DimensionMismatchException(
                "Activation dimension must equal the number of weight rows",
                details={"rows": int(W.shape[0]), "activation": self.R.dim},
            )
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def dim_in(self) -> int:
        return int(self.W.shape[1])

    @property
    def dim_out(self) -> int:
        return int(self.W.shape[0])

    @cached_property
    def weight_norm(self) -> float:
        return spectral_norm(self.W)

    @cached_property
    def bias_norm(self) -> float:
        return float(np.linalg.norm(self.b))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.W)

    def apply(self, x: FloatArray) -> FloatArray:
        return self.R.apply(self.W @ x + self.b)


@dataclass(frozen=True, eq=False)
class Network:
    """Ordered layers T_1, …, T_m with H_m = H_0."""

    layers: tuple[Layer, ...] = field(default=())

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise InvalidParameterException("A network needs at least one layer")
        for idx in range(1, len(layers)):
            if layers[idx].dim_in != layers[idx - 1].dim_out:
                raise DimensionMismatchException(
                    f"Layer {idx + 1} input does not match layer {idx} output",
                    details={
                        "layer": idx + 1,
                        "dim_in": layers[idx].dim_in,
                        "previous_dim_out": layers[idx - 1].dim_out,
                    },
                )
        if layers[-1].dim_out != layers[0].dim_in:
            raise DimensionMismatchException(
                "Last layer must map back into the input space",
                details={"dim_in": layers[0].dim_in, "dim_out": layers[-1].dim_out},
            )
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_layers(cls, layers: Sequence[Layer]) -> Network:
        return cls(tuple(layers))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def dim(self) -> int:
        return self.layers[0].dim_in

    @property
    def dims(self) -> list[int]:
        """Dimensions of H_0, H_1, …, H_m."""
        return [self.dim] + [layer.dim_out for layer in self.layers]

    @property
    def weights(self) -> list[FloatArray]:
        return [layer.W for layer in self.layers]

    @property
    def weight_norms(self) -> list[float]:
        return [layer.weight_norm for layer in self.layers]

    @property
    def bias_norms(self) -> list[float]:
        return [layer.bias_norm for layer in self.layers]

    def forward(self, x: Sequence[float] | FloatArray) -> FloatArray:
        """
        Evaluate T = T_m ∘ … ∘ T_1.

        Raises:
            DimensionMismatchException: If x does not live in H_0
        """
        out = as_vector(x, self.dim)
        for layer in self.layers:
            out = layer.apply(out)
        return out

    def __call__(self, x: Sequence[float] | FloatArray) -> FloatArray:
        return self.forward(x)

    def layer_outputs(self, x: Sequence[float] | FloatArray) -> list[FloatArray]:
        """
        Intermediate signals (T_1 x, T_2 T_1 x, …, T x).

        Raises:
            DimensionMismatchException: If x does not live in H_0
        """
        out = as_vector(x, self.dim)
        signals = []
        for layer in self.layers:
            out = layer.apply(out)
            signals.append(out)
        return signals

    def output_norm_bound(self, j: int, i: int, x_norm: float) -> float:
        """
        Bound on ‖(T_i ∘ … ∘ T_j)x‖ given ‖x‖.

        Returns ‖x‖ Π_{k=j}^{i} ‖W_k‖ + Σ_{q=j}^{i} ‖b_q‖ Π_{k=q+1}^{i} ‖W_k‖ using spectral norms.

        Args:
            j: First layer (1-indexed)
            i: Last layer (1-indexed), j ≤ i ≤ m
            x_norm: Norm of the input, nonnegative

        Raises:
            InvalidParameterException: If the layer range is invalid or x_norm < 0
        """
        if not 1 <= j <= i <= self.depth:
            raise InvalidParameterException(
                "Invalid layer range", details={"from": j, "to": i, "depth": self.depth}
            )
        if x_norm < 0:
            raise InvalidParameterException(
                "x_norm must be nonnegative", details={"x_norm": x_norm}
            )
        bound = x_norm
        for layer in self.layers[j - 1 : i]:
            bound = layer.weight_norm * bound + layer.bias_norm
        return bound

    def describe(self) -> list[str]:
        return [
            f"T_{k}: {layer.dim_in}->{layer.dim_out} |W|={layer.weight_norm:.6g} "
            f"|b|={layer.bias_norm:.6g} R={layer.R.describe()}"
            for k, layer in enumerate(self.layers, start=1)
        ]
