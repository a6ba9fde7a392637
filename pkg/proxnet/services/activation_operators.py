"""
Activation operators on finite-dimensional spaces.

Each operator is the proximity operator of a convex potential minimal at 0, which makes it
firmly nonexpansive with R0 = 0. Supported structures:
- separable: one scalar activation per canonical coordinate
- softmax: softmax(x) − u with u the uniform probability vector
- sandwich: Lᵀ∘R∘L with ‖L‖ ≤ 1
- convex combination, complement Id − R, half difference (R₁ − R₂ + Id)/2

Usage:
    from proxnet.services.activation_operators import separable, softmax, make_sandwich

    relu2 = separable(["relu", "relu"])
    relu2.apply([-1.0, 2.0])  # array([0., 2.])
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from proxnet.core.exceptions import DimensionMismatchException, InvalidParameterException
from proxnet.services.scalar_activations import ScalarActivation, from_key
from proxnet.utils.linalg import FloatArray, as_matrix, as_vector, spectral_norm

_NORM_SLACK = 1e-12
_WEIGHT_SUM_TOL = 1e-12


class OperatorStructure(str, Enum):
    """How an activation operator is assembled."""

    SEPARABLE = "separable"
    SOFTMAX = "softmax"
    SANDWICH = "sandwich"
    CONVEX_COMBINATION = "convex_combination"
    COMPLEMENT = "complement"
    HALF_DIFFERENCE = "half_difference"


class ActivationOperator(ABC):
    """Abstract base class for activation operators on R^dim."""

    structure: OperatorStructure

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise InvalidParameterException(
                "Operator dimension must be positive", details={"dim": dim}
            )
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def apply(self, x: Sequence[float] | FloatArray) -> FloatArray:
        """
        Evaluate the operator.

        Args:
            x: Vector of length dim

        Returns:
            R(x) as a new array

        Raises:
            DimensionMismatchException: If x has the wrong length
        """
        return self._apply(as_vector(x, self._dim))

    def __call__(self, x: Sequence[float] | FloatArray) -> FloatArray:
        return self.apply(x)

    @abstractmethod
    def _apply(self, x: FloatArray) -> FloatArray:
        """Evaluate on a validated vector."""

    @property
    @abstractmethod
    def range_radius(self) -> float:
        """Radius of a centred ball containing ran R; inf when not known to be bounded."""

    @property
    def range_bounded(self) -> bool:
        """Bounded range, equivalently bounded potential domain."""
        return math.isfinite(self.range_radius)

    @property
    def conjugate_full_domain(self) -> bool:
        """True when the conjugate potential is finite everywhere; False when unknown."""
        return False

    @abstractmethod
    def describe(self) -> str:
        """Short human-readable description."""

    def __repr__(self) -> str:
        return f"<{type(self).__name__} dim={self._dim} {self.describe()}>"


class SeparableOperator(ActivationOperator):
    """Coordinatewise scalar activations in the canonical basis."""

    structure = OperatorStructure.SEPARABLE

    def __init__(self, activations: Sequence[ScalarActivation]) -> None:
        super().__init__(len(activations))
        self._activations = tuple(activations)
        groups: dict[ScalarActivation, list[int]] = {}
        for idx, act in enumerate(self._activations):
            groups.setdefault(act, []).append(idx)
        # coordinates sharing an activation are evaluated in one vectorised call
        self._groups = tuple(
            (act, np.asarray(idx, dtype=np.intp)) for act, idx in groups.items()
        )

    @property
    def activations(self) -> tuple[ScalarActivation, ...]:
        return self._activations

    def _apply(self, x: FloatArray) -> FloatArray:
        out = np.empty_like(x)
        for act, idx in self._groups:
            out[idx] = act.eval(x[idx])
        return out

    def range_box(self) -> tuple[FloatArray, FloatArray]:
        """Per-coordinate closure of the potential domains (lower, upper)."""
        lows = np.array([a.potential_domain.lower for a in self._activations])
        highs = np.array([a.potential_domain.upper for a in self._activations])
        return lows, highs

    @property
    def range_radius(self) -> float:
        if not all(a.potential_domain_bounded for a in self._activations):
            return math.inf
        lows, highs = self.range_box()
        return float(np.linalg.norm(np.maximum(np.abs(lows), np.abs(highs))))

    @property
    def conjugate_full_domain(self) -> bool:
        return all(a.conjugate_full_domain for a in self._activations)

    def describe(self) -> str:
        names = [a.name for a in self._activations]
        if len(set(names)) == 1:
            return f"separable[{names[0]} x{len(names)}]"
        return "separable[" + ",".join(names) + "]"


class SoftmaxOperator(ActivationOperator):
    """x ↦ softmax(x) − u, u = (1, …, 1)/N."""

    structure = OperatorStructure.SOFTMAX

    def _apply(self, x: FloatArray) -> FloatArray:
        e = np.exp(x - np.max(x))
        return e / e.sum() - 1.0 / self._dim

    @property
    def range_radius(self) -> float:
        # farthest points of the shifted simplex are its vertices
        return math.sqrt(1.0 - 1.0 / self._dim)

    @property
    def conjugate_full_domain(self) -> bool:
        return True

    def describe(self) -> str:
        return f"softmax[{self._dim}]"


class SandwichOperator(ActivationOperator):
    """x ↦ Lᵀ R(Lx) for ‖L‖ ≤ 1."""

    structure = OperatorStructure.SANDWICH

    def __init__(self, L: FloatArray, inner: ActivationOperator) -> None:
        L = as_matrix(L)
        if L.shape[0] != inner.dim:
            raise DimensionMismatchException(
                "L must map into the inner operator's space",
                details={"L_shape": list(L.shape), "inner_dim": inner.dim},
            )
        norm = spectral_norm(L)
        if norm > 1.0 + _NORM_SLACK:
            raise InvalidParameterException(
                "Sandwich matrix must have spectral norm at most 1", details={"norm": norm}
            )
        super().__init__(L.shape[1])
        self._L = L.copy()
        self._L.setflags(write=False)
        self._L_norm = norm
        self._inner = inner

    @property
    def L(self) -> FloatArray:
        return self._L

    @property
    def inner(self) -> ActivationOperator:
        return self._inner

    def _apply(self, x: FloatArray) -> FloatArray:
        return self._L.T @ self._inner.apply(self._L @ x)

    @property
    def range_radius(self) -> float:
        if self._L_norm == 0.0:
            return 0.0
        return self._L_norm * self._inner.range_radius

    def describe(self) -> str:
        return f"sandwich[{self._inner.describe()}]"


class ConvexCombinationOperator(ActivationOperator):
    """x ↦ Σ wᵢ Rᵢ x."""

    structure = OperatorStructure.CONVEX_COMBINATION

    def __init__(self, items: Sequence[tuple[float, ActivationOperator]]) -> None:
        if not items:
            raise InvalidParameterException("Convex combination needs at least one term")
        dims = {op.dim for _, op in items}
        if len(dims) != 1:
            raise DimensionMismatchException(
                "Combined operators must share a dimension", details={"dims": sorted(dims)}
            )
        weights = [float(w) for w, _ in items]
        if any(not 0.0 < w <= 1.0 for w in weights):
            raise InvalidParameterException(
                "Convex weights must lie in (0, 1]", details={"weights": weights}
            )
        if abs(math.fsum(weights) - 1.0) > _WEIGHT_SUM_TOL:
            raise InvalidParameterException(
                "Convex weights must sum to 1", details={"weights": weights}
            )
        super().__init__(dims.pop())
        self._items = tuple((w, op) for w, (_, op) in zip(weights, items, strict=True))

    def _apply(self, x: FloatArray) -> FloatArray:
        out = np.zeros_like(x)
        for w, op in self._items:
            out += w * op.apply(x)
        return out

    @property
    def range_radius(self) -> float:
        return math.fsum(w * op.range_radius for w, op in self._items)

    def describe(self) -> str:
        return "convex[" + ",".join(f"{w:g}*{op.describe()}" for w, op in self._items) + "]"


class ComplementOperator(ActivationOperator):
    """x ↦ x − Rx."""

    structure = OperatorStructure.COMPLEMENT

    def __init__(self, inner: ActivationOperator) -> None:
        super().__init__(inner.dim)
        self._inner = inner

    def _apply(self, x: FloatArray) -> FloatArray:
        return x - self._inner.apply(x)

    @property
    def range_radius(self) -> float:
        return math.inf

    def describe(self) -> str:
        return f"complement[{self._inner.describe()}]"


class HalfDifferenceOperator(ActivationOperator):
    """x ↦ (R₁x − R₂x + x)/2."""

    structure = OperatorStructure.HALF_DIFFERENCE

    def __init__(self, first: ActivationOperator, second: ActivationOperator) -> None:
        if first.dim != second.dim:
            raise DimensionMismatchException(
                "Operators must share a dimension",
                details={"dims": [first.dim, second.dim]},
            )
        super().__init__(first.dim)
        self._first = first
        self._second = second

    def _apply(self, x: FloatArray) -> FloatArray:
        return 0.5 * (self._first.apply(x) - self._second.apply(x) + x)

    @property
    def range_radius(self) -> float:
        return math.inf

    def describe(self) -> str:
        return f"half_difference[{self._first.describe()},{self._second.describe()}]"


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def separable(activations: Sequence[ScalarActivation | str]) -> SeparableOperator:
    """Build a separable operator from activations or catalog keys."""
    return SeparableOperator(
        [from_key(a) if isinstance(a, str) else a for a in activations]
    )


def uniform(activation: ScalarActivation | str, dim: int) -> SeparableOperator:
    """The same scalar activation on every coordinate."""
    act = from_key(activation) if isinstance(activation, str) else activation
    return SeparableOperator([act] * dim)


def softmax(dim: int) -> SoftmaxOperator:
    return SoftmaxOperator(dim)


def make_sandwich(L: FloatArray, inner: ActivationOperator) -> SandwichOperator:
    """
    Lᵀ∘R∘L for a matrix L mapping the result space into the inner space.

    Raises:
        InvalidParameterException: If ‖L‖ > 1
        DimensionMismatchException: If L does not map into dim(inner)
    """
    return SandwichOperator(L, inner)


def convex_combination(
    items: Sequence[tuple[float, ActivationOperator]],
) -> ActivationOperator:
    if len(items) == 1:
        w, op = items[0]
        if abs(w - 1.0) <= _WEIGHT_SUM_TOL:
            return op
    return ConvexCombinationOperator(items)


def complement(inner: ActivationOperator) -> ComplementOperator:
    return ComplementOperator(inner)


def half_difference(
    first: ActivationOperator, second: ActivationOperator
) -> HalfDifferenceOperator:
    return HalfDifferenceOperator(first, second)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FirmNonexpansiveReport:
    """Outcome of a sampled firm-nonexpansiveness test."""

    passed: bool
    worst_violation: float
    samples: int


def check_firm_nonexpansive(
    r: ActivationOperator,
    samples: int,
    tol: float = 1e-10,
    seed: int = 0,
    radius: float = 5.0,
) -> FirmNonexpansiveReport:
    """
    Sample ‖Rx−Ry‖² − (‖x−y‖² − ‖x−y−Rx+Ry‖²) on random pairs.

    Args:
        r: Operator under test
        samples: Number of random pairs, at least 1
        tol: Largest violation still counted as a pass
        seed: Seed of the pair generator
        radius: Pairs are drawn uniformly from [−radius, radius]^dim

    Returns:
        FirmNonexpansiveReport with the largest violation found
    """
    if samples < 1:
        raise InvalidParameterException("samples must be at least 1", details={"samples": samples})
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(samples):
        x = rng.uniform(-radius, radius, size=r.dim)
        y = rng.uniform(-radius, radius, size=r.dim)
        d = x - y
        rd = r.apply(x) - r.apply(y)
        violation = float(rd @ rd - (d @ d - (d - rd) @ (d - rd)))
        worst = max(worst, violation)
    return FirmNonexpansiveReport(passed=worst <= tol, worst_violation=worst, samples=samples)


def triangle_gap_slack(
    x: Sequence[float] | FloatArray, y: Sequence[float] | FloatArray
) -> float:
    """
    (‖x‖+‖y‖−‖x+y‖)(‖x‖+‖y‖) − (‖x‖‖y‖ − ⟨x,y⟩); nonnegative for all x, y.

    Raises:
        DimensionMismatchException: If x and y differ in length
    """
    xv = as_vector(x)
    yv = as_vector(y, xv.shape[0])
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    nxy = float(np.linalg.norm(xv + yv))
    return (nx + ny - nxy) * (nx + ny) - (nx * ny - float(xv @ yv))
