"""
Scalar activation functions that are proximity operators.

Every member is increasing, 1-Lipschitz and vanishes at 0, which makes it the proximity
operator of a convex potential φ minimal at 0. The catalog stores both ρ and φ in closed form;
combinator nodes build new members from existing ones and only carry ρ.

Usage:
    from proxnet.services.scalar_activations import from_key, complement

    relu = from_key("relu")
    soft = complement(from_key("satlin"))
    soft.eval(2.0)  # 1.0
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, xlogy

from proxnet.core.config import settings
from proxnet.core.exceptions import (
    BracketingException,
    InvalidActivationException,
    PotentialUnavailableException,
)

ArrayLike = float | np.ndarray

_WEIGHT_SUM_TOL = 1e-12


class ActivationKind(str, Enum):
    """Catalog tags plus the combinator node tag."""

    IDENTITY = "identity"
    SATLIN = "satlin"
    RELU = "relu"
    PRELU = "prelu"
    BENT_IDENTITY = "bent_identity"
    ISRU = "isru"
    ISRLU = "isrlu"
    ARCTAN2PI = "arctan2pi"
    TANH = "tanh"
    SIGMOID_SHIFTED = "sigmoid_shifted"
    ELLIOT = "elliot"
    ARCSINH = "arcsinh"
    LOGARITHMIC = "logarithmic"
    SOFT_THRESHOLD = "soft_threshold"
    COMBINATOR = "combinator"


class Combinator(str, Enum):
    """Closure operations that keep the class of scalar activations stable."""

    SCALE = "scale"
    CONVEX = "convex"
    COMPOSE = "compose"
    COMPLEMENT = "complement"
    HALF_DIFFERENCE = "half_difference"
    REFLECTED_COMPOSE = "reflected_compose"


@dataclass(frozen=True)
class PotentialDomain:
    """Interval dom φ; endpoints may be infinite."""

    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    upper_closed: bool = False

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def closure(self) -> tuple[float, float]:
        return self.lower, self.upper

    def contains(self, y: float) -> bool:
        """Membership test honouring open and closed endpoints."""
        if y < self.lower or (y == self.lower and not self.lower_closed):
            return False
        if y > self.upper or (y == self.upper and not self.upper_closed):
            return False
        return True

    def describe(self) -> str:
        left = "[" if self.lower_closed else "("
        right = "]" if self.upper_closed else ")"
        return f"{left}{self.lower:g}, {self.upper:g}{right}"


REAL_LINE = PotentialDomain()


@dataclass(frozen=True)
class ScalarActivation:
    """
    A scalar activation ρ = prox_φ together with domain metadata for φ.

    Catalog members carry closed forms for ρ and φ; combinator nodes carry their operands in
    `children` and evaluate ρ recursively.
    """

    kind: ActivationKind
    name: str
    potential_domain: PotentialDomain = REAL_LINE
    potential_domain_bounded: bool = False
    conjugate_full_domain: bool = False
    params: tuple[float, ...] = ()
    combinator: Combinator | None = None
    children: tuple[ScalarActivation, ...] = field(default=())

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.eval(x)

    def eval(self, x: ArrayLike) -> ArrayLike:
        """
        Evaluate ρ(x).

        Args:
            x: Finite scalar or array (evaluated elementwise)

        Returns:
            ρ(x) with the shape of x; a float for scalar input
        """
        arr = np.asarray(x, dtype=np.float64)
        if self.kind is ActivationKind.COMBINATOR:
            out = _eval_combinator(self, arr)
        else:
            out = _RHO[self.kind](arr, self.params)
        return float(out) if np.ndim(out) == 0 else out

    def potential_eval(self, y: ArrayLike) -> ArrayLike:
        """
        Evaluate the potential φ(y), +inf outside dom φ.

        Raises:
            PotentialUnavailableException: For combinator nodes
        """
        if self.kind is ActivationKind.COMBINATOR:
            raise PotentialUnavailableException(details={"activation": self.name})
        arr = np.asarray(y, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = _PHI[self.kind](arr, self.params)
        return float(out) if np.ndim(out) == 0 else out

    def prox_oracle(self, x: float, tol: float | None = None) -> float:
        """Brute-force prox of the stored potential; see `prox_oracle`."""
        return prox_oracle(self, x, tol)

    @property
    def has_potential(self) -> bool:
        return self.kind is not ActivationKind.COMBINATOR

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def _isru_gap(y: np.ndarray) -> np.ndarray:
    # 1 − y²/2 − √(1−y²) written as (1−√(1−y²))²/2
    s = np.sqrt(np.clip(1.0 - y * y, 0.0, None))
    return 0.5 * (1.0 - s) ** 2


def _bent_identity(x: np.ndarray) -> np.ndarray:
    r = np.sqrt(x * x + 1.0)
    # x + √(x²+1) without cancellation for x < 0
    t = np.where(x >= 0.0, x + r, 1.0 / (r - x))
    return 0.5 * (t - 1.0)


def _phi_bent_identity(y: np.ndarray) -> np.ndarray:
    inside = y > -0.5
    arg = np.where(inside, 2.0 * y + 1.0, 1.0)
    return np.where(inside, 0.5 * y - 0.25 * np.log(arg), np.inf)


def _phi_isrlu(y: np.ndarray) -> np.ndarray:
    return np.where(y >= 0.0, 0.0, np.where(y >= -1.0, _isru_gap(y), np.inf))


def _phi_arctan2pi(y: np.ndarray) -> np.ndarray:
    inside = np.abs(y) < 1.0
    c = np.cos(0.5 * np.pi * np.where(inside, y, 0.0))
    return np.where(inside, -(2.0 / np.pi) * np.log(c) - 0.5 * y * y, np.inf)


def _phi_tanh(y: np.ndarray) -> np.ndarray:
    inside = np.abs(y) <= 1.0
    ys = np.where(inside, y, 0.0)
    val = 0.5 * (xlogy(1.0 + ys, 1.0 + ys) + xlogy(1.0 - ys, 1.0 - ys) - ys * ys)
    return np.where(inside, val, np.inf)


def _phi_sigmoid_shifted(y: np.ndarray) -> np.ndarray:
    inside = np.abs(y) <= 0.5
    ys = np.where(inside, y, 0.0)
    p, q = 0.5 + ys, 0.5 - ys
    # shifted by ln 2 + 1/8 so that φ(0) = 0
    val = xlogy(p, p) + xlogy(q, q) - 0.5 * (ys * ys + 0.25) + math.log(2.0) + 0.125
    return np.where(inside, val, np.inf)


def _phi_elliot(y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    inside = a < 1.0
    aa = np.where(inside, a, 0.0)
    return np.where(inside, -aa - np.log1p(-aa) - 0.5 * aa * aa, np.inf)


def _phi_logarithmic(y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    return np.expm1(a) - a - 0.5 * a * a


def _interval_indicator(y: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.where((y >= lo) & (y <= hi), 0.0, np.inf)


Formula = Callable[[np.ndarray, tuple[float, ...]], np.ndarray]

_RHO: dict[ActivationKind, Formula] = {
    ActivationKind.IDENTITY: lambda x, p: x.copy(),
    ActivationKind.SATLIN: lambda x, p: np.clip(x, -1.0, 1.0),
    ActivationKind.RELU: lambda x, p: np.maximum(x, 0.0),
    ActivationKind.PRELU: lambda x, p: np.where(x > 0.0, x, p[0] * x),
    ActivationKind.BENT_IDENTITY: lambda x, p: _bent_identity(x),
    ActivationKind.ISRU: lambda x, p: x / np.sqrt(1.0 + x * x),
    ActivationKind.ISRLU: lambda x, p: np.where(x >= 0.0, x, x / np.sqrt(1.0 + x * x)),
    ActivationKind.ARCTAN2PI: lambda x, p: (2.0 / np.pi) * np.arctan(x),
    ActivationKind.TANH: lambda x, p: np.tanh(x),
    ActivationKind.SIGMOID_SHIFTED: lambda x, p: expit(x) - 0.5,
    ActivationKind.ELLIOT: lambda x, p: x / (1.0 + np.abs(x)),
    ActivationKind.ARCSINH: lambda x, p: np.arcsinh(x),
    ActivationKind.LOGARITHMIC: lambda x, p: np.sign(x) * np.log1p(np.abs(x)),
    ActivationKind.SOFT_THRESHOLD: lambda x, p: np.sign(x) * np.maximum(np.abs(x) - 1.0, 0.0),
}

_PHI: dict[ActivationKind, Formula] = {
    ActivationKind.IDENTITY: lambda y, p: np.zeros_like(y),
    ActivationKind.SATLIN: lambda y, p: _interval_indicator(y, -1.0, 1.0),
    ActivationKind.RELU: lambda y, p: _interval_indicator(y, 0.0, np.inf),
    ActivationKind.PRELU: lambda y, p: np.where(y > 0.0, 0.0, 0.5 * (1.0 / p[0] - 1.0) * y * y),
    ActivationKind.BENT_IDENTITY: lambda y, p: _phi_bent_identity(y),
    ActivationKind.ISRU: lambda y, p: np.where(np.abs(y) <= 1.0, _isru_gap(y), np.inf),
    ActivationKind.ISRLU: lambda y, p: _phi_isrlu(y),
    ActivationKind.ARCTAN2PI: lambda y, p: _phi_arctan2pi(y),
    ActivationKind.TANH: lambda y, p: _phi_tanh(y),
    ActivationKind.SIGMOID_SHIFTED: lambda y, p: _phi_sigmoid_shifted(y),
    ActivationKind.ELLIOT: lambda y, p: _phi_elliot(y),
    ActivationKind.ARCSINH: lambda y, p: np.cosh(y) - 1.0 - 0.5 * y * y,
    ActivationKind.LOGARITHMIC: lambda y, p: _phi_logarithmic(y),
    ActivationKind.SOFT_THRESHOLD: lambda y, p: np.abs(y),
}


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _member(
    kind: ActivationKind,
    domain: PotentialDomain,
    conjugate_full_domain: bool,
    params: tuple[float, ...] = (),
    name: str | None = None,
) -> ScalarActivation:
    return ScalarActivation(
        kind=kind,
        name=name or kind.value,
        potential_domain=domain,
        potential_domain_bounded=domain.bounded,
        conjugate_full_domain=conjugate_full_domain,
        params=params,
    )


def identity() -> ScalarActivation:
    """ρ = Id, φ = 0."""
    return _member(ActivationKind.IDENTITY, REAL_LINE, False)


def satlin() -> ScalarActivation:
    """Saturated linear unit: projection onto [−1, 1]."""
    return _member(ActivationKind.SATLIN, PotentialDomain(-1.0, 1.0, True, True), True)


def relu() -> ScalarActivation:
    """Rectified linear unit: projection onto [0, +inf)."""
    return _member(ActivationKind.RELU, PotentialDomain(0.0, math.inf, True, False), False)


def prelu(alpha: float) -> ScalarActivation:
    """
    Parametric ReLU with negative slope alpha.

    Args:
        alpha: Slope in (0, 1]; alpha = 1 collapses to the identity

    Raises:
        InvalidActivationException: If alpha lies outside (0, 1]
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidActivationException(
            "prelu slope must lie in (0, 1]", details={"alpha": alpha}
        )
    if alpha == 1.0:
        return identity()
    return _member(
        ActivationKind.PRELU, REAL_LINE, False, params=(float(alpha),), name=f"prelu:{alpha:g}"
    )


def bent_identity() -> ScalarActivation:
    return _member(ActivationKind.BENT_IDENTITY, PotentialDomain(-0.5, math.inf), False)


def isru() -> ScalarActivation:
    """Inverse square root unit x/√(1+x²)."""
    return _member(ActivationKind.ISRU, PotentialDomain(-1.0, 1.0, True, True), True)


def isrlu() -> ScalarActivation:
    """Inverse square root linear unit."""
    return _member(ActivationKind.ISRLU, PotentialDomain(-1.0, math.inf, True, False), False)


def arctan2pi() -> ScalarActivation:
    return _member(ActivationKind.ARCTAN2PI, PotentialDomain(-1.0, 1.0), True)


def tanh() -> ScalarActivation:
    return _member(ActivationKind.TANH, PotentialDomain(-1.0, 1.0, True, True), True)


def sigmoid_shifted() -> ScalarActivation:
    """Logistic sigmoid minus 1/2, i.e. (1/2)tanh(x/2)."""
    return _member(ActivationKind.SIGMOID_SHIFTED, PotentialDomain(-0.5, 0.5, True, True), True)


def elliot() -> ScalarActivation:
    """Elliot activation x/(1+|x|)."""
    return _member(ActivationKind.ELLIOT, PotentialDomain(-1.0, 1.0), True)


def arcsinh() -> ScalarActivation:
    return _member(ActivationKind.ARCSINH, REAL_LINE, True)


def logarithmic() -> ScalarActivation:
    """sign(x)·ln(1+|x|)."""
    return _member(ActivationKind.LOGARITHMIC, REAL_LINE, True)


def soft_threshold() -> ScalarActivation:
    """Soft thresholder at level 1, the prox of |·|."""
    return _member(ActivationKind.SOFT_THRESHOLD, REAL_LINE, False)


_CATALOG: dict[str, Callable[..., ScalarActivation]] = {
    "identity": identity,
    "satlin": satlin,
    "relu": relu,
    "prelu": prelu,
    "bent_identity": bent_identity,
    "isru": isru,
    "isrlu": isrlu,
    "arctan2pi": arctan2pi,
    "tanh": tanh,
    "sigmoid_shifted": sigmoid_shifted,
    "elliot": elliot,
    "arcsinh": arcsinh,
    "logarithmic": logarithmic,
    "soft_threshold": soft_threshold,
}

_PARAMETRIC = {"prelu"}


def catalog_keys() -> list[str]:
    """Names of all catalog members (parameterised members take ':param')."""
    return list(_CATALOG)


def parametric_keys() -> list[str]:
    """Catalog members that need a ":param" suffix."""
    return sorted(_PARAMETRIC)


def from_key(key: str) -> ScalarActivation:
    """
    Build a catalog activation from its string key.

    Args:
        key: "name" or "name:param", e.g. "tanh", "prelu:0.25"

    Returns:
        The catalog member

    Raises:
        InvalidActivationException: If the name is unknown or the parameter is malformed
    """
    name, _, raw = key.strip().partition(":")
    builder = _CATALOG.get(name)
    if builder is None:
        raise InvalidActivationException(
            f"Unknown activation '{name}'", details={"known": catalog_keys()}
        )
    if name in _PARAMETRIC:
        if not raw:
            raise InvalidActivationException(f"Activation '{name}' needs a parameter")
        try:
            value = float(raw)
        except ValueError as e:
            raise InvalidActivationException(
                f"Malformed parameter '{raw}' for '{name}'"
            ) from e
        return builder(value)
    if raw:
        raise InvalidActivationException(f"Activation '{name}' takes no parameter")
    return builder()


# ---------------------------------------------------------------------------
# prox oracle
# ---------------------------------------------------------------------------


def prox_oracle(a: ScalarActivation, x: float, tol: float | None = None) -> float:
    """
    Minimize y ↦ φ(y) + (x−y)²/2 numerically.

    The search interval is dom φ ∩ [x−|x|−pad, x+|x|+pad]; the objective is strictly convex,
    so bounded Brent minimization (golden-section with parabolic steps) finds the unique
    minimizer to absolute accuracy tol.

    Args:
        a: Catalog activation (combinators carry no potential)
        x: Point at which to evaluate the prox
        tol: Absolute accuracy, positive

    Returns:
        prox_φ(x) as found by the minimizer

    Raises:
        BracketingException: If the bracket is empty or excludes 0
        PotentialUnavailableException: For combinator nodes
    """
    tol = settings.PROX_ORACLE_TOL if tol is None else tol
    if tol <= 0:
        raise BracketingException("Oracle tolerance must be positive", details={"tol": tol})
    if not a.has_potential:
        raise PotentialUnavailableException(details={"activation": a.name})

    dom = a.potential_domain
    if not dom.contains(0.0) or dom.lower > dom.upper:
        raise BracketingException(
            "Potential domain must contain 0", details={"domain": dom.describe()}
        )

    pad = settings.PROX_BRACKET_PAD
    lo = max(dom.lower, x - abs(x) - pad)
    hi = min(dom.upper, x + abs(x) + pad)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise BracketingException(
            "Cannot bracket the prox minimizer",
            details={"x": x, "domain": dom.describe()},
        )
    if lo == hi:
        return float(lo)

    def objective(y: float) -> float:
        return float(a.potential_eval(y)) + 0.5 * (x - y) ** 2

    result = minimize_scalar(
        objective, bounds=(lo, hi), method="bounded", options={"xatol": tol}
    )
    return float(result.x)


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def _eval_combinator(a: ScalarActivation, x: np.ndarray) -> np.ndarray:
    op = a.combinator
    kids = a.children
    if op is Combinator.SCALE:
        alpha, beta = a.params
        return alpha * np.asarray(kids[0].eval(beta * x))
    if op is Combinator.CONVEX:
        total = np.zeros_like(x)
        for w, child in zip(a.params, kids, strict=True):
            total = total + w * np.asarray(child.eval(x))
        return total
    if op is Combinator.COMPOSE:
        return np.asarray(kids[0].eval(kids[1].eval(x)))
    if op is Combinator.COMPLEMENT:
        return x - np.asarray(kids[0].eval(x))
    if op is Combinator.HALF_DIFFERENCE:
        return 0.5 * (np.asarray(kids[0].eval(x)) - np.asarray(kids[1].eval(x)) + x)
    if op is Combinator.REFLECTED_COMPOSE:
        inner = np.asarray(kids[1].eval(x))
        return np.asarray(kids[0].eval(2.0 * inner - x)) + x - inner
    raise InvalidActivationException(f"Unknown combinator {op}")


def _node(
    combinator: Combinator,
    children: Sequence[ScalarActivation],
    name: str,
    domain: PotentialDomain = REAL_LINE,
    params: tuple[float, ...] = (),
) -> ScalarActivation:
    # dom φ has the same closure as ran ρ; an enclosure of the range is recorded
    return ScalarActivation(
        kind=ActivationKind.COMBINATOR,
        name=name,
        potential_domain=domain,
        potential_domain_bounded=domain.bounded,
        conjugate_full_domain=False,
        params=params,
        combinator=combinator,
        children=tuple(children),
    )


def scale(a: ScalarActivation, alpha: float, beta: float) -> ScalarActivation:
    """
    x ↦ alpha·ρ(beta·x).

    Raises:
        InvalidActivationException: If alpha or beta is not positive or alpha·beta > 1
    """
    if alpha <= 0 or beta <= 0:
        raise InvalidActivationException(
            "scale factors must be positive", details={"alpha": alpha, "beta": beta}
        )
    if alpha * beta > 1.0 + _WEIGHT_SUM_TOL:
        raise InvalidActivationException(
            "scale requires alpha*beta <= 1", details={"alpha": alpha, "beta": beta}
        )
    if alpha == 1.0 and beta == 1.0:
        return a
    dom = a.potential_domain
    return _node(
        Combinator.SCALE,
        [a],
        f"scale({a.name},{alpha:g},{beta:g})",
        PotentialDomain(alpha * dom.lower, alpha * dom.upper, True, True),
        params=(float(alpha), float(beta)),
    )


def convex_combination(items: Sequence[tuple[float, ScalarActivation]]) -> ScalarActivation:
    """
    Pointwise weighted sum Σ wᵢρᵢ.

    Raises:
        InvalidActivationException: If a weight is outside (0, 1] or the weights do not sum to 1
    """
    if not items:
        raise InvalidActivationException("convex combination needs at least one term")
    weights = [float(w) for w, _ in items]
    if any(not 0.0 < w <= 1.0 for w in weights):
        raise InvalidActivationException(
            "convex weights must lie in (0, 1]", details={"weights": weights}
        )
    if abs(math.fsum(weights) - 1.0) > _WEIGHT_SUM_TOL:
        raise InvalidActivationException(
            "convex weights must sum to 1", details={"weights": weights}
        )
    if len(items) == 1:
        return items[0][1]

    children = [a for _, a in items]
    lower = math.fsum(w * a.potential_domain.lower for w, a in items)
    upper = math.fsum(w * a.potential_domain.upper for w, a in items)
    name = "convex(" + ",".join(f"{w:g}*{a.name}" for w, a in items) + ")"
    return _node(
        Combinator.CONVEX,
        children,
        name,
        PotentialDomain(lower, upper, True, True),
        params=tuple(weights),
    )


def compose(a1: ScalarActivation, a2: ScalarActivation) -> ScalarActivation:
    """x ↦ ρ₁(ρ₂(x))."""
    outer = a1.potential_domain
    inner = a2.potential_domain
    lower = float(a1.eval(inner.lower)) if math.isfinite(inner.lower) else outer.lower
    upper = float(a1.eval(inner.upper)) if math.isfinite(inner.upper) else outer.upper
    return _node(
        Combinator.COMPOSE,
        [a1, a2],
        f"compose({a1.name},{a2.name})",
        PotentialDomain(lower, upper, True, True),
    )


def complement(a: ScalarActivation) -> ScalarActivation:
    """x ↦ x − ρ(x)."""
    return _node(Combinator.COMPLEMENT, [a], f"complement({a.name})")


def half_difference(a1: ScalarActivation, a2: ScalarActivation) -> ScalarActivation:
    """x ↦ (ρ₁(x) − ρ₂(x) + x)/2."""
    return _node(Combinator.HALF_DIFFERENCE, [a1, a2], f"half_difference({a1.name},{a2.name})")


def reflected_compose(a1: ScalarActivation, a2: ScalarActivation) -> ScalarActivation:
    """x ↦ ρ₁(2ρ₂(x) − x) + x − ρ₂(x)."""
    return _node(
        Combinator.REFLECTED_COMPOSE, [a1, a2], f"reflected_compose({a1.name},{a2.name})"
    )
