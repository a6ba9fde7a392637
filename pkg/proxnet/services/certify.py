"""
Averagedness certificates for prox-affine networks.

For a weight chain W_1, …, W_{m+1} the θ-sequence is

    θ_0 = 1,  θ_i = Σ_{k=0}^{i-1} θ_k ‖W_i ⋯ W_{k+1}‖,

with composite norms taken on explicitly multiplied matrices. With W = W_{m+1} ⋯ W_1 and
μ = λ_min((W + Wᵀ)/2), the chain satisfies the averagedness condition at α when

    (zero factor)  some W_i = 0, or
    (norm bound)   ‖W − 2^{m+1}(1−α)Id‖ − ‖W‖ + 2θ_{m+1} ≤ 2^{m+1}α, or
    (eta)          α < 1, θ_{m+1} ≤ 2^{m+1}α and for some η ∈ [0, α/((1−α)θ_{m+1})]
                   αθ_{m+1} + (1−α)(‖Id − ηW‖ − η‖W‖)(θ_{m+1} − ‖W‖) ≤ 2^m(2α−1) + (1−α)μ.

A network of m layers whose weights satisfy the condition is α-averaged whatever its biases and
activation operators.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from proxnet.core.config import settings
from proxnet.core.exceptions import DimensionMismatchException, InvalidParameterException
from proxnet.core.logging import get_logger
from proxnet.schemas.certificate import Certificate, ConditionUsed, LayerwiseCertificate
from proxnet.services.network import Network
from proxnet.utils.linalg import (
    FloatArray,
    as_matrix,
    batched_spectral_norms,
    chain_product,
    check_chain,
    spectral_norm,
    symmetric_part_eigenvalues,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class NormEstimate:
    """Sampled lower bound of the mixed operator norm, with the block vector attaining it."""

    lower_bound: float
    samples: int
    witness: tuple[FloatArray, ...]


@dataclass(frozen=True)
class _ChainData:
    """Quantities of a weight chain that do not depend on α."""

    weights: tuple[FloatArray, ...]
    theta: tuple[float, ...]
    product: FloatArray
    product_norm: float
    mu: float
    has_zero: bool

    @property
    def length(self) -> int:
        return len(self.weights)


def _prepare(weights: Sequence[FloatArray]) -> _ChainData:
    mats = tuple(as_matrix(w) for w in weights)
    check_chain(mats)
    product = chain_product(mats, len(mats), 0)
    if product.shape[0] != product.shape[1]:
        raise DimensionMismatchException(
            "The weight chain must map H_0 back into H_0",
            details={"product_shape": list(product.shape)},
        )
    return _ChainData(
        weights=mats,
        theta=tuple(theta_sequence(mats)),
        product=product,
        product_norm=spectral_norm(product),
        mu=mu_lower(product),
        has_zero=any(not np.any(w) for w in mats),
    )


def _check_alpha(alpha: float) -> None:
    if not 0.5 <= alpha <= 1.0:
        raise InvalidParameterException("alpha must lie in [1/2, 1]", details={"alpha": alpha})


def composite_norms(weights: Sequence[FloatArray]) -> dict[tuple[int, int], float]:
    """
    All composite norms ‖W_i ⋯ W_{k+1}‖ for 0 ≤ k < i ≤ len(weights).

    Returns:
        Mapping (i, k) -> spectral norm
    """
    mats = [as_matrix(w) for w in weights]
    check_chain(mats)
    norms: dict[tuple[int, int], float] = {}
    for i in range(1, len(mats) + 1):
        product = mats[i - 1]
        norms[(i, i - 1)] = spectral_norm(product)
        for k in range(i - 2, -1, -1):
            product = product @ mats[k]
            norms[(i, k)] = spectral_norm(product)
    return norms


def theta_sequence(weights: Sequence[FloatArray]) -> list[float]:
    """
    θ_0, …, θ_n for a weight chain W_1, …, W_n.

    Args:
        weights: W_1 first; consecutive matrices must compose

    Returns:
        List of n + 1 nonnegative reals with θ_0 = 1

    Raises:
        DimensionMismatchException: If the chain does not compose
    """
    norms = composite_norms(weights)
    theta = [1.0]
    for i in range(1, len(weights) + 1):
        theta.append(math.fsum(theta[k] * norms[(i, k)] for k in range(i)))
    return theta


def mu_lower(W: FloatArray) -> float:
    """
    inf of ⟨Wx, x⟩ over the unit sphere, i.e. the smallest eigenvalue of (W + Wᵀ)/2.

    Raises:
        DimensionMismatchException: If W is not square
    """
    return float(symmetric_part_eigenvalues(W)[0])


def _norm_bound_holds(data: _ChainData, alpha: float, slack: float) -> bool:
    scale = 2.0**data.length
    n = data.product.shape[0]
    shifted = spectral_norm(data.product - scale * (1.0 - alpha) * np.eye(n))
    lhs = shifted - data.product_norm + 2.0 * data.theta[-1]
    return lhs <= scale * alpha + slack


def _eta_lhs(data: _ChainData, alpha: float, etas: FloatArray) -> FloatArray:
    n = data.product.shape[0]
    stack = np.eye(n)[None, :, :] - etas[:, None, None] * data.product[None, :, :]
    gap = batched_spectral_norms(stack) - etas * data.product_norm
    theta_last = data.theta[-1]
    return alpha * theta_last + (1.0 - alpha) * gap * (theta_last - data.product_norm)


def _eta_condition_holds(
    data: _ChainData, alpha: float, eta_grid: int, slack: float
) -> tuple[bool, float | None]:
    scale = 2.0**data.length
    theta_last = data.theta[-1]
    if theta_last > scale * alpha + slack:
        return False, None

    rhs = 0.5 * scale * (2.0 * alpha - 1.0) + (1.0 - alpha) * data.mu
    eta_max = alpha / ((1.0 - alpha) * theta_last)
    grid = np.linspace(0.0, eta_max, eta_grid)
    lhs = _eta_lhs(data, alpha, grid)
    hits = np.flatnonzero(lhs <= rhs + slack)
    if hits.size:
        return True, float(grid[hits[0]])

    # one refinement pass around the best grid point
    best = int(np.argmin(lhs))
    fine = np.linspace(grid[max(best - 1, 0)], grid[min(best + 1, eta_grid - 1)], eta_grid)
    lhs = _eta_lhs(data, alpha, fine)
    hits = np.flatnonzero(lhs <= rhs + slack)
    if hits.size:
        return True, float(fine[hits[0]])
    return False, None


def check_norm_bound(
    weights: Sequence[FloatArray], alpha: float, slack: float | None = None
) -> bool:
    """
    Norm-bound sufficient condition at α.

    Args:
        weights: W_1, …, W_{m+1}; the product must be square
        alpha: Averagedness constant in [1/2, 1]
        slack: Floating-point slack on the inequality (defaults to settings.CERT_SLACK)

    Returns:
        True when ‖W − 2^{m+1}(1−α)Id‖ − ‖W‖ + 2θ_{m+1} ≤ 2^{m+1}α

    Raises:
        DimensionMismatchException: If the chain does not compose into a square product
        InvalidParameterException: If alpha is outside [1/2, 1]
    """
    _check_alpha(alpha)
    slack = settings.CERT_SLACK if slack is None else slack
    return _norm_bound_holds(_prepare(weights), alpha, slack)


def check_eta_condition(
    weights: Sequence[FloatArray],
    alpha: float,
    eta_grid: int | None = None,
    slack: float | None = None,
) -> tuple[bool, float | None]:
    """
    Eta sufficient condition at α, searched on a uniform η grid.

    Args:
        weights: W_1, …, W_{m+1}, all nonzero
        alpha: Averagedness constant in [1/2, 1)
        eta_grid: Number of grid points on [0, α/((1−α)θ_{m+1})], at least 2
        slack: Floating-point slack on the inequalities

    Returns:
        (holds, eta) with eta the first grid point satisfying both inequalities

    Raises:
        InvalidParameterException: If alpha = 1, a weight is zero or eta_grid < 2
    """
    _check_alpha(alpha)
    if alpha >= 1.0:
        raise InvalidParameterException("The eta condition requires alpha < 1")
    eta_grid = settings.ETA_GRID_POINTS if eta_grid is None else eta_grid
    if eta_grid < 2:
        raise InvalidParameterException(
            "eta_grid must be at least 2", details={"eta_grid": eta_grid}
        )
    data = _prepare(weights)
    if data.has_zero:
        raise InvalidParameterException("The eta condition requires nonzero weights")
    slack = settings.CERT_SLACK if slack is None else slack
    return _eta_condition_holds(data, alpha, eta_grid, slack)


def alpha_grid(step: float) -> FloatArray:
    """Uniform grid on [1/2, 1] with the given step (endpoints exact)."""
    if not 0.0 < step <= 0.5:
        raise InvalidParameterException("alpha step must lie in (0, 1/2]", details={"step": step})
    cells = max(1, round(0.5 / step))
    return np.linspace(0.5, 1.0, cells + 1)


def certify_network(
    net: Network,
    alpha_step: float | None = None,
    eta_grid: int | None = None,
) -> Certificate:
    """
    Smallest grid α for which the network's weights satisfy a sufficient condition.

    Conditions are tried in the order zero factor, norm bound, eta condition at each α.

    Args:
        net: Network of m layers
        alpha_step: Grid step on [1/2, 1] (defaults to settings.ALPHA_GRID_STEP)
        eta_grid: Points of the eta search

    Returns:
        Certificate; condition_used is `none` and alpha absent when nothing certifies
    """
    alpha_step = settings.ALPHA_GRID_STEP if alpha_step is None else alpha_step
    eta_grid = settings.ETA_GRID_POINTS if eta_grid is None else eta_grid
    slack = settings.CERT_SLACK
    data = _prepare(net.weights)
    theta = list(data.theta)

    if data.has_zero:
        logger.info("Certified by a zero weight", extra={"alpha": 0.5})
        return Certificate(
            alpha=0.5, condition_used=ConditionUsed.ZERO_FACTOR, theta=theta, mu=data.mu
        )

    for alpha in alpha_grid(alpha_step):
        a = float(alpha)
        if _norm_bound_holds(data, a, slack):
            logger.info("Certified by the norm bound", extra={"alpha": a})
            return Certificate(
                alpha=a, condition_used=ConditionUsed.NORM_BOUND, theta=theta, mu=data.mu
            )
        if a < 1.0:
            ok, eta = _eta_condition_holds(data, a, eta_grid, slack)
            if ok:
                logger.info("Certified by the eta condition", extra={"alpha": a})
                return Certificate(
                    alpha=a,
                    condition_used=ConditionUsed.ETA_CONDITION,
                    theta=theta,
                    eta=eta,
                    mu=data.mu,
                )

    logger.info("No sufficient condition holds on the alpha grid")
    return Certificate(alpha=None, condition_used=ConditionUsed.NONE, theta=theta, mu=data.mu)


def composite_layerwise_alpha(betas: Sequence[float]) -> float:
    """
    Averagedness constant of a composition of β_i-averaged operators.

    α = κ/(1+κ) with κ = Σ β_i/(1−β_i).
    """
    if not betas or any(not 0.0 < b < 1.0 for b in betas):
        raise InvalidParameterException("betas must lie in (0, 1)", details={"betas": list(betas)})
    kappa = math.fsum(b / (1.0 - b) for b in betas)
    return kappa / (1.0 + kappa)


def certify_layerwise(net: Network, beta_step: float | None = None) -> LayerwiseCertificate:
    """
    Smallest grid β_i ∈ (0, 1) with ‖W_i − 2(1−β_i)Id‖ + ‖W_i‖ ≤ 2β_i for every layer.

    Each such layer is β_i-averaged, and so is its composition with the constant reported in
    composite_alpha.

    Raises:
        DimensionMismatchException: If the layers are not square of equal dimension
    """
    beta_step = settings.BETA_GRID_STEP if beta_step is None else beta_step
    dims = set(net.dims)
    if len(dims) != 1:
        raise DimensionMismatchException(
            "Layerwise certificates need equal layer dimensions", details={"dims": net.dims}
        )
    n = dims.pop()
    cells = max(2, round(1.0 / beta_step))
    grid = np.linspace(0.0, 1.0, cells + 1)[1:-1]
    eye = np.eye(n)

    betas: list[float] = []
    for idx, layer in enumerate(net.layers, start=1):
        stack = layer.W[None, :, :] - (2.0 * (1.0 - grid))[:, None, None] * eye[None, :, :]
        lhs = batched_spectral_norms(stack) + layer.weight_norm
        hits = np.flatnonzero(lhs <= 2.0 * grid + settings.CERT_SLACK)
        if not hits.size:
            return LayerwiseCertificate(failed_layer=idx)
        betas.append(float(grid[hits[0]]))
    return LayerwiseCertificate(betas=betas, composite_alpha=composite_layerwise_alpha(betas))


def m_norm_lower_bound(
    weights: Sequence[FloatArray],
    alpha: float,
    samples: int | None = None,
    seed: int | None = None,
) -> NormEstimate:
    """
    Sampled lower bound of the mixed norm behind the operator-norm sufficient condition.

    With Mx = Σ_{i=0}^{m} θ_i (W_{m+1} ⋯ W_{i+1}) x_i, each sample x = (x_0, …, x_m) has unit
    blocks and contributes (‖Mx − 2^{m+1}(1−α)x_0‖ + ‖Mx‖)/(2^{m+1}α). All sign patterns are
    used when the total dimension is small, random unit blocks are drawn in addition. A value
    above 1 refutes the condition; a value at most 1 proves nothing.

    Args:
        weights: W_1, …, W_{m+1}
        alpha: Averagedness constant in [1/2, 1]
        samples: Number of random samples, at least 1
        seed: Seed of the sampler

    Returns:
        NormEstimate with the best sample as witness
    """
    _check_alpha(alpha)
    samples = settings.NORM_SAMPLES if samples is None else samples
    seed = settings.DEFAULT_SEED if seed is None else seed
    if samples < 1:
        raise InvalidParameterException("samples must be at least 1", details={"samples": samples})

    data = _prepare(weights)
    length = data.length
    dims = [w.shape[1] for w in data.weights]
    blocks = [data.theta[i] * chain_product(data.weights, length, i) for i in range(length)]
    offsets = np.cumsum([0] + dims)
    total = int(offsets[-1])

    rng = np.random.default_rng(seed)
    candidates = [rng.normal(size=(samples, total))]
    if total <= settings.SIGN_VERTEX_MAX_DIM:
        candidates.append(
            np.array(list(itertools.product((-1.0, 1.0), repeat=total)), dtype=np.float64)
        )
    X = np.vstack(candidates)
    for i in range(length):
        part = X[:, offsets[i] : offsets[i + 1]]
        part /= np.linalg.norm(part, axis=1, keepdims=True)

    Mx = sum(X[:, offsets[i] : offsets[i + 1]] @ blocks[i].T for i in range(length))
    scale = 2.0**length
    x0 = X[:, offsets[0] : offsets[1]]
    values = (
        np.linalg.norm(Mx - scale * (1.0 - alpha) * x0, axis=1) + np.linalg.norm(Mx, axis=1)
    ) / (scale * alpha)
    best = int(np.argmax(values))
    witness = tuple(X[best, offsets[i] : offsets[i + 1]].copy() for i in range(length))
    return NormEstimate(lower_bound=float(values[best]), samples=int(X.shape[0]), witness=witness)


def averagedness_violation(
    net: Network,
    alpha: float,
    samples: int = 500,
    seed: int = 0,
    radius: float = 5.0,
) -> float:
    """
    Largest ratio ‖Qx − Qy‖/‖x − y‖ over random pairs, Q = (1 − 1/α)Id + (1/α)T.

    T is α-averaged exactly when Q is nonexpansive, so a certified network gives ratios ≤ 1.
    """
    _check_alpha(alpha)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-radius, radius, size=net.dim)
        y = rng.uniform(-radius, radius, size=net.dim)
        qx = (1.0 - 1.0 / alpha) * x + net.forward(x) / alpha
        qy = (1.0 - 1.0 / alpha) * y + net.forward(y) / alpha
        gap = float(np.linalg.norm(x - y))
        if gap > 0.0:
            worst = max(worst, float(np.linalg.norm(qx - qy)) / gap)
    return worst
