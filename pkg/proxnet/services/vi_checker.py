"""
Variational-inequality view of network fixed points.

A block point (x_1, …, x_m) with x_i ∈ H_i solves the system

    b_i ∈ x_i − W_i x_{i-1} + ∂φ_i(x_i),   x_0 = x_m,

exactly when x_i = T_i x_{i-1} for every i. Fixed points x of T lift to solutions
(T_1 x, T_2 T_1 x, …, x), and the solutions are the fixed points of the block map
p ↦ (R_i(W_i x_{i-1} + b_i))_i built from the cyclic shift S and block weights Wblk.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from proxnet.core.config import settings
from proxnet.core.exceptions import DimensionMismatchException
from proxnet.core.logging import get_logger
from proxnet.schemas.certificate import Certificate
from proxnet.schemas.reports import (
    BlockSolveReport,
    ExistenceReport,
    MonotonicityReport,
    VIResidualReport,
)
from proxnet.services.certify import certify_network
from proxnet.services.network import Network
from proxnet.utils.linalg import FloatArray, as_vector

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class BlockPoint:
    """Components x_1, …, x_m, one per layer output space."""

    components: tuple[FloatArray, ...]

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[float] | FloatArray]) -> BlockPoint:
        return cls(tuple(as_vector(v).copy() for v in vectors))

    def check(self, net: Network) -> None:
        """
        Raises:
            DimensionMismatchException: If the components do not match H_1, …, H_m
        """
        expected = net.dims[1:]
        actual = [c.shape[0] for c in self.components]
        if actual != expected:
            raise DimensionMismatchException(
                "Block point does not match the network",
                details={"expected": expected, "actual": actual},
            )

    def concat(self) -> FloatArray:
        return np.concatenate(self.components)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True, eq=False)
class BlockOperators:
    """The cyclic shift S and block weights Wblk on the concatenated block space."""

    S: FloatArray
    Wblk: FloatArray
    offsets: tuple[int, ...]

    @property
    def WS(self) -> FloatArray:
        return self.Wblk @ self.S

    def split(self, v: FloatArray) -> tuple[FloatArray, ...]:
        return tuple(v[self.offsets[i] : self.offsets[i + 1]] for i in range(len(self.offsets) - 1))


def build_block_operators(net: Network) -> BlockOperators:
    """
    Explicit matrices of S: (x_1, …, x_m) ↦ (x_m, x_1, …, x_{m-1}) and
    Wblk = diag(W_1, …, W_m), so that Wblk S p = (W_1 x_m, W_2 x_1, …, W_m x_{m-1}).
    """
    dims = net.dims[1:]
    offsets = tuple(int(v) for v in np.cumsum([0] + dims))
    total = offsets[-1]
    S = np.zeros((total, total))
    m = net.depth
    row = 0
    for j in range(m):
        # block j of the shifted vector is x_{j-1}, with x_0 = x_m
        src = (j - 1) % m
        size = dims[src]
        S[row : row + size, offsets[src] : offsets[src] + size] = np.eye(size)
        row += size
    Wblk = block_diag(*net.weights)
    return BlockOperators(S=S, Wblk=Wblk, offsets=offsets)


def vi_residual(net: Network, p: BlockPoint) -> VIResidualReport:
    """
    Residuals r_i = ‖x_i − T_i x_{i-1}‖ with x_0 = x_m.

    Raises:
        DimensionMismatchException: If p does not match the network
    """
    p.check(net)
    comps = p.components
    residuals = []
    for i, layer in enumerate(net.layers):
        prev = comps[i - 1]  # i = 0 wraps to x_m
        residuals.append(float(np.linalg.norm(comps[i] - layer.apply(prev))))
    return VIResidualReport(residuals=residuals, max_residual=max(residuals))


def lift_fixed_point(net: Network, xm: Sequence[float] | FloatArray) -> BlockPoint:
    """
    (T_1 xm, T_2 T_1 xm, …, T_{m-1} ⋯ T_1 xm, xm).

    Raises:
        DimensionMismatchException: If xm does not live in H_0
    """
    x = as_vector(xm, net.dim)
    outputs = net.layer_outputs(x)
    return BlockPoint(tuple(outputs[:-1]) + (x.copy(),))


def block_map(net: Network, p: BlockPoint, ops: BlockOperators | None = None) -> BlockPoint:
    """All layers at once: x_i ↦ R_i(W_i x_{i-1} + b_i)."""
    p.check(net)
    ops = ops or build_block_operators(net)
    pre = ops.WS @ p.concat()
    parts = ops.split(pre)
    return BlockPoint(
        tuple(layer.R.apply(part + layer.b) for layer, part in zip(net.layers, parts, strict=True))
    )


def solve_block(
    net: Network,
    p0: BlockPoint,
    tol: float = 1e-12,
    max_iter: int = 10000,
) -> tuple[BlockPoint, BlockSolveReport]:
    """
    Iterate the block map from p0 until consecutive block points differ by at most tol.
    """
    ops = build_block_operators(net)
    p = p0
    step = math.inf
    for k in range(1, max_iter + 1):
        nxt = block_map(net, p, ops)
        step = float(np.linalg.norm(nxt.concat() - p.concat()))
        p = nxt
        if step <= tol:
            return p, BlockSolveReport(iterations=k, converged=True, last_step=step)
    return p, BlockSolveReport(iterations=max_iter, converged=False, last_step=step)


def monotonicity_check(net: Network) -> MonotonicityReport:
    """
    Largest eigenvalue of WS + (WS)ᵀ; monotone when it is at most 2.
    """
    ws = build_block_operators(net).WS
    eig = np.linalg.eigvalsh(ws + ws.T)
    top = float(eig[-1])
    return MonotonicityReport(
        monotone=top <= 2.0 + settings.MONOTONE_TOL,
        max_eigenvalue=top,
        min_eigenvalue=float(eig[0]),
        margin=2.0 - top,
    )


def _range_radius(net: Network) -> float | None:
    """Radius of a ball containing ran T, propagated from the last layer with bounded range."""
    last: tuple[int, float] | None = None
    for idx, layer in enumerate(net.layers, start=1):
        radii = [layer.R.range_radius]
        if layer.is_zero:
            radii.append(float(np.linalg.norm(layer.R.apply(layer.b))))
        radius = min(radii)
        if math.isfinite(radius):
            last = (idx, radius)
    if last is None:
        return None
    idx, radius = last
    if idx == net.depth:
        return radius
    return net.output_norm_bound(idx + 1, net.depth, radius)


def existence_flags(net: Network, certificate: Certificate | None = None) -> ExistenceReport:
    """
    Finite-dimensionally checkable conditions for solutions to exist.

    Args:
        net: Network
        certificate: Averagedness certificate; computed when omitted

    Returns:
        ExistenceReport with each flag evaluated independently
    """
    ops = build_block_operators(net)
    radius = _range_radius(net)
    nonexpansive = max(net.weight_norms) <= 1.0 + settings.CERT_SLACK
    sigma_min = float(np.linalg.svd(ops.S - ops.Wblk.T, compute_uv=False)[-1])
    operators = [layer.R for layer in net.layers]
    monotone = monotonicity_check(net).monotone
    certificate = certificate or certify_network(net)

    report = ExistenceReport(
        range_bounded=radius is not None,
        range_radius=radius,
        some_domain_bounded=any(r.range_bounded for r in operators),
        weights_nonexpansive=nonexpansive,
        kernel_min_singular_value=sigma_min,
        trivial_kernel=nonexpansive and sigma_min > settings.KERNEL_TOL,
        conjugate_full_domain=nonexpansive and all(r.conjugate_full_domain for r in operators),
        all_domains_bounded=all(r.range_bounded for r in operators),
        monotone=monotone,
        averagedness_certified=certificate.certified,
    )
    logger.debug("Existence flags", extra={"status": str(report.flags())})
    return report
