"""
Dense linear-algebra helpers shared by the network, certifier and VI checker.

Spectral norms use a full SVD for small matrices and power iteration on MᵀM otherwise.
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from proxnet.core.config import settings
from proxnet.core.exceptions import DimensionMismatchException

FloatArray = NDArray[np.float64]


def as_vector(x: Sequence[float] | FloatArray, dim: int | None = None) -> FloatArray:
    """
    Convert input to a 1-d float64 array, optionally checking its length.

    Args:
        x: Vector-like input
        dim: Expected length, if any

    Returns:
        1-d float64 array

    Raises:
        DimensionMismatchException: If x is not 1-d or has the wrong length
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatchException(
            "Expected a vector", details={"shape": list(arr.shape)}
        )
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchException(
            f"Expected vector of length {dim}, got {arr.shape[0]}",
            details={"expected": dim, "actual": int(arr.shape[0])},
        )
    return arr


def as_matrix(m: Sequence[Sequence[float]] | FloatArray) -> FloatArray:
    """Convert input to a 2-d float64 array."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchException(
            "Expected a matrix", details={"shape": list(arr.shape)}
        )
    return arr


def power_iteration_norm(
    m: FloatArray,
    tol: float | None = None,
    max_iter: int | None = None,
    seed: int = 0,
) -> float:
    """
    Largest singular value via power iteration on MᵀM.

    Args:
        m: Matrix
        tol: Relative change in the eigenvalue estimate that stops the loop
        max_iter: Iteration cap
        seed: Seed of the starting vector

    Returns:
        Estimate of ‖M‖₂
    """
    tol = settings.SPECTRAL_NORM_TOL if tol is None else tol
    max_iter = settings.SPECTRAL_NORM_MAX_ITER if max_iter is None else max_iter

    n = m.shape[1]
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    x /= np.linalg.norm(x)

    lam = 0.0
    for _ in range(max_iter):
        y = m.T @ (m @ x)
        y_norm = float(np.linalg.norm(y))
        if y_norm == 0.0:
            # start vector in the kernel; MᵀM may still be nonzero
            x = rng.normal(size=n)
            x /= np.linalg.norm(x)
            continue
        lam_new = float(x @ y)
        x = y / y_norm
        if abs(lam_new - lam) <= tol * max(lam_new, 1.0):
            lam = lam_new
            break
        lam = lam_new

    return float(np.sqrt(max(lam, 0.0)))


def spectral_norm(m: FloatArray) -> float:
    """
    Spectral norm ‖M‖₂ of a dense matrix.

    Args:
        m: Matrix (any shape, empty allowed)

    Returns:
        Largest singular value, 0 for empty or all-zero matrices
    """
    m = as_matrix(m)
    if m.size == 0 or not np.any(m):
        return 0.0
    if max(m.shape) <= settings.SVD_FALLBACK_DIM:
        return float(np.linalg.norm(m, ord=2))
    return power_iteration_norm(m)


def batched_spectral_norms(stack: FloatArray) -> FloatArray:
    """Spectral norms of a stack of matrices shaped (k, rows, cols)."""
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def chain_product(weights: Sequence[FloatArray], i: int, k: int) -> FloatArray:
    """
    Composite W_i ∘ … ∘ W_{k+1} of a 1-indexed weight chain.

    Args:
        weights: W_1, W_2, … (weights[0] is W_1)
        i: Index of the outermost factor
        k: Index just below the innermost factor (k < i)

    Returns:
        The explicitly multiplied matrix W_i ⋯ W_{k+1}
    """
    if not 0 <= k < i <= len(weights):
        raise DimensionMismatchException(
            "Invalid composite range", details={"i": i, "k": k, "m": len(weights)}
        )
    product = weights[k]
    for j in range(k + 1, i):
        product = weights[j] @ product
    return product


def check_chain(weights: Sequence[FloatArray]) -> None:
    """
    Verify that consecutive weights compose (cols of W_{i+1} = rows of W_i).

    Raises:
        DimensionMismatchException: On the first broken link
    """
    if not weights:
        raise DimensionMismatchException("Weight chain is empty")
    for idx in range(1, len(weights)):
        if weights[idx].shape[1] != weights[idx - 1].shape[0]:
            raise DimensionMismatchException(
                f"W_{idx + 1} does not accept the output of W_{idx}",
                details={
                    "previous_shape": list(weights[idx - 1].shape),
                    "shape": list(weights[idx].shape),
                },
            )


def symmetric_part_eigenvalues(m: FloatArray) -> FloatArray:
    """Ascending eigenvalues of (M + Mᵀ)/2 for a square matrix."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchException(
            "Matrix must be square", details={"shape": list(m.shape)}
        )
    return np.linalg.eigvalsh(0.5 * (m + m.T))
