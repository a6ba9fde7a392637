"""
Relaxed fixed-point iteration of prox-affine networks.

    x_{n+1} = x_n + λ_n (x_{m,n} − x_n),   x_{i,n} = T_{i,n} x_{i-1,n},  x_{0,n} = x_n

In the autonomous regime T_{i,n} = T_i. In the perturbed regime the layers vary with n and
converge to the limit layers at a summable rate; convergence is always judged by the residual of
the limit network.
"""

from __future__ import annotations

import math
import uuid
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from proxnet.core.config import settings
from proxnet.core.exceptions import (
    InvalidParameterException,
    MissingColumnException,
    ScheduleException,
)
from proxnet.core.logging import get_logger
from proxnet.schemas.schedule import PerturbationSchedule, RelaxationSchedule, StopCriteria
from proxnet.services.activation_operators import ActivationOperator
from proxnet.services.network import Network
from proxnet.utils.linalg import FloatArray, as_vector, spectral_norm

logger = get_logger(__name__)


class RunStatus(str, Enum):
    """Terminal status of a run."""

    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class IterationRow:
    """One iteration: λ_n, ‖x_{n+1} − x_n‖, residual at x_n, ‖x_n‖, ‖x_n − x_ref‖."""

    n: int
    lam: float
    step_norm: float
    residual: float
    x_norm: float
    dist_ref: float | None = None
    coupling_gap: float | None = None
    coupling_bound: float | None = None


@dataclass(eq=False)
class IterationTrace:
    """Rows of a run in increasing n plus its terminal status."""

    rows: list[IterationRow] = field(default_factory=list)
    x_ref: FloatArray | None = None
    final_dist_ref: float | None = None
    _status: RunStatus | None = None

    def append(self, row: IterationRow) -> None:
        if self.rows and row.n <= self.rows[-1].n:
            raise InvalidParameterException(
                "Trace rows must increase in n",
                details={"last": self.rows[-1].n, "new": row.n},
            )
        self.rows.append(row)

    @property
    def status(self) -> RunStatus | None:
        return self._status

    def set_status(self, status: RunStatus) -> None:
        if self._status is not None:
            raise InvalidParameterException(
                "Trace status is already set", details={"status": self._status.value}
            )
        self._status = status

    @property
    def iterations(self) -> int:
        return len(self.rows)

    @property
    def last_residual(self) -> float | None:
        return self.rows[-1].residual if self.rows else None

    @property
    def residual_decayed(self) -> bool:
        """Whether the last recorded residual is below the first."""
        return len(self.rows) > 1 and self.rows[-1].residual < self.rows[0].residual

    def column(self, name: str) -> list[float | None]:
        return [getattr(row, name) for row in self.rows]


@dataclass(frozen=True, eq=False)
class BoundSequences:
    """
    Deviation bounds of the perturbed layers, arrays shaped (m, N).

    chi/zeta bound a single perturbed layer: ‖T_{i,n}x − T_i x‖ ≤ χ_{i,n}‖x‖ + ζ_{i,n}.
    tau/theta bound the first i perturbed layers against the first i limit layers.
    """

    chi: FloatArray
    zeta: FloatArray
    tau: FloatArray
    theta: FloatArray

    @property
    def horizon(self) -> int:
        return int(self.chi.shape[1])

    @property
    def chi_partial_sums(self) -> FloatArray:
        return np.cumsum(self.chi, axis=1)

    @property
    def zeta_partial_sums(self) -> FloatArray:
        return np.cumsum(self.zeta, axis=1)

    @property
    def tau_partial_sums(self) -> FloatArray:
        return np.cumsum(self.tau, axis=1)

    @property
    def theta_partial_sums(self) -> FloatArray:
        return np.cumsum(self.theta, axis=1)


# ---------------------------------------------------------------------------
# perturbed layers
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PerturbationDirections:
    """Unit directions D_i (matrices), e_i (bias) and u_i (activation shift) per layer."""

    D: tuple[FloatArray, ...]
    e: tuple[FloatArray, ...]
    u: tuple[FloatArray, ...]


def perturbation_directions(net: Network, perturb: PerturbationSchedule) -> PerturbationDirections:
    """
    Normalized all-ones directions, or seeded random unit directions.
    """
    if perturb.directions == "ones":
        D = tuple(np.ones_like(layer.W) / math.sqrt(layer.W.size) for layer in net.layers)
        e = tuple(np.ones(layer.dim_out) / math.sqrt(layer.dim_out) for layer in net.layers)
        return PerturbationDirections(D=D, e=e, u=e)

    rng = np.random.default_rng(perturb.seed)
    mats, bias_dirs, shift_dirs = [], [], []
    for layer in net.layers:
        M = rng.normal(size=layer.W.shape)
        mats.append(M / spectral_norm(M))
        v = rng.normal(size=layer.dim_out)
        bias_dirs.append(v / np.linalg.norm(v))
        w = rng.normal(size=layer.dim_out)
        shift_dirs.append(w / np.linalg.norm(w))
    return PerturbationDirections(D=tuple(mats), e=tuple(bias_dirs), u=tuple(shift_dirs))


@dataclass(frozen=True, eq=False)
class PerturbedLayer:
    """T_{i,n}: x ↦ (1 − ρ_n) R_i(W_{i,n}x + b_{i,n}) + η_n u_i."""

    W: FloatArray
    b: FloatArray
    R: ActivationOperator
    shrink: float = 0.0
    shift: float = 0.0
    u: FloatArray | None = None

    def apply(self, x: FloatArray) -> FloatArray:
        out = self.R.apply(self.W @ x + self.b)
        if self.shrink:
            out = (1.0 - self.shrink) * out
        if self.shift and self.u is not None:
            out = out + self.shift * self.u
        return out


def realize_layers(
    net: Network, perturb: PerturbationSchedule, dirs: PerturbationDirections, n: int
) -> list[PerturbedLayer]:
    """The perturbed layers T_{1,n}, …, T_{m,n}; zero decay leaves a layer untouched."""
    omega, nu, rho, eta = perturb.omega(n), perturb.nu(n), perturb.rho(n), perturb.eta(n)
    realized = []
    for idx, layer in enumerate(net.layers):
        W = layer.W + omega * dirs.D[idx] if omega else layer.W
        b = layer.b + nu * dirs.e[idx] if nu else layer.b
        realized.append(PerturbedLayer(W=W, b=b, R=layer.R, shrink=rho, shift=eta, u=dirs.u[idx]))
    return realized


def apply_layers(layers: Sequence[PerturbedLayer], x: FloatArray) -> FloatArray:
    for layer in layers:
        x = layer.apply(x)
    return x


def _bound_column(
    net: Network,
    perturb: PerturbationSchedule,
    layers: Sequence[PerturbedLayer],
    n: int,
) -> tuple[list[float], list[float], list[float], list[float]]:
    omega, nu, rho, eta = perturb.omega(n), perturb.nu(n), perturb.rho(n), perturb.eta(n)
    chi: list[float] = []
    zeta: list[float] = []
    for layer in layers:
        if rho:
            chi.append(rho * spectral_norm(layer.W) + omega)
            zeta.append(rho * float(np.linalg.norm(layer.b)) + eta + nu)
        else:
            chi.append(omega)
            zeta.append(eta + nu)

    tau = [chi[0]]
    theta = [zeta[0]]
    w_prod = net.layers[0].weight_norm
    b_sum = net.layers[0].bias_norm
    for i in range(1, net.depth):
        w_next = net.layers[i].weight_norm
        tau.append((w_next + chi[i]) * tau[-1] + chi[i] * w_prod)
        theta.append((w_next + chi[i]) * theta[-1] + chi[i] * b_sum + zeta[i])
        w_prod *= w_next
        b_sum = w_next * b_sum + net.layers[i].bias_norm
    return chi, zeta, tau, theta


def _stack_bounds(columns: list[tuple[list[float], ...]], depth: int) -> BoundSequences:
    if not columns:
        empty = np.zeros((depth, 0))
        return BoundSequences(chi=empty, zeta=empty.copy(), tau=empty.copy(), theta=empty.copy())
    arrays = [np.array([col[k] for col in columns]).T for k in range(4)]
    return BoundSequences(chi=arrays[0], zeta=arrays[1], tau=arrays[2], theta=arrays[3])


def bound_sequences(net: Network, perturb: PerturbationSchedule, horizon: int) -> BoundSequences:
    """
    χ, ζ, τ and θ for n < horizon.

    Raises:
        InvalidParameterException: If horizon < 1
    """
    if horizon < 1:
        raise InvalidParameterException("horizon must be at least 1", details={"horizon": horizon})
    dirs = perturbation_directions(net, perturb)
    columns = [
        _bound_column(net, perturb, realize_layers(net, perturb, dirs, n), n)
        for n in range(horizon)
    ]
    return _stack_bounds(columns, net.depth)


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------


def _checked_lambda(schedule: RelaxationSchedule, n: int) -> float:
    lam = schedule.lambda_at(n)
    if not schedule.contains(lam):
        raise ScheduleException(details={"n": n, "lambda": lam, "mode": schedule.mode.value})
    return lam


def _distance(x: FloatArray, x_ref: FloatArray | None) -> float | None:
    return None if x_ref is None else float(np.linalg.norm(x - x_ref))


def _finish(trace: IterationTrace, status: RunStatus, x: FloatArray, run_id: str) -> None:
    trace.set_status(status)
    trace.final_dist_ref = _distance(x, trace.x_ref)
    level = logger.warning if status is RunStatus.DIVERGED else logger.info
    level(
        "Run finished",
        extra={"run_id": run_id, "status": status.value, "iteration": trace.iterations},
    )


def iterate(
    net: Network,
    x0: Sequence[float] | FloatArray,
    schedule: RelaxationSchedule,
    stop: StopCriteria | None = None,
    x_ref: Sequence[float] | FloatArray | None = None,
) -> tuple[FloatArray, IterationTrace]:
    """
    Relaxed iteration of the network from x0.

    Stops when the residual ‖T x_n − x_n‖ is at most tol (and returns that x_n), when
    ‖x_{n+1}‖ exceeds divergence_norm, or after max_iter iterations.

    Args:
        net: Network to iterate
        x0: Starting point in H_0
        schedule: Relaxation parameters
        stop: Stopping rule (defaults from settings)
        x_ref: Optional reference point whose distances are recorded

    Returns:
        (final iterate, trace)

    Raises:
        ScheduleException: If the schedule leaves its declared interval
        DimensionMismatchException: If x0 or x_ref do not live in H_0
    """
    stop = stop or StopCriteria()
    x = as_vector(x0, net.dim).copy()
    ref = None if x_ref is None else as_vector(x_ref, net.dim)
    trace = IterationTrace(x_ref=ref)
    run_id = uuid.uuid4().hex[:8]
    logger.info(
        "Run started",
        extra={"run_id": run_id, "command": "iterate", "iteration": 0},
    )

    for n in range(stop.max_iter):
        lam = _checked_lambda(schedule, n)
        tx = net.layer_outputs(x)[-1]
        diff = tx - x
        residual = float(np.linalg.norm(diff))
        x_next = x + lam * diff
        trace.append(
            IterationRow(
                n=n,
                lam=lam,
                step_norm=float(np.linalg.norm(x_next - x)),
                residual=residual,
                x_norm=float(np.linalg.norm(x)),
                dist_ref=_distance(x, ref),
            )
        )
        if n % settings.LOG_EVERY == 0:
            logger.debug("Progress", extra={"run_id": run_id, "iteration": n})
        # the residual certifies x_n, not the step taken from it
        if residual <= stop.tol:
            _finish(trace, RunStatus.CONVERGED, x, run_id)
            return x, trace
        x = x_next
        if float(np.linalg.norm(x)) > stop.divergence_norm:
            _finish(trace, RunStatus.DIVERGED, x, run_id)
            return x, trace

    _finish(trace, RunStatus.MAX_ITERATIONS, x, run_id)
    return x, trace


def iterate_perturbed(
    net: Network,
    perturb: PerturbationSchedule,
    x0: Sequence[float] | FloatArray,
    schedule: RelaxationSchedule,
    stop: StopCriteria | None = None,
    x_ref: Sequence[float] | FloatArray | None = None,
    alpha: float | None = None,
) -> tuple[FloatArray, IterationTrace, BoundSequences]:
    """
    Relaxed iteration with the perturbed layers T_{i,n}.

    The residual recorded and tested against tol is that of the limit network, ‖T x_n − x_n‖.
    When alpha (an averagedness constant of T) is given, the unperturbed trajectory y_n from
    the same x0 runs alongside and each row records ‖x_n − y_n‖ and the accumulated bound
    g_{n+1} = (1 + τ_{m,n}/α) g_n + (τ_{m,n} δ_n + θ_{m,n})/α, δ_n = max_{k≤n} ‖y_k‖.

    Returns:
        (final iterate, trace, bound sequences over the iterations performed)
    """
    stop = stop or StopCriteria()
    if alpha is not None and not 0.5 <= alpha <= 1.0:
        raise InvalidParameterException("alpha must lie in [1/2, 1]", details={"alpha": alpha})
    x = as_vector(x0, net.dim).copy()
    ref = None if x_ref is None else as_vector(x_ref, net.dim)
    trace = IterationTrace(x_ref=ref)
    dirs = perturbation_directions(net, perturb)
    columns: list[tuple[list[float], ...]] = []
    y = x.copy()
    gap_bound = 0.0
    delta = float(np.linalg.norm(y))
    run_id = uuid.uuid4().hex[:8]
    logger.info(
        "Perturbed run started",
        extra={"run_id": run_id, "command": "iterate_perturbed", "iteration": 0},
    )

    def done(status: RunStatus) -> tuple[FloatArray, IterationTrace, BoundSequences]:
        _finish(trace, status, x, run_id)
        return x, trace, _stack_bounds(columns, net.depth)

    for n in range(stop.max_iter):
        lam = _checked_lambda(schedule, n)
        layers = realize_layers(net, perturb, dirs, n)
        sx = apply_layers(layers, x)
        residual = float(np.linalg.norm(net.forward(x) - x))
        x_next = x + lam * (sx - x)
        column = _bound_column(net, perturb, layers, n)
        columns.append(column)

        gap = bound = None
        if alpha is not None:
            gap = float(np.linalg.norm(x - y))
            bound = gap_bound
            tau_m, theta_m = column[2][-1], column[3][-1]
            delta = max(delta, float(np.linalg.norm(y)))
            gap_bound = (1.0 + tau_m / alpha) * gap_bound + (tau_m * delta + theta_m) / alpha
            y = y + lam * (net.forward(y) - y)

        trace.append(
            IterationRow(
                n=n,
                lam=lam,
                step_norm=float(np.linalg.norm(x_next - x)),
                residual=residual,
                x_norm=float(np.linalg.norm(x)),
                dist_ref=_distance(x, ref),
                coupling_gap=gap,
                coupling_bound=bound,
            )
        )
        if n % settings.LOG_EVERY == 0:
            logger.debug("Progress", extra={"run_id": run_id, "iteration": n})
        if residual <= stop.tol:
            return done(RunStatus.CONVERGED)
        x = x_next
        if float(np.linalg.norm(x)) > stop.divergence_norm:
            return done(RunStatus.DIVERGED)

    return done(RunStatus.MAX_ITERATIONS)


def fejer_check(trace: IterationTrace, x_ref: Sequence[float] | FloatArray | None = None) -> float:
    """
    Largest increase ‖x_{n+1} − x_ref‖ − ‖x_n − x_ref‖ along a recorded run.

    Args:
        trace: Trace recorded with reference distances
        x_ref: If given, must be the reference the trace was recorded with

    Returns:
        Worst violation; at most 0 for Fejér monotone runs, 0 when fewer than two distances

    Raises:
        MissingColumnException: If the trace lacks reference distances
        InvalidParameterException: If x_ref differs from the recorded reference
    """
    if trace.x_ref is None or any(row.dist_ref is None for row in trace.rows):
        raise MissingColumnException("Trace was recorded without reference distances")
    if x_ref is not None:
        ref = as_vector(x_ref, trace.x_ref.shape[0])
        if not np.array_equal(ref, trace.x_ref):
            raise InvalidParameterException("x_ref differs from the recorded reference")

    distances = [float(row.dist_ref) for row in trace.rows if row.dist_ref is not None]
    if trace.final_dist_ref is not None:
        distances.append(trace.final_dist_ref)
    if len(distances) < 2:
        return 0.0
    return float(np.max(np.diff(distances)))


def input_stability(
    net: Network,
    x0: Sequence[float] | FloatArray,
    x0_alt: Sequence[float] | FloatArray,
    schedule: RelaxationSchedule,
    steps: int,
) -> list[float]:
    """
    Distances ‖x_n − x̃_n‖, n = 0, …, steps, between two runs of the same iteration.

    For an averaged network with λ_n ≤ 1/α the distances do not increase.
    """
    if steps < 0:
        raise InvalidParameterException("steps must be nonnegative", details={"steps": steps})
    x = as_vector(x0, net.dim).copy()
    z = as_vector(x0_alt, net.dim).copy()
    gaps = [float(np.linalg.norm(x - z))]
    for n in range(steps):
        lam = _checked_lambda(schedule, n)
        x = x + lam * (net.forward(x) - x)
        z = z + lam * (net.forward(z) - z)
        gaps.append(float(np.linalg.norm(x - z)))
    return gaps
