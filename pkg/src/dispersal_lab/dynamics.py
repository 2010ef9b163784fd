"""Time integration of the population systems to steady state.

First-order IMEX scheme: diffusion is backward Euler (one banded
Cholesky factorization per component, reused every step), the reaction
is explicit.  Fixed points of the scheme satisfy the discrete
steady-state equation exactly, so the stopping criterion is the
sup-norm of the full right-hand side, which is independent of dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .mesh import Grid, assemble_neumann_laplacian
from .model import (
    Coefficients,
    ModelParams,
    SystemKind,
    hypothesis_h_holds,
    reaction_rhs,
    sample_coefficients,
)
from .spectral import EigenResult

NEGATIVITY_TOLERANCE = 1e-13


class StepOvershootError(RuntimeError):
    """Explicit reaction stage produced meaningfully negative values."""


@dataclass(frozen=True)
class State:
    """Component fields at one instant; shape (K, n), nonnegative."""

    t: float
    components: np.ndarray

    def __post_init__(self) -> None:
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != 2:
            raise ValueError(f"components must be 2-D (K, n), got shape {comps.shape}")
        if np.min(comps) < -NEGATIVITY_TOLERANCE:
            raise ValueError(f"state has negative entries (min {np.min(comps):.3e})")
        object.__setattr__(self, "components", np.maximum(comps, 0.0))


@dataclass
class TrajectoryLog:
    """Per-sample summaries (and optionally full fields) along a run."""

    grid: Grid
    sample_times: list[float] = field(default_factory=list)
    mins: list[np.ndarray] = field(default_factory=list)
    maxs: list[np.ndarray] = field(default_factory=list)
    masses: list[np.ndarray] = field(default_factory=list)
    fields: Optional[list[np.ndarray]] = None

    def record(self, state: State) -> None:
        if self.sample_times and state.t <= self.sample_times[-1]:
            return
        comps = state.components
        self.sample_times.append(state.t)
        self.mins.append(comps.min(axis=1))
        self.maxs.append(comps.max(axis=1))
        self.masses.append(comps @ self.grid.quadrature_weights)
        if self.fields is not None:
            self.fields.append(comps.copy())

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.sample_times)


@dataclass(frozen=True)
class SteadyResult:
    """Final state of a steady-state run with its right-hand-side residual."""

    state: State
    residual: float
    converged: bool
    steps: int
    trajectory: TrajectoryLog


@dataclass(frozen=True)
class SolverOptions:
    dt: float = 0.01
    tol: float = 1e-9
    t_max: float = 2000.0
    sample_every: float = 1.0
    store_fields: bool = True
    check_every: int = 10
    max_dt_halvings: int = 4


def kind_diffusions(kind: SystemKind, params: ModelParams) -> tuple[float, ...]:
    if kind is SystemKind.LOGISTIC:
        return (params.d3,)
    if kind is SystemKind.THREE_COMPONENT:
        return (params.d1, params.d2, params.d3)
    return (params.d1, params.d2)


class DiffusionSolver:
    """Factored solver for (I - dt*d*L) x = y with the Neumann Laplacian L.

    The matrix is symmetrized by the square root of the quadrature
    weights, factored once with a banded Cholesky, and reused for every
    step at this (d, dt).
    """

    def __init__(self, grid: Grid, d: float, dt: float):
        n, h2 = grid.n, grid.h * grid.h
        r = dt * d / h2
        sqrt_w = np.sqrt(grid.quadrature_weights)
        diag = np.full(n, 1.0 + 2.0 * r)
        upper = np.full(n - 1, -r)
        upper[0] = -2.0 * r
        # Symmetrized superdiagonal: S[i, i+1] = sqrt(w_i / w_{i+1}) * A[i, i+1].
        sym_upper = upper * sqrt_w[:-1] / sqrt_w[1:]
        ab = np.zeros((2, n))
        ab[0, 1:] = sym_upper
        ab[1, :] = diag
        self._factor = cholesky_banded(ab, lower=False)
        self._sqrt_w = sqrt_w

    def solve(self, y: np.ndarray) -> np.ndarray:
        z = cho_solve_banded((self._factor, False), self._sqrt_w * y)
        return z / self._sqrt_w


class ImexStepper:
    """One-step map of the IMEX scheme for a fixed (kind, params, dt)."""

    def __init__(
        self,
        kind: SystemKind,
        params: ModelParams,
        grid: Grid,
        dt: float,
        coeffs: Optional[Coefficients] = None,
    ):
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.kind = kind
        self.params = params
        self.grid = grid
        self.dt = dt
        self.coeffs = coeffs if coeffs is not None else sample_coefficients(params, grid)
        self.solvers = [DiffusionSolver(grid, d, dt) for d in kind_diffusions(kind, params)]

    def step(self, state: State) -> State:
        comps = state.components
        stage = comps + self.dt * reaction_rhs(self.kind, self.params, self.coeffs, comps)
        worst = float(np.min(stage))
        if worst < -NEGATIVITY_TOLERANCE:
            raise StepOvershootError(
                f"dt={self.dt} too large: explicit stage reached {worst:.3e}"
            )
        stage = np.maximum(stage, 0.0)
        new = np.empty_like(stage)
        for i, solver in enumerate(self.solvers):
            new[i] = solver.solve(stage[i])
        return State(t=state.t + self.dt, components=new)


def step_imex(
    kind: SystemKind,
    params: ModelParams,
    grid: Grid,
    state: State,
    dt: float,
    coeffs: Optional[Coefficients] = None,
) -> State:
    """Single IMEX step (builds and discards the factorization)."""
    return ImexStepper(kind, params, grid, dt, coeffs).step(state)


def rhs_residual(
    kind: SystemKind,
    params: ModelParams,
    grid: Grid,
    coeffs: Coefficients,
    comps: np.ndarray,
) -> float:
    """Sup-norm of diffusion plus reaction at the given fields."""
    lap = assemble_neumann_laplacian(grid)
    g = reaction_rhs(kind, params, coeffs, comps)
    worst = 0.0
    for i, d in enumerate(kind_diffusions(kind, params)):
        worst = max(worst, float(np.max(np.abs(d * lap.apply(comps[i]) + g[i]))))
    return worst


def integrate_to_steady(
    kind: SystemKind,
    params: ModelParams,
    grid: Grid,
    initial: State,
    opts: SolverOptions = SolverOptions(),
    coeffs: Optional[Coefficients] = None,
) -> SteadyResult:
    """Step until the right-hand side is below tol or t_max is reached.

    Overshoots of the explicit stage halve dt (rebuilding the
    factorizations) up to opts.max_dt_halvings times.  Non-convergence
    by t_max is reported through the converged flag, not an exception.
    """
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    expected = (kind.n_components, grid.n)
    if initial.components.shape != expected:
        raise ValueError(f"initial state shape {initial.components.shape} != {expected}")

    log = TrajectoryLog(grid=grid, fields=[] if opts.store_fields else None)
    log.record(initial)
    stepper = ImexStepper(kind, params, grid, opts.dt, coeffs)
    state = initial
    steps = 0
    halvings = 0
    next_sample = initial.t + opts.sample_every
    residual = rhs_residual(kind, params, grid, coeffs, state.components)
    converged = residual <= opts.tol
    while not converged and state.t < opts.t_max - 1e-12:
        try:
            state = stepper.step(state)
        except StepOvershootError:
            halvings += 1
            if halvings > opts.max_dt_halvings:
                raise
            stepper = ImexStepper(kind, params, grid, stepper.dt / 2.0, coeffs)
            continue
        steps += 1
        if state.t >= next_sample - 1e-12:
            log.record(state)
            while next_sample <= state.t + 1e-12:
                next_sample += opts.sample_every
        if steps % opts.check_every == 0:
            residual = rhs_residual(kind, params, grid, coeffs, state.components)
            if residual <= opts.tol:
                converged = True
    residual = rhs_residual(kind, params, grid, coeffs, state.components)
    converged = residual <= opts.tol
    log.record(state)

    if (
        converged
        and kind is SystemKind.SUBMODEL
        and hypothesis_h_holds(params, grid, coeffs)
    ):
        u, v = state.components
        beta_hi = float(np.max(coeffs.beta))
        alpha_hi = float(np.max(coeffs.alpha))
        slack = 1e-8 * max(1.0, beta_hi, alpha_hi)
        if np.max(u) > beta_hi + slack or np.max(v) > alpha_hi + slack:
            raise RuntimeError(
                "steady state escaped the contracting box [0, max beta] x [0, max alpha]"
            )
    return SteadyResult(
        state=state, residual=residual, converged=converged, steps=steps, trajectory=log
    )


def monitor_lyapunov(trajectory: TrajectoryLog, adjoint: EigenResult) -> np.ndarray:
    """Adjoint-weighted mass integral(psi1* u + psi2* v) at each sample."""
    if trajectory.fields is None:
        raise ValueError("trajectory was recorded without fields; rerun with store_fields")
    psi = adjoint.eigenfunctions
    if psi.shape[0] != 2:
        raise ValueError("adjoint eigenpair must have two components")
    if trajectory.fields and trajectory.fields[0].shape[0] != 2:
        raise ValueError("trajectory must come from a two-component system")
    w = trajectory.grid.quadrature_weights
    return np.array(
        [float(np.sum(w * (psi[0] * f[0] + psi[1] * f[1]))) for f in trajectory.fields]
    )


def lyapunov_identity(
    kind: SystemKind,
    params: ModelParams,
    grid: Grid,
    state: State,
    dt: float,
    adjoint: EigenResult,
    coeffs: Optional[Coefficients] = None,
) -> tuple[float, float]:
    """One-step check of the decay identity for the adjoint-weighted mass.

    Returns (discrete derivative, quadratic sink).  At zero principal
    eigenvalue the derivative of integral(psi1* u + psi2* v) equals
    -integral[psi1* u (u + b v) + psi2* v (c u + v)] up to O(dt).
    """
    if kind.n_components != 2:
        raise ValueError("the decay identity applies to the two-component systems")
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    b = params.b if kind is SystemKind.TWO_SPECIES_GENERAL else 1.0
    c = params.c if kind is SystemKind.TWO_SPECIES_GENERAL else 1.0
    w = grid.quadrature_weights
    psi1, psi2 = adjoint.eigenfunctions
    u, v = state.components
    before = float(np.sum(w * (psi1 * u + psi2 * v)))
    sink = -float(np.sum(w * (psi1 * u * (u + b * v) + psi2 * v * (c * u + v))))
    after_state = step_imex(kind, params, grid, state, dt, coeffs)
    ua, va = after_state.components
    after = float(np.sum(w * (psi1 * ua + psi2 * va)))
    return (after - before) / dt, sink


def persistence_floor(trajectory: TrajectoryLog, transient_fraction: float = 0.5) -> float:
    """Worst spatial minimum over all components after the transient window."""
    times = trajectory.times
    if len(times) == 0:
        raise ValueError("empty trajectory")
    cutoff = times[0] + transient_fraction * (times[-1] - times[0])
    tail = [m for t, m in zip(times, trajectory.mins) if t >= cutoff - 1e-12]
    if not tail:
        raise ValueError("post-transient window is empty; extend the run or lower the fraction")
    return float(np.min(np.asarray(tail)))


def constant_state(kind: SystemKind, grid: Grid, values: Sequence[float], t: float = 0.0) -> State:
    values = np.asarray(values, dtype=float)
    if values.shape != (kind.n_components,):
        raise ValueError(f"need {kind.n_components} component values, got {values.shape}")
    return State(t=t, components=np.tile(values[:, None], (1, grid.n)))


def random_state(
    kind: SystemKind,
    grid: Grid,
    low: float,
    high: float,
    seed: int,
    t: float = 0.0,
) -> State:
    if not 0 <= low < high:
        raise ValueError(f"need 0 <= low < high, got ({low}, {high})")
    rng = np.random.default_rng(seed)
    comps = rng.uniform(low, high, size=(kind.n_components, grid.n))
    return State(t=t, components=comps)


def eigenfunction_state(eig: EigenResult, scale: float, t: float = 0.0) -> State:
    """Positive eigenfunction scaled to a given amplitude, as initial data."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    return State(t=t, components=scale * eig.eigenfunctions)
