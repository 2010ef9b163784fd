"""Stability of semi-trivial equilibria, threshold root-finds, and sweeps.

For the three-component competition the two semi-trivial states are
(u*, v*, 0) — the switching pair alone — and (0, 0, w*) — the single
diffuser alone.  Invasion of w into the pair is governed by the scalar
eigenvalue at diffusion d3 with potential m - u* - v*; invasion of the
pair into w is governed by the coupled eigenvalue lambda2 with growth
m - w*.  The threshold finders bisect these curves inside their proved
sign brackets; sweeps cross-check eigenvalue signs against simulated
outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .mesh import Grid, integrate
from .model import (
    CoefficientSpec,
    Coefficients,
    HypothesisError,
    ModelParams,
    SystemKind,
    check_hypothesis_h,
    require_constant,
    sample_coefficients,
)
from .dynamics import (
    SolverOptions,
    State,
    SteadyResult,
    constant_state,
    integrate_to_steady,
)
from .spectral import (
    EigenResult,
    ThresholdResult,
    bisect_curve,
    dense_rightmost,
    principal_eigen,
    scalar_eigenvalue,
    switching_problem,
)

MARGINAL_BAND = 1e-8

EQUILIBRIUM_TAGS = ("trivial", "uv_zero", "w_only", "positive_pair")


@dataclass(frozen=True)
class StabilityReport:
    equilibrium: str
    principal_eigenvalue: float
    classification: str

    @staticmethod
    def from_eigenvalue(tag: str, lam: float) -> "StabilityReport":
        if abs(lam) <= MARGINAL_BAND:
            cls = "marginal"
        elif lam < 0:
            cls = "linearly_stable"
        else:
            cls = "linearly_unstable"
        return StabilityReport(equilibrium=tag, principal_eigenvalue=lam, classification=cls)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    lambda_uv0: float
    lambda_00w: float
    outcome: str  # w_wins | uv_wins | undetermined
    floors: tuple[float, ...]
    masses: tuple[float, ...]
    converged: bool
    note: str = ""


@dataclass(frozen=True)
class SweepReport:
    parameter: str
    values: tuple[float, ...]
    points: tuple[SweepPoint, ...]
    empirical_c1: Optional[float]
    empirical_c2: Optional[float]


def weighted_average_diffusion(params: ModelParams, alpha: float, beta: float) -> float:
    """Switching-weighted mean of the two diffusion rates."""
    return (beta * params.d1 + alpha * params.d2) / (alpha + beta)


def logistic_steady(
    params: ModelParams,
    grid: Grid,
    opts: Optional[SolverOptions] = None,
    coeffs: Optional[Coefficients] = None,
    warm_start: Optional[np.ndarray] = None,
) -> SteadyResult:
    """Positive steady state of the single-species logistic equation at rate d3."""
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    opts = opts or SolverOptions(dt=0.05, sample_every=10.0, store_fields=False)
    if warm_start is not None:
        init = State(t=0.0, components=np.maximum(warm_start, 1e-8)[None, :])
    else:
        level = 0.5 * float(np.max(coeffs.m))
        init = constant_state(SystemKind.LOGISTIC, grid, [max(level, 1e-3)])
    result = integrate_to_steady(SystemKind.LOGISTIC, params, grid, init, opts, coeffs)
    if not result.converged:
        raise HypothesisError(
            "logistic equation did not settle; growth rate may not sustain a positive state"
        )
    return result


def subsystem_steady(
    params: ModelParams,
    grid: Grid,
    opts: Optional[SolverOptions] = None,
    coeffs: Optional[Coefficients] = None,
) -> SteadyResult:
    """Positive steady state (u*, v*) of the switching pair with shared density."""
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    opts = opts or SolverOptions(dt=0.05, sample_every=10.0, store_fields=False)
    beta_hi = float(np.max(coeffs.beta))
    alpha_hi = float(np.max(coeffs.alpha))
    init = constant_state(SystemKind.SUBMODEL, grid, [0.25 * beta_hi, 0.25 * alpha_hi])
    result = integrate_to_steady(SystemKind.SUBMODEL, params, grid, init, opts, coeffs)
    if not result.converged:
        raise HypothesisError("switching pair did not reach a steady state")
    if float(np.min(result.state.components)) <= 0:
        raise HypothesisError("switching pair settled on a non-positive state")
    return result


def pair_linearization_dense(
    params: ModelParams, grid: Grid, coeffs: Coefficients, u: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """Dense Jacobian of the general two-species system at (u, v).

    The off-diagonal blocks beta - b*u and alpha - c*v can change sign,
    so this linearization is outside the cooperative solver's scope and
    is evaluated densely.
    """
    from .mesh import assemble_neumann_laplacian

    lap = assemble_neumann_laplacian(grid).to_dense()
    n = grid.n
    j11 = coeffs.m - coeffs.alpha - 2.0 * u - params.b * v
    j12 = coeffs.beta - params.b * u
    j21 = coeffs.alpha - params.c * v
    j22 = coeffs.m - coeffs.beta - params.c * u - 2.0 * v
    top = np.hstack([params.d1 * lap + np.diag(j11), np.diag(j12)])
    bottom = np.hstack([np.diag(j21), params.d2 * lap + np.diag(j22)])
    return np.vstack([top, bottom])


def lambda2_eigenpair(
    params: ModelParams,
    grid: Grid,
    w_star: np.ndarray,
    coeffs: Optional[Coefficients] = None,
    alpha: Optional[np.ndarray] = None,
    beta: Optional[np.ndarray] = None,
) -> EigenResult:
    """Invasion eigenpair of the switching pair at (0, 0, w*)."""
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    alpha = coeffs.alpha if alpha is None else alpha
    beta = coeffs.beta if beta is None else beta
    problem = switching_problem(grid, params.d1, params.d2, alpha, beta, coeffs.m - w_star)
    return principal_eigen(problem)


def linearized_stability(
    kind: SystemKind,
    params: ModelParams,
    grid: Grid,
    equilibrium: Optional[SteadyResult],
    which: str,
    coeffs: Optional[Coefficients] = None,
    w_star: Optional[np.ndarray] = None,
) -> StabilityReport:
    """Classify an equilibrium by its invading principal eigenvalue.

    which = 'uv_zero' reduces to the scalar problem at diffusion d3 with
    potential m - u* - v*; 'w_only' is the coupled pair problem with
    growth m - w*; 'positive_pair' is the full non-cooperative
    linearization at a positive two-species state, solved densely;
    'trivial' is the growth eigenvalue of the pair at the origin.
    """
    if which not in EQUILIBRIUM_TAGS:
        raise ValueError(f"unknown equilibrium tag {which!r}; expected one of {EQUILIBRIUM_TAGS}")
    if coeffs is None:
        coeffs = sample_coefficients(params, grid)
    if which == "trivial":
        problem = switching_problem(
            grid, params.d1, params.d2, coeffs.alpha, coeffs.beta, coeffs.m
        )
        return StabilityReport.from_eigenvalue("trivial", principal_eigen(problem).lam)
    if which == "uv_zero":
        check_hypothesis_h(params, grid, coeffs)
        if equilibrium is None or not equilibrium.converged:
            raise ValueError("uv_zero stability needs a converged pair equilibrium")
        u, v = equilibrium.state.components
        lam = scalar_eigenvalue(grid, params.d3, coeffs.m - u - v).lam
        return StabilityReport.from_eigenvalue("uv_zero", lam)
    if which == "w_only":
        check_hypothesis_h(params, grid, coeffs)
        if w_star is None:
            if equilibrium is None or not equilibrium.converged:
                raise ValueError("w_only stability needs w* or a converged logistic equilibrium")
            w_star = equilibrium.state.components[0]
        return StabilityReport.from_eigenvalue(
            "w_only", lambda2_eigenpair(params, grid, w_star, coeffs).lam
        )
    # positive_pair
    if equilibrium is None or not equilibrium.converged:
        raise ValueError("positive_pair stability needs a converged positive state")
    u, v = equilibrium.state.components
    if float(np.min(u)) <= 0 or float(np.min(v)) <= 0:
        raise ValueError("positive_pair stability needs a componentwise positive state")
    lam, _ = dense_rightmost(pair_linearization_dense(params, grid, coeffs, u, v))
    return StabilityReport.from_eigenvalue("positive_pair", float(lam.real))


def _constant_rates(params: ModelParams) -> tuple[float, float]:
    return require_constant(params.alpha, "alpha"), require_constant(params.beta, "beta")


def _check_section5_setting(params: ModelParams, coeffs: Coefficients, size_bound: str) -> tuple[float, float]:
    alpha, beta = _constant_rates(params)
    if not params.d1 < params.d3 < params.d2:
        raise HypothesisError(
            f"need d1 < d3 < d2, got d1={params.d1}, d3={params.d3}, d2={params.d2}"
        )
    m_max = float(np.max(coeffs.m))
    if size_bound == "alpha" and m_max > alpha:
        raise HypothesisError(f"need max m <= alpha, got max m={m_max} > alpha={alpha}")
    if size_bound == "beta" and m_max > beta:
        raise HypothesisError(f"need max m <= beta, got max m={m_max} > beta={beta}")
    return alpha, beta


def find_threshold(
    name: str,
    params: ModelParams,
    grid: Grid,
    opts: Optional[SolverOptions] = None,
    scan_points: int = 64,
    residual_tol: float = 1e-9,
) -> ThresholdResult:
    """Locate one of the named thresholds inside its proved bracket.

    d_c: zero of the scalar invasion eigenvalue at (u*, v*, 0) as d3
    varies over (d1, weighted average); the pair equilibrium does not
    depend on d3 and is computed once.  d_0: first zero of lambda2(d3)
    on the same bracket, with w* recomputed per candidate (all sign
    changes are available from lambda2_sign_changes).  beta_c / alpha_c:
    zeros of lambda2 as a switching rate varies at fixed d3, with w*
    held fixed.  Endpoint signs are verified before bisecting.
    """
    coeffs = sample_coefficients(params, grid)
    check_hypothesis_h(params, grid, coeffs)

    if name == "d_c":
        alpha, beta = _constant_rates(params)
        bracket = (params.d1, weighted_average_diffusion(params, alpha, beta))
        pair = subsystem_steady(params, grid, opts, coeffs)
        u, v = pair.state.components
        potential = coeffs.m - u - v
        if float(np.max(potential)) - float(np.min(potential)) <= 1e-6:
            raise HypothesisError("m - u* - v* is numerically constant; bracket theory void")
        curve = lambda d3: scalar_eigenvalue(grid, d3, potential).lam
        f_lo, f_hi = curve(bracket[0]), curve(bracket[1])
        if not (f_lo > 0 > f_hi):
            raise HypothesisError(
                f"endpoint signs violate the d_c bracket: f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}"
            )
        return bisect_curve(curve, *bracket, f_lo, f_hi, name="d_c", residual_tol=residual_tol)

    if name == "d_0":
        roots = lambda2_sign_changes(params, grid, opts, scan_points=max(scan_points // 4, 9),
                                     residual_tol=residual_tol)
        if not roots:
            raise HypothesisError("no sign change of lambda2(d3) found inside the bracket")
        return roots[0]

    if name in ("beta_c", "alpha_c"):
        size_bound = "alpha" if name == "beta_c" else "beta"
        alpha, beta = _check_section5_setting(params, coeffs, size_bound)
        w_star = logistic_steady(params, grid, opts, coeffs).state.components[0]
        growth = coeffs.m - w_star
        if name == "beta_c":
            hi = (params.d2 - params.d3) / (params.d3 - params.d1) * alpha
            curve = lambda b_val: principal_eigen(
                switching_problem(grid, params.d1, params.d2, coeffs.alpha,
                                  np.full(grid.n, b_val), growth)
            ).lam
            lo = 1e-4 * hi
            f_lo, f_hi = curve(lo), curve(hi)
            if not (f_lo < 0 < f_hi):
                raise HypothesisError(
                    f"endpoint signs violate the beta_c bracket: f({lo:.3e})={f_lo:.3e}, "
                    f"f({hi:.3e})={f_hi:.3e}"
                )
            return bisect_curve(curve, lo, hi, f_lo, f_hi, name="beta_c",
                                residual_tol=residual_tol)
        lo = (params.d3 - params.d1) / (params.d2 - params.d3) * beta
        curve = lambda a_val: principal_eigen(
            switching_problem(grid, params.d1, params.d2, np.full(grid.n, a_val),
                              coeffs.beta, growth)
        ).lam
        f_lo = curve(lo)
        if f_lo <= 0:
            raise HypothesisError(f"lambda2 at the lower alpha bound is not positive: {f_lo:.3e}")
        hi, f_hi = lo, f_lo
        for _ in range(40):
            hi *= 2.0
            f_hi = curve(hi)
            if f_hi < 0:
                break
        else:
            raise HypothesisError("lambda2(alpha) never became negative while doubling alpha")
        return bisect_curve(curve, lo, hi, f_lo, f_hi, name="alpha_c", residual_tol=residual_tol)

    raise ValueError(f"unknown threshold name {name!r}")


def lambda2_sign_changes(
    params: ModelParams,
    grid: Grid,
    opts: Optional[SolverOptions] = None,
    scan_points: int = 17,
    residual_tol: float = 1e-9,
) -> list[ThresholdResult]:
    """All zeros of lambda2(d3) on the bracket lattice (uniqueness is not assumed).

    w* is recomputed at every candidate d3, warm-started from the
    previous one.
    """
    coeffs = sample_coefficients(params, grid)
    check_hypothesis_h(params, grid, coeffs)
    alpha, beta = _constant_rates(params)
    bracket = (params.d1, weighted_average_diffusion(params, alpha, beta))
    warm: dict[str, Optional[np.ndarray]] = {"w": None}

    def curve(d3: float) -> float:
        local = replace(params, d3=d3)
        w_res = logistic_steady(local, grid, opts, coeffs, warm_start=warm["w"])
        warm["w"] = w_res.state.components[0]
        return lambda2_eigenpair(local, grid, warm["w"], coeffs).lam

    lattice = np.linspace(bracket[0], bracket[1], scan_points)
    values = [curve(x) for x in lattice]
    roots: list[ThresholdResult] = []
    for i in range(len(lattice) - 1):
        if values[i] != 0.0 and values[i] * values[i + 1] < 0:
            roots.append(
                bisect_curve(curve, lattice[i], lattice[i + 1], values[i], values[i + 1],
                             name="d_0", residual_tol=residual_tol)
            )
    return roots


def lambda2_sensitivity(
    params: ModelParams,
    grid: Grid,
    wrt: str,
    w_star: Optional[np.ndarray] = None,
    eig: Optional[EigenResult] = None,
    opts: Optional[SolverOptions] = None,
) -> float:
    """Derivative of lambda2 with respect to a constant switching rate.

    Evaluates the eigenfunction quotient
      d lambda2 / d beta  = (int alpha phi1 phi2 - beta phi2^2) / (int alpha phi1^2 + beta phi2^2)
      d lambda2 / d alpha = (int beta  phi1 phi2 - alpha phi1^2) / (int alpha phi1^2 + beta phi2^2)
    with (phi1, phi2) the eigenpair at the current parameters.
    """
    if wrt not in ("beta", "alpha"):
        raise ValueError(f"wrt must be 'beta' or 'alpha', got {wrt!r}")
    coeffs = sample_coefficients(params, grid)
    alpha, beta = _constant_rates(params)
    if eig is None:
        if w_star is None:
            w_star = logistic_steady(params, grid, opts, coeffs).state.components[0]
        eig = lambda2_eigenpair(params, grid, w_star, coeffs)
    phi1, phi2 = eig.eigenfunctions
    denom = integrate(grid, alpha * phi1**2 + beta * phi2**2)
    if wrt == "beta":
        numer = integrate(grid, alpha * phi1 * phi2 - beta * phi2**2)
    else:
        numer = integrate(grid, beta * phi1 * phi2 - alpha * phi1**2)
    return numer / denom


EXTINCT_MASS = 1e-6
PERSISTENT_MASS = 1e-4


def classify_endpoint(masses: np.ndarray) -> str:
    """w_wins / uv_wins / undetermined from final per-component masses."""
    mass_u, mass_v, mass_w = masses
    if mass_u < EXTINCT_MASS and mass_v < EXTINCT_MASS and mass_w > PERSISTENT_MASS:
        return "w_wins"
    if mass_w < EXTINCT_MASS and mass_u + mass_v > PERSISTENT_MASS:
        return "uv_wins"
    return "undetermined"


def sweep_outcomes(
    params: ModelParams,
    grid: Grid,
    parameter: str,
    values: list[float],
    opts: Optional[SolverOptions] = None,
    initial: Optional[State] = None,
) -> SweepReport:
    """Eigenvalue signs and simulated outcome of the three-species race.

    For each swept value: both semi-trivial invasion eigenvalues are
    computed, the full system is integrated from a fixed mixed initial
    state, and the endpoint is classified by the extinct/persistent
    mass thresholds (two orders apart).  Empirical exclusion bounds are
    the largest prefix / smallest suffix of the sorted lattice on which
    the winner is uniform.
    """
    if parameter not in ("d3", "beta", "alpha"):
        raise ValueError(f"sweep parameter must be d3, beta or alpha, got {parameter!r}")
    base_coeffs = sample_coefficients(params, grid)
    check_hypothesis_h(params, grid, base_coeffs)
    if parameter in ("beta", "alpha"):
        _check_section5_setting(params, base_coeffs, "alpha" if parameter == "beta" else "beta")
    sim_opts = opts or SolverOptions(dt=0.02, sample_every=5.0, store_fields=False)
    values_sorted = sorted(float(v) for v in values)

    points: list[SweepPoint] = []
    pair_cache: Optional[SteadyResult] = None
    w_cache: Optional[SteadyResult] = None
    for value in values_sorted:
        if parameter == "d3":
            local = replace(params, d3=value)
        elif parameter == "beta":
            local = replace(params, beta=CoefficientSpec.constant(value))
        else:
            local = replace(params, alpha=CoefficientSpec.constant(value))
        coeffs = sample_coefficients(local, grid)
        check_hypothesis_h(local, grid, coeffs)

        if parameter == "d3" and pair_cache is not None:
            pair = pair_cache
        else:
            pair = subsystem_steady(local, grid, None, coeffs)
            pair_cache = pair
        if parameter != "d3" and w_cache is not None:
            w_res = w_cache
        else:
            w_res = logistic_steady(local, grid, None, coeffs)
            w_cache = w_res
        u, v = pair.state.components
        w_star = w_res.state.components[0]
        lam_uv0 = scalar_eigenvalue(grid, local.d3, coeffs.m - u - v).lam
        lam_00w = lambda2_eigenpair(local, grid, w_star, coeffs).lam

        note = ""
        if initial is None:
            level = 0.2 * float(np.max(coeffs.m))
            start = constant_state(SystemKind.THREE_COMPONENT, grid, [level, level, level])
        else:
            start = initial
        try:
            sim = integrate_to_steady(
                SystemKind.THREE_COMPONENT, local, grid, start, sim_opts, coeffs
            )
            masses = sim.state.components @ grid.quadrature_weights
            outcome = classify_endpoint(masses)
            floors = tuple(float(x) for x in sim.state.components.min(axis=1))
            converged = sim.converged
        except Exception as exc:  # per-value failures are recorded, not fatal
            masses = np.full(3, np.nan)
            outcome = "undetermined"
            floors = (np.nan, np.nan, np.nan)
            converged = False
            note = f"simulation failed: {exc}"
        points.append(
            SweepPoint(
                value=value,
                lambda_uv0=lam_uv0,
                lambda_00w=lam_00w,
                outcome=outcome,
                floors=floors,
                masses=tuple(float(x) for x in masses),
                converged=converged,
                note=note,
            )
        )

    low_outcome = "w_wins" if parameter in ("d3", "beta") else "uv_wins"
    high_outcome = "uv_wins" if parameter in ("d3", "beta") else "w_wins"
    c1 = None
    for p in points:
        if p.outcome == low_outcome:
            c1 = p.value
        else:
            break
    c2 = None
    for p in reversed(points):
        if p.outcome == high_outcome:
            c2 = p.value
        else:
            break
    return SweepReport(
        parameter=parameter,
        values=tuple(values_sorted),
        points=tuple(points),
        empirical_c1=c1,
        empirical_c2=c2,
    )
