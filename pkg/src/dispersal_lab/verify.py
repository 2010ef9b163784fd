"""Verification battery: property checks aggregated by the verify task.

Every check is oracle-based or property-based: dense eigensolves,
central differences, analytic limits, and cross-checks between the
spectral and dynamical routes.  The battery is deterministic for a
fixed seed and sized to run in minutes at the default resolutions
(n = 201 for dynamics, 401 for eigenvalue thresholds, 801 for the
small-diffusion limit).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .mesh import Grid, assemble_neumann_laplacian, build_grid, integrate
from .model import (
    CoefficientSpec,
    HypothesisError,
    ModelParams,
    SystemKind,
    classify_regime,
    hypothesis_h_holds,
    sample_coefficients,
)
from .dynamics import (
    SolverOptions,
    constant_state,
    integrate_to_steady,
    lyapunov_identity,
    monitor_lyapunov,
    persistence_floor,
    random_state,
)
from .spectral import (
    adjoint_principal_eigen,
    assemble_dense,
    dense_rightmost,
    family_problem,
    find_mu_roots,
    lambda_of_mu,
    lambda_prime_at_zero,
    mu_star_scalar,
    principal_eigen,
    scalar_eigenvalue,
    scalar_problem,
    switching_problem,
)
from . import analysis as an

GROUPS = (
    "mesh-order",
    "eigen-oracle",
    "scalar-eigenvalue-laws",
    "pair-positivity",
    "growth-derivative",
    "diffusion-scaling",
    "extinction-persistence",
    "competitive-uniqueness",
    "invasion-brackets",
    "exclusion-dynamics",
    "switching-thresholds",
    "switching-dynamics",
)


@dataclass(frozen=True)
class CheckResult:
    group: str
    name: str
    status: str  # PASS | FAIL | SKIP
    detail: str

    @property
    def passed(self) -> bool:
        return self.status != "FAIL"


def _check(group: str, name: str, ok: bool, detail: str) -> CheckResult:
    return CheckResult(group=group, name=name, status="PASS" if ok else "FAIL", detail=detail)


def _skip(group: str, name: str, reason: str) -> CheckResult:
    return CheckResult(group=group, name=name, status="SKIP", detail=reason)


class VerifyContext:
    """Shared scenario state with lazy caching across check groups."""

    def __init__(
        self,
        params: Optional[ModelParams] = None,
        n_dynamics: int = 201,
        n_eigen: int = 401,
        n_fine: int = 801,
        domain: tuple[float, float] = (0.0, 1.0),
        seed: int = 0,
    ):
        self.params = params or reference_params()
        self.n_dynamics = n_dynamics
        self.n_eigen = n_eigen
        self.n_fine = n_fine
        self.domain = domain
        self.seed = seed
        self._cache: dict[str, object] = {}

    def grid(self, n: int) -> Grid:
        key = f"grid:{n}"
        if key not in self._cache:
            self._cache[key] = build_grid(self.domain[0], self.domain[1], n)
        return self._cache[key]  # type: ignore[return-value]

    def cached(self, key: str, make: Callable[[], object]) -> object:
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    def pair_steady(self, n: int):
        return self.cached(f"pair:{n}", lambda: an.subsystem_steady(self.params, self.grid(n)))

    def w_steady(self, n: int, d3: float):
        local = replace(self.params, d3=d3)
        return self.cached(
            f"w:{n}:{d3}", lambda: an.logistic_steady(local, self.grid(n))
        )

    def hypothesis_ok(self) -> bool:
        return hypothesis_h_holds(self.params, self.grid(self.n_dynamics))


def reference_params() -> ModelParams:
    """Reference competition scenario used throughout the battery."""
    return ModelParams(
        d1=0.1,
        d2=1.0,
        d3=0.4,
        alpha=CoefficientSpec.constant(1.0),
        beta=CoefficientSpec.constant(1.0),
        m=CoefficientSpec.cosine(0.4, 0.3, 1),
    )


# ---------------------------------------------------------------------------
# Group 1: discretization order


def check_mesh_order(ctx: VerifyContext) -> list[CheckResult]:
    group = "mesh-order"
    errs = {}
    for n in (201, 401):
        g = build_grid(0.0, 1.0, n)
        lap = assemble_neumann_laplacian(g)
        f = np.cos(np.pi * g.nodes)
        errs[n] = float(np.max(np.abs(lap.apply(f) + np.pi**2 * f)))
    ratio = errs[201] / errs[401]
    return [
        _check(group, "second-order-ratio", ratio >= 3.5, f"error ratio 201->401 = {ratio:.3f}")
    ]


# ---------------------------------------------------------------------------
# Group 2: iterative eigensolver vs dense oracle


def check_eigen_oracle(ctx: VerifyContext) -> list[CheckResult]:
    group = "eigen-oracle"
    rng = np.random.default_rng(ctx.seed + 17)
    g = build_grid(0.0, 1.0, 101)
    results = []
    worst = 0.0
    for case in range(10):
        scalar = case % 2 == 0
        if scalar:
            d = float(rng.uniform(0.05, 1.5))
            e = rng.uniform(-1.0, 1.0, g.n)
            problem = scalar_problem(g, d, e)
        else:
            d1 = float(rng.uniform(0.05, 0.5))
            d2 = float(rng.uniform(d1, 1.5))
            alpha = rng.uniform(0.2, 1.2, g.n)
            beta = rng.uniform(0.2, 1.2, g.n)
            m = rng.uniform(-1.0, 1.0, g.n)
            problem = switching_problem(g, d1, d2, alpha, beta, m)
        lam_iter = principal_eigen(problem).lam
        lam_dense, _ = dense_rightmost(assemble_dense(problem))
        rel = abs(lam_iter - lam_dense.real) / (1.0 + abs(lam_dense.real))
        worst = max(worst, rel)
    results.append(
        _check(group, "ten-random-problems", worst <= 1e-7, f"worst relative diff {worst:.3e}")
    )
    return results


# ---------------------------------------------------------------------------
# Group 3: scalar eigenvalue laws


def check_scalar_laws(ctx: VerifyContext) -> list[CheckResult]:
    group = "scalar-eigenvalue-laws"
    g = ctx.grid(ctx.n_eigen)
    out = []
    base = np.cos(2.0 * np.pi * g.nodes)
    d_lattice = (0.1, 0.3, 1.0, 3.0)
    lam = {c0: {d: scalar_eigenvalue(g, d, base + c0).lam for d in d_lattice} for c0 in (-0.1, 0.0, 0.1)}

    mono_e = all(lam[0.1][d] > lam[-0.1][d] + 1e-9 for d in d_lattice)
    out.append(_check(group, "monotone-in-potential", mono_e, "lambda increases with the potential"))

    dec = all(
        lam[c0][d_lattice[i]] > lam[c0][d_lattice[i + 1]] + 1e-9
        for c0 in lam
        for i in range(len(d_lattice) - 1)
    )
    out.append(_check(group, "strictly-decreasing-in-d", dec, "checked on d in {0.1,0.3,1,3}"))

    pos = all(lam[c0][d] > 1e-9 for c0 in (0.0, 0.1) for d in d_lattice)
    out.append(_check(group, "positive-when-mean-nonnegative", pos, "c0 in {0, 0.1}"))

    mu = mu_star_scalar(g, base - 0.1)
    lam_half = scalar_eigenvalue(g, 0.5 / mu.root, base - 0.1).lam
    lam_twice = scalar_eigenvalue(g, 2.0 / mu.root, base - 0.1).lam
    ok = lam_half > 1e-9 and lam_twice < -1e-9
    out.append(
        _check(
            group,
            "critical-scaling-sign-law",
            ok,
            f"mu*={mu.root:.6f}, lambda(0.5/mu*)={lam_half:.3e}, lambda(2/mu*)={lam_twice:.3e}",
        )
    )
    return out


# ---------------------------------------------------------------------------
# Group 4: positivity of the coupled principal eigenvalue


def check_pair_positivity(ctx: VerifyContext) -> list[CheckResult]:
    group = "pair-positivity"
    g = ctx.grid(ctx.n_eigen)
    out = []
    x = g.nodes
    cases = [
        ("mean-dominates-switching-asymmetry", 0.1, 1.0, np.full(g.n, 1.0), np.full(g.n, 1.0)),
        ("slow-rate-already-viable", 0.01, 1.0, np.full(g.n, 0.05), np.full(g.n, 0.3)),
        ("uneven-switching", 0.1, 1.0, np.full(g.n, 0.6), np.full(g.n, 1.3)),
    ]
    m = 0.1 + 0.3 * np.cos(np.pi * x)  # sign-changing, positive mean
    for name, d1, d2, alpha, beta in cases:
        lam0 = principal_eigen(switching_problem(g, d1, d2, alpha, beta, m)).lam
        lam_a = scalar_eigenvalue(g, d1, m - alpha).lam
        lam_b = scalar_eigenvalue(g, d2, m - beta).lam
        dominated = lam0 > max(lam_a, lam_b) + 1e-9
        out.append(
            _check(
                group,
                f"strict-domination-{name}",
                dominated,
                f"lambda0={lam0:.6f} > max({lam_a:.6f}, {lam_b:.6f})",
            )
        )
        mean_growth = integrate(g, m)
        penalty = 0.5 * integrate(g, (np.sqrt(alpha) - np.sqrt(beta)) ** 2)
        cond = lam_a >= 0 or mean_growth >= penalty
        if cond:
            out.append(
                _check(
                    group,
                    f"positive-when-sufficient-{name}",
                    lam0 > 1e-9,
                    f"lambda0={lam0:.6f} with lambda(d1, m-alpha)={lam_a:.4f}, "
                    f"mean={mean_growth:.4f}, penalty={penalty:.4f}",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Group 5: derivative of the growth-scaled eigenvalue at zero


def check_growth_derivative(ctx: VerifyContext) -> list[CheckResult]:
    group = "growth-derivative"
    g = ctx.grid(ctx.n_eigen)
    x = g.nodes
    out = []
    d1, d2 = 0.1, 1.0

    alpha = 1.0 + 0.5 * np.cos(np.pi * x)
    beta = np.full(g.n, 1.0)
    m = np.cos(2.0 * np.pi * x) - 0.2
    slope = lambda_prime_at_zero(g, d1, d2, alpha, beta, m)
    h = 1e-4
    fd = (
        lambda_of_mu(g, d1, d2, alpha, beta, m, h)
        - lambda_of_mu(g, d1, d2, alpha, beta, m, -h)
    ) / (2.0 * h)
    out.append(
        _check(
            group,
            "closed-formula-vs-central-difference",
            abs(slope - fd) <= 1e-5,
            f"formula {slope:.9f} vs difference {fd:.9f}",
        )
    )

    state = principal_eigen(switching_problem(g, d1, d2, alpha, beta, np.zeros(g.n)))
    combo = d1 * state.eigenfunctions[0] + d2 * state.eigenfunctions[1]
    dev = (float(np.max(combo)) - float(np.min(combo))) / float(np.mean(combo))
    out.append(
        _check(group, "weighted-combination-constant", dev <= 1e-6, f"relative deviation {dev:.3e}")
    )

    beta_var = 1.0 + 0.3 * np.cos(2.0 * np.pi * x)
    for name, m_case, expected in (
        ("zero-mean", np.cos(2.0 * np.pi * x), 0.0),
        ("negative-mean", np.cos(2.0 * np.pi * x) - 0.2, -0.2),
    ):
        slope_k = lambda_prime_at_zero(g, d1, d2, 2.0 * beta_var, beta_var, m_case)
        out.append(
            _check(
                group,
                f"constant-ratio-slope-{name}",
                abs(slope_k - expected) <= 1e-7,
                f"slope {slope_k:.9f} vs mean growth {expected}",
            )
        )

    alpha_c = np.full(g.n, 1.0)
    m0 = np.cos(2.0 * np.pi * x) - 0.15
    curve = lambda mu: lambda_of_mu(g, d1, d2, alpha_c, alpha_c, m0, mu)
    roots = find_mu_roots(curve, (1e-2, 1e2), name="mu_zero")
    lam_at_one = curve(1.0)
    ok = len(roots) == 1 and np.sign(1.0 - roots[0].root) == np.sign(lam_at_one)
    out.append(
        _check(
            group,
            "unique-critical-scaling",
            ok,
            f"{len(roots)} root(s), mu0={roots[0].root:.6f} vs lambda(1)={lam_at_one:.6f}"
            if roots
            else "no root found",
        )
    )
    if roots:
        roots2 = find_mu_roots(
            lambda mu: lambda_of_mu(g, d1, d2, alpha_c, alpha_c, 2.0 * m0, mu),
            (1e-2, 1e2),
            name="mu_zero",
        )
        ok2 = len(roots2) == 1 and abs(roots2[0].root - 0.5 * roots[0].root) <= 1e-6 * roots[0].root
        out.append(
            _check(
                group,
                "critical-scaling-halves-under-doubled-growth",
                ok2,
                f"mu0(2m)={roots2[0].root:.8f} vs mu0(m)/2={(0.5 * roots[0].root):.8f}"
                if roots2
                else "no root found",
            )
        )

    mu_conv = [curve(mu) for mu in (0.3, 0.9, 1.5)]
    convex = mu_conv[1] <= 0.5 * (mu_conv[0] + mu_conv[2]) + 1e-9
    out.append(_check(group, "convexity-on-lattice", convex, "midpoint below chord"))
    return out


# ---------------------------------------------------------------------------
# Group 6: common-diffusion scaling family


def check_diffusion_scaling(ctx: VerifyContext) -> list[CheckResult]:
    group = "diffusion-scaling"
    out = []
    g = ctx.grid(ctx.n_eigen)
    x = g.nodes
    alpha = np.full(g.n, 1.0)
    beta = np.full(g.n, 0.7)
    m = np.cos(2.0 * np.pi * x) - 0.1
    d0 = 10.0
    worst = 0.0
    for mu in (0.5, 2.0, 10.0):
        left = principal_eigen(family_problem(g, 1.0, d0, alpha, beta, m, mu)).lam
        right = mu * principal_eigen(family_problem(g, 1.0 / mu, d0, alpha, beta, m, 1.0)).lam
        worst = max(worst, abs(left - right) / (1.0 + abs(left)))
    out.append(
        _check(group, "scaling-identity", worst <= 1e-8, f"worst relative mismatch {worst:.3e}")
    )

    gf = ctx.grid(ctx.n_fine)
    mf = -0.5 + 4.0 * np.cos(np.pi * gf.nodes)
    ones = np.full(gf.n, 1.0)
    lams = [
        principal_eigen(family_problem(gf, d, 1.2, ones, ones, mf, 1.0)).lam
        for d in (0.1, 0.03, 0.01, 0.003)
    ]
    spread = float(np.max(mf) - np.min(mf))
    gap = float(np.max(mf)) - lams[-1]
    mono = all(lams[i] < lams[i + 1] for i in range(len(lams) - 1))
    out.append(
        _check(
            group,
            "small-diffusion-limit",
            mono and gap <= 0.05 * spread,
            f"lambda at d=0.003 within {gap:.4f} of max growth (allowed {0.05 * spread:.4f})",
        )
    )

    m4 = -0.5 + 4.0 * np.cos(np.pi * x)
    ones4 = np.full(g.n, 1.0)
    curve = lambda mu: principal_eigen(family_problem(g, 1.0, 1.2, ones4, ones4, m4, mu)).lam
    lam_small = curve(0.01)
    roots = find_mu_roots(curve, (0.01, 100.0), name="mu_family", scan_points=48)
    lam_large = curve(roots[-1].root * 4.0) if roots else curve(100.0)
    ok = lam_small < 0 and lam_large > 0 and len(roots) >= 1
    out.append(
        _check(
            group,
            "negative-mean-sign-change",
            ok,
            f"lambda(mu=0.01)={lam_small:.4f}, {len(roots)} root(s), "
            f"lambda(beyond)={lam_large:.4f}",
        )
    )
    return out


# ---------------------------------------------------------------------------
# Group 7: extinction/persistence dichotomy


def check_dichotomy(ctx: VerifyContext) -> list[CheckResult]:
    group = "extinction-persistence"
    out = []
    g = ctx.grid(ctx.n_dynamics)
    x = g.nodes
    ones = np.full(g.n, 1.0)
    d1, d2 = 0.1, 1.0
    m0 = np.cos(2.0 * np.pi * x) - 0.15
    curve = lambda mu: lambda_of_mu(g, d1, d2, ones, ones, m0, mu)
    roots = find_mu_roots(curve, (1e-2, 1e2), name="mu_zero")
    if len(roots) != 1:
        return [_check(group, "setup-critical-scaling", False, f"{len(roots)} roots found")]
    mu0 = roots[0].root

    battery = [
        ("positive-mean", 0.4 + 0.3 * np.cos(np.pi * x), SolverOptions(dt=0.02, sample_every=2.0)),
        ("sign-changing-positive-mean", 0.1 + 0.3 * np.cos(np.pi * x), SolverOptions(dt=0.02, sample_every=2.0)),
        ("well-below-critical-scaling", 0.35 * mu0 * m0, SolverOptions(dt=0.02, sample_every=2.0)),
        ("below-critical-scaling", 0.7 * mu0 * m0, SolverOptions(dt=0.02, sample_every=2.0)),
        ("at-critical-scaling", mu0 * m0,
         SolverOptions(dt=0.05, t_max=20000.0, sample_every=50.0)),
        ("above-critical-scaling", 1.6 * mu0 * m0, SolverOptions(dt=0.02, sample_every=2.0)),
    ]
    params = ModelParams(
        d1=d1, d2=d2,
        alpha=CoefficientSpec.constant(1.0),
        beta=CoefficientSpec.constant(1.0),
        m=CoefficientSpec.constant(1.0),  # replaced per case below
    )
    for name, m_field, opts in battery:
        local = replace(params, m=CoefficientSpec.from_samples(m_field))
        problem = switching_problem(g, d1, d2, ones, ones, m_field)
        primal = principal_eigen(problem)
        lam0 = primal.lam
        start = constant_state(SystemKind.TWO_SPECIES_GENERAL, g, [0.3, 0.3])
        res = integrate_to_steady(SystemKind.TWO_SPECIES_GENERAL, local, g, start, opts)
        floor = persistence_floor(res.trajectory)
        mass = float(np.sum(res.state.components @ g.quadrature_weights))
        persistent = floor > 1e-4
        extinct = mass < 1e-6
        if lam0 > 1e-6:
            ok, expect = persistent and not extinct, "persistence"
        elif lam0 < -1e-6:
            ok, expect = extinct and not persistent, "extinction"
        else:
            ok, expect = (not persistent) and (not extinct), "slow algebraic decay"
        out.append(
            _check(
                group,
                f"dichotomy-{name}",
                ok,
                f"lambda0={lam0:+.6f}, expected {expect}: floor={floor:.3e}, mass={mass:.3e}",
            )
        )
        if name == "at-critical-scaling":
            adjoint = adjoint_principal_eigen(problem, primal=primal)
            series = monitor_lyapunov(res.trajectory, adjoint)
            decreasing = bool(np.all(np.diff(series) < 0))
            out.append(
                _check(
                    group,
                    "weighted-mass-strictly-decreasing",
                    decreasing,
                    f"{len(series)} samples from {series[0]:.4e} to {series[-1]:.4e}",
                )
            )
            # Probe after a short transient so the state sits near the decaying
            # eigenline, where the one-step difference is well resolved.
            warmup = integrate_to_steady(
                SystemKind.TWO_SPECIES_GENERAL, local, g,
                constant_state(SystemKind.TWO_SPECIES_GENERAL, g, [0.3, 0.25]),
                SolverOptions(dt=0.01, t_max=2.0, tol=0.0, sample_every=1.0,
                              store_fields=False),
            )
            probe = warmup.state
            dt_id = 0.01
            lhs, rhs = lyapunov_identity(
                SystemKind.TWO_SPECIES_GENERAL, local, g, probe, dt_id, adjoint
            )
            rel = abs(lhs - rhs) / abs(rhs)
            out.append(
                _check(
                    group,
                    "decay-identity-one-step",
                    rel <= 5.0 * dt_id,
                    f"discrete d/dt {lhs:.6e} vs quadratic sink {rhs:.6e} (rel {rel:.3e})",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Group 8: uniqueness of the competitive positive steady state


def check_competitive_uniqueness(ctx: VerifyContext) -> list[CheckResult]:
    group = "competitive-uniqueness"
    out = []
    g = ctx.grid(ctx.n_dynamics)
    params = ModelParams(
        d1=0.1, d2=1.0, b=0.5, c=0.5,
        alpha=CoefficientSpec.constant(0.05),
        beta=CoefficientSpec.constant(0.05),
        m=CoefficientSpec.cosine(1.0, 0.2, 1),
    )
    regime = classify_regime(params, g)
    out.append(
        _check(
            group,
            "eventually-competitive-regime",
            regime.in_s1 and params.b * params.c <= 1.0,
            f"in_s1={regime.in_s1}, k={regime.k:.3f}, bc={params.b * params.c}",
        )
    )
    opts = SolverOptions(dt=0.02, sample_every=5.0, store_fields=False)
    finals = []
    for i in range(3):
        start = random_state(SystemKind.TWO_SPECIES_GENERAL, g, 0.1, 1.0, ctx.seed + 100 + i)
        res = integrate_to_steady(SystemKind.TWO_SPECIES_GENERAL, params, g, start, opts)
        if not res.converged:
            out.append(_check(group, f"steady-run-{i}", False, "did not converge"))
            return out
        finals.append(res.state.components)
    worst = max(
        float(np.max(np.abs(finals[i] - finals[j])))
        for i in range(3)
        for j in range(i + 1, 3)
    )
    out.append(
        _check(group, "three-seeds-agree", worst <= 1e-6, f"worst pairwise sup distance {worst:.3e}")
    )
    mean_state = sum(finals) / 3.0
    coeffs = sample_coefficients(params, g)
    lam, _ = dense_rightmost(
        an.pair_linearization_dense(params, g, coeffs, mean_state[0], mean_state[1])
    )
    out.append(
        _check(
            group,
            "limit-linearly-stable",
            lam.real < -1e-9,
            f"rightmost eigenvalue {lam.real:.6e}",
        )
    )
    return out


# ---------------------------------------------------------------------------
# Group 9: invasion eigenvalue brackets


def check_invasion_brackets(ctx: VerifyContext) -> list[CheckResult]:
    group = "invasion-brackets"
    if not ctx.hypothesis_ok():
        return [_skip(group, "all", "growth hypothesis fails for the configured scenario")]
    out = []
    g = ctx.grid(ctx.n_eigen)
    params = ctx.params
    coeffs = sample_coefficients(params, g)
    pair = ctx.pair_steady(ctx.n_eigen)
    u, v = pair.state.components
    pot = coeffs.m - u - v
    nonconst = float(np.max(pot) - np.min(pot))
    out.append(
        _check(group, "leftover-growth-non-constant", nonconst > 1e-6, f"spread {nonconst:.3e}")
    )
    alpha = float(np.max(coeffs.alpha))
    beta = float(np.max(coeffs.beta))
    d_avg = an.weighted_average_diffusion(params, alpha, beta)
    lam_lo = scalar_eigenvalue(g, params.d1, pot).lam
    lam_hi = scalar_eigenvalue(g, d_avg, pot).lam
    out.append(
        _check(
            group,
            "pair-state-endpoint-signs",
            lam_lo > 1e-9 and lam_hi < -1e-9,
            f"lambda({params.d1})={lam_lo:.5f}, lambda({d_avg})={lam_hi:.5f}",
        )
    )
    dc = an.find_threshold("d_c", params, g)
    out.append(
        _check(
            group,
            "pair-state-threshold-inside-bracket",
            params.d1 < dc.root < d_avg and dc.residual <= 1e-8,
            f"d_c={dc.root:.6f} in ({params.d1}, {d_avg:.3f}), residual {dc.residual:.2e}",
        )
    )
    lam2_lo = an.lambda2_eigenpair(
        replace(params, d3=params.d1), g,
        ctx.w_steady(ctx.n_eigen, params.d1).state.components[0], coeffs
    ).lam
    lam2_hi = an.lambda2_eigenpair(
        replace(params, d3=d_avg), g,
        ctx.w_steady(ctx.n_eigen, d_avg).state.components[0], coeffs
    ).lam
    out.append(
        _check(
            group,
            "single-state-endpoint-signs",
            lam2_lo < -1e-9 and lam2_hi > 1e-9,
            f"lambda2({params.d1})={lam2_lo:.5f}, lambda2({d_avg:.3f})={lam2_hi:.5f}",
        )
    )
    roots = an.lambda2_sign_changes(params, g)
    out.append(
        _check(
            group,
            "single-state-sign-change-found",
            len(roots) >= 1,
            f"{len(roots)} sign change(s): {[f'{r.root:.5f}' for r in roots]}",
        )
    )
    return out


# ---------------------------------------------------------------------------
# Group 10: exclusion dynamics in the diffusion rate


def check_exclusion_dynamics(ctx: VerifyContext) -> list[CheckResult]:
    group = "exclusion-dynamics"
    if not ctx.hypothesis_ok():
        return [_skip(group, "all", "growth hypothesis fails for the configured scenario")]
    out = []
    g = ctx.grid(ctx.n_dynamics)
    params = ctx.params
    sweep = an.sweep_outcomes(params, g, "d3", [0.05, 0.08, 0.6, 1.5])
    expected = {0.05: "w_wins", 0.08: "w_wins", 0.6: "uv_wins", 1.5: "uv_wins"}
    for point in sweep.points:
        out.append(
            _check(
                group,
                f"outcome-at-d3-{point.value}",
                point.outcome == expected[point.value],
                f"outcome={point.outcome}, lambda_uv0={point.lambda_uv0:+.5f}, "
                f"lambda2={point.lambda_00w:+.5f}",
            )
        )
        if point.outcome == "w_wins":
            consistent = point.lambda_00w < 1e-6 and point.lambda_uv0 > -1e-6
        elif point.outcome == "uv_wins":
            consistent = point.lambda_uv0 < 1e-6 and point.lambda_00w > -1e-6
        else:
            consistent = True
        out.append(
            _check(group, f"signs-consistent-at-d3-{point.value}", consistent,
                   "winner stable, loser invadable")
        )

    opts = SolverOptions(dt=0.05, sample_every=5.0, store_fields=False)
    for d3 in (0.05, 1.5):
        local = replace(params, d3=d3)
        loser_max = 0.0
        winner_min = np.inf
        for i in range(5):
            start = random_state(SystemKind.THREE_COMPONENT, g, 0.05, 0.4, ctx.seed + 200 + i)
            res = integrate_to_steady(SystemKind.THREE_COMPONENT, local, g, start, opts)
            masses = res.state.components @ g.quadrature_weights
            if d3 < params.d1:
                loser_max = max(loser_max, masses[0] + masses[1])
                winner_min = min(winner_min, masses[2])
            else:
                loser_max = max(loser_max, masses[2])
                winner_min = min(winner_min, masses[0] + masses[1])
        out.append(
            _check(
                group,
                f"no-coexistence-at-d3-{d3}",
                loser_max < 1e-6 and winner_min > 1e-4,
                f"5 seeds: loser mass <= {loser_max:.2e}, winner mass >= {winner_min:.2e}",
            )
        )
    return out


# ---------------------------------------------------------------------------
# Group 11: switching-rate thresholds


def check_switching_thresholds(ctx: VerifyContext) -> list[CheckResult]:
    group = "switching-thresholds"
    params = ctx.params
    g = ctx.grid(ctx.n_eigen)
    coeffs = sample_coefficients(params, g)
    if not ctx.hypothesis_ok() or not params.d1 < params.d3 < params.d2:
        return [_skip(group, "all", "needs the growth hypothesis and d1 < d3 < d2")]
    if float(np.max(coeffs.m)) > min(np.min(coeffs.alpha), np.min(coeffs.beta)):
        return [_skip(group, "all", "needs max m <= alpha and max m <= beta")]
    out = []
    w_star = ctx.w_steady(ctx.n_eigen, params.d3).state.components[0]
    growth = coeffs.m - w_star
    alpha_const = float(np.max(coeffs.alpha))
    beta_const = float(np.max(coeffs.beta))

    hi_beta = (params.d2 - params.d3) / (params.d3 - params.d1) * alpha_const
    beta_curve = lambda b_val: principal_eigen(
        switching_problem(g, params.d1, params.d2, coeffs.alpha, np.full(g.n, b_val), growth)
    ).lam
    lattice_roots = find_mu_roots(beta_curve, (1e-4 * hi_beta, hi_beta), name="beta_c",
                                  scan_points=64)
    out.append(
        _check(
            group,
            "one-sign-change-in-beta",
            len(lattice_roots) == 1,
            f"{len(lattice_roots)} sign change(s) on the 64-point lattice",
        )
    )
    beta_c = an.find_threshold("beta_c", params, g)
    out.append(
        _check(
            group,
            "beta-threshold-inside-bracket",
            0.0 < beta_c.root < hi_beta and beta_c.residual <= 1e-8,
            f"beta_c={beta_c.root:.6f} in (0, {hi_beta:.3f}), residual {beta_c.residual:.2e}",
        )
    )

    def beta_slope(b_val: float) -> float:
        local = replace(params, beta=CoefficientSpec.constant(b_val))
        eig = an.lambda2_eigenpair(local, g, w_star)
        return an.lambda2_sensitivity(local, g, "beta", w_star=w_star, eig=eig)

    h = 1e-3
    probe = 1.0
    fd = (beta_curve(probe + h) - beta_curve(probe - h)) / (2.0 * h)
    slope = beta_slope(probe)
    out.append(
        _check(
            group,
            "beta-derivative-formula",
            abs(slope - fd) <= 1e-4,
            f"formula {slope:.7f} vs difference {fd:.7f}",
        )
    )
    slope_at_root = beta_slope(beta_c.root)
    out.append(
        _check(group, "beta-derivative-positive-at-root", slope_at_root > 0,
               f"slope {slope_at_root:.6f}")
    )

    lo_alpha = (params.d3 - params.d1) / (params.d2 - params.d3) * beta_const
    alpha_c = an.find_threshold("alpha_c", params, g)
    out.append(
        _check(
            group,
            "alpha-threshold-beyond-lower-bound",
            alpha_c.root > lo_alpha and alpha_c.residual <= 1e-8,
            f"alpha_c={alpha_c.root:.6f} > {lo_alpha:.3f}, residual {alpha_c.residual:.2e}",
        )
    )

    def alpha_slope(a_val: float) -> float:
        local = replace(params, alpha=CoefficientSpec.constant(a_val))
        eig = an.lambda2_eigenpair(local, g, w_star)
        return an.lambda2_sensitivity(local, g, "alpha", w_star=w_star, eig=eig)

    alpha_curve = lambda a_val: principal_eigen(
        switching_problem(g, params.d1, params.d2, np.full(g.n, a_val), coeffs.beta, growth)
    ).lam
    fd_a = (alpha_curve(probe + h) - alpha_curve(probe - h)) / (2.0 * h)
    slope_a = alpha_slope(probe)
    out.append(
        _check(
            group,
            "alpha-derivative-formula",
            abs(slope_a - fd_a) <= 1e-4,
            f"formula {slope_a:.7f} vs difference {fd_a:.7f}",
        )
    )
    slope_a_root = alpha_slope(alpha_c.root)
    out.append(
        _check(group, "alpha-derivative-negative-at-root", slope_a_root < 0,
               f"slope {slope_a_root:.6f}")
    )
    ctx.cached("beta_c", lambda: beta_c)
    ctx.cached("alpha_c", lambda: alpha_c)
    return out


# ---------------------------------------------------------------------------
# Group 12: switching-rate dynamics


def check_switching_dynamics(ctx: VerifyContext) -> list[CheckResult]:
    group = "switching-dynamics"
    params = ctx.params
    g = ctx.grid(ctx.n_dynamics)
    coeffs = sample_coefficients(params, ctx.grid(ctx.n_eigen))
    if not ctx.hypothesis_ok() or not params.d1 < params.d3 < params.d2:
        return [_skip(group, "all", "needs the growth hypothesis and d1 < d3 < d2")]
    if float(np.max(coeffs.m)) > min(np.min(coeffs.alpha), np.min(coeffs.beta)):
        return [_skip(group, "all", "needs max m <= alpha and max m <= beta")]
    out = []
    beta_c = ctx.cached("beta_c", lambda: an.find_threshold("beta_c", params, ctx.grid(ctx.n_eigen)))
    alpha_c = ctx.cached("alpha_c", lambda: an.find_threshold("alpha_c", params, ctx.grid(ctx.n_eigen)))

    # Far from the thresholds the invasion eigenvalues are still only a few
    # 1e-3 for this scenario, so exclusion needs a long horizon.
    slow_opts = SolverOptions(dt=0.05, t_max=8000.0, sample_every=20.0, store_fields=False)
    hi_beta = (params.d2 - params.d3) / (params.d3 - params.d1) * float(np.max(coeffs.alpha))
    beta_vals = [0.05 * beta_c.root, min(4.0 * beta_c.root, 0.95 * hi_beta)]
    sweep_b = an.sweep_outcomes(params, g, "beta", beta_vals, opts=slow_opts)
    expected_b = {beta_vals[0]: "w_wins", beta_vals[1]: "uv_wins"}
    for point in sweep_b.points:
        out.append(
            _check(
                group,
                f"outcome-at-beta-{point.value:.4f}",
                point.outcome == expected_b[point.value],
                f"outcome={point.outcome}, lambda_uv0={point.lambda_uv0:+.5f}, "
                f"lambda2={point.lambda_00w:+.5f}",
            )
        )

    alpha_vals = [0.05 * alpha_c.root, 4.0 * alpha_c.root]
    sweep_a = an.sweep_outcomes(params, g, "alpha", alpha_vals, opts=slow_opts)
    expected_a = {alpha_vals[0]: "uv_wins", alpha_vals[1]: "w_wins"}
    for point in sweep_a.points:
        out.append(
            _check(
                group,
                f"outcome-at-alpha-{point.value:.4f}",
                point.outcome == expected_a[point.value],
                f"outcome={point.outcome}, lambda_uv0={point.lambda_uv0:+.5f}, "
                f"lambda2={point.lambda_00w:+.5f}",
            )
        )
    return out


CHECKERS: dict[str, Callable[[VerifyContext], list[CheckResult]]] = {
    "mesh-order": check_mesh_order,
    "eigen-oracle": check_eigen_oracle,
    "scalar-eigenvalue-laws": check_scalar_laws,
    "pair-positivity": check_pair_positivity,
    "growth-derivative": check_growth_derivative,
    "diffusion-scaling": check_diffusion_scaling,
    "extinction-persistence": check_dichotomy,
    "competitive-uniqueness": check_competitive_uniqueness,
    "invasion-brackets": check_invasion_brackets,
    "exclusion-dynamics": check_exclusion_dynamics,
    "switching-thresholds": check_switching_thresholds,
    "switching-dynamics": check_switching_dynamics,
}


def run_battery(
    ctx: Optional[VerifyContext] = None, groups: Optional[list[str]] = None
) -> list[CheckResult]:
    """Run the named check groups (all by default) and collect results."""
    ctx = ctx or VerifyContext()
    selected = groups or list(GROUPS)
    unknown = [gname for gname in selected if gname not in CHECKERS]
    if unknown:
        raise ValueError(f"unknown verify groups: {unknown}")
    results: list[CheckResult] = []
    for gname in selected:
        try:
            results.extend(CHECKERS[gname](ctx))
        except HypothesisError as exc:
            results.append(_skip(gname, "all", f"hypothesis violation: {exc}"))
        except Exception as exc:
            results.append(CheckResult(gname, "execution", "FAIL", f"{type(exc).__name__}: {exc}"))
    return results
