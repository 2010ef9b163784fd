import numpy as np
import pytest
from dataclasses import replace

from dispersal_lab.mesh import build_grid
from dispersal_lab.model import (
    CoefficientSpec,
    HypothesisError,
    ModelParams,
    sample_coefficients,
)
from dispersal_lab.analysis import (
    classify_endpoint,
    find_threshold,
    lambda2_eigenpair,
    lambda2_sensitivity,
    linearized_stability,
    logistic_steady,
    subsystem_steady,
    sweep_outcomes,
    weighted_average_diffusion,
)
from dispersal_lab.spectral import principal_eigen, switching_problem


@pytest.fixture(scope="module")
def grid():
    return build_grid(0, 1, 201)


@pytest.fixture(scope="module")
def params():
    return ModelParams(
        d1=0.1,
        d2=1.0,
        d3=0.4,
        alpha=CoefficientSpec.constant(1.0),
        beta=CoefficientSpec.constant(1.0),
        m=CoefficientSpec.cosine(0.4, 0.3, 1),
    )


@pytest.fixture(scope="module")
def pair(params, grid):
    return subsystem_steady(params, grid)


@pytest.fixture(scope="module")
def w_star(params, grid):
    return logistic_steady(params, grid)


def test_pair_state_unstable_at_slow_rate(params, grid, pair):
    local = replace(params, d3=params.d1)
    report = linearized_stability(None, local, grid, pair, "uv_zero")
    assert report.classification == "linearly_unstable"
    assert report.principal_eigenvalue > 1e-9


def test_single_state_stable_at_slow_rate(params, grid):
    local = replace(params, d3=params.d1)
    w_slow = logistic_steady(local, grid)
    report = linearized_stability(None, local, grid, w_slow, "w_only")
    assert report.classification == "linearly_stable"
    assert report.principal_eigenvalue < -1e-9


def test_positive_pair_stable_in_competitive_regime(grid):
    competitive = ModelParams(
        d1=0.1, d2=1.0, b=0.5, c=0.5,
        alpha=CoefficientSpec.constant(0.05),
        beta=CoefficientSpec.constant(0.05),
        m=CoefficientSpec.cosine(1.0, 0.2, 1),
    )
    from dispersal_lab.dynamics import SolverOptions, constant_state, integrate_to_steady
    from dispersal_lab.model import SystemKind

    steady = integrate_to_steady(
        SystemKind.TWO_SPECIES_GENERAL, competitive, grid,
        constant_state(SystemKind.TWO_SPECIES_GENERAL, grid, [0.5, 0.5]),
        SolverOptions(dt=0.02, sample_every=10.0, store_fields=False),
    )
    assert steady.converged
    report = linearized_stability(None, competitive, grid, steady, "positive_pair")
    assert report.classification == "linearly_stable"


def test_trivial_state_classification(params, grid):
    report = linearized_stability(None, params, grid, None, "trivial")
    assert report.classification == "linearly_unstable"


def test_d_c_inside_proved_bracket(params, grid):
    result = find_threshold("d_c", params, grid)
    hi = weighted_average_diffusion(params, 1.0, 1.0)
    assert params.d1 < result.root < hi
    assert result.residual <= 1e-8
    assert result.sign_left == 1 and result.sign_right == -1


def test_beta_c_and_guard(params, grid):
    result = find_threshold("beta_c", params, grid)
    assert 0 < result.root < 2.0
    bad = replace(params, d3=1.5)
    with pytest.raises(HypothesisError):
        find_threshold("beta_c", bad, grid)


def test_threshold_requires_growth_hypothesis(grid, params):
    bad = replace(params, m=CoefficientSpec.constant(3.0))
    with pytest.raises(HypothesisError):
        find_threshold("d_c", bad, grid)


def test_threshold_requires_constant_rates(grid, params):
    varying = replace(params, alpha=CoefficientSpec.cosine(1.0, 0.2, 1))
    with pytest.raises(HypothesisError):
        find_threshold("d_c", varying, grid)


def test_lambda2_sensitivity_matches_difference(params, grid, w_star):
    coeffs = sample_coefficients(params, grid)
    w_field = w_star.state.components[0]
    growth = coeffs.m - w_field

    def curve(beta_val):
        problem = switching_problem(
            grid, params.d1, params.d2, coeffs.alpha, np.full(grid.n, beta_val), growth
        )
        return principal_eigen(problem).lam

    h = 1e-3
    fd = (curve(1.0 + h) - curve(1.0 - h)) / (2 * h)
    slope = lambda2_sensitivity(params, grid, "beta", w_star=w_field)
    assert abs(slope - fd) <= 1e-4


def test_lambda2_eigenpair_positive(params, grid, w_star):
    eig = lambda2_eigenpair(params, grid, w_star.state.components[0])
    assert np.min(eig.eigenfunctions) > 0


def test_classify_endpoint():
    assert classify_endpoint(np.array([1e-8, 1e-7, 0.3])) == "w_wins"
    assert classify_endpoint(np.array([0.2, 0.1, 1e-9])) == "uv_wins"
    assert classify_endpoint(np.array([1e-5, 1e-5, 0.3])) == "undetermined"
    assert classify_endpoint(np.array([1e-8, 1e-8, 1e-8])) == "undetermined"


def test_sweep_validates_parameter(params, grid):
    with pytest.raises(ValueError):
        sweep_outcomes(params, grid, "d1", [0.1])


def test_sweep_end_members(params):
    coarse = build_grid(0, 1, 101)
    report = sweep_outcomes(params, coarse, "d3", [0.05, 1.5])
    outcomes = {p.value: p.outcome for p in report.points}
    assert outcomes[0.05] == "w_wins"
    assert outcomes[1.5] == "uv_wins"
    assert report.empirical_c1 == 0.05
    assert report.empirical_c2 == 1.5
    for p in report.points:
        if p.outcome == "w_wins":
            assert p.lambda_00w < 1e-6 and p.lambda_uv0 > -1e-6
        if p.outcome == "uv_wins":
            assert p.lambda_uv0 < 1e-6 and p.lambda_00w > -1e-6
