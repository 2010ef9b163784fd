import numpy as np
import pytest

from dispersal_lab.mesh import build_grid
from dispersal_lab.spectral import (
    CooperativityError,
    ThresholdResult,
    adjoint_principal_eigen,
    assemble_dense,
    component_weights,
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


@pytest.fixture(scope="module")
def grid():
    return build_grid(0, 1, 201)


def test_scalar_constant_potential(grid):
    res = scalar_eigenvalue(grid, 0.7, np.full(grid.n, 1.5))
    assert abs(res.lam - 1.5) < 1e-12
    phi = res.eigenfunctions[0]
    assert np.max(phi) - np.min(phi) < 1e-10


def test_constant_coefficients_coupled(grid):
    m0, a0, b0 = 0.8, 2.0, 0.5
    problem = switching_problem(
        grid, 0.1, 1.0, np.full(grid.n, a0), np.full(grid.n, b0), np.full(grid.n, m0)
    )
    res = principal_eigen(problem)
    assert abs(res.lam - m0) < 1e-9
    ratio = res.eigenfunctions[0] / res.eigenfunctions[1]
    assert np.allclose(ratio, b0 / a0, atol=1e-8)


def test_adjoint_matches_and_is_uniform_for_constants(grid):
    # The transposed coupling keeps row sums equal to m0, so its positive
    # eigenvector is spatially and componentwise constant.
    problem = switching_problem(
        grid, 0.1, 1.0, np.full(grid.n, 2.0), np.full(grid.n, 0.5), np.full(grid.n, 0.8)
    )
    primal = principal_eigen(problem)
    adj = adjoint_principal_eigen(problem, primal=primal)
    assert abs(adj.lam - primal.lam) <= 1e-8 * (1 + abs(primal.lam))
    assert np.max(np.abs(adj.eigenfunctions - 1.0)) < 1e-8


def test_adjoint_eigenvalue_matches_on_variable_problem(grid):
    x = grid.nodes
    problem = switching_problem(
        grid, 0.2, 0.9, 1.0 + 0.5 * np.cos(np.pi * x), np.full(grid.n, 0.8),
        np.cos(2 * np.pi * x),
    )
    primal = principal_eigen(problem)
    adj = adjoint_principal_eigen(problem, primal=primal)
    assert abs(adj.lam - primal.lam) <= 1e-8 * (1 + abs(primal.lam))
    assert np.min(adj.eigenfunctions) > 0


def test_adjoint_biorthogonal_to_secondary_eigenvector(grid):
    problem = switching_problem(
        grid, 0.1, 1.0, np.full(grid.n, 1.0), np.full(grid.n, 0.6), np.full(grid.n, 0.4)
    )
    adj = adjoint_principal_eigen(problem)
    dense = assemble_dense(problem)
    eigvals, eigvecs = np.linalg.eig(dense)
    order = np.argsort(-eigvals.real)
    secondary = eigvecs[:, order[1]].real
    w = component_weights(grid, 2)
    psi = adj.eigenfunctions.T.reshape(-1)
    pairing = float(np.sum(w * psi * secondary))
    scale = np.linalg.norm(psi) * np.linalg.norm(secondary) / grid.n
    assert abs(pairing) <= 1e-8 * scale * grid.n


def test_eigenfunctions_strictly_positive(grid):
    x = grid.nodes
    problem = switching_problem(
        grid, 0.05, 1.0, 0.5 + 0.4 * np.cos(np.pi * x), np.full(grid.n, 1.0),
        np.cos(2 * np.pi * x) - 0.3,
    )
    res = principal_eigen(problem)
    assert np.min(res.eigenfunctions) > 0


def test_strict_domination_over_single_rate_eigenvalues(grid):
    x = grid.nodes
    alpha = np.full(grid.n, 1.0)
    beta = np.full(grid.n, 1.0)
    m = np.cos(2 * np.pi * x)
    lam0 = principal_eigen(switching_problem(grid, 0.1, 1.0, alpha, beta, m)).lam
    lam1 = scalar_eigenvalue(grid, 0.1, m - alpha).lam
    lam2 = scalar_eigenvalue(grid, 1.0, m - beta).lam
    assert lam0 > max(lam1, lam2) + 1e-9


def test_monotone_decreasing_in_diffusion(grid):
    e = np.cos(2 * np.pi * grid.nodes) + 0.1
    lams = [scalar_eigenvalue(grid, d, e).lam for d in (0.1, 0.3, 1.0, 3.0)]
    assert all(lams[i] > lams[i + 1] + 1e-9 for i in range(3))
    const = np.full(grid.n, 0.3)
    lams_const = [scalar_eigenvalue(grid, d, const).lam for d in (0.1, 0.3, 1.0, 3.0)]
    assert max(abs(l - 0.3) for l in lams_const) < 1e-9


def test_monotone_in_potential(grid):
    base = np.cos(2 * np.pi * grid.nodes)
    for d in (0.1, 1.0):
        assert (
            scalar_eigenvalue(grid, d, base + 0.1).lam
            > scalar_eigenvalue(grid, d, base - 0.1).lam + 1e-9
        )


def test_iterative_matches_dense_oracle():
    g = build_grid(0, 1, 101)
    rng = np.random.default_rng(42)
    for case in range(6):
        if case % 2 == 0:
            problem = scalar_problem(g, float(rng.uniform(0.05, 1.5)), rng.uniform(-1, 1, g.n))
        else:
            problem = switching_problem(
                g,
                float(rng.uniform(0.05, 0.4)),
                float(rng.uniform(0.5, 1.5)),
                rng.uniform(0.2, 1.2, g.n),
                rng.uniform(0.2, 1.2, g.n),
                rng.uniform(-1, 1, g.n),
            )
        lam = principal_eigen(problem).lam
        lam_dense, _ = dense_rightmost(assemble_dense(problem))
        assert abs(lam - lam_dense.real) <= 1e-7 * (1 + abs(lam_dense.real))


def test_zero_growth_eigenvalue_is_zero(grid):
    x = grid.nodes
    res = principal_eigen(
        switching_problem(grid, 0.1, 1.0, 1.0 + 0.5 * np.cos(np.pi * x),
                          np.full(grid.n, 1.0), np.zeros(grid.n))
    )
    assert abs(res.lam) < 1e-10
    assert np.min(res.eigenfunctions) > 0


def test_lambda_of_mu_convex(grid):
    x = grid.nodes
    alpha = np.full(grid.n, 1.0)
    m = np.cos(2 * np.pi * x) - 0.15
    vals = [lambda_of_mu(grid, 0.1, 1.0, alpha, alpha, m, mu) for mu in (0.0, 0.5, 1.0)]
    assert abs(vals[0]) < 1e-10
    assert vals[1] <= 0.5 * (vals[0] + vals[2]) + 1e-9


def test_lambda_prime_at_zero_constant_ratio(grid):
    x = grid.nodes
    beta = 1.0 + 0.3 * np.cos(2 * np.pi * x)
    m = np.cos(2 * np.pi * x) - 0.2
    slope = lambda_prime_at_zero(grid, 0.1, 1.0, 2.0 * beta, beta, m)
    assert abs(slope - (-0.2)) < 1e-7


def test_lambda_prime_matches_central_difference(grid):
    x = grid.nodes
    alpha = 1.0 + 0.5 * np.cos(np.pi * x)
    beta = np.full(grid.n, 1.0)
    m = np.cos(2 * np.pi * x) - 0.2
    slope = lambda_prime_at_zero(grid, 0.1, 1.0, alpha, beta, m)
    h = 1e-4
    fd = (
        lambda_of_mu(grid, 0.1, 1.0, alpha, beta, m, h)
        - lambda_of_mu(grid, 0.1, 1.0, alpha, beta, m, -h)
    ) / (2 * h)
    assert abs(slope - fd) <= 1e-5


def test_scaling_identity(grid):
    x = grid.nodes
    alpha = np.full(grid.n, 1.0)
    beta = np.full(grid.n, 0.7)
    m = np.cos(2 * np.pi * x) - 0.1
    for mu in (0.5, 2.0, 10.0):
        left = principal_eigen(family_problem(grid, 1.0, 10.0, alpha, beta, m, mu)).lam
        right = mu * principal_eigen(family_problem(grid, 1.0 / mu, 10.0, alpha, beta, m, 1.0)).lam
        assert abs(left - right) <= 1e-8 * (1 + abs(left))


def test_find_mu_roots_no_sign_change(grid):
    e = np.cos(2 * np.pi * grid.nodes) + 0.05  # nonnegative mean: always positive
    curve = lambda d: scalar_eigenvalue(grid, d, e).lam
    assert find_mu_roots(curve, (0.05, 20.0), scan_points=16) == []


def test_mu_star_sign_law():
    g = build_grid(0, 1, 401)
    e = np.cos(2 * np.pi * g.nodes) - 0.1
    result = mu_star_scalar(g, e)
    assert result.residual <= 1e-8
    assert scalar_eigenvalue(g, 0.5 / result.root, e).lam > 1e-9
    assert scalar_eigenvalue(g, 2.0 / result.root, e).lam < -1e-9


def test_mu_star_rejects_nonnegative_mean(grid):
    from dispersal_lab.model import HypothesisError

    with pytest.raises(HypothesisError):
        mu_star_scalar(grid, np.cos(2 * np.pi * grid.nodes) + 0.1)


def test_coupled_constant_ratio_unique_root(grid):
    x = grid.nodes
    beta = np.full(grid.n, 0.8)
    m = np.cos(2 * np.pi * x) - 0.15
    curve = lambda mu: lambda_of_mu(grid, 0.1, 1.0, 1.5 * beta, beta, m, mu)
    roots = find_mu_roots(curve, (1e-2, 1e2), name="mu_zero")
    assert len(roots) == 1
    assert roots[0].residual <= 1e-8


def test_cooperativity_violations(grid):
    with pytest.raises(CooperativityError):
        switching_problem(
            grid, 0.1, 1.0, np.full(grid.n, -0.5), np.full(grid.n, 1.0), np.zeros(grid.n)
        )
    with pytest.raises(CooperativityError):
        switching_problem(
            grid, 0.1, 1.0, np.zeros(grid.n), np.full(grid.n, 1.0), np.zeros(grid.n)
        )


def test_threshold_result_invariants():
    with pytest.raises(ValueError):
        ThresholdResult("d_c", (0.1, 0.5), 0.6, 1e-10, 1, -1)
    with pytest.raises(ValueError):
        ThresholdResult("d_c", (0.1, 0.5), 0.3, 1e-10, 1, 1)
    with pytest.raises(ValueError):
        ThresholdResult("d_c", (0.1, 0.5), 0.3, 1e-6, 1, -1)
