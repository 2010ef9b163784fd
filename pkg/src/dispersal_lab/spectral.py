"""Principal eigenvalues of cooperative elliptic operators on the grid.

The discrete operators are blocks d_i * L + multiplication couplings,
assembled in a node-interleaved banded layout.  Off-diagonal couplings
are required to be nonnegative (cooperativity): then a shifted resolvent
(sigma*I - A)^{-1} with sigma above the principal eigenvalue is an
inverse M-matrix, hence entrywise positive, and power iteration on it
converges to the unique eigenpair with a componentwise positive
eigenfunction.  Shifts are updated from Collatz-Wielandt / residual
information, so convergence is superlinear in practice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .mesh import Grid, assemble_neumann_laplacian, integrate
from .model import HypothesisError


class CooperativityError(ValueError):
    """Off-diagonal coupling is negative or the coupling graph is reducible."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its tolerance."""


@dataclass(frozen=True)
class EigenProblem:
    """Diffusion rates plus a pointwise coupling-matrix field.

    coupling[i, j, :] multiplies component j in the equation for
    component i.  K = 1 gives the scalar operator d*L + e(x).
    """

    grid: Grid
    diffusions: tuple[float, ...]
    coupling: np.ndarray  # shape (K, K, n)

    def __post_init__(self) -> None:
        K = len(self.diffusions)
        if K not in (1, 2):
            raise ValueError(f"supported component counts are 1 and 2, got {K}")
        if any(d <= 0 for d in self.diffusions):
            raise ValueError(f"diffusion rates must be positive, got {self.diffusions}")
        coupling = np.asarray(self.coupling, dtype=float)
        if coupling.shape != (K, K, self.grid.n):
            raise ValueError(
                f"coupling shape {coupling.shape} does not match ({K}, {K}, {self.grid.n})"
            )
        object.__setattr__(self, "coupling", coupling)
        for i in range(K):
            for j in range(K):
                if i != j and np.min(coupling[i, j]) < 0:
                    raise CooperativityError(
                        f"coupling[{i},{j}] is negative somewhere "
                        f"(min {np.min(coupling[i, j]):.3e}); operator is not cooperative"
                    )
        if K == 2 and (np.max(coupling[0, 1]) <= 0 or np.max(coupling[1, 0]) <= 0):
            raise CooperativityError(
                "both off-diagonal couplings must be positive somewhere (irreducibility)"
            )

    @property
    def n_components(self) -> int:
        return len(self.diffusions)

    def adjoint(self) -> "EigenProblem":
        """Adjoint under the quadrature inner product: couplings transposed pointwise."""
        return EigenProblem(
            grid=self.grid,
            diffusions=self.diffusions,
            coupling=np.swapaxes(self.coupling, 0, 1).copy(),
        )


def scalar_problem(grid: Grid, d: float, potential: np.ndarray) -> EigenProblem:
    potential = grid.check_field(potential)
    return EigenProblem(grid=grid, diffusions=(float(d),), coupling=potential[None, None, :])


def switching_problem(
    grid: Grid,
    d1: float,
    d2: float,
    alpha: np.ndarray,
    beta: np.ndarray,
    growth: np.ndarray,
) -> EigenProblem:
    """Coupled problem [[growth - alpha, beta], [alpha, growth - beta]].

    The growth field is m, mu*m, or m - w_star depending on which
    linearization is being assembled.
    """
    alpha = grid.check_field(alpha)
    beta = grid.check_field(beta)
    growth = grid.check_field(growth)
    coupling = np.stack(
        [np.stack([growth - alpha, beta]), np.stack([alpha, growth - beta])]
    )
    return EigenProblem(grid=grid, diffusions=(float(d1), float(d2)), coupling=coupling)


def family_problem(
    grid: Grid,
    d: float,
    d0: float,
    alpha: np.ndarray,
    beta: np.ndarray,
    m: np.ndarray,
    mu: float,
) -> EigenProblem:
    """Common-scaling family d*diag(L, d0*L) + mu*M with M the switching matrix."""
    alpha = grid.check_field(alpha)
    beta = grid.check_field(beta)
    m = grid.check_field(m)
    coupling = mu * np.stack([np.stack([m - alpha, beta]), np.stack([alpha, m - beta])])
    return EigenProblem(grid=grid, diffusions=(float(d), float(d * d0)), coupling=coupling)


class BandedOperator:
    """Square matrix stored as a few diagonals, offsets -k..k."""

    def __init__(self, size: int, halfband: int):
        self.size = size
        self.halfband = halfband
        self.bands: dict[int, np.ndarray] = {}

    def set_band(self, offset: int, values: np.ndarray) -> None:
        if len(values) != self.size - abs(offset):
            raise ValueError("band length mismatch")
        self.bands[offset] = np.asarray(values, dtype=float)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = np.zeros_like(x)
        for k, band in self.bands.items():
            if k >= 0:
                y[: self.size - k] += band * x[k:]
            else:
                p = -k
                y[p:] += band * x[: self.size - p]
        return y

    def inf_norm(self) -> float:
        acc = np.zeros(self.size)
        for k, band in self.bands.items():
            if k >= 0:
                acc[: self.size - k] += np.abs(band)
            else:
                acc[-k:] += np.abs(band)
        return float(np.max(acc))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.size, self.size))
        for k, band in self.bands.items():
            if k >= 0:
                dense[np.arange(self.size - k), np.arange(k, self.size)] = band
            else:
                p = -k
                dense[np.arange(p, self.size), np.arange(self.size - p)] = band
        return dense

    def solve_shifted(self, sigma: float, rhs: np.ndarray) -> np.ndarray:
        """Solve (sigma*I - A) x = rhs with a banded LAPACK call."""
        u = self.halfband
        ab = np.zeros((2 * u + 1, self.size))
        for k, band in self.bands.items():
            if k >= 0:
                ab[u - k, k:] = -band
            else:
                p = -k
                ab[u + p, : self.size - p] = -band
        ab[u, :] += sigma
        return solve_banded((u, u), ab, rhs)


def assemble_banded(problem: EigenProblem) -> BandedOperator:
    """Node-interleaved banded form: unknown index = K*node + component."""
    K, n = problem.n_components, problem.grid.n
    lap = assemble_neumann_laplacian(problem.grid)
    op = BandedOperator(K * n, K)

    diag = np.zeros(K * n)
    upper = np.zeros(K * (n - 1))
    lower = np.zeros(K * (n - 1))
    for c, d in enumerate(problem.diffusions):
        diag.reshape(n, K)[:, c] = d * lap.diag + problem.coupling[c, c]
        upper.reshape(n - 1, K)[:, c] = d * lap.upper
        lower.reshape(n - 1, K)[:, c] = d * lap.lower
    op.set_band(0, diag)
    op.set_band(K, upper)
    op.set_band(-K, lower)
    if K == 2:
        up1 = np.zeros(2 * n - 1)
        lo1 = np.zeros(2 * n - 1)
        up1[0::2] = problem.coupling[0, 1]
        lo1[0::2] = problem.coupling[1, 0]
        op.set_band(1, up1)
        op.set_band(-1, lo1)
    return op


def assemble_dense(problem: EigenProblem) -> np.ndarray:
    return assemble_banded(problem).to_dense()


def component_weights(grid: Grid, n_components: int) -> np.ndarray:
    """Quadrature weights repeated per component in interleaved layout."""
    return np.repeat(grid.quadrature_weights, n_components)


@dataclass(frozen=True)
class EigenResult:
    """Principal eigenvalue with its positive eigenfunction(s).

    eigenfunctions has shape (K, n), componentwise positive and
    normalized to sup-norm one over all components; residual is the
    sup-norm of A*phi - lambda*phi at that normalization.
    """

    lam: float
    eigenfunctions: np.ndarray
    residual: float
    iterations: int


def principal_eigen(
    problem: EigenProblem,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> EigenResult:
    """Rightmost eigenpair via inverse iteration on the shifted resolvent.

    The shift stays above the principal eigenvalue (Collatz-Wielandt
    upper bound initially, eigenvalue estimate plus a residual margin
    afterwards), so every iterate is an inverse M-matrix image of a
    positive vector and stays positive.  Stops when the eigenpair
    residual reaches the rounding floor of the operator norm and the
    eigenvalue estimate has stabilized to tol.
    """
    A = assemble_banded(problem)
    K, n = problem.n_components, problem.grid.n
    w_big = component_weights(problem.grid, K)
    anorm = A.inf_norm()
    resid_floor = max(tol, 40.0 * np.finfo(float).eps * anorm)

    v = np.ones(A.size)
    y = A.matvec(v)
    up = float(np.max(y))  # Collatz-Wielandt upper bound at v = ones
    lo = float(np.min(y))
    lam = float((w_big @ (v * y)) / (w_big @ (v * v)))
    residual = float(np.max(np.abs(y - lam * v)))
    if residual <= resid_floor:
        return _finish(problem, v, lam, residual, 0)

    sigma = up + max(0.25 * (up - lo), 1e-3 * (1.0 + abs(up)))
    backoff = max(up - lo, 1e-6 * (1.0 + abs(up)))
    failures = 0
    lam_prev = np.inf
    for it in range(1, max_iter + 1):
        try:
            x = A.solve_shifted(sigma, v)
        except np.linalg.LinAlgError:
            x = None
        if x is not None and np.all(x < 0):
            x = -x
        if x is None or not np.all(x > 0) or not np.all(np.isfinite(x)):
            # Shift slipped at or below the principal eigenvalue; back away.
            failures += 1
            if failures > 25:
                raise ConvergenceError(
                    f"inverse iteration could not find a stable shift after {it} steps"
                )
            sigma = lam + backoff
            backoff *= 4.0
            continue
        v = x / np.max(x)
        y = A.matvec(v)
        lam = float((w_big @ (v * y)) / (w_big @ (v * v)))
        residual = float(np.max(np.abs(y - lam * v)))
        if residual <= resid_floor and abs(lam - lam_prev) <= tol * (1.0 + abs(lam)):
            return _finish(problem, v, lam, residual, it)
        lam_prev = lam
        backoff = max(10.0 * residual, 1e-12 * (1.0 + abs(lam)))
        sigma = lam + max(3.0 * residual, 1e-12 * (1.0 + abs(lam)))
    raise ConvergenceError(
        f"principal eigenvalue iteration did not converge in {max_iter} steps "
        f"(last residual {residual:.3e}, floor {resid_floor:.3e})"
    )


def _finish(problem: EigenProblem, v: np.ndarray, lam: float, residual: float, it: int) -> EigenResult:
    K, n = problem.n_components, problem.grid.n
    fields = v.reshape(n, K).T.copy()
    if np.min(fields) <= 0:
        raise ConvergenceError("computed eigenfunction is not strictly positive")
    return EigenResult(lam=lam, eigenfunctions=fields, residual=residual, iterations=it)


def adjoint_principal_eigen(
    problem: EigenProblem,
    primal: Optional[EigenResult] = None,
    tol: float = 1e-10,
    max_iter: int = 200,
    match_tol: float = 1e-8,
) -> EigenResult:
    """Positive eigenpair of the quadrature-adjoint operator.

    The adjoint eigenvalue must agree with the primal one; a mismatch
    beyond match_tol (relative) signals a solver failure.
    """
    if primal is None:
        primal = principal_eigen(problem, tol=tol, max_iter=max_iter)
    result = principal_eigen(problem.adjoint(), tol=tol, max_iter=max_iter)
    if abs(result.lam - primal.lam) > match_tol * (1.0 + abs(primal.lam)):
        raise ConvergenceError(
            f"adjoint eigenvalue {result.lam:.12e} does not match primal {primal.lam:.12e}"
        )
    return result


def scalar_eigenvalue(
    grid: Grid, d: float, potential: np.ndarray, tol: float = 1e-10, max_iter: int = 200
) -> EigenResult:
    """Principal eigenpair of d*L + potential(x)."""
    return principal_eigen(scalar_problem(grid, d, potential), tol=tol, max_iter=max_iter)


def lambda_of_mu(
    grid: Grid,
    d1: float,
    d2: float,
    alpha: np.ndarray,
    beta: np.ndarray,
    m: np.ndarray,
    mu: float,
    tol: float = 1e-10,
) -> float:
    """Principal eigenvalue of the switching pair with growth scaled by mu."""
    problem = switching_problem(grid, d1, d2, alpha, beta, mu * np.asarray(m, dtype=float))
    return principal_eigen(problem, tol=tol).lam


def lambda_prime_at_zero(
    grid: Grid,
    d1: float,
    d2: float,
    alpha: np.ndarray,
    beta: np.ndarray,
    m: np.ndarray,
    check_tol: float = 1e-6,
) -> float:
    """Slope of mu -> lambda(mu) at mu = 0 from the closed quotient formula.

    Also verifies the structure of the mu = 0 ground state: the
    combination d1*phi1 + d2*phi2 must be spatially constant and equal
    to integral((d2*alpha + d1*beta)*phi1) / integral(beta).  Failures
    indicate the eigensolve (or the mesh) is too inaccurate to trust
    the derivative.
    """
    m = grid.check_field(m)
    state = principal_eigen(switching_problem(grid, d1, d2, alpha, beta, np.zeros(grid.n)))
    if abs(state.lam) > 1e-7:
        raise ConvergenceError(f"zero-growth eigenvalue should vanish, got {state.lam:.3e}")
    phi1, phi2 = state.eigenfunctions
    combo = d1 * phi1 + d2 * phi2
    mean_combo = integrate(grid, combo) / (grid.b - grid.a)
    deviation = (float(np.max(combo)) - float(np.min(combo))) / mean_combo
    if deviation > check_tol:
        raise ConvergenceError(
            f"d1*phi1 + d2*phi2 deviates from constant by {deviation:.3e} (> {check_tol:.1e})"
        )
    c_direct = integrate(grid, (d2 * np.asarray(alpha) + d1 * np.asarray(beta)) * phi1)
    c_direct /= integrate(grid, np.asarray(beta, dtype=float))
    if abs(mean_combo - c_direct) > check_tol * abs(c_direct):
        raise ConvergenceError(
            f"constant level {mean_combo:.9e} disagrees with quotient formula {c_direct:.9e}"
        )
    return integrate(grid, m * (phi1 + phi2)) / integrate(grid, phi1 + phi2)


@dataclass(frozen=True)
class ThresholdResult:
    """A located sign change of an eigenvalue curve."""

    name: str
    bracket: tuple[float, float]
    root: float
    residual: float
    sign_left: int
    sign_right: int

    def __post_init__(self) -> None:
        lo, hi = self.bracket
        if not lo < self.root < hi:
            raise ValueError(f"root {self.root} not strictly inside bracket ({lo}, {hi})")
        if self.sign_left == self.sign_right:
            raise ValueError("bracket endpoints must have opposite signs")
        if self.residual > 1e-8:
            raise ValueError(f"threshold residual {self.residual:.3e} exceeds 1e-8")


def bisect_curve(
    curve: Callable[[float], float],
    lo: float,
    hi: float,
    f_lo: float,
    f_hi: float,
    name: str,
    residual_tol: float = 1e-9,
    max_iter: int = 200,
) -> ThresholdResult:
    if f_lo == 0.0 or f_hi == 0.0 or f_lo * f_hi > 0:
        raise ValueError(f"endpoints do not bracket a sign change: f({lo})={f_lo}, f({hi})={f_hi}")
    a, b, fa = lo, hi, f_lo
    mid, f_mid = 0.5 * (lo + hi), np.inf
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        f_mid = curve(mid)
        if abs(f_mid) <= residual_tol:
            break
        if fa * f_mid < 0:
            b = mid
        else:
            a, fa = mid, f_mid
    else:
        raise ConvergenceError(
            f"bisection for {name} stalled: |f({mid})| = {abs(f_mid):.3e} > {residual_tol:.1e}"
        )
    return ThresholdResult(
        name=name,
        bracket=(lo, hi),
        root=mid,
        residual=abs(f_mid),
        sign_left=int(np.sign(f_lo)),
        sign_right=int(np.sign(f_hi)),
    )


def find_mu_roots(
    curve: Callable[[float], float],
    bracket: tuple[float, float],
    name: str = "mu_star",
    scan_points: int = 64,
    residual_tol: float = 1e-9,
    max_roots: int = 8,
) -> list[ThresholdResult]:
    """All sign changes of a curve on a log-spaced lattice, refined by bisection.

    An empty list is a valid outcome (no sign change on the bracket).
    Uniqueness is not assumed: every detected crossing is refined and
    returned, and exceeding max_roots raises.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    lattice = np.geomspace(lo, hi, scan_points)
    values = np.array([curve(x) for x in lattice])
    if not np.all(np.isfinite(values)):
        raise ValueError("curve returned a non-finite value on the scan lattice")
    roots: list[ThresholdResult] = []
    for i in range(len(lattice) - 1):
        f_lo, f_hi = values[i], values[i + 1]
        if f_lo == 0.0:
            # Lattice point is a root to within solver accuracy already.
            continue
        if f_lo * f_hi < 0:
            roots.append(
                bisect_curve(
                    curve,
                    lattice[i],
                    lattice[i + 1],
                    f_lo,
                    f_hi,
                    name=name,
                    residual_tol=residual_tol,
                )
            )
            if len(roots) > max_roots:
                raise ConvergenceError(f"more than {max_roots} roots found for {name}")
    return roots


def mu_star_scalar(
    grid: Grid,
    e: np.ndarray,
    d_bracket: tuple[float, float] = (1e-3, 1e3),
    scan_points: int = 64,
    residual_tol: float = 1e-9,
) -> ThresholdResult:
    """Critical scaling mu* for a sign-changing potential with negative mean.

    Located through the unique diffusion rate d* where the scalar
    eigenvalue crosses zero; mu* = 1/d*, so sign(1 - d*mu*) matches the
    sign of the eigenvalue at diffusion d.
    """
    e = grid.check_field(e)
    if np.min(e) >= 0 or np.max(e) <= 0:
        raise HypothesisError("mu* requires a sign-changing potential")
    if integrate(grid, e) >= 0:
        raise HypothesisError("mu* requires a potential with negative integral")
    curve = lambda d: scalar_eigenvalue(grid, d, e).lam
    roots = find_mu_roots(curve, d_bracket, name="d_root", scan_points=scan_points,
                          residual_tol=residual_tol)
    if len(roots) != 1:
        raise ConvergenceError(
            f"expected exactly one zero crossing in d for mu*, found {len(roots)}"
        )
    d_root = roots[0]
    return ThresholdResult(
        name="mu_star",
        bracket=(1.0 / d_root.bracket[1], 1.0 / d_root.bracket[0]),
        root=1.0 / d_root.root,
        residual=d_root.residual,
        sign_left=d_root.sign_right,
        sign_right=d_root.sign_left,
    )


def dense_rightmost(matrix: np.ndarray) -> tuple[complex, np.ndarray]:
    """Rightmost eigenvalue (max real part) of a dense matrix, with eigenvector."""
    eigvals, eigvecs = np.linalg.eig(matrix)
    idx = int(np.argmax(eigvals.real))
    return complex(eigvals[idx]), eigvecs[:, idx]
