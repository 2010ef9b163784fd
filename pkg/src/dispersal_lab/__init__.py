"""Numerical laboratory for dispersal-switching populations.

Two-component reaction-diffusion populations that switch between a slow
and a fast diffusion rate, their persistence thresholds, and their
competition against an ecologically identical single-rate diffuser.
"""

from .mesh import (
    Grid,
    NeumannLaplacian,
    assemble_neumann_laplacian,
    build_grid,
    dirichlet_energy,
    inner_product,
    integrate,
)
from .model import (
    CoefficientSpec,
    Coefficients,
    HypothesisError,
    ModelParams,
    Rectangle,
    RegimeReport,
    SystemKind,
    check_hypothesis_h,
    classify_regime,
    hypothesis_h_holds,
    invariant_rectangle,
    reaction_rhs,
    reaction_terms,
    sample_coefficient,
    sample_coefficients,
)
from .spectral import (
    ConvergenceError,
    CooperativityError,
    EigenProblem,
    EigenResult,
    ThresholdResult,
    adjoint_principal_eigen,
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
from .dynamics import (
    SolverOptions,
    State,
    SteadyResult,
    TrajectoryLog,
    constant_state,
    eigenfunction_state,
    integrate_to_steady,
    lyapunov_identity,
    monitor_lyapunov,
    persistence_floor,
    random_state,
    step_imex,
)
from .analysis import (
    StabilityReport,
    SweepReport,
    find_threshold,
    lambda2_eigenpair,
    lambda2_sensitivity,
    lambda2_sign_changes,
    linearized_stability,
    logistic_steady,
    subsystem_steady,
    sweep_outcomes,
)

__version__ = "0.1.0"
