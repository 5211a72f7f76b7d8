"""Drift/minorization burn-in certificates for conjugate two-block Gibbs samplers."""
from .bounds import (
    DkscCurve,
    GeometricErgodicityCertificate,
    RosenthalCurve,
    RosenthalInputs,
    certificate_from_curve,
    dksc_curve,
    grid_search,
    rosenthal_curve,
    solve_n_star,
)
from .drift import DriftCertificate, build_drift, verify_drift_identity
from .minorization import (
    Ar1Law,
    MinorizationCertificate,
    build_minorization,
    check_domination,
    transition_density,
)
from .models import (
    WORKED_MODEL,
    MomentConstants,
    ModelSpec,
    marginal_law,
    moment_constants,
    moments_beta_binomial,
    moments_gaussian,
    moments_poisson_gamma,
    sample_conditionals,
)
from .oracle import (
    empirical_tv,
    ergodic_average,
    exact_l_step_law,
    exact_tv,
    simulate_chain,
)

__version__ = "0.1.0"
