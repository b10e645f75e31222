"""Restricted three-body problem with masses exchanged with a static medium.

All three bodies share a common mass factor ``u(t)``, so mass ratios stay
fixed.  The package propagates the primaries, integrates the third body in
the rotating (or, for collinear primaries, inertial) frame, and computes the
self-similar equilibria whose shape is preserved while all distances scale
with the primaries' separation ``R(t)``.
"""
from .errors import DomainError, KappaDomainError
from .odecore import DenseSolution, IntegrationError, IntegratorSettings, integrate, sample
from .mass_laws import (
    ConstantLaw,
    ExponentialLaw,
    KappaLaw,
    LinearLaw,
    MassLaw,
    MestscherskyLaw,
    parse_law,
    solve_kappa_constrained,
)
from .primary import (
    PrimaryEphemeris,
    SystemConfig,
    matched_cartesian_state,
    primary_positions,
    propagate,
    propagate_collinear,
    propagate_full_cartesian,
    propagate_rotating,
)
from .third_body import (
    ThirdBodyState,
    Trajectory,
    inertial_rhs,
    jacobi_constant,
    rotating_rhs,
    seed_state,
    self_similarity_residual,
    simulate,
)
from .equilibria import (
    EquilibriumPoint,
    RingSolution,
    collinear,
    coplanar,
    kappa_bound,
    remote_limit,
    residual,
    ring,
    triangular,
)

__version__ = "0.1.0"
