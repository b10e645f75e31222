"""Motion of the two primaries.

Normalized units: initial separation, initial total mass and initial angular
rate are all 1, so the angular-momentum relation reads ``u R^2 theta' = 1``.
``G`` stays a free scalar.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, check_nu
from .mass_laws import ConstantLaw, KappaLaw, MassLaw
from .odecore import DenseSolution, IntegratorSettings, integrate, sample

__all__ = [
    "SystemConfig",
    "PrimaryEphemeris",
    "propagate_rotating",
    "propagate_collinear",
    "propagate",
    "CartesianTwoBody",
    "propagate_full_cartesian",
    "matched_cartesian_state",
    "primary_positions",
    "R_COLLISION",
]

log = logging.getLogger(__name__)

R_COLLISION = 1e-6
MODES = ("rotating", "collinear")


@dataclass(frozen=True)
class SystemConfig:
    nu: float
    G: float = 1.0
    mode: str = "rotating"
    law: MassLaw = field(default_factory=ConstantLaw)

    def __post_init__(self):
        check_nu(self.nu)
        if not self.G > 0:
            raise DomainError(f"G must be positive (got {self.G!r})")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES} (got {self.mode!r})")


@dataclass
class PrimaryEphemeris:
    """Dense record of ``R``, ``R'`` (and ``theta`` in rotating mode)."""

    solution: DenseSolution
    mode: str
    law: MassLaw
    G: float
    theta0: float = 0.0

    @property
    def t0(self):
        return self.solution.t0

    @property
    def t_end(self):
        return self.solution.t_end

    @property
    def status(self):
        return self.solution.status

    def state(self, t):
        """``(R, R_dot)`` at ``t``; scalars for scalar ``t``."""
        s = sample(self.solution, t)
        if isinstance(t, float) or np.ndim(t) == 0:
            return float(s[0]), float(s[1])
        return s[..., 0], s[..., 1]

    def R(self, t):
        return self.state(t)[0]

    def Rdot(self, t):
        return self.state(t)[1]

    def theta(self, t):
        if self.mode == "collinear":
            return self.theta0 if np.ndim(t) == 0 else np.full(np.shape(t), self.theta0)
        s = sample(self.solution, t)
        return float(s[2]) if np.ndim(t) == 0 else s[..., 2]

    def omega(self, t):
        if self.mode == "collinear":
            return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
        u, _ = self.law.eval(t)
        return 1.0 / (u * self.R(t) ** 2)

    def table(self, t=None):
        """Columns ``t,u,R,Rdot,theta,omega`` at ``t`` (default: step nodes)."""
        t = self.solution.t if t is None else np.asarray(t, dtype=float)
        u, _ = self.law.eval(t)
        R, Rd = self.state(t)
        return np.column_stack(
            [t, np.broadcast_to(u, t.shape), R, Rd, self.theta(t), self.omega(t)]
        )


def _clip_to_law(law, t_span):
    t0, t1 = float(t_span[0]), float(t_span[1])
    lo, hi = law.validity
    if t0 < lo:
        raise DomainError(f"t0={t0} precedes the mass law validity interval")
    if t1 > hi:
        log.warning("span end %g clipped to mass-law validity end %g", t1, hi)
        t1 = hi
    return t0, t1


def _initial_separation(law, t0, R0, Rdot0):
    if isinstance(law, KappaLaw):
        Rk, Rdk = law.separation(t0)
        R0 = Rk if R0 is None else R0
        Rdot0 = Rdk if Rdot0 is None else Rdot0
    R0 = 1.0 if R0 is None else float(R0)
    Rdot0 = 0.0 if Rdot0 is None else float(Rdot0)
    if not R0 > 0:
        raise DomainError("initial separation must be positive")
    return R0, Rdot0


def _collision_event(r_collision):
    def collide(t, y):
        return y[0] - r_collision

    collide.direction = -1
    return collide


def propagate_rotating(
    config: SystemConfig,
    t_span: tuple[float, float],
    settings: IntegratorSettings | None = None,
    R0: float | None = None,
    Rdot0: float | None = None,
    theta0: float = 0.0,
    r_collision: float = R_COLLISION,
) -> PrimaryEphemeris:
    """Separation and polar angle of the primaries with angular momentum.

    Integrates ``d/dt(u R') = 1/(u R^3) - G u^2/R^2`` together with
    ``theta' = 1/(u R^2)``.  Initial data default to ``R=1, R'=0`` except
    under a :class:`KappaLaw`, where they follow from the constraint.
    """
    if config.mode != "rotating":
        raise DomainError("propagate_rotating needs a rotating-mode config")
    law, G = config.law, config.G
    t0, t1 = _clip_to_law(law, t_span)
    R0, Rdot0 = _initial_separation(law, t0, R0, Rdot0)

    def rhs(t, y):
        R, Rd = y[0], y[1]
        u, ud = law.eval(t)
        Rdd = (1.0 / (u * R ** 3) - G * u * u / (R * R) - ud * Rd) / u
        return np.array([Rd, Rdd, 1.0 / (u * R * R)])

    sol = integrate(rhs, [R0, Rdot0, theta0], (t0, t1), settings,
                    events=[_collision_event(r_collision)])
    return PrimaryEphemeris(sol, "rotating", law, G, theta0)


def propagate_collinear(
    config: SystemConfig,
    t_span: tuple[float, float],
    settings: IntegratorSettings | None = None,
    R0: float | None = None,
    Rdot0: float | None = None,
    theta0: float = 0.0,
    r_collision: float = R_COLLISION,
) -> PrimaryEphemeris:
    """Radial motion of non-rotating primaries, ``d/dt(u R') = -G u^2/R^2``.

    Stops with status ``event-stopped`` when ``R`` falls to ``r_collision``.
    """
    if config.mode != "collinear":
        raise DomainError("propagate_collinear needs a collinear-mode config")
    law, G = config.law, config.G
    t0, t1 = _clip_to_law(law, t_span)
    R0, Rdot0 = _initial_separation(law, t0, R0, Rdot0)

    def rhs(t, y):
        R, Rd = y[0], y[1]
        u, ud = law.eval(t)
        return np.array([Rd, (-G * u * u / (R * R) - ud * Rd) / u])

    sol = integrate(rhs, [R0, Rdot0], (t0, t1), settings,
                    events=[_collision_event(r_collision)])
    return PrimaryEphemeris(sol, "collinear", law, G, theta0)


def propagate(config, t_span, settings=None, **kwargs) -> PrimaryEphemeris:
    if config.mode == "rotating":
        return propagate_rotating(config, t_span, settings, **kwargs)
    return propagate_collinear(config, t_span, settings, **kwargs)


def primary_positions(eph: PrimaryEphemeris, nu: float, t):
    """Barycentric abscissae ``(-nu R, (1 - nu) R)`` of the primaries."""
    R = eph.R(t)
    return -nu * R, (1.0 - nu) * R


@dataclass
class CartesianTwoBody:
    """Full two-body solution; state is ``r1, r2, p1, p2`` with ``p_i = m_i r_i'``."""

    solution: DenseSolution
    m10: float
    m20: float
    law: MassLaw

    def _split(self, t):
        s = sample(self.solution, t)
        return s[..., 0:3], s[..., 3:6], s[..., 6:9], s[..., 9:12]

    def positions(self, t):
        r1, r2, _, _ = self._split(t)
        return r1, r2

    def momenta(self, t):
        _, _, p1, p2 = self._split(t)
        return p1, p2

    def velocities(self, t):
        u, _ = self.law.eval(t)
        u = np.asarray(u)[..., None] if np.ndim(t) else u
        p1, p2 = self.momenta(t)
        return p1 / (self.m10 * u), p2 / (self.m20 * u)

    def separation(self, t):
        r1, r2 = self.positions(t)
        return np.linalg.norm(r1 - r2, axis=-1)

    def total_momentum(self, t):
        p1, p2 = self.momenta(t)
        return p1 + p2

    def center_of_mass(self, t):
        r1, r2 = self.positions(t)
        M0 = self.m10 + self.m20
        return (self.m10 * r1 + self.m20 * r2) / M0


def propagate_full_cartesian(
    m10: float,
    m20: float,
    law: MassLaw,
    r1_0,
    r2_0,
    v1_0,
    v2_0,
    t_span: tuple[float, float],
    settings: IntegratorSettings | None = None,
    G: float = 1.0,
    r_collision: float = R_COLLISION,
) -> CartesianTwoBody:
    """Both primaries in an inertial frame with ``d/dt(m_i r_i') = -+G m1 m2 r/r^3``.

    Integrating the momenta keeps ``m1 r1' + m2 r2'`` conserved to round-off.
    """
    if not (m10 > 0 and m20 > 0):
        raise DomainError("masses must be positive")
    r1_0, r2_0 = np.asarray(r1_0, float), np.asarray(r2_0, float)
    if np.linalg.norm(r1_0 - r2_0) == 0:
        raise DomainError("initial separation must be nonzero")
    t0, t1 = _clip_to_law(law, t_span)
    u0, _ = law.eval(t0)
    p1 = m10 * u0 * np.asarray(v1_0, float)
    p2 = m20 * u0 * np.asarray(v2_0, float)
    y0 = np.concatenate([r1_0, r2_0, p1, p2])

    def rhs(t, y):
        u, _ = law.eval(t)
        m1, m2 = m10 * u, m20 * u
        r = y[0:3] - y[3:6]
        d = math.sqrt(r @ r)
        f = -G * m1 * m2 / d ** 3 * r
        return np.concatenate([y[6:9] / m1, y[9:12] / m2, f, -f])

    def collide(t, y):
        r = y[0:3] - y[3:6]
        return math.sqrt(r @ r) - r_collision

    collide.direction = -1
    sol = integrate(rhs, y0, (t0, t1), settings, events=[collide])
    return CartesianTwoBody(sol, m10, m20, law)


def matched_cartesian_state(config: SystemConfig, t0=0.0, R0=None, Rdot0=None):
    """Inertial initial data reproducing the reduced problem's ``R, R'``.

    Returns ``(m10, m20, r1, r2, v1, v2)`` with zero total momentum, the
    primaries on the x axis at ``-nu R`` and ``(1-nu) R`` and the relative
    angular rate ``1/(u R^2)``.
    """
    nu = config.nu
    R0, Rdot0 = _initial_separation(config.law, t0, R0, Rdot0)
    u0, _ = config.law.eval(t0)
    rel_v = np.array([Rdot0, 1.0 / (u0 * R0), 0.0])  # velocity of body 2 relative to 1
    r1 = np.array([-nu * R0, 0.0, 0.0])
    r2 = np.array([(1 - nu) * R0, 0.0, 0.0])
    return 1.0 - nu, nu, r1, r2, -nu * rel_v, (1 - nu) * rel_v
