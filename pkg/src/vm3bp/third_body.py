"""Third body in the field of the variable-mass primaries.

Rotating mode works in the barycentric frame that turns with the primaries
(angular rate ``1/(u R^2)``); collinear mode works in the inertial frame with
the primaries fixed on the x axis.  The third body's own mass factor cancels
from both sets of equations, so no operation here takes it.

Frame equations, per unit mass factor and after expanding ``d/dt(u q')``::

    u x'' + u' x' = g_x + 2 y'/R^2 - 2 y R'/R^3 + x/(u R^4)
    u y'' + u' y' = g_y - 2 x'/R^2 + 2 x R'/R^3 + y/(u R^4)
    u z'' + u' z' = g_z

with ``g = -G u^2 [(1-nu)(r - r1)/|r - r1|^3 + nu (r - r2)/|r - r2|^3]``.
The ``+2 x R'/R^3`` term in the y equation comes from the angular
acceleration; with ``+2 y R'/R^3`` instead the self-similar ansatz would
not cancel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .odecore import DenseSolution, IntegratorSettings, integrate, sample
from .primary import R_COLLISION, PrimaryEphemeris, SystemConfig

__all__ = [
    "ThirdBodyState",
    "Trajectory",
    "rotating_rhs",
    "inertial_rhs",
    "simulate",
    "self_similarity_residual",
    "jacobi_constant",
    "seed_state",
]


@dataclass(frozen=True)
class ThirdBodyState:
    t: float
    x: float
    y: float
    z: float
    vx: float
    vy: float
    vz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.vx, self.vy, self.vz])

    @classmethod
    def from_array(cls, t, s) -> "ThirdBodyState":
        return cls(float(t), *(float(v) for v in s))

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.x, self.y, self.z,
                                               self.vx, self.vy, self.vz)):
            raise DomainError("third-body state must be finite")


def _gravity(s, nu, G, u, R, guard=True):
    x, y, z = s[0], s[1], s[2]
    dx1, dx2 = x + nu * R, x - (1.0 - nu) * R
    rho = y * y + z * z
    r1 = math.sqrt(dx1 * dx1 + rho)
    r2 = math.sqrt(dx2 * dx2 + rho)
    if guard and (r1 < R_COLLISION or r2 < R_COLLISION):
        raise DomainError("third body coincides with a primary")
    if r1 == 0.0 or r2 == 0.0:
        return math.nan, math.nan, math.nan
    c1 = G * u * u * (1.0 - nu) / r1 ** 3
    c2 = G * u * u * nu / r2 ** 3
    return -c1 * dx1 - c2 * dx2, -(c1 + c2) * y, -(c1 + c2) * z


def _rotating_field(s, nu, G, u, ud, R, Rd, guard=True):
    gx, gy, gz = _gravity(s, nu, G, u, R, guard)
    x, y, z, vx, vy, vz = s
    R2, R3 = R * R, R * R * R
    cent = 1.0 / (u * R2 * R2)
    ax = (gx + 2.0 * vy / R2 - 2.0 * y * Rd / R3 + x * cent - ud * vx) / u
    ay = (gy - 2.0 * vx / R2 + 2.0 * x * Rd / R3 + y * cent - ud * vy) / u
    az = (gz - ud * vz) / u
    return np.array([vx, vy, vz, ax, ay, az])


def _inertial_field(s, nu, G, u, ud, R, guard=True):
    gx, gy, gz = _gravity(s, nu, G, u, R, guard)
    vx, vy, vz = s[3], s[4], s[5]
    return np.array([vx, vy, vz, (gx - ud * vx) / u, (gy - ud * vy) / u, (gz - ud * vz) / u])


def _as_state(state):
    if isinstance(state, ThirdBodyState):
        return state.t, state.as_array()
    t, s = state
    return float(t), np.asarray(s, float)


def rotating_rhs(state, eph: PrimaryEphemeris, config: SystemConfig) -> np.ndarray:
    """Derivative ``(x', y', z', x'', y'', z'')`` in the rotating frame."""
    if eph.mode != "rotating":
        raise DomainError("rotating_rhs needs a rotating-mode ephemeris")
    t, s = _as_state(state)
    u, ud = config.law.eval(t)
    R, Rd = eph.state(t)
    return _rotating_field(s, config.nu, config.G, u, ud, R, Rd)


def inertial_rhs(state, eph: PrimaryEphemeris, config: SystemConfig) -> np.ndarray:
    """Derivative in the inertial frame of collinear (non-rotating) primaries."""
    if eph.mode != "collinear":
        raise DomainError("inertial_rhs needs a collinear-mode ephemeris")
    t, s = _as_state(state)
    u, ud = config.law.eval(t)
    R, _ = eph.state(t)
    return _inertial_field(s, config.nu, config.G, u, ud, R)


@dataclass
class Trajectory:
    solution: DenseSolution
    frame: str
    config: SystemConfig

    @property
    def t0(self):
        return self.solution.t0

    @property
    def t_end(self):
        return self.solution.t_end

    @property
    def status(self):
        return self.solution.status

    def __call__(self, t):
        return sample(self.solution, t)

    def state(self, t) -> ThirdBodyState:
        return ThirdBodyState.from_array(t, sample(self.solution, t))

    @property
    def samples(self) -> list[ThirdBodyState]:
        return [ThirdBodyState.from_array(t, s) for t, s in zip(self.solution.t, self.solution.y)]

    def table(self, t=None) -> np.ndarray:
        """Columns ``t,x,y,z,vx,vy,vz`` (default: at the accepted steps)."""
        if t is None:
            return np.column_stack([self.solution.t, self.solution.y])
        t = np.asarray(t, float)
        return np.column_stack([t, sample(self.solution, t)])


def seed_state(eph: PrimaryEphemeris, point, t0: float | None = None) -> ThirdBodyState:
    """State on the self-similar solution: position ``p R(t0)``, velocity ``p R'(t0)``."""
    t0 = eph.t0 if t0 is None else t0
    p = np.asarray(point, float)
    R, Rd = eph.state(t0)
    return ThirdBodyState.from_array(t0, np.concatenate([p * R, p * Rd]))


def simulate(
    config: SystemConfig,
    eph: PrimaryEphemeris,
    state0: ThirdBodyState,
    t_span: tuple[float, float] | None = None,
    settings: IntegratorSettings | None = None,
    r_collision: float = R_COLLISION,
) -> Trajectory:
    """Integrate the third body against a primary ephemeris.

    The frame follows the ephemeris mode.  Integration stops early if the
    third body comes within ``r_collision`` of either primary.
    """
    if eph.mode != config.mode:
        raise DomainError("ephemeris mode does not match the system config")
    t0 = state0.t
    t1 = eph.t_end if t_span is None else float(t_span[1])
    if t_span is not None and float(t_span[0]) != t0:
        raise DomainError("state0.t must equal the start of the span")
    tol = 1e-12 * max(1.0, abs(eph.t_end))
    if t0 < eph.t0 or t1 > eph.t_end + tol:
        raise DomainError(
            f"simulation span [{t0}, {t1}] escapes the ephemeris span [{eph.t0}, {eph.t_end}]"
        )
    t1 = min(t1, eph.t_end)
    nu, G, law = config.nu, config.G, config.law
    # trial stages may step inside the guard radius; the event below stops
    # the run there, so the fields are evaluated unguarded

    if config.mode == "rotating":
        def rhs(t, s):
            u, ud = law.eval(t)
            R, Rd = eph.state(t)
            return _rotating_field(s, nu, G, u, ud, R, Rd, False)
    else:
        def rhs(t, s):
            u, ud = law.eval(t)
            R, _ = eph.state(t)
            return _inertial_field(s, nu, G, u, ud, R, False)

    def near_primary(t, s):
        R, _ = eph.state(t)
        rho = s[1] * s[1] + s[2] * s[2]
        r1 = math.sqrt((s[0] + nu * R) ** 2 + rho)
        r2 = math.sqrt((s[0] - (1.0 - nu) * R) ** 2 + rho)
        return min(r1, r2) - r_collision

    near_primary.direction = -1
    sol = integrate(rhs, state0.as_array(), (t0, t1), settings, events=[near_primary])
    return Trajectory(sol, config.mode, config)


def self_similarity_residual(traj: Trajectory, eph: PrimaryEphemeris, point, n_dense: int = 2001) -> float:
    """Max of ``|(x,y,z)(t) - p R(t)| / max(R(t), 1)`` over the trajectory.

    Samples every accepted step plus ``n_dense`` uniformly spaced times.
    """
    p = np.asarray(point, float)
    t = np.union1d(traj.solution.t, np.linspace(traj.t0, traj.t_end, n_dense))
    t = t[(t >= eph.t0) & (t <= eph.t_end)]
    pos = traj(t)[:, :3]
    R = np.asarray(eph.R(t))
    dev = np.linalg.norm(pos - np.outer(R, p), axis=1) / np.maximum(R, 1.0)
    return float(np.max(dev))


def jacobi_constant(state, nu: float) -> float:
    """Classical Jacobi integral ``x^2+y^2 + 2(1-nu)/r1 + 2nu/r2 - v^2``.

    Only conserved in the constant-mass limit ``u = 1, R = 1``.
    """
    s = state.as_array() if isinstance(state, ThirdBodyState) else np.asarray(state, float)
    x, y, z, vx, vy, vz = s
    r1 = math.sqrt((x + nu) ** 2 + y * y + z * z)
    r2 = math.sqrt((x - 1.0 + nu) ** 2 + y * y + z * z)
    return x * x + y * y + 2.0 * (1.0 - nu) / r1 + 2.0 * nu / r2 - (vx * vx + vy * vy + vz * vz)
