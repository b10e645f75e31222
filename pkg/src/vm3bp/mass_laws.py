"""Common mass factor u(t) shared by the two primaries and the third body.

Every body carries ``m_i(t) = m_i0 * u(t)``, so all mass ratios stay fixed.
The closed-form laws below are modelling choices; :class:`KappaLaw` is the
tabulated law that keeps ``G R u**3`` constant, which is what the coplanar
equilibria require.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, KappaDomainError, check_kappa
from .odecore import DenseSolution, IntegratorSettings, integrate, sample

__all__ = [
    "MassLaw",
    "ConstantLaw",
    "LinearLaw",
    "ExponentialLaw",
    "MestscherskyLaw",
    "KappaLaw",
    "solve_kappa_constrained",
    "parse_law",
    "law_from_dict",
]


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


class MassLaw:
    """Base class.  Subclasses implement ``_eval`` and declare ``kind``."""

    kind = "abstract"

    @property
    def validity(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def eval(self, t):
        """Return ``(u, u_dot)`` at scalar or array ``t``."""
        lo, hi = self.validity
        if isinstance(t, (float, int)):
            if not lo <= t <= hi:
                raise DomainError(
                    f"{self.kind} law queried outside its validity interval [{lo}, {hi}]"
                )
            u, ud = self._eval_scalar(float(t))
            if not (u > 0 and math.isfinite(u)):
                raise DomainError(f"{self.kind} law is not positive at the queried time")
            return u, ud
        tq = np.asarray(t, dtype=float)
        if np.any(tq < lo) or np.any(tq > hi) or np.any(~np.isfinite(tq)):
            raise DomainError(
                f"{self.kind} law queried outside its validity interval [{lo}, {hi}]"
            )
        u, ud = self._eval(tq)
        if np.any(u <= 0) or np.any(~np.isfinite(u)):
            raise DomainError(f"{self.kind} law is not positive at the queried time")
        return _scalar_or_array(u), _scalar_or_array(ud)

    def _eval(self, t):
        raise NotImplementedError

    def _eval_scalar(self, t: float) -> tuple[float, float]:
        u, ud = self._eval(np.float64(t))
        return float(u), float(ud)

    def params(self) -> list[float]:
        raise NotImplementedError

    def to_spec(self) -> str:
        ps = self.params()
        if not ps:
            return self.kind
        return self.kind + ":" + ",".join(repr(float(p)) for p in ps)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": [float(p) for p in self.params()]}


@dataclass(frozen=True)
class ConstantLaw(MassLaw):
    u0: float = 1.0
    kind = "constant"

    def __post_init__(self):
        if not self.u0 > 0:
            raise DomainError("constant law needs u0 > 0")

    def _eval(self, t):
        return np.full_like(t, self.u0), np.zeros_like(t)

    def _eval_scalar(self, t):
        return self.u0, 0.0

    def params(self):
        return [self.u0] if self.u0 != 1.0 else []


@dataclass(frozen=True)
class LinearLaw(MassLaw):
    """``u = 1 + rate * t``."""

    rate: float
    kind = "linear"

    @property
    def validity(self):
        a = self.rate
        if a > 0:
            return (-1.0 / a, math.inf)
        if a < 0:
            return (-math.inf, -1.0 / a)
        return (-math.inf, math.inf)

    def _eval(self, t):
        return 1.0 + self.rate * t, np.full_like(t, self.rate)

    def _eval_scalar(self, t):
        return 1.0 + self.rate * t, self.rate

    def params(self):
        return [self.rate]


@dataclass(frozen=True)
class ExponentialLaw(MassLaw):
    """``u = exp(rate * t)``."""

    rate: float
    kind = "exponential"

    def _eval(self, t):
        u = np.exp(self.rate * t)
        return u, self.rate * u

    def _eval_scalar(self, t):
        u = math.exp(self.rate * t)
        return u, self.rate * u

    def params(self):
        return [self.rate]


@dataclass(frozen=True)
class MestscherskyLaw(MassLaw):
    """``u = (alpha t^2 + 2 beta t + gamma)^(-1/2)``."""

    alpha: float
    beta: float
    gamma: float
    kind = "mestschersky"

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("mestschersky law needs gamma > 0 so that u(0) is real")

    @property
    def validity(self):
        a, b, c = self.alpha, self.beta, self.gamma
        if a == 0.0:
            if b == 0.0:
                return (-math.inf, math.inf)
            root = -c / (2 * b)
            return (root, math.inf) if root < 0 else (-math.inf, root)
        disc = b * b - a * c
        if disc < 0:
            return (-math.inf, math.inf)
        sq = math.sqrt(disc)
        roots = sorted([(-b - sq) / a, (-b + sq) / a])
        # 0 is interior to the positive region because q(0) = gamma > 0
        if a > 0:
            return (roots[1], math.inf) if roots[1] < 0 else (-math.inf, roots[0])
        return (roots[0], roots[1])

    def _eval(self, t):
        q = (self.alpha * t + 2 * self.beta) * t + self.gamma
        with np.errstate(invalid="ignore", divide="ignore"):
            u = q ** -0.5
            ud = -(self.alpha * t + self.beta) * q ** -1.5
        return u, ud

    def params(self):
        return [self.alpha, self.beta, self.gamma]


@dataclass(frozen=True, eq=False)
class KappaLaw(MassLaw):
    """Tabulated law along which ``G * R * u**3 == kappa``.

    ``solution`` holds the dense record of ``(u, u_dot)``.  The implied
    separation of the primaries is ``R = kappa / (G u^3)``.
    """

    kappa: float
    G: float
    u0: float
    u_dot0: float
    solution: DenseSolution = field(repr=False)
    radial_residual: float = 0.0
    kind = "kappa"

    @property
    def validity(self):
        return (self.solution.t0, self.solution.t_end)

    def _eval(self, t):
        s = sample(self.solution, t)
        return s[..., 0], s[..., 1]

    def _eval_scalar(self, t):
        s = sample(self.solution, t)
        return float(s[0]), float(s[1])

    def separation(self, t):
        """``(R, R_dot)`` implied by the constraint."""
        u, ud = self.eval(t)
        R = self.kappa / (self.G * np.power(u, 3))
        Rd = -3.0 * self.kappa * ud / (self.G * np.power(u, 4))
        return _scalar_or_array(R), _scalar_or_array(Rd)

    def params(self):
        return [self.u0, self.u_dot0]

    def to_dict(self):
        d = super().to_dict()
        d.update(kappa=self.kappa, G=self.G, t_span=[self.solution.t0, self.solution.t_end])
        return d


def _kappa_rhs(kappa, G):
    # R = kappa/(G u^3) substituted into d/dt(u R') = 1/(u R^3) - G u^2/R^2
    k = G ** 4 * (kappa - 1.0) / (3.0 * kappa ** 4)

    def rhs(t, y):
        u, ud = y
        return np.array([ud, 3.0 * ud * ud / u + k * u ** 11])

    return rhs


def _radial_residual(kappa, G, y, f):
    """Defect of the primaries' radial equation along tabulated ``(u, u', u'')``."""
    u, ud, udd = y[:, 0], y[:, 1], f
    R = kappa / (G * u ** 3)
    # d/dt(u R') with R' = -3 kappa u'/(G u^4)
    lhs = -3.0 * kappa / G * (udd / u ** 3 - 3.0 * ud ** 2 / u ** 4)
    centrifugal = 1.0 / (u * R ** 3)
    gravity = G * u ** 2 / R ** 2
    scale = np.maximum(np.maximum(np.abs(centrifugal), np.abs(gravity)), 1.0)
    return float(np.max(np.abs(lhs - (centrifugal - gravity)) / scale))


def solve_kappa_constrained(
    kappa: float,
    G: float = 1.0,
    u0: float = 1.0,
    u_dot0: float = 0.0,
    t_span: tuple[float, float] = (0.0, 10.0),
    settings: IntegratorSettings | None = None,
    min_excess: float = 1e-6,
    r_collision: float = 1e-6,
) -> KappaLaw:
    """Integrate the mass factor that keeps ``G R u^3 = kappa`` for all t.

    The validity interval is truncated when ``R`` drops below
    ``r_collision`` (``u`` grows without bound in finite time for
    ``u_dot0 >= 0``) or when ``u`` reaches zero.
    """
    kappa = check_kappa(kappa)
    if kappa - 1.0 < min_excess:
        raise KappaDomainError(
            f"kappa - 1 = {kappa - 1.0:.3e} is below the configured minimum {min_excess:.1e}"
        )
    if not u0 > 0:
        raise DomainError("u0 must be positive")
    if not G > 0:
        raise DomainError("G must be positive")
    settings = settings or IntegratorSettings()
    rhs = _kappa_rhs(kappa, G)
    u_cap = (kappa / (G * r_collision)) ** (1.0 / 3.0)

    def collide(t, y):
        return u_cap - y[0]

    def vanish(t, y):
        return y[0]

    collide.direction = -1
    vanish.direction = -1
    sol = integrate(rhs, [u0, u_dot0], t_span, settings, events=[collide, vanish])
    if not sol.success:
        raise DomainError(f"kappa-constrained law failed: {sol.message}")
    f = np.array([rhs(t, y)[1] for t, y in zip(sol.t, sol.y)])
    res = _radial_residual(kappa, G, sol.y, f)
    if res > 100 * settings.rtol:
        raise ArithmeticError(f"kappa law violates the radial equation (residual {res:.2e})")
    return KappaLaw(kappa, G, u0, u_dot0, sol, res)


def parse_law(
    spec: str,
    kappa: float | None = None,
    G: float = 1.0,
    t_span: tuple[float, float] = (0.0, 10.0),
    settings: IntegratorSettings | None = None,
) -> MassLaw:
    """Build a law from ``kind[:p1,p2,...]``.

    kinds: ``constant[:u0]``, ``linear:rate``, ``exponential:rate``,
    ``mestschersky:alpha,beta,gamma``, ``kappa[:u0[,u_dot0]]`` (kappa and G
    come from the arguments).
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.strip().lower()
    try:
        ps = [float(p) for p in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise DomainError(f"mass-law parameters must be numbers: {spec!r}") from None
    need = {"linear": 1, "exponential": 1, "mestschersky": 3}
    if kind in need and len(ps) != need[kind]:
        raise DomainError(f"{kind} law takes {need[kind]} parameter(s), got {len(ps)}")
    if kind == "constant":
        if len(ps) > 1:
            raise DomainError("constant law takes at most one parameter")
        return ConstantLaw(*ps)
    if kind == "linear":
        return LinearLaw(*ps)
    if kind == "exponential":
        return ExponentialLaw(*ps)
    if kind == "mestschersky":
        return MestscherskyLaw(*ps)
    if kind == "kappa":
        if kappa is None:
            raise DomainError("kappa law needs a kappa value")
        if len(ps) > 2:
            raise DomainError("kappa law takes at most u0,u_dot0")
        u0 = ps[0] if ps else 1.0
        ud0 = ps[1] if len(ps) > 1 else 0.0
        return solve_kappa_constrained(kappa, G, u0, ud0, t_span, settings)
    raise DomainError(f"unknown mass law {kind!r}")


def law_from_dict(d: dict, **kwargs) -> MassLaw:
    spec = d["kind"]
    if d.get("params"):
        spec += ":" + ",".join(repr(float(p)) for p in d["params"])
    if d["kind"] == "kappa":
        kwargs.setdefault("kappa", d.get("kappa"))
        kwargs.setdefault("G", d.get("G", 1.0))
        if "t_span" in d:
            kwargs.setdefault("t_span", tuple(d["t_span"]))
    return parse_law(spec, **kwargs)
