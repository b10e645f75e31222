"""Self-similar equilibria in similarity coordinates ``(xi, eta, zeta)``.

A point is an equilibrium when the third body can sit at
``(xi, eta, zeta) * R(t)`` for all t.  Planar points (L1-L5) do not depend on
the mass law.  Points off the orbital plane need ``G R u^3 = kappa`` and
satisfy ``kappa * (1 - (1-nu)/rho1^3 - nu/rho2^3) = 1``; in the collinear
case (no rotation) the triangular points sweep out a ring around the x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, check_kappa, check_nu

__all__ = [
    "EquilibriumPoint",
    "RingSolution",
    "RemoteLimitRecord",
    "residual",
    "triangular",
    "collinear",
    "coplanar",
    "kappa_bound",
    "remote_limit",
    "ring",
    "find_points",
    "LABELS",
    "label_key",
]

SQRT3_2 = math.sqrt(3.0) / 2.0
LABELS = ["L0"] + [f"L{i}" for i in range(1, 12)] + ["L+inf", "L-inf"]
_RHO_MIN = 1e-12


def label_key(label: str) -> int:
    return LABELS.index(label)


@dataclass(frozen=True)
class EquilibriumPoint:
    label: str
    xi: float
    eta: float
    zeta: float
    nu: float
    kappa: float | None = None
    residual_norm: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.xi, self.eta, self.zeta])

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "nu": self.nu,
            "kappa": self.kappa,
            "xi": self.xi,
            "eta": self.eta,
            "zeta": self.zeta,
            "residual": self.residual_norm,
        }


def _distances(xi, eta, zeta, nu):
    rho1 = math.sqrt((xi + nu) ** 2 + eta ** 2 + zeta ** 2)
    rho2 = math.sqrt((xi + nu - 1.0) ** 2 + eta ** 2 + zeta ** 2)
    if rho1 < _RHO_MIN or rho2 < _RHO_MIN:
        raise DomainError("point coincides with a primary")
    return rho1, rho2


def residual(point, nu: float, kappa: float | None = None, mode: str = "rotating") -> np.ndarray:
    """Left-hand sides of the stationarity conditions at ``point``.

    Components: the xi relation, the eta relation and a third relation that
    depends on the setting.  Rotating frame with ``kappa``: the coplanar
    condition ``kappa*(1 - (1-nu)/rho1^3 - nu/rho2^3) - 1`` (zero when
    ``zeta == 0``).  Rotating frame without ``kappa``: ``zeta`` itself, since
    only planar points exist.  Collinear mode: the eta relation with zeta in
    place of eta.
    """
    xi, eta, zeta = (float(c) for c in point)
    rho1, rho2 = _distances(xi, eta, zeta, nu)
    a, b = rho1 ** -3, rho2 ** -3
    bracket = 1.0 - (1.0 - nu) * a - nu * b
    f_xi = xi - (1.0 - nu) * (xi + nu) * a - nu * (xi + nu - 1.0) * b
    f_eta = eta * bracket
    if mode == "collinear":
        f_zeta = zeta * bracket
    elif kappa is not None:
        f_zeta = kappa * bracket - 1.0 if zeta != 0.0 else 0.0
    else:
        f_zeta = zeta
    return np.array([f_xi, f_eta, f_zeta])


def _norm(point, nu, kappa=None, mode="rotating"):
    return float(np.max(np.abs(residual(point, nu, kappa, mode))))


def triangular(nu: float) -> list[EquilibriumPoint]:
    """L4 and L5, the apexes of equilateral triangles on the primaries."""
    nu = check_nu(nu)
    out = []
    for label, eta in (("L4", SQRT3_2), ("L5", -SQRT3_2)):
        p = (0.5 - nu, eta, 0.0)
        out.append(EquilibriumPoint(label, p[0], eta, 0.0, nu, None, _norm(p, nu)))
    return out


def _axis_function(nu):
    def f(x):
        d1, d2 = x + nu, x + nu - 1.0
        return x - (1.0 - nu) * d1 / abs(d1) ** 3 - nu * d2 / abs(d2) ** 3

    return f


def collinear(nu: float) -> list[EquilibriumPoint]:
    """L1 (between the primaries), L2 (beyond the smaller), L3 (beyond the larger)."""
    nu = check_nu(nu)
    f = _axis_function(nu)
    eps = 1e-9
    brackets = {
        "L1": (-nu + eps, 1.0 - nu - eps),
        "L2": (1.0 - nu + eps, 3.0 - nu),
        "L3": (-nu - 3.0, -nu - eps),
    }
    out = []
    for label, (lo, hi) in brackets.items():
        if label == "L1" and nu == 0.5:
            x = 0.0
        else:
            x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        p = (x, 0.0, 0.0)
        out.append(EquilibriumPoint(label, x, 0.0, 0.0, nu, None, _norm(p, nu)))
    return out


# -- coplanar family -----------------------------------------------------------


def _coplanar_F(x, z, nu, kappa):
    d1, d2 = x + nu, x + nu - 1.0
    r1sq, r2sq = d1 * d1 + z * z, d2 * d2 + z * z
    a, b = r1sq ** -1.5, r2sq ** -1.5
    # second relation rearranged as (kappa-1) - kappa*S to avoid cancellation near kappa=1
    F = np.array(
        [x - (1 - nu) * d1 * a - nu * d2 * b, (kappa - 1.0) - kappa * ((1 - nu) * a + nu * b)]
    )
    a5, b5 = r1sq ** -2.5, r2sq ** -2.5
    da_dx, da_dz = -3 * d1 * a5, -3 * z * a5
    db_dx, db_dz = -3 * d2 * b5, -3 * z * b5
    J = np.array(
        [
            [
                1 - (1 - nu) * (a + d1 * da_dx) - nu * (b + d2 * db_dx),
                -(1 - nu) * d1 * da_dz - nu * d2 * db_dz,
            ],
            [-kappa * ((1 - nu) * da_dx + nu * db_dx), -kappa * ((1 - nu) * da_dz + nu * db_dz)],
        ]
    )
    return F, J


def _newton(x, z, nu, kappa, maxiter=80):
    """Damped Newton on the coplanar system, keeping ``z > 0``.

    The second relation is divided by ``kappa - 1`` so that its slope stays
    O(1) even when the root recedes to large zeta.  Iteration ends when the
    step drops to round-off.
    """
    scale = np.array([1.0, 1.0 / (kappa - 1.0)])

    def system(x, z):
        F, J = _coplanar_F(x, z, nu, kappa)
        return F * scale, J * scale[:, None]

    F, J = system(x, z)
    fn = np.max(np.abs(F))
    for _ in range(maxiter):
        if fn == 0.0:
            break
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        tiny = np.max(np.abs(step)) <= 4e-16 * max(abs(x), abs(z), 1.0)
        lam = 1.0
        for _ in range(40):
            xn, zn = x + lam * step[0], z + lam * step[1]
            if zn > 0:
                Fn, Jn = system(xn, zn)
                fnn = np.max(np.abs(Fn))
                if np.isfinite(fnn) and fnn <= fn:
                    break
            lam *= 0.5
        else:
            break
        x, z, F, J, fn = xn, zn, Fn, Jn, fnn
        if tiny:
            break
    if not np.isfinite(fn):
        return None
    return x, z, fn


def _bipolar_scan(nu, kappa, n=4001):
    """All coplanar roots with ``zeta > 0`` via a one-dimensional reduction.

    On the curve ``(1-nu) a + nu b = 1 - 1/kappa`` (``a = rho1^-3``,
    ``b = rho2^-3``) the xi relation becomes ``xi/kappa = nu(1-nu)(a-b)``.
    Parametrizing the curve by ``s = (1-nu) a / (1 - 1/kappa)`` leaves a
    scalar function whose sign changes bracket every root; the distances fix
    the point through the triangle they form with the primaries.
    """
    c = 1.0 - 1.0 / kappa

    def geometry(s):
        a = s * c / (1.0 - nu)
        b = (1.0 - s) * c / nu
        r1, r2 = a ** (-1.0 / 3.0), b ** (-1.0 / 3.0)
        d1 = 0.5 * (r1 * r1 - r2 * r2 + 1.0)
        z2 = r1 * r1 - d1 * d1
        return d1 - nu, z2, a, b

    def g(s):
        xi, _, a, b = geometry(s)
        return xi / kappa - nu * (1.0 - nu) * (a - b)

    grid = 1.0 / (1.0 + np.exp(-np.linspace(-40.0, 40.0, n)))
    grid = grid[(grid > 0.0) & (grid < 1.0)]
    xi, z2, a, b = geometry(grid)
    val = xi / kappa - nu * (1.0 - nu) * (a - b)
    ok = z2 > 0
    roots = []
    for i in range(len(grid)):
        if not ok[i]:
            continue
        if val[i] == 0.0:
            roots.append(grid[i])
        elif i + 1 < len(grid) and ok[i + 1] and val[i] * val[i + 1] < 0:
            roots.append(brentq(g, grid[i], grid[i + 1], xtol=1e-300, rtol=1e-15))
    out = []
    for s in roots:
        x, zz, _, _ = geometry(s)
        if zz > 0:
            out.append((float(x), math.sqrt(zz)))
    return out


def _grid_starts(nu, kappa):
    found = []
    for x0 in np.linspace(-2.0, 2.0, 9):
        for z0 in np.linspace(0.25, 3.0, 6):
            r = _newton(x0, z0, nu, kappa)
            if r is not None and r[2] < 1e-10:
                found.append((r[0], r[1]))
    return found


def _dedupe(roots, tol=1e-8):
    out = []
    for x, z in roots:
        if all(abs(x - x2) > tol * max(1, abs(x2)) or abs(z - z2) > tol * max(1, z2)
               for x2, z2 in out):
            out.append((x, z))
    return out


def _symmetric_root(kappa):
    # nu = 1/2: xi = 0 solves the xi relation identically
    def g(z):
        rho = math.sqrt(0.25 + z * z)
        return (kappa - 1.0) - kappa * rho ** -3

    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
    z = brentq(g, 1e-12, hi, xtol=1e-300, rtol=1e-15, maxiter=1000)
    return [(0.0, z)]


def _main_branch(nu, kappa, steps_per_decade=8):
    """Continue the root emanating from the triangular point as kappa decreases."""
    k_start = max(1e6, kappa)
    r = _newton(0.5 - nu, SQRT3_2, nu, k_start)
    if r is None:
        return None
    x, z = r[0], r[1]
    e0, e1 = math.log10(k_start - 1.0), math.log10(kappa - 1.0)
    n = max(1, int(math.ceil(abs(e0 - e1) * steps_per_decade)))
    for e in np.linspace(e0, e1, n + 1)[1:]:
        r = _newton(x, z, nu, 1.0 + 10.0 ** e)
        if r is None:
            return None
        x, z = r[0], r[1]
    r = _newton(x, z, nu, kappa)
    return None if r is None else (r[0], r[1])


def _coplanar_roots(nu, kappa, grid=True):
    if nu == 0.5:
        roots = _symmetric_root(kappa)
    else:
        roots = _bipolar_scan(nu, kappa)
        if grid:
            roots = roots + _grid_starts(nu, kappa)
    polished = []
    for x, z in roots:
        r = _newton(x, z, nu, kappa) if nu != 0.5 else (x, z, 0.0)
        if r is not None:
            polished.append((r[0], r[1]))
    return _dedupe(polished)


def coplanar(nu: float, kappa: float, grid: bool = True) -> list[EquilibriumPoint]:
    """Equilibria off the orbital plane (``eta = 0``) under ``G R u^3 = kappa``.

    Returns mirror pairs ``+-zeta``.  The pair continued from the triangular
    point at large kappa is labelled L6/L7; any further pairs would be
    labelled L8..L11 in order of decreasing xi.
    """
    nu = check_nu(nu)
    kappa = check_kappa(kappa)
    roots = _coplanar_roots(nu, kappa, grid)
    if not roots:
        return []
    main = None
    if len(roots) > 1:
        tracked = _main_branch(nu, kappa)
        if tracked is not None:
            main = min(range(len(roots)),
                       key=lambda i: abs(roots[i][0] - tracked[0]) + abs(roots[i][1] - tracked[1]))
    if main is None:
        main = 0
    ordered = [roots[main]] + sorted(
        (r for i, r in enumerate(roots) if i != main), key=lambda r: -r[0]
    )
    out = []
    for k, (x, z) in enumerate(ordered[:3]):
        x, z = float(x), float(z)
        for sign, lab in ((1.0, 6 + 2 * k), (-1.0, 7 + 2 * k)):
            p = (x, 0.0, sign * z)
            out.append(EquilibriumPoint(f"L{lab}", x, 0.0, sign * z, nu, kappa,
                                        _norm(p, nu, kappa)))
    return out


def _extra_pairs(nu, kappa):
    return max(0, len(_coplanar_roots(nu, kappa)) - 1)


def kappa_bound(
    nu: float,
    kappa_grid=None,
    tol: float = 1e-6,
    counter=None,
) -> float | None:
    """Largest kappa at which coplanar roots beyond the L6/L7 pair exist.

    ``counter(nu, kappa)`` returns the number of extra root pairs (defaults
    to the coplanar solver).  The grid is probed first; the last transition
    from "extras" to "none" is refined by bisection to ``tol``.  Returns
    ``None`` when no grid value produces extra roots and ``inf`` when the
    largest grid value still does.
    """
    nu = check_nu(nu)
    counter = counter or _extra_pairs
    if kappa_grid is None:
        kappa_grid = 1.0 + np.logspace(-8, 6, 57)
    ks = np.sort(np.asarray(kappa_grid, dtype=float))
    for k in ks:
        check_kappa(k)
    has = [counter(nu, float(k)) > 0 for k in ks]
    if not any(has):
        return None
    i = max(j for j, h in enumerate(has) if h)
    if i == len(ks) - 1:
        return math.inf
    lo, hi = float(ks[i]), float(ks[i + 1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if counter(nu, mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class RemoteLimitRecord:
    nu: float
    kappas: list[float]
    xis: list[float]
    etas: list[float]
    zetas: list[float]
    increasing: bool
    exceeds_1e3: bool
    exponent: float

    @property
    def diverging(self) -> bool:
        return self.increasing and self.exceeds_1e3

    def to_dict(self):
        return dict(self.__dict__, diverging=self.diverging)


def remote_limit(nu: float, kappa_sequence) -> RemoteLimitRecord:
    """Track the L6/L7 pair as kappa decreases toward 1.

    ``exceeds_1e3`` holds when every entry with ``kappa - 1 < 1e-9`` has
    ``|zeta| > 1e3`` (vacuously true when there is none); ``exponent`` is the
    log-log slope of ``|zeta|`` against ``kappa - 1`` over the entries with
    ``kappa - 1 <= 0.1`` (all entries if fewer than two qualify).
    """
    nu = check_nu(nu)
    ks = [check_kappa(k) for k in kappa_sequence]
    if any(b >= a for a, b in zip(ks, ks[1:])):
        raise DomainError("kappa sequence must be strictly decreasing")
    xis, etas, zetas = [], [], []
    for k in ks:
        pts = [p for p in coplanar(nu, k) if p.label == "L6"]
        if not pts:
            raise ArithmeticError(f"no coplanar root found at kappa={k!r}")
        xis.append(pts[0].xi)
        etas.append(pts[0].eta)
        zetas.append(abs(pts[0].zeta))
    increasing = all(b > a for a, b in zip(zetas, zetas[1:]))
    exceeds = all(z > 1e3 for k, z in zip(ks, zetas) if k - 1.0 < 1e-9)
    sel = [i for i, k in enumerate(ks) if k - 1.0 <= 0.1]
    if len(sel) < 2:
        sel = list(range(len(ks)))
    exponent = float("nan")
    if len(sel) >= 2:
        lx = np.log([ks[i] - 1.0 for i in sel])
        lz = np.log([zetas[i] for i in sel])
        exponent = float(np.polyfit(lx, lz, 1)[0])
    return RemoteLimitRecord(nu, ks, xis, etas, zetas, increasing, exceeds, exponent)


# -- ring ------------------------------------------------------------------------


@dataclass(frozen=True)
class RingSolution:
    """Circle of collinear-case equilibria about the x axis."""

    nu: float
    xi: float
    radius: float

    def point(self, phi: float) -> np.ndarray:
        return np.array([self.xi, self.radius * math.cos(phi), self.radius * math.sin(phi)])

    def sample(self, n: int) -> np.ndarray:
        phis = 2 * math.pi * np.arange(n) / n
        return np.array([self.point(p) for p in phis])

    def residuals(self, n: int = 128) -> np.ndarray:
        return np.array([_norm(p, self.nu, mode="collinear") for p in self.sample(n)])

    def equilibrium(self, phi: float, label: str = "L0") -> EquilibriumPoint:
        p = self.point(phi)
        return EquilibriumPoint(label, *p, nu=self.nu, kappa=None,
                                residual_norm=_norm(p, self.nu, mode="collinear"))


def ring(nu: float) -> RingSolution:
    """Ring swept by rotating L4/L5 about the primaries' axis."""
    nu = check_nu(nu)
    return RingSolution(nu, 0.5 - nu, SQRT3_2)


def find_points(labels, nu, kappa=None, ring_phase=math.pi / 4):
    """Equilibria by label (``L0``..``L7``).  Coplanar labels need ``kappa``."""
    out = []
    cache = {}
    for lab in labels:
        if lab in ("L1", "L2", "L3"):
            cache.setdefault("col", collinear(nu))
            out.append(next(p for p in cache["col"] if p.label == lab))
        elif lab in ("L4", "L5"):
            cache.setdefault("tri", triangular(nu))
            out.append(next(p for p in cache["tri"] if p.label == lab))
        elif lab == "L0":
            out.append(ring(nu).equilibrium(ring_phase))
        elif lab in LABELS[6:12]:
            if kappa is None:
                raise DomainError(f"{lab} needs the kappa constraint")
            cache.setdefault("cop", coplanar(nu, kappa))
            match = [p for p in cache["cop"] if p.label == lab]
            if not match:
                raise DomainError(f"{lab} does not exist for nu={nu}, kappa={kappa}")
            out.append(match[0])
        else:
            raise DomainError(f"unknown equilibrium label {lab!r}")
    return out
