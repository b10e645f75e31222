"""Independent reference implementations used by the tests.

Nothing here imports the package: each oracle is coded from the governing
relations directly so a slip in the production code cannot cancel out.
"""
from __future__ import annotations

import math

import numpy as np
import sympy as sp
from scipy.integrate import quad


def bisect(f, lo, hi, tol=1e-13, maxiter=200):
    """Plain interval halving; ``f(lo)`` and ``f(hi)`` must differ in sign."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    if (flo > 0) == (f(hi) > 0):
        raise ValueError("no sign change")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def axis_force(x, nu):
    """Net x force on the primaries' axis in the classical synodic frame."""
    return x - (1 - nu) * np.sign(x + nu) / (x + nu) ** 2 - nu * np.sign(x - 1 + nu) / (x - 1 + nu) ** 2


def collinear_oracle(nu):
    f = lambda x: axis_force(x, nu)  # noqa: E731
    eps = 1e-9
    return {
        "L1": 0.0 if nu == 0.5 else bisect(f, -nu + eps, 1 - nu - eps, tol=1e-13),
        "L2": bisect(f, 1 - nu + eps, 3.0, tol=1e-13),
        "L3": bisect(f, -3.0, -nu - eps, tol=1e-13),
    }


def crtbp_acceleration(s, nu):
    """Classical circular restricted problem in the synodic frame (G = 1)."""
    x, y, z, vx, vy, vz = s
    r1 = math.sqrt((x + nu) ** 2 + y ** 2 + z ** 2)
    r2 = math.sqrt((x - 1 + nu) ** 2 + y ** 2 + z ** 2)
    ax = 2 * vy + x - (1 - nu) * (x + nu) / r1 ** 3 - nu * (x - 1 + nu) / r2 ** 3
    ay = -2 * vx + y - (1 - nu) * y / r1 ** 3 - nu * y / r2 ** 3
    az = -(1 - nu) * z / r1 ** 3 - nu * z / r2 ** 3
    return np.array([vx, vy, vz, ax, ay, az])


def radial_fall_time(eps, G=1.0):
    """Time for ``R'' = -G/R^2`` from rest at R = 1 down to R = eps, by quadrature.

    Energy gives ``dt = dR / sqrt(2G(1/R - 1))``; with ``R = sin^2(phi)`` the
    integrand becomes ``2 sin^2(phi) / sqrt(2G)``, free of the endpoint
    singularity.
    """
    lo = math.asin(math.sqrt(eps))
    val, _ = quad(lambda p: 2.0 * math.sin(p) ** 2, lo, math.pi / 2, epsabs=1e-14, epsrel=1e-13)
    return val / math.sqrt(2.0 * G)


def symmetric_coplanar_zeta(kappa):
    """Equal-mass coplanar height from ``rho^3 = kappa/(kappa-1)`` with ``xi = 0``."""
    rho2 = (kappa / (kappa - 1.0)) ** (2.0 / 3.0)
    return math.sqrt(rho2 - 0.25)


def _symbolic_residual():
    xi, eta, zeta, nu, kappa = sp.symbols("xi eta zeta nu kappa", real=True)
    rho1 = sp.sqrt((xi + nu) ** 2 + eta ** 2 + zeta ** 2)
    rho2 = sp.sqrt((xi - 1 + nu) ** 2 + eta ** 2 + zeta ** 2)
    # potential of the stationarity problem; the conditions are its gradient
    omega = (xi ** 2 + eta ** 2) / 2 + (1 - nu) / rho1 + nu / rho2
    g_xi = sp.diff(omega, xi)
    g_eta = sp.diff(omega, eta)
    # out of plane: zeta-gradient of the gravitational part only, scaled by kappa
    grav_z = sp.diff((1 - nu) / rho1 + nu / rho2, zeta)
    cop = kappa * (1 + grav_z / zeta) - 1
    args = (xi, eta, zeta, nu, kappa)
    return (
        sp.lambdify(args, g_xi, "math"),
        sp.lambdify(args, g_eta, "math"),
        sp.lambdify(args, sp.simplify(cop), "math"),
    )


_SYM = None


def residual_tree(point, nu, kappa=None):
    """Stationarity residuals from a symbolically differentiated potential."""
    global _SYM
    if _SYM is None:
        _SYM = _symbolic_residual()
    fx, fe, fc = _SYM
    xi, eta, zeta = point
    k = 2.0 if kappa is None else kappa
    third = fc(xi, eta, zeta, nu, k) if (kappa is not None and zeta != 0) else (0.0 if kappa is not None else zeta)
    return np.array([fx(xi, eta, zeta, nu, k), fe(xi, eta, zeta, nu, k), third])


def kappa_blowup_time(kappa, u_end, G=1.0):
    """Time for the kappa law started at rest from u = 1 to reach ``u_end``.

    With ``v = u^-2`` the law becomes ``v'' = -2K v^-4``,
    ``K = G^4 (kappa-1)/(3 kappa^4)``, whose energy integral gives
    ``t = sqrt(3/(4K)) * int_v^1 s^1.5 / sqrt(1 - s^3) ds``.
    """
    K = G ** 4 * (kappa - 1.0) / (3.0 * kappa ** 4)
    v_end = u_end ** -2.0
    # s = 1 - w^2 removes the endpoint singularity at s = 1
    f = lambda w: 2 * w * (1 - w * w) ** 1.5 / math.sqrt(1 - (1 - w * w) ** 3)  # noqa: E731
    val, _ = quad(f, 0.0, math.sqrt(1.0 - v_end), epsabs=1e-13, epsrel=1e-12)
    return math.sqrt(3.0 / (4.0 * K)) * val
