"""Adaptive Dormand-Prince 5(4) integration with dense output and terminal events.

Every dynamics module in the package goes through :func:`integrate`.  The
solver is deliberately small: explicit, non-stiff, forward in time only, with
the free fourth-order continuous extension of the pair and scalar terminal
events located by bisection on that interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "IntegratorSettings",
    "DenseSolution",
    "IntegrationError",
    "integrate",
    "sample",
    "sample_derivative",
]

COMPLETED = "completed"
EVENT = "event-stopped"
STEP_FAILURE = "step-failure"


class IntegrationError(RuntimeError):
    """Raised when an integration cannot produce a usable solution."""


@dataclass(frozen=True)
class IntegratorSettings:
    """Tolerances and step limits for :func:`integrate`."""

    rtol: float = 1e-10
    atol: float = 1e-12
    initial_step: float = 1e-4
    max_step: float = math.inf
    max_steps: int = 1_000_000
    event_tol: float = 1e-13

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.event_tol > 0):
            raise ValueError("tolerances must be strictly positive")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if not self.max_step >= self.initial_step:
            raise ValueError("max_step must be >= initial_step")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def scaled(self, factor: float) -> "IntegratorSettings":
        """Copy with both tolerances multiplied by ``factor``."""
        return IntegratorSettings(
            rtol=self.rtol * factor,
            atol=self.atol * factor,
            initial_step=self.initial_step,
            max_step=self.max_step,
            max_steps=self.max_steps,
            event_tol=self.event_tol,
        )


# Dormand & Prince (1980) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Continuous extension coefficients (Hairer, Norsett & Wanner, DOPRI5 code).
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass
class DenseSolution:
    """Accepted steps of an integration plus their interpolation data.

    ``t`` and ``y`` hold the step endpoints; ``coeffs[i]`` are the five
    continuous-extension vectors of step ``i`` and ``h[i]`` its full length.
    When an event truncates the last step, ``t[-1]`` is the event time while
    ``h[-1]`` keeps the length the interpolant was built for.
    """

    t: np.ndarray
    y: np.ndarray
    h: np.ndarray
    coeffs: np.ndarray
    status: str = COMPLETED
    message: str = ""
    t_event: float | None = None
    nfev: int = 0
    n_rejected: int = 0

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def success(self) -> bool:
        return self.status != STEP_FAILURE

    @property
    def n_steps(self) -> int:
        return len(self.h)

    def __call__(self, t):
        return sample(self, t)


def _interp(coeffs, theta):
    # coeffs: (..., 5, d); theta broadcast over the leading axes.
    r1, r2, r3, r4, r5 = (coeffs[..., k, :] for k in range(5))
    th = theta[..., None] if np.ndim(theta) else theta
    th1 = 1.0 - th
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)))


def sample(solution: DenseSolution, t):
    """Evaluate the dense solution at scalar or array ``t``.

    Step endpoints return the stored states bit for bit.
    """
    ts = solution.t
    lo, hi = ts[0], ts[-1]
    if isinstance(t, (float, int)) and len(solution.h):
        # fast path for the scalar queries made inside right-hand sides
        if not lo <= t <= hi:
            raise ValueError(f"sample time outside solved span [{lo!r}, {hi!r}]")
        i = int(np.searchsorted(ts, t, side="right")) - 1
        if ts[i] == t:
            return solution.y[i].copy()
        i = min(i, len(solution.h) - 1)
        return _interp(solution.coeffs[i], (t - ts[i]) / solution.h[i])
    tq = np.asarray(t, dtype=float)
    if np.any(tq < lo) or np.any(tq > hi) or np.any(~np.isfinite(tq)):
        raise ValueError(
            f"sample time outside solved span [{lo!r}, {hi!r}]"
        )
    if len(solution.h) == 0:
        return np.broadcast_to(solution.y[0], tq.shape + solution.y[0].shape).copy()
    if tq.ndim == 0:
        i = int(np.searchsorted(ts, tq, side="right")) - 1
        if ts[i] == tq:
            return solution.y[i].copy()
        i = min(i, len(solution.h) - 1)
        theta = (float(tq) - ts[i]) / solution.h[i]
        return _interp(solution.coeffs[i], theta)
    idx = np.searchsorted(ts, tq, side="right") - 1
    exact = ts[idx] == tq
    idx_step = np.minimum(idx, len(solution.h) - 1)
    theta = (tq - ts[idx_step]) / solution.h[idx_step]
    out = _interp(solution.coeffs[idx_step], theta)
    out[exact] = solution.y[idx[exact]]
    return out


def sample_derivative(solution: DenseSolution, t):
    """Time derivative of the continuous extension at scalar or array ``t``."""
    ts = solution.t
    tq = np.asarray(t, dtype=float)
    if np.any(tq < ts[0]) or np.any(tq > ts[-1]) or len(solution.h) == 0:
        raise ValueError(f"sample time outside solved span [{ts[0]!r}, {ts[-1]!r}]")
    idx = np.minimum(np.searchsorted(ts, tq, side="right") - 1, len(solution.h) - 1)
    h = solution.h[idx]
    th = (tq - ts[idx]) / h
    c = solution.coeffs[idx]
    r2, r3, r4, r5 = (c[..., k, :] for k in range(1, 5))
    if np.ndim(th):
        th, h = th[..., None], h[..., None]
    th1 = 1.0 - th
    # y = r1 + th*(r2 + th1*(r3 + th*(r4 + th1*r5)))
    inner = r4 + th1 * r5
    mid = r3 + th * inner
    d_inner = -r5
    d_mid = inner + th * d_inner
    d_outer = -mid + th1 * d_mid
    return (r2 + th1 * mid + th * d_outer) / h


def _rms_error(err, y_old, y_new, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return math.sqrt(float(np.mean((err / sc) ** 2)))


def _locate_event(g, coeffs, t_left, h, t_right, g_left, tol):
    """Bisection for the sign change of ``g`` over ``[t_left, t_right]``."""
    a, b = t_left, t_right
    ga = g_left
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        gm = g(m, _interp(coeffs, (m - t_left) / h))
        if gm == 0.0:
            return m
        if (ga < 0) == (gm < 0):
            a, ga = m, gm
        else:
            b = m
    return b


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    t_span: tuple[float, float],
    settings: IntegratorSettings | None = None,
    events: Sequence[Callable[[float, np.ndarray], float]] = (),
) -> DenseSolution:
    """Integrate ``y' = rhs(t, y)`` from ``t_span[0]`` to ``t_span[1]``.

    Each event is a scalar function ``g(t, y)``; integration stops at the
    first sign change of any of them.  An optional ``direction`` attribute
    on the callable (+1 or -1) restricts which crossings count.

    Returns a :class:`DenseSolution` whose ``status`` is ``"completed"``,
    ``"event-stopped"`` or ``"step-failure"``.  Step failures (step-size
    underflow, non-finite derivatives that cannot be stepped around, or too
    many steps) keep the partial solution.
    """
    settings = settings or IntegratorSettings()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be a nonempty forward interval")
    y = np.array(y0, dtype=float)
    if y.ndim != 1:
        raise ValueError("y0 must be a one-dimensional state vector")
    f = np.asarray(rhs(t0, y), dtype=float)
    if f.shape != y.shape or not np.all(np.isfinite(f)):
        raise ValueError("rhs must be finite at (t0, y0)")
    nfev = 1

    rtol, atol = settings.rtol, settings.atol
    ts, ys, hs, cs = [t0], [y.copy()], [], []
    g_prev = [float(g(t0, y)) for g in events]
    t = t0
    h = min(settings.initial_step, settings.max_step, t1 - t0)
    k = np.empty((7, y.size))
    status, message, t_event = COMPLETED, "", None
    n_rejected = 0
    last_rejected = False

    while t < t1:
        if len(hs) >= settings.max_steps:
            status, message = STEP_FAILURE, "maximum number of steps exceeded"
            break
        h_min = 16 * np.spacing(max(abs(t), 1.0))
        if h < h_min:
            status = STEP_FAILURE
            message = f"step size underflow at t={t!r} (possible singularity)"
            break
        if t + h > t1 or t1 - (t + h) < h_min:
            h = t1 - t

        k[0] = f
        for s in range(1, 7):
            ys_ = y + h * (np.asarray(_A[s]) @ k[:s])
            k[s] = rhs(t + _C[s] * h, ys_)
        nfev += 6
        y_new = ys_  # stage 7 point equals the 5th-order solution
        if not np.all(np.isfinite(k)):
            n_rejected += 1
            last_rejected = True
            h *= _FAC_MIN
            continue
        err = _rms_error(h * (_E @ k), y, y_new, rtol, atol)

        if err > 1.0:
            n_rejected += 1
            fac = max(_FAC_MIN, _SAFETY * err ** -0.2)
            h *= fac
            last_rejected = True
            continue

        t_new = t1 if t + h >= t1 else t + h
        coeffs = np.empty((5, y.size))
        ydiff = y_new - y
        bspl = h * k[0] - ydiff
        coeffs[0] = y
        coeffs[1] = ydiff
        coeffs[2] = bspl
        coeffs[3] = ydiff - h * k[6] - bspl
        coeffs[4] = h * (_D @ k)

        hit = None
        for j, g in enumerate(events):
            g_new = float(g(t_new, y_new))
            direction = getattr(g, "direction", 0)
            crossed = (g_prev[j] < 0 <= g_new and direction >= 0) or (
                g_prev[j] > 0 >= g_new and direction <= 0
            )
            if crossed:
                te = _locate_event(
                    g, coeffs, t, h, t_new, g_prev[j], settings.event_tol
                )
                if hit is None or te < hit:
                    hit = te
            g_prev[j] = g_new

        hs.append(h)
        cs.append(coeffs)
        if hit is not None:
            ts.append(hit)
            ys.append(_interp(coeffs, (hit - t) / h))
            status, t_event = EVENT, hit
            message = f"terminal event at t={hit!r}"
            break
        ts.append(t_new)
        ys.append(y_new.copy())

        fac = _SAFETY * err ** -0.2 if err > 0 else _FAC_MAX
        fac = min(_FAC_MAX, max(_FAC_MIN, fac))
        if last_rejected:
            fac = min(fac, 1.0)
        last_rejected = False
        t, y, f = t_new, y_new, k[6].copy()
        h = min(h * fac, settings.max_step)

    coeffs_arr = np.array(cs) if cs else np.empty((0, 5, y.size))
    return DenseSolution(
        t=np.array(ts),
        y=np.array(ys),
        h=np.array(hs),
        coeffs=coeffs_arr,
        status=status,
        message=message,
        t_event=t_event,
        nfev=nfev,
        n_rejected=n_rejected,
    )
