"""Single-step time integrators for the Galerkin system.

``rk4_adaptive``
    classical RK4 with step doubling.  The two half steps are kept (no
    Richardson extrapolation) and ``|y_half - y_full| / 15`` is the local
    error estimate, compared with ``atol + rtol * max(|y|_inf)``.  A
    rejected step is retried at half the size.
``implicit_euler``
    backward Euler solved by a chord iteration: Newton-like updates with a
    finite-difference Jacobian frozen at the start of the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import FixedPointDivergence, StepSizeUnderflow
from .galerkin import GalerkinState
from .scenario import IntegratorSettings, Scheme

FIXED_POINT_TOL = 1e-10
FIXED_POINT_MAXITER = 200


@dataclass
class StepResult:
    state: GalerkinState
    dt_used: float
    dt_next: float
    rejected: int
    error_estimate: float


def rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_adaptive(f, t, y, dt, s: IntegratorSettings):
    rejected = 0
    while True:
        if dt < s.dt_min:
            raise StepSizeUnderflow(f"step size {dt:.3e} below dt_min={s.dt_min:.1e} at t={t:.6g}")
        full = rk4(f, t, y, dt)
        half = rk4(f, t, y, 0.5 * dt)
        two = rk4(f, t + 0.5 * dt, half, 0.5 * dt)
        err = np.max(np.abs(two - full), initial=0.0) / 15.0
        scale = s.atol + s.rtol * max(np.max(np.abs(y), initial=0.0),
                                      np.max(np.abs(two), initial=0.0))
        ratio = err / scale
        if np.isfinite(ratio) and ratio <= 1.0:
            grow = 5.0 if ratio == 0.0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            return two, dt, dt * grow, rejected, err
        rejected += 1
        dt *= 0.5


def numerical_jacobian(f, t, y, f0=None):
    f0 = f(t, y) if f0 is None else f0
    n = y.size
    J = np.empty((n, n))
    for i in range(n):
        h = 1e-7 * max(1.0, abs(y[i]))
        yp = y.copy()
        yp[i] += h
        J[:, i] = (f(t, yp) - f0) / h
    return J


def _implicit_euler(f, t, y, dt, s: IntegratorSettings):
    if dt < s.dt_min:
        raise StepSizeUnderflow(f"step size {dt:.3e} below dt_min={s.dt_min:.1e} at t={t:.6g}")
    t1 = t + dt
    f_start = f(t1, y)
    J = numerical_jacobian(f, t1, y, f_start)
    if not np.all(np.isfinite(J)):
        raise FixedPointDivergence(f"non-finite Jacobian at t={t:.6g}, dt={dt:.3e}")
    lu = scipy.linalg.lu_factor(np.eye(y.size) - dt * J)
    z = y + dt * f_start
    for _ in range(FIXED_POINT_MAXITER):
        fz = f(t1, z)
        resid = z - y - dt * fz
        if not np.all(np.isfinite(resid)):
            break
        delta = scipy.linalg.lu_solve(lu, resid)
        z = z - delta
        if not np.all(np.isfinite(z)):
            break
        if np.max(np.abs(delta), initial=0.0) <= FIXED_POINT_TOL * (1.0 + np.max(np.abs(z))):
            # local error of backward Euler ~ dt/2 |f(y1) - f(y0)|
            err = 0.5 * dt * np.max(np.abs(f(t1, z) - f(t, y)), initial=0.0)
            return z, dt, dt, 0, err
    raise FixedPointDivergence(f"implicit Euler iteration failed at t={t:.6g}, dt={dt:.3e}")


def step_vector(f, t, y, dt, settings: IntegratorSettings):
    """Advance ``y' = f(t, y)`` by one accepted step of size at most ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if settings.scheme is Scheme.RK4_ADAPTIVE:
        return _rk4_adaptive(f, t, y, dt, settings)
    return _implicit_euler(f, t, y, dt, settings)


def step(system, state: GalerkinState, dt: float, scheme=Scheme.RK4_ADAPTIVE,
         settings: IntegratorSettings | None = None) -> StepResult:
    """One step of the Galerkin system from ``state``.

    ``settings`` supplies tolerances; ``scheme`` overrides its scheme.
    """
    base = settings if settings is not None else system.scenario.integrator
    s = IntegratorSettings(Scheme(scheme), base.rtol, base.atol, base.dt_init,
                           base.dt_min, base.dt_max)
    y, used, nxt, rej, err = step_vector(system.rhs, state.t, state.vector, dt, s)
    return StepResult(GalerkinState.from_vector(state.t + used, y, system.N), used, nxt, rej, err)
