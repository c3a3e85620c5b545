"""Scenario description: domain, bases sizes, models, data and integrator settings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ..constitutive import FluxModel, StressModel
from ..fields import Domain


class Scheme(str, Enum):
    RK4_ADAPTIVE = "rk4_adaptive"
    IMPLICIT_EULER = "implicit_euler"


@dataclass(frozen=True)
class IntegratorSettings:
    scheme: Scheme = Scheme.RK4_ADAPTIVE
    rtol: float = 1e-9
    atol: float = 1e-12
    dt_init: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))


# -- closed-form data ---------------------------------------------------------------

def taylor_green(L, amplitude=1.0):
    """Steady Taylor-Green cell ``A (sin kx cos ky, -cos kx sin ky)``, ``k = 2 pi / L``.

    Returns ``(values, jacobian)`` callables in the form used by
    :meth:`VectorField.from_function`.
    """
    k = 2.0 * np.pi / L
    A = amplitude

    def values(x, y):
        return A * np.sin(k * x) * np.cos(k * y), -A * np.cos(k * x) * np.sin(k * y)

    def jac(x, y):
        cc = A * k * np.cos(k * x) * np.cos(k * y)
        ss = A * k * np.sin(k * x) * np.sin(k * y)
        return (cc, -ss), (ss, -cc)

    return values, jac


def corner_vortex(L, amplitude=1.0):
    """Curl of ``sin^2(pi x/L) sin^2(pi y/L)`` scaled by ``amplitude``."""
    a = np.pi / L

    def values(x, y):
        return (amplitude * np.sin(a * x) ** 2 * a * np.sin(2 * a * y),
                -amplitude * a * np.sin(2 * a * x) * np.sin(a * y) ** 2)

    def jac(x, y):
        sx, sy = np.sin(a * x) ** 2, np.sin(a * y) ** 2
        dx, dy = a * np.sin(2 * a * x), a * np.sin(2 * a * y)
        ddx, ddy = 2 * a * a * np.cos(2 * a * x), 2 * a * a * np.cos(2 * a * y)
        A = amplitude
        return (A * dx * dy, A * sx * ddy), (-A * ddx * sy, -A * dx * dy)

    return values, jac


VELOCITY_KINDS = ("zero", "taylor_green", "vortex")
CONCENTRATION_KINDS = ("zero", "sine", "bump")
FORCING_KINDS = ("none", "rotation", "taylor_green")


def initial_velocity(kind, L, amplitude):
    if kind == "zero":
        return None
    if kind == "taylor_green":
        return taylor_green(L, amplitude)
    if kind == "vortex":
        return corner_vortex(L, amplitude)
    raise ValueError(f"unknown initial velocity {kind!r}")


def initial_concentration(kind, L, amplitude):
    """Closed-form ``c0(x, y)``; amplitude equals its maximum."""
    if kind == "zero":
        return None
    if kind == "sine":
        return lambda x, y: amplitude * np.sin(np.pi * x / L) * np.sin(np.pi * y / L)
    if kind == "bump":
        # peak 1 at (2L/3, 2L/3), vanishing on the boundary
        def beta(s):
            s = s / L
            return 6.75 * s * s * (1.0 - s)

        return lambda x, y: amplitude * beta(x) * beta(y)
    raise ValueError(f"unknown initial concentration {kind!r}")


def forcing(kind, L, amplitude):
    """Time-independent body force as ``f(x, y, t) -> (fx, fy)`` or ``None``."""
    if kind == "none" or amplitude == 0.0:
        return None
    if kind == "rotation":
        return lambda x, y, t: (-amplitude * (y - 0.5 * L) / L, amplitude * (x - 0.5 * L) / L)
    if kind == "taylor_green":
        vals, _ = taylor_green(L, amplitude)
        return lambda x, y, t: vals(x, y)
    raise ValueError(f"unknown forcing {kind!r}")


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    domain: Domain = field(default_factory=Domain)
    N: int = 8
    M: int = 8
    resolution: int = 64
    stress: StressModel = field(default_factory=StressModel)
    flux: FluxModel = field(default_factory=FluxModel)
    forcing: str = "none"
    forcing_amplitude: float = 0.0
    velocity0: str = "zero"
    velocity0_amplitude: float = 1.0
    concentration0: str = "zero"
    c_tilde0: float = 1.0
    epsilon: float = 0.0
    n_outputs: int = 100
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("basis sizes must be positive")
        if self.n_outputs < 1:
            raise ValueError("n_outputs must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.c_tilde0 <= 0:
            raise ValueError("c_tilde0 must be positive")
        if self.velocity0 not in VELOCITY_KINDS:
            raise ValueError(f"unknown initial velocity {self.velocity0!r}")
        if self.concentration0 not in CONCENTRATION_KINDS:
            raise ValueError(f"unknown initial concentration {self.concentration0!r}")
        if self.forcing not in FORCING_KINDS:
            raise ValueError(f"unknown forcing {self.forcing!r}")
        if not self.domain.is_square and self.concentration0 != "zero":
            raise ValueError("torus scenarios carry zero concentration (no constant mode)")

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)

    @property
    def output_times(self):
        return np.linspace(0.0, self.domain.t_final, self.n_outputs + 1)

    def velocity0_closed_form(self):
        return initial_velocity(self.velocity0, self.domain.extent, self.velocity0_amplitude)

    def concentration0_closed_form(self):
        return initial_concentration(self.concentration0, self.domain.extent, self.c_tilde0)

    def forcing_closed_form(self):
        return forcing(self.forcing, self.domain.extent, self.forcing_amplitude)
