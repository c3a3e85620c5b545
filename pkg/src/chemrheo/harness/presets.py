"""Shipped scenario presets.

taylor_green
    periodic box, Newtonian exponent, decaying Taylor-Green cell; the
    velocity has a closed-form solution.
synovial
    unit square, exponent decreasing with concentration, rotational
    forcing stirring an off-centre concentration bump.
electro
    unit square, exponent prescribed in space-time, no concentration.
heat_only
    no velocity; a single concentration mode decays by diffusion.

Rates are kept moderate so that the 100-point output cadence resolves the
energy balances with the trapezoid rule.
"""

from __future__ import annotations

from ..constitutive import FluxModel, IndexKind, PowerIndexFamily, StressModel
from ..fields import Domain
from ..solver.scenario import Scenario

PRESETS = ("taylor_green", "synovial", "electro", "heat_only")


def preset(name: str) -> Scenario:
    if name == "taylor_green":
        return Scenario(
            name=name,
            domain=Domain("torus"),
            N=8, M=1, resolution=64,
            stress=StressModel(nu0=0.1, index=PowerIndexFamily.constant(2.0)),
            flux=FluxModel(1.0, 0.0),
            velocity0="taylor_green", velocity0_amplitude=1.0,
        )
    if name == "synovial":
        return Scenario(
            name=name,
            domain=Domain("square"),
            N=16, M=16, resolution=64,
            stress=StressModel(nu0=0.015, index=PowerIndexFamily(
                IndexKind.PIECEWISE_LINEAR, 1.5, 2.5, 1.0)),
            flux=FluxModel(0.015, 0.0075),
            forcing="rotation", forcing_amplitude=1.5,
            velocity0="vortex", velocity0_amplitude=0.2,
            concentration0="bump", c_tilde0=1.0,
        )
    if name == "electro":
        return Scenario(
            name=name,
            domain=Domain("square"),
            N=16, M=1, resolution=64,
            stress=StressModel(nu0=0.015, index=PowerIndexFamily(
                IndexKind.PRESCRIBED_XT, 1.5, 2.5, extent=1.0, t_final=1.0)),
            flux=FluxModel(0.015, 0.0),
            forcing="rotation", forcing_amplitude=1.5,
            velocity0="vortex", velocity0_amplitude=0.2,
        )
    if name == "heat_only":
        return Scenario(
            name=name,
            domain=Domain("square"),
            N=1, M=16, resolution=64,
            stress=StressModel(nu0=1.0, index=PowerIndexFamily(
                IndexKind.PIECEWISE_LINEAR, 1.5, 2.5, 1.0)),
            flux=FluxModel(0.02, 0.0),
            velocity0="zero",
            concentration0="sine", c_tilde0=1.0,
        )
    raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
