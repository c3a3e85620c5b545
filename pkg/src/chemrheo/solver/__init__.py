"""Galerkin solver: scenario, right-hand sides, integrators, runs and reports."""

from .galerkin import Bases, GalerkinState, GalerkinSystem, build_bases
from .integrators import StepResult, rk4, step
from .mollify import LaggedMollifier, mollify, standard_mollifier
from .run import COLUMNS, DiagnosticsRecord, Trajectory, run
from .scenario import IntegratorSettings, Scenario, Scheme

__all__ = [
    "Bases", "GalerkinState", "GalerkinSystem", "build_bases",
    "StepResult", "rk4", "step",
    "LaggedMollifier", "mollify", "standard_mollifier",
    "COLUMNS", "DiagnosticsRecord", "Trajectory", "run",
    "IntegratorSettings", "Scenario", "Scheme",
]
