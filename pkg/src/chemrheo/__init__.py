"""Spectral Galerkin solver for concentration-dependent power-law fluids.

Modules: ``fields`` (domain, quadrature, fields), ``constitutive`` (stress
and flux laws with structure checks), ``varexp`` (variable-exponent norms
and Holder-type estimators), ``basis`` (Galerkin bases), ``solver``
(ODE system, integrators, diagnostics) and ``harness`` (configuration and
command line).
"""

__version__ = "0.1.0"
