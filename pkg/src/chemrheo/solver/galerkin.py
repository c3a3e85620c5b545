"""Galerkin ODE system for the velocity and concentration coefficients.

With L2-orthonormal velocity fields ``w_j`` and concentration modes ``z_k``:

    da_j/dt = int (u x u):Dw_j - S(c, Du):Dw_j + f.w_j
    M_c db/dt = int c u.grad z_k - K(c, |Du|) grad c . grad z_k

where ``M_c`` is the identity for both supported concentration bases.
All integrals use the shared quadrature; contractions are fixed-order
matrix products so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..basis import (ConcentrationBasis, VelocityBasis, build_concentration_basis,
                     build_velocity_basis, project_L2, required_resolution)
from ..constitutive import IndexKind, clamp_concentration, dual_exponent
from ..errors import DimensionMismatch
from ..fields import Quadrature, ScalarField, VectorField, sym_contract
from ..varexp import ExponentField, SpaceTimeSamples, luxembourg_norm
from .scenario import Scenario


@dataclass
class GalerkinState:
    t: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)

    @property
    def vector(self):
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_vector(cls, t, y, N):
        return cls(t, y[:N].copy(), y[N:].copy())

    def copy(self):
        return GalerkinState(self.t, self.a.copy(), self.b.copy())


@dataclass(eq=False)
class Bases:
    quad: Quadrature
    velocity: VelocityBasis
    concentration: ConcentrationBasis


def build_bases(scenario: Scenario, cache_dir=None) -> Bases:
    res = max(scenario.resolution, required_resolution(scenario.domain, scenario.N, scenario.M))
    quad = Quadrature.for_domain(scenario.domain, res)
    vcache = ccache = None
    if cache_dir is not None:
        tag = f"{scenario.domain.mode.value}_r{res}"
        vcache = f"{cache_dir}/velocity_{tag}_N{scenario.N}.npz"
        ccache = f"{cache_dir}/concentration_{tag}_M{scenario.M}.npz"
    vb = build_velocity_basis(scenario.domain, scenario.N, quad, cache=vcache)
    cb = build_concentration_basis(scenario.domain, scenario.M, quad, cache=ccache)
    return Bases(quad, vb, cb)


def _packed_outer(u):
    return np.stack([u[:, 0] * u[:, 0], u[:, 1] * u[:, 1], u[:, 0] * u[:, 1]], axis=-1)


class GalerkinSystem:
    """Precomputed weighted basis tables plus the right-hand sides."""

    def __init__(self, scenario: Scenario, bases: Bases = None):
        self.scenario = scenario
        self.bases = bases if bases is not None else build_bases(scenario)
        quad = self.bases.quad
        vb, cb = self.bases.velocity, self.bases.concentration
        self.quad = quad
        self.N, self.M = vb.N, cb.M
        w = quad.weights
        self.W = vb.values  # (N, nq, 2)
        self.DW = vb.sym_grads  # (N, nq, 3)
        self.Z = cb.values  # (M, nq)
        self.GZ = cb.grads  # (M, nq, 2)
        # test-function tables with weights (and the factor 2 of A:B on the 12 slot)
        DWw = self.DW * w[None, :, None]
        DWw[..., 2] *= 2.0
        self._DWw = DWw.reshape(self.N, -1)
        self._Ww = (self.W * w[None, :, None]).reshape(self.N, -1)
        self._GZw = (self.GZ * w[None, :, None]).reshape(self.M, -1)
        self._W2 = self.W.reshape(self.N, -1)
        self._DW2 = self.DW.reshape(self.N, -1)
        self._GZ2 = self.GZ.reshape(self.M, -1)
        self.stress = scenario.stress
        self.flux = scenario.flux
        self.index = scenario.stress.index
        f = scenario.forcing_closed_form()
        self._forcing_values = None
        if f is not None:
            fx, fy = f(quad.x, quad.y, 0.0)
            self._forcing_values = np.column_stack([np.broadcast_to(fx, quad.x.shape),
                                                    np.broadcast_to(fy, quad.x.shape)])
        self.frozen_p = None  # exponent override (mollified runs)

    # -- reconstruction -------------------------------------------------------------
    def _check(self, a, b):
        if a.shape != (self.N,) or b.shape != (self.M,):
            raise DimensionMismatch(
                f"state sizes {a.shape}, {b.shape} do not match bases ({self.N}, {self.M})")

    def velocity(self, a):
        nq = self.quad.size
        return (a @ self._W2).reshape(nq, 2), (a @ self._DW2).reshape(nq, 3)

    def concentration(self, b):
        return b @ self.Z, (b @ self._GZ2).reshape(self.quad.size, 2)

    def forcing(self, t):
        if self._forcing_values is None:
            return None
        return self._forcing_values

    def exponent(self, t, c):
        """Exponent at the nodes: frozen override, prescribed p(x,t), or p(c)."""
        if self.frozen_p is not None:
            return self.frozen_p
        if self.index.kind is IndexKind.PRESCRIBED_XT:
            return self.index(x=self.quad.x, y=self.quad.y, t=t)
        return self.index(c)

    # -- right-hand sides ----------------------------------------------------------
    def rhs_velocity(self, state: GalerkinState):
        self._check(state.a, state.b)
        u, Du = self.velocity(state.a)
        c, _ = self.concentration(state.b)
        return self._rhs_velocity(state.t, u, Du, c)

    def _rhs_velocity(self, t, u, Du, c):
        p = self.exponent(t, c)
        S = self.stress.evaluate(p, Du)
        da = self._DWw @ (_packed_outer(u) - S).ravel()
        f = self.forcing(t)
        if f is not None:
            da += self._Ww @ f.ravel()
        return da

    def rhs_concentration(self, state: GalerkinState):
        self._check(state.a, state.b)
        u, Du = self.velocity(state.a)
        return self._rhs_concentration(u, Du, *self.concentration(state.b))

    def _rhs_concentration(self, u, Du, c, gc):
        cc, _ = clamp_concentration(c)
        K = self.flux.coefficient(cc, sym_contract(Du, Du))
        integrand = c[:, None] * u - K[:, None] * gc
        return self._GZw @ integrand.ravel()

    def rhs(self, t, y):
        """Full right-hand side on the stacked coefficient vector ``(a, b)``."""
        a, b = y[: self.N], y[self.N:]
        u, Du = self.velocity(a)
        c, gc = self.concentration(b)
        return np.concatenate([self._rhs_velocity(t, u, Du, c),
                               self._rhs_concentration(u, Du, c, gc)])

    # -- initial data ----------------------------------------------------------------
    def initial_state(self) -> GalerkinState:
        sc = self.scenario
        quad = self.quad
        a0 = np.zeros(self.N)
        vel = sc.velocity0_closed_form()
        if vel is not None:
            a0 = project_L2(VectorField.from_function(quad, *vel), self.bases.velocity)
        b0 = np.zeros(self.M)
        conc = sc.concentration0_closed_form()
        if conc is not None:
            c0 = ScalarField.from_function(quad, conc)
            if c0.values.min() < -1e-14 or c0.values.max() > sc.c_tilde0 * (1 + 1e-12):
                raise ValueError("initial concentration violates 0 <= c0 <= c_tilde0")
            b0 = project_L2(c0, self.bases.concentration)
        return GalerkinState(0.0, a0, b0)

    # -- pointwise diagnostics ------------------------------------------------------
    def diagnostics(self, t, y):
        """Spatial diagnostics for one state (without the Holder column).

        ``clamp_count`` is the number of nodes where a negative concentration
        was clamped before evaluating the exponent and the flux coefficient.
        """
        a, b = y[: self.N], y[self.N:]
        w = self.quad.weights
        u, Du = self.velocity(a)
        c, gc = self.concentration(b)
        p = self.exponent(t, c)
        S = self.stress.evaluate(p, Du)
        cc, n_clamped = clamp_concentration(c)
        K = self.flux.coefficient(cc, sym_contract(Du, Du))
        f = self.forcing(t)
        work = float(w @ np.einsum("qa,qa->q", f, u)) if f is not None else 0.0
        grad_u = (a @ self.bases.velocity.grads.reshape(self.N, -1)).reshape(-1, 4)
        return {
            "t": float(t),
            "kinetic_energy": 0.5 * float(w @ np.einsum("qa,qa->q", u, u)),
            "dissipation": float(w @ sym_contract(S, Du)),
            "work": work,
            "conc_energy": 0.5 * float(w @ (c * c)),
            "flux_dissipation": float(w @ (K * np.einsum("qa,qa->q", gc, gc))),
            "c_min": float(c.min()),
            "c_max": float(c.max()),
            "clamp_count": n_clamped,
            "lux_grad_u": _spatial_lux(self.quad, grad_u, p),
            "lux_stress": _spatial_lux(self.quad, S * np.array([1.0, 1.0, np.sqrt(2.0)]),
                                       dual_exponent(p)),
        }


def _spatial_lux(quad, values, p):
    n = quad.size
    p = np.broadcast_to(np.asarray(p, dtype=float), (n,))
    pts = np.column_stack([quad.nodes, np.zeros(n)])
    samples = SpaceTimeSamples(pts, quad.weights, values)
    return luxembourg_norm(samples, ExponentField(p))
