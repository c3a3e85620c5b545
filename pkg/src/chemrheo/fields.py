"""Domain, quadrature and node-sampled fields.

Every field stores its values at the quadrature nodes.  Vector and scalar
fields may additionally carry an analytic gradient (produced by a basis
expansion or a closed-form Jacobian); derivative operators refuse fields
that only have node samples.

Symmetric tensors are stored as three components ``(B11, B22, B12)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import NonDifferentiableField, QuadratureMismatch


class DomainMode(str, Enum):
    SQUARE = "square"  # unit square, homogeneous Dirichlet data
    TORUS = "torus"  # periodic box

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {
            "unitsquaredirichlet": cls.SQUARE,
            "square": cls.SQUARE,
            "periodictorus": cls.TORUS,
            "torus": cls.TORUS,
        }
        key = str(value).strip().lower().replace("_", "")
        if key not in aliases:
            raise ValueError(f"unknown domain mode {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class Domain:
    mode: DomainMode = DomainMode.SQUARE
    extent: Optional[float] = None
    t_final: float = 1.0

    def __post_init__(self):
        mode = DomainMode.parse(self.mode)
        object.__setattr__(self, "mode", mode)
        if self.extent is None:
            default = 1.0 if mode is DomainMode.SQUARE else 2.0 * np.pi
            object.__setattr__(self, "extent", default)
        if not self.extent > 0:
            raise ValueError("domain extent must be positive")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")

    @property
    def area(self) -> float:
        return self.extent**2

    @property
    def is_square(self) -> bool:
        return self.mode is DomainMode.SQUARE


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Tensor-product rule on the domain.

    Gauss-Legendre on the square (exact for polynomials of degree
    ``2*resolution - 1`` per axis), uniform on the torus (exact for
    trigonometric polynomials below the Nyquist frequency).
    """

    domain: Domain
    resolution: int
    x1d: np.ndarray
    w1d: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @classmethod
    def for_domain(cls, domain: Domain, resolution: int = 64) -> "Quadrature":
        n = int(resolution)
        if n < 1:
            raise ValueError("resolution must be >= 1")
        L = domain.extent
        if domain.is_square:
            x, w = np.polynomial.legendre.leggauss(n)
            x1d = 0.5 * L * (x + 1.0)
            w1d = 0.5 * L * w
        else:
            x1d = L * np.arange(n) / n
            w1d = np.full(n, L / n)
        # x varies slowest: node index q = i * n + j for (x_i, y_j)
        X, Y = np.meshgrid(x1d, x1d, indexing="ij")
        nodes = np.column_stack([X.ravel(), Y.ravel()])
        weights = np.outer(w1d, w1d).ravel()
        return cls(domain, n, _readonly(x1d), _readonly(w1d),
                   _readonly(nodes), _readonly(weights))

    @property
    def exact_degree(self) -> Optional[int]:
        """Polynomial degree integrated exactly per axis (square mode only)."""
        return 2 * self.resolution - 1 if self.domain.is_square else None

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def x(self):
        return self.nodes[:, 0]

    @property
    def y(self):
        return self.nodes[:, 1]

    def integrate(self, values):
        """Integrate node values; trailing axes are kept."""
        values = np.asarray(values, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def same_as(self, other: "Quadrature") -> bool:
        return self is other or (
            self.domain == other.domain and self.resolution == other.resolution
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    quad: Quadrature
    values: np.ndarray
    grad: Optional[np.ndarray] = None  # (nq, 2)

    rank = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.quad.size,):
            raise QuadratureMismatch(
                f"expected {self.quad.size} node values, got {self.values.shape}")
        if self.grad is not None:
            object.__setattr__(self, "grad", _readonly(self.grad))

    @classmethod
    def from_function(cls, quad, func, grad=None):
        x, y = quad.x, quad.y
        values = np.broadcast_to(func(x, y), x.shape)
        g = None
        if grad is not None:
            gx, gy = grad(x, y)
            g = np.column_stack([np.broadcast_to(gx, x.shape),
                                 np.broadcast_to(gy, x.shape)])
        return cls(quad, values, g)

    @property
    def is_differentiable(self) -> bool:
        return self.grad is not None


@dataclass(frozen=True, eq=False)
class VectorField:
    quad: Quadrature
    values: np.ndarray  # (nq, 2)
    grad: Optional[np.ndarray] = None  # (nq, 2, 2), grad[q, a, b] = d_b v_a

    rank = 1

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.quad.size, 2):
            raise QuadratureMismatch(
                f"expected ({self.quad.size}, 2) node values, got {self.values.shape}")
        if self.grad is not None:
            object.__setattr__(self, "grad", _readonly(self.grad))

    @classmethod
    def from_function(cls, quad, func, jac: Optional[Callable] = None):
        """Sample ``func(x, y) -> (vx, vy)``.

        ``jac(x, y)`` must return ``((dvx/dx, dvx/dy), (dvy/dx, dvy/dy))``;
        without it the field is node-only.
        """
        x, y = quad.x, quad.y
        vx, vy = func(x, y)
        values = np.column_stack([np.broadcast_to(vx, x.shape),
                                  np.broadcast_to(vy, x.shape)])
        g = None
        if jac is not None:
            (a, b), (c, d) = jac(x, y)
            g = np.empty((quad.size, 2, 2))
            g[:, 0, 0] = np.broadcast_to(a, x.shape)
            g[:, 0, 1] = np.broadcast_to(b, x.shape)
            g[:, 1, 0] = np.broadcast_to(c, x.shape)
            g[:, 1, 1] = np.broadcast_to(d, x.shape)
        return cls(quad, values, g)

    @property
    def is_differentiable(self) -> bool:
        return self.grad is not None


@dataclass(frozen=True, eq=False)
class SymTensorField:
    quad: Quadrature
    values: np.ndarray  # (nq, 3) as (B11, B22, B12)

    rank = 2

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        if self.values.shape != (self.quad.size, 3):
            raise QuadratureMismatch(
                f"expected ({self.quad.size}, 3) node values, got {self.values.shape}")

    def as_matrices(self):
        v = self.values
        out = np.empty((v.shape[0], 2, 2))
        out[:, 0, 0] = v[:, 0]
        out[:, 1, 1] = v[:, 1]
        out[:, 0, 1] = out[:, 1, 0] = v[:, 2]
        return out


# -- tensor helpers on (..., 3) packed symmetric arrays -------------------------

def sym_from_grad(grad):
    """Pack ``0.5 * (G + G^T)`` for gradients of shape (..., 2, 2)."""
    out = np.empty(grad.shape[:-2] + (3,))
    out[..., 0] = grad[..., 0, 0]
    out[..., 1] = grad[..., 1, 1]
    out[..., 2] = 0.5 * (grad[..., 0, 1] + grad[..., 1, 0])
    return out


def sym_contract(A, B):
    """Double contraction ``A:B`` of packed symmetric tensors."""
    return A[..., 0] * B[..., 0] + A[..., 1] * B[..., 1] + 2.0 * A[..., 2] * B[..., 2]


def sym_norm(B):
    """Frobenius norm of packed symmetric tensors."""
    return np.sqrt(sym_contract(B, B))


# -- operators -------------------------------------------------------------------

def sym_gradient(v: VectorField) -> SymTensorField:
    """Symmetric velocity gradient ``Dv`` at the quadrature nodes."""
    if not isinstance(v, VectorField) or v.grad is None:
        raise NonDifferentiableField("sym_gradient needs a field with analytic derivatives")
    return SymTensorField(v.quad, sym_from_grad(v.grad))


def divergence(v: VectorField) -> ScalarField:
    if not isinstance(v, VectorField) or v.grad is None:
        raise NonDifferentiableField("divergence needs a field with analytic derivatives")
    return ScalarField(v.quad, v.grad[:, 0, 0] + v.grad[:, 1, 1])


def l2_inner(f, g) -> float:
    """``sum_q w_q f(q) . g(q)`` for fields of equal rank on one quadrature."""
    if not f.quad.same_as(g.quad) or f.rank != g.rank:
        raise QuadratureMismatch("l2_inner needs fields of equal rank on one quadrature")
    if f.rank == 0:
        prod = f.values * g.values
    elif f.rank == 1:
        prod = np.einsum("qa,qa->q", f.values, g.values)
    else:
        prod = sym_contract(f.values, g.values)
    return float(f.quad.weights @ prod)
