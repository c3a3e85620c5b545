"""Galerkin bases: solenoidal velocity fields and concentration modes.

Square mode
    velocity generators are curls of the stream functions
    ``psi_mn = sin^2(m pi x) sin^2(n pi y)`` (both psi and grad psi vanish on
    the boundary, so every generator satisfies full no-slip), concentration
    modes are ``2 sin(k pi x) sin(l pi y)``.
Torus mode
    realified divergence-free Fourier modes ``k_perp cos(k.x)``,
    ``k_perp sin(k.x)`` for velocity and ``cos(k.x)``, ``sin(k.x)`` for
    concentration (the constant mode is excluded so the stiffness matrix is
    definite).

Square velocity generators are orthonormalized by a Rayleigh-Ritz rotation
of their span: the discrete problem ``A v = lam G v`` with ``G`` the L2 Gram
and ``A`` the Dirichlet-form matrix.  The resulting fields are L2
orthonormal and ordered by nondecreasing Rayleigh quotient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import BasisTooLarge, NonDifferentiableField, QuadratureMismatch, SingularGram
from .fields import (Domain, DomainMode, Quadrature, ScalarField, VectorField,
                     sym_from_grad)

MAX_BASIS_SIZE = 64
CACHE_VERSION = 1


# -- enumeration ----------------------------------------------------------------

def sine_pairs(count):
    """First ``count`` pairs (m, n) >= 1 by nondecreasing m^2 + n^2, ties m <= n first."""
    r = 1
    while True:
        pairs = [(m, n) for m in range(1, r + 1) for n in range(1, r + 1)
                 if m * m + n * n <= r * r]
        if len(pairs) >= count:
            pairs.sort(key=lambda mn: (mn[0] ** 2 + mn[1] ** 2, mn[0]))
            return pairs[:count]
        r += 1


def fourier_wavevectors(count):
    """Half-plane integer wavevectors (k1 > 0, or k1 == 0 and k2 > 0) by |k|^2."""
    r = 1
    while True:
        ks = [(k1, k2) for k1 in range(0, r + 1) for k2 in range(-r, r + 1)
              if (k1 > 0 or k2 > 0) and k1 * k1 + k2 * k2 <= r * r]
        if 2 * len(ks) >= count:
            ks.sort(key=lambda k: (k[0] ** 2 + k[1] ** 2, -k[0], -k[1]))
            return ks
        r += 1


# -- generator evaluation ---------------------------------------------------------

def _stream_generator(m, n, L, x, y):
    """Values (P, 2) and gradients (P, 2, 2) of curl(sin^2(m pi x/L) sin^2(n pi y/L))."""
    a = m * np.pi / L
    b = n * np.pi / L
    Sx = np.sin(a * x) ** 2
    Sy = np.sin(b * y) ** 2
    dSx = a * np.sin(2 * a * x)
    dSy = b * np.sin(2 * b * y)
    ddSx = 2 * a * a * np.cos(2 * a * x)
    ddSy = 2 * b * b * np.cos(2 * b * y)
    vals = np.stack([Sx * dSy, -dSx * Sy], axis=-1)
    grad = np.empty(x.shape + (2, 2))
    grad[..., 0, 0] = dSx * dSy
    grad[..., 0, 1] = Sx * ddSy
    grad[..., 1, 0] = -ddSx * Sy
    grad[..., 1, 1] = -(dSx * dSy)
    return vals, grad


def _fourier_velocity(k, phase, L, x, y):
    k1, k2 = k
    kk = np.hypot(k1, k2)
    e = np.array([-k2, k1]) / kk
    kap = 2 * np.pi * np.array([k1, k2]) / L
    arg = kap[0] * x + kap[1] * y
    c = np.sqrt(2.0) / L
    if phase == "cos":
        f, df = np.cos(arg), -np.sin(arg)
    else:
        f, df = np.sin(arg), np.cos(arg)
    vals = c * f[..., None] * e
    grad = c * df[..., None, None] * e[:, None] * kap[None, :]
    return vals, grad


def _sine_mode(k, l, L, x, y):
    a = k * np.pi / L
    b = l * np.pi / L
    c = 2.0 / L
    sx, sy = np.sin(a * x), np.sin(b * y)
    vals = c * sx * sy
    grad = np.stack([c * a * np.cos(a * x) * sy, c * b * sx * np.cos(b * y)], axis=-1)
    return vals, grad


def _fourier_scalar(k, phase, L, x, y):
    kap = 2 * np.pi * np.array(k) / L
    arg = kap[0] * x + kap[1] * y
    c = np.sqrt(2.0) / L
    if phase == "cos":
        vals = c * np.cos(arg)
        d = -c * np.sin(arg)
    else:
        vals = c * np.sin(arg)
        d = c * np.cos(arg)
    return vals, d[..., None] * kap


def required_resolution(domain: Domain, N: int, M: int) -> int:
    """Smallest quadrature resolution that integrates the cubic Galerkin terms.

    Square: Gauss-Legendre with n points integrates cos(k pi x) on [0,1] to
    rounding for k up to roughly 0.85 n; the convective terms reach three
    times the largest velocity frequency.  Torus: uniform rule, exact below
    Nyquist.
    """
    if domain.is_square:
        kv = 2 * max(max(mn) for mn in sine_pairs(max(N, 1)))
        kc = max(max(kl) for kl in sine_pairs(max(M, 1)))
        kmax = max(3 * kv, kv + 2 * kc)
        return int(np.ceil(1.25 * kmax)) + 8
    ks = fourier_wavevectors(max(N, M, 1))[: (max(N, M) + 1) // 2]
    kmax = max(max(abs(k1), abs(k2)) for k1, k2 in ks)
    return 3 * kmax + 1


# -- basis containers -------------------------------------------------------------

@dataclass(eq=False)
class VelocityBasis:
    domain: Domain
    quad: Quadrature
    labels: list
    coeffs: np.ndarray  # (N, N): w_j = sum_i coeffs[j, i] g_i
    values: np.ndarray  # (N, nq, 2)
    grads: np.ndarray  # (N, nq, 2, 2)
    rayleigh: np.ndarray
    sym_grads: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.sym_grads = sym_from_grad(self.grads)

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.N

    def generators_at(self, x, y):
        L = self.domain.extent
        vals, grads = [], []
        for lab in self.labels:
            if self.domain.is_square:
                v, g = _stream_generator(lab[0], lab[1], L, x, y)
            else:
                v, g = _fourier_velocity(lab[0], lab[1], L, x, y)
            vals.append(v)
            grads.append(g)
        return np.array(vals), np.array(grads)

    def evaluate(self, points):
        """Basis values (N, P, 2) and gradients (N, P, 2, 2) at arbitrary points."""
        points = np.asarray(points, dtype=float)
        gv, gg = self.generators_at(points[:, 0], points[:, 1])
        return (np.einsum("ji,ipa->jpa", self.coeffs, gv),
                np.einsum("ji,ipab->jpab", self.coeffs, gg))

    def field(self, a) -> VectorField:
        a = np.asarray(a, dtype=float)
        return VectorField(self.quad, np.tensordot(a, self.values, 1),
                           np.tensordot(a, self.grads, 1))

    def basis_field(self, j) -> VectorField:
        return VectorField(self.quad, self.values[j], self.grads[j])

    def gram(self):
        w = self.quad.weights
        return np.einsum("iqa,q,jqa->ij", self.values, w, self.values)


@dataclass(eq=False)
class ConcentrationBasis:
    domain: Domain
    quad: Quadrature
    labels: list
    values: np.ndarray  # (M, nq)
    grads: np.ndarray  # (M, nq, 2)
    stiffness: np.ndarray = field(init=False)

    def __post_init__(self):
        w = self.quad.weights
        self.stiffness = np.einsum("kqa,q,lqa->kl", self.grads, w, self.grads)

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.M

    def evaluate(self, points):
        points = np.asarray(points, dtype=float)
        L = self.domain.extent
        x, y = points[:, 0], points[:, 1]
        vals, grads = [], []
        for lab in self.labels:
            if self.domain.is_square:
                v, g = _sine_mode(lab[0], lab[1], L, x, y)
            else:
                v, g = _fourier_scalar(lab[0], lab[1], L, x, y)
            vals.append(v)
            grads.append(g)
        return np.array(vals), np.array(grads)

    def field(self, b) -> ScalarField:
        b = np.asarray(b, dtype=float)
        return ScalarField(self.quad, b @ self.values, np.tensordot(b, self.grads, 1))

    def basis_field(self, k) -> ScalarField:
        return ScalarField(self.quad, self.values[k], self.grads[k])

    def gram(self):
        return np.einsum("kq,q,lq->kl", self.values, self.quad.weights, self.values)


# -- construction ------------------------------------------------------------------

def _quad_for(domain, quad, resolution):
    if quad is None:
        return Quadrature.for_domain(domain, resolution)
    if quad.domain != domain:
        raise QuadratureMismatch("quadrature belongs to a different domain")
    return quad


def build_velocity_basis(domain: Domain, N: int, quad: Optional[Quadrature] = None,
                         resolution: int = 64, max_size: int = MAX_BASIS_SIZE,
                         cache: Optional[str | Path] = None) -> VelocityBasis:
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > max_size:
        raise BasisTooLarge(f"N={N} exceeds the configured maximum {max_size}")
    quad = _quad_for(domain, quad, resolution)
    if cache is not None:
        hit = load_basis_cache(cache, "velocity", domain, N, quad)
        if hit is not None:
            return hit
    if domain.is_square:
        basis = _square_velocity(domain, quad, N)
    else:
        basis = _torus_velocity(domain, quad, N)
    if cache is not None:
        save_basis_cache(cache, basis)
    return basis


def _torus_velocity(domain, quad, N):
    ks = fourier_wavevectors(N)
    labels = [(k, ph) for k in ks for ph in ("cos", "sin")][:N]
    L = domain.extent
    vals, grads = zip(*(_fourier_velocity(k, ph, L, quad.x, quad.y) for k, ph in labels))
    rayleigh = np.array([(2 * np.pi / L) ** 2 * (k[0] ** 2 + k[1] ** 2) for k, _ in labels])
    return VelocityBasis(domain, quad, labels, np.eye(N), np.array(vals), np.array(grads),
                         rayleigh)


def _square_velocity(domain, quad, N):
    labels = sine_pairs(N)
    L = domain.extent
    gv, gg = [], []
    for m, n in labels:
        v, g = _stream_generator(m, n, L, quad.x, quad.y)
        gv.append(v)
        gg.append(g)
    gv, gg = np.array(gv), np.array(gg)
    w = quad.weights
    G = np.einsum("iqa,q,jqa->ij", gv, w, gv)
    A = np.einsum("iqab,q,jqab->ij", gg, w, gg)
    try:
        lam, V = scipy.linalg.eigh(A, G)
    except np.linalg.LinAlgError as exc:
        raise SingularGram("velocity generators are numerically dependent") from exc
    R = V.T
    # second orthonormalization pass (modified Gram-Schmidt in the L2 product)
    vals = np.einsum("ji,iqa->jqa", R, gv)
    for j in range(N):
        for i in range(j):
            proj = np.einsum("qa,q,qa->", vals[i], w, vals[j])
            vals[j] -= proj * vals[i]
            R[j] -= proj * R[i]
        nrm = np.sqrt(np.einsum("qa,q,qa->", vals[j], w, vals[j]))
        vals[j] /= nrm
        R[j] /= nrm
    grads = np.einsum("ji,iqab->jqab", R, gg)
    rayleigh = np.einsum("jqab,q,jqab->j", grads, w, grads)
    order = np.argsort(rayleigh, kind="stable")
    return VelocityBasis(domain, quad, labels, R[order], vals[order], grads[order],
                         rayleigh[order])


def build_concentration_basis(domain: Domain, M: int, quad: Optional[Quadrature] = None,
                              resolution: int = 64, max_size: int = MAX_BASIS_SIZE,
                              cache: Optional[str | Path] = None) -> ConcentrationBasis:
    if M < 1:
        raise ValueError("M must be >= 1")
    if M > max_size:
        raise BasisTooLarge(f"M={M} exceeds the configured maximum {max_size}")
    quad = _quad_for(domain, quad, resolution)
    if cache is not None:
        hit = load_basis_cache(cache, "concentration", domain, M, quad)
        if hit is not None:
            return hit
    L = domain.extent
    if domain.is_square:
        labels = sine_pairs(M)
        parts = [_sine_mode(k, l, L, quad.x, quad.y) for k, l in labels]
    else:
        ks = fourier_wavevectors(M)
        labels = [(k, ph) for k in ks for ph in ("cos", "sin")][:M]
        parts = [_fourier_scalar(k, ph, L, quad.x, quad.y) for k, ph in labels]
    vals, grads = zip(*parts)
    basis = ConcentrationBasis(domain, quad, labels, np.array(vals), np.array(grads))
    if cache is not None:
        save_basis_cache(cache, basis)
    return basis


# -- projections -----------------------------------------------------------------------

def project_L2(f, basis) -> np.ndarray:
    """Coefficients ``<f, b_j>`` of the L2-orthogonal projection onto the basis span."""
    if not f.quad.same_as(basis.quad):
        raise QuadratureMismatch("field and basis use different quadratures")
    w = basis.quad.weights
    if isinstance(basis, VelocityBasis):
        if f.rank != 1:
            raise QuadratureMismatch("velocity basis needs a vector field")
        return np.einsum("jqa,q,qa->j", basis.values, w, f.values)
    if f.rank != 0:
        raise QuadratureMismatch("concentration basis needs a scalar field")
    return basis.values @ (w * f.values)


def project_H10(f: ScalarField, basis: ConcentrationBasis) -> np.ndarray:
    """Projection in the ``<grad ., grad .>`` inner product: solve ``G c = <grad f, grad z_k>``."""
    if not f.quad.same_as(basis.quad):
        raise QuadratureMismatch("field and basis use different quadratures")
    if f.grad is None:
        raise NonDifferentiableField("H1_0 projection needs the gradient of f")
    rhs = np.einsum("kqa,q,qa->k", basis.grads, basis.quad.weights, f.grad)
    try:
        factor = scipy.linalg.cho_factor(basis.stiffness)
    except np.linalg.LinAlgError as exc:
        raise SingularGram("stiffness matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, rhs)


# -- cache file -------------------------------------------------------------------------

def _cache_header(kind, domain, size, quad):
    return {
        "magic": "chemrheo-basis",
        "version": CACHE_VERSION,
        "kind": kind,
        "mode": domain.mode.value,
        "extent": float(domain.extent),
        "size": int(size),
        "resolution": int(quad.resolution),
    }


def save_basis_cache(path, basis) -> None:
    """Write node values of a built basis; a JSON header identifies the build."""
    kind = "velocity" if isinstance(basis, VelocityBasis) else "concentration"
    header = _cache_header(kind, basis.domain, basis.size, basis.quad)
    arrays = {"values": basis.values, "grads": basis.grads,
              "labels": np.array(json.dumps(basis.labels))}
    if kind == "velocity":
        arrays["coeffs"] = basis.coeffs
        arrays["rayleigh"] = basis.rayleigh
    with open(path, "wb") as fh:
        np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)


def _labels_from_json(text, kind, domain):
    raw = json.loads(text)
    if domain.is_square:
        return [tuple(lab) for lab in raw]
    return [(tuple(lab[0]), lab[1]) for lab in raw]


def load_basis_cache(path, kind, domain, size, quad):
    """Return the cached basis, or ``None`` when missing, stale or unreadable."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            if header != _cache_header(kind, domain, size, quad):
                return None
            labels = _labels_from_json(str(data["labels"]), kind, domain)
            if kind == "velocity":
                return VelocityBasis(domain, quad, labels, data["coeffs"], data["values"],
                                     data["grads"], data["rayleigh"])
            return ConcentrationBasis(domain, quad, labels, data["values"], data["grads"])
    except (OSError, ValueError, KeyError):
        return None
