"""Concentration-dependent power-law stress and bounded Fickian flux.

Stress:  S(c, B) = nu0 * (nu1 + nu2 |B|^2)^((p(c) - 2) / 2) * B
Flux:    q(c, g, B) = (k0 + k1 / (1 + |B|^2)) * g

With ``nu1 = nu2 = 1`` the stress is the usual prototype
``nu0 (1 + |B|^2)^((p - 2)/2) B``; other ``(nu1, nu2)`` give the
regularized/electro-rheological variant.  Tensors are packed as
``(B11, B22, B12)``; ``|B|`` is the Frobenius norm.

Alongside the models, :func:`check_structure` samples the growth,
monotonicity and coercivity inequalities with the constants stored on the
model and raises :class:`StructureViolation` with the offending sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ExponentOutOfRange, StructureViolation
from .fields import sym_contract, sym_norm


class IndexKind(str, Enum):
    PIECEWISE_LINEAR = "piecewise_linear"
    EXPONENTIAL = "exponential"
    PRESCRIBED_XT = "prescribed_xt"


def clamp_concentration(c):
    """Clamp negative concentrations to zero; return ``(clamped, n_clamped)``."""
    c = np.asarray(c, dtype=float)
    neg = c < 0.0
    n = int(np.count_nonzero(neg))
    if n:
        c = np.where(neg, 0.0, c)
    return c, n


def electro_exponent(p_min, p_max, extent=1.0):
    """Prescribed exponent used by the electro-rheological preset.

    ``p = p_min + (p_max - p_min) * (1 + sin(kx) sin(ky) cos(pi t)) / 2``
    with ``k = 2 pi / extent``.  Returns the map and its Lipschitz constant.
    """
    k = 2.0 * np.pi / extent
    amp = 0.5 * (p_max - p_min)

    def p_xt(x, y, t):
        return p_min + amp * (1.0 + np.sin(k * x) * np.sin(k * y) * np.cos(np.pi * t))

    lip = amp * np.sqrt(2.0 * k * k + np.pi**2)
    return p_xt, lip


@dataclass(frozen=True)
class PowerIndexFamily:
    kind: IndexKind = IndexKind.PIECEWISE_LINEAR
    p_min: float = 1.5
    p_max: float = 2.5
    c_ref: float = 1.0
    p_xt: Optional[Callable] = field(default=None, compare=False, repr=False)
    lipschitz_xt: Optional[float] = None
    extent: float = 1.0
    t_final: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", IndexKind(self.kind))
        if not (1.0 < self.p_min <= self.p_max < np.inf):
            raise ValueError(
                f"need 1 < p_min <= p_max < inf, got p_min={self.p_min}, p_max={self.p_max}")
        if not self.c_ref > 0:
            raise ValueError("c_ref must be positive")
        if self.kind is IndexKind.PRESCRIBED_XT and self.p_xt is None:
            p_xt, lip = electro_exponent(self.p_min, self.p_max, self.extent)
            object.__setattr__(self, "p_xt", p_xt)
            object.__setattr__(self, "lipschitz_xt", lip)

    @classmethod
    def constant(cls, p):
        return cls(IndexKind.PIECEWISE_LINEAR, p, p, 1.0)

    @property
    def depends_on_c(self) -> bool:
        return self.kind is not IndexKind.PRESCRIBED_XT

    @property
    def is_constant(self) -> bool:
        return self.p_min == self.p_max

    @property
    def lipschitz(self) -> float:
        """Lipschitz constant of p in its argument (c, or (x, y, t))."""
        if self.kind is IndexKind.PRESCRIBED_XT:
            return float(self.lipschitz_xt)
        return (self.p_max - self.p_min) / self.c_ref

    def __call__(self, c=None, x=None, y=None, t=None):
        if self.kind is IndexKind.PRESCRIBED_XT:
            if x is None or y is None or t is None:
                raise TypeError("prescribed exponent needs (x, y, t)")
            p = self.p_xt(np.asarray(x, float), np.asarray(y, float), t)
            return np.clip(p, self.p_min, self.p_max)
        c, _ = clamp_concentration(c)
        span = self.p_max - self.p_min
        if self.kind is IndexKind.PIECEWISE_LINEAR:
            return self.p_max - span * np.minimum(1.0, c / self.c_ref)
        return self.p_min + span * np.exp(-c / self.c_ref)

    def sample(self, rng, n):
        """Random exponent values over the model's natural argument range."""
        if self.kind is IndexKind.PRESCRIBED_XT:
            x = rng.uniform(0.0, self.extent, n)
            y = rng.uniform(0.0, self.extent, n)
            t = rng.uniform(0.0, self.t_final, n)
            return self(x=x, y=y, t=t), np.zeros(n)
        c = rng.uniform(0.0, 10.0 * self.c_ref, n)
        return self(c), c


def power_index(model: PowerIndexFamily, c):
    """p(c) for concentration-dependent families; negative c is clamped."""
    out = model(c)
    return float(out) if np.ndim(out) == 0 else out


def dual_exponent(p):
    """Conjugate exponent ``p / (p - 1)``."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 1.0 + 1e-12):
        raise ExponentOutOfRange(f"dual exponent needs p > 1, got min {p.min()}")
    out = p / (p - 1.0)
    return float(out) if out.ndim == 0 else out


# -- stress ----------------------------------------------------------------------

def _sweep_coercivity(nu0, nu1, nu2, p_min, p_max, safety=0.5):
    """Numerical constants (C2, C3) for  S:B >= C2 (|B|^p + |S|^p') - C3.

    Dense sweep over p in [p_min, p_max] and |B| in [0, 1e3].  C2 is a
    ``safety`` fraction of the smallest ratio observed for |B| >= 1 and C3
    covers the worst deficit, with a 10 % margin.
    """
    ps = np.linspace(p_min, p_max, 61)[:, None]
    s = np.concatenate([[0.0], np.logspace(-8, 3, 4000)])[None, :]
    g = nu0 * (nu1 + nu2 * s * s) ** ((ps - 2.0) / 2.0)
    sb = g * s * s
    mod_s = g * s
    pd = ps / (ps - 1.0)
    bound = s**ps + mod_s**pd
    big = s >= 1.0
    ratio = np.where(big, sb / np.where(bound > 0, bound, 1.0), np.inf)
    C2 = safety * float(ratio.min())
    deficit = C2 * bound - sb
    C3 = 1.1 * max(float(deficit.max()), 0.0) + 1e-12
    return C2, C3


def _growth_constant(nu0, nu1, nu2, p_min, p_max):
    # (nu1 + nu2 s^2)^e <= kappa^e (1 + s^2)^e with kappa = max/min(nu1, nu2)
    # depending on the sign of e; p between the endpoints is bracketed by them.
    def kappa(p):
        base = max(nu1, nu2) if p >= 2.0 else min(nu1, nu2)
        return base ** ((p - 2.0) / 2.0)

    k = max(kappa(p_min), kappa(p_max), 1.0)
    return nu0 * max(1.0, 2.0 ** ((p_max - 2.0) / 2.0)) * k


@dataclass(frozen=True)
class StressModel:
    nu0: float = 1.0
    index: PowerIndexFamily = field(default_factory=PowerIndexFamily)
    nu1: float = 1.0
    nu2: float = 1.0
    C1: Optional[float] = None
    C2: Optional[float] = None
    C3: Optional[float] = None

    def __post_init__(self):
        if not (self.nu0 > 0 and self.nu1 > 0 and self.nu2 > 0):
            raise ValueError("viscosity parameters must be positive")
        ix = self.index
        if self.C1 is None:
            object.__setattr__(self, "C1", _growth_constant(
                self.nu0, self.nu1, self.nu2, ix.p_min, ix.p_max))
        if self.C2 is None or self.C3 is None:
            C2, C3 = _sweep_coercivity(self.nu0, self.nu1, self.nu2, ix.p_min, ix.p_max)
            object.__setattr__(self, "C2", C2)
            object.__setattr__(self, "C3", C3)

    def viscosity(self, p, B):
        """Scalar generalized viscosity for exponent ``p`` and packed ``B``."""
        s2 = sym_contract(B, B)
        return self.nu0 * (self.nu1 + self.nu2 * s2) ** ((p - 2.0) / 2.0)

    def evaluate(self, p, B):
        """Stress for an already evaluated exponent ``p`` (broadcast over nodes)."""
        return self.viscosity(p, B)[..., None] * B


def _as_packed(B):
    B = np.asarray(B, dtype=float)
    if B.shape[-2:] == (2, 2):
        packed = np.stack([B[..., 0, 0], B[..., 1, 1], 0.5 * (B[..., 0, 1] + B[..., 1, 0])], -1)
        return packed, True
    return B, False


def _unpack(P):
    out = np.empty(P.shape[:-1] + (2, 2))
    out[..., 0, 0] = P[..., 0]
    out[..., 1, 1] = P[..., 1]
    out[..., 0, 1] = out[..., 1, 0] = P[..., 2]
    return out


def stress(model: StressModel, c, B):
    """Extra stress ``S(c, B)``; ``B`` packed (..., 3) or as (..., 2, 2) matrices."""
    packed, was_matrix = _as_packed(B)
    p = np.asarray(model.index(c), dtype=float)
    S = model.evaluate(p, packed)
    return _unpack(S) if was_matrix else S


# -- flux ------------------------------------------------------------------------

@dataclass(frozen=True)
class FluxModel:
    k0: float = 1.0
    k1: float = 0.0

    def __post_init__(self):
        if not self.k0 > 0:
            raise ValueError("k0 must be positive")
        if self.k1 < 0:
            raise ValueError("k1 must be nonnegative")

    @property
    def C4(self) -> float:
        return self.k0 + self.k1

    @property
    def C5(self) -> float:
        return self.k0

    def coefficient(self, c, s2):
        """K(c, |B|) given ``s2 = |B|^2``; independent of c in this family."""
        return self.k0 + self.k1 / (1.0 + s2)


def flux(model: FluxModel, c, g, B):
    """``K(c, |B|) g`` for gradient ``g`` (..., 2) and packed/matrix ``B``."""
    packed, _ = _as_packed(B)
    c, _ = clamp_concentration(c)
    K = model.coefficient(c, sym_contract(packed, packed))
    return np.asarray(K)[..., None] * np.asarray(g, dtype=float)


# -- structure verification ---------------------------------------------------------

@dataclass
class StructureReport:
    kind: str
    n_samples: int
    seed: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def lines(self):
        for name, c in self.checks.items():
            status = "PASS" if c["passed"] else "FAIL"
            yield f"{status} {self.kind}.{name}: min={c['min']:.6g} max={c['max']:.6g}"


def _random_sym(rng, n):
    return rng.uniform(-10.0, 10.0, size=(n, 3))


def _record(report, name, values, ok):
    report.checks[name] = {
        "min": float(np.min(values)),
        "max": float(np.max(values)),
        "passed": bool(np.all(ok)),
    }
    if not np.all(ok):
        i = int(np.flatnonzero(~ok)[0])
        return i
    return None


def check_structure(model, n_samples: int = 10_000, seed: int = 0,
                    mono_margin: float = 1e-14) -> StructureReport:
    """Sample the structural inequalities of a stress or flux model.

    Raises :class:`StructureViolation` on the first failing sample, with the
    sample attached as ``witness``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(model, StressModel):
        return _check_stress(model, n_samples, seed, rng, mono_margin)
    if isinstance(model, FluxModel):
        return _check_flux(model, n_samples, seed, rng)
    raise TypeError(f"cannot check {type(model).__name__}")


def _check_stress(model, n, seed, rng, mono_margin):
    report = StructureReport("stress", n, seed)
    p, c = model.index.sample(rng, n)
    B1 = _random_sym(rng, n)
    B2 = _random_sym(rng, n)
    S1 = model.evaluate(p, B1)
    S2 = model.evaluate(p, B2)
    n1 = sym_norm(B1)
    mS1 = sym_norm(S1)

    growth = mS1 / (n1 ** (p - 1.0) + 1.0)
    bad = _record(report, "growth", growth, growth <= model.C1 * (1 + 1e-12))
    if bad is not None:
        raise StructureViolation(
            f"growth bound |S| <= C1(|B|^(p-1)+1) fails with C1={model.C1}",
            {"p": p[bad], "c": c[bad], "B": B1[bad], "ratio": growth[bad]})

    dB = B1 - B2
    d2 = sym_contract(dB, dB)
    gap = sym_contract(S1 - S2, dB)
    distinct = d2 > 0
    rel = np.where(distinct, gap / np.where(distinct, d2, 1.0), np.inf)
    bad = _record(report, "monotonicity", rel[distinct] if distinct.any() else np.array([np.inf]),
                  (gap > mono_margin * d2) | ~distinct)
    if bad is not None:
        raise StructureViolation(
            "strict monotonicity fails",
            {"p": p[bad], "B1": B1[bad], "B2": B2[bad], "gap": gap[bad]})

    pd = p / (p - 1.0)
    coer = sym_contract(S1, B1) - model.C2 * (n1**p + mS1**pd) + model.C3
    bad = _record(report, "coercivity", coer, coer >= 0.0)
    if bad is not None:
        raise StructureViolation(
            f"coercivity fails with C2={model.C2}, C3={model.C3}",
            {"p": p[bad], "B": B1[bad], "gap": coer[bad]})
    return report


def _check_flux(model, n, seed, rng):
    report = StructureReport("flux", n, seed)
    c = rng.uniform(0.0, 10.0, n)
    B = _random_sym(rng, n)
    g = rng.uniform(-10.0, 10.0, size=(n, 2))
    q = flux(model, c, g, B)
    gn = np.linalg.norm(g, axis=-1)
    qn = np.linalg.norm(q, axis=-1)

    upper = model.C4 * gn - qn
    bad = _record(report, "flux_bound", upper, upper >= -1e-12 * (1 + model.C4 * gn))
    if bad is not None:
        raise StructureViolation("|q| <= C4 |g| fails", {"c": c[bad], "g": g[bad], "B": B[bad]})

    coer = np.einsum("na,na->n", q, g) - model.C5 * gn**2
    bad = _record(report, "flux_coercivity", coer, coer >= -1e-12 * (1 + gn**2))
    if bad is not None:
        raise StructureViolation("q.g >= C5 |g|^2 fails", {"c": c[bad], "g": g[bad], "B": B[bad]})

    g2 = rng.uniform(-10.0, 10.0, size=(n, 2))
    a, b = rng.uniform(-2.0, 2.0, size=(2, n, 1))
    lin = flux(model, c, a * g + b * g2, B) - (a * q + b * flux(model, c, g2, B))
    lin_err = np.abs(lin).max(axis=-1) / (1.0 + np.abs(a * g).max(-1) + np.abs(b * g2).max(-1))
    bad = _record(report, "linearity", lin_err, lin_err <= 1e-13 * (1 + model.C4))
    if bad is not None:
        raise StructureViolation("flux is not linear in g", {"c": c[bad], "B": B[bad]})
    return report
