"""Variable-exponent Lebesgue machinery on sampled space-time data.

Functions on Q_T = Omega x (0, T) are represented by :class:`SpaceTimeSamples`
(values on a tensor grid of space nodes times time levels, with positive
weights), exponents by :class:`ExponentField`.  The Luxembourg norm is
found by bracketing and bisection on the strictly decreasing map
``lam -> modular(f / lam)``.

Seminorm and modulus estimators are sampled suprema, i.e. lower bounds of
the continuum quantities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ExponentMismatch, GridMismatch, NoConvergence


@dataclass(frozen=True, eq=False)
class SpaceTimeSamples:
    """Values ``f(z)`` at points ``z = (x, y, t)`` with quadrature weights.

    ``points`` has shape (n, 3).  ``shape`` optionally records the tensor
    layout ``(nt, nx, ny)`` used by neighbour-based estimators.
    """

    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    shape: Optional[tuple] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        if w.shape != (pts.shape[0],) or v.shape[0] != pts.shape[0]:
            raise GridMismatch("points, weights and values disagree in length")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)

    @classmethod
    def on_grid(cls, xs, wx, ys, wy, ts, wt, values):
        """Tensor grid; ``values`` has shape (nt, nx, ny) or (nt, nx, ny, ...)."""
        T, X, Y = np.meshgrid(ts, xs, ys, indexing="ij")
        points = np.column_stack([X.ravel(), Y.ravel(), T.ravel()])
        W = (np.asarray(wt)[:, None, None] * np.asarray(wx)[None, :, None]
             * np.asarray(wy)[None, None, :])
        v = np.asarray(values, dtype=float)
        shape = (len(ts), len(xs), len(ys))
        return cls(points, W.ravel(), v.reshape((-1,) + v.shape[3:]), shape)

    @classmethod
    def uniform_box(cls, values, extent=1.0, t_final=1.0):
        """Midpoint rule on ``[0, extent]^2 x [0, t_final]``; values (nt, nx, ny)."""
        values = np.asarray(values, dtype=float)
        nt, nx, ny = values.shape[:3]
        xs = (np.arange(nx) + 0.5) * extent / nx
        ys = (np.arange(ny) + 0.5) * extent / ny
        ts = (np.arange(nt) + 0.5) * t_final / nt
        return cls.on_grid(xs, np.full(nx, extent / nx), ys, np.full(ny, extent / ny),
                           ts, np.full(nt, t_final / nt), values)

    def with_values(self, values):
        return SpaceTimeSamples(self.points, self.weights, values, self.shape)

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def magnitude(self):
        """Pointwise Euclidean magnitude (scalar values are returned as |f|)."""
        v = self.values
        if v.ndim == 1:
            return np.abs(v)
        return np.sqrt(np.sum(v.reshape(v.shape[0], -1) ** 2, axis=1))


@dataclass(frozen=True, eq=False)
class ExponentField:
    values: np.ndarray
    p_min: Optional[float] = None
    p_max: Optional[float] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        lo = float(v.min()) if self.p_min is None else self.p_min
        hi = float(v.max()) if self.p_max is None else self.p_max
        object.__setattr__(self, "p_min", lo)
        object.__setattr__(self, "p_max", hi)
        # p = 1 is admitted for product exponents s with 1/s = 1/p + 1/q
        if not (1.0 <= lo <= hi < np.inf):
            raise ValueError(f"exponent bounds must satisfy 1 <= p- <= p+ < inf, got {lo}, {hi}")
        if v.min() < lo - 1e-12 or v.max() > hi + 1e-12:
            raise ValueError("exponent values outside declared bounds")

    @classmethod
    def constant(cls, q, n):
        return cls(np.full(n, float(q)))

    def dual(self) -> "ExponentField":
        return ExponentField(self.values / (self.values - 1.0))


def _check_grid(f: SpaceTimeSamples, p: ExponentField):
    if p.values.shape != (f.values.shape[0],):
        raise GridMismatch(
            f"exponent has {p.values.shape} samples, field has {f.values.shape[0]}")


def _modular_abs(w, a, p, lam=1.0):
    mask = a > 0
    if not np.any(mask):
        return 0.0
    return float(np.sum(w[mask] * (a[mask] / lam) ** p[mask]))


def modular(f: SpaceTimeSamples, p: ExponentField) -> float:
    """``sum_z w_z |f(z)|^p(z)``."""
    _check_grid(f, p)
    return _modular_abs(f.weights, f.magnitude(), p.values)


def luxembourg_norm(f: SpaceTimeSamples, p: ExponentField, tol: float = 1e-10) -> float:
    """``inf { lam > 0 : modular(f / lam) <= 1 }`` by bracketing and bisection."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_grid(f, p)
    a = f.magnitude()
    if not np.all(np.isfinite(a)):
        raise NoConvergence("non-finite field values")
    w, pv = f.weights, p.values
    rho = _modular_abs(w, a, pv)
    if rho == 0.0:
        return 0.0

    def excess(lam):
        return _modular_abs(w, a, pv, lam) - 1.0

    lam0 = max(rho ** (1.0 / p.p_min), rho ** (1.0 / p.p_max))
    lo = hi = lam0
    scale_limit = 2.0**64
    # rho(f/lam) decreases in lam: grow hi until below 1, shrink lo until above
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > lam0 * scale_limit:
            raise NoConvergence("upper bracket expansion exceeded 2^64")
    while excess(lo) < 0.0:
        lo *= 0.5
        if lo < lam0 / scale_limit:
            raise NoConvergence("lower bracket expansion exceeded 2^64")
    if lo == hi:
        if abs(excess(lo)) <= tol:
            return lo
        lo = 0.5 * hi
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        e = excess(mid)
        if abs(e) <= tol:
            return mid
        if e > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * hi:
            return 0.5 * (lo + hi)
    raise NoConvergence("bisection did not reach the modular tolerance")


def w_norm(u_l2: float, grad_u: SpaceTimeSamples, p: ExponentField, tol: float = 1e-10) -> float:
    """Norm of ``W_{p(.)}(Q_T)``: ``||u||_L2 + || |grad u| ||_{L^p(.)}``."""
    return float(u_l2) + luxembourg_norm(grad_u, p, tol)


def _conjugacy(p, q, s, atol=1e-12):
    lhs = 1.0 / s.values
    rhs = 1.0 / p.values + 1.0 / q.values
    if lhs.shape != rhs.shape or np.max(np.abs(lhs - rhs)) > atol:
        raise ExponentMismatch("exponents violate 1/s = 1/p + 1/q")


@dataclass(frozen=True)
class HolderReport:
    fg_norm: float
    f_norm: float
    g_norm: float

    @property
    def ratio(self) -> float:
        """``||fg||_s / (||f||_p ||g||_q)``; the inequality asks for <= 2."""
        denom = self.f_norm * self.g_norm
        if denom == 0.0:
            return 0.0 if self.fg_norm == 0.0 else np.inf
        return self.fg_norm / denom

    @property
    def holds(self) -> bool:
        return self.fg_norm <= 2.0 * self.f_norm * self.g_norm * (1.0 + 1e-12)


def holder_check(f, g, p, q, s, tol=1e-12) -> HolderReport:
    """Both sides of ``||fg||_s <= 2 ||f||_p ||g||_q``."""
    _conjugacy(p, q, s)
    fg = f.with_values(f.magnitude() * g.magnitude())
    return HolderReport(luxembourg_norm(fg, s, tol), luxembourg_norm(f, p, tol),
                        luxembourg_norm(g, q, tol))


@dataclass(frozen=True)
class YoungReport:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1.0 + 1e-12)


def young_check(f, g, p, q, s) -> YoungReport:
    """Both sides of ``int |fg|^s <= int |f|^p + int |g|^q``."""
    _conjugacy(p, q, s)
    fg = f.with_values(f.magnitude() * g.magnitude())
    return YoungReport(modular(fg, s), modular(f, p) + modular(g, q))


# -- parabolic metric and Holder-type moduli --------------------------------------------

def parabolic_distance(z1, z2):
    """``|x1 - x2| + |t1 - t2|^(1/2)`` for points ``(x..., t)``; broadcasts."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    # hypot keeps tiny separations from underflowing to zero
    dx = np.hypot.reduce(z1[..., :-1] - z2[..., :-1], axis=-1)
    out = dx + np.sqrt(np.abs(z1[..., -1] - z2[..., -1]))
    return float(out) if out.ndim == 0 else out


def _neighbour_pairs(shape):
    """Index pairs of grid neighbours along each tensor axis."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    firsts, seconds = [], []
    for ax in range(len(shape)):
        a = np.take(idx, np.arange(shape[ax] - 1), axis=ax).ravel()
        b = np.take(idx, np.arange(1, shape[ax]), axis=ax).ravel()
        firsts.append(a)
        seconds.append(b)
    return np.concatenate(firsts), np.concatenate(seconds)


def holder_quotients(f: SpaceTimeSamples, alpha: float, i, j):
    d = parabolic_distance(f.points[i], f.points[j])
    keep = d > 0
    num = np.abs(f.values[i] - f.values[j])
    q = np.zeros_like(d)
    q[keep] = num[keep] / d[keep] ** alpha
    return q


def _pairs(f, n_pairs, seed):
    n = f.values.shape[0]
    pairs_i, pairs_j = [], []
    if f.shape is not None:
        a, b = _neighbour_pairs(f.shape)
        pairs_i.append(a)
        pairs_j.append(b)
    rng = np.random.default_rng(seed)
    pairs_i.append(rng.integers(0, n, n_pairs))
    pairs_j.append(rng.integers(0, n, n_pairs))
    return np.concatenate(pairs_i), np.concatenate(pairs_j)


def parabolic_holder_seminorm(f: SpaceTimeSamples, alpha: float, n_pairs: int = 10_000,
                              seed: int = 0) -> float:
    """Sampled lower estimate of the parabolic C^{alpha, alpha/2} seminorm.

    Uses every grid-adjacent pair (when the tensor layout is known) plus
    ``n_pairs`` uniformly random pairs; deterministic for a given seed.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    i, j = _pairs(f, n_pairs, seed)
    q = holder_quotients(f, alpha, i, j)
    return float(q.max()) if q.size else 0.0


def running_holder_seminorm(f: SpaceTimeSamples, alpha: float, n_pairs: int = 10_000,
                            seed: int = 0):
    """Seminorm estimates restricted to ``t <= t_k`` for every time level ``t_k``.

    Needs the tensor layout; returns an array of length ``nt``.
    """
    if f.shape is None:
        raise GridMismatch("running estimate needs tensor-grid samples")
    i, j = _pairs(f, n_pairs, seed)
    q = holder_quotients(f, alpha, i, j)
    per_slice = f.shape[1] * f.shape[2]
    level = np.maximum(i // per_slice, j // per_slice)
    best = np.zeros(f.shape[0])
    np.maximum.at(best, level, q)
    return np.maximum.accumulate(best)


def log_holder_modulus(p: ExponentField, points, threshold: float = 0.5,
                       n_pairs: Optional[int] = None, seed: int = 0) -> float:
    """Sampled ``C_log(p) = sup |p(z1) - p(z2)| * (-log |z1 - z2|)``.

    Pairs with ``0 < |z1 - z2| <= threshold`` are used.  With ``n_pairs=None``
    every pair is visited (in blocks); otherwise a random subset is drawn.
    """
    if not 0.0 < threshold <= 0.5:
        raise ValueError("threshold must lie in (0, 1/2]")
    pts = np.asarray(points, dtype=float)
    vals = p.values
    n = vals.shape[0]
    if pts.shape[0] != n:
        raise GridMismatch("exponent values and points disagree")
    best = 0.0
    if n_pairs is None:
        block = max(1, 2_000_000 // max(n, 1))
        for start in range(0, n, block):
            sl = slice(start, min(n, start + block))
            d = np.linalg.norm(pts[sl, None, :] - pts[None, :, :], axis=-1)
            dp = np.abs(vals[sl, None] - vals[None, :])
            ok = (d > 0) & (d <= threshold)
            if np.any(ok):
                best = max(best, float(np.max(dp[ok] * -np.log(d[ok]))))
        return best
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, n_pairs)
    j = rng.integers(0, n, n_pairs)
    d = np.linalg.norm(pts[i] - pts[j], axis=-1)
    ok = (d > 0) & (d <= threshold)
    if not np.any(ok):
        return 0.0
    return float(np.max(np.abs(vals[i] - vals[j])[ok] * -np.log(d[ok])))


def log_inequality_constant(alpha: float) -> float:
    """``C = sup_{0<x<1/2} x^(alpha/2) (-log x) = 2 / (e alpha)``.

    This is the constant for the elementary bound applied with exponent
    ``alpha / 2`` when passing from the parabolic metric to the
    log-Holder modulus; the supremum sits at ``x = exp(-2/alpha) < 1/2``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return 2.0 / (np.e * alpha)


def parabolic_log_check(z1, z2, alpha: float):
    """Slack of ``d_p(z1,z2)^alpha * (-log|z1-z2|) <= C 2^alpha`` on pairs with |z1-z2| < 1/8.

    Returns ``(lhs, bound)`` arrays restricted to the admissible pairs.
    """
    z1 = np.atleast_2d(np.asarray(z1, float))
    z2 = np.atleast_2d(np.asarray(z2, float))
    e = np.linalg.norm(z1 - z2, axis=-1)
    ok = (e > 0) & (e < 0.125)
    lhs = parabolic_distance(z1[ok], z2[ok]) ** alpha * -np.log(e[ok])
    bound = log_inequality_constant(alpha) * 2.0**alpha
    return np.atleast_1d(lhs), bound
