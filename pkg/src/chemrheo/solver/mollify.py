"""Space-time mollification of concentration data.

The kernel is the standard bump ``eta(z) = C exp(1 / (|z|^2 - 1))`` on the
unit ball of R^3 (two space dimensions plus time), scaled as
``eta_eps(z) = eps^-3 eta(z / eps)``.  Discrete convolutions sample it on a
lattice and divide by the lattice mass, so constants are reproduced exactly
away from the boundary of the data.

Two entry points:

``mollify``
    post-hoc convolution of a sampled trajectory, data extended by zero.
``LaggedMollifier``
    causal variant used inside the time integrator: the kernel is centred
    at ``t - eps`` so only the stored window ``[t - 2 eps, t]`` is needed;
    history before ``t = 0`` is zero.
"""

from __future__ import annotations

import bisect
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.signal

from ..errors import GridMismatch
from ..varexp import SpaceTimeSamples


def _bump_profile(r2):
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 / (r2[inside] - 1.0))
    return out


@lru_cache(maxsize=None)
def bump_mass() -> float:
    """Integral of the unnormalized profile over the unit ball of R^3."""
    val, _ = scipy.integrate.quad(lambda r: 4.0 * np.pi * r * r * np.exp(1.0 / (r * r - 1.0)),
                                  0.0, 1.0)
    return val


def standard_mollifier(z, epsilon=1.0):
    """Unit-mass bump ``eta_eps`` evaluated at points ``z`` of shape (..., 3)."""
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1) / epsilon**2
    return _bump_profile(r2) / (bump_mass() * epsilon**3)


def lattice_kernel(epsilon, spacing):
    """Bump sampled at lattice offsets ``j * spacing``, normalized to unit sum.

    ``spacing`` gives one step per axis; the result has odd length along
    every axis and is centred.
    """
    axes = []
    for h in spacing:
        r = int(np.floor(epsilon / h - 1e-12)) if h < epsilon else 0
        axes.append(np.arange(-r, r + 1) * h)
    grids = np.meshgrid(*axes, indexing="ij")
    r2 = sum(g * g for g in grids) / epsilon**2
    k = _bump_profile(r2)
    return k / k.sum(), axes


def _uniform_axis(coords, name):
    if coords.size == 1:
        return 1.0
    d = np.diff(coords)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        raise GridMismatch(f"mollify needs a uniformly spaced {name} axis")
    return float(d[0])


def grid_axes(samples: SpaceTimeSamples):
    """Recover ``(ts, xs, ys)`` of a tensor-grid sample set."""
    if samples.shape is None:
        raise GridMismatch("mollify needs tensor-grid samples")
    nt, nx, ny = samples.shape
    pts = samples.points
    ts = pts[:: nx * ny, 2]
    xs = pts[: nx * ny : ny, 0]
    ys = pts[:ny, 1]
    return ts, xs, ys


def mollify(c_traj: SpaceTimeSamples, epsilon: float) -> SpaceTimeSamples:
    """Discrete ``eta_eps * c`` on the sample grid, ``c`` extended by zero outside it."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    ts, xs, ys = grid_axes(c_traj)
    spacing = (_uniform_axis(ts, "t"), _uniform_axis(xs, "x"), _uniform_axis(ys, "y"))
    kernel, _ = lattice_kernel(epsilon, spacing)
    values = c_traj.values
    trailing = values.shape[1:]
    cube = values.reshape(c_traj.shape + trailing)
    if trailing:
        flat = cube.reshape(c_traj.shape + (-1,))
        out = np.stack([scipy.signal.fftconvolve(flat[..., i], kernel, mode="same")
                        for i in range(flat.shape[-1])], axis=-1)
    else:
        out = scipy.signal.fftconvolve(cube, kernel, mode="same")
    # transform round-off would otherwise leave ~1e-17 noise on zero data
    out[np.abs(out) < 1e-15 * max(1.0, float(np.abs(values).max(initial=0.0)))] = 0.0
    return c_traj.with_values(out.reshape(values.shape))


# -- causal variant used by the solver ---------------------------------------------

def _mode_factors(cbasis):
    """Each concentration mode as a sum of products ``fx(x) * fy(y)``."""
    L = cbasis.domain.extent
    out = []
    if cbasis.domain.is_square:
        s = np.sqrt(2.0 / L)

        def sine(k):
            a = k * np.pi / L
            # zero extension outside [0, L]
            return lambda t: np.where((t >= 0) & (t <= L), s * np.sin(a * t), 0.0)

        for k, l in cbasis.labels:
            out.append([(1.0, sine(k), sine(l))])
        return out
    c = np.sqrt(2.0) / L
    for (k1, k2), phase in cbasis.labels:
        a, b = 2 * np.pi * k1 / L, 2 * np.pi * k2 / L
        cx, sx = (lambda t, a=a: np.cos(a * t)), (lambda t, a=a: np.sin(a * t))
        cy, sy = (lambda t, b=b: np.cos(b * t)), (lambda t, b=b: np.sin(b * t))
        if phase == "cos":
            out.append([(c, cx, cy), (-c, sx, sy)])
        else:
            out.append([(c, sx, cy), (c, cx, sy)])
    return out


class LaggedMollifier:
    """Causal surrogate of ``eta_eps * c`` at the quadrature nodes.

    ``c_eps(t, x) = sum_{s, y} K(y, s) c(x - y, t - eps - s)`` over the
    lattice kernel; ``c`` is the Galerkin reconstruction, zero outside the
    domain (square) or periodic (torus), and zero for negative times.
    Spatial sums are precomputed per time lag as (nq, M) matrices.
    """

    def __init__(self, cbasis, epsilon, lattice_steps=8):
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)
        h = self.epsilon / lattice_steps
        kernel, (t_off, x_off, y_off) = lattice_kernel(self.epsilon, (h, h, h))
        keep = kernel.reshape(kernel.shape[0], -1).sum(axis=1) > 0
        kernel, t_off = kernel[keep], t_off[keep]
        self.lags = self.epsilon + t_off  # time offsets into the past, in (0, 2 eps)
        quad = cbasis.quad
        xs = quad.x1d
        nq1 = xs.size
        self.matrices = np.zeros((self.lags.size, quad.size, cbasis.M))
        for k, terms in enumerate(_mode_factors(cbasis)):
            for coef, fx, fy in terms:
                # Px[i, a] = fx(x_i - x_off[a]), Py[j, b] = fy(y_j - y_off[b])
                Px = fx(xs[:, None] - x_off[None, :])
                Py = fy(xs[:, None] - y_off[None, :])
                for s in range(self.lags.size):
                    block = Px @ kernel[s] @ Py.T  # (nq1, nq1), x index slowest
                    self.matrices[s, :, k] += coef * block.reshape(nq1 * nq1)
        self._times = []
        self._coeffs = []

    @property
    def window(self) -> float:
        return 2.0 * self.epsilon

    def reset(self):
        self._times.clear()
        self._coeffs.clear()

    def record(self, t, b):
        """Store an accepted state; times must be nondecreasing."""
        if self._times and t < self._times[-1]:
            raise ValueError("history times must be nondecreasing")
        if self._times and t == self._times[-1]:
            self._coeffs[-1] = np.array(b, dtype=float)
            return
        self._times.append(float(t))
        self._coeffs.append(np.array(b, dtype=float))
        # drop states older than the window (keep one before it for interpolation)
        cutoff = t - self.window
        drop = bisect.bisect_left(self._times, cutoff) - 1
        if drop > 0:
            del self._times[:drop]
            del self._coeffs[:drop]

    def history(self, s):
        """Coefficients at past time ``s`` by linear interpolation; zero for ``s < 0``."""
        if s < 0 or not self._times:
            return np.zeros_like(self._coeffs[0]) if self._coeffs else None
        times = self._times
        i = bisect.bisect_right(times, s)
        if i == 0:
            return self._coeffs[0].copy()
        if i == len(times):
            return self._coeffs[-1].copy()
        t0, t1 = times[i - 1], times[i]
        w = (s - t0) / (t1 - t0)
        return (1.0 - w) * self._coeffs[i - 1] + w * self._coeffs[i]

    def evaluate(self, t):
        """Mollified concentration at the quadrature nodes at time ``t``."""
        M = self.matrices.shape[2]
        out = np.zeros(self.matrices.shape[1])
        for s, lag in enumerate(self.lags):
            b = self.history(t - lag)
            if b is None:
                b = np.zeros(M)
            out += self.matrices[s] @ b
        return out
