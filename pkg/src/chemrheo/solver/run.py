"""Time integration driver: trajectory storage and per-output diagnostics."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..constitutive import IndexKind
from ..errors import FixedPointDivergence
from ..varexp import SpaceTimeSamples, running_holder_seminorm
from .galerkin import Bases, GalerkinState, GalerkinSystem, build_bases
from .integrators import step_vector
from .mollify import LaggedMollifier
from .scenario import Scenario, Scheme

COLUMNS = ("t", "kinetic_energy", "dissipation", "work", "conc_energy", "flux_dissipation",
           "c_min", "c_max", "clamp_count", "lux_grad_u", "lux_stress", "holder_c")

HOLDER_ALPHA = 0.5
HOLDER_GRID = 16
HOLDER_PAIRS = 10_000


@dataclass
class DiagnosticsRecord:
    t: float
    kinetic_energy: float
    dissipation: float
    work: float
    conc_energy: float
    flux_dissipation: float
    c_min: float
    c_max: float
    clamp_count: int
    lux_grad_u: float
    lux_stress: float
    holder_c: float = 0.0

    def row(self):
        return [getattr(self, name) for name in COLUMNS]

    def is_finite(self) -> bool:
        return all(np.isfinite(v) for v in self.row())


@dataclass
class RunStats:
    steps: int = 0
    rejected: int = 0
    wall_time: float = 0.0


def trapezoid_weights(times):
    times = np.asarray(times, dtype=float)
    w = np.zeros_like(times)
    if times.size > 1:
        d = np.diff(times)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
    return w


@dataclass(eq=False)
class Trajectory:
    scenario: Scenario
    system: GalerkinSystem
    times: np.ndarray
    A: np.ndarray  # (nt, N)
    B: np.ndarray  # (nt, M)
    records: list = field(default_factory=list)
    stats: RunStats = field(default_factory=RunStats)
    exponents: np.ndarray = None  # (nt, nq) exponent used at each output time

    @property
    def bases(self) -> Bases:
        return self.system.bases

    @property
    def quad(self):
        return self.system.quad

    def state(self, k) -> GalerkinState:
        return GalerkinState(self.times[k], self.A[k], self.B[k])

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def table(self):
        return {name: self.column(name) for name in COLUMNS}

    def _on_nodes(self, values):
        q = self.quad
        n = q.resolution
        v = np.asarray(values)
        return SpaceTimeSamples.on_grid(q.x1d, q.w1d, q.x1d, q.w1d, self.times,
                                        trapezoid_weights(self.times),
                                        v.reshape((len(self.times), n, n) + v.shape[2:]))

    def velocity_samples(self) -> SpaceTimeSamples:
        """u at (output times x quadrature nodes), trapezoid-in-time weights."""
        vals = np.stack([self.system.velocity(a)[0] for a in self.A])
        return self._on_nodes(vals)

    def sym_grad_samples(self) -> SpaceTimeSamples:
        vals = np.stack([self.system.velocity(a)[1] for a in self.A])
        return self._on_nodes(vals)

    def grad_samples(self) -> SpaceTimeSamples:
        G = self.bases.velocity.grads.reshape(self.system.N, -1)
        vals = np.stack([(a @ G).reshape(-1, 4) for a in self.A])
        return self._on_nodes(vals)

    def concentration_samples(self) -> SpaceTimeSamples:
        vals = np.stack([self.system.concentration(b)[0] for b in self.B])
        return self._on_nodes(vals)

    def exponent_samples(self):
        return self.exponents.reshape(-1)

    def concentration_on_uniform_grid(self, n=HOLDER_GRID):
        """c on ``n x n`` cell centres at the output times (uniform tensor grid)."""
        L = self.scenario.domain.extent
        xs = (np.arange(n) + 0.5) * L / n
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        vals, _ = self.bases.concentration.evaluate(np.column_stack([X.ravel(), Y.ravel()]))
        c = (self.B @ vals).reshape(len(self.times), n, n)
        w = np.full(n, L / n)
        wt = trapezoid_weights(self.times)
        wt = np.where(wt > 0, wt, 1.0)
        return SpaceTimeSamples.on_grid(xs, w, xs, w, self.times, wt, c)


def holder_column(traj: Trajectory, alpha=HOLDER_ALPHA, grid=HOLDER_GRID,
                  n_pairs=HOLDER_PAIRS):
    """Running sampled C^{alpha, alpha/2} seminorm of c up to each output time."""
    samples = traj.concentration_on_uniform_grid(grid)
    return running_holder_seminorm(samples, alpha, n_pairs=n_pairs, seed=traj.scenario.seed)


def _mollified_exponent(system, mollifier, t):
    return system.index(mollifier.evaluate(t))


def run(scenario: Scenario, bases: Bases | None = None, holder=True) -> Trajectory:
    """Integrate from t = 0 to ``t_final`` and record diagnostics at every output time."""
    wall = time.perf_counter()
    system = GalerkinSystem(scenario, bases if bases is not None else build_bases(scenario))
    settings = scenario.integrator
    state = system.initial_state()
    y = state.vector
    N = system.N
    times = scenario.output_times
    T = times[-1]

    mollifier = None
    if scenario.epsilon > 0 and system.index.kind is not IndexKind.PRESCRIBED_XT:
        mollifier = LaggedMollifier(system.bases.concentration, scenario.epsilon)
        mollifier.record(0.0, y[N:])

    def exponent_now(t, yv):
        if mollifier is not None:
            return _mollified_exponent(system, mollifier, t)
        return system.exponent(t, system.concentration(yv[N:])[0])

    stats = RunStats()
    A = [y[:N].copy()]
    B = [y[N:].copy()]
    p0 = exponent_now(0.0, y)
    exps = [np.broadcast_to(p0, (system.quad.size,)).copy()]
    system.frozen_p = p0 if mollifier is not None else None
    records = [DiagnosticsRecord(**system.diagnostics(0.0, y))]

    t = 0.0
    dt = min(settings.dt_init, settings.dt_max)
    for target in times[1:]:
        while target - t > 1e-12 * T:
            h = min(dt, target - t)
            clipped = h < dt
            if mollifier is not None:
                system.frozen_p = _mollified_exponent(system, mollifier, t)
            try:
                y_new, used, dt_next, rejected, _ = step_vector(system.rhs, t, y, h, settings)
            except FixedPointDivergence:
                if settings.scheme is not Scheme.IMPLICIT_EULER:
                    raise
                dt = 0.5 * h
                stats.rejected += 1
                if dt < settings.dt_min:
                    raise
                continue
            t = target if target - (t + used) <= 1e-12 * T else t + used
            y = y_new
            stats.steps += 1
            stats.rejected += rejected
            if mollifier is not None:
                mollifier.record(t, y[N:])
            if not (clipped and rejected == 0):
                dt = min(dt_next, settings.dt_max)
        A.append(y[:N].copy())
        B.append(y[N:].copy())
        p = exponent_now(t, y)
        exps.append(np.broadcast_to(p, (system.quad.size,)).copy())
        system.frozen_p = p if mollifier is not None else None
        records.append(DiagnosticsRecord(**system.diagnostics(t, y)))
    system.frozen_p = None

    traj = Trajectory(scenario, system, np.array(times), np.array(A), np.array(B), records,
                      stats, np.array(exps))
    if holder:
        for rec, h in zip(records, holder_column(traj)):
            rec.holder_c = float(h)
    stats.wall_time = time.perf_counter() - wall
    return traj


def record_dicts(traj: Trajectory):
    return [asdict(r) for r in traj.records]
