"""Post-run reports: energy identities, max/min principle, convergence studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..constitutive import dual_exponent
from ..fields import sym_contract
from ..varexp import ExponentField, luxembourg_norm
from .mollify import mollify
from .run import Trajectory, run, trapezoid_weights
from .scenario import Scenario


def _cumtrapz(times, values):
    out = np.zeros_like(values, dtype=float)
    out[1:] = np.cumsum(0.5 * np.diff(times) * (values[1:] + values[:-1]))
    return out


def energy_report(traj: Trajectory):
    """Relative residual of ``|u|^2 + 2 int S:Du = |u0|^2 + 2 int f.u`` at output times."""
    t = traj.times
    u2 = 2.0 * traj.column("kinetic_energy")
    lhs = u2 + 2.0 * _cumtrapz(t, traj.column("dissipation"))
    rhs = u2[0] + 2.0 * _cumtrapz(t, traj.column("work"))
    return np.abs(lhs - rhs) / (1.0 + np.abs(rhs))


def concentration_energy_report(traj: Trajectory):
    """Relative residual of ``|c|^2 + 2 int q.grad c = |c0|^2`` at output times."""
    t = traj.times
    c2 = 2.0 * traj.column("conc_energy")
    lhs = c2 + 2.0 * _cumtrapz(t, traj.column("flux_dissipation"))
    rhs = np.full_like(lhs, c2[0])
    return np.abs(lhs - rhs) / (1.0 + np.abs(rhs))


@dataclass
class MaxMinReport:
    over: np.ndarray
    under: np.ndarray

    @property
    def max_over(self) -> float:
        return float(self.over.max(initial=0.0))

    @property
    def max_under(self) -> float:
        return float(self.under.max(initial=0.0))


def maxmin_report(traj: Trajectory, c_tilde0: float) -> MaxMinReport:
    """Truncation overshoot above ``c_tilde0`` and undershoot below zero at the nodes."""
    over = np.maximum(0.0, traj.column("c_max") - c_tilde0)
    under = np.maximum(0.0, -traj.column("c_min")) + 0.0  # no signed zeros
    return MaxMinReport(over, under)


# -- space-time norms -------------------------------------------------------------

def l2_space_time(samples) -> float:
    v = samples.values.reshape(samples.values.shape[0], -1)
    return float(np.sqrt(samples.weights @ np.sum(v * v, axis=1)))


def stress_samples(traj: Trajectory):
    """S at every output time and node, with the Frobenius weighting of the packed slot."""
    Du = traj.sym_grad_samples()
    S = traj.system.stress.evaluate(traj.exponent_samples(), Du.values.reshape(-1, 3))
    return Du.with_values(S * np.array([1.0, 1.0, np.sqrt(2.0)])), Du


def variable_norms(traj: Trajectory):
    """``(|grad u|_{L^p(c)(Q_T)}, |S|_{L^p'(c)(Q_T)})``."""
    p = traj.exponent_samples()
    grad = traj.grad_samples()
    S, _ = stress_samples(traj)
    return (luxembourg_norm(grad, ExponentField(p)),
            luxembourg_norm(S, ExponentField(dual_exponent(p))))


def _difference(t1: Trajectory, t2: Trajectory, kind):
    """L2(Q_T) norm of the difference of two runs on a common quadrature."""
    if not t1.quad.same_as(t2.quad) or len(t1.times) != len(t2.times):
        raise ValueError("runs must share quadrature and output times")
    if kind == "u":
        a, b = t1.velocity_samples(), t2.velocity_samples()
    else:
        a, b = t1.concentration_samples(), t2.concentration_samples()
    return l2_space_time(a.with_values(a.values - b.values))


@dataclass
class CauchyRow:
    parameter: str
    coarse: int
    fine: int
    difference: float


@dataclass
class LevelNorms:
    N: int
    M: int
    lux_grad_u: float
    lux_stress: float


@dataclass
class CauchyTable:
    rows: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict, repr=False)

    def differences(self, parameter):
        return np.array([r.difference for r in self.rows if r.parameter == parameter])

    def stress_norms(self):
        return np.array([lv.lux_stress for lv in self.levels])


def _common_scenarios(scenario: Scenario, pairs):
    from ..basis import required_resolution

    res = max([scenario.resolution]
              + [required_resolution(scenario.domain, n, m) for n, m in pairs])
    return [scenario.with_(N=n, M=m, resolution=res) for n, m in pairs]


def galerkin_convergence_study(scenario: Scenario, N_list=(), M_list=(), runner=run):
    """Cauchy differences over consecutive N (at the scenario's M) and M (at its N)."""
    for lst in (N_list, M_list):
        if list(lst) != sorted(lst):
            raise ValueError("refinement lists must be sorted ascending")
    pairs = [(n, scenario.M) for n in N_list] + [(scenario.N, m) for m in M_list]
    table = CauchyTable()
    if not pairs:
        return table
    scens = _common_scenarios(scenario, pairs)
    trajs = {}
    for (n, m), sc in zip(pairs, scens):
        if (n, m) not in trajs:
            trajs[(n, m)] = runner(sc)
            g, s = variable_norms(trajs[(n, m)])
            table.levels.append(LevelNorms(n, m, g, s))
    for lo, hi in zip(N_list[:-1], N_list[1:]):
        d = _difference(trajs[(lo, scenario.M)], trajs[(hi, scenario.M)], "u")
        table.rows.append(CauchyRow("N", lo, hi, d))
    for lo, hi in zip(M_list[:-1], M_list[1:]):
        d = _difference(trajs[(scenario.N, lo)], trajs[(scenario.N, hi)], "c")
        table.rows.append(CauchyRow("M", lo, hi, d))
    table.trajectories = trajs
    return table


def minty_gap(traj: Trajectory, probe) -> float:
    """``int_{Q_T} (S(c,Du) - S(c,Dphi)) : (Du - Dphi)`` for ``phi = sum probe_j w_j``.

    ``probe`` holds velocity coefficients, either one vector used at every
    output time or one row per output time.
    """
    probe = np.asarray(probe, dtype=float)
    nt = len(traj.times)
    if probe.ndim == 1:
        probe = np.broadcast_to(probe, (nt, probe.size))
    if probe.shape != traj.A.shape:
        raise ValueError("probe must match the velocity basis size")
    sysm = traj.system
    wt = trapezoid_weights(traj.times)
    w = traj.quad.weights
    total = 0.0
    for k in range(nt):
        _, Du = sysm.velocity(traj.A[k])
        _, Dp = sysm.velocity(probe[k])
        p = traj.exponents[k]
        dS = sysm.stress.evaluate(p, Du) - sysm.stress.evaluate(p, Dp)
        total += wt[k] * float(w @ sym_contract(dS, Du - Dp))
    return total


# -- regularization study ---------------------------------------------------------

@dataclass
class EpsilonRow:
    epsilon: float
    mollify_difference: float
    velocity_difference: float


def mollification_error(traj: Trajectory, epsilon: float, grid: int = 32) -> float:
    """``|eta_eps * c - c|_{L2(Q_T)}`` on a uniform grid of the stored concentration."""
    c = traj.concentration_on_uniform_grid(grid)
    sm = mollify(c, epsilon)
    return l2_space_time(c.with_values(sm.values - c.values))


def epsilon_study(scenario: Scenario, eps_list=(0.2, 0.1, 0.05), runner=run, reference=None):
    """Mollifier approximation error and mollified-vs-plain velocity difference per eps."""
    base = reference if reference is not None else runner(scenario.with_(epsilon=0.0))
    rows = []
    for eps in eps_list:
        traj = runner(scenario.with_(epsilon=float(eps)))
        rows.append(EpsilonRow(float(eps), mollification_error(base, eps),
                               _difference(traj, base, "u")))
    return rows
