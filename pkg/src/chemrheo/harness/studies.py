"""Study drivers: run a configured study and write its artifacts."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..constitutive import IndexKind
from ..solver.diagnostics import (concentration_energy_report, energy_report, epsilon_study,
                                  galerkin_convergence_study, maxmin_report)
from ..solver.run import Trajectory, run
from ..solver.scenario import Scenario
from .config import Config, StudyKind, dump
from .io import Summary, write_csv, write_diagnostics_csv, write_snapshot
from .suite import property_suite

EXIT_PASS, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _strictly_decreasing(values):
    v = np.asarray(values, dtype=float)
    return bool(v.size < 2 or np.all(np.diff(v) < 0))


def _nonincreasing(values):
    v = np.asarray(values, dtype=float)
    return bool(v.size < 2 or np.all(np.diff(v) <= 0))


def taylor_green_rate(scenario: Scenario):
    """Decay rate of the Taylor-Green amplitude when the closed form applies, else None.

    For ``S = nu0 Du`` the momentum equation reduces to ``u_t = (nu0/2) Lap u``
    on solenoidal fields and the cell has ``Lap u = -2 k^2 u``.
    """
    ix = scenario.stress.index
    if (scenario.domain.is_square or scenario.velocity0 != "taylor_green"
            or ix.kind is IndexKind.PRESCRIBED_XT or not ix.is_constant or ix.p_min != 2.0
            or scenario.forcing_closed_form() is not None or scenario.epsilon != 0.0):
        return None
    k = 2.0 * np.pi / scenario.domain.extent
    return scenario.stress.nu0 * k * k


def taylor_green_error(traj: Trajectory) -> float:
    """Max over output times of the relative coefficient error against the closed form."""
    rate = taylor_green_rate(traj.scenario)
    exact = traj.A[0][None, :] * np.exp(-rate * traj.times)[:, None]
    err = np.linalg.norm(traj.A - exact, axis=1) / np.linalg.norm(exact, axis=1)
    return float(err.max())


def single_run_checks(traj: Trajectory, cfg: Config, summary: Summary):
    sc = traj.scenario
    tol = cfg["checks.energy_tol"]
    finite = all(r.is_finite() for r in traj.records)
    summary.add("finite_diagnostics", finite, float(finite), 1.0)
    e = float(energy_report(traj).max())
    summary.add("energy_identity", e < tol, e, tol)
    ce = float(concentration_energy_report(traj).max())
    summary.add("concentration_energy_identity", ce < tol, ce, tol)
    fd = float(traj.column("flux_dissipation").min())
    summary.add("flux_dissipation_sign", fd >= 0.0, fd, 0.0)
    if sc.concentration0 != "zero":
        mm = maxmin_report(traj, sc.c_tilde0)
        lim = cfg["checks.overshoot_tol"] * sc.c_tilde0
        summary.add("overshoot", mm.max_over < lim, mm.max_over, lim)
        summary.add("undershoot", mm.max_under < lim, mm.max_under, lim)
    if taylor_green_rate(sc) is not None:
        err = taylor_green_error(traj)
        summary.add("taylor_green_velocity_error", err < cfg["checks.oracle_tol"], err,
                    cfg["checks.oracle_tol"])
    summary.notes.append(f"steps={traj.stats.steps} rejected={traj.stats.rejected} "
                         f"wall={traj.stats.wall_time:.2f}s")


def _write_run(traj: Trajectory, out: Path):
    write_diagnostics_csv(out / "diagnostics.csv", traj)
    write_snapshot(out / "snapshot_initial.vtk", traj, 0)
    write_snapshot(out / "snapshot_final.vtk", traj, len(traj.times) - 1)


def run_single(cfg: Config, out: Path, summary: Summary):
    traj = run(cfg.scenario())
    _write_run(traj, out)
    single_run_checks(traj, cfg, summary)


def run_refinement(cfg: Config, out: Path, summary: Summary, parameter):
    sc = cfg.scenario()
    lists = {"N": cfg["study.N_list"], "M": cfg["study.M_list"]}
    table = galerkin_convergence_study(sc, lists["N"] if parameter == "N" else (),
                                       lists["M"] if parameter == "M" else ())
    write_csv(out / "cauchy.csv", ("parameter", "coarse", "fine", "difference"),
              ([r.parameter, r.coarse, r.fine, r.difference] for r in table.rows))
    write_csv(out / "levels.csv", ("N", "M", "lux_grad_u", "lux_stress"),
              ([lv.N, lv.M, lv.lux_grad_u, lv.lux_stress] for lv in table.levels))
    diffs = table.differences(parameter)
    summary.add(f"cauchy_{parameter}_strictly_decreasing", _strictly_decreasing(diffs),
                float(diffs[-1]) if diffs.size else 0.0, float(diffs[0]) if diffs.size else 0.0)
    norms = table.stress_norms()
    band = float(norms.max() / norms.min()) if norms.size and norms.min() > 0 else 1.0
    summary.add("stress_norm_band", band <= cfg["checks.stress_band"], band,
                cfg["checks.stress_band"])
    if parameter == "M" and sc.concentration0 != "zero":
        rows = []
        for m in lists["M"]:
            mm = maxmin_report(table.trajectories[(sc.N, m)], sc.c_tilde0)
            rows.append([m, mm.max_over, mm.max_under])
        write_csv(out / "overshoot.csv", ("M", "overshoot", "undershoot"), rows)
        over = [r[1] for r in rows]
        under = [r[2] for r in rows]
        lim = cfg["checks.overshoot_tol"] * sc.c_tilde0
        summary.add("overshoot_nonincreasing", _nonincreasing(over), over[-1], lim)
        summary.add("undershoot_nonincreasing", _nonincreasing(under), under[-1], lim)
        summary.add("overshoot_finest", over[-1] < lim, over[-1], lim)
        summary.add("undershoot_finest", under[-1] < lim, under[-1], lim)


def run_epsilon(cfg: Config, out: Path, summary: Summary):
    rows = epsilon_study(cfg.scenario(), cfg["study.eps_list"])
    write_csv(out / "epsilon.csv", ("epsilon", "mollify_difference", "velocity_difference"),
              ([r.epsilon, r.mollify_difference, r.velocity_difference] for r in rows))
    md = [r.mollify_difference for r in rows]
    vd = [r.velocity_difference for r in rows]
    summary.add("mollify_difference_decreasing", _strictly_decreasing(md), md[-1], md[0])
    summary.add("velocity_difference_decreasing", _strictly_decreasing(vd), vd[-1], vd[0])


def run_suite(cfg: Config, out: Path, summary: Summary):
    sc = cfg.scenario()
    summary.checks.extend(property_suite(sc.stress, sc.flux, seed=cfg.seed))


def run_study(cfg: Config, study: StudyKind | None = None) -> tuple[int, Summary]:
    """Execute the study and write artifacts; return ``(exit_status, summary)``.

    Numerical failures propagate to the caller, which maps them to exit 3.
    """
    study = study if study is not None else cfg.study
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(dump(cfg))
    summary = Summary(cfg.preset, study.value)
    if study is StudyKind.SINGLE_RUN:
        run_single(cfg, out, summary)
    elif study is StudyKind.N_REFINEMENT:
        run_refinement(cfg, out, summary, "N")
    elif study is StudyKind.M_REFINEMENT:
        run_refinement(cfg, out, summary, "M")
    elif study is StudyKind.EPSILON_STUDY:
        run_epsilon(cfg, out, summary)
    else:
        run_suite(cfg, out, summary)
    summary.write(out / "summary.txt")
    return (EXIT_PASS if summary.passed else EXIT_CHECK), summary
