"""Artifact writers: diagnostics CSV, legacy VTK snapshots, run summary."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..solver.run import COLUMNS, Trajectory

VTK_HEADER = "# vtk DataFile Version 3.0"


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def write_diagnostics_csv(path, traj: Trajectory):
    return write_csv(path, COLUMNS, (r.row() for r in traj.records))


def read_csv(path):
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def snapshot_grid(extent, n):
    """``(n+1)^2`` uniform points including both ends, x varying fastest."""
    xs = np.linspace(0.0, extent, n + 1)
    Y, X = np.meshgrid(xs, xs, indexing="ij")
    return xs, np.column_stack([X.ravel(), Y.ravel()])


def snapshot_fields(traj: Trajectory, k, n=32):
    L = traj.scenario.domain.extent
    _, pts = snapshot_grid(L, n)
    vb, cb = traj.bases.velocity, traj.bases.concentration
    vv, _ = vb.evaluate(pts)
    u = np.tensordot(traj.A[k], vv, 1)
    cv, _ = cb.evaluate(pts)
    c = traj.B[k] @ cv
    index = traj.system.index
    if index.depends_on_c:
        p = np.asarray(index(c), dtype=float)
    else:
        p = index(x=pts[:, 0], y=pts[:, 1], t=traj.times[k])
    p = np.broadcast_to(p, c.shape)
    return pts, u, c, p


def write_vtk(path, title, extent, n, point_data):
    """Legacy ASCII structured points; ``point_data`` maps name -> (P,) or (P, 2)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    h = extent / n
    npts = (n + 1) ** 2
    lines = [VTK_HEADER, title.replace("\n", " ")[:255], "ASCII",
             "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {n + 1} {n + 1} 1",
             "ORIGIN 0 0 0",
             f"SPACING {h!r} {h!r} 1",
             f"POINT_DATA {npts}"]
    for name, arr in point_data.items():
        arr = np.asarray(arr, dtype=float)
        if arr.ndim == 1:
            lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            lines += [repr(float(v)) for v in arr]
        else:
            lines.append(f"VECTORS {name} double")
            lines += [f"{float(a)!r} {float(b)!r} 0" for a, b in arr]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_snapshot(path, traj: Trajectory, k, n=32):
    _, u, c, p = snapshot_fields(traj, k, n)
    title = f"chemrheo {traj.scenario.name} t={float(traj.times[k])!r}"
    return write_vtk(path, title, traj.scenario.domain.extent, n,
                     {"concentration": c, "exponent": p, "velocity": u})


@dataclass
class Check:
    name: str
    passed: bool
    value: float = float("nan")
    limit: float = float("nan")
    note: str = ""

    def line(self):
        status = "pass" if self.passed else "FAIL"
        text = f"check {self.name} = {status} value={self.value:.6g} limit={self.limit:.6g}"
        return text + (f" ({self.note})" if self.note else "")


@dataclass
class Summary:
    scenario: str
    study: str
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kwargs):
        self.checks.append(Check(*args, **kwargs))

    def text(self):
        out = [f"scenario = {self.scenario}", f"study = {self.study}",
               f"status = {'pass' if self.passed else 'fail'}"]
        out += [c.line() for c in self.checks]
        out += [f"note {n}" for n in self.notes]
        return "\n".join(out) + "\n"

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.text())
        return path
