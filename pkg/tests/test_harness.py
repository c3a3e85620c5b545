import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemrheo.errors import ParseError, RangeError, UnknownKey
from chemrheo.harness import PRESETS, Config, StudyKind, dump, parse_config, parse_text, preset
from chemrheo.harness.cli import main
from chemrheo.harness.config import SCHEMA, scenario_values
from chemrheo.harness.io import (VTK_HEADER, Summary, read_csv, write_diagnostics_csv,
                                 write_snapshot)
from chemrheo.harness.suite import property_suite
from chemrheo.solver import COLUMNS, run

GOLDEN_CSV_HEADER = ("t,kinetic_energy,dissipation,work,conc_energy,flux_dissipation,"
                     "c_min,c_max,clamp_count,lux_grad_u,lux_stress,holder_c")
GOLDEN_VTK_PREAMBLE = [
    "# vtk DataFile Version 3.0",
    None,  # title line
    "ASCII",
    "DATASET STRUCTURED_POINTS",
    "DIMENSIONS 5 5 1",
    "ORIGIN 0 0 0",
    "SPACING 0.25 0.25 1",
    "POINT_DATA 25",
    "SCALARS concentration double 1",
    "LOOKUP_TABLE default",
]


def test_empty_file_gives_defaults():
    cfg = parse_text("")
    assert cfg.preset == "taylor_green"
    assert cfg.study is StudyKind.SINGLE_RUN
    assert scenario_values(cfg.scenario()) == scenario_values(preset("taylor_green"))


def test_comments_and_overrides():
    cfg = parse_text("# header\nrun.preset = synovial   # trailing\nstress.nu0 = 0.5\n")
    assert cfg["stress.nu0"] == 0.5
    assert cfg.scenario().stress.nu0 == 0.5
    assert cfg.scenario().N == preset("synovial").N


def test_p_min_below_one_rejected():
    with pytest.raises(RangeError):
        parse_text("index.p_min = 0.9\n")


@pytest.mark.parametrize("text, exc", [
    ("nope.key = 1\n", UnknownKey),
    ("stress.nu0\n", ParseError),
    ("stress.nu0 = \n", ParseError),
    ("stress.nu0 = abc\n", ParseError),
    ("stress.nu0 = 1\nstress.nu0 = 2\n", ParseError),
    ("stress.nu0 = -1\n", RangeError),
    ("index.p_min = 2.5\nindex.p_max = 2.0\n", RangeError),
    ("study.N_list = 8, 4\n", RangeError),
    ("initial.concentration = bump\n", RangeError),
])
def test_config_errors(text, exc):
    with pytest.raises(exc):
        parse_text(text)


def test_error_reports_line_number():
    with pytest.raises(UnknownKey, match="line 3"):
        parse_text("# a\n\nbogus = 1\n")


@pytest.mark.parametrize("name", PRESETS)
def test_dump_round_trip(name):
    cfg = Config.defaults(name)
    text = dump(cfg)
    again = parse_text(text)
    assert again.values == cfg.values
    assert dump(again) == text
    keys = [line.split(" = ")[0] for line in text.splitlines() if line]
    assert keys == list(SCHEMA)


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parent.parent / "configs"
    files = sorted(root.glob("*.cfg"))
    assert files
    for f in files:
        parse_config(f)


@settings(max_examples=60, deadline=None)
@given(nu0=st.floats(1e-3, 10.0), p_lo=st.floats(1.05, 3.0), span=st.floats(0.0, 2.0),
       k1=st.floats(0.0, 5.0), n=st.integers(1, 64))
def test_round_trip_random_values(nu0, p_lo, span, k1, n):
    cfg = Config.defaults("synovial").with_values(
        stress__nu0=nu0, index__p_min=p_lo, index__p_max=p_lo + span, flux__k1=k1, basis__N=n)
    assert parse_text(dump(cfg)).values == cfg.values


def test_with_values_rejects_unknown():
    with pytest.raises(UnknownKey):
        Config.defaults().with_values(stress__nope=1.0)


def test_property_suite_passes():
    sc = preset("synovial")
    checks = property_suite(sc.stress, sc.flux, seed=0)
    assert checks and all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_golden_csv_header(tmp_path):
    assert ",".join(COLUMNS) == GOLDEN_CSV_HEADER
    traj = run(preset("heat_only").with_(M=2, resolution=16, n_outputs=4))
    path = write_diagnostics_csv(tmp_path / "d.csv", traj)
    assert path.read_text().splitlines()[0] == GOLDEN_CSV_HEADER
    header, rows = read_csv(path)
    assert len(rows) == 5
    assert rows[0][COLUMNS.index("clamp_count")].isdigit()
    assert float(rows[-1][0]) == 1.0


def test_golden_vtk_header(tmp_path):
    traj = run(preset("heat_only").with_(M=2, resolution=16, n_outputs=2))
    path = write_snapshot(tmp_path / "s.vtk", traj, 0, n=4)
    lines = path.read_text().splitlines()
    assert VTK_HEADER == GOLDEN_VTK_PREAMBLE[0]
    for got, want in zip(lines, GOLDEN_VTK_PREAMBLE):
        if want is not None:
            assert got == want
    assert lines[1].startswith("chemrheo heat_only t=0.0")
    assert "SCALARS exponent double 1" in lines
    assert "VECTORS velocity double" in lines
    vec = lines[lines.index("VECTORS velocity double") + 1:]
    assert len(vec) == 25 and all(v.endswith(" 0") for v in vec)


def test_summary_text():
    s = Summary("x", "single_run")
    s.add("a", True, 1.0, 2.0)
    assert "status = pass" in s.text()
    s.add("b", False, 3.0, 2.0)
    assert "status = fail" in s.text() and "check b = FAIL" in s.text()


def _write(tmp_path, text):
    p = tmp_path / "c.cfg"
    p.write_text(text)
    return str(p)


def test_cli_run_passes(tmp_path, capsys):
    cfg = _write(tmp_path, "run.preset = taylor_green\nrun.n_outputs = 20\n")
    out = tmp_path / "o"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert "check taylor_green_velocity_error = pass" in capsys.readouterr().out
    for name in ("diagnostics.csv", "snapshot_initial.vtk", "snapshot_final.vtk",
                 "summary.txt", "config.cfg"):
        assert (out / name).exists()
    assert parse_config(out / "config.cfg")["run.n_outputs"] == 20


def test_cli_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, "index.p_min = 0.9\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "error kind=RangeError" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert main(["bogus"]) == 2


def test_cli_check_failure(tmp_path, capsys):
    cfg = _write(tmp_path, "run.n_outputs = 5\nchecks.energy_tol = 1e-30\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 1
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "energy_identity" in captured.err


def test_cli_numeric_failure(tmp_path, capsys):
    cfg = _write(tmp_path, "run.n_outputs = 5\nintegrator.rtol = 1e-300\n"
                           "integrator.atol = 1e-300\nintegrator.dt_min = 1e-3\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "error kind=StepSizeUnderflow" in capsys.readouterr().err


def test_cli_dump_defaults(capsys):
    assert main(["dump-defaults", "--preset", "synovial"]) == 0
    text = capsys.readouterr().out
    assert parse_text(text).values == Config.defaults("synovial").values


def test_cli_suite(tmp_path, capsys):
    assert main(["suite", "--out", str(tmp_path / "s"), "--seed", "3"]) == 0
    assert "status = pass" in (tmp_path / "s" / "summary.txt").read_text()


def test_seed_override_changes_config(tmp_path):
    cfg = Config.defaults().with_values(run__seed=7)
    assert cfg.seed == 7 and cfg.scenario().seed == 7
    assert np.isclose(cfg.scenario().domain.extent, 2 * np.pi)
