"""Line-oriented ``key = value`` configuration.

Keys are dotted (``section.name``); ``#`` starts a comment.  Scenario keys
default to the values of the selected preset (``run.preset``), all other
keys to the table below.  A parsed :class:`Config` is fully resolved, so
``parse_text(dump(cfg)) == cfg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..constitutive import FluxModel, IndexKind, PowerIndexFamily, StressModel
from ..errors import ParseError, RangeError, UnknownKey
from ..fields import Domain, DomainMode
from ..solver.scenario import (CONCENTRATION_KINDS, FORCING_KINDS, VELOCITY_KINDS,
                               IntegratorSettings, Scenario, Scheme)
from .presets import PRESETS, preset


class StudyKind(str, Enum):
    SINGLE_RUN = "single_run"
    N_REFINEMENT = "n_refinement"
    M_REFINEMENT = "m_refinement"
    EPSILON_STUDY = "epsilon_study"
    PROPERTY_SUITE = "property_suite"


def _choice(options):
    options = tuple(options)

    def conv(text):
        if text not in options:
            raise RangeError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return conv


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ParseError(f"expected a comma-separated integer list, got {text!r}") from exc


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ParseError(f"expected a comma-separated number list, got {text!r}") from exc


def _gt(lo):
    return lambda v: v > lo, f"must be > {lo}"


def _ge(lo):
    return lambda v: v >= lo, f"must be >= {lo}"


def _between(lo, hi):
    return lambda v: lo <= v <= hi, f"must lie in [{lo}, {hi}]"


def _all_in(lo, hi):
    return lambda v: len(v) > 0 and all(lo <= x <= hi for x in v), f"entries must lie in [{lo}, {hi}]"


def _all_positive():
    return lambda v: len(v) > 0 and all(x > 0 for x in v), "entries must be positive"


_finite = (lambda v: math.isfinite(v), "must be finite")


@dataclass(frozen=True)
class Key:
    convert: object
    check: tuple = None  # (predicate, message)
    default: object = None  # None: taken from the preset


# canonical order of the dump
SCHEMA = {
    "run.preset": Key(_choice(PRESETS), default="taylor_green"),
    "run.study": Key(_choice(k.value for k in StudyKind), default=StudyKind.SINGLE_RUN.value),
    "run.out": Key(str, default="out"),
    "run.seed": Key(int, _ge(0), default=0),
    "run.n_outputs": Key(int, _between(1, 100_000)),
    "domain.mode": Key(_choice(m.value for m in DomainMode)),
    "domain.extent": Key(float, _gt(0.0)),
    "domain.t_final": Key(float, _gt(0.0)),
    "basis.N": Key(int, _between(1, 64)),
    "basis.M": Key(int, _between(1, 64)),
    "basis.resolution": Key(int, _between(4, 512)),
    "stress.nu0": Key(float, _gt(0.0)),
    "stress.nu1": Key(float, _gt(0.0)),
    "stress.nu2": Key(float, _gt(0.0)),
    "index.kind": Key(_choice(k.value for k in IndexKind)),
    "index.p_min": Key(float, _gt(1.0)),
    "index.p_max": Key(float, _gt(1.0)),
    "index.c_ref": Key(float, _gt(0.0)),
    "flux.k0": Key(float, _gt(0.0)),
    "flux.k1": Key(float, _ge(0.0)),
    "forcing.kind": Key(_choice(FORCING_KINDS)),
    "forcing.amplitude": Key(float, _finite),
    "initial.velocity": Key(_choice(VELOCITY_KINDS)),
    "initial.velocity_amplitude": Key(float, _finite),
    "initial.concentration": Key(_choice(CONCENTRATION_KINDS)),
    "initial.c_tilde0": Key(float, _gt(0.0)),
    "mollify.epsilon": Key(float, _between(0.0, 1.0)),
    "integrator.scheme": Key(_choice(s.value for s in Scheme)),
    "integrator.rtol": Key(float, _gt(0.0)),
    "integrator.atol": Key(float, _gt(0.0)),
    "integrator.dt_init": Key(float, _gt(0.0)),
    "integrator.dt_min": Key(float, _gt(0.0)),
    "integrator.dt_max": Key(float, _gt(0.0)),
    "study.N_list": Key(_int_list, _all_in(1, 64), default=(4, 8, 16)),
    "study.M_list": Key(_int_list, _all_in(1, 64), default=(8, 16, 32)),
    "study.eps_list": Key(_float_list, _all_positive(), default=(0.2, 0.1, 0.05)),
    "checks.energy_tol": Key(float, _gt(0.0), default=1e-5),
    "checks.overshoot_tol": Key(float, _gt(0.0), default=1e-2),
    "checks.oracle_tol": Key(float, _gt(0.0), default=1e-6),
    "checks.stress_band": Key(float, _ge(1.0), default=2.0),
}


def scenario_values(sc: Scenario) -> dict:
    """Flat key values describing a scenario."""
    ix = sc.stress.index
    it = sc.integrator
    return {
        "run.n_outputs": sc.n_outputs,
        "domain.mode": sc.domain.mode.value,
        "domain.extent": float(sc.domain.extent),
        "domain.t_final": float(sc.domain.t_final),
        "basis.N": sc.N,
        "basis.M": sc.M,
        "basis.resolution": sc.resolution,
        "stress.nu0": float(sc.stress.nu0),
        "stress.nu1": float(sc.stress.nu1),
        "stress.nu2": float(sc.stress.nu2),
        "index.kind": ix.kind.value,
        "index.p_min": float(ix.p_min),
        "index.p_max": float(ix.p_max),
        "index.c_ref": float(ix.c_ref),
        "flux.k0": float(sc.flux.k0),
        "flux.k1": float(sc.flux.k1),
        "forcing.kind": sc.forcing,
        "forcing.amplitude": float(sc.forcing_amplitude),
        "initial.velocity": sc.velocity0,
        "initial.velocity_amplitude": float(sc.velocity0_amplitude),
        "initial.concentration": sc.concentration0,
        "initial.c_tilde0": float(sc.c_tilde0),
        "mollify.epsilon": float(sc.epsilon),
        "integrator.scheme": it.scheme.value,
        "integrator.rtol": float(it.rtol),
        "integrator.atol": float(it.atol),
        "integrator.dt_init": float(it.dt_init),
        "integrator.dt_min": float(it.dt_min),
        "integrator.dt_max": float(it.dt_max),
    }


@dataclass(frozen=True)
class Config:
    values: dict = field(default_factory=dict)

    @classmethod
    def defaults(cls, preset_name="taylor_green") -> "Config":
        return parse_text(f"run.preset = {preset_name}\n")

    def __getitem__(self, key):
        return self.values[key]

    @property
    def preset(self) -> str:
        return self.values["run.preset"]

    @property
    def study(self) -> StudyKind:
        return StudyKind(self.values["run.study"])

    @property
    def out(self) -> str:
        return self.values["run.out"]

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    def with_values(self, **changes) -> "Config":
        """Copy with dotted keys given as ``section__name=value``."""
        vals = dict(self.values)
        for k, v in changes.items():
            key = k.replace("__", ".")
            if key not in SCHEMA:
                raise UnknownKey(f"unknown key {key!r}")
            vals[key] = v
        return Config(_validate(vals))

    def scenario(self) -> Scenario:
        v = self.values
        L = v["domain.extent"]
        T = v["domain.t_final"]
        index = PowerIndexFamily(v["index.kind"], v["index.p_min"], v["index.p_max"],
                                 v["index.c_ref"], extent=L, t_final=T)
        return Scenario(
            name=v["run.preset"],
            domain=Domain(v["domain.mode"], L, T),
            N=v["basis.N"], M=v["basis.M"], resolution=v["basis.resolution"],
            stress=StressModel(v["stress.nu0"], index, v["stress.nu1"], v["stress.nu2"]),
            flux=FluxModel(v["flux.k0"], v["flux.k1"]),
            forcing=v["forcing.kind"], forcing_amplitude=v["forcing.amplitude"],
            velocity0=v["initial.velocity"],
            velocity0_amplitude=v["initial.velocity_amplitude"],
            concentration0=v["initial.concentration"], c_tilde0=v["initial.c_tilde0"],
            epsilon=v["mollify.epsilon"], n_outputs=v["run.n_outputs"],
            integrator=IntegratorSettings(v["integrator.scheme"], v["integrator.rtol"],
                                          v["integrator.atol"], v["integrator.dt_init"],
                                          v["integrator.dt_min"], v["integrator.dt_max"]),
            seed=v["run.seed"],
        )


def _convert(key, text, line=None):
    entry = SCHEMA[key]
    try:
        value = entry.convert(text)
    except RangeError as exc:
        raise RangeError(_at(line, f"{key}: {exc}")) from None
    except ParseError as exc:
        raise ParseError(f"{key}: {exc}", line) from None
    except ValueError:
        raise ParseError(f"{key}: cannot read {text!r} as {entry.convert.__name__}", line) from None
    _check(key, value, line)
    return value


def _at(line, msg):
    return f"line {line}: {msg}" if line is not None else msg


def _check(key, value, line=None):
    entry = SCHEMA[key]
    if entry.check is not None:
        ok, message = entry.check
        if not ok(value):
            raise RangeError(_at(line, f"{key} = {format_value(value)} {message}"))


def _validate(vals, lines=None):
    lines = lines or {}
    for key, value in vals.items():
        _check(key, value, lines.get(key))
    if vals["index.p_max"] < vals["index.p_min"]:
        raise RangeError(_at(lines.get("index.p_max"), "index.p_max must be >= index.p_min"))
    if vals["integrator.dt_min"] > vals["integrator.dt_init"]:
        raise RangeError(_at(lines.get("integrator.dt_min"),
                             "integrator.dt_min must not exceed integrator.dt_init"))
    if vals["domain.mode"] == DomainMode.TORUS.value and vals["initial.concentration"] != "zero":
        raise RangeError(_at(lines.get("initial.concentration"),
                             "torus scenarios need initial.concentration = zero"))
    for key in ("study.N_list", "study.M_list", "study.eps_list"):
        seq = list(vals[key])
        want = sorted(seq, reverse=key == "study.eps_list")
        if seq != want:
            raise RangeError(_at(lines.get(key), f"{key} must be sorted"))
    return vals


def parse_text(text: str) -> Config:
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", lineno)
        key, _, val = body.partition("=")
        key, val = key.strip(), val.strip()
        if not key:
            raise ParseError("missing key", lineno)
        if key not in SCHEMA:
            raise UnknownKey(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not val:
            raise ParseError(f"missing value for {key!r}", lineno)
        raw[key] = _convert(key, val, lineno)
        lines[key] = lineno
    name = raw.get("run.preset", SCHEMA["run.preset"].default)
    vals = {}
    base = scenario_values(preset(name))
    for key, entry in SCHEMA.items():
        if key in raw:
            vals[key] = raw[key]
        elif entry.default is not None:
            vals[key] = entry.default
        else:
            vals[key] = base[key]
    return Config(_validate(vals, lines))


def parse_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_text(text)


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def dump(config: Config) -> str:
    """Canonical text: every key, schema order, one blank line between sections."""
    out = []
    section = None
    for key in SCHEMA:
        sec = key.split(".", 1)[0]
        if section is not None and sec != section:
            out.append("")
        section = sec
        out.append(f"{key} = {format_value(config.values[key])}")
    return "\n".join(out) + "\n"
