"""Property sweeps over the constitutive models and the variable-exponent toolkit.

Every sweep is seeded and returns :class:`Check` records; nothing raises on
a failed property, so a suite run always reports every item.
"""

from __future__ import annotations

import numpy as np

from ..constitutive import FluxModel, StressModel, check_structure
from ..errors import StructureViolation
from ..varexp import (ExponentField, SpaceTimeSamples, holder_check, luxembourg_norm,
                      modular, parabolic_distance, parabolic_log_check, young_check)
from .io import Check


def random_samples(rng, n=200, width=1.0, components=None):
    """Random positive-weight samples on the unit space-time box."""
    pts = rng.uniform(0.0, 1.0, size=(n, 3))
    w = rng.uniform(0.5, 1.5, n) / n
    shape = (n,) if components is None else (n, components)
    vals = width * rng.standard_normal(shape) * np.exp(rng.uniform(-2.0, 2.0, n)).reshape(
        (n,) + (1,) * (len(shape) - 1))
    return SpaceTimeSamples(pts, w, vals)


def structure_checks(stress: StressModel, flux_model: FluxModel, n=10_000, seed=0):
    out = []
    for name, model in (("stress_structure", stress), ("flux_structure", flux_model)):
        try:
            report = check_structure(model, n, seed)
            out.append(Check(name, report.passed, float(n), float(n),
                             "; ".join(report.lines())))
        except StructureViolation as exc:
            out.append(Check(name, False, note=f"{exc} witness={exc.witness}"))
    return out


def luxembourg_oracle(n_fields=20, seed=0, exps=(1.5, 2.0, 3.0)):
    """Worst ``|norm - modular^(1/q)| / norm`` over constant exponents."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for q in exps:
        for _ in range(n_fields):
            f = random_samples(rng)
            p = ExponentField.constant(q, f.values.shape[0])
            nrm = luxembourg_norm(f, p)
            exact = modular(f, p) ** (1.0 / q)
            worst = max(worst, abs(nrm - exact) / nrm)
    return worst


def _variable_exponent(rng, n, lo=1.2, hi=4.0):
    return ExponentField(rng.uniform(lo, hi, n))


def norm_axioms(n_pairs=100, seed=0):
    """Worst relative defects of homogeneity and the triangle inequality."""
    rng = np.random.default_rng(seed)
    hom = tri = 0.0
    for _ in range(n_pairs):
        f = random_samples(rng)
        g = SpaceTimeSamples(f.points, f.weights, rng.standard_normal(f.values.shape[0]))
        p = _variable_exponent(rng, f.values.shape[0])
        alpha = rng.uniform(-5.0, 5.0)
        nf, ng = luxembourg_norm(f, p), luxembourg_norm(g, p)
        na = luxembourg_norm(f.with_values(alpha * f.values), p)
        hom = max(hom, abs(na - abs(alpha) * nf) / (abs(alpha) * nf))
        ns = luxembourg_norm(f.with_values(f.values + g.values), p)
        tri = max(tri, (ns - nf - ng) / (nf + ng))
    return hom, tri


def conjugate_triple(rng, n):
    a = rng.uniform(0.1, 0.7, n)
    b = rng.uniform(0.1, 0.9 - a)
    p, q = 1.0 / a, 1.0 / b
    s = 1.0 / (1.0 / p + 1.0 / q)
    return ExponentField(p), ExponentField(q), ExponentField(s)


def holder_young_sweep(n_triples=100, seed=0):
    """Count violations of ``|fg|_s <= 2 |f|_p |g|_q`` and the modular Young inequality."""
    rng = np.random.default_rng(seed)
    holder_bad = young_bad = 0
    worst_ratio = 0.0
    for _ in range(n_triples):
        f = random_samples(rng)
        g = f.with_values(rng.standard_normal(f.values.shape[0])
                          * np.exp(rng.uniform(-2.0, 2.0, f.values.shape[0])))
        p, q, s = conjugate_triple(rng, f.values.shape[0])
        h = holder_check(f, g, p, q, s)
        worst_ratio = max(worst_ratio, h.ratio)
        holder_bad += not h.holds
        young_bad += not young_check(f, g, p, q, s).holds
    return holder_bad, young_bad, worst_ratio


def metric_axioms(n_triples=10_000, seed=0):
    """Worst defects (identity, symmetry, triangle) of the parabolic distance."""
    rng = np.random.default_rng(seed)
    x, y, z = rng.uniform(0.0, 1.0, size=(3, n_triples, 3))
    ident = float(np.max(np.abs(parabolic_distance(x, x))))
    sym = float(np.max(np.abs(parabolic_distance(x, y) - parabolic_distance(y, x))))
    positive = bool(np.all(parabolic_distance(x, y)[np.any(x != y, axis=1)] > 0))
    tri = float(np.max(parabolic_distance(x, z) - parabolic_distance(x, y)
                       - parabolic_distance(y, z)))
    return ident, sym, positive, tri


def log_inequality_sweep(n_pairs=10_000, alphas=(0.1, 0.25, 0.5, 0.75, 0.9), seed=0):
    """Largest ``lhs / bound`` over close pairs and several Holder exponents."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for alpha in alphas:
        z1 = rng.uniform(0.0, 1.0, size=(n_pairs, 3))
        direction = rng.standard_normal((n_pairs, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = np.exp(rng.uniform(np.log(1e-8), np.log(0.125), n_pairs))
        z2 = z1 + radius[:, None] * direction
        lhs, bound = parabolic_log_check(z1, z2, alpha)
        count += lhs.size
        worst = max(worst, float(lhs.max() / bound))
    return worst, count


def property_suite(stress: StressModel, flux_model: FluxModel, seed=0):
    checks = structure_checks(stress, flux_model, seed=seed)
    lux = luxembourg_oracle(seed=seed)
    checks.append(Check("luxembourg_constant_exponent", lux < 1e-8, lux, 1e-8))
    hom, tri = norm_axioms(seed=seed)
    checks.append(Check("luxembourg_homogeneity", hom < 1e-8, hom, 1e-8))
    checks.append(Check("luxembourg_triangle", tri < 1e-8, tri, 1e-8))
    hb, yb, ratio = holder_young_sweep(seed=seed)
    checks.append(Check("holder_inequality", hb == 0, hb, 0, f"worst ratio {ratio:.4f} of 2"))
    checks.append(Check("young_inequality", yb == 0, yb, 0))
    ident, sym, positive, mtri = metric_axioms(seed=seed)
    checks.append(Check("metric_identity", ident == 0.0, ident, 0.0))
    checks.append(Check("metric_symmetry", sym <= 1e-15, sym, 1e-15))
    checks.append(Check("metric_positivity", positive, float(positive), 1.0))
    checks.append(Check("metric_triangle", mtri <= 1e-12, mtri, 1e-12))
    worst, count = log_inequality_sweep(seed=seed)
    checks.append(Check("log_holder_inequality", worst <= 1.0, worst, 1.0, f"{count} pairs"))
    return checks
