import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemrheo.errors import ExponentMismatch, GridMismatch
from chemrheo.harness.suite import conjugate_triple, random_samples
from chemrheo.varexp import (ExponentField, SpaceTimeSamples, holder_check, log_holder_modulus,
                             log_inequality_constant, luxembourg_norm, modular,
                             parabolic_distance, parabolic_holder_seminorm, parabolic_log_check,
                             running_holder_seminorm, young_check)


def box(value, n=6):
    return SpaceTimeSamples.uniform_box(np.full((n, n, n), float(value)))


def const(q, f):
    return ExponentField.constant(q, f.values.shape[0])


def test_box_measure_is_one():
    assert box(1.0).measure == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("value, q, expected", [(0.0, 2.0, 0.0), (1.0, 1.7, 1.0), (2.0, 2.0, 4.0)])
def test_modular_examples(value, q, expected):
    f = box(value)
    assert modular(f, const(q, f)) == pytest.approx(expected, abs=1e-13)


def test_modular_variable_exponent_of_one():
    f = box(1.0)
    p = ExponentField(np.random.default_rng(0).uniform(1.2, 3.0, f.values.shape[0]))
    assert modular(f, p) == pytest.approx(1.0, abs=1e-13)


def test_luxembourg_examples():
    f = box(0.0)
    assert luxembourg_norm(f, const(2.0, f)) == 0.0
    f = box(2.0)
    assert luxembourg_norm(f, const(2.0, f)) == pytest.approx(2.0, rel=1e-10)


def test_grid_mismatch():
    f = box(1.0)
    with pytest.raises(GridMismatch):
        modular(f, ExponentField.constant(2.0, 3))


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_luxembourg_constant_exponent_oracle(q):
    rng = np.random.default_rng(int(q * 10))
    for _ in range(20):
        f = random_samples(rng)
        p = const(q, f)
        exact = modular(f, p) ** (1.0 / q)
        assert abs(luxembourg_norm(f, p) - exact) / exact < 1e-8


def test_luxembourg_unit_modular_at_norm():
    rng = np.random.default_rng(5)
    f = random_samples(rng)
    p = ExponentField(rng.uniform(1.2, 4.0, f.values.shape[0]))
    lam = luxembourg_norm(f, p)
    assert modular(f.with_values(f.values / lam), p) == pytest.approx(1.0, abs=1e-9)


def test_luxembourg_vector_values_use_magnitude():
    rng = np.random.default_rng(8)
    f = random_samples(rng, components=2)
    p = ExponentField(rng.uniform(1.2, 4.0, f.values.shape[0]))
    g = f.with_values(np.linalg.norm(f.values, axis=1))
    assert luxembourg_norm(f, p) == pytest.approx(luxembourg_norm(g, p), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-10, 10))
def test_luxembourg_norm_axioms(seed, alpha):
    rng = np.random.default_rng(seed)
    f = random_samples(rng, n=60)
    g = f.with_values(rng.standard_normal(60))
    p = ExponentField(rng.uniform(1.1, 5.0, 60))
    nf, ng = luxembourg_norm(f, p), luxembourg_norm(g, p)
    nsum = luxembourg_norm(f.with_values(f.values + g.values), p)
    assert nsum <= (nf + ng) * (1 + 1e-8)
    if abs(alpha) > 1e-3:
        na = luxembourg_norm(f.with_values(alpha * f.values), p)
        assert na == pytest.approx(abs(alpha) * nf, rel=1e-8)


def test_holder_examples():
    f = box(1.0)
    n = f.values.shape[0]
    p, q = ExponentField.constant(3.0, n), ExponentField.constant(3.0, n)
    s = ExponentField.constant(1.5, n)
    rep = holder_check(f, f, p, q, s)
    assert rep.ratio == pytest.approx(1.0, rel=1e-9) and rep.holds
    zero = box(0.0)
    assert holder_check(zero, f, p, q, s).ratio == 0.0
    assert young_check(f, f, p, q, s).lhs == pytest.approx(1.0)
    y = young_check(zero, f, p, q, s)
    assert y.lhs == 0.0 and y.holds


def test_holder_rejects_nonconjugate():
    f = box(1.0)
    n = f.values.shape[0]
    p = ExponentField.constant(2.0, n)
    with pytest.raises(ExponentMismatch):
        holder_check(f, f, p, p, ExponentField.constant(1.5, n))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_holder_and_young_random(seed):
    rng = np.random.default_rng(seed)
    f = random_samples(rng, n=80)
    g = f.with_values(rng.standard_normal(80))
    p, q, s = conjugate_triple(rng, 80)
    assert holder_check(f, g, p, q, s).holds
    assert young_check(f, g, p, q, s).holds


def test_parabolic_distance_examples():
    z = np.array([0.3, 0.2, 0.5])
    assert parabolic_distance(z, z) == 0.0
    assert parabolic_distance([0.0, 0.0, 0.0], [0.0, 0.0, 4.0]) == 2.0
    assert parabolic_distance([0.0, 0.0, 0.0], [1.0, 0.0, 1.0]) == 2.0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=9, max_size=9))
def test_parabolic_metric_axioms(v):
    x, y, z = np.array(v).reshape(3, 3)
    assert parabolic_distance(x, y) == parabolic_distance(y, x)
    assert parabolic_distance(x, z) <= parabolic_distance(x, y) + parabolic_distance(y, z) + 1e-12
    if np.any(x != y):
        assert parabolic_distance(x, y) > 0


def _grid_samples(func, n=6):
    xs = (np.arange(n) + 0.5) / n
    T, X, Y = np.meshgrid(xs, xs, xs, indexing="ij")
    return SpaceTimeSamples.uniform_box(func(X, Y, T))


def test_holder_seminorm_constant_is_zero():
    assert parabolic_holder_seminorm(box(3.0), 0.5) == 0.0


def test_holder_seminorm_anchored_distance():
    z0 = np.array([0.25, 0.75, 0.5])

    def f(X, Y, T):
        pts = np.stack([X, Y, T], -1)
        return parabolic_distance(pts, z0) ** 0.5

    n = 4
    xs = (np.arange(n) + 0.5) / n
    samples = _grid_samples(f, n)
    # make sure the anchor is a grid point
    assert np.any(np.all(np.isclose(samples.points, [xs[1], xs[3], xs[2]]), axis=1))
    z0[:] = [xs[1], xs[3], xs[2]]
    samples = _grid_samples(f, n)
    est = parabolic_holder_seminorm(samples, 0.5, n_pairs=20_000, seed=1)
    assert est >= 1 - 1e-6


def test_holder_seminorm_below_dense_oracle():
    samples = _grid_samples(lambda X, Y, T: X, n=5)
    est = parabolic_holder_seminorm(samples, 0.5, n_pairs=5000, seed=2)
    pts, v = samples.points, samples.values
    best = 0.0
    for i, j in itertools.combinations(range(len(v)), 2):
        d = parabolic_distance(pts[i], pts[j])
        best = max(best, abs(v[i] - v[j]) / d**0.5)
    assert est <= best + 1e-15


def test_holder_seminorm_deterministic_and_alpha_range():
    s = _grid_samples(lambda X, Y, T: np.sin(3 * X) * T)
    assert parabolic_holder_seminorm(s, 0.5, seed=4) == parabolic_holder_seminorm(s, 0.5, seed=4)
    with pytest.raises(ValueError):
        parabolic_holder_seminorm(s, 1.0)


def test_running_holder_seminorm_monotone():
    s = _grid_samples(lambda X, Y, T: np.sin(3 * X) * T**2)
    run = running_holder_seminorm(s, 0.5, seed=0)
    assert run.shape == (6,)
    assert np.all(np.diff(run) >= 0)
    assert run[-1] == pytest.approx(parabolic_holder_seminorm(s, 0.5, seed=0))


def test_log_holder_modulus():
    pts = np.random.default_rng(0).uniform(0, 1, (200, 3))
    assert log_holder_modulus(ExponentField.constant(2.0, 200), pts) == 0.0
    # a Lipschitz exponent has a finite modulus bounded by L sup r(-log r)
    p = ExponentField(1.5 + 0.5 * pts[:, 0])
    mod = log_holder_modulus(p, pts)
    assert 0.0 < mod <= 0.5 * np.exp(-1.0) + 1e-12


def test_log_inequality_constant_is_supremum():
    for alpha in (0.1, 0.5, 0.9):
        x = np.exp(np.linspace(np.log(1e-300), np.log(0.5), 200_001))
        sup = np.max(x ** (alpha / 2) * -np.log(x))
        assert sup <= log_inequality_constant(alpha)
        assert sup == pytest.approx(log_inequality_constant(alpha), rel=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.95))
def test_parabolic_log_inequality(seed, alpha):
    rng = np.random.default_rng(seed)
    z1 = rng.uniform(0, 1, (500, 3))
    z2 = z1 + rng.uniform(-0.07, 0.07, (500, 3))
    lhs, bound = parabolic_log_check(z1, z2, alpha)
    assert np.all(lhs <= bound)
