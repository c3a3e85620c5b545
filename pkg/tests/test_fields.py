import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemrheo.errors import NonDifferentiableField, QuadratureMismatch
from chemrheo.fields import (Domain, DomainMode, Quadrature, ScalarField, SymTensorField,
                             VectorField, divergence, l2_inner, sym_gradient)


@pytest.fixture(scope="module")
def square():
    return Quadrature.for_domain(Domain(), 16)


@pytest.fixture(scope="module")
def torus():
    return Quadrature.for_domain(Domain("torus"), 16)


def test_domain_defaults_and_aliases():
    assert Domain().extent == 1.0
    assert Domain("torus").extent == pytest.approx(2 * np.pi)
    assert DomainMode.parse("UnitSquareDirichlet") is DomainMode.SQUARE
    assert DomainMode.parse("PeriodicTorus") is DomainMode.TORUS
    with pytest.raises(ValueError):
        Domain(extent=0.0)
    with pytest.raises(ValueError):
        Domain(t_final=-1.0)


@pytest.mark.parametrize("mode", ["square", "torus"])
def test_weights_sum_to_area(mode):
    q = Quadrature.for_domain(Domain(mode), 24)
    assert abs(q.weights.sum() - q.domain.area) <= 1e-12 * q.domain.area


def test_gauss_legendre_exact_degree(square):
    n = square.resolution
    deg = square.exact_degree
    assert deg == 2 * n - 1
    for a, b in [(deg, 0), (0, deg), (7, 9)]:
        val = square.integrate(square.x**a * square.y**b)
        assert val == pytest.approx(1.0 / ((a + 1) * (b + 1)), rel=1e-12)


def test_uniform_rule_exact_below_nyquist(torus):
    for k in range(1, 8):
        assert abs(torus.integrate(np.cos(k * torus.x) * np.cos(k * torus.y))) < 1e-12
        val = torus.integrate(np.cos(k * torus.x) ** 2)
        assert val == pytest.approx(2 * np.pi**2, rel=1e-12)


def test_sym_gradient_linear_shear(square):
    v = VectorField.from_function(square, lambda x, y: (y, 0 * x),
                                  lambda x, y: ((0 * x, 1 + 0 * x), (0 * x, 0 * x)))
    D = sym_gradient(v).values
    assert np.allclose(D, [0.0, 0.0, 0.5], atol=0)


def test_sym_gradient_zero_and_constant(square):
    z = VectorField(square, np.zeros((square.size, 2)), np.zeros((square.size, 2, 2)))
    assert not sym_gradient(z).values.any()
    const = VectorField.from_function(square, lambda x, y: (1 + 0 * x, 2 + 0 * y),
                                      lambda x, y: ((0 * x, 0 * x), (0 * x, 0 * x)))
    assert not sym_gradient(const).values.any()


def test_sym_gradient_taylor_green(torus):
    v = VectorField.from_function(
        torus,
        lambda x, y: (np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)),
        lambda x, y: ((np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y)),
                      (np.sin(x) * np.sin(y), -np.cos(x) * np.cos(y))))
    D = sym_gradient(v).values
    cc = np.cos(torus.x) * np.cos(torus.y)
    assert np.allclose(D[:, 0], cc, atol=1e-15)
    assert np.allclose(D[:, 1], -cc, atol=1e-15)
    assert np.allclose(D[:, 2], 0.0, atol=1e-15)


def test_node_only_field_rejected(square):
    v = VectorField(square, np.zeros((square.size, 2)))
    with pytest.raises(NonDifferentiableField):
        sym_gradient(v)
    with pytest.raises(NonDifferentiableField):
        divergence(v)


def test_divergence_examples(square):
    zero = lambda x, y: 0 * x  # noqa: E731
    one = lambda x, y: 1 + 0 * x  # noqa: E731
    v = VectorField.from_function(square, lambda x, y: (x, -y),
                                  lambda x, y: ((one(x, y), zero(x, y)), (zero(x, y), -one(x, y))))
    assert np.all(divergence(v).values == 0.0)
    v = VectorField.from_function(square, lambda x, y: (x, y),
                                  lambda x, y: ((one(x, y), zero(x, y)), (zero(x, y), one(x, y))))
    assert np.all(divergence(v).values == 2.0)


def test_l2_inner_examples(square):
    one = ScalarField.from_function(square, lambda x, y: 1 + 0 * x)
    assert l2_inner(one, one) == pytest.approx(1.0, abs=1e-14)
    f = ScalarField.from_function(square, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    assert l2_inner(f, f) == pytest.approx(0.25, abs=1e-14)
    g = ScalarField.from_function(square, lambda x, y: np.sin(2 * np.pi * x) * np.sin(np.pi * y))
    assert abs(l2_inner(f, g)) < 1e-12


def test_l2_inner_mismatch(square, torus):
    a = ScalarField(square, np.ones(square.size))
    b = ScalarField(torus, np.ones(torus.size))
    with pytest.raises(QuadratureMismatch):
        l2_inner(a, b)
    v = VectorField(square, np.ones((square.size, 2)))
    with pytest.raises(QuadratureMismatch):
        l2_inner(a, v)


def test_sym_tensor_storage_is_symmetric(square):
    rng = np.random.default_rng(1)
    B = SymTensorField(square, rng.standard_normal((square.size, 3)))
    m = B.as_matrices()
    assert np.array_equal(m[:, 0, 1], m[:, 1, 0])


def test_fields_are_read_only(square):
    f = ScalarField(square, np.ones(square.size))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_sym_gradient_matches_finite_differences():
    # random combination of smooth fields with analytic Jacobians
    q = Quadrature.for_domain(Domain(), 12)
    rng = np.random.default_rng(7)
    c = rng.standard_normal(4)

    def vel(x, y):
        return (c[0] * np.sin(x) * y + c[1] * np.cos(2 * y), c[2] * x * x + c[3] * np.sin(x * y))

    def jac(x, y):
        return ((c[0] * np.cos(x) * y, c[0] * np.sin(x) - 2 * c[1] * np.sin(2 * y)),
                (2 * c[2] * x + c[3] * y * np.cos(x * y), c[3] * x * np.cos(x * y)))

    D = sym_gradient(VectorField.from_function(q, vel, jac)).values
    errs = []
    for h in (1e-2, 5e-3):
        x, y = q.x, q.y
        dux = (vel(x + h, y)[0] - vel(x - h, y)[0]) / (2 * h)
        duy = (vel(x, y + h)[0] - vel(x, y - h)[0]) / (2 * h)
        dvx = (vel(x + h, y)[1] - vel(x - h, y)[1]) / (2 * h)
        dvy = (vel(x, y + h)[1] - vel(x, y - h)[1]) / (2 * h)
        fd = np.column_stack([dux, dvy, 0.5 * (duy + dvx)])
        errs.append(np.abs(fd - D).max())
    assert errs[0] < 1e-3
    assert errs[1] < errs[0] / 3.0  # second order


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_l2_inner_symmetric_and_positive(coef):
    q = Quadrature.for_domain(Domain(), 8)
    f = ScalarField(q, coef[0] + coef[1] * q.x + coef[2] * q.y**2)
    g = ScalarField(q, np.sin(q.x) + q.y)
    assert l2_inner(f, g) == pytest.approx(l2_inner(g, f), rel=1e-14, abs=1e-14)
    if any(abs(c) > 1e-3 for c in coef):
        assert l2_inner(f, f) > 0
