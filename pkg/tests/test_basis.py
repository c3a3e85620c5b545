import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemrheo.basis import (build_concentration_basis, build_velocity_basis,
                            fourier_wavevectors, load_basis_cache, project_H10, project_L2,
                            required_resolution, save_basis_cache, sine_pairs)
from chemrheo.errors import BasisTooLarge
from chemrheo.fields import Domain, Quadrature, ScalarField, VectorField, divergence, l2_inner

SQUARE, TORUS = Domain(), Domain("torus")


@pytest.fixture(scope="module")
def square_bases():
    q = Quadrature.for_domain(SQUARE, required_resolution(SQUARE, 32, 32))
    return build_velocity_basis(SQUARE, 32, q), build_concentration_basis(SQUARE, 32, q)


@pytest.fixture(scope="module")
def torus_bases():
    q = Quadrature.for_domain(TORUS, 32)
    return build_velocity_basis(TORUS, 16, q), build_concentration_basis(TORUS, 16, q)


def test_enumeration_order():
    assert sine_pairs(5) == [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)]
    ks = fourier_wavevectors(4)
    assert [k for k in ks[:2]] == [(1, 0), (0, 1)]


def test_single_generator_normalized():
    v = build_velocity_basis(SQUARE, 1, resolution=32)
    assert l2_inner(v.basis_field(0), v.basis_field(0)) == pytest.approx(1.0, abs=1e-10)


def test_torus_first_pair_orthogonal():
    v = build_velocity_basis(TORUS, 2, resolution=16)
    assert abs(v.gram()[0, 1]) < 1e-14
    assert v.rayleigh[0] == v.rayleigh[1] == pytest.approx(1.0)


@pytest.mark.parametrize("which", ["square", "torus"])
def test_gram_identity(which, square_bases, torus_bases):
    vb, cb = square_bases if which == "square" else torus_bases
    assert np.abs(vb.gram() - np.eye(vb.N)).max() < 1e-10
    assert np.abs(cb.gram() - np.eye(cb.M)).max() < 1e-10


@pytest.mark.parametrize("which", ["square", "torus"])
def test_divergence_free_and_ordered(which, square_bases, torus_bases):
    vb, _ = square_bases if which == "square" else torus_bases
    div = np.trace(vb.grads, axis1=-2, axis2=-1)
    assert np.abs(div).max() < 1e-12
    assert np.all(np.diff(vb.rayleigh) >= -1e-12 * vb.rayleigh[1:])
    for j in range(vb.N):
        assert np.abs(divergence(vb.basis_field(j)).values).max() < 1e-12


def test_square_boundary_vanishing(square_bases):
    vb, cb = square_bases
    t = np.linspace(0, 1, 41)
    edges = np.concatenate([np.column_stack([t, 0 * t]), np.column_stack([t, 1 + 0 * t]),
                            np.column_stack([0 * t, t]), np.column_stack([1 + 0 * t, t])])
    vv, _ = vb.evaluate(edges)
    cv, _ = cb.evaluate(edges)
    assert np.abs(vv).max() < 1e-10
    assert np.abs(cv).max() < 1e-10


def test_concentration_examples(square_bases):
    _, cb = square_bases
    assert cb.labels[0] == (1, 1)
    assert l2_inner(cb.basis_field(0), cb.basis_field(0)) == pytest.approx(1.0, abs=1e-12)
    G = cb.stiffness
    assert G[0, 0] == pytest.approx(2 * np.pi**2, rel=1e-12)
    assert np.abs(G - np.diag(np.diag(G))).max() < 1e-10
    assert np.all(np.linalg.eigvalsh(G) > 0)
    assert np.allclose(G, G.T)


def test_first_rayleigh_quotient_fd_oracle():
    vb = build_velocity_basis(SQUARE, 1, resolution=48)
    n = 801
    xs = np.linspace(0, 1, n)
    h = xs[1] - xs[0]
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    psi = np.sin(np.pi * X) ** 2 * np.sin(np.pi * Y) ** 2
    px, py = np.gradient(psi, h, h)
    u, v = py, -px
    ux, uy = np.gradient(u, h, h)
    vx, vy = np.gradient(v, h, h)
    num = np.trapezoid(np.trapezoid(ux**2 + uy**2 + vx**2 + vy**2, xs), xs)
    den = np.trapezoid(np.trapezoid(u**2 + v**2, xs), xs)
    assert vb.rayleigh[0] == pytest.approx(num / den, rel=1e-2)


def test_basis_too_large():
    with pytest.raises(BasisTooLarge):
        build_velocity_basis(SQUARE, 65, resolution=8)
    with pytest.raises(BasisTooLarge):
        build_concentration_basis(SQUARE, 65, resolution=8)


def test_project_L2_examples(square_bases):
    vb, cb = square_bases
    e = project_L2(vb.basis_field(2), vb)
    assert np.abs(e - np.eye(vb.N)[2]).max() < 1e-10
    q = vb.quad
    high = ScalarField(q, 2 * np.sin(20 * np.pi * q.x) * np.sin(21 * np.pi * q.y))
    assert np.abs(project_L2(high, cb)).max() < 1e-10


def test_project_L2_idempotent(square_bases):
    vb, cb = square_bases
    q = vb.quad
    f = VectorField(q, np.column_stack([np.sin(3 * q.x) * q.y**2, np.exp(q.x) * q.y]))
    a = project_L2(f, vb)
    assert np.abs(project_L2(vb.field(a), vb) - a).max() < 1e-10
    g = ScalarField(q, q.x * (1 - q.x) * np.cos(5 * q.y))
    b = project_L2(g, cb)
    assert np.abs(project_L2(cb.field(b), cb) - b).max() < 1e-10


def test_project_H10_examples(square_bases):
    _, cb = square_bases
    e = project_H10(cb.basis_field(1), cb)
    assert np.abs(e - np.eye(cb.M)[1]).max() < 1e-10
    zero = ScalarField(cb.quad, np.zeros(cb.quad.size), np.zeros((cb.quad.size, 2)))
    assert not project_H10(zero, cb).any()


def test_project_H10_least_squares_oracle(square_bases):
    _, cb = square_bases
    q = cb.quad
    x, y = q.x, q.y
    f = ScalarField(q, x * (1 - x) * y * (1 - y) * np.exp(x),
                    np.column_stack([(1 - x - x * x) * np.exp(x) * y * (1 - y),
                                     x * (1 - x) * np.exp(x) * (1 - 2 * y)]))
    c = project_H10(f, cb)
    sw = np.sqrt(np.repeat(q.weights, 2))
    A = cb.grads.reshape(cb.M, -1).T * sw[:, None]
    rhs = f.grad.ravel() * sw
    oracle, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    assert np.abs(c - oracle).max() < 1e-10


def test_projection_mismatch():
    from chemrheo.errors import QuadratureMismatch
    cb = build_concentration_basis(SQUARE, 4, resolution=16)
    other = Quadrature.for_domain(SQUARE, 20)
    with pytest.raises(QuadratureMismatch):
        project_L2(ScalarField(other, np.ones(other.size)), cb)


def test_cache_round_trip(tmp_path, torus_bases):
    vb, _ = torus_bases
    path = tmp_path / "basis.npz"
    save_basis_cache(path, vb)
    hit = load_basis_cache(path, "velocity", TORUS, vb.N, vb.quad)
    assert hit is not None and np.array_equal(hit.values, vb.values)
    assert load_basis_cache(path, "velocity", TORUS, vb.N + 1, vb.quad) is None
    path.write_bytes(b"garbage")
    assert load_basis_cache(path, "velocity", TORUS, vb.N, vb.quad) is None


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_projection_linear_on_span(seed):
    vb = build_velocity_basis(SQUARE, 6, resolution=24)
    rng = np.random.default_rng(seed)
    a1, a2 = rng.standard_normal((2, 6))
    s = rng.standard_normal()
    f = vb.field(a1 + s * a2)
    assert np.allclose(project_L2(f, vb), a1 + s * a2, atol=1e-10)
