import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kpoisson import lorentz
from kpoisson.lorentz import Component, QuadraticSpace

DIMS = [4, 5, 6]


def vec(dim):
    return arrays(np.float64, dim, elements=st.floats(-2, 2, allow_nan=False))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- spaces -----------------------------------------------------------------

@pytest.mark.parametrize("dim,sig", [(4, (1, -1, -1, -1)), (6, (1, -1, -1, -1, -1, -1))])
def test_make_minkowski_signature(dim, sig):
    sp = lorentz.make_minkowski(dim)
    assert sp.signature == sig
    np.testing.assert_array_equal(sp.metric, np.diag(sig))


@pytest.mark.parametrize("bad", [3, 2, 1, 4.5])
def test_make_minkowski_rejects_small(bad):
    with pytest.raises(ValueError):
        lorentz.make_minkowski(bad)


def test_quadratic_space_validation():
    with pytest.raises(ValueError, match="symmetric"):
        QuadraticSpace(np.array([[1.0, 1.0], [0.0, -1.0]]))
    with pytest.raises(ValueError, match="degenerate"):
        QuadraticSpace(np.diag([1.0, 0.0, -1.0]))
    with pytest.raises(ValueError):
        QuadraticSpace.from_signature([1, 2])


def test_signature_of_nondiagonal_metric():
    # eigenvalues 3 and -1
    sp = QuadraticSpace(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert sp.signature == (1, -1)


# -- Lambda_xy --------------------------------------------------------------

def test_lambda_ts_action():
    sp = lorentz.make_minkowski(4)
    t, s = sp.basis_vector(0), sp.basis_vector(3)
    L = lorentz.lambda_op(sp, t, s)
    np.testing.assert_allclose(L @ t, -s)
    np.testing.assert_allclose(L @ s, -t)


@pytest.mark.parametrize("dim", DIMS)
@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_lambda_antisymmetric_and_skew(dim, data):
    sp = lorentz.make_minkowski(dim)
    x, y = data.draw(vec(dim)), data.draw(vec(dim))
    L = lorentz.lambda_op(sp, x, y)
    np.testing.assert_allclose(L, -lorentz.lambda_op(sp, y, x))
    np.testing.assert_allclose(lorentz.lambda_op(sp, x, x), 0.0)
    assert lorentz.is_skew(sp, L)


@pytest.mark.parametrize("dim", DIMS)
def test_lambda_equivariance(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(20):
        g = lorentz.random_so0(sp, rng)
        x, y = rng.uniform(-1, 1, (2, dim))
        np.testing.assert_allclose(lorentz.lambda_op(sp, g @ x, g @ y),
                                   g @ lorentz.lambda_op(sp, x, y) @ np.linalg.inv(g),
                                   atol=1e-10)


def test_lambda_rejects_wrong_length():
    sp = lorentz.make_minkowski(4)
    with pytest.raises(ValueError):
        lorentz.lambda_op(sp, np.ones(3), np.ones(4))


@pytest.mark.parametrize("dim", DIMS)
def test_commutator_identity(dim, rng):
    sp = lorentz.make_minkowski(dim)
    L = lambda a, b: lorentz.lambda_op(sp, a, b)
    e = sp.eta
    for _ in range(20):
        x, y, z, t = rng.uniform(-1, 1, (4, dim))
        rhs = e(x, t) * L(y, z) + e(y, z) * L(x, t) - e(x, z) * L(y, t) - e(y, t) * L(x, z)
        np.testing.assert_allclose(lorentz.commutator(L(x, y), L(z, t)), rhs, atol=1e-12)


@pytest.mark.parametrize("dim", DIMS)
def test_completeness_relation(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(10):
        basis = lorentz.random_orthonormal_basis(sp, rng)
        x = rng.uniform(-1, 1, dim)
        recon = sum(np.sign(sp.eta(v, v)) * sp.eta(x, v) * v for v in basis)
        np.testing.assert_allclose(recon, x, atol=1e-10)


# -- the form k -------------------------------------------------------------

def test_k_of_lambda_ts():
    sp = lorentz.make_minkowski(4)
    L = lorentz.lambda_op(sp, sp.basis_vector(0), sp.basis_vector(3))
    assert lorentz.form_k(sp, L, L) == pytest.approx(1.0)


@pytest.mark.parametrize("dim", DIMS)
def test_k_matches_trace_oracle(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(20):
        X, Y = (sp.so_matrix(c) for c in rng.uniform(-1, 1, (2, sp.so_dim)))
        assert lorentz.form_k(sp, X, Y) == pytest.approx(0.5 * np.trace(X @ Y), abs=1e-12)


@pytest.mark.parametrize("dim", DIMS)
def test_k_on_s_perp_is_eta(dim, rng):
    sp = lorentz.make_minkowski(dim)
    s = sp.basis_vector(dim - 1)
    for _ in range(10):
        x, y = rng.uniform(-1, 1, (2, dim))
        x[-1] = y[-1] = 0.0
        k = lorentz.form_k(sp, lorentz.lambda_op(sp, x, s), lorentz.lambda_op(sp, y, s))
        assert k == pytest.approx(sp.eta(x, y), abs=1e-12)


@pytest.mark.parametrize("dim", DIMS)
def test_k_and_ktilde_invariance(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(20):
        g = lorentz.random_orthogonal(sp, rng)
        X, Y = (sp.so_matrix(c) for c in rng.uniform(-1, 1, (2, sp.so_dim)))
        k0 = lorentz.form_k(sp, X, Y)
        assert lorentz.form_k(sp, lorentz.ad(sp, g, X), lorentz.ad(sp, g, Y)) == pytest.approx(k0, abs=1e-9)
        phi, psi = lorentz.k_flat(sp, X), lorentz.k_flat(sp, Y)
        assert lorentz.form_k_tilde(sp, phi, psi) == pytest.approx(k0, abs=1e-12)
        moved = lorentz.form_k_tilde(sp, lorentz.ad_sharp(sp, g, phi), lorentz.ad_sharp(sp, g, psi))
        assert moved == pytest.approx(k0, abs=1e-9)


@pytest.mark.parametrize("dim", DIMS)
def test_k_flat_sharp_roundtrip(dim, rng):
    sp = lorentz.make_minkowski(dim)
    X = sp.so_matrix(rng.uniform(-1, 1, sp.so_dim))
    np.testing.assert_allclose(lorentz.k_sharp(sp, lorentz.k_flat(sp, X)), X, atol=1e-12)


def test_form_k_rejects_non_skew():
    sp = lorentz.make_minkowski(4)
    with pytest.raises(ValueError):
        lorentz.form_k(sp, np.eye(4), np.eye(4))


# -- ad and ad# -------------------------------------------------------------

@pytest.mark.parametrize("dim", DIMS)
def test_ad_identity_and_homomorphism(dim, rng):
    sp = lorentz.make_minkowski(dim)
    X = sp.so_matrix(rng.uniform(-1, 1, sp.so_dim))
    np.testing.assert_allclose(lorentz.ad(sp, np.eye(dim), X), X)
    g1, g2 = lorentz.random_so0(sp, rng), lorentz.random_so0(sp, rng)
    np.testing.assert_allclose(lorentz.ad(sp, g1 @ g2, X),
                               lorentz.ad(sp, g1, lorentz.ad(sp, g2, X)), atol=1e-10)
    phi = rng.uniform(-1, 1, sp.so_dim)
    np.testing.assert_allclose(lorentz.ad_sharp(sp, g1 @ g2, phi),
                               lorentz.ad_sharp(sp, g1, lorentz.ad_sharp(sp, g2, phi)), atol=1e-9)


@pytest.mark.parametrize("dim", DIMS)
def test_ad_sharp_is_coadjoint(dim, rng):
    # <ad#(g) phi, ad(g) X> = <phi, X>
    sp = lorentz.make_minkowski(dim)
    g = lorentz.random_so0(sp, rng)
    phi = rng.uniform(-1, 1, sp.so_dim)
    X = sp.so_matrix(rng.uniform(-1, 1, sp.so_dim))
    assert lorentz.pairing(sp, lorentz.ad_sharp(sp, g, phi), lorentz.ad(sp, g, X)) == \
        pytest.approx(lorentz.pairing(sp, phi, X), abs=1e-10)


@pytest.mark.parametrize("dim", DIMS)
def test_flip_conjugation(dim, rng):
    sp = lorentz.make_minkowski(dim)
    s, u = sp.basis_vector(dim - 1), sp.basis_vector(1)
    flip = lorentz.exp_rotation(sp, u, s, math.pi)
    for _ in range(5):
        x = rng.uniform(-1, 1, dim)
        x[-1] = 0.0
        Lxs = lorentz.lambda_op(sp, x, s)
        expected = -Lxs - 2 * sp.eta(x, u) * lorentz.lambda_op(sp, u, s)
        np.testing.assert_allclose(lorentz.ad(sp, flip, Lxs), expected, atol=1e-12)
        np.testing.assert_allclose(lorentz.ad_sharp(sp, flip, lorentz.k_flat(sp, Lxs)),
                                   lorentz.k_flat(sp, expected), atol=1e-12)


# -- exponentials -----------------------------------------------------------

def _null_data(sp, rng):
    t, s = sp.basis_vector(0), sp.basis_vector(sp.dim - 1)
    u = rng.uniform(-1, 1, sp.dim)
    u[0] = u[-1] = 0.0
    return u, t - s


def test_exp_null_zero_is_identity():
    sp = lorentz.make_minkowski(4)
    f = sp.basis_vector(0) - sp.basis_vector(3)
    np.testing.assert_array_equal(lorentz.exp_closed(sp, "null", np.zeros(4), f), np.eye(4))


@pytest.mark.parametrize("nu", [-1.3, 0.0, 0.4, 2.0])
def test_exp_boost_formula(nu):
    sp = lorentz.make_minkowski(5)
    s, t = sp.basis_vector(4), sp.basis_vector(0)
    P = lorentz.projection_p(sp, s, t)
    expected = np.eye(5) - P + math.cosh(nu) * P + math.sinh(nu) * lorentz.lambda_op(sp, s, t)
    np.testing.assert_allclose(lorentz.exp_closed(sp, "boost", s, t, nu=nu), expected)
    np.testing.assert_allclose(lorentz.exp_series(nu * lorentz.lambda_op(sp, t, s)),
                               lorentz.exp_boost(sp, s, t, -nu), atol=1e-12)


@pytest.mark.parametrize("dim", DIMS)
def test_closed_forms_match_series(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(20):
        u, f = _null_data(sp, rng)
        np.testing.assert_allclose(lorentz.exp_closed(sp, "null", u, f),
                                   lorentz.exp_series(lorentz.lambda_op(sp, u, f)), atol=1e-9)
        g = lorentz.random_so0(sp, rng)
        t, s = g[:, 0], g[:, -1]
        nu = rng.uniform(-1.5, 1.5)
        np.testing.assert_allclose(lorentz.exp_closed(sp, "boost", s, t, nu=nu),
                                   lorentz.exp_series(nu * lorentz.lambda_op(sp, s, t)), atol=1e-9)
        x, y = g[:, 1], g[:, 2]
        np.testing.assert_allclose(lorentz.exp_closed(sp, "rotation", x, y, nu=nu),
                                   lorentz.exp_series(nu * lorentz.lambda_op(sp, x, y)), atol=1e-9)


def test_null_generator_is_nilpotent():
    sp = lorentz.make_minkowski(5)
    u, f = _null_data(sp, np.random.default_rng(0))
    L = lorentz.lambda_op(sp, u, f)
    np.testing.assert_allclose(L @ L @ L, 0.0, atol=1e-14)


def test_exp_series_zero_and_tolerance():
    np.testing.assert_array_equal(lorentz.exp_series(np.zeros((4, 4))), np.eye(4))
    with pytest.raises(RuntimeError):
        lorentz.exp_series(np.full((3, 3), 50.0), max_terms=5)


def test_exp_closed_rejects_bad_data():
    sp = lorentz.make_minkowski(4)
    e = sp.basis_vector
    with pytest.raises(ValueError):
        lorentz.exp_closed(sp, "boost", e(0), e(3), nu=1.0)     # s must be spacelike
    with pytest.raises(ValueError):
        lorentz.exp_closed(sp, "rotation", e(0), e(1), nu=1.0)  # mixed signs
    with pytest.raises(ValueError):
        lorentz.exp_closed(sp, "null", e(1), e(0))              # f not null
    with pytest.raises(ValueError):
        lorentz.exp_closed(sp, "screw", e(1), e(2))


# -- projections ------------------------------------------------------------

@pytest.mark.parametrize("dim", DIMS)
def test_projection_identity(dim, rng):
    sp = lorentz.make_minkowski(dim)
    basis = lorentz.random_orthonormal_basis(sp, rng)
    for i, j in [(0, 1), (1, 2), (0, dim - 1)]:
        v, w = basis[i], basis[j]
        P = lorentz.projection_p(sp, v, w)
        L = lorentz.lambda_op(sp, v, w)
        sv, sw = np.sign(sp.eta(v, v)), np.sign(sp.eta(w, w))
        np.testing.assert_allclose(P @ P, P, atol=1e-9)
        np.testing.assert_allclose(P, -sv * sw * L @ L, atol=1e-9)
        for k in set(range(dim)) - {i, j}:
            np.testing.assert_allclose(P @ basis[k], 0.0, atol=1e-9)


def test_projection_ts_is_lambda_squared():
    sp = lorentz.make_minkowski(4)
    t, s = sp.basis_vector(0), sp.basis_vector(3)
    L = lorentz.lambda_op(sp, t, s)
    np.testing.assert_allclose(lorentz.projection_p(sp, t, s), L @ L)


# -- reflections and components ---------------------------------------------

@pytest.mark.parametrize("dim", DIMS)
def test_reflection_properties(dim, rng):
    sp = lorentz.make_minkowski(dim)
    v = rng.uniform(-1, 1, dim)
    R = lorentz.reflection(sp, v)
    np.testing.assert_allclose(R @ R, np.eye(dim), atol=1e-10)
    np.testing.assert_allclose(R @ v, -v, atol=1e-10)
    assert lorentz.is_orthogonal(sp, R)


def test_reflection_of_null_vector_fails():
    sp = lorentz.make_minkowski(4)
    with pytest.raises(ValueError):
        lorentz.reflection(sp, sp.basis_vector(0) + sp.basis_vector(1))


def test_component_examples():
    sp = lorentz.make_minkowski(4)
    Rt = lorentz.reflection(sp, sp.basis_vector(0))
    Rs = lorentz.reflection(sp, sp.basis_vector(3))
    assert lorentz.classify_component(sp, np.eye(4)) is Component.SO0
    assert lorentz.classify_component(sp, Rt) is Component.TIME_REFL
    assert lorentz.classify_component(sp, Rs) is Component.SPACE_REFL
    assert lorentz.classify_component(sp, Rt @ Rs) is Component.SO1
    boost = lorentz.exp_closed(sp, "boost", sp.basis_vector(3), sp.basis_vector(0), nu=3.0)
    assert lorentz.classify_component(sp, boost) is Component.SO0


def test_component_table_is_klein_four():
    comps = list(Component)
    for a in comps:
        assert lorentz.compose_components(Component.SO0, a) is a
        assert lorentz.compose_components(a, a) is Component.SO0
        for b in comps:
            assert lorentz.compose_components(a, b) is lorentz.compose_components(b, a)


@pytest.mark.parametrize("dim", DIMS)
def test_classification_follows_table(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for a in Component:
        for b in Component:
            g = lorentz.random_orthogonal(sp, rng, a)
            h = lorentz.random_orthogonal(sp, rng, b)
            assert lorentz.classify_component(sp, g) is a
            assert lorentz.classify_component(sp, g @ h) is lorentz.compose_components(a, b)


def test_classify_rejects_non_orthogonal():
    sp = lorentz.make_minkowski(4)
    with pytest.raises(ValueError):
        lorentz.classify_component(sp, 2 * np.eye(4))


# -- sampling ---------------------------------------------------------------

@pytest.mark.parametrize("dim", DIMS)
def test_samplers_stay_in_group_and_bounded(dim, rng):
    sp = lorentz.make_minkowski(dim)
    for _ in range(20):
        g = lorentz.random_so0(sp, rng)
        assert lorentz.is_orthogonal(sp, g)
        assert lorentz.classify_component(sp, g) is Component.SO0
        assert np.max(np.abs(g)) <= math.cosh(1.5) ** 3 + 1e-9
    basis = lorentz.random_orthonormal_basis(sp, rng)
    gram = np.array([[sp.eta(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(np.abs(gram), np.eye(dim), atol=1e-10)
    assert sorted(np.sign(np.diag(gram))) == sorted(sp.signature)


def test_gram_schmidt_orthonormalizes():
    sp = lorentz.make_minkowski(5)
    vecs = lorentz.gram_schmidt(sp, [sp.basis_vector(i) + 0.1 * sp.basis_vector(0) for i in range(5)])
    gram = np.array([[sp.eta(a, b) for b in vecs] for a in vecs])
    np.testing.assert_allclose(np.abs(gram), np.eye(5), atol=1e-12)
