import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpoisson import affine, lorentz, schouten
from kpoisson.affine import AffinePoint, Line
from kpoisson.schouten import IGElement, IsoAlgebra

VDIMS = [3, 4, 5, 6]


def _space(dim):
    return lorentz.QuadraticSpace.from_signature([1] + [-1] * (dim - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(37)


@pytest.fixture(params=VDIMS)
def alg(request):
    return IsoAlgebra(_space(request.param))


def rand_line(rng, d):
    return Line(AffinePoint(rng.uniform(-1, 1, d)), rng.uniform(-1, 1, d))


def tr(alg, v):
    return alg.translation(v)


# -- lines ------------------------------------------------------------------

def test_line_validation():
    with pytest.raises(ValueError):
        Line(AffinePoint(np.zeros(3)), np.zeros(3))
    with pytest.raises(ValueError):
        Line(AffinePoint(np.zeros(3)), np.ones(4))
    l = Line(np.zeros(3), [1.0, 0.0, 0.0])
    assert isinstance(l.base, AffinePoint)
    assert l.dim == 3
    np.testing.assert_allclose(l.shifted(2.0).base.offset, [2.0, 0.0, 0.0])


def test_affine_point_arithmetic():
    p = AffinePoint(np.array([1.0, 2.0]))
    q = p + [1.0, -1.0]
    np.testing.assert_allclose(q - p, [1.0, -1.0])


# -- transferred structures -------------------------------------------------

def test_transfer_at_own_base_is_bv(alg, rng):
    l = rand_line(rng, alg.vdim)
    assert affine.transferred_structure(alg, l, l.base).distance(schouten.make_bv(alg, l.dir)) < 1e-14


def test_transfer_formula(alg, rng):
    l = rand_line(rng, alg.vdim)
    origin = AffinePoint(rng.uniform(-1, 1, alg.vdim))
    x = l.base - origin
    expected = schouten.make_bv(alg, l.dir) - (tr(alg, x) ^ tr(alg, l.dir))
    assert affine.transferred_structure(alg, l, origin).distance(expected) < 1e-12


def test_transfer_shift_along_line_and_scaling(alg, rng):
    l = rand_line(rng, alg.vdim)
    O = AffinePoint(np.zeros(alg.vdim))
    base = affine.transferred_structure(alg, l, O)
    for lam in (-1.5, 0.3, 2.0):
        assert affine.transferred_structure(alg, l.shifted(lam), O).distance(base) < 1e-12
        scaled = Line(l.base, lam * l.dir)
        assert affine.transferred_structure(alg, scaled, O).distance(base * lam) < 1e-12
    back = AffinePoint(l.base.offset - 0.7 * l.dir)
    assert affine.transferred_structure(alg, l, back).distance(schouten.make_bv(alg, l.dir)) < 1e-12


def test_transfer_rebase(alg, rng):
    l = rand_line(rng, alg.vdim)
    o1, o2 = (AffinePoint(rng.uniform(-1, 1, alg.vdim)) for _ in range(2))
    via1 = affine.transferred_structure(alg, l, o1)
    moved = schouten.adjoint_action(alg, IGElement(o1 - o2, np.eye(alg.vdim)), via1)
    assert moved.distance(affine.transferred_structure(alg, l, o2)) < 1e-12


def test_structures_equal_examples(alg, rng):
    l = rand_line(rng, alg.vdim)
    assert affine.structures_equal(alg, l, l.shifted(2.0))
    assert not affine.structures_equal(alg, l, Line(l.base, 2 * l.dir))
    off = rng.uniform(-1, 1, alg.vdim)
    off -= off @ l.dir / (l.dir @ l.dir) * l.dir
    assert not affine.structures_equal(alg, l, Line(l.base + off, l.dir))


@settings(max_examples=40, deadline=None)
@given(d=st.sampled_from(VDIMS), seed=st.integers(0, 2**32 - 1),
       kind=st.sampled_from(["same", "shift", "scale", "offset", "random"]))
def test_structures_equal_iff_same_line(d, seed, kind):
    rng = np.random.default_rng(seed)
    alg = IsoAlgebra(_space(d))
    l = rand_line(rng, d)
    if kind == "same":
        k, same = l, True
    elif kind == "shift":
        k, same = l.shifted(rng.uniform(-3, 3)), True
    elif kind == "scale":
        k, same = Line(l.base, rng.uniform(1.1, 3) * l.dir), False
    elif kind == "offset":
        k, same = Line(l.base + rng.uniform(-1, 1, d), l.dir), False
    else:
        k, same = rand_line(rng, d), False
    assert affine.structures_equal(alg, l, k) == same


# -- group compatibility ----------------------------------------------------

def test_intersecting_lines_compatible(rng):
    for d in VDIMS:
        p = rng.uniform(-1, 1, d)
        l = Line(p - 0.5 * np.eye(d)[0], np.eye(d)[0])
        u = np.eye(d)[1] + 0.2
        k = Line(p + 1.3 * u, u)
        for orient in (True, False):
            assert affine.group_compatible(_space(d), l, k, orient)


def test_parallel_lines_compatible(rng):
    for d in VDIMS:
        l = rand_line(rng, d)
        k = Line(rng.uniform(-1, 1, d), -2 * l.dir)
        assert affine.group_compatible(_space(d), l, k, False)


def test_skew_lines_incompatible_above_dim_3(rng):
    for d in (4, 5, 6):
        I = np.eye(d)
        l = Line(np.zeros(d), I[1])
        k = Line(I[3], I[2])
        for orient in (True, False):
            assert not affine.group_compatible(_space(d), l, k, orient)


def test_dim3_trichotomy():
    I = np.eye(3)
    l = Line(np.zeros(3), I[1])
    k = Line(I[0], I[2])
    sp = _space(3)
    assert affine.group_compatible(sp, l, k, orientation_only=True)
    assert not affine.group_compatible(sp, l, k, orientation_only=False)


def test_group_compatible_needs_dim_3():
    sp = lorentz.QuadraticSpace.from_signature([1, -1])
    l = Line(np.zeros(2), [1.0, 0.0])
    with pytest.raises(ValueError):
        affine.group_compatible(sp, l, l, True)


def test_group_compatible_agrees_with_geometry(rng):
    for d in (4, 5, 6):
        for i in range(60):
            l, k = rand_line(rng, d), rand_line(rng, d)
            if i % 3 == 0:
                k = Line(l.base + 0.8 * l.dir + 0.4 * k.dir, k.dir)
            assert affine.group_compatible(_space(d), l, k, False) == affine.lines_meet_or_parallel(l, k)


def test_euclidean_space_also_supported(rng):
    sp = lorentz.QuadraticSpace(np.eye(4))
    l, k = rand_line(rng, 4), rand_line(rng, 4)
    assert not affine.group_compatible(sp, l, k, True)


# -- bivector fields --------------------------------------------------------

def test_pi_field_values(alg, rng):
    d = alg.vdim
    l = rand_line(rng, d)
    pi = affine.pi_field(l)
    assert pi.degree == 2
    assert pi.evaluate(l.base).max_abs() < 1e-14
    assert pi.evaluate(l.base + 1.7 * l.dir).max_abs() < 1e-12
    v = rng.uniform(-1, 1, d)
    expected = schouten.wedge_vectors(v, l.dir)
    assert pi.evaluate(l.base + v).distance(expected) < 1e-12


def test_pi_field_depends_only_on_line(alg, rng):
    l = rand_line(rng, alg.vdim)
    a, b = affine.pi_field(l), affine.pi_field(l.shifted(-2.4))
    assert a.distance(b) < 1e-12
    for _ in range(5):
        p = AffinePoint(rng.uniform(-3, 3, alg.vdim))
        assert a.evaluate(p).distance(b.evaluate(p)) < 1e-12


def test_pi_field_self_bracket_vanishes(alg, rng):
    pi = affine.pi_field(rand_line(rng, alg.vdim))
    assert affine.field_schouten(pi, pi).mv.max_abs() < 1e-14


def test_pi_field_mixed_bracket(alg, rng):
    for _ in range(10):
        l, k = rand_line(rng, alg.vdim), rand_line(rng, alg.vdim)
        br = affine.field_schouten(affine.pi_field(l), affine.pi_field(k))
        x = l.base - k.base
        expected = affine.constant_multivector_field(l.dir, x, k.dir) * 2.0
        assert br.is_constant(1e-14)
        assert br.distance(expected) < 1e-12


def test_fields_compatible_iff_meet_or_parallel(rng):
    for d in (3, 4, 5, 6):
        l = rand_line(rng, d)
        meet = Line(l.base + 0.3 * l.dir, rng.uniform(-1, 1, d))
        assert affine.fields_compatible(l, meet)
        assert affine.fields_compatible(l, Line(rng.uniform(-1, 1, d), l.dir))
        assert not affine.fields_compatible(l, rand_line(rng, d))


def test_field_bracket_derivation_rules():
    E = affine.AffineVectorField(np.zeros(3), True)
    e1 = affine.constant_field([0.0, 1.0, 0.0])
    br = affine.field_schouten(affine.MultivectorField.wedge_of(E),
                               affine.MultivectorField.wedge_of(e1))
    assert br.distance(affine.MultivectorField.wedge_of(e1) * -1.0) < 1e-15


def test_field_schouten_dimension_mismatch():
    a = affine.pi_field(Line(np.zeros(3), [1.0, 0, 0]))
    b = affine.pi_field(Line(np.zeros(4), [1.0, 0, 0, 0]))
    with pytest.raises(ValueError):
        affine.field_schouten(a, b)


# -- Poisson action ---------------------------------------------------------

def test_poisson_action_examples(rng):
    for d in VDIMS:
        sp = _space(d)
        l = rand_line(rng, d)
        assert affine.is_poisson_action(sp, l, l)
        assert not affine.is_poisson_action(sp, l, Line(l.base, rng.uniform(-1, 1, d)))
        off = rng.uniform(-1, 1, d)
        off -= off @ l.dir / (l.dir @ l.dir) * l.dir
        assert not affine.is_poisson_action(sp, l, Line(l.base + off, l.dir))


def test_poisson_action_defect_zero_for_equal_lines(rng):
    sp = _space(4)
    l = rand_line(rng, 4)
    for _ in range(20):
        y, v = rng.uniform(-1, 1, (2, 4))
        A = lorentz.random_so0(sp, rng)
        assert affine.poisson_action_defect(l, l, y, v, A) < 1e-12 * np.max(np.abs(A)) ** 2


def test_poisson_action_deterministic(rng):
    sp = _space(5)
    l, k = rand_line(rng, 5), rand_line(rng, 5)
    assert affine.is_poisson_action(sp, l, k, seed=3) == affine.is_poisson_action(sp, l, k, seed=3)
