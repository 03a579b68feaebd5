import numpy as np
import pytest

from landgeo import (
    Covector,
    DegeneratePlane,
    KernelSpec,
    Landmarks,
    bracket,
    curvature_fd_oracle,
    force,
    sectional_curvature,
    sectional_numerator,
    sharp,
    stress,
)
from landgeo.kernels import gram_entries
from util import fd_cometric_gradient, fd_lie_bracket, sample_landmarks

SPEC = KernelSpec(sigma=1.0)

# closed-form sectional curvature for two landmarks on the line at distance
# d, unit-width kernel, in this library's sign convention.  Derived from the
# 2-D metric ds^2/(2(1+k)) + du^2/(2(1-k)) in (sum, difference) coordinates,
# k = exp(-d^2); values frozen from 16-digit symbolic evaluation.
TWO_POINT_LINE_TABLE = {
    0.5: 0.3309371803296066,
    1.0: 0.1321949751992746,
    2.0: -0.2369376173801459,
}


def raised_field(a):
    def field(pts):
        return gram_entries(SPEC, pts) @ a

    return field


# ---------------------------------------------------------------- stress


def test_stress_zero_beta():
    q = Landmarks([[0.0], [1.0]])
    a = Covector([[1.0], [2.0]])
    out = stress(SPEC, q, a, Covector([[0.0], [0.0]]))
    assert np.abs(out.components).max() == 0.0


def test_stress_single_landmark_vanishes():
    q = Landmarks([[0.3, 0.1]])
    a = Covector([[1.0, 2.0]])
    assert np.abs(stress(SPEC, q, a, a).components).max() == 0.0


def test_bracket_identity_against_fd():
    """stress(a,b) - stress(b,a) is the Lie bracket of the raised fields."""
    rng = np.random.default_rng(30)
    for _ in range(10):
        q = sample_landmarks(rng, 3, 2, min_dist=0.5)
        a = rng.normal(size=(3, 2))
        b = rng.normal(size=(3, 2))
        lib = bracket(SPEC, q, Covector(a), Covector(b))
        fd = fd_lie_bracket(raised_field(a), raised_field(b), q.points)
        assert np.abs(lib.components - fd).max() < 1e-6


def test_bracket_antisymmetric_exactly():
    rng = np.random.default_rng(31)
    q = sample_landmarks(rng, 4, 2)
    a = Covector(rng.normal(size=(4, 2)))
    b = Covector(rng.normal(size=(4, 2)))
    fwd = bracket(SPEC, q, a, b)
    rev = bracket(SPEC, q, b, a)
    np.testing.assert_array_equal(fwd.components, -rev.components)
    assert np.abs(bracket(SPEC, q, a, a).components).max() == 0.0


# ---------------------------------------------------------------- force


def test_force_zero_and_single():
    q = Landmarks([[0.0], [1.0]])
    b = Covector([[1.0], [2.0]])
    assert np.abs(force(SPEC, q, Covector([[0.0], [0.0]]), b).components).max() == 0.0
    q1 = Landmarks([[0.0, 0.0]])
    a1 = Covector([[1.0, -1.0]])
    assert np.abs(force(SPEC, q1, a1, a1).components).max() == 0.0


def test_force_symmetric_exactly():
    rng = np.random.default_rng(32)
    q = sample_landmarks(rng, 4, 3)
    a = Covector(rng.normal(size=(4, 3)))
    b = Covector(rng.normal(size=(4, 3)))
    np.testing.assert_array_equal(
        force(SPEC, q, a, b).components, force(SPEC, q, b, a).components
    )


def test_force_is_half_cometric_gradient():
    rng = np.random.default_rng(33)
    for _ in range(10):
        q = sample_landmarks(rng, 3, 2, min_dist=0.5)
        a = rng.normal(size=(3, 2))
        b = rng.normal(size=(3, 2))
        f = force(SPEC, q, Covector(a), Covector(b))
        fd = 0.5 * fd_cometric_gradient(SPEC, q.points, a, b)
        assert np.abs(f.components - fd).max() < 1e-6


# ------------------------------------------------------------- numerator


def test_numerator_vanishes_on_equal_arguments():
    rng = np.random.default_rng(34)
    q = sample_landmarks(rng, 3, 2)
    a = Covector(rng.normal(size=(3, 2)))
    rep = sectional_numerator(SPEC, q, a, a)
    assert abs(rep.numerator) < 1e-12


def test_numerator_single_landmark_flat():
    q = Landmarks([[0.2, -0.2]])
    a = Covector([[1.0, 0.0]])
    b = Covector([[0.0, 1.0]])
    rep = sectional_numerator(SPEC, q, a, b)
    assert abs(rep.numerator) < 1e-12
    assert rep.sectional == pytest.approx(0.0, abs=1e-12)


def test_numerator_symmetric_in_arguments():
    rng = np.random.default_rng(35)
    q = sample_landmarks(rng, 3, 2)
    a = Covector(rng.normal(size=(3, 2)))
    b = Covector(rng.normal(size=(3, 2)))
    r1 = sectional_numerator(SPEC, q, a, b)
    r2 = sectional_numerator(SPEC, q, b, a)
    assert r1.numerator == pytest.approx(r2.numerator, rel=1e-12, abs=1e-12)


def test_numerator_terms_sum_and_quadratic_scaling():
    rng = np.random.default_rng(36)
    q = sample_landmarks(rng, 3, 2)
    a = rng.normal(size=(3, 2))
    b = rng.normal(size=(3, 2))
    rep = sectional_numerator(SPEC, q, Covector(a), Covector(b))
    assert rep.numerator == pytest.approx(sum(rep.terms.values()), rel=1e-12)
    c = 1.7
    scaled = sectional_numerator(SPEC, q, Covector(c * a), Covector(b))
    assert scaled.numerator == pytest.approx(c**2 * rep.numerator, rel=1e-10)
    # sectional value is scale-free
    s1 = sectional_curvature(SPEC, q, Covector(a), Covector(b))
    s2 = sectional_curvature(SPEC, q, Covector(c * a), Covector(2.3 * b))
    assert s1 == pytest.approx(s2, rel=1e-9)


def test_two_point_line_closed_form_table():
    a = Covector([[1.0], [0.0]])
    b = Covector([[0.0], [1.0]])
    for dist, expected in TWO_POINT_LINE_TABLE.items():
        q = Landmarks([[0.0], [dist]])
        val = sectional_curvature(SPEC, q, a, b)
        assert val == pytest.approx(expected, rel=1e-12)
        orc = curvature_fd_oracle(SPEC, q, sharp(SPEC, q, a), sharp(SPEC, q, b))
        rep = sectional_numerator(SPEC, q, a, b)
        assert orc == pytest.approx(rep.numerator, rel=1e-4)


def test_degenerate_plane_raises():
    q = Landmarks([[0.0], [1.0]])
    a = Covector([[1.0], [0.5]])
    with pytest.raises(DegeneratePlane):
        sectional_curvature(SPEC, q, a, Covector(2.0 * a.components))
    # single landmark on the line: every pair of momenta is parallel
    with pytest.raises(DegeneratePlane):
        sectional_curvature(SPEC, Landmarks([[0.0]]), Covector([[1.0]]), Covector([[2.0]]))


# ---------------------------------------------------------------- oracle


def test_oracle_flat_single_landmark():
    q = Landmarks([[0.1, 0.9]])
    p = sharp(SPEC, q, Covector([[1.0, 0.0]]))
    r = sharp(SPEC, q, Covector([[0.0, 1.0]]))
    assert abs(curvature_fd_oracle(SPEC, q, p, r)) < 1e-6


def test_oracle_symmetric_under_swap():
    rng = np.random.default_rng(37)
    q = sample_landmarks(rng, 2, 2, min_dist=0.6)
    p = sharp(SPEC, q, Covector(rng.normal(size=(2, 2))))
    r = sharp(SPEC, q, Covector(rng.normal(size=(2, 2))))
    v1 = curvature_fd_oracle(SPEC, q, p, r)
    v2 = curvature_fd_oracle(SPEC, q, r, p)
    assert v1 == pytest.approx(v2, rel=1e-4, abs=1e-8)


def test_formula_matches_oracle_random_sweep():
    rng = np.random.default_rng(38)
    for _ in range(20):
        n_land = int(rng.integers(2, 4))
        dim = int(rng.integers(1, 3))
        q = sample_landmarks(rng, n_land, dim, min_dist=0.45)
        a = Covector(rng.normal(size=(n_land, dim)))
        b = Covector(rng.normal(size=(n_land, dim)))
        rep = sectional_numerator(SPEC, q, a, b)
        orc = curvature_fd_oracle(SPEC, q, sharp(SPEC, q, a), sharp(SPEC, q, b))
        assert abs(rep.numerator - orc) <= max(1e-4 * abs(orc), 1e-7)
