import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistor_verifier import acsfield as af
from twistor_verifier import matcore as mc
from twistor_verifier import sampling


def _pairs(m):
    return [(i, j) for i in range(1, m + 1) for j in range(1, m + 1)]


def test_field_constructors(rng):
    f = af.make_constant_field(mc.make_standard_J0(2).entries)
    assert f.orthogonal
    g = af.make_constant_field(sampling.random_complex_structure(rng, 2, 1.0))
    assert not g.orthogonal
    with pytest.raises(mc.NotAComplexStructure):
        af.make_constant_field(np.eye(4))
    with pytest.raises(mc.NotAComplexStructure):
        af.make_rotated_field(sampling.random_complex_structure(rng, 2, 1.0), np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        af.make_rotated_field(mc.make_standard_J0(2).entries, rng.standard_normal((4, 4, 4)))


def test_rotated_field_properties(rng):
    B0 = sampling.random_orthogonal_structure(rng, 2)
    S = np.array([sampling.random_skew(rng, 4) for _ in range(4)])
    flat = af.make_rotated_field(B0, S, 0.0)
    y = sampling.random_chart_point(rng, 2)
    assert np.allclose(flat.B(y), B0)
    f = af.make_rotated_field(B0, S, 1.0)
    B = f.B(y)
    assert np.linalg.norm(B @ B + np.eye(4)) <= 1e-12
    assert np.linalg.norm(B + B.T) <= 1e-12
    assert max(np.linalg.norm(af.nijenhuis_direct(f, y, i, j)) for i, j in _pairs(4)) > 1e-2


def test_analytic_derivative_matches_finite_differences(rng):
    f = sampling.random_conjugated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    fd = af.ACSField(2, f.B)
    _, D = f.jet(y)
    _, Dfd = fd.jet(y)
    assert np.allclose(D, Dfd, atol=1e-8)


def test_constant_field_has_zero_nijenhuis(rng):
    f = af.make_constant_field(sampling.random_complex_structure(rng, 3, 0.8))
    y = sampling.random_chart_point(rng, 3)
    for i, j in _pairs(6):
        assert np.linalg.norm(af.nijenhuis_direct(f, y, i, j)) <= 1e-12
        assert np.linalg.norm(af.nijenhuis_formula(f, y, i, j)) == 0.0
        assert np.linalg.norm(af.integrability_residual(f, y, i, j, 1)) == 0.0


def test_nijenhuis_vanishes_in_real_dimension_two(rng):
    f = sampling.random_conjugated_field(rng, 1, 0.8)
    y = sampling.random_chart_point(rng, 1)
    assert np.linalg.norm(af.nijenhuis_tensor(f, y)) <= 1e-12
    assert np.linalg.norm(af.nijenhuis_direct(f, y, 1, 2)) <= 1e-12


def test_nijenhuis_antisymmetric_and_agrees(rng):
    f = sampling.random_conjugated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    T = af.nijenhuis_tensor(f, y)
    assert np.allclose(T, -T.transpose(1, 0, 2))
    for i, j in _pairs(4):
        Nd = af.nijenhuis_direct(f, y, i, j)
        assert np.linalg.norm(Nd - af.nijenhuis_formula(f, y, i, j)) <= 1e-10
        assert np.allclose(T[i - 1, j - 1], Nd, atol=1e-10)


def test_rotated_field_at_axis_point(rng):
    f = sampling.random_rotated_field(rng, 3)
    y = np.zeros(6)
    y[0] = 1.0
    N = [af.nijenhuis_direct(f, y, i, j) for i, j in _pairs(6)]
    assert max(np.linalg.norm(v) for v in N) > 1e-3
    for (i, j), v in zip(_pairs(6), N):
        assert np.linalg.norm(v - af.nijenhuis_formula(f, y, i, j)) <= 1e-6


def test_nijenhuis_agreement_random_sweep():
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        f = sampling.random_rotated_field(rng, n) if rng.random() < 0.5 else sampling.random_conjugated_field(rng, n)
        y = sampling.random_chart_point(rng, n)
        i, j = rng.integers(1, 2 * n + 1, size=2)
        assert np.linalg.norm(af.nijenhuis_direct(f, y, i, j) - af.nijenhuis_formula(f, y, i, j)) <= 1e-6


def test_nijenhuis_agreement_with_fd_derivatives(rng):
    f = sampling.random_rotated_field(rng, 2)
    fd = af.ACSField(2, f.B)
    y = sampling.random_chart_point(rng, 2)
    assert np.linalg.norm(af.nijenhuis_tensor(fd, y) - af.nijenhuis_tensor(f, y)) <= 1e-6


def test_nijenhuis_is_tensorial(rng):
    f = sampling.random_conjugated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    X, Y = sampling.random_vector_field(rng, 4), sampling.random_vector_field(rng, 4)
    c = rng.standard_normal(4)
    fX = X.scaled(lambda p: np.exp(c @ p), lambda p: np.exp(c @ p) * c)
    lhs = af.nijenhuis_fields(f, fX, Y, y)
    assert np.allclose(lhs, np.exp(c @ y) * af.nijenhuis_fields(f, X, Y, y), atol=1e-10)
    # pointwise value only depends on X(y), Y(y)
    T = af.nijenhuis_tensor(f, y)
    assert np.allclose(af.nijenhuis_fields(f, X, Y, y), np.einsum("i,j,ijk->k", X(y), Y(y), T), atol=1e-10)


def test_integrability_residual_forms(rng):
    f = sampling.random_rotated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    B, _ = f.jet(y)
    for i, j in _pairs(4):
        N = af.nijenhuis_formula(f, y, i, j)
        r1 = af.integrability_residual(f, y, i, j, 1)
        assert np.allclose(B @ r1, -N, atol=1e-12)
        assert (np.linalg.norm(r1) <= 1e-6) == (np.linalg.norm(N) <= 1e-6)
    with pytest.raises(ValueError):
        af.integrability_residual(sampling.random_conjugated_field(rng, 2), y, 1, 2, 2)
    with pytest.raises(ValueError):
        af.integrability_residual(f, y, 1, 2, 3)


def test_second_form_vanishes_with_nijenhuis(rng):
    const = af.make_constant_field(sampling.random_orthogonal_structure(rng, 2))
    rot = sampling.random_rotated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    assert max(np.linalg.norm(af.integrability_residual(const, y, i, j, 2)) for i, j in _pairs(4)) == 0.0
    assert max(np.linalg.norm(af.integrability_residual(rot, y, i, j, 2)) for i, j in _pairs(4)) > 1e-3


def test_bracket10_examples(rng):
    const = af.make_constant_field(mc.make_standard_J0(2).entries)
    assert np.allclose(af.bracket10(const, np.zeros(4), 1, 2), 0)
    f = sampling.random_rotated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    assert np.allclose(af.bracket10(f, y, 3, 3), 0)
    for i, j in _pairs(4):
        d = af.bracket10(f, y, i, j, "direct") - af.bracket10(f, y, i, j, "formula")
        assert np.linalg.norm(d) <= 1e-6
    with pytest.raises(ValueError):
        af.bracket10(f, y, 1, 2, "other")


def test_covderiv10_formula_matches_direct(rng):
    f = sampling.random_rotated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    B, _ = f.jet(y)
    assert np.allclose(B @ B.T, np.eye(4)) and np.allclose(B, -B.T)
    for i, j in _pairs(4):
        d = af.covderiv10_formula(f, y, i, j) - af.covderiv10_direct(f, y, i, j)
        assert np.linalg.norm(d) <= 1e-6
    const = af.make_constant_field(mc.make_standard_J0(2).entries)
    assert np.allclose(af.covderiv10_formula(const, np.zeros(4), 1, 3), 0)


def test_lebrun_symmetry_norm(rng):
    const = af.make_constant_field(mc.make_standard_J0(3).entries)
    y = np.zeros(6)
    assert max(af.lebrun_symmetry_norm(const, y, i, j) for i, j in _pairs(6)) == 0.0
    y[0] = 1.0
    vals = {(i, j): af.lebrun_symmetry_norm(const, y, i, j) for i, j in _pairs(6) if i != j}
    assert max(vals.values()) > 1e-3
    assert all(abs(vals[i, j] - vals[j, i]) <= 1e-14 for i, j in vals)
    with pytest.raises(ValueError):
        af.lebrun_symmetry_norm(sampling.random_conjugated_field(rng, 3), y, 1, 2)


def test_spec_roundtrip(rng):
    f = sampling.random_rotated_field(rng, 2)
    g = af.field_from_spec(f.to_json())
    y = sampling.random_chart_point(rng, 2)
    assert np.array_equal(f.B(y), g.B(y))
    assert g.orthogonal
    with pytest.raises(ValueError):
        af.field_from_spec({"kind": "unknown"})


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_rotated_fields_stay_orthogonal(n, seed):
    rng = np.random.default_rng(seed)
    f = sampling.random_rotated_field(rng, n)
    y = sampling.random_chart_point(rng, n, radius=2.0)
    assert f.membership_residual(y) <= 1e-9
    B = f.B(y)
    assert np.linalg.norm(B + B.T) <= 1e-10
