import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistor_verifier import acsfield as af
from twistor_verifier import matcore as mc
from twistor_verifier import sampling
from twistor_verifier import twistorsec as ts


def test_section_at_origin():
    f = af.make_constant_field(mc.make_standard_J0(2).entries)
    sv = ts.embed_section(f, np.zeros(4))
    north = np.zeros(6)
    north[-1] = 1.0
    assert np.allclose(sv.f @ sv.e_minus1, north)
    assert np.allclose(sv.f, -sv.f.T) and sv.membership_residual() <= 1e-15


def test_section_membership_and_projection(rng):
    for n in (1, 2, 3):
        for fld in (sampling.random_rotated_field(rng, n), sampling.random_conjugated_field(rng, n)):
            y = sampling.random_chart_point(rng, n)
            sv = ts.embed_section(fld, y)
            assert sv.membership_residual() <= 1e-10
            assert sv.projection_residual() <= 1e-14
            if fld.orthogonal:
                assert np.linalg.norm(sv.f + sv.f.T) <= 1e-10


def test_section_rejects_dimension_mismatch():
    f = af.make_constant_field(mc.make_standard_J0(2).entries)
    with pytest.raises(ValueError):
        ts.embed_section(f, np.zeros(2))


def test_adapted_generators(rng):
    f = af.make_constant_field(sampling.random_orthogonal_structure(rng, 3))
    sv = ts.embed_section(f, sampling.random_chart_point(rng, 3))
    g = ts.adapted_generators(sv)
    Q, E = g["Q"], sv.frame.frame
    for l, Xt in enumerate(g["horizontal"]):
        # pi_* X~_l = X~_l e_{-1} is the chart vector sum_k Q[k, l] e_k
        assert np.allclose(Xt @ sv.e_minus1, E @ Q[:, l])
    for a in g["alpha"]:
        for Xt in g["horizontal"]:
            assert abs(np.trace(a @ Xt.T)) <= 1e-12
    for a, b in zip(g["alpha"], g["beta"]):
        assert np.linalg.norm(sv.f @ a - b) <= 1e-9
    H = g["horizontal"]
    for i in range(3):
        assert np.linalg.norm(sv.f @ H[2 * i] - H[2 * i + 1]) <= 1e-9
    with pytest.raises(ValueError):
        ts.adapted_generators(ts.embed_section(sampling.random_conjugated_field(rng, 2), np.zeros(4)))


def test_horizontal_lift_is_jtilde_equivariant(rng):
    f = sampling.random_rotated_field(rng, 2)
    sv = ts.embed_section(f, sampling.random_chart_point(rng, 2))
    for l in range(4):
        e = np.eye(4)[l]
        Xh = ts.horizontal_lift(sv, e)
        assert np.allclose(sv.f @ Xh, ts.horizontal_lift(sv, sv.B @ e), atol=1e-12)


def test_pushforward_examples(rng):
    f = af.make_constant_field(sampling.random_orthogonal_structure(rng, 2))
    assert not ts.pushforward(f, np.zeros(4), np.zeros(4)).any()
    sv = ts.embed_section(f, np.zeros(4))
    for l in range(1, 5):
        assert np.allclose(ts.pushforward(f, np.zeros(4), l), ts.horizontal_lift(sv, np.eye(4)[l - 1]), atol=1e-9)
    g = sampling.random_conjugated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    sv = ts.embed_section(g, y)
    D = ts.pushforward(g, y, rng.standard_normal(4))
    assert np.linalg.norm(sv.f @ D + D @ sv.f) <= 1e-6


def test_vertical_part_examples(rng):
    f = af.make_constant_field(sampling.random_orthogonal_structure(rng, 2))
    assert not ts.vertical_part(f, np.zeros(4), np.ones(4)).any()
    g = sampling.random_conjugated_field(rng, 2)
    y = sampling.random_chart_point(rng, 2)
    V = ts.vertical_part(g, y, rng.standard_normal(4))
    assert np.linalg.norm(V @ ts.embed_section(g, y).e_minus1) <= 1e-14


@pytest.mark.parametrize("n", [1, 2, 3])
def test_decomposition_and_projection_identity(n):
    rng = np.random.default_rng(10 + n)
    fields = [af.make_constant_field(sampling.random_complex_structure(rng, n, 0.5)),
              sampling.random_rotated_field(rng, n), sampling.random_conjugated_field(rng, n)]
    for fld in fields:
        y = sampling.random_chart_point(rng, n)
        X = rng.standard_normal(2 * n)
        assert ts.decomposition_residual(fld, y, X) <= 1e-6
        assert ts.lemma33_check(fld, y, X) <= 1e-6
        assert ts.lemma33_check(fld, y, np.zeros(2 * n)) == 0.0


def test_holomorphy_residual_bands(rng):
    y = sampling.random_chart_point(rng, 3)
    orth = af.make_constant_field(sampling.random_orthogonal_structure(rng, 3))
    general = af.make_constant_field(sampling.random_complex_structure(rng, 3, 0.5))
    rot = sampling.random_rotated_field(rng, 3)
    size = lambda f: max(np.linalg.norm(ts.holomorphy_residual(f, y, l)) for l in range(1, 7))
    assert size(orth) <= 1e-6
    assert size(general) >= 1e-2
    assert size(rot) >= 1e-2


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_decomposition_property(n, seed):
    rng = np.random.default_rng(seed)
    fld = sampling.random_rotated_field(rng, n) if seed % 2 else sampling.random_conjugated_field(rng, n)
    y = sampling.random_chart_point(rng, n)
    X = rng.standard_normal(2 * n)
    assert ts.decomposition_residual(fld, y, X) <= 1e-6
