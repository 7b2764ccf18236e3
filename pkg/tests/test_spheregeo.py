import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistor_verifier import sampling
from twistor_verifier import spheregeo as sg
from twistor_verifier.checks import christoffel_oracle


def _sigma(y):
    r2 = y @ y
    return np.concatenate([[0.0], 4 * y, [4 - r2]]) / (4 + r2)


def test_embed_at_origin():
    fd = sg.embed(np.zeros(4))
    assert np.array_equal(fd.e0, [0, 0, 0, 0, 0, 1])
    assert np.allclose(fd.frame[1:5], np.eye(4))
    assert not fd.frame[0].any() and not fd.frame[5].any()


def test_embed_unit_norm_and_frame_is_scaled_differential(rng):
    y = sampling.random_chart_point(rng, 2)
    fd = sg.embed(y)
    assert abs(np.linalg.norm(fd.e0) - 1) <= 1e-15
    assert np.allclose(fd.e0, _sigma(y))
    h = 1e-6
    for l in range(4):
        d = np.zeros(4)
        d[l] = h
        col = sg.conformal_factor(y) * (_sigma(y + d) - _sigma(y - d)) / (2 * h)
        assert np.allclose(col, fd.frame[:, l], atol=1e-8)
    assert fd.orthonormality_residual() <= 1e-14


def test_chart_point_validation():
    with pytest.raises(ValueError):
        sg.ChartPoint([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        sg.ChartPoint([2e3, 0.0])
    with pytest.raises(ValueError):
        sg.embed([np.nan, 0.0])
    assert sg.ChartPoint([0.0, 1.0]).n == 1


def test_connection_examples():
    assert not sg.connection_table(np.zeros(4)).any()
    y = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.allclose(sg.connection_coefficients(y, 2, 2), [0.5, 0, 0, 0])
    assert np.allclose(sg.connection_coefficients(y, 1, 1), 0)
    assert np.allclose(sg.connection_coefficients(y, 1, 2), 0)
    with pytest.raises(IndexError):
        sg.connection_coefficients(y, 0, 1)


def test_connection_forms_antisymmetric(rng):
    y = sampling.random_chart_point(rng, 3)
    G = sg.connection_table(y)
    # omega_j^k(e_i) = G[i, j, k]
    assert np.allclose(G, -G.transpose(0, 2, 1), atol=1e-15)
    X = rng.standard_normal(6)
    w = sg.connection_matrix(y, X)
    assert np.allclose(w, np.einsum("i,ijk->kj", X, G))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_connection_matches_christoffel_oracle(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        y = sampling.random_chart_point(rng, n)
        assert np.max(np.abs(christoffel_oracle(y) - sg.connection_table(y))) <= 1e-8


def test_constant_fields_at_origin():
    X, Y = sg.VectorField.constant([1.0, 2.0]), sg.VectorField.constant([0.5, -1.0])
    assert np.allclose(sg.covariant_derivative(X, Y, np.zeros(2)), 0)


def _metric_compat(X, Y, Z, y):
    grad = Y.frame_jacobian(y).T @ Z(y) + Z.frame_jacobian(y).T @ Y(y)
    return grad @ X(y) - sg.covariant_derivative(X, Y, y) @ Z(y) - Y(y) @ sg.covariant_derivative(X, Z, y)


def test_metric_compatibility_with_fd_jacobians(rng):
    y = sampling.random_chart_point(rng, 2)
    X, Y, Z = (sampling.random_vector_field(rng, 4) for _ in range(3))
    Yfd, Zfd = sg.VectorField(Y.components), sg.VectorField(Z.components)
    assert abs(_metric_compat(X, Yfd, Zfd, y)) <= 1e-6


def test_torsion_free_and_bracket(rng):
    y = sampling.random_chart_point(rng, 2)
    X, Y = sampling.random_vector_field(rng, 4), sampling.random_vector_field(rng, 4)
    tors = sg.covariant_derivative(X, Y, y) - sg.covariant_derivative(Y, X, y) - sg.lie_bracket(X, Y, y)
    assert np.linalg.norm(tors) <= 1e-10
    e1, e3 = sg.VectorField.frame(1, 4), sg.VectorField.frame(3, 4)
    assert np.allclose(sg.lie_bracket(e1, e3, y), sg.frame_bracket(y, 1, 3))


def test_covariant_derivative_is_tensorial_in_X(rng):
    y = sampling.random_chart_point(rng, 2)
    X, Y = sampling.random_vector_field(rng, 4), sampling.random_vector_field(rng, 4)
    c = rng.standard_normal(4)
    fX = X.scaled(lambda p: np.sin(c @ p), lambda p: np.cos(c @ p) * c)
    assert np.allclose(sg.covariant_derivative(fX, Y, y), np.sin(c @ y) * sg.covariant_derivative(X, Y, y))


def test_curvature_examples(rng):
    y = sampling.random_chart_point(rng, 2)
    assert np.allclose(sg.curvature(y, 1, 2, 2), [1, 0, 0, 0], atol=1e-4)
    assert np.allclose(sg.curvature(y, 3, 3, 1), 0, atol=1e-12)
    R = sg.curvature_tensor(y)
    bianchi = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    assert np.max(np.abs(bianchi)) <= 1e-4
    # constant curvature 1: R(X,Y)Z = <Y,Z>X - <X,Z>Y
    I = np.eye(4)
    model = np.einsum("jk,iq->ijkq", I, I) - np.einsum("ik,jq->ijkq", I, I)
    assert np.max(np.abs(R - model)) <= 1e-4


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_sectional_curvature_is_one(n, seed):
    rng = np.random.default_rng(seed)
    y = sampling.random_chart_point(rng, n, radius=3.0)
    u, v = rng.standard_normal(2 * n), rng.standard_normal(2 * n)
    if abs(np.linalg.det(np.array([[u @ u, u @ v], [u @ v, v @ v]]))) < 1e-3:
        return
    assert abs(sg.sectional_curvature(y, u, v) - 1.0) <= 1e-4
