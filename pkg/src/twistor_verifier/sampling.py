"""Seeded random generators for test and sweep inputs."""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .matcore import make_standard_J0


def random_orthogonal(rng: np.random.Generator, m: int, special: bool = True) -> np.ndarray:
    """Haar-distributed orthogonal matrix (det +1 when ``special``)."""
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    Q = Q * np.sign(np.diag(R))
    if special and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_well_conditioned(rng: np.random.Generator, m: int, spread: float = 1.0) -> np.ndarray:
    """U diag(exp(u)) V^t with u uniform in [-spread, spread]; condition number <= e^(2 spread)."""
    U = random_orthogonal(rng, m)
    V = random_orthogonal(rng, m)
    s = np.exp(rng.uniform(-spread, spread, m))
    return (U * s) @ V.T


def random_complex_structure(rng: np.random.Generator, n: int, spread: float = 1.0) -> np.ndarray:
    """g J0 g^{-1} for a random well-conditioned g."""
    g = random_well_conditioned(rng, 2 * n, spread)
    return g @ make_standard_J0(n).entries @ np.linalg.inv(g)


def random_orthogonal_structure(rng: np.random.Generator, n: int) -> np.ndarray:
    """Q J0 Q^t with Q Haar in SO(2n)."""
    Q = random_orthogonal(rng, 2 * n)
    return Q @ make_standard_J0(n).entries @ Q.T


def random_skew(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    W = rng.standard_normal((m, m)) * scale
    return 0.5 * (W - W.T)


def random_orthogonal_curve(rng: np.random.Generator, n: int, scale: float = 1.0):
    """s -> exp(sW) A0 exp(-sW), a smooth curve in the orthogonal twistor space."""
    A0 = random_orthogonal_structure(rng, n)
    W = random_skew(rng, 2 * n, scale)

    def curve(s):
        R = expm(s * W)
        return R @ A0 @ R.T

    return curve


def random_tangent_field(rng: np.random.Generator, curve, n: int, skew: bool = True):
    """Smooth tangent field s -> P_{A(s)}(M0 + sin(s) M1 + s^2 M2) along ``curve``."""
    m = 2 * n
    Ms = [rng.standard_normal((m, m)) for _ in range(3)]
    if skew:
        Ms = [0.5 * (M - M.T) for M in Ms]

    def field(s):
        A = np.asarray(curve(s))
        M = Ms[0] + np.sin(s) * Ms[1] + s * s * Ms[2]
        return 0.5 * (M + A @ M @ A)

    return field


def random_vector_field(rng: np.random.Generator, m: int, scale: float = 1.0):
    """Quadratic frame components X^l(y) = a_l + b_l.y + y.C_l y with exact jacobian."""
    from .spheregeo import VectorField

    a = rng.standard_normal(m) * scale
    b = rng.standard_normal((m, m)) * scale
    C = rng.standard_normal((m, m, m)) * scale
    C = 0.5 * (C + C.transpose(0, 2, 1))

    def comps(y):
        return a + b @ y + np.einsum("lij,i,j->l", C, y, y)

    def jac(y):
        return b + 2.0 * np.einsum("lij,j->li", C, y)

    return VectorField(comps, jac)


def random_chart_point(rng: np.random.Generator, n: int, radius: float = 1.5) -> np.ndarray:
    """Point in the chart ball of the given radius (uniform direction, radius ~ U(0, radius))."""
    v = rng.standard_normal(2 * n)
    return v / np.linalg.norm(v) * rng.uniform(0.05, radius)


def random_rotated_field(rng: np.random.Generator, n: int, scale: float = 1.0):
    from .acsfield import make_rotated_field

    B0 = random_orthogonal_structure(rng, n)
    S = np.array([random_skew(rng, 2 * n) for _ in range(2 * n)])
    return make_rotated_field(B0, S, scale)


def random_conjugated_field(rng: np.random.Generator, n: int, scale: float = 0.3):
    from .acsfield import make_conjugated_field

    B0 = random_complex_structure(rng, n, 0.5)
    S = rng.standard_normal((2 * n, 2 * n, 2 * n))
    return make_conjugated_field(B0, S, scale)
