"""The unit sphere S^2n in a stereographic chart.

Coordinates y in R^2n, metric |dy|^2 / (1 + |y|^2/4)^2 and orthonormal
frame e_i = (1 + |y|^2/4) d/dy^i.  Frame indices are 1-based in the public
API; arrays returned are 0-based component vectors in that frame.

Ambient layout in R^{2n+2}: slot 0 is e_{-1} = (1, 0, ..., 0), slots
1..2n carry the chart directions and slot 2n+1 the north pole.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

CHART_RADIUS_MAX = 1e3
FD_STEP = 1e-5

__all__ = [
    "CHART_RADIUS_MAX",
    "ChartPoint",
    "FrameData",
    "VectorField",
    "conformal_factor",
    "embed",
    "e_minus1",
    "connection_coefficients",
    "connection_table",
    "connection_matrix",
    "covariant_derivative",
    "lie_bracket",
    "frame_bracket",
    "curvature",
    "curvature_tensor",
    "sectional_curvature",
]


@dataclass(frozen=True, eq=False)
class ChartPoint:
    y: np.ndarray
    radius_max: float = CHART_RADIUS_MAX

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        if y.size == 0 or y.size % 2:
            raise ValueError(f"chart coordinates need even positive length, got {y.size}")
        if not np.all(np.isfinite(y)) or np.linalg.norm(y) >= self.radius_max:
            raise ValueError(f"|y| = {np.linalg.norm(y):g} outside the chart (max {self.radius_max:g})")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size // 2

    @property
    def dim(self) -> int:
        return self.y.size


def _coords(point) -> np.ndarray:
    if isinstance(point, ChartPoint):
        return point.y
    return ChartPoint(point).y


def conformal_factor(y) -> float:
    """phi(y) = 1 + |y|^2/4, so that e_i = phi d/dy^i."""
    y = np.asarray(y, dtype=float)
    return 1.0 + 0.25 * float(y @ y)


def e_minus1(n: int) -> np.ndarray:
    v = np.zeros(2 * n + 2)
    v[0] = 1.0
    return v


@dataclass(frozen=True, eq=False)
class FrameData:
    point: ChartPoint
    e0: np.ndarray
    frame: np.ndarray  # (2n+2, 2n) -- column l-1 is e_l

    @property
    def e_minus1(self) -> np.ndarray:
        return e_minus1(self.point.n)

    def ambient(self, v) -> np.ndarray:
        """Ambient image sum_l v^l e_l of frame components v."""
        return self.frame @ np.asarray(v)

    def orthonormality_residual(self) -> float:
        g = np.column_stack([self.e_minus1, self.e0, self.frame])
        return float(np.max(np.abs(g.T @ g - np.eye(g.shape[1]))))


def embed(point) -> FrameData:
    """Ambient point e0 = (0, sigma(y)) and frame e_l = (0, phi dsigma/dy^l).

    sigma(y) = (4y, 4 - |y|^2) / (4 + |y|^2).
    """
    pt = point if isinstance(point, ChartPoint) else ChartPoint(point)
    y = pt.y
    m = y.size
    r2 = float(y @ y)
    D = 4.0 + r2
    e0 = np.zeros(m + 2)
    e0[1:m + 1] = 4.0 * y / D
    e0[m + 1] = (4.0 - r2) / D
    E = np.zeros((m + 2, m))
    E[1:m + 1, :] = np.eye(m) - 2.0 * np.outer(y, y) / D
    E[m + 1, :] = -4.0 * y / D
    return FrameData(point=pt, e0=e0, frame=E)


def connection_table(point) -> np.ndarray:
    """G[i, j, k] = k-th frame component of nabla_{e_i} e_j (0-based).

    nabla_{e_i} e_j = -1/2 y^j e_i + 1/2 delta_ij sum_k y^k e_k.
    """
    y = _coords(point)
    m = y.size
    I = np.eye(m)
    G = -0.5 * y[None, :, None] * I[:, None, :]
    G = G + 0.5 * I[:, :, None] * y[None, None, :]
    return G


def connection_coefficients(point, i: int, j: int) -> np.ndarray:
    """Frame components of nabla_{e_i} e_j, indices 1-based."""
    y = _coords(point)
    m = y.size
    if not (1 <= i <= m and 1 <= j <= m):
        raise IndexError(f"frame indices must lie in 1..{m}, got ({i}, {j})")
    out = np.zeros(m)
    out[i - 1] -= 0.5 * y[j - 1]
    if i == j:
        out += 0.5 * y
    return out


def connection_matrix(point, X) -> np.ndarray:
    """omega(X) with nabla_X e_j = sum_k omega(X)[k, j] e_k; skew-symmetric."""
    y = _coords(point)
    X = np.asarray(X, dtype=float)
    return 0.5 * (np.outer(y, X) - np.outer(X, y))


class VectorField:
    """Vector field given by its frame components X^l(y).

    ``jacobian`` returns d X^l / d y^m as an (2n, 2n) array; without it,
    central differences of step ``h`` are used.
    """

    def __init__(self, components: Callable[[np.ndarray], np.ndarray],
                 jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 h: float = FD_STEP):
        self.components = components
        self._jacobian = jacobian
        self.h = h

    @classmethod
    def frame(cls, l: int, m: int) -> "VectorField":
        """The frame field e_l (1-based) on S^m's chart."""
        v = np.zeros(m)
        v[l - 1] = 1.0
        zero = np.zeros((m, m))
        return cls(lambda y: v, lambda y: zero)

    @classmethod
    def constant(cls, v) -> "VectorField":
        v = np.array(v, dtype=float)
        zero = np.zeros((v.size, v.size))
        return cls(lambda y: v, lambda y: zero)

    def __call__(self, y) -> np.ndarray:
        return np.asarray(self.components(np.asarray(y, dtype=float)), dtype=float)

    def jacobian(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(y), dtype=float)
        m = y.size
        J = np.empty((m, m))
        for k in range(m):
            d = np.zeros(m)
            d[k] = self.h
            J[:, k] = (self(y + d) - self(y - d)) / (2 * self.h)
        return J

    def frame_jacobian(self, y) -> np.ndarray:
        """F[l, i] = e_i X^l = phi d X^l / d y^i."""
        return conformal_factor(y) * self.jacobian(y)

    def scaled(self, fn: Callable[[np.ndarray], float],
               grad: Callable[[np.ndarray], np.ndarray]) -> "VectorField":
        """The field fn * X, given fn and its coordinate gradient."""
        def comps(y):
            return fn(y) * self(y)

        def jac(y):
            return fn(y) * self.jacobian(y) + np.outer(self(y), grad(y))

        return VectorField(comps, jac, self.h)


def covariant_derivative(X, Y, point) -> np.ndarray:
    """nabla_X Y = sum_l X^l [ sum_j (e_l Y^j) e_j + sum_j Y^j nabla_{e_l} e_j ]."""
    y = _coords(point)
    Xv = X(y) if callable(X) else np.asarray(X, dtype=float)
    Yv = Y(y)
    FY = Y.frame_jacobian(y)
    G = connection_table(y)
    return FY @ Xv + np.einsum("l,j,ljk->k", Xv, Yv, G)


def lie_bracket(X: VectorField, Y: VectorField, point) -> np.ndarray:
    """[X, Y] via coordinate components a = phi X, b = phi Y, pushed back to the frame."""
    y = _coords(point)
    phi = conformal_factor(y)
    dphi = 0.5 * y
    Xv, Yv = X(y), Y(y)
    a, b = phi * Xv, phi * Yv
    Da = np.outer(Xv, dphi) + phi * X.jacobian(y)
    Db = np.outer(Yv, dphi) + phi * Y.jacobian(y)
    return (Db @ a - Da @ b) / phi


def frame_bracket(point, i: int, j: int) -> np.ndarray:
    """[e_i, e_j] = 1/2 (y^i e_j - y^j e_i)."""
    y = _coords(point)
    out = np.zeros(y.size)
    out[j - 1] += 0.5 * y[i - 1]
    out[i - 1] -= 0.5 * y[j - 1]
    return out


def curvature_tensor(point, h: float = 1e-4) -> np.ndarray:
    """R[i, j, k, :] = frame components of R(e_i, e_j) e_k (0-based indices).

    Convention R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y], so
    R(e_1, e_2) e_2 = +e_1 on the unit sphere.  Frame derivatives of the
    connection table are central differences of step ``h``.
    """
    y = _coords(point)
    m = y.size
    phi = conformal_factor(y)
    G = connection_table(y)
    dG = np.empty((m, m, m, m))  # dG[a, j, k, :] = e_a (G[j, k, :])
    for a in range(m):
        d = np.zeros(m)
        d[a] = h
        dG[a] = phi * (connection_table(y + d) - connection_table(y - d)) / (2 * h)
    # nabla_{e_i}(nabla_{e_j} e_k) = e_i(G_jk) + sum_p G_jk^p G_ip
    nn = dG + np.einsum("jkp,ipq->ijkq", G, G)
    brk = G - G.transpose(1, 0, 2)  # [e_i, e_j] components
    R = nn - nn.transpose(1, 0, 2, 3) - np.einsum("ijp,pkq->ijkq", brk, G)
    return R


def curvature(point, i: int, j: int, k: int, h: float = 1e-4) -> np.ndarray:
    """Frame components of R(e_i, e_j) e_k, indices 1-based."""
    y = _coords(point)
    m = y.size
    for idx in (i, j, k):
        if not 1 <= idx <= m:
            raise IndexError(f"frame indices must lie in 1..{m}")
    return curvature_tensor(y, h)[i - 1, j - 1, k - 1]


def sectional_curvature(point, u, v, h: float = 1e-4) -> float:
    """<R(u, v) v, u> / (|u|^2 |v|^2 - <u, v>^2) for frame-component vectors u, v."""
    R = curvature_tensor(point, h)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    num = np.einsum("ijkq,i,j,k,q->", R, u, v, v, u)
    return float(num / ((u @ u) * (v @ v) - (u @ v) ** 2))
