"""Twistor sections of S^2n inside J(R^{2n+2}).

A field B on the chart gives the section
f = e0 e_{-1}^t - e_{-1} e0^t + E B E^t, where E holds the ambient frame.
Its differential splits into a vertical part E(XB + [omega(X), B])E^t and
the horizontal lift M_X + f M_X f with M_X = e_X e_{-1}^t - e_{-1} e_X^t.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acsfield import ACSField
from .matcore import adapted_orthonormal_frame
from .spheregeo import FrameData, _coords, conformal_factor, connection_matrix, embed

__all__ = [
    "SectionValue",
    "TangentSplit",
    "embed_section",
    "frame_generators",
    "adapted_generators",
    "horizontal_lift",
    "pushforward",
    "vertical_part",
    "split",
    "decomposition_residual",
    "holomorphy_residual",
    "lemma33_check",
]

FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SectionValue:
    f: np.ndarray
    frame: FrameData
    B: np.ndarray
    orthogonal: bool

    @property
    def e_minus1(self) -> np.ndarray:
        return self.frame.e_minus1

    def membership_residual(self) -> float:
        I = np.eye(self.f.shape[0])
        return float(np.linalg.norm(self.f @ self.f + I))

    def projection_residual(self) -> float:
        """|| f e_{-1} - e0 ||, the bundle projection check."""
        return float(np.linalg.norm(self.f @ self.e_minus1 - self.frame.e0))


@dataclass(frozen=True, eq=False)
class TangentSplit:
    vertical: np.ndarray
    horizontal: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.vertical + self.horizontal


def _section_matrix(fd: FrameData, B: np.ndarray) -> np.ndarray:
    em1, e0, E = fd.e_minus1, fd.e0, fd.frame
    return np.outer(e0, em1) - np.outer(em1, e0) + E @ B @ E.T


def embed_section(field: ACSField, point) -> SectionValue:
    y = _coords(point)
    if y.size != field.dim:
        raise ValueError(f"point dimension {y.size} does not match field dimension {field.dim}")
    fd = embed(y)
    B, _ = field.jet(y)
    return SectionValue(f=_section_matrix(fd, B), frame=fd, B=B, orthogonal=field.orthogonal)


def _frame_vector(field: ACSField, X) -> np.ndarray:
    if isinstance(X, (int, np.integer)):
        v = np.zeros(field.dim)
        v[X - 1] = 1.0
        return v
    v = np.asarray(X, dtype=float).reshape(-1)
    if v.size != field.dim:
        raise ValueError(f"tangent vector has {v.size} components, expected {field.dim}")
    return v


def pushforward(field: ACSField, point, X, h: float = FD_STEP) -> np.ndarray:
    """f_* X = X f by central differences of the whole section matrix.

    ``X`` is a 1-based frame index or a vector of frame components.  The
    chart step is y +- h phi(y) X, since e_l = phi d/dy^l.
    """
    y = _coords(point)
    v = _frame_vector(field, X)
    d = h * conformal_factor(y) * v
    if not np.any(v):
        return np.zeros((field.dim + 2, field.dim + 2))
    fp = _section_matrix(embed(y + d), field.B(y + d))
    fm = _section_matrix(embed(y - d), field.B(y - d))
    return (fp - fm) / (2 * h)


def vertical_part(field: ACSField, point, X) -> np.ndarray:
    """nabla_X J_f = E (XB + omega(X) B - B omega(X)) E^t; annihilates e_{-1}."""
    y = _coords(point)
    v = _frame_vector(field, X)
    B, _ = field.jet(y)
    w = connection_matrix(y, v)
    E = embed(y).frame
    return E @ (field.directional(y, v) + w @ B - B @ w) @ E.T


def horizontal_lift(sv: SectionValue, X) -> np.ndarray:
    """X^ = M_X + f M_X f with M_X = e_X e_{-1}^t - e_{-1} e_X^t."""
    ex = sv.frame.ambient(np.asarray(X, dtype=float))
    em1 = sv.e_minus1
    M = np.outer(ex, em1) - np.outer(em1, ex)
    return M + sv.f @ M @ sv.f


def split(field: ACSField, point, X) -> TangentSplit:
    sv = embed_section(field, point)
    v = _frame_vector(field, X)
    return TangentSplit(vertical=vertical_part(field, point, v), horizontal=horizontal_lift(sv, v))


def decomposition_residual(field: ACSField, point, X, h: float = FD_STEP) -> float:
    """|| f_* X - vertical - horizontal ||_F."""
    s = split(field, point, X)
    return float(np.linalg.norm(pushforward(field, point, X, h) - s.total))


def holomorphy_residual(field: ACSField, point, l: int, h: float = FD_STEP) -> np.ndarray:
    """(J~ f_* - f_* J_f) e_l = f (f_* e_l) - f_*(J_f e_l)."""
    sv = embed_section(field, point)
    fe = pushforward(field, point, l, h)
    fje = pushforward(field, point, sv.B[:, l - 1], h)
    return sv.f @ fe - fje


def lemma33_check(field: ACSField, point, X, h: float = FD_STEP) -> float:
    """|| (f f_* X) e_{-1} - J_f X || in R^{2n+2}: pi_* J~ f_* reproduces J_f."""
    sv = embed_section(field, point)
    v = _frame_vector(field, X)
    lhs = sv.f @ pushforward(field, point, v, h) @ sv.e_minus1
    return float(np.linalg.norm(lhs - sv.frame.ambient(sv.B @ v)))


def frame_generators(frame: np.ndarray) -> dict[str, list[np.ndarray]]:
    """Vertical (alpha, beta) and horizontal (X~) generators from an adapted frame.

    ``frame`` has columns (e_{-1}, e_0, e_1, ..., e_2n), orthonormal, with the
    structure A = sum_i (e_{2i} e_{2i-1}^t - e_{2i-1} e_{2i}^t), i = 0..n.
    """
    m = frame.shape[1] - 2
    n = m // 2
    em1, e0 = frame[:, 0], frame[:, 1]
    e = {l: frame[:, l + 1] for l in range(1, m + 1)}
    o = np.outer
    alpha, beta, alpha_idx = [], [], []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            a1, a2 = e[2 * i - 1], e[2 * i]
            b1, b2 = e[2 * j - 1], e[2 * j]
            alpha.append(o(b1, a1) - o(b2, a2) - o(a1, b1) + o(a2, b2))
            beta.append(o(b2, a1) + o(b1, a2) - o(a2, b1) - o(a1, b2))
            alpha_idx.append((i, j))
    horiz = []
    for i in range(1, n + 1):
        a1, a2 = e[2 * i - 1], e[2 * i]
        horiz.append(o(a1, em1) - o(em1, a1) + o(e0, a2) - o(a2, e0))
        horiz.append(o(a2, em1) - o(em1, a2) - o(e0, a1) + o(a1, e0))
    return {"alpha": alpha, "beta": beta, "horizontal": horiz, "pairs": alpha_idx}


def adapted_generators(sv: SectionValue) -> dict:
    """Generators of T^V and T^H at an orthogonal section value.

    The chart frame is rotated by Q (with B Q = Q J0) so that the section
    takes the adapted form; ``Q`` is returned alongside the generators so
    that pi_*(X~_l) = sum_k Q[k, l] e_k.
    """
    if not sv.orthogonal:
        raise ValueError("adapted generators are defined for orthogonal sections")
    Q = adapted_orthonormal_frame(sv.B)
    frame = np.column_stack([sv.e_minus1, sv.frame.e0, sv.frame.frame @ Q])
    out = frame_generators(frame)
    out["Q"] = Q
    out["frame"] = frame
    return out
