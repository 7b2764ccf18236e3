"""Matrix model of the twistor space J(R^2n) = {A : A^2 = -I}.

Tangent vectors at A are matrices X with AX + XA = 0, normal vectors
commute with A.  The complex structure on the twistor space is left
multiplication by the base point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TOL_MEMBERSHIP = 1e-9

__all__ = [
    "TOL_MEMBERSHIP",
    "NotAComplexStructure",
    "NotTangentError",
    "StepTooLargeError",
    "ComplexStructure",
    "TangentMatrix",
    "make_standard_J0",
    "is_complex_structure",
    "is_orthogonal_structure",
    "tangent_project",
    "normal_project",
    "ambient_inner",
    "ds2",
    "jtilde_apply",
    "covariant_derivative_along",
    "kaehler_residual",
    "torsion_residual",
    "metric_compatibility_residual",
    "adapted_orthonormal_frame",
    "matrix_to_json",
    "matrix_from_json",
]


class NotAComplexStructure(ValueError):
    """Raised when a matrix fails A^2 = -I (or skew-orthogonality when asked)."""


class NotTangentError(ValueError):
    """Raised when a matrix is not tangent to J(R^2n) at the given base."""


class StepTooLargeError(ValueError):
    """Raised when a finite-difference stencil leaves the manifold."""


def _check_square_even(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise ValueError(f"complex structures need even order, got {M.shape[0]}")
    return M


def make_standard_J0(n: int) -> "ComplexStructure":
    """Block-diagonal J0 with 2x2 blocks [[0, -1], [1, 0]], so J0 e_{2i-1} = e_{2i}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    return ComplexStructure(J)


def is_complex_structure(M, tol: float = TOL_MEMBERSHIP) -> bool:
    M = _check_square_even(M)
    return bool(np.linalg.norm(M @ M + np.eye(M.shape[0])) <= tol)


def is_orthogonal_structure(M, tol: float = TOL_MEMBERSHIP) -> bool:
    M = _check_square_even(M)
    I = np.eye(M.shape[0])
    return bool(
        np.linalg.norm(M @ M + I) <= tol
        and np.linalg.norm(M + M.T) <= tol
        and np.linalg.norm(M @ M.T - I) <= tol
    )


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """A real 2n x 2n matrix with A^2 = -I.

    ``orthogonal`` is detected on construction (A^t = -A and AA^t = I).
    The stored array is read-only.
    """

    entries: np.ndarray
    tol: float = TOL_MEMBERSHIP
    orthogonal: bool = field(init=False)

    def __post_init__(self):
        A = _check_square_even(self.entries).copy()
        if not is_complex_structure(A, self.tol):
            res = np.linalg.norm(A @ A + np.eye(A.shape[0]))
            raise NotAComplexStructure(f"||A^2 + I||_F = {res:.3e} exceeds {self.tol:.1e}")
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)
        object.__setattr__(self, "orthogonal", is_orthogonal_structure(A, self.tol))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def inverse(self) -> np.ndarray:
        # A^{-1} = -A on the twistor space
        return -self.entries

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class TangentMatrix:
    """A matrix X at base point A; tangent if AX + XA = 0, normal if AX = XA."""

    base: ComplexStructure
    entries: np.ndarray
    normal: bool = False

    def __post_init__(self):
        X = np.array(self.entries, dtype=float)
        if X.shape != self.base.entries.shape:
            raise ValueError(f"shape {X.shape} does not match base {self.base.entries.shape}")
        X.setflags(write=False)
        object.__setattr__(self, "entries", X)

    def residual(self) -> float:
        """Distance from the tangent (or normal) space, ||AX +- XA||_F."""
        A, X = self.base.entries, self.entries
        return float(np.linalg.norm(A @ X - X @ A if self.normal else A @ X + X @ A))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _base(A) -> ComplexStructure:
    return A if isinstance(A, ComplexStructure) else ComplexStructure(np.asarray(A, dtype=float))


def _entries(X, base: ComplexStructure) -> np.ndarray:
    if isinstance(X, TangentMatrix):
        if X.base is not base and not np.array_equal(X.base.entries, base.entries):
            raise ValueError("tangent matrix is attached to a different base point")
        return X.entries
    X = np.asarray(X, dtype=float)
    if X.shape != base.entries.shape:
        raise ValueError(f"shape {X.shape} does not match base {base.entries.shape}")
    return X


def tangent_project(A, M) -> TangentMatrix:
    """Tangent part (M + AMA)/2 of M at A."""
    A = _base(A)
    M = _entries(M, A)
    a = A.entries
    return TangentMatrix(A, 0.5 * (M + a @ M @ a))


def normal_project(A, M) -> TangentMatrix:
    """Normal part (M - AMA)/2 of M at A; commutes with A."""
    A = _base(A)
    M = _entries(M, A)
    a = A.entries
    return TangentMatrix(A, 0.5 * (M - a @ M @ a), normal=True)


def ambient_inner(A, X, Y) -> float:
    """<X, Y> = 1/2 tr(X Y^t) + 1/2 tr(A X A^{-1} (A Y A^{-1})^t) on gl(2n, R)."""
    A = _base(A)
    X, Y = _entries(X, A), _entries(Y, A)
    a, ainv = A.entries, A.inverse
    CX = a @ X @ ainv
    CY = a @ Y @ ainv
    return float(0.5 * np.sum(X * Y) + 0.5 * np.sum(CX * CY))


def _require_tangent(A: ComplexStructure, X, tol: float) -> np.ndarray:
    X = _entries(X, A)
    if isinstance(X, TangentMatrix):
        X = X.entries
    a = A.entries
    res = np.linalg.norm(a @ X + X @ a)
    if res > tol * max(1.0, np.linalg.norm(X)):
        raise NotTangentError(f"||AX + XA||_F = {res:.3e}: not tangent at A")
    return X


def ds2(A, X, Y, tol: float = TOL_MEMBERSHIP) -> float:
    """Hermitian metric ds^2(X, Y) = 1/2 <X, Y> + 1/2 <AX, AY> on tangent vectors."""
    A = _base(A)
    X = _require_tangent(A, X, tol)
    Y = _require_tangent(A, Y, tol)
    a = A.entries
    return 0.5 * ambient_inner(A, X, Y) + 0.5 * ambient_inner(A, a @ X, a @ Y)


def jtilde_apply(A, X, tol: float = TOL_MEMBERSHIP) -> TangentMatrix:
    """Twistor complex structure X -> AX on T_A J(R^2n)."""
    A = _base(A)
    if isinstance(X, TangentMatrix) and X.normal:
        raise NotTangentError("J~ is applied to tangent vectors, got a normal one")
    X = _require_tangent(A, X, tol)
    return TangentMatrix(A, A.entries @ X)


def _curve_point(curve: Callable[[float], np.ndarray], s: float, tol: float) -> np.ndarray:
    P = np.asarray(curve(s), dtype=float)
    res = np.linalg.norm(P @ P + np.eye(P.shape[0]))
    if res > tol:
        raise StepTooLargeError(f"curve leaves J(R^2n) at s={s:g}: ||A^2 + I|| = {res:.3e}")
    return P


def covariant_derivative_along(curve, field, s: float, h: float = 1e-3,
                               tol: float = TOL_MEMBERSHIP) -> TangentMatrix:
    """Projected derivative of a tangent field along a curve in J(R^2n).

    The ambient derivative dX/ds is taken by central differences of step
    ``h`` and projected onto T_{curve(s)}.

    Parameters
    ----------
    curve : callable
        s -> 2n x 2n matrix in J(R^2n).
    field : callable
        s -> matrix tangent at curve(s).
    s : float
        Curve parameter.
    h : float
        Finite-difference step.

    Raises
    ------
    StepTooLargeError
        If curve(s +- h) drifts off the manifold by more than ``tol``.
    """
    A = ComplexStructure(_curve_point(curve, s, tol), tol=tol)
    _curve_point(curve, s + h, tol)
    _curve_point(curve, s - h, tol)
    dX = (np.asarray(field(s + h)) - np.asarray(field(s - h))) / (2.0 * h)
    return tangent_project(A, dX)


def kaehler_residual(curve, field, s: float, h: float = 1e-3,
                     tol: float = TOL_MEMBERSHIP) -> np.ndarray:
    """Residual matrix D(J~X) - J~(DX) along a curve, with D the projected derivative."""
    A = ComplexStructure(_curve_point(curve, s, tol), tol=tol)

    def jx(t):
        return np.asarray(curve(t)) @ np.asarray(field(t))

    lhs = covariant_derivative_along(curve, jx, s, h, tol).entries
    rhs = A.entries @ covariant_derivative_along(curve, field, s, h, tol).entries
    return lhs - rhs


def torsion_residual(surface, s: float, t: float, h: float = 1e-4,
                     tol: float = TOL_MEMBERSHIP) -> np.ndarray:
    """D_S T - D_T S - [S, T] for the coordinate fields of a surface (s, t) -> A.

    Coordinate fields commute, so the residual is the symmetric difference
    of the two projected mixed derivatives.
    """
    def d_s(u, v):
        return (np.asarray(surface(u + h, v)) - np.asarray(surface(u - h, v))) / (2 * h)

    def d_t(u, v):
        return (np.asarray(surface(u, v + h)) - np.asarray(surface(u, v - h))) / (2 * h)

    DsT = covariant_derivative_along(lambda u: surface(u, t), lambda u: d_t(u, t), s, h, tol)
    DtS = covariant_derivative_along(lambda v: surface(s, v), lambda v: d_s(s, v), t, h, tol)
    return DsT.entries - DtS.entries


def metric_compatibility_residual(curve, field_x, field_y, s: float, h: float = 1e-4,
                                  tol: float = TOL_MEMBERSHIP) -> float:
    """d/ds ds2(X, Y) - ds2(DX, Y) - ds2(X, DY) along a curve.

    Zero on the orthogonal locus; on general J(R^2n) this is reported only.
    """
    def g(u):
        return ds2(ComplexStructure(np.asarray(curve(u)), tol=tol), field_x(u), field_y(u), tol=1e-6)

    A = ComplexStructure(_curve_point(curve, s, tol), tol=tol)
    lhs = (g(s + h) - g(s - h)) / (2 * h)
    DX = covariant_derivative_along(curve, field_x, s, h, tol)
    DY = covariant_derivative_along(curve, field_y, s, h, tol)
    X, Y = np.asarray(field_x(s)), np.asarray(field_y(s))
    rhs = ds2(A, DX.entries, Y, tol=1e-6) + ds2(A, X, DY.entries, tol=1e-6)
    return float(lhs - rhs)


def adapted_orthonormal_frame(A, first=None, tol: float = TOL_MEMBERSHIP) -> np.ndarray:
    """Orthogonal Q with A Q = Q J0 for a skew-orthogonal A.

    Columns come in pairs (v, Av).  ``first`` fixes the leading column;
    remaining pairs are grown from the standard basis in order.
    """
    A = _base(A)
    if not A.orthogonal:
        raise NotAComplexStructure("an orthonormal adapted frame needs a skew-orthogonal structure")
    a = A.entries
    m = a.shape[0]
    cols: list[np.ndarray] = []
    candidates = [] if first is None else [np.asarray(first, dtype=float)]
    candidates += list(np.eye(m))
    for c in candidates:
        if len(cols) == m:
            break
        v = c.copy()
        for _ in range(2):
            for q in cols:
                v -= (q @ v) * q
        nv = np.linalg.norm(v)
        if nv < 1e-6:
            continue
        v /= nv
        cols.extend([v, a @ v])
    Q = np.column_stack(cols)
    if np.linalg.norm(Q.T @ Q - np.eye(m)) > 1e3 * tol:
        raise ArithmeticError("adapted frame lost orthogonality")
    return Q


def matrix_to_json(M) -> str:
    """Array-of-rows JSON for a matrix."""
    return json.dumps(np.asarray(M, dtype=float).tolist())


def matrix_from_json(text: str) -> np.ndarray:
    """Parse an array-of-rows JSON matrix; rejects ragged, non-square, odd-order or non-finite input."""
    rows = json.loads(text)
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ValueError("matrix JSON must be a non-empty array of rows")
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix JSON must be square")
    M = np.array(rows, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix JSON contains non-finite entries")
    return _check_square_even(M)
