"""Almost complex structures on the sphere chart as matrix fields B(y).

Convention: J e_i = sum_j e_j B_ji, so J acts on frame components by B.
Derivatives of B are taken in the frame, e_a B = phi dB/dy^a.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm, expm_frechet

from .matcore import TOL_MEMBERSHIP, NotAComplexStructure, is_complex_structure, is_orthogonal_structure
from .spheregeo import (FD_STEP, VectorField, _coords, conformal_factor, lie_bracket)

__all__ = [
    "ACSField",
    "ComplexVectorField",
    "make_constant_field",
    "make_rotated_field",
    "make_conjugated_field",
    "field_from_spec",
    "nijenhuis_fields",
    "nijenhuis_direct",
    "nijenhuis_formula",
    "nijenhuis_tensor",
    "integrability_residual",
    "bracket10",
    "covderiv10_formula",
    "covderiv10_direct",
    "lebrun_symmetry_norm",
]


class ACSField:
    """Differentiable matrix field y -> B(y) with B^2 = -I.

    Parameters
    ----------
    n : int
        Half the sphere dimension.
    value : callable
        y -> (2n, 2n) matrix.
    derivative : callable, optional
        y -> (2n, 2n, 2n) array with ``[..., m] = dB/dy^m``.  Central
        differences of step ``h`` are used when omitted.
    orthogonal : bool, optional
        Declared orthogonality; detected from B(0) when None.
    spec : dict, optional
        JSON-serializable recipe used by :func:`field_from_spec`.
    """

    _CACHE_SIZE = 512

    def __init__(self, n: int, value: Callable, derivative: Optional[Callable] = None,
                 orthogonal: Optional[bool] = None, spec: Optional[dict] = None,
                 h: float = FD_STEP, tol: float = TOL_MEMBERSHIP):
        self.n = n
        self._value = value
        self._derivative = derivative
        self.h = h
        self.tol = tol
        self.spec = spec
        self._cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
        B0 = self.B(np.zeros(2 * n))
        if B0.shape != (2 * n, 2 * n) or not is_complex_structure(B0, tol):
            raise NotAComplexStructure("field value at the chart origin is not a complex structure")
        detected = is_orthogonal_structure(B0, tol)
        if orthogonal and not detected:
            raise NotAComplexStructure("field declared orthogonal but B(0) is not skew-orthogonal")
        self.orthogonal = detected if orthogonal is None else bool(orthogonal)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def B(self, y) -> np.ndarray:
        return np.asarray(self._value(np.asarray(y, dtype=float)), dtype=float)

    def _coord_derivative(self, y: np.ndarray) -> np.ndarray:
        if self._derivative is not None:
            return np.asarray(self._derivative(y), dtype=float)
        m = y.size
        dB = np.empty((m, m, m))
        for k in range(m):
            d = np.zeros(m)
            d[k] = self.h
            dB[:, :, k] = (self.B(y + d) - self.B(y - d)) / (2 * self.h)
        return dB

    def jet(self, point) -> tuple[np.ndarray, np.ndarray]:
        """(B, D) at a point with D[a] = e_a B, the frame derivative along e_a."""
        y = _coords(point)
        if y.size != self.dim:
            raise ValueError(f"point has dimension {y.size}, field expects {self.dim}")
        key = y.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        B = self.B(y)
        D = conformal_factor(y) * np.moveaxis(self._coord_derivative(y), -1, 0)
        if len(self._cache) >= self._CACHE_SIZE:
            self._cache.clear()
        self._cache[key] = (B, D)
        return B, D

    def directional(self, point, X) -> np.ndarray:
        """XB = sum_a X^a e_a B for frame components X."""
        _, D = self.jet(point)
        return np.tensordot(np.asarray(X, dtype=float), D, axes=1)

    def membership_residual(self, point) -> float:
        B = self.B(_coords(point))
        I = np.eye(self.dim)
        res = np.linalg.norm(B @ B + I)
        if self.orthogonal:
            res = max(res, np.linalg.norm(B + B.T), np.linalg.norm(B @ B.T - I))
        return float(res)

    def column_field(self, i: int, sign: float = 1.0) -> VectorField:
        """sign * J e_i as a vector field (i 1-based)."""
        k = i - 1
        phi_inv = lambda y: 1.0 / conformal_factor(y)

        def comps(y):
            return sign * self.B(y)[:, k]

        def jac(y):
            _, D = self.jet(y)
            # D[a] = phi dB/dy^a, undo the frame scaling
            return sign * phi_inv(y) * D[:, :, k].T

        return VectorField(comps, jac, self.h)

    def to_json(self) -> str:
        if self.spec is None:
            raise ValueError("field has no serializable recipe")
        return json.dumps(self.spec, sort_keys=True)


def _as_square(B0) -> np.ndarray:
    B0 = np.asarray(B0, dtype=float)
    if B0.ndim != 2 or B0.shape[0] != B0.shape[1] or B0.shape[0] % 2:
        raise ValueError("B0 must be a square matrix of even order")
    return B0


def make_constant_field(B0, tol: float = TOL_MEMBERSHIP) -> ACSField:
    """B(y) = B0 everywhere; integrable in the conformally flat chart."""
    B0 = _as_square(B0)
    if not is_complex_structure(B0, tol):
        raise NotAComplexStructure("B0^2 != -I")
    m = B0.shape[0]
    zero = np.zeros((m, m, m))
    B0c = B0.copy()
    spec = {"kind": "constant", "B0": B0.tolist()}
    return ACSField(m // 2, lambda y: B0c, lambda y: zero, spec=spec, tol=tol)


def make_conjugated_field(B0, S, scale: float = 1.0, tol: float = TOL_MEMBERSHIP,
                          _kind: str = "conjugated") -> ACSField:
    """B(y) = G(y) B0 G(y)^{-1} with G(y) = exp(scale sum_k y^k S_k).

    Derivatives are exact via the Frechet derivative of the matrix exponential.
    """
    B0 = _as_square(B0)
    if not is_complex_structure(B0, tol):
        raise NotAComplexStructure("B0^2 != -I")
    m = B0.shape[0]
    S = np.asarray(S, dtype=float)
    if S.shape != (m, m, m):
        raise ValueError(f"need {m} generator matrices of order {m}, got shape {S.shape}")
    B0c, Sc = B0.copy(), S.copy()

    def gen(y):
        return scale * np.tensordot(y, Sc, axes=1)

    def value(y):
        W = gen(y)
        return expm(W) @ B0c @ expm(-W)

    def derivative(y):
        W = gen(y)
        G, Gi = expm(W), expm(-W)
        out = np.empty((m, m, m))
        for k in range(m):
            dG = expm_frechet(W, scale * Sc[k], compute_expm=False)
            # d(G^{-1}) = -G^{-1} dG G^{-1}
            out[:, :, k] = dG @ B0c @ Gi - G @ B0c @ Gi @ dG @ Gi
        return out

    spec = {"kind": _kind, "B0": B0.tolist(), "S": S.tolist(), "scale": float(scale)}
    return ACSField(m // 2, value, derivative, spec=spec, tol=tol)


def make_rotated_field(B0, S, scale: float = 1.0, tol: float = TOL_MEMBERSHIP) -> ACSField:
    """Orthogonal field B(y) = R(y) B0 R(y)^t, R(y) = exp(scale sum_k y^k S_k), S_k skew."""
    B0 = _as_square(B0)
    if not is_orthogonal_structure(B0, tol):
        raise NotAComplexStructure("B0 must be skew-orthogonal with B0^2 = -I")
    S = np.asarray(S, dtype=float)
    if S.ndim != 3 or np.linalg.norm(S + S.transpose(0, 2, 1)) > tol:
        raise ValueError("rotation generators must be skew matrices")
    f = make_conjugated_field(B0, S, scale, tol, _kind="rotated")
    f.orthogonal = True
    return f


def field_from_spec(spec) -> ACSField:
    """Rebuild a field from its JSON recipe (dict or JSON text)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec["kind"]
    if kind == "constant":
        return make_constant_field(spec["B0"])
    if kind == "rotated":
        return make_rotated_field(spec["B0"], spec["S"], spec.get("scale", 1.0))
    if kind == "conjugated":
        return make_conjugated_field(spec["B0"], spec["S"], spec.get("scale", 1.0))
    raise ValueError(f"unknown field kind {kind!r}")


def nijenhuis_fields(field: ACSField, X: VectorField, Y: VectorField, point) -> np.ndarray:
    """N(X, Y) = [JX, JY] - J[JX, Y] - J[X, JY] - [X, Y] from Lie brackets."""
    y = _coords(point)
    B, _ = field.jet(y)
    JX = _apply_field(field, X)
    JY = _apply_field(field, Y)
    return (lie_bracket(JX, JY, y) - B @ lie_bracket(JX, Y, y)
            - B @ lie_bracket(X, JY, y) - lie_bracket(X, Y, y))


def _apply_field(field: ACSField, X: VectorField) -> VectorField:
    """The vector field JX, with its jacobian by the product rule."""
    def comps(y):
        return field.B(y) @ X(y)

    def jac(y):
        B, D = field.jet(y)
        dB = D / conformal_factor(y)  # coordinate derivatives, first axis = direction
        return np.einsum("mlk,k->lm", dB, X(y)) + B @ X.jacobian(y)

    return VectorField(comps, jac, field.h)


def nijenhuis_direct(field: ACSField, point, i: int, j: int) -> np.ndarray:
    """N(e_i, e_j) from the bracket definition, frame indices 1-based."""
    m = field.dim
    return nijenhuis_fields(field, VectorField.frame(i, m), VectorField.frame(j, m), point)


def _derivative_terms(field: ACSField, point):
    B, D = field.jet(point)
    # DJ[i] = (J e_i) B = sum_a B[a, i] e_a B
    DJ = np.einsum("ai,akl->ikl", B, D)
    return B, D, DJ


def nijenhuis_formula(field: ACSField, point, i: int, j: int) -> np.ndarray:
    """Closed form N(e_i, e_j) = sum e_k[(Je_i)B_kj - (Je_j)B_ki] - sum Je_k[e_i B_kj - e_j B_ki]."""
    B, D, DJ = _derivative_terms(field, point)
    i, j = i - 1, j - 1
    v = DJ[i][:, j] - DJ[j][:, i]
    w = D[i][:, j] - D[j][:, i]
    return v - B @ w


def nijenhuis_tensor(field: ACSField, point) -> np.ndarray:
    """All components N[i, j, :] (0-based) from the closed form."""
    B, D, DJ = _derivative_terms(field, point)
    V = np.einsum("ikj->ijk", DJ)  # V[i, j, k] = (Je_i) B_kj
    W = np.einsum("ikj->ijk", D)
    v = V - V.transpose(1, 0, 2)
    w = W - W.transpose(1, 0, 2)
    return v - np.einsum("kl,ijl->ijk", B, w)


def integrability_residual(field: ACSField, point, i: int, j: int, form: int = 1) -> np.ndarray:
    """Integrability residual for the pair (e_i, e_j).

    form=1 : sum e_k[e_i B_kj - e_j B_ki] + sum Je_k[(Je_i)B_kj - (Je_j)B_ki]
             (equals J N(e_i, e_j), valid for every field).
    form=2 : sum e_k (e_i B_kj) + sum Je_k (Je_i) B_kj, orthogonal fields only;
             it vanishes for all (i, j) at a point exactly when N does.
    """
    B, D, DJ = _derivative_terms(field, point)
    i, j = i - 1, j - 1
    if form == 1:
        v = DJ[i][:, j] - DJ[j][:, i]
        w = D[i][:, j] - D[j][:, i]
        return w + B @ v
    if form == 2:
        if not field.orthogonal:
            raise ValueError("the second integrability form needs an orthogonal field")
        return D[i][:, j] + B @ DJ[i][:, j]
    raise ValueError(f"form must be 1 or 2, got {form}")


@dataclass(frozen=True)
class ComplexVectorField:
    real: VectorField
    imag: VectorField

    def __call__(self, y) -> np.ndarray:
        return self.real(y) + 1j * self.imag(y)


def ten_field(field: ACSField, i: int) -> ComplexVectorField:
    """X_i = e_i - sqrt(-1) J e_i, a (1,0) field."""
    return ComplexVectorField(VectorField.frame(i, field.dim), field.column_field(i, sign=-1.0))


def complex_bracket(X: ComplexVectorField, Y: ComplexVectorField, point) -> np.ndarray:
    r = lie_bracket(X.real, Y.real, point) - lie_bracket(X.imag, Y.imag, point)
    im = lie_bracket(X.real, Y.imag, point) + lie_bracket(X.imag, Y.real, point)
    return r + 1j * im


def complex_covariant_derivative(X: ComplexVectorField, Y: ComplexVectorField, point) -> np.ndarray:
    from .spheregeo import covariant_derivative as cd
    r = cd(X.real, Y.real, point) - cd(X.imag, Y.imag, point)
    im = cd(X.real, Y.imag, point) + cd(X.imag, Y.real, point)
    return r + 1j * im


def _ten_derivative(B, D, DJ, i):
    """(X_i) B = e_i B - sqrt(-1) (J e_i) B as a complex matrix."""
    return D[i] - 1j * DJ[i]


def bracket10(field: ACSField, point, i: int, j: int, mode: str = "direct") -> np.ndarray:
    """[X_i, X_j] for X_k = e_k - sqrt(-1) J e_k, as complex frame components."""
    if mode == "direct":
        return complex_bracket(ten_field(field, i), ten_field(field, j), point)
    if mode != "formula":
        raise ValueError(f"mode must be 'direct' or 'formula', got {mode!r}")
    y = _coords(point)
    B, D, DJ = _derivative_terms(field, y)
    i, j = i - 1, j - 1
    X = np.eye(field.dim) - 1j * B  # column k is X_k
    By = B.T @ y  # (B^t y)_j = sum_k y^k B_kj
    out = -1j * _ten_derivative(B, D, DJ, i)[:, j] + 1j * _ten_derivative(B, D, DJ, j)[:, i]
    out = out - 0.5 * (y[j] - 1j * By[j]) * X[:, i] + 0.5 * (y[i] - 1j * By[i]) * X[:, j]
    return out


def covderiv10_formula(field: ACSField, point, i: int, j: int) -> np.ndarray:
    """Closed form of nabla_{X_i} X_j (complex frame components, indices 1-based)."""
    y = _coords(point)
    B, D, DJ = _derivative_terms(field, y)
    i, j = i - 1, j - 1
    X = np.eye(field.dim) - 1j * B
    By = B.T @ y
    BtB = B.T @ B
    out = -1j * _ten_derivative(B, D, DJ, i)[:, j] - 0.5 * (y[j] - 1j * By[j]) * X[:, i]
    coeff = float(i == j) - BtB[i, j] - 1j * (B[i, j] + B[j, i])
    return out + 0.5 * coeff * y


def covderiv10_direct(field: ACSField, point, i: int, j: int) -> np.ndarray:
    """nabla_{X_i} X_j from the sphere's Levi-Civita connection on complexified fields."""
    return complex_covariant_derivative(ten_field(field, i), ten_field(field, j), point)


def lebrun_symmetry_norm(field: ACSField, point, i: int, j: int) -> float:
    """|| nabla_{X_i} X_j + nabla_{X_j} X_i || for an orthogonal field.

    Would vanish identically if nabla_{X_i} X_j = -nabla_{X_j} X_i held for
    (1,0) fields.
    """
    if not field.orthogonal:
        raise ValueError("symmetry norm is defined for orthogonal fields")
    s = covderiv10_formula(field, point, i, j) + covderiv10_formula(field, point, j, i)
    return float(np.linalg.norm(s))
