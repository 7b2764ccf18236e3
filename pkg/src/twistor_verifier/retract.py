"""Deformation retraction of J(R^2n) onto the orthogonal structures.

Every A with A^2 = -I splits as A = BP + A2 with A2 symmetric, P symmetric
positive definite, and B skew-orthogonal.  The path
A(t) = B (I + t^2 A2^2)^{1/2} + t A2 stays inside J(R^2n) and joins B to A.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import TOL_MEMBERSHIP, ComplexStructure, NotAComplexStructure

__all__ = ["RetractDecomposition", "decompose", "path", "retract_to_orthogonal"]


@dataclass(frozen=True, eq=False)
class RetractDecomposition:
    A: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    P: np.ndarray
    lam: np.ndarray
    eigvecs: np.ndarray

    def residuals(self) -> dict[str, float]:
        """Frobenius norms of every defining identity; all should vanish."""
        A, A1, A2, B, P = self.A, self.A1, self.A2, self.B, self.P
        I = np.eye(A.shape[0])
        nrm = np.linalg.norm
        return {k: float(v) for k, v in {
            "sum": nrm(A1 + A2 - A),
            "A1_skew": nrm(A1 + A1.T),
            "A2_sym": nrm(A2 - A2.T),
            "square": nrm(A1 @ A1 + A2 @ A2 + I),
            "anticommute": nrm(A1 @ A2 + A2 @ A1),
            "polar": nrm(B @ P - A1),
            "BP_commute": nrm(B @ P - P @ B),
            "PA2_commute": nrm(P @ A2 - A2 @ P),
            "BA2_anticommute": nrm(B @ A2 + A2 @ B),
            "B_square": nrm(B @ B + I),
            "B_skew": nrm(B + B.T),
            "B_orthogonal": nrm(B @ B.T - I),
            "P_squared": nrm(P @ P + A1 @ A1),
        }.items()}

    def max_residual(self) -> float:
        return max(self.residuals().values())

    def spectral_asymmetry(self) -> float:
        """max |sorted(lam) + sorted(-lam)| -- eigenvalues of A2 come in +- pairs."""
        lam = np.sort(self.lam)
        return float(np.max(np.abs(lam + lam[::-1]))) if lam.size else 0.0


def decompose(A, tol: float = TOL_MEMBERSHIP) -> RetractDecomposition:
    """Split A into skew part A1 = BP and symmetric part A2.

    P = (I + A2^2)^{1/2} is built from the eigendecomposition of A2, and
    B = A1 P^{-1} is applied in the same eigenbasis.  The eigenvalues of P
    are >= 1, so no ill-conditioned inverse appears.
    """
    A = A.entries if isinstance(A, ComplexStructure) else np.asarray(A, dtype=float)
    ComplexStructure(A, tol=tol)
    A1 = 0.5 * (A - A.T)
    A2 = 0.5 * (A + A.T)
    lam, V = np.linalg.eigh(A2)
    p = np.sqrt(1.0 + lam * lam)
    if np.min(p) <= 0.0 or not np.all(np.isfinite(p)):
        raise NotAComplexStructure("polar factor is numerically singular")
    P = (V * p) @ V.T
    B = A1 @ ((V / p) @ V.T)
    return RetractDecomposition(A=A, A1=A1, A2=A2, B=B, P=P, lam=lam, eigvecs=V)


def path(A, t: float, tol: float = TOL_MEMBERSHIP) -> np.ndarray:
    """A(t) = B (I + t^2 A2^2)^{1/2} + t A2 for t in [0, 1]; A(0) = B, A(1) = A."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    d = A if isinstance(A, RetractDecomposition) else decompose(A, tol)
    V, lam = d.eigvecs, d.lam
    Pt = (V * np.sqrt(1.0 + (t * lam) ** 2)) @ V.T
    return d.B @ Pt + t * d.A2


def retract_to_orthogonal(M, tol: float = 1e-12) -> np.ndarray:
    """Polar factor B = M (M^t M)^{-1/2} of a nonsingular skew matrix.

    B is skew, orthogonal and squares to -I.  Used as the retraction
    R_A(V) = retract_to_orthogonal(A + V) on the orthogonal twistor space.
    Stacks of matrices (shape (..., m, m)) are handled elementwise.
    """
    M = np.asarray(M, dtype=float)
    Mt = np.swapaxes(M, -1, -2)
    scale = np.maximum(1.0, np.linalg.norm(M, axis=(-2, -1)))
    if np.any(np.linalg.norm(M + Mt, axis=(-2, -1)) > 1e-8 * scale):
        raise ValueError("retract_to_orthogonal expects a skew matrix")
    w, V = np.linalg.eigh(Mt @ M)
    if np.any(w[..., 0] <= tol * np.maximum(1.0, w[..., -1])):
        raise np.linalg.LinAlgError("skew matrix is singular")
    return M @ ((V / np.sqrt(w)[..., None, :]) @ np.swapaxes(V, -1, -2))
