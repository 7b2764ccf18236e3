"""Characteristic-number arithmetic and the height function on the twistor space.

The index computations are exact (``fractions.Fraction``).  The Morse part
works on the orthogonal twistor space of S^2n realised as skew-orthogonal
complex structures on R^{2n+2}, with e_{-1} = (1, 0, ...) and
e_0 = (0, 1, 0, ...).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .matcore import adapted_orthonormal_frame, is_orthogonal_structure
from .retract import retract_to_orthogonal
from .twistorsec import frame_generators

EULER_CHARACTERISTIC_SPHERE = 2

__all__ = [
    "EULER_CHARACTERISTIC_SPHERE",
    "IntPoly",
    "IndexValue",
    "MorseState",
    "power_sum_in_elementary",
    "newton_chern_identity",
    "chern_character_coefficient",
    "signature_index",
    "dolbeault_index_s4",
    "poincare_polynomial",
    "height_plane",
    "morse_h",
    "morse_gradient",
    "morse_hessian_spectrum",
    "fiber_second_differences",
    "critical_structure",
    "gradient_ascent",
]


# --- exact arithmetic -------------------------------------------------------

@dataclass(frozen=True)
class IntPoly:
    """Integer polynomial in t, coefficients listed by increasing degree."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0,))

    @classmethod
    def monomial_plus_one(cls, degree: int) -> "IntPoly":
        c = [0] * (degree + 1)
        c[0] += 1
        c[degree] += 1
        return cls(tuple(c))

    @property
    def degree(self) -> int:
        return -1 if self.coeffs == (0,) else len(self.coeffs) - 1

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(tuple(out))

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __str__(self) -> str:
        terms = []
        for d, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "1" if d == 0 else ("t" if d == 1 else f"t^{d}")
            terms.append(mono if c == 1 and d else (str(c) if d == 0 else f"{c}*{mono}"))
        return " + ".join(terms) or "0"


class IndexValue(NamedTuple):
    value: Fraction
    integral: bool


def power_sum_in_elementary(k: int) -> dict[tuple[int, ...], Fraction]:
    """p_k as a polynomial in e_1..e_k via Newton's identities.

    Returned as {exponent tuple (a_1..a_k): coefficient}, meaning
    coeff * e_1^a_1 * ... * e_k^a_k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def mono(idx: int) -> tuple[int, ...]:
        t = [0] * k
        t[idx - 1] = 1
        return tuple(t)

    def mul(p, q):
        out: dict[tuple[int, ...], Fraction] = {}
        for a, ca in p.items():
            for b, cb in q.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, Fraction(0)) + ca * cb
        return {m: c for m, c in out.items() if c}

    def add(p, q, s=1):
        out = dict(p)
        for m, c in q.items():
            out[m] = out.get(m, Fraction(0)) + s * c
        return {m: c for m, c in out.items() if c}

    p: list[dict] = [{}]
    for j in range(1, k + 1):
        # p_j = sum_{i=1}^{j-1} (-1)^{i-1} e_i p_{j-i} + (-1)^{j-1} j e_j
        acc: dict[tuple[int, ...], Fraction] = {mono(j): Fraction((-1) ** (j - 1) * j)}
        for i in range(1, j):
            acc = add(acc, mul({mono(i): Fraction(1)}, p[j - i]), (-1) ** (i - 1))
        p.append(acc)
    return p[k]


def newton_chern_identity(n: int) -> Fraction:
    """Coefficient c with p_n = c e_n once e_1 = ... = e_{n-1} = 0.

    Equals (-1)^{n-1} n, so that ch_n = p_n / n! = (-1)^{n-1} c_n / (n-1)!.
    """
    poly = power_sum_in_elementary(n)
    total = Fraction(0)
    for mono, c in poly.items():
        if any(mono[:-1]):
            continue
        if mono[-1] != 1:
            raise ArithmeticError("unexpected power of e_n in p_n")
        total += c
    return total


def chern_character_coefficient(n: int) -> Fraction:
    """ch_n(E) / c_n(E) for a bundle with c_1 = ... = c_{n-1} = 0."""
    return newton_chern_identity(n) / math.factorial(n)


def signature_index(n: int, euler: int = EULER_CHARACTERISTIC_SPHERE) -> IndexValue:
    """Index of the signature operator twisted by T^{(1,0)}S^2n.

    2^n ch_n(E) integrated with int c_n = chi(S^2n) = 2, giving
    (-2)^{n+1} / (n-1)!.  Defined for n >= 2.
    """
    if n < 2:
        raise ValueError("the index formula is used for n >= 2")
    value = 2 ** n * chern_character_coefficient(n) * euler
    return IndexValue(value, value.denominator == 1)


def dolbeault_index_s4(c2: int = EULER_CHARACTERISTIC_SPHERE, c1_squared: int = 0) -> IndexValue:
    """Todd genus (c_1^2 + c_2)/12 of a hypothetical almost complex S^4."""
    value = Fraction(c1_squared + c2, 12)
    return IndexValue(value, value.denominator == 1)


def poincare_polynomial(n: int) -> IntPoly:
    """(1 + t^2)(1 + t^4)...(1 + t^{2n})."""
    if n < 1:
        raise ValueError("n must be >= 1")
    P = IntPoly((1,))
    for k in range(1, n + 1):
        P = P * IntPoly.monomial_plus_one(2 * k)
    return P


# --- Morse theory on the orthogonal twistor space ----------------------------

@dataclass(frozen=True, eq=False)
class MorseState:
    A: np.ndarray
    h: float
    grad_norm: float


def height_plane(n: int) -> np.ndarray:
    """K = e0 e_{-1}^t - e_{-1} e0^t in gl(2n+2)."""
    K = np.zeros((2 * n + 2, 2 * n + 2))
    K[1, 0] = 1.0
    K[0, 1] = -1.0
    return K


def _check_order(A: np.ndarray) -> int:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] < 4:
        raise ValueError(f"expected a square matrix of even order >= 4, got {A.shape}")
    return A.shape[0] // 2 - 1


def morse_h(A) -> float:
    """h(A) = tr(A K^t) = 2 <A e_{-1}, e_0>, with values in [-2, 2]."""
    A = np.asarray(A, dtype=float)
    n = _check_order(A)
    return float(np.sum(A * height_plane(n)))


def morse_gradient(A) -> np.ndarray:
    """Riemannian gradient (K + AKA)/2 for the trace metric; vanishes iff A e_{-1} = +-e_0."""
    A = np.asarray(A, dtype=float)
    K = height_plane(_check_order(A))
    return 0.5 * (K + A @ K @ A)


def morse_state(A) -> MorseState:
    return MorseState(np.asarray(A, dtype=float), morse_h(A), float(np.linalg.norm(morse_gradient(A))))


def critical_structure(n: int, sign: int = 1, rng: np.random.Generator | None = None) -> np.ndarray:
    """A skew-orthogonal structure with A e_{-1} = sign * e_0.

    The complement of span(e_{-1}, e_0) carries Q J0 Q^t, with Q random if
    ``rng`` is given and the identity otherwise.
    """
    m = 2 * n
    C = np.zeros((m, m))
    for i in range(n):
        C[2 * i + 1, 2 * i] = 1.0
        C[2 * i, 2 * i + 1] = -1.0
    if rng is not None:
        from .sampling import random_orthogonal
        Q = random_orthogonal(rng, m)
        C = Q @ C @ Q.T
    A = np.zeros((m + 2, m + 2))
    A[1, 0] = sign
    A[0, 1] = -sign
    A[2:, 2:] = C
    return A


def _critical_frame(A: np.ndarray) -> np.ndarray:
    em1 = np.zeros(A.shape[0])
    em1[0] = 1.0
    return adapted_orthonormal_frame(A, first=em1)


def _second_difference(A: np.ndarray, V: np.ndarray, s: float) -> float:
    hp = morse_h(retract_to_orthogonal(A + s * V))
    hm = morse_h(retract_to_orthogonal(A - s * V))
    return (hp - 2.0 * morse_h(A) + hm) / (s * s)


def _curvature_along(A, V, steps: Sequence[float]) -> float:
    s1, s2 = steps
    q1, q2 = _second_difference(A, V, s1), _second_difference(A, V, s2)
    r = s1 / s2
    return (r * r * q2 - q1) / (r * r - 1.0)


def morse_hessian_spectrum(A, steps: Sequence[float] = (1e-3, 5e-4),
                           grad_tol: float = 1e-9) -> tuple[np.ndarray, int]:
    """Eigenvalues and index of the transverse Hessian of h at a critical point.

    Second derivatives of h along retraction curves s -> R(A + sV) are taken
    by Richardson-extrapolated central second differences, for V ranging over
    the horizontal generators X~_l.  These are the lifts of an orthonormal
    frame of the sphere, so the eigenvalues are in the sphere's normalisation.
    """
    A = np.asarray(A, dtype=float)
    if not is_orthogonal_structure(A):
        raise ValueError("Morse analysis runs on skew-orthogonal structures")
    g = np.linalg.norm(morse_gradient(A))
    if g > grad_tol:
        raise ValueError(f"not a critical point: |grad h| = {g:.3e}")
    H = frame_generators(_critical_frame(A))["horizontal"]
    m = len(H)
    q = np.array([_curvature_along(A, V, steps) for V in H])
    Hess = np.diag(q)
    for a in range(m):
        for b in range(a + 1, m):
            qab = _curvature_along(A, H[a] + H[b], steps)
            Hess[a, b] = Hess[b, a] = 0.5 * (qab - q[a] - q[b])
    eig = np.linalg.eigvalsh(Hess)
    return eig, int(np.sum(eig < 0))


def fiber_second_differences(A, steps: Sequence[float] = (1e-3, 5e-4)) -> np.ndarray:
    """Second derivatives of h along the vertical generators alpha_ij, beta_ij."""
    A = np.asarray(A, dtype=float)
    gens = frame_generators(_critical_frame(A))
    return np.array([_curvature_along(A, V, steps) for V in gens["alpha"] + gens["beta"]])


def gradient_ascent(A0, step: float = 1e-2, target: float = 2.0 - 1e-6,
                    max_steps: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Retraction-based ascent A <- R(A + step * grad h(A)) until h >= target.

    ``A0`` is one structure or a stack of them; each is iterated until it
    reaches ``target`` or ``max_steps``.  Returns final heights and step counts.
    """
    A = np.array(A0, dtype=float)
    single = A.ndim == 2
    A = A.reshape((-1,) + A.shape[-2:])
    K = height_plane(_check_order(A[0]))
    steps = np.zeros(len(A), dtype=int)
    heights = np.einsum("kab,ab->k", A, K)
    active = heights < target
    while np.any(active) and steps.max() < max_steps:
        Aa = A[active]
        grad = 0.5 * (K + Aa @ K @ Aa)
        A[active] = retract_to_orthogonal(Aa + step * grad)
        steps[active] += 1
        heights = np.einsum("kab,ab->k", A, K)
        active = heights < target
    if single:
        return heights[0], steps[0]
    return heights, steps
