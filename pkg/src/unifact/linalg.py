"""2x2 complex matrix algebra.

Two layers live here:

* :class:`Mat2` / :class:`ElementaryFactor` -- single matrices whose entries
  may be Python complex numbers or exact :class:`~unifact.exact.ExactComplex`
  values.  Used by the exact checks and the ``eliminate`` command.
* array functions -- everything batched over leading axes of a ``(..., 2, 2)``
  complex array.  The sampled pipeline only uses these.

Closed forms are used throughout (determinant, adjugate, singular values,
exponential); nothing iterates except the logarithm series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import OutOfRadius, SingularMatrix
from .exact import ExactComplex, exact, normalize

LOG_RADIUS = 0.5
_SERIES_CUTOFF = 1e-16


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, ExactComplex)) and not isinstance(x, bool)


@dataclass(frozen=True)
class Mat2:
    a11: Any
    a12: Any
    a21: Any
    a22: Any

    @classmethod
    def identity(cls, exact_backend: bool = False) -> "Mat2":
        one, zero = (1, 0) if exact_backend else (1.0 + 0j, 0j)
        return cls(one, zero, zero, one)

    @classmethod
    def from_rows(cls, rows) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def from_array(cls, arr) -> "Mat2":
        arr = np.asarray(arr, dtype=complex)
        return cls(complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 0]), complex(arr[1, 1]))

    def to_exact(self) -> "Mat2":
        return Mat2(*(exact(x) for x in self.entries()))

    def entries(self) -> tuple:
        return (self.a11, self.a12, self.a21, self.a22)

    def to_array(self) -> np.ndarray:
        return np.array([[complex(self.a11), complex(self.a12)],
                         [complex(self.a21), complex(self.a22)]])

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(x) for x in self.entries())

    def __matmul__(self, o: "Mat2") -> "Mat2":
        out = (self.a11 * o.a11 + self.a12 * o.a21, self.a11 * o.a12 + self.a12 * o.a22,
               self.a21 * o.a11 + self.a22 * o.a21, self.a21 * o.a12 + self.a22 * o.a22)
        if self.is_exact and o.is_exact:
            out = tuple(normalize(x) for x in out)
        return Mat2(*out)

    def __add__(self, o: "Mat2") -> "Mat2":
        return Mat2(*(x + y for x, y in zip(self.entries(), o.entries())))

    def __sub__(self, o: "Mat2") -> "Mat2":
        return Mat2(*(x - y for x, y in zip(self.entries(), o.entries())))

    def scale(self, s) -> "Mat2":
        return Mat2(*(s * x for x in self.entries()))

    def det(self):
        d = self.a11 * self.a22 - self.a12 * self.a21
        return normalize(d) if self.is_exact else d

    def trace(self):
        return self.a11 + self.a22

    def adjugate(self) -> "Mat2":
        return Mat2(self.a22, -self.a12, -self.a21, self.a11)

    def inverse(self, tol: float = 1e-14) -> "Mat2":
        d = self.det()
        if self.is_exact:
            if d == 0:
                raise SingularMatrix("exact matrix has zero determinant")
            return Mat2(*(normalize(ExactComplex.coerce(x) / d) for x in self.adjugate().entries()))
        if abs(d) <= tol:
            raise SingularMatrix(f"|det| = {abs(d):.3e} <= {tol:.1e}")
        return Mat2(*(x / d for x in self.adjugate().entries()))

    def op_norm(self) -> float:
        return float(op_norm(self.to_array()))

    def is_sl2(self, tol: float = 1e-12) -> bool:
        return abs(complex(self.det()) - 1) <= tol

    def is_su2(self, tol: float = 1e-12) -> bool:
        A = self.to_array()
        return bool(np.max(np.abs(A.conj().T @ A - np.eye(2))) <= tol) and self.is_sl2(tol)

    def is_unipotent(self, tol: float = 1e-12) -> bool:
        N = self.to_array() - np.eye(2)
        return bool(np.max(np.abs(N @ N)) <= tol)

    def __eq__(self, o):
        if not isinstance(o, Mat2):
            return NotImplemented
        return all(x == y for x, y in zip(self.entries(), o.entries()))

    def __hash__(self):
        return hash(self.entries())


@dataclass(frozen=True)
class ElementaryFactor:
    """[[1,0],[z,1]] (``"L"``) or [[1,z],[0,1]] (``"U"``)."""

    kind: str
    z: Any

    def __post_init__(self):
        if self.kind not in ("L", "U"):
            raise ValueError("kind must be 'L' (lower) or 'U' (upper)")

    def matrix(self) -> Mat2:
        one = 1 if _is_exact(self.z) else 1.0 + 0j
        zero = one - one
        if self.kind == "L":
            return Mat2(one, zero, self.z, one)
        return Mat2(one, self.z, zero, one)

    def inverse(self) -> "ElementaryFactor":
        return ElementaryFactor(self.kind, -self.z)


def product(mats) -> Mat2:
    mats = list(mats)
    out = mats[0]
    for m in mats[1:]:
        out = out @ m
    return out


# ---------------------------------------------------------------------------
# batched array layer
# ---------------------------------------------------------------------------

def eye_like(shape) -> np.ndarray:
    """Identity matrices with leading batch ``shape``."""
    out = np.zeros(tuple(shape) + (2, 2), dtype=complex)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    return out


def from_entries(a, b, c, d) -> np.ndarray:
    a, b, c, d = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (a, b, c, d)))
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


def lower(z) -> np.ndarray:
    return from_entries(1.0, 0.0, z, 1.0)


def upper(z) -> np.ndarray:
    return from_entries(1.0, z, 0.0, 1.0)


def det(A) -> np.ndarray:
    A = np.asarray(A)
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def trace(A) -> np.ndarray:
    A = np.asarray(A)
    return A[..., 0, 0] + A[..., 1, 1]


def adjugate(A) -> np.ndarray:
    A = np.asarray(A)
    return from_entries(A[..., 1, 1], -A[..., 0, 1], -A[..., 1, 0], A[..., 0, 0])


def inverse(A, tol: float = 1e-14) -> np.ndarray:
    """adjugate / det; raises if any |det| <= tol."""
    d = det(A)
    bad = np.abs(d) <= tol
    if np.any(bad):
        raise SingularMatrix(f"{int(np.count_nonzero(bad))} singular matrices (min |det| = {np.min(np.abs(d)):.3e})")
    return adjugate(A) / d[..., None, None]


def sl2_inverse(A) -> np.ndarray:
    """Inverse of a determinant-1 matrix; the adjugate, no division."""
    return adjugate(A)


def op_norm(A) -> np.ndarray:
    """Largest singular value, closed form.

    sigma_max^2 = (|A|_F^2 + sqrt(|A|_F^4 - 4|det A|^2)) / 2
    """
    A = np.asarray(A)
    fro2 = np.sum(np.abs(A) ** 2, axis=(-2, -1))
    d2 = np.abs(det(A)) ** 2
    disc = np.maximum(fro2 * fro2 - 4.0 * d2, 0.0)
    return np.sqrt(0.5 * (fro2 + np.sqrt(disc)))


def dist_to_identity(A) -> np.ndarray:
    """Operator norm of A - Id."""
    return op_norm(np.asarray(A) - eye_like(np.shape(A)[:-2]))


def is_sl2(A, tol: float = 1e-12) -> np.ndarray:
    return np.abs(det(A) - 1.0) <= tol


def is_su2(A, tol: float = 1e-12) -> np.ndarray:
    A = np.asarray(A)
    gram = np.conj(np.swapaxes(A, -1, -2)) @ A
    return (np.max(np.abs(gram - eye_like(A.shape[:-2])), axis=(-2, -1)) <= tol) & is_sl2(A, tol)


def is_unipotent(A, tol: float = 1e-12) -> np.ndarray:
    N = np.asarray(A) - eye_like(np.shape(A)[:-2])
    return np.max(np.abs(N @ N), axis=(-2, -1)) <= tol


def _sinhc_cosh(s2):
    """(cosh s, sinh(s)/s) as functions of s^2; both are even in s."""
    s2 = np.asarray(s2, dtype=complex)
    s = np.sqrt(s2)
    small = np.abs(s2) < 1e-4
    safe_s = np.where(small, 1.0, s)
    ch = np.where(small, 1 + s2 / 2 + s2 * s2 / 24 + s2 ** 3 / 720, np.cosh(safe_s))
    sc = np.where(small, 1 + s2 / 6 + s2 * s2 / 120 + s2 ** 3 / 5040, np.sinh(safe_s) / safe_s)
    return ch, sc


def expm(L) -> np.ndarray:
    """Closed-form 2x2 matrix exponential.

    With m = tr/2 and B = L - m Id (so B^2 = -det(B) Id):
    exp(L) = e^m (cosh(s) Id + sinh(s)/s B),  s^2 = -det B.
    """
    L = np.asarray(L, dtype=complex)
    m = trace(L) / 2
    B = L - m[..., None, None] * eye_like(L.shape[:-2])
    ch, sc = _sinhc_cosh(-det(B))
    out = ch[..., None, None] * eye_like(L.shape[:-2]) + sc[..., None, None] * B
    return np.exp(m)[..., None, None] * out


def log_near_identity(M, radius: float = LOG_RADIUS) -> np.ndarray:
    """Principal logarithm by the series log(Id + X) = sum (-1)^(k+1) X^k / k.

    Requires ||M - Id|| <= radius (default 1/2) everywhere; the series is
    truncated once every term has operator norm below 1e-16.
    """
    M = np.asarray(M, dtype=complex)
    X = M - eye_like(M.shape[:-2])
    nx = op_norm(X)
    if np.any(nx > radius + 1e-15):
        raise OutOfRadius(f"||M - Id|| = {float(np.max(nx)):.4f} exceeds log radius {radius}")
    out = X.copy()
    term = X.copy()
    k = 1
    while True:
        k += 1
        term = term @ X
        piece = term * ((-1) ** (k + 1) / k)
        out = out + piece
        if float(np.max(op_norm(piece), initial=0.0)) < _SERIES_CUTOFF or k > 200:
            break
    return out


def logm_sl2(M) -> np.ndarray:
    """Principal logarithm of invertible 2x2 matrices away from the -Id branch.

    Near Id (||M - Id|| <= 1/4) this is the series; elsewhere the closed form
    log M = s / sinh(s) (M - c Id), c = tr M / 2 = cosh s, after scaling M to
    determinant 1.  Raises OutOfRadius where sinh(s) vanishes with s != 0,
    i.e. at -Id plus a nilpotent.
    """
    M = np.asarray(M, dtype=complex)
    out = np.empty_like(M)
    near = dist_to_identity(M) <= 0.25
    if near.any():
        out[near] = log_near_identity(M[near], radius=0.25)
    far = ~near
    if far.any():
        A = M[far]
        dh = np.sqrt(det(A))
        A = A / dh[..., None, None]
        c = trace(A) / 2
        s = np.arccosh(c)
        sh = np.sinh(s)
        small = np.abs(s) < 1e-4      # parabolic: s / sinh s -> 1
        if np.any((np.abs(sh) < 1e-8) & ~small):
            raise OutOfRadius("matrix too close to the -Id branch for a principal logarithm")
        ratio = np.where(small, 1 - s * s / 6 + 7 * s ** 4 / 360, s / np.where(small, 1, sh))
        B = ratio[..., None, None] * (A - c[..., None, None] * eye_like(c.shape))
        out[far] = B + np.log(dh)[..., None, None] * eye_like(c.shape)
    return out


def qr_su2(A, tol: float = 1e-12):
    """A = Q R with Q in SU(2), R upper triangular, R11 > 0 real, det R = det A.

    Q's first column is the normalized first column of A; the second is
    (-conj q21, conj q11), which fixes det Q = 1.  R21 is exactly zero.
    """
    A = np.asarray(A, dtype=complex)
    c1 = A[..., :, 0]
    rho = np.sqrt(np.sum(np.abs(c1) ** 2, axis=-1))
    if np.any(rho <= tol):
        raise SingularMatrix(f"first column norm {float(np.min(rho)):.3e} <= {tol:.1e}")
    q1 = c1 / rho[..., None]
    Q = from_entries(q1[..., 0], -np.conj(q1[..., 1]), q1[..., 1], np.conj(q1[..., 0]))
    c2 = A[..., :, 1]
    r12 = np.sum(np.conj(q1) * c2, axis=-1)
    r22 = -q1[..., 1] * c2[..., 0] + q1[..., 0] * c2[..., 1]
    R = from_entries(rho, r12, 0.0, r22)
    return Q, R


def mat_ops(A: Mat2, B: Mat2) -> dict:
    """All binary/unary operations on a pair, for reports."""
    return {
        "product": A @ B,
        "sum": A + B,
        "adjugate": A.adjugate(),
        "inverse": A.inverse(),
        "det": A.det(),
        "op_norm": A.op_norm(),
    }
