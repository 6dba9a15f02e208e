"""Dense complex matrix arithmetic and Lie-algebra structure for su(k) / sl(k,C).

Conventions used throughout the package:

* invariant pairing  <X, Y> = -Re tr(XY), positive definite on su(k);
* su(2) spin basis   e_j = (i/2) sigma_j, so |e_j|^2 = 1/2 and
  [e1, e2] = -e3,  [e2, e3] = -e1,  [e3, e1] = -e2.

All operations are pure functions on immutable values and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "AlgebraSpec",
    "Su2Triple",
    "bracket",
    "pairing",
    "expm",
    "polar_decompose",
    "su2_basis",
    "su2_embed",
    "su2_embed_block",
    "su_basis",
    "su_coords",
    "su_from_coords",
    "ad_matrix",
    "random_su",
    "dagger",
    "frobenius",
]


def dagger(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose on the trailing two axes (batch friendly)."""
    return np.conj(np.swapaxes(A, -1, -2))


def frobenius(A) -> float:
    return float(np.linalg.norm(A))


def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix commutator [X, Y] = XY - YX, batched over leading axes."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape[-1] != X.shape[-2] or X.shape[-2:] != Y.shape[-2:]:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return X @ Y - Y @ X


@dataclass(frozen=True)
class AlgebraSpec:
    """Which matrix Lie algebra we work in, with its membership test.

    family 'su': traceless skew-Hermitian k x k matrices.
    family 'sl_complex': traceless complex k x k matrices.
    """

    family: str
    dim: int

    def __post_init__(self):
        if self.family not in ("su", "sl_complex"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")

    @property
    def real_dimension(self) -> int:
        d = self.dim * self.dim - 1
        return d if self.family == "su" else 2 * d

    def member_defect(self, X: np.ndarray) -> float:
        """Distance-like defect of X from the algebra (0 for members)."""
        X = np.asarray(X, dtype=complex)
        if X.shape[-2:] != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim}x{self.dim} matrix, got {X.shape}")
        k = self.dim
        tr = np.trace(X, axis1=-2, axis2=-1)
        defect = float(np.max(np.abs(tr))) / np.sqrt(k)
        if self.family == "su":
            defect = max(defect, float(np.max(np.linalg.norm(X + dagger(X), axis=(-2, -1)))))
        return defect

    def is_member(self, X: np.ndarray, tol: float = 1e-10) -> bool:
        X = np.asarray(X, dtype=complex)
        scale = max(float(np.max(np.linalg.norm(X, axis=(-2, -1)))), 1e-300)
        return self.member_defect(X) <= tol * max(scale, 1.0)

    def project(self, X: np.ndarray) -> np.ndarray:
        """Nearest traceless (skew-Hermitian for su) matrix, batched."""
        X = np.asarray(X, dtype=complex)
        if self.family == "su":
            X = 0.5 * (X - dagger(X))
        tr = np.trace(X, axis1=-2, axis2=-1)
        eye = np.eye(self.dim)
        return X - (tr / self.dim)[..., None, None] * eye

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        Z = rng.standard_normal((self.dim, self.dim)) + 1j * rng.standard_normal((self.dim, self.dim))
        if self.family == "su":
            return scale * self.project(Z)
        Z -= np.trace(Z) / self.dim * np.eye(self.dim)
        return scale * Z


def pairing(spec: AlgebraSpec, X: np.ndarray, Y: np.ndarray) -> float:
    """Invariant scalar product -Re tr(XY)."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    if X.shape != (spec.dim, spec.dim) or Y.shape != X.shape:
        raise ValueError("dimension mismatch in pairing")
    return float(-np.einsum("pq,qp->", X, Y).real)


def expm(X: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring via scipy)."""
    X = np.asarray(X, dtype=complex)
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite entries in expm argument")
    return scipy.linalg.expm(X)


def polar_decompose(A: np.ndarray):
    """Factor A = U . exp(iH) with U unitary and iH Hermitian.

    exp(iH) is the positive-definite right polar factor; H itself is
    anti-Hermitian (e.g. diag(e, e^2) -> (I, -i diag(1, 2))).  Raises on
    singular input.
    """
    A = np.asarray(A, dtype=complex)
    w, s, vh = np.linalg.svd(A)
    if s[-1] <= 1e-13 * s[0]:
        raise np.linalg.LinAlgError("polar_decompose: singular matrix")
    U = w @ vh
    V = vh.conj().T
    # right factor P = V diag(s) V^dag, so iH = V diag(log s) V^dag
    H = -1j * (V * np.log(s)) @ V.conj().T
    return U, H


class Su2Triple(NamedTuple):
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray


def su2_basis() -> Su2Triple:
    """The standard triple e_j = (i/2) sigma_j in su(2)."""
    e1 = 0.5j * np.array([[0, 1], [1, 0]], dtype=complex)
    e2 = 0.5j * np.array([[0, -1j], [1j, 0]], dtype=complex)
    e3 = 0.5j * np.array([[1, 0], [0, -1]], dtype=complex)
    return Su2Triple(e1, e2, e3)


def _spin_matrices(k: int):
    """Hermitian spin-(k-1)/2 matrices J1, J2, J3 with [Ja, Jb] = i eps_abc Jc."""
    j = (k - 1) / 2.0
    m = j - np.arange(k)
    J3 = np.diag(m).astype(complex)
    Jp = np.zeros((k, k), dtype=complex)
    for r in range(1, k):
        # raising operator connects |j, m_r> to |j, m_r + 1>
        Jp[r - 1, r] = np.sqrt(j * (j + 1) - m[r] * (m[r] + 1))
    Jm = Jp.conj().T
    J1 = 0.5 * (Jp + Jm)
    J2 = -0.5j * (Jp - Jm)
    return J1, J2, J3


def su2_embed(spec: AlgebraSpec) -> Su2Triple:
    """Irreducible embedding su(2) -> su(k): sigma(e_a) = i Ja, spin (k-1)/2.

    The images satisfy the same bracket relations as (e1, e2, e3); for k = 2
    this is the identity embedding.
    """
    if spec.family != "su":
        raise ValueError("su2_embed requires an su(k) spec")
    J1, J2, J3 = _spin_matrices(spec.dim)
    return Su2Triple(1j * J1, 1j * J2, 1j * J3)


def su2_embed_block(spec: AlgebraSpec, m: int) -> Su2Triple:
    """Irreducible m-dimensional embedding padded with a trivial summand."""
    if not 2 <= m <= spec.dim:
        raise ValueError("block size out of range")
    small = su2_embed(AlgebraSpec("su", m))
    out = []
    for s in small:
        M = np.zeros((spec.dim, spec.dim), dtype=complex)
        M[:m, :m] = s
        out.append(M)
    return Su2Triple(*out)


@lru_cache(maxsize=None)
def su_basis(k: int) -> np.ndarray:
    """Orthonormal basis of su(k) for <X,Y> = -Re tr(XY), shape (k^2-1, k, k).

    Off-diagonal pairs (E_ab - E_ba)/sqrt2 and i(E_ab + E_ba)/sqrt2, then the
    diagonal family i diag(1,..,1,-a,0,..)/sqrt(a(a+1)).
    """
    mats = []
    for a in range(k):
        for b in range(a + 1, k):
            M = np.zeros((k, k), dtype=complex)
            M[a, b] = 1.0
            M[b, a] = -1.0
            mats.append(M / np.sqrt(2.0))
            M = np.zeros((k, k), dtype=complex)
            M[a, b] = 1j
            M[b, a] = 1j
            mats.append(M / np.sqrt(2.0))
    for a in range(1, k):
        d = np.zeros(k)
        d[:a] = 1.0
        d[a] = -a
        mats.append(1j * np.diag(d) / np.sqrt(a * (a + 1.0)))
    B = np.array(mats)
    B.flags.writeable = False
    return B


def su_coords(X: np.ndarray) -> np.ndarray:
    """Real coordinates of su(k) matrices in the orthonormal basis, batched."""
    X = np.asarray(X, dtype=complex)
    B = su_basis(X.shape[-1])
    return -np.einsum("...pq,iqp->...i", X, B).real


def su_from_coords(c: np.ndarray, k: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    return np.einsum("...i,ipq->...pq", c, su_basis(k))


def ad_matrix(X: np.ndarray) -> np.ndarray:
    """Matrix of rho |-> [rho, X] on su(k) in the orthonormal basis."""
    X = np.asarray(X, dtype=complex)
    B = su_basis(X.shape[-1])
    br = B @ X - X @ B
    return -np.einsum("jpq,iqp->ij", br, B).real


def random_su(k: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return AlgebraSpec("su", k).random_element(rng, scale)
