"""Spectral curves of the Nahm flow: the quadratic pencil
beta(zeta) = beta + (alpha + alpha*) zeta - beta* zeta^2, the coefficients
a_j(zeta) of det(eta - beta(zeta)), their conservation along solutions, the
fixed singular curve of an orbit target, and the antiholomorphic reality
involution (zeta, eta) -> (-1/conj(zeta), -conj(eta)/conj(zeta)^2).

Coefficients are recovered by sampling the determinant at Chebyshev-placed
zeta values and polynomial interpolation; a_j has degree <= 2j because the
pencil entries are quadratics in zeta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .algebra import dagger
from .paths import NahmData
from .solver import BoundaryTarget, LaxPair, lax_extract

__all__ = [
    "SpectralData",
    "beta_zeta",
    "alpha_zeta",
    "char_coeffs",
    "spectral_flow",
    "conservation_check",
    "fixed_curve",
    "reality_check",
    "reality_violation_substitution",
    "curve_value",
]


@dataclass
class SpectralData:
    """Coefficient lists of a_j(zeta), ascending in zeta, j = 1..k."""

    k: int
    coeffs: list
    factors: Optional[list] = None

    def a(self, j: int) -> np.ndarray:
        return self.coeffs[j - 1]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "a": [[[float(c.real), float(c.imag)] for c in cs] for cs in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SpectralData":
        coeffs = [np.array([complex(re, im) for re, im in cs]) for cs in data["a"]]
        return cls(int(data["k"]), coeffs)


def beta_zeta(alpha: np.ndarray, beta: np.ndarray, zeta: complex, beta_dagger=None) -> np.ndarray:
    """The pencil beta + (alpha + alpha*) zeta - beta* zeta^2 at one node.

    ``beta_dagger`` overrides the beta* slot (used by negative controls that
    deliberately break the reality of the pencil).
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    bd = dagger(beta) if beta_dagger is None else np.asarray(beta_dagger, dtype=complex)
    return beta + (alpha + dagger(alpha)) * zeta - bd * zeta * zeta


def alpha_zeta(alpha: np.ndarray, beta: np.ndarray, zeta: complex) -> np.ndarray:
    """Companion pencil alpha - beta* zeta."""
    return np.asarray(alpha, dtype=complex) - dagger(np.asarray(beta, dtype=complex)) * zeta


def _chebyshev_points(m: int) -> np.ndarray:
    return np.cos(np.pi * (2.0 * np.arange(m) + 1.0) / (2.0 * m))


def _poly_from_roots(roots: np.ndarray) -> np.ndarray:
    """Monic coefficients (descending) from batched root sets (..., k)."""
    shape = roots.shape[:-1]
    k = roots.shape[-1]
    c = np.zeros(shape + (k + 1,), dtype=complex)
    c[..., 0] = 1.0
    for r in range(k):
        lam = roots[..., r]
        c[..., 1 : r + 2] = c[..., 1 : r + 2] - lam[..., None] * c[..., : r + 1].copy()
    return c


def _pencil_coeff_values(beta: np.ndarray, herm: np.ndarray, quad: np.ndarray, zetas: np.ndarray) -> np.ndarray:
    """a_j values of det(eta - (beta + herm z - quad z^2)) at sample points.

    beta/herm/quad are node-batched (N, k, k); returns (M, N, k+1) monic rows.
    """
    z = zetas[:, None, None, None]
    pencil = beta[None] + herm[None] * z - quad[None] * z * z
    eigs = np.linalg.eigvals(pencil)
    return _poly_from_roots(eigs)


def _fit_coeffs(zetas: np.ndarray, values: np.ndarray, k: int) -> list:
    """Per-j polynomial fits of degree 2j; values has shape (M, N, k+1)."""
    out = []
    for j in range(1, k + 1):
        deg = 2 * j
        V = np.vander(zetas, deg + 1, increasing=True)
        sol, *_ = np.linalg.lstsq(V, values[:, :, j], rcond=None)
        out.append(sol)  # (deg+1, N)
    return out


def char_coeffs(alpha: np.ndarray, beta: np.ndarray, beta_dagger=None) -> SpectralData:
    """Spectral-curve coefficients a_j(zeta) for a single Lax-pair node."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    k = beta.shape[-1]
    bd = dagger(beta) if beta_dagger is None else np.asarray(beta_dagger, dtype=complex)
    zetas = _chebyshev_points(2 * k + 1)
    vals = _pencil_coeff_values(beta[None], (alpha + dagger(alpha))[None], bd[None], zetas)
    fits = _fit_coeffs(zetas, vals, k)
    return SpectralData(k, [f[:, 0] for f in fits])


def spectral_flow(d: NahmData, beta_dagger_zero: bool = False) -> list:
    """Coefficients a_j(zeta) at every node; list of (2j+1, n+1) arrays."""
    lax = lax_extract(d)
    k = lax.beta.shape[-1]
    herm = lax.alpha + dagger(lax.alpha)
    quad = np.zeros_like(lax.beta) if beta_dagger_zero else dagger(lax.beta)
    zetas = _chebyshev_points(2 * k + 1)
    vals = _pencil_coeff_values(lax.beta, herm, quad, zetas)
    return _fit_coeffs(zetas, vals, k)


def conservation_check(d: NahmData) -> float:
    """Max relative drift of any curve coefficient along the flow."""
    flows = spectral_flow(d)
    scale = max(1.0, max(float(np.max(np.abs(f[:, 0]))) for f in flows))
    drift = max(float(np.max(np.abs(f - f[:, :1]))) for f in flows)
    return drift / scale


def curve_value(s: SpectralData, eta: complex, zeta: complex) -> complex:
    """Evaluate eta^k + a_1(zeta) eta^{k-1} + ... + a_k(zeta)."""
    total = eta**s.k
    for j in range(1, s.k + 1):
        total += np.polynomial.polynomial.polyval(zeta, s.a(j)) * eta ** (s.k - j)
    return complex(total)


def fixed_curve(target: BoundaryTarget) -> SpectralData:
    """The fixed singular curve of an orbit target:
    det(eta - (tau2 + i tau3) - 2i tau1 zeta + (-tau2 + i tau3) zeta^2) = 0.

    Note the zeta-linear term carries the opposite sign from the pencil of an
    actual solution flow; the two conventions are exchanged by zeta -> -zeta.
    For simultaneously diagonal tau_i the curve splits into k quadratic
    components eta = q_i(zeta), returned in ``factors``.
    """
    t1, t2, t3 = target.tau1, target.tau2, target.tau3
    k = target.dim
    beta0 = t2 + 1j * t3
    herm = 2j * t1
    quad = -(t2 - 1j * t3)  # pencil beta0 + herm z - quad z^2
    zetas = _chebyshev_points(2 * k + 1)
    vals = _pencil_coeff_values(beta0[None], herm[None], quad[None], zetas)
    fits = _fit_coeffs(zetas, vals, k)
    factors = None
    if all(np.allclose(t, np.diag(np.diagonal(t)), atol=1e-12) for t in (t1, t2, t3)):
        factors = []
        for i in range(k):
            factors.append(np.array([beta0[i, i], herm[i, i], -quad[i, i]]))
    return SpectralData(k, [f[:, 0] for f in fits], factors)


def reality_check(s: SpectralData) -> float:
    """Violation of curve invariance under the reality involution.

    Invariance is equivalent to the coefficient identity
    a_j(zeta) = (-1)^j zeta^{2j} conj(a_j(-1/conj(zeta))), i.e.
    c_{j,m} = (-1)^{j+m} conj(c_{j,2j-m}).
    """
    worst = 0.0
    scale = max(1.0, max(float(np.max(np.abs(c))) for c in s.coeffs))
    for j in range(1, s.k + 1):
        c = s.a(j)
        m = np.arange(2 * j + 1)
        mirrored = ((-1.0) ** (j + m)) * np.conj(c[::-1])
        worst = max(worst, float(np.max(np.abs(c - mirrored))))
    return worst / scale


def reality_violation_substitution(s: SpectralData, n_samples: int = 20, seed: int = 0) -> float:
    """Brute-force involution check: map the eta-roots over sampled zeta and
    compare with the roots over the image point -1/conj(zeta)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        r = rng.uniform(0.4, 1.6)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        zeta = r * np.exp(1j * phi)

        def roots_at(z):
            coeff = [1.0 + 0j]
            for j in range(1, s.k + 1):
                coeff.append(np.polynomial.polynomial.polyval(z, s.a(j)))
            return np.roots(coeff)

        image = -np.conj(roots_at(zeta)) / np.conj(zeta) ** 2
        target = roots_at(-1.0 / np.conj(zeta))
        # compare root multisets via optimal matching
        cost = np.abs(image[:, None] - target[None, :])
        rows, cols = linear_sum_assignment(cost)
        scale = max(1.0, float(np.max(np.abs(target))))
        worst = max(worst, float(np.max(cost[rows, cols])) / scale)
    return worst
