"""Gauge-group action on path space, real and complex gauge fixing, monodromy,
and the horizontal projection behind the quotient metric.

The action is g.(T0, Ti) = (g T0 g^-1 - g' g^-1, g Ti g^-1).  Trivializing
T0 means solving g' = g T0 with g(s0) = 1; the endpoint value g(s1) is the
monodromy realizing the identification of the path-space quotient with the
group itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .algebra import AlgebraSpec, ad_matrix, bracket, dagger, expm, su_coords, su_from_coords
from .paths import (
    AlgebraPath,
    Grid,
    NahmData,
    dirichlet_derivative,
    path_derivative,
    pairing_nodes,
    quadrature,
    sup_norm,
)

__all__ = [
    "GroupPath",
    "LevelSetError",
    "act",
    "trivialize",
    "monodromy",
    "complex_trivialize",
    "complex_trivialize_direct",
    "exp_su_path",
    "vertical_field",
    "horizontal_project",
    "quotient_metric",
]


class LevelSetError(ValueError):
    """Input does not satisfy the level-set equation to tolerance."""


@dataclass
class GroupPath:
    """Node-indexed invertible matrices; flavor 'unitary' or 'complex'."""

    grid: Grid
    values: np.ndarray
    flavor: str = "unitary"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[0] != self.grid.n + 1 or self.values.ndim != 3:
            raise ValueError("bad group path shape")
        if self.flavor not in ("unitary", "complex"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "unitary":
            k = self.values.shape[-1]
            dev = np.max(np.linalg.norm(dagger(self.values) @ self.values - np.eye(k), axis=(-2, -1)))
            if dev > 1e-8:
                raise ValueError(f"unitary flavor violated, max |g^dag g - 1| = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


def exp_su_path(rho: AlgebraPath) -> GroupPath:
    """Node-wise exponential of a skew-Hermitian path (batched via eigh)."""
    w, V = np.linalg.eigh(-1j * rho.values)
    vals = (V * np.exp(1j * w)[..., None, :]) @ dagger(V)
    return GroupPath(rho.grid, vals, "unitary")


def act(g: GroupPath, d: NahmData) -> NahmData:
    """Gauge action: T0 conjugates with the connection term, Ti conjugate."""
    if g.grid != d.grid:
        raise ValueError("grid mismatch between gauge and data")
    gv = g.values
    ginv = np.linalg.inv(gv)
    dg = path_derivative(gv, d.grid.h)
    T0 = gv @ d.T0.values @ ginv - dg @ ginv
    rest = [gv @ c.values @ ginv for c in (d.T1, d.T2, d.T3)]
    return NahmData.from_arrays(d.algebra, d.grid, T0, *rest)


def _midpoints(v: np.ndarray) -> np.ndarray:
    """Cubic interpolation of node samples at interval midpoints."""
    n = v.shape[0] - 1
    if n < 3:
        return 0.5 * (v[:-1] + v[1:])
    mid = np.empty((n,) + v.shape[1:], dtype=v.dtype)
    mid[1:-1] = (-v[:-3] + 9.0 * v[1:-2] + 9.0 * v[2:-1] - v[3:]) / 16.0
    mid[0] = (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0
    mid[-1] = (v[-4] - 5.0 * v[-3] + 15.0 * v[-2] + 5.0 * v[-1]) / 16.0
    return mid


def _unitary_factor(M: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(M)
    return w @ vh


def _integrate_right(T: np.ndarray, h: float, unitarize: bool) -> np.ndarray:
    """RK4 for g' = g T(s), g(0) = 1, with optional polar re-unitarization."""
    n = T.shape[0] - 1
    k = T.shape[-1]
    mid = _midpoints(T)
    g = np.empty_like(T)
    g[0] = np.eye(k)
    cur = g[0]
    for m in range(n):
        k1 = cur @ T[m]
        k2 = (cur + 0.5 * h * k1) @ mid[m]
        k3 = (cur + 0.5 * h * k2) @ mid[m]
        k4 = (cur + h * k3) @ T[m + 1]
        cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if unitarize:
            cur = _unitary_factor(cur)
        g[m + 1] = cur
    return g


def trivialize(T0: AlgebraPath) -> GroupPath:
    """Unique gauge g with g(s0) = 1 solving g.T0 = 0 (so g' = g T0)."""
    g = _integrate_right(T0.values, T0.grid.h, unitarize=True)
    return GroupPath(T0.grid, g, "unitary")


def monodromy(T0: AlgebraPath) -> np.ndarray:
    """Endpoint g(s1) of the trivializing gauge; G0-invariant."""
    return trivialize(T0).values[-1]


def complex_trivialize_direct(T0: AlgebraPath, T1: AlgebraPath) -> GroupPath:
    """One-stage complex trivialization: solve g' = g (T0 + i T1), g(s0) = 1."""
    if T0.grid != T1.grid:
        raise ValueError("grid mismatch")
    g = _integrate_right(T0.values + 1j * T1.values, T0.grid.h, unitarize=False)
    return GroupPath(T0.grid, g, "complex")


def complex_trivialize(T0: AlgebraPath, T1: AlgebraPath, level_tol: float = 1e-6):
    """Two-stage complex gauge fixing of a level-set pair (T0, T1).

    Requires T1' = [T1, T0] to tolerance.  Returns the real trivializing
    gauge g, the endpoint exp(i (s1-s0) T1(s0)) g(s1) of the combined complex
    gauge, and T1(s0).
    """
    if T0.grid != T1.grid:
        raise ValueError("grid mismatch")
    grid = T0.grid
    residual = path_derivative(T1.values, grid.h) + bracket(T0.values, T1.values)
    res = sup_norm(residual)
    if res > level_tol:
        raise LevelSetError(f"level-set residual {res:.3e} exceeds {level_tol:.1e}")
    g = trivialize(T0)
    conj = g.values @ T1.values @ np.linalg.inv(g.values)
    drift = sup_norm(conj - conj[0])
    if drift > max(10.0 * level_tol, 1e-8):
        raise LevelSetError(f"gauged T1 drifts by {drift:.3e}, not constant")
    T1_0 = T1.values[0]
    g_tilde_end = expm(1j * (grid.s1 - grid.s0) * T1_0) @ g.values[-1]
    return g, g_tilde_end, T1_0


def vertical_field(T0: AlgebraPath, rho: AlgebraPath) -> AlgebraPath:
    """Tangent to the based-gauge orbit: [rho, T0] - rho' for Dirichlet rho."""
    if T0.grid != rho.grid:
        raise ValueError("grid mismatch")
    end = max(np.linalg.norm(rho.values[0]), np.linalg.norm(rho.values[-1]))
    if end > 1e-10 * max(1.0, sup_norm(rho.values)):
        raise ValueError("gauge parameter must vanish at both endpoints")
    v = bracket(rho.values, T0.values) - dirichlet_derivative(rho.values, rho.grid.h)
    return AlgebraPath(T0.grid, v)


def _vertical_operator(T0: AlgebraPath) -> scipy.sparse.csr_matrix:
    """Sparse matrix of rho -> [rho, T0] - rho' in basis coordinates.

    Rows: (n+1) nodes x d coords.  Columns: (n-1) interior nodes x d coords.
    """
    grid = T0.grid
    n, k = grid.n, T0.dim
    d = k * k - 1
    h = grid.h
    eye = np.eye(d)
    rows, cols, data = [], [], []

    def add_block(node, inode, block):
        r0, c0 = node * d, (inode - 1) * d
        idx = np.nonzero(block)
        rows.append(r0 + idx[0])
        cols.append(c0 + idx[1])
        data.append(block[idx])

    add_block(0, 1, -eye / h)
    add_block(n, n - 1, eye / h)
    for m in range(1, n):
        add_block(m, m, ad_matrix(T0.values[m]))
        if m - 1 >= 1:
            add_block(m, m - 1, eye / (2.0 * h))
        if m + 1 <= n - 1:
            add_block(m, m + 1, -eye / (2.0 * h))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.concatenate(data)
    V = scipy.sparse.coo_matrix((data, (rows, cols)), shape=((n + 1) * d, (n - 1) * d))
    return V.tocsr()


def horizontal_project(T0: AlgebraPath, t: AlgebraPath) -> AlgebraPath:
    """Component of t orthogonal to the based-gauge orbit directions at T0.

    Solves the weighted normal equations for the optimal gauge parameter and
    subtracts the fitted vertical field.
    """
    if T0.grid != t.grid:
        raise ValueError("grid mismatch")
    grid = T0.grid
    k = T0.dim
    d = k * k - 1
    V = _vertical_operator(T0)
    w = np.repeat(grid.weights, d)
    tc = su_coords(t.values).reshape(-1)
    WV = V.multiply(w[:, None])
    G = (V.T @ WV).tocsc()
    rhs = V.T @ (w * tc)
    rho = scipy.sparse.linalg.spsolve(G, rhs)
    res = tc - V @ rho
    return AlgebraPath(grid, su_from_coords(res.reshape(grid.n + 1, d), k))


def quotient_metric(T0: AlgebraPath, t: AlgebraPath, t2: AlgebraPath) -> float:
    """L2 metric of the horizontal projections of t and t2 at T0."""
    p = horizontal_project(T0, t)
    q = horizontal_project(T0, t2)
    return quadrature(pairing_nodes(p.values, q.values), T0.grid)
