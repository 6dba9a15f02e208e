"""Discretized path spaces: grids, quadrature, the L2 metric, the quaternionic
complex structures and their symplectic forms, and the SO(3) / S^1 actions.

Paths are sampled on uniform grids and stored as (n+1, k, k) complex arrays.
Two difference operators are used:

* ``path_derivative``      - centered interior, second-order one-sided rows at
                             the endpoints; used for free paths (connections,
                             gauge transformations, tangent vectors);
* ``dirichlet_derivative`` - centered interior, first-order one-sided rows;
                             used only for gauge parameters vanishing at both
                             endpoints.  With trapezoid weights this pair makes
                             the discrete integration-by-parts identity exact,
                             which the moment-map and quotient-metric checks
                             rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraSpec, bracket, su_basis, su_from_coords

__all__ = [
    "Grid",
    "AlgebraPath",
    "NahmData",
    "TangentVector",
    "quadrature",
    "path_derivative",
    "dirichlet_derivative",
    "pairing_nodes",
    "l2_metric",
    "l2_norm",
    "sup_norm",
    "complex_structure",
    "omega",
    "so3_rotate",
    "s1_action",
    "random_smooth_path",
    "random_dirichlet_path",
    "random_tangent",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid with n intervals on [s0, s1] (n+1 nodes)."""

    s0: float
    s1: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs n >= 2 intervals")
        if not self.s1 > self.s0:
            raise ValueError("need s1 > s0")

    @property
    def h(self) -> float:
        return (self.s1 - self.s0) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.s0, self.s1, self.n + 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass
class AlgebraPath:
    """A discretized map [s0, s1] -> g, node-indexed matrix samples."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[0] != self.grid.n + 1 or self.values.ndim != 3:
            raise ValueError(f"bad path shape {self.values.shape} for grid n={self.grid.n}")

    @property
    def dim(self) -> int:
        return self.values.shape[-1]


def _shared_grid(*paths: AlgebraPath) -> Grid:
    g = paths[0].grid
    for p in paths[1:]:
        if p.grid != g:
            raise ValueError("paths live on different grids")
    return g


@dataclass
class NahmData:
    """The quadruple (T0, T1, T2, T3) of algebra paths on a shared grid."""

    algebra: AlgebraSpec
    T0: AlgebraPath
    T1: AlgebraPath
    T2: AlgebraPath
    T3: AlgebraPath

    def __post_init__(self):
        g = _shared_grid(self.T0, self.T1, self.T2, self.T3)
        if self.T0.dim != self.algebra.dim:
            raise ValueError("algebra dimension does not match path samples")
        del g

    @property
    def grid(self) -> Grid:
        return self.T0.grid

    @property
    def components(self):
        return (self.T0, self.T1, self.T2, self.T3)

    def stack(self) -> np.ndarray:
        """Component-stacked array of shape (4, n+1, k, k)."""
        return np.stack([c.values for c in self.components])

    @classmethod
    def from_arrays(cls, algebra: AlgebraSpec, grid: Grid, T0, T1, T2, T3) -> "NahmData":
        return cls(algebra, *(AlgebraPath(grid, np.asarray(T, dtype=complex)) for T in (T0, T1, T2, T3)))


@dataclass
class TangentVector:
    """A free tangent vector (t0, t1, t2, t3) to the discretized path space."""

    t0: AlgebraPath
    t1: AlgebraPath
    t2: AlgebraPath
    t3: AlgebraPath

    def __post_init__(self):
        _shared_grid(self.t0, self.t1, self.t2, self.t3)

    @property
    def grid(self) -> Grid:
        return self.t0.grid

    @property
    def components(self):
        return (self.t0, self.t1, self.t2, self.t3)

    def stack(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    @classmethod
    def from_arrays(cls, grid: Grid, t0, t1, t2, t3) -> "TangentVector":
        return cls(*(AlgebraPath(grid, np.asarray(t, dtype=complex)) for t in (t0, t1, t2, t3)))


def quadrature(f: np.ndarray, grid: Grid) -> float:
    """Trapezoid rule for node-sampled real values."""
    f = np.asarray(f)
    if f.shape[0] != grid.n + 1:
        raise ValueError(f"expected {grid.n + 1} samples, got {f.shape[0]}")
    return float(np.tensordot(grid.weights, f, axes=(0, 0)))


def path_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order derivative of a free path along axis 0."""
    v = np.asarray(values)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return d


def dirichlet_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Derivative for paths vanishing at both endpoints.

    First-order one-sided boundary rows; the exact summation-by-parts partner
    of ``path_derivative`` under trapezoid weights.
    """
    v = np.asarray(values)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (v[1] - v[0]) / h
    d[-1] = (v[-1] - v[-2]) / h
    return d


def pairing_nodes(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Node-wise invariant pairing -Re tr(X_n Y_n)."""
    return -np.einsum("...pq,...qp->...", X, Y).real


def l2_metric(u: TangentVector, v: TangentVector) -> float:
    """L2 metric: integral of the summed component pairings."""
    g = _shared_grid(u.t0, v.t0)
    total = np.zeros(g.n + 1)
    for uc, vc in zip(u.components, v.components):
        total += pairing_nodes(uc.values, vc.values)
    return quadrature(total, g)


def l2_norm(u: TangentVector) -> float:
    return float(np.sqrt(max(l2_metric(u, u), 0.0)))


def sup_norm(values: np.ndarray) -> float:
    """Max Frobenius norm over nodes."""
    return float(np.max(np.linalg.norm(values, axis=(-2, -1))))


# Components of right multiplication by the quaternion units i, j, k acting on
# t0 + t1 i + t2 j + t3 k.  Operators compose in application order:
# (v I1) I2 = v I3.
_STRUCTURE = {
    1: ((-1, 1), (1, 0), (1, 3), (-1, 2)),
    2: ((-1, 2), (-1, 3), (1, 0), (1, 1)),
    3: ((-1, 3), (1, 2), (-1, 1), (1, 0)),
}


def complex_structure(i: int, v: TangentVector) -> TangentVector:
    """Apply the complex structure I_i (right quaternion multiplication)."""
    if i not in (1, 2, 3):
        raise ValueError("complex structure index must be 1, 2 or 3")
    comps = [c.values for c in v.components]
    out = [sign * comps[idx] for sign, idx in _STRUCTURE[i]]
    return TangentVector.from_arrays(v.grid, *out)


def omega(i: int, u: TangentVector, v: TangentVector) -> float:
    """Symplectic form omega_i(u, v) = g(I_i u, v)."""
    return l2_metric(complex_structure(i, u), v)


def so3_rotate(A: np.ndarray, d: NahmData) -> NahmData:
    """Rotate the triple (T1, T2, T3) by A in SO(3); T0 is unchanged."""
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3) or np.linalg.norm(A.T @ A - np.eye(3)) > 1e-10:
        raise ValueError("need an orthogonal 3x3 matrix")
    if np.linalg.det(A) < 0:
        raise ValueError("need det A = +1")
    T = np.stack([d.T1.values, d.T2.values, d.T3.values])
    R = np.einsum("ij,jnkl->inkl", A, T)
    return NahmData.from_arrays(d.algebra, d.grid, d.T0.values, R[0], R[1], R[2])


def s1_action(theta: float, d: NahmData) -> NahmData:
    """(T2 + i T3) -> e^{i theta} (T2 + i T3); fixes T0, T1."""
    c, s = np.cos(theta), np.sin(theta)
    T2 = c * d.T2.values - s * d.T3.values
    T3 = s * d.T2.values + c * d.T3.values
    return NahmData.from_arrays(d.algebra, d.grid, d.T0.values, d.T1.values, T2, T3)


def random_smooth_path(
    spec: AlgebraSpec,
    grid: Grid,
    rng: np.random.Generator,
    modes: int = 3,
    scale: float = 1.0,
) -> AlgebraPath:
    """Low-frequency Fourier path with exactly algebra-valued samples."""
    if spec.family != "su":
        raise ValueError("random paths are generated in su(k)")
    d = spec.dim * spec.dim - 1
    x = (grid.nodes - grid.s0) / (grid.s1 - grid.s0)
    coeff = np.zeros((grid.n + 1, d))
    for m in range(modes + 1):
        damp = scale / (1.0 + m * m)
        a = rng.standard_normal(d) * damp
        b = rng.standard_normal(d) * damp
        coeff += np.outer(np.cos(np.pi * m * x), a)
        if m > 0:
            coeff += np.outer(np.sin(np.pi * m * x), b)
    return AlgebraPath(grid, su_from_coords(coeff, spec.dim))


def random_dirichlet_path(
    spec: AlgebraSpec,
    grid: Grid,
    rng: np.random.Generator,
    modes: int = 3,
    scale: float = 1.0,
) -> AlgebraPath:
    """Smooth path vanishing at both endpoints (sine series)."""
    d = spec.dim * spec.dim - 1
    x = (grid.nodes - grid.s0) / (grid.s1 - grid.s0)
    coeff = np.zeros((grid.n + 1, d))
    for m in range(1, modes + 1):
        a = rng.standard_normal(d) * scale / (m * m)
        coeff += np.outer(np.sin(np.pi * m * x), a)
    return AlgebraPath(grid, su_from_coords(coeff, spec.dim))


def random_tangent(
    spec: AlgebraSpec,
    grid: Grid,
    rng: np.random.Generator,
    modes: int = 3,
    scale: float = 1.0,
) -> TangentVector:
    return TangentVector(*(random_smooth_path(spec, grid, rng, modes, scale) for _ in range(4)))
