"""Initial-value and boundary-value solvers for the baby and full Nahm
equations, closed-form reference solutions, Lax extraction, and half-line
adjoint-orbit identification.

All initial-value work is done in the T0 = 0 gauge, where the system reads
T1' = [T2, T3] (and cyclic).  The half-line solver shoots from s = 0 onto the
first-order asymptotic model tau_i + sigma(e_i)/(L+1) at a truncation length
L, with Newton damping and continuation in L as a fallback when a perturbed
seed leaves the (exponentially thin) basin and blows up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import AlgebraSpec, Su2Triple, bracket, su2_basis, su_coords, su_from_coords
from .paths import AlgebraPath, Grid, NahmData, path_derivative, sup_norm

__all__ = [
    "NahmBlowUpError",
    "LaxPair",
    "BoundaryTarget",
    "HalflineResult",
    "OrbitReport",
    "char_poly",
    "integrate_baby",
    "integrate_nahm",
    "nil_solution",
    "coth_solution",
    "lax_extract",
    "asymptotic_model",
    "halfline_solve",
    "orbit_identify",
]


class NahmBlowUpError(RuntimeError):
    """A Nahm flow exceeded the configured norm bound in finite time."""

    def __init__(self, s: float, norm: float):
        super().__init__(f"Nahm flow blow-up near s = {s:.6g} (norm {norm:.3e})")
        self.s = s
        self.norm = norm


@dataclass
class LaxPair:
    """alpha = T0 - i T1 and beta = T2 + i T3, node-indexed."""

    grid: Grid
    alpha: np.ndarray
    beta: np.ndarray


def char_poly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients of det(eta - M), descending."""
    eigs = np.linalg.eigvals(np.asarray(M, dtype=complex))
    return np.poly(eigs)


def _skew_project(X: np.ndarray, k: int) -> np.ndarray:
    X = 0.5 * (X - np.conj(np.swapaxes(X, -1, -2)))
    tr = np.trace(X, axis1=-2, axis2=-1)
    return X - (tr / k)[..., None, None] * np.eye(k)


def _nahm_rhs(Y: np.ndarray) -> np.ndarray:
    """Right-hand side (T1', T2', T3') = ([T2,T3], [T3,T1], [T1,T2]), batched."""
    T1 = Y[..., 0, :, :]
    T2 = Y[..., 1, :, :]
    T3 = Y[..., 2, :, :]
    return np.stack([bracket(T2, T3), bracket(T3, T1), bracket(T1, T2)], axis=-3)


def _nahm_flow(
    init: np.ndarray,
    grid: Grid,
    blowup_bound: float,
    store: bool,
):
    """RK4 on the T0 = 0 Nahm system.

    With store=True returns the full trajectory (n+1, ..., 3, k, k) and raises
    on blow-up.  With store=False integrates a leading batch axis to the
    terminal value, marking blown-up members with NaN instead of raising.
    """
    h = grid.h
    k = init.shape[-1]
    cur = np.array(init, dtype=complex)
    batched = not store
    traj = None
    if store:
        traj = np.empty((grid.n + 1,) + cur.shape, dtype=complex)
        traj[0] = cur
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(grid.n):
            k1 = _nahm_rhs(cur)
            k2 = _nahm_rhs(cur + 0.5 * h * k1)
            k3 = _nahm_rhs(cur + 0.5 * h * k2)
            k4 = _nahm_rhs(cur + h * k3)
            cur = cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            cur = _skew_project(cur, k)
            norms = np.linalg.norm(cur, axis=(-2, -1))
            bad = ~np.isfinite(norms) | (norms > blowup_bound)
            if np.any(bad):
                if not batched:
                    raise NahmBlowUpError(grid.s0 + (m + 1) * h, float(np.max(norms[np.isfinite(norms)], initial=0.0)))
                cur[np.any(bad, axis=-1)] = np.nan
            if store:
                traj[m + 1] = cur
    return traj if store else cur


def integrate_nahm(
    algebra: AlgebraSpec,
    init: tuple,
    grid: Grid,
    blowup_bound: float = 1e6,
) -> NahmData:
    """Solve the Nahm equations in the T0 = 0 gauge from (T1, T2, T3)(s0).

    Skew-Hermiticity is restored by projection after every step; blow-up past
    the norm bound raises NahmBlowUpError.
    """
    Y0 = np.stack([np.asarray(M, dtype=complex) for M in init])
    if not algebra.is_member(Y0, tol=1e-8):
        raise ValueError("initial matrices are not algebra elements")
    traj = _nahm_flow(Y0, grid, blowup_bound, store=True)
    zero = np.zeros_like(traj[:, 0])
    return NahmData.from_arrays(algebra, grid, zero, traj[:, 0], traj[:, 1], traj[:, 2])


def integrate_baby(T1_init: np.ndarray, T0: AlgebraPath):
    """RK4 for the Lax equation T1' = [T1, T0(s)]; returns the (T0, T1) paths.

    T0 is sampled on the grid; midpoint values use cubic interpolation so the
    integrator keeps its fourth-order accuracy (the flow is isospectral).
    """
    grid = T0.grid
    h = grid.h
    k = T0.dim
    from .gauge import _midpoints  # local import to avoid a cycle

    mid = _midpoints(T0.values)
    T1 = np.empty_like(T0.values)
    T1[0] = np.asarray(T1_init, dtype=complex)
    cur = T1[0]
    for m in range(grid.n):
        k1 = bracket(cur, T0.values[m])
        k2 = bracket(cur + 0.5 * h * k1, mid[m])
        k3 = bracket(cur + 0.5 * h * k2, mid[m])
        k4 = bracket(cur + h * k3, T0.values[m + 1])
        cur = _skew_project(cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k)
        T1[m + 1] = cur
    return T0, AlgebraPath(grid, T1)


def nil_solution(algebra: AlgebraSpec, grid: Grid, sigma: Optional[Su2Triple] = None, offset: float = 1.0) -> NahmData:
    """The pole solution T_i(s) = sigma(e_i)/(s + offset), T0 = 0."""
    if sigma is None:
        from .algebra import su2_embed

        sigma = su2_embed(algebra)
    s = grid.nodes
    f = 1.0 / (s + offset)
    zero = np.zeros((grid.n + 1, algebra.dim, algebra.dim), dtype=complex)
    comps = [f[:, None, None] * np.asarray(e)[None] for e in sigma]
    return NahmData.from_arrays(algebra, grid, zero, *comps)


def coth_solution(a: float, s0_offset: float, grid: Grid) -> NahmData:
    """Closed-form su(2) half-line solution with T1 -> -a e1 exponentially.

    T1 = -a coth(a(s+c)) e1, T2 = a/sinh(a(s+c)) e2, T3 = -a/sinh(a(s+c)) e3.
    """
    if a <= 0 or s0_offset <= 0:
        raise ValueError("need a > 0 and s0_offset > 0")
    e1, e2, e3 = su2_basis()
    xi = a * (grid.nodes + s0_offset)
    f1 = -a / np.tanh(xi)
    f2 = a / np.sinh(xi)
    f3 = -a / np.sinh(xi)
    algebra = AlgebraSpec("su", 2)
    zero = np.zeros((grid.n + 1, 2, 2), dtype=complex)
    T1 = f1[:, None, None] * e1[None]
    T2 = f2[:, None, None] * e2[None]
    T3 = f3[:, None, None] * e3[None]
    return NahmData.from_arrays(algebra, grid, zero, T1, T2, T3)


def lax_extract(d: NahmData) -> LaxPair:
    """alpha = T0 - i T1, beta = T2 + i T3; beta' = [beta, alpha] on solutions."""
    alpha = d.T0.values - 1j * d.T1.values
    beta = d.T2.values + 1j * d.T3.values
    return LaxPair(d.grid, alpha, beta)


@dataclass
class BoundaryTarget:
    """Commuting limits (tau1, tau2, tau3), optional su(2) embedding images,
    and the truncation length L of the half-line."""

    tau1: np.ndarray
    tau2: np.ndarray
    tau3: np.ndarray
    sigma: Optional[Su2Triple] = None
    L: float = 10.0

    def __post_init__(self):
        self.tau1 = np.asarray(self.tau1, dtype=complex)
        self.tau2 = np.asarray(self.tau2, dtype=complex)
        self.tau3 = np.asarray(self.tau3, dtype=complex)
        if self.L <= 0:
            raise ValueError("need L > 0")
        taus = (self.tau1, self.tau2, self.tau3)
        scale = max(max(np.linalg.norm(t) for t in taus), 1.0)
        for i in range(3):
            for j in range(i + 1, 3):
                if np.linalg.norm(bracket(taus[i], taus[j])) > 1e-10 * scale**2:
                    raise ValueError("boundary limits tau_i must commute")
        if self.sigma is not None:
            sig = [np.asarray(s, dtype=complex) for s in self.sigma]
            sscale = max(max(np.linalg.norm(s) for s in sig), 1.0)
            for s in sig:
                for t in taus:
                    if np.linalg.norm(bracket(s, t)) > 1e-8 * sscale * scale:
                        raise ValueError("sigma images must commute with the tau_i")

    @property
    def dim(self) -> int:
        return self.tau1.shape[0]


def asymptotic_model(target: BoundaryTarget, s: float) -> np.ndarray:
    """First-order asymptotic values (tau_i + sigma(e_i)/(s+1)) as (3,k,k)."""
    taus = np.stack([target.tau1, target.tau2, target.tau3])
    if target.sigma is not None:
        taus = taus + np.stack([np.asarray(e, dtype=complex) for e in target.sigma]) / (s + 1.0)
    return taus


@dataclass
class HalflineResult:
    data: Optional[NahmData]
    converged: bool
    terminal_deviation: float
    iterations: int
    fnorm_history: list = field(default_factory=list)
    message: str = ""


def _pack(Y: np.ndarray, k: int) -> np.ndarray:
    return su_coords(Y).reshape(-1)


def _unpack(x: np.ndarray, k: int) -> np.ndarray:
    d = k * k - 1
    return su_from_coords(np.asarray(x).reshape(3, d), k)


def _terminal_map(xs: np.ndarray, target: BoundaryTarget, L: float, step: float, bound: float) -> np.ndarray:
    """Batched shooting map: init coords -> terminal deviation coords (NaN on blow-up)."""
    k = target.dim
    B = xs.shape[0]
    inits = np.stack([_unpack(x, k) for x in xs])
    n = max(int(np.ceil(L / step)), 8)
    grid = Grid(0.0, L, n)
    term = _nahm_flow(inits, grid, bound, store=False)
    dev = term - asymptotic_model(target, L)[None]
    out = np.empty((B, 3 * (k * k - 1)))
    for b in range(B):
        if np.all(np.isfinite(dev[b])):
            out[b] = _pack(dev[b], k)
        else:
            out[b] = np.nan
    return out


def _newton_stage(
    x: np.ndarray,
    target: BoundaryTarget,
    L: float,
    step: float,
    bound: float,
    tol: float,
    max_iter: int,
    fd_step: float = 1e-7,
):
    """Damped Newton on the shooting map at fixed L. Returns (x, history, converged)."""
    dim = x.size
    history = []
    F = _terminal_map(x[None], target, L, step, bound)[0]
    fnorm = float(np.max(np.abs(F))) if np.all(np.isfinite(F)) else np.inf
    history.append(fnorm)
    it = 0
    while fnorm > tol and it < max_iter and np.isfinite(fnorm):
        delta = fd_step * max(1.0, float(np.max(np.abs(x))))
        probes = x[None] + delta * np.eye(dim)
        Fp = _terminal_map(probes, target, L, step, bound)
        J = (Fp - F[None]).T / delta
        if not np.all(np.isfinite(J)):
            return x, history, False
        dx = np.linalg.lstsq(J, -F, rcond=None)[0]
        lam, accepted = 1.0, False
        for _ in range(10):
            Ftry = _terminal_map((x + lam * dx)[None], target, L, step, bound)[0]
            ftry = float(np.max(np.abs(Ftry))) if np.all(np.isfinite(Ftry)) else np.inf
            if ftry < fnorm:
                x = x + lam * dx
                F, fnorm = Ftry, ftry
                accepted = True
                break
            lam *= 0.5
        it += 1
        history.append(fnorm)
        if not accepted:
            return x, history, fnorm <= tol
    return x, history, fnorm <= tol


def halfline_solve(
    target: BoundaryTarget,
    init_guess: tuple,
    step: float = 5e-3,
    tol: float = 1e-6,
    max_iter: int = 12,
    blowup_bound: float = 1e6,
    continuation: bool = True,
) -> HalflineResult:
    """Newton shooting for Nahm solutions on [0, L] matching the asymptotic
    model at the far end.

    Tries a direct solve at the full length first; if the seed cannot even be
    integrated that far (the generic case for perturbed seeds, since the
    boundary-value problem sits on an exponentially thin stable set), falls
    back to continuation: converge on a short interval and extend in stages.
    Returns the best iterate with diagnostics instead of raising on
    non-convergence.
    """
    k = target.dim
    x0 = _pack(np.stack([np.asarray(M, dtype=complex) for M in init_guess]), k)
    L = float(target.L)

    x, history, ok = _newton_stage(x0, target, L, step, blowup_bound, tol, max_iter)
    used_continuation = False
    if not ok and continuation:
        used_continuation = True
        tau_scale = max(np.linalg.norm(asymptotic_model(target, L)[0]), 1.0)
        dL = min(L, max(1.0, 2.5 / tau_scale))
        x = x0
        history = []
        Lk = dL
        while True:
            Lk = min(Lk, L)
            x, hist_k, ok = _newton_stage(x, target, Lk, step, blowup_bound, tol, max_iter)
            history.extend(hist_k)
            if Lk >= L or not ok:
                break
            Lk += dL

    n = max(int(np.ceil(L / step)), 8)
    grid = Grid(0.0, L, n)
    algebra = AlgebraSpec("su", k)
    try:
        data = integrate_nahm(algebra, tuple(_unpack(x, k)), grid, blowup_bound)
        term = np.stack([c.values[-1] for c in (data.T1, data.T2, data.T3)])
        deviation = float(np.max(np.linalg.norm(term - asymptotic_model(target, L), axis=(-2, -1))))
    except NahmBlowUpError:
        data = None
        deviation = np.inf
    converged = ok and deviation <= 10.0 * tol and data is not None
    msg = "converged" if converged else "did not reach terminal tolerance"
    if used_continuation:
        msg += " (continuation in L)"
    if data is None:
        msg = "best iterate blows up before L"
    return HalflineResult(data, converged, deviation, len(history) - 1, history, msg)


@dataclass
class OrbitReport:
    charpoly_beta0: np.ndarray
    charpoly_target: np.ndarray
    max_coeff_dev: float
    certified: bool
    residual_sup: float
    beta0_rank: int

    def to_json(self) -> dict:
        def poly(p):
            return [[float(c.real), float(c.imag)] for c in p]

        return {
            "charpoly_beta0": poly(self.charpoly_beta0),
            "charpoly_target": poly(self.charpoly_target),
            "max_coeff_dev": float(self.max_coeff_dev),
            "certified": bool(self.certified),
            "residual_sup": float(self.residual_sup),
            "beta0_rank": int(self.beta0_rank),
        }


def orbit_identify(
    d: NahmData,
    target: BoundaryTarget,
    coeff_tol: float = 1e-6,
    residual_gate: float = 1e-3,
) -> OrbitReport:
    """Compare the characteristic polynomial of beta(0) with that of the orbit
    representative tau2 + i tau3 (+ sigma(e2) + i sigma(e3) when present).

    Certification requires both coefficient agreement and a small Nahm
    residual on the supplied data.
    """
    from .moment import mu_nahm

    beta0 = d.T2.values[0] + 1j * d.T3.values[0]
    rep = target.tau2 + 1j * target.tau3
    if target.sigma is not None:
        rep = rep + np.asarray(target.sigma.e2, dtype=complex) + 1j * np.asarray(target.sigma.e3, dtype=complex)
    p_beta = char_poly(beta0)
    p_rep = char_poly(rep)
    scale = max(1.0, float(np.max(np.abs(p_rep))))
    dev = float(np.max(np.abs(p_beta - p_rep))) / scale
    residual = mu_nahm(d).sup
    certified = dev <= coeff_tol and residual <= residual_gate
    # rank read at the certification scale: singular values below
    # sqrt(coeff_tol) * |beta(0)| are treated as zero
    rank_tol = np.sqrt(coeff_tol) * max(1.0, float(np.linalg.norm(beta0)))
    rank = int(np.linalg.matrix_rank(beta0, tol=rank_tol))
    return OrbitReport(p_beta, p_rep, dev, certified, residual, rank)
