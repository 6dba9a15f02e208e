import numpy as np
import pytest

from nahmlab.algebra import AlgebraSpec, expm, polar_decompose, su2_basis
from nahmlab.gauge import (
    GroupPath,
    LevelSetError,
    act,
    complex_trivialize,
    complex_trivialize_direct,
    exp_su_path,
    horizontal_project,
    monodromy,
    quotient_metric,
    trivialize,
    vertical_field,
)
from nahmlab.moment import mu_nahm
from nahmlab.paths import (
    AlgebraPath,
    Grid,
    NahmData,
    pairing_nodes,
    quadrature,
    random_dirichlet_path,
    random_smooth_path,
    sup_norm,
)
from nahmlab.solver import integrate_baby

SU2 = AlgebraSpec("su", 2)
E1, E2, E3 = su2_basis()


def const_path(grid, M):
    return AlgebraPath(grid, np.broadcast_to(M, (grid.n + 1,) + M.shape).copy())


def zero_nahm(grid, T0=None):
    z = np.zeros((grid.n + 1, 2, 2), dtype=complex)
    T0v = z if T0 is None else T0.values
    return NahmData.from_arrays(SU2, grid, T0v, z.copy(), z.copy(), z.copy())


def random_nahm(grid, rng, scale=1.0):
    return NahmData(SU2, *(random_smooth_path(SU2, grid, rng, scale=scale) for _ in range(4)))


def identity_gauge(grid):
    return GroupPath(grid, np.broadcast_to(np.eye(2), (grid.n + 1, 2, 2)).copy())


def test_act_identity(rng):
    g = Grid(0.0, 1.0, 50)
    d = random_nahm(g, rng)
    out = act(identity_gauge(g), d)
    for a, b in zip(out.components, d.components):
        assert np.abs(a.values - b.values).max() < 1e-13


def test_act_constant_gauge(rng):
    g = Grid(0.0, 1.0, 50)
    d = random_nahm(g, rng)
    U = expm(SU2.random_element(rng))
    gp = GroupPath(g, np.broadcast_to(U, (51, 2, 2)).copy())
    out = act(gp, d)
    for a, b in zip(out.components, d.components):
        assert np.abs(a.values - U @ b.values @ U.conj().T).max() < 1e-12


def test_act_group_property(rng):
    for n in (250, 500):
        g = Grid(0.0, 1.0, n)
        d = random_nahm(g, rng, scale=0.7)
        g1 = exp_su_path(random_smooth_path(SU2, g, rng, scale=0.5))
        g2 = exp_su_path(random_smooth_path(SU2, g, rng, scale=0.5))
        g12 = GroupPath(g, g1.values @ g2.values)
        lhs = act(g12, d)
        rhs = act(g1, act(g2, d))
        err = max(sup_norm(a.values - b.values) for a, b in zip(lhs.components, rhs.components))
        assert err <= 200.0 * g.h**2
        if n == 250:
            err_coarse = err
    assert err <= err_coarse  # second-order shrink under refinement


def test_act_residual_covariance(rng):
    g = Grid(0.0, 1.0, 500)
    d = random_nahm(g, rng, scale=0.6)
    gp = exp_su_path(random_smooth_path(SU2, g, rng, scale=0.5))
    base = mu_nahm(d)
    moved = mu_nahm(act(gp, d))
    # unitary conjugation preserves Frobenius norms: sup norms match to O(h^2)
    for a, b in zip((base.mu1, base.mu2, base.mu3), (moved.mu1, moved.mu2, moved.mu3)):
        na = np.linalg.norm(a.values, axis=(-2, -1))
        nb = np.linalg.norm(b.values, axis=(-2, -1))
        assert np.abs(na - nb).max() <= 100.0 * g.h**2


def test_trivialize_zero():
    g = Grid(0.0, 1.0, 100)
    gp = trivialize(const_path(g, np.zeros((2, 2), dtype=complex)))
    assert np.abs(gp.values - np.eye(2)).max() < 1e-14


def test_trivialize_constant_closed_form(rng):
    g = Grid(0.0, 1.0, 400)
    X = SU2.random_element(rng)
    gp = trivialize(const_path(g, X))
    for idx in (100, 250, 400):
        s = g.nodes[idx]
        assert np.abs(gp.values[idx] - expm(s * X)).max() < 1e-10
    assert np.abs(monodromy(const_path(g, X)) - expm(X)).max() < 1e-10


def test_trivialize_unitarity(rng):
    g = Grid(0.0, 1.0, 1000)
    gp = trivialize(random_smooth_path(SU2, g, rng))
    dev = np.max(np.linalg.norm(np.conj(np.swapaxes(gp.values, -1, -2)) @ gp.values - np.eye(2), axis=(-2, -1)))
    assert dev <= 1e-8


def test_trivialize_residual_second_order(rng):
    errs = {}
    for n in (400, 800):
        g = Grid(0.0, 1.0, n)
        T0 = random_smooth_path(SU2, g, np.random.default_rng(5), scale=0.8)
        gp = trivialize(T0)
        moved = act(gp, zero_nahm(g, T0))
        errs[n] = sup_norm(moved.T0.values)
        assert errs[n] <= 100.0 * g.h**2
    assert errs[400] / errs[800] > 3.0


def test_monodromy_zero_and_winding():
    g = Grid(0.0, 1.0, 500)
    assert np.abs(monodromy(const_path(g, np.zeros((2, 2), dtype=complex))) - np.eye(2)).max() < 1e-14
    M = monodromy(const_path(g, 2.0 * np.pi * E3))
    assert np.abs(M + np.eye(2)).max() < 1e-9


def test_monodromy_g0_invariance(rng):
    g = Grid(0.0, 1.0, 2000)
    T0 = random_smooth_path(SU2, g, rng, modes=2, scale=0.8)
    base = monodromy(T0)
    for _ in range(3):
        h = exp_su_path(random_dirichlet_path(SU2, g, rng, scale=0.5))
        moved = act(h, zero_nahm(g, T0)).T0
        assert np.abs(monodromy(moved) - base).max() <= 1e-6


def test_monodromy_gauge_covariance():
    # closed-form oracle: for T0 = 0 the trivialization of h.0 = -h' h^-1 is
    # h(0) h(s)^-1, so the monodromy transforms as h(0) M h(1)^-1
    g = Grid(0.0, 1.0, 1500)
    rng = np.random.default_rng(11)
    h = exp_su_path(random_smooth_path(SU2, g, rng, scale=0.6))
    moved = act(h, zero_nahm(g)).T0
    got = monodromy(moved)
    want = h.values[0] @ h.values[-1].conj().T
    assert np.abs(got - want).max() <= 1e-5

    # general T0: same transformation law
    T0 = random_smooth_path(SU2, g, rng, modes=1, scale=0.5)
    M = monodromy(T0)
    movedT = act(h, zero_nahm(g, T0)).T0
    got = monodromy(movedT)
    want = h.values[0] @ M @ np.linalg.inv(h.values[-1])
    assert np.abs(got - want).max() <= 1e-5


def test_complex_trivialize_zero_connection(rng):
    g = Grid(0.0, 1.0, 200)
    X = SU2.random_element(rng)
    T0 = const_path(g, np.zeros((2, 2), dtype=complex))
    T1 = const_path(g, X)
    gp, gt_end, T1_0 = complex_trivialize(T0, T1)
    assert np.abs(gp.values - np.eye(2)).max() < 1e-12
    assert np.abs(gt_end - expm(1j * X)).max() < 1e-10
    assert np.abs(T1_0 - X).max() == 0.0


def test_complex_trivialize_commuting(rng):
    g = Grid(0.0, 1.0, 400)
    X = SU2.random_element(rng)
    c = 0.7
    gp, gt_end, _ = complex_trivialize(const_path(g, X), const_path(g, c * X))
    assert np.abs(gt_end - expm(1j * c * X) @ expm(X)).max() < 1e-9


def test_complex_trivialize_polar_cross_check(rng):
    g = Grid(0.0, 1.0, 1500)
    T0 = random_smooth_path(SU2, g, rng, modes=1, scale=0.4)
    _, T1 = integrate_baby(SU2.random_element(rng, 0.8), T0)
    gp, gt_end, T1_0 = complex_trivialize(T0, T1, level_tol=2e-5)
    U, H = polar_decompose(gt_end)
    # unitary factor is exactly the real gauge endpoint, and the positive
    # factor is the conjugated exponential
    assert np.abs(U - gp.values[-1]).max() < 1e-8
    g1 = gp.values[-1]
    assert np.abs(g1 @ expm(1j * H) @ g1.conj().T - expm(1j * T1_0)).max() < 1e-8


def test_complex_trivialize_two_stage_equals_direct(rng):
    g = Grid(0.0, 1.0, 1500)
    T0 = random_smooth_path(SU2, g, rng, modes=1, scale=0.4)
    _, T1 = integrate_baby(SU2.random_element(rng, 0.8), T0)
    _, gt_end, _ = complex_trivialize(T0, T1, level_tol=2e-5)
    direct = complex_trivialize_direct(T0, T1)
    assert np.abs(gt_end - direct.values[-1]).max() < 1e-8


def test_complex_trivialize_rejects_off_level_set(rng):
    g = Grid(0.0, 1.0, 200)
    T0 = random_smooth_path(SU2, g, rng)
    T1 = random_smooth_path(SU2, g, rng)  # generic: far from the level set
    with pytest.raises(LevelSetError):
        complex_trivialize(T0, T1)


def test_horizontal_project_constants_fixed():
    g = Grid(0.0, 1.0, 300)
    zero = const_path(g, np.zeros((2, 2), dtype=complex))
    t = const_path(g, E1)
    p = horizontal_project(zero, t)
    assert sup_norm(p.values - t.values) < 1e-10


def test_horizontal_project_mean_zero_mode():
    g = Grid(0.0, 1.0, 500)
    zero = const_path(g, np.zeros((2, 2), dtype=complex))
    t = AlgebraPath(g, np.sin(2.0 * np.pi * g.nodes)[:, None, None] * E1[None])
    p = horizontal_project(zero, t)
    assert np.sqrt(quadrature(pairing_nodes(p.values, p.values), g)) < 1e-8


def test_horizontal_project_keeps_mean():
    # integral of sin(pi s) over [0,1] is 2/pi, so the horizontal part is the
    # constant (2/pi) e1 (the vertical space at T0 = 0 spans mean-zero paths)
    g = Grid(0.0, 1.0, 500)
    zero = const_path(g, np.zeros((2, 2), dtype=complex))
    t = AlgebraPath(g, np.sin(np.pi * g.nodes)[:, None, None] * E1[None])
    p = horizontal_project(zero, t)
    dev = p.values - (2.0 / np.pi) * E1[None]
    assert np.sqrt(quadrature(pairing_nodes(dev, dev), g)) < 1e-4


def test_horizontal_project_idempotent(rng):
    g = Grid(0.0, 1.0, 300)
    T0 = random_smooth_path(SU2, g, rng, scale=0.7)
    t = random_smooth_path(SU2, g, rng)
    p1 = horizontal_project(T0, t)
    p2 = horizontal_project(T0, p1)
    assert sup_norm(p2.values - p1.values) <= 1e-10 * max(1.0, sup_norm(p1.values))


def test_horizontal_project_orthogonality(rng):
    g = Grid(0.0, 1.0, 300)
    T0 = random_smooth_path(SU2, g, rng, scale=0.7)
    t = random_smooth_path(SU2, g, rng)
    p = horizontal_project(T0, t)
    for _ in range(5):
        v = vertical_field(T0, random_dirichlet_path(SU2, g, rng))
        ip = quadrature(pairing_nodes(p.values, v.values), g)
        scale = np.sqrt(quadrature(pairing_nodes(p.values, p.values), g))
        scale *= np.sqrt(quadrature(pairing_nodes(v.values, v.values), g))
        assert abs(ip) <= 1e-8 * max(scale, 1e-30)


def test_quotient_metric_constants():
    g = Grid(0.0, 1.0, 300)
    zero = const_path(g, np.zeros((2, 2), dtype=complex))
    t = const_path(g, E1)
    assert quotient_metric(zero, t, t) == pytest.approx(0.5, abs=1e-10)


def test_quotient_metric_constant_gauge_invariance(rng):
    g = Grid(0.0, 1.0, 300)
    T0 = random_smooth_path(SU2, g, rng, scale=0.6)
    t = random_smooth_path(SU2, g, rng)
    t2 = random_smooth_path(SU2, g, rng)
    base = quotient_metric(T0, t, t2)
    U = expm(SU2.random_element(rng))

    def conj(p):
        return AlgebraPath(g, U @ p.values @ U.conj().T)

    moved = quotient_metric(conj(T0), conj(t), conj(t2))
    assert moved == pytest.approx(base, abs=1e-8 * max(1.0, abs(base)))


def test_quotient_metric_vertical_vanishes(rng):
    g = Grid(0.0, 1.0, 300)
    T0 = random_smooth_path(SU2, g, rng, scale=0.6)
    v = vertical_field(T0, random_dirichlet_path(SU2, g, rng))
    assert abs(quotient_metric(T0, v, v)) <= 1e-10


def test_vertical_field_requires_dirichlet(rng):
    g = Grid(0.0, 1.0, 100)
    T0 = random_smooth_path(SU2, g, rng)
    with pytest.raises(ValueError):
        vertical_field(T0, random_smooth_path(SU2, g, rng))


def test_group_path_unitary_validation():
    g = Grid(0.0, 1.0, 10)
    vals = np.broadcast_to(2.0 * np.eye(2), (11, 2, 2)).copy().astype(complex)
    with pytest.raises(ValueError):
        GroupPath(g, vals, "unitary")
    GroupPath(g, vals, "complex")  # fine for the complexified group
