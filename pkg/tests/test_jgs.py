import numpy as np
import pytest

from rarevel.equilibrium import EquilibriumJacobian, solve_discrete_equilibrium, solve_equilibria
from rarevel.errors import LinearSolverError
from rarevel.kinetic import argon, conserved_arrays, relaxation_time_arrays
from rarevel.mesh import annulus_sector, rectangle
from rarevel.solver.jgs import ImplicitData, jgs_solve


class PointSet:
    def __init__(self, points, weights):
        self.points = np.asarray(points, float)
        self.weights = np.asarray(weights, float)


def four_point_grid():
    # distinct speeds, so the energy multiplier is not degenerate
    return PointSet([[-200.0, -120.0], [280.0, -80.0], [-80.0, 240.0], [160.0, 200.0]],
                    [2e5, 3e5, 2.5e5, 1.5e5])


def dense_transport(mesh, v):
    """First-order upwind operator per unit volume with zero ghost perturbations."""
    ni, nj = mesh.shape
    Q = len(v)
    n = ni * nj * Q
    T = np.zeros((n, n))

    def idx(i, j, q):
        return (i * nj + j) * Q + q

    for q in range(Q):
        for i in range(ni + 1):
            for j in range(nj):
                a = v[q] @ mesh.normal_i[i, j]
                L, R = (i - 1, j), (i, j)
                up = L if a > 0 else R
                for cell, sgn in ((L, 1.0), (R, -1.0)):
                    if 0 <= cell[0] < ni and 0 <= up[0] < ni:
                        T[idx(*cell, q), idx(*up, q)] += sgn * a / mesh.volumes[cell]
        for i in range(ni):
            for j in range(nj + 1):
                b = v[q] @ mesh.normal_j[i, j]
                L, R = (i, j - 1), (i, j)
                up = L if b > 0 else R
                for cell, sgn in ((L, 1.0), (R, -1.0)):
                    if 0 <= cell[1] < nj and 0 <= up[1] < nj:
                        T[idx(*cell, q), idx(*up, q)] += sgn * b / mesh.volumes[cell]
    return T


def dense_collision(U, tau, grid, gas):
    """Block-diagonal linearised BGK operator ``(I - dM/dF) / tau`` built column by column."""
    v, w = grid.points, grid.weights
    Q = len(w)
    nc = len(U)
    R = np.zeros((nc * 2 * Q, nc * 2 * Q))
    mom = np.vstack([np.ones(Q), v.T, 0.5 * np.sum(v * v, axis=1)])
    for k in range(nc):
        J = EquilibriumJacobian(solve_discrete_equilibrium(U[k], grid, gas), grid, gas)
        B = np.zeros((2 * Q, 2 * Q))
        for c in range(2 * Q):
            dU = np.zeros(4)
            if c < Q:
                dU = mom[:, c] * w[c]
            else:
                dU[-1] = w[c - Q]
            dM, dN = J.apply(dU)
            B[:, c] = np.concatenate([dM, dN])
        R[k * 2 * Q:(k + 1) * 2 * Q, k * 2 * Q:(k + 1) * 2 * Q] = (np.eye(2 * Q) - B) / tau[k]
    return R


def stacked_transport(T1, nc, Q):
    """Lift the per-point operator to the stacked (f, g) layout."""
    n = T1.shape[0]
    P = np.zeros((n, 2 * n))
    for k in range(nc):
        for q in range(Q):
            P[k * Q + q, k * 2 * Q + q] = 1.0
    T2 = np.zeros((2 * n, 2 * n))
    Pg = np.zeros_like(P)
    for k in range(nc):
        for q in range(Q):
            Pg[k * Q + q, k * 2 * Q + Q + q] = 1.0
    T2 += P.T @ T1 @ P + Pg.T @ T1 @ Pg
    return T2


@pytest.mark.parametrize("curved", [False, True])
def test_jgs_matches_dense_solve(curved):
    gas = argon()
    grid = four_point_grid()
    mesh = annulus_sector(0.1, 0.13, 3, 3) if curved else rectangle(0.03, 0.02, 3, 3)
    ni, nj = mesh.shape
    rng = np.random.default_rng(5)
    nc = ni * nj
    rho = rng.uniform(1e-6, 3e-6, nc)
    u = rng.uniform(-30, 30, (nc, 2))
    T = rng.uniform(300, 500, nc)
    U = conserved_arrays(rho, u, T, gas)
    eq = solve_equilibria(U, grid, gas)
    tau = relaxation_time_arrays(rho, T, gas)
    v = grid.points
    dt = 3.0 * float(np.median(tau))
    A = (np.eye(nc * 8) / dt + stacked_transport(dense_transport(mesh, v), nc, 4)
         + dense_collision(U, tau, grid, gas))
    imp = ImplicitData(eq, tau, grid)
    v2 = np.concatenate([v, v])
    worst = 0.0
    for _ in range(20):
        rhs = rng.normal(size=(ni, nj, 8)) * np.concatenate([np.ones(4), 1e5 * np.ones(4)])
        X = jgs_solve(rhs, mesh, v2, imp, dt, P=20)
        ref = np.linalg.solve(A, rhs.ravel())
        worst = max(worst, np.linalg.norm(X.ravel() - ref) / np.linalg.norm(ref))
    print(f"jgs vs dense: worst relative difference {worst:.2e}")
    assert worst <= 1e-8


def test_jgs_without_collisions_solves_transport():
    # upwind transport is triangular in j for each point: a forward and a backward sweep settle it
    gas = argon()
    grid = four_point_grid()
    mesh = rectangle(0.03, 0.02, 4, 3)
    ni, nj = mesh.shape
    rng = np.random.default_rng(2)
    nc = ni * nj
    U = conserved_arrays(np.full(nc, 1e-6), np.zeros((nc, 2)), np.full(nc, 400.0), gas)
    eq = solve_equilibria(U, grid, gas)
    tau = np.full(nc, 1e30)
    imp = ImplicitData(eq, tau, grid)
    v2 = np.concatenate([grid.points, grid.points])
    dt = 1e-6
    rhs = rng.normal(size=(ni, nj, 8))
    A = stacked_transport(dense_transport(mesh, grid.points), nc, 4) + np.eye(nc * 8) / dt
    ref = np.linalg.solve(A, rhs.ravel())
    X = jgs_solve(rhs, mesh, v2, imp, dt, P=1)
    assert np.allclose(X.ravel(), ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())


def test_vanishing_pivot_raises():
    gas = argon()
    grid = four_point_grid()
    mesh = rectangle(0.03, 0.02, 2, 2)
    U = conserved_arrays(np.full(4, 1e-6), np.zeros((4, 2)), np.full(4, 400.0), gas)
    eq = solve_equilibria(U, grid, gas)
    imp = ImplicitData(eq, np.ones(4), grid)
    v2 = np.concatenate([grid.points, grid.points])
    Delta = np.full((2, 2, 8), np.nan)
    with pytest.raises(LinearSolverError):
        jgs_solve(np.ones((2, 2, 8)), mesh, v2, imp, 1.0, P=1, Delta=Delta)
