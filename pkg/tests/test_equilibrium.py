import math

import numpy as np
import pytest

from rarevel.equilibrium import (
    EquilibriumJacobian, initial_alpha, solve_discrete_equilibrium, solve_equilibria,
)
from rarevel.errors import GridInadequacyError
from rarevel.kinetic import (
    GasModel, PrimitiveState, air, argon, conserved_from_primitive, conserved_arrays,
    maxwellian_value,
)
from rarevel.velgrid import FineGridSpec, MacroField, generate_grid, uniform_grid

UNIT = GasModel(R=1.0, mu_ref=1.0, T_ref=1.0)


def random_field(rng, n, d=2):
    T = rng.uniform(1.0, 40.0, n) ** 2
    return MacroField((n,), rng.uniform(0.5, 2, n), rng.normal(0, 30, (n, d)), T)


def states_inside(rng, field, gas, k):
    """Random states near the cells of ``field`` (so the grid resolves them)."""
    idx = rng.integers(0, field.ncells, k)
    s = np.sqrt(gas.R * field.T[idx])
    rho = field.rho[idx] * rng.uniform(0.2, 5.0, k)
    u = field.u[idx] + rng.uniform(-0.3, 0.3, (k, field.dim)) * s[:, None]
    T = field.T[idx] * rng.uniform(0.8, 1.25, k)
    return rho, u, T


def frame(u, c):
    """Map from flow-frame moments to conserved moments (m(v) = L m((v-u)/c))."""
    d = len(u)
    L = np.zeros((d + 2, d + 2))
    L[0, 0] = 1.0
    L[1:d + 1, 0] = u
    L[1:d + 1, 1:d + 1] = c * np.eye(d)
    L[-1, 0] = 0.5 * u @ u
    L[-1, 1:d + 1] = c * u
    L[-1, -1] = c * c
    return L


def scaled_moment_residual(M, N, grid, U, gas):
    v, w = grid.points, grid.weights
    got = np.concatenate([[M @ w], v.T @ (M * w), [0.5 * np.sum(v * v, axis=1) @ (M * w) + N @ w]])
    rho = U[0]
    u = U[1:-1] / rho
    c = math.sqrt(gas.R * (U[-1] / rho - 0.5 * u @ u) / gas.energy_factor)
    vref = max(float(np.linalg.norm(u)), c)
    err = np.abs(got - U)
    return max(err[0] / rho, np.max(err[1:-1]) / (rho * vref), err[-1] / U[-1])


def test_continuous_alpha_on_fine_grid():
    gas = argon()
    p = PrimitiveState(1e-4, [800.0, -300.0], 600.0)
    s = math.sqrt(gas.R * p.T)
    spec = FineGridSpec(np.array(p.u) - 7 * s, np.array(p.u) + 7 * s, 14 * s / 100, (101, 101))
    grid = uniform_grid(spec, "Q1")
    eq = solve_discrete_equilibrium(p, grid, gas)
    assert eq.newton_iterations <= 3
    assert np.allclose(eq.alpha, initial_alpha(p, gas), rtol=1e-6)
    assert np.allclose(eq.M, maxwellian_value(p, grid.points, gas), rtol=1e-5, atol=0)
    # N carries delta_eff/2 R T per particle
    assert np.allclose(eq.N, eq.M * 0.5 * gas.delta_eff * gas.R * p.T, rtol=1e-5)


def test_equilibrium_reproduces_moments_exactly_on_coarse_grid():
    gas = air()
    spec = FineGridSpec(np.array([-1500.0, -1500.0]), np.array([1500.0, 1500.0]), 500.0, (7, 7))
    grid = uniform_grid(spec, "P0")
    p = PrimitiveState(1.0, [200.0, 100.0], 300.0)
    U = conserved_from_primitive(p, gas).as_vector()
    eq = solve_discrete_equilibrium(U, grid, gas)
    assert scaled_moment_residual(eq.M, eq.N, grid, U, gas) <= 1e-10
    # a coarse grid needs a different multiplier than the continuous one
    assert not np.allclose(eq.alpha, initial_alpha(p, gas), rtol=1e-3)


def test_conservative_equilibrium_suite():
    """500 random states on random AMR grids (both quadratures)."""
    rng = np.random.default_rng(42)
    n_total = 0
    worst_iter, worst_res, worst_jac = 0, 0.0, 0.0
    for trial in range(25):
        gas = UNIT if trial % 2 else argon()
        field = random_field(rng, int(rng.integers(1, 6)))
        if gas is not UNIT:
            field = MacroField(field.dims, field.rho * 1e-5, field.u * 20, field.T * 5)
        mode = "Q1" if trial % 3 else "P0"
        grid, _, _ = generate_grid(field, gas, mode=mode)
        rho, u, T = states_inside(rng, field, gas, 20)
        U = conserved_arrays(rho, u, T, gas)
        b = solve_equilibria(U, grid, gas, tol=1e-10, max_iter=20)
        worst_iter = max(worst_iter, int(b.iterations.max()))
        for k in range(len(U)):
            worst_res = max(worst_res, scaled_moment_residual(b.M[k], b.N[k], grid, U[k], gas))
            eq = solve_discrete_equilibrium(U[k], grid, gas)
            J = EquilibriumJacobian(eq, grid, gas)
            # unit step in the flow frame: density, peculiar momentum, internal energy
            z = rng.normal(size=U.shape[1])
            dU = rho[k] * frame(u[k], math.sqrt(gas.R * T[k])) @ (z / np.linalg.norm(z))
            h = 1e-5
            ep = solve_discrete_equilibrium(U[k] + h * dU, grid, gas, tol=1e-14, alpha0=eq.alpha)
            em = solve_discrete_equilibrium(U[k] - h * dU, grid, gas, tol=1e-14, alpha0=eq.alpha)
            fd = np.concatenate([ep.M - em.M, ep.N - em.N]) / (2 * h)
            dM, dN = J.apply(dU)
            an = np.concatenate([dM, dN])
            worst_jac = max(worst_jac, np.linalg.norm(an - fd) / np.linalg.norm(fd))
        n_total += len(U)
    assert n_total == 500
    assert worst_iter <= 20
    assert worst_res <= 1e-10
    assert worst_jac <= 1e-5


def test_diagonals_match_jacobian():
    gas = argon()
    spec = FineGridSpec(np.array([-2000.0, -2000.0]), np.array([2000.0, 2000.0]), 250.0, (17, 17))
    grid = uniform_grid(spec, "Q1")
    eq = solve_discrete_equilibrium(PrimitiveState(1e-5, [300.0, 50.0], 400.0), grid, gas)
    J = EquilibriumJacobian(eq, grid, gas)
    Df, Dg = J.diagonals()
    v, w = grid.points, grid.weights
    for q in (0, 40, 144, 200):
        e = 0.5 * v[q] @ v[q]
        dM, _ = J.apply(w[q] * np.concatenate([[1.0], v[q], [e]]))
        _, dN = J.apply(w[q] * np.array([0.0, 0.0, 0.0, 1.0]))
        assert math.isclose(Df[q], dM[q], rel_tol=1e-9)
        assert math.isclose(Dg[q], dN[q], rel_tol=1e-9)
    # moments of dM reproduce dU
    dU = np.array([1e-6, 2e-4, -1e-4, 0.3])
    dM, dN = J.apply(dU)
    got = np.concatenate([[dM @ w], v.T @ (dM * w), [0.5 * np.sum(v * v, 1) @ (dM * w) + dN @ w]])
    assert np.allclose(got, dU, rtol=1e-9, atol=1e-9 * np.abs(dU).max())


def test_grid_too_narrow_is_reported():
    gas = UNIT
    spec = FineGridSpec(np.array([-1.0, -1.0]), np.array([1.0, 1.0]), 2.0, (2, 2))
    grid = uniform_grid(spec, "Q1")
    with pytest.raises(GridInadequacyError):
        solve_discrete_equilibrium(PrimitiveState(1.0, [40.0, 0.0], 1.0), grid, gas)


def test_batch_status_without_raising():
    gas = UNIT
    spec = FineGridSpec(np.array([-6.0, -6.0]), np.array([6.0, 6.0]), 1.0, (13, 13))
    grid = uniform_grid(spec, "Q1")
    U = conserved_arrays(np.array([1.0, 1.0]), np.array([[0.0, 0.0], [0.5, 0.0]]),
                         np.array([1.0, 2.0]), gas)
    U[1, -1] = 0.1  # internal energy below zero
    b = solve_equilibria(U, grid, gas, raise_errors=False)
    assert b.status[0] == 0 and b.status[1] != 0
    with pytest.raises(GridInadequacyError):
        b.check()
