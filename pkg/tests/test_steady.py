import numpy as np
import pytest

from rarevel.errors import DomainError, StructuralError
from rarevel.kinetic import PrimitiveState, argon
from rarevel.mesh import SpaceMesh2D, annulus_sector, rectangle
from rarevel.solver.bc import DiffuseWall, Inflow, Outflow, SymmetryPlane
from rarevel.solver.steady import SolverConfig, SteadySolver, interpolate_macro, run_to_steady
from rarevel.velgrid import (
    FineGridSpec, MacroField, generate_grid, rankine_hugoniot_fields, uniform_grid,
)

GAS = argon()
FREE = PrimitiveState(3.17e-6, [5810.0, 0.0], 242.4)


def shock_grid(sym=False, c=3.0):
    field = rankine_hugoniot_fields(FREE, 293.0, GAS)
    g, _, _ = generate_grid(field, GAS, c=c, a=2, mode="P0", wall_T=293.0,
                            symmetry_axis=1 if sym else None)
    return g


def all_inflow(state):
    return {s: Inflow(state) for s in ("imin", "imax", "jmin", "jmax")}


@pytest.mark.parametrize("mesh", [rectangle(0.1, 0.1, 10, 10),
                                  annulus_sector(0.1, 0.3, 10, 10, first_cell=0.005)],
                         ids=["rectangle", "sector"])
def test_uniform_equilibrium_is_a_fixed_point(mesh):
    grid = shock_grid()
    solver = SteadySolver(mesh, grid, all_inflow(FREE), GAS, SolverConfig())
    solver.initialize(FREE)
    F0 = solver.interior.copy()
    res = [solver.advance()[0] for _ in range(10)]
    assert res[0] <= 1e-9
    assert np.max(np.abs(solver.interior - F0)) <= 1e-12 * np.max(np.abs(F0))


def mirrored_mesh(half: SpaceMesh2D) -> SpaceMesh2D:
    """Full domain made of ``half`` and its image in y = 0 (j of the half runs away from it)."""
    low = half.nodes[:, ::-1].copy()
    low[..., 1] *= -1
    return SpaceMesh2D(np.concatenate([low[:, :-1], half.nodes], axis=1),
                       body_center=half.body_center)


def mirror_alpha(alpha, nj):
    """Multipliers of the mirror cells: the y-momentum component flips sign."""
    a = alpha.reshape(-1, nj, alpha.shape[1])[:, ::-1].copy()
    a[..., 2] *= -1
    return a


def symmetry_pair(nj=6):
    """Half-domain solver plus a full-domain solver to check it against."""
    grid = shock_grid(sym=True)
    half = annulus_sector(0.1, 0.25, 8, nj, first_cell=0.004)
    full = mirrored_mesh(half)
    cfg = SolverConfig(dt_growth=1.1, second_order_half_factor=True)
    wall, inflow = DiffuseWall(293.0), Inflow(FREE)
    sh = SteadySolver(half, grid, {"imin": wall, "imax": inflow, "jmin": SymmetryPlane(1),
                                   "jmax": Outflow()}, GAS, cfg).initialize(FREE)
    sf = SteadySolver(full, grid, {"imin": wall, "imax": inflow, "jmin": Outflow(),
                                   "jmax": Outflow()}, GAS, cfg)
    return grid, sh, sf


def mirror_residuals(grid, sh, sf):
    """Compare the half-domain right-hand side with that of its mirror extension.

    Returns the mismatch against the upper half of the full domain (relative
    to the largest half-domain entry) and the asymmetry between the two
    halves of the full domain (relative to the size of the collision term,
    since the halves sum the same terms in a different order).
    """
    nj = sh.mesh.nj
    Q = grid.npoints
    p = np.concatenate([grid.symmetry_pairing, grid.symmetry_pairing + Q])
    sf.interior[:, nj:] = sh.interior
    sf.interior[:, :nj] = sh.interior[:, ::-1][..., p]
    a_half = sh.alpha.reshape(-1, nj, sh.alpha.shape[1])
    sf.alpha = np.concatenate([mirror_alpha(sh.alpha, nj), a_half],
                              axis=1).reshape(-1, a_half.shape[2])
    rf = sf.assemble_rhs()[0]
    rh, _, tau = sh.assemble_rhs()
    top = rf[:, nj:]
    bottom = rf[:, nj - 1::-1][..., p]
    coll = np.max(np.abs(sh.interior) / tau.reshape(sh.mesh.shape + (1,)))
    return np.max(np.abs(top - rh)) / np.max(np.abs(rh)), np.max(np.abs(bottom - top)) / coll


def test_symmetry_plane_is_consistent_with_full_domain():
    grid, sh, sf = symmetry_pair()
    worst = np.zeros(2)
    for _ in range(100):
        sh.advance()
        worst = np.maximum(worst, mirror_residuals(grid, sh, sf))
    print(f"mirror residual over 100 steps: {worst[0]:.2e} (full-domain asymmetry {worst[1]:.2e})")
    assert worst[0] <= 1e-12
    assert worst[1] <= 1e-12
    # the run did something: the wall layer departs from the free stream
    assert np.max(np.abs(sh.interior[0] - sh.interior[-1])) > 1e-3 * np.max(sh.interior)


def test_heat_conduction_between_walls_converges():
    s = np.sqrt(GAS.R * 350.0)
    grid = uniform_grid(FineGridSpec(np.array([-5 * s, -5 * s]), np.array([5 * s, 5 * s]),
                                     s / 1.5, (16, 16)), "Q1")
    mesh = rectangle(0.01, 0.002, 20, 2)
    bcs = {"imin": DiffuseWall(300.0), "imax": DiffuseWall(400.0), "jmin": Outflow(),
           "jmax": Outflow()}
    cfg = SolverConfig(dt_growth=1.2, steady_tol=1e-7, max_outer=400,
                       second_order_half_factor=True)
    rep = run_to_steady(mesh, grid, bcs, GAS, PrimitiveState(1e-4, [0.0, 0.0], 350.0), cfg)
    assert rep.converged and rep.residual_drop >= 1e4
    assert rep.iterations == len(rep.residuals) == len(rep.dts)
    q = rep.wall_flux.q_n.reshape(2, -1)
    # energy flows into the cold wall and out of the hot one
    assert np.all(q[0] > 0) and np.all(q[1] < 0)
    assert np.allclose(q[0], -q[1], rtol=1e-4)
    T = rep.field.T.reshape(2, 20)[0]
    assert np.all(np.diff(T) > 0) and 300 < T[0] and T[-1] < 400
    # cell-centred momentum is zero only up to the upwind discretisation error
    assert np.allclose(rep.field.u, 0, atol=1e-2 * s)
    assert rep.dts[1] / rep.dts[0] == pytest.approx(1.2)


def test_solver_config_validation():
    for bad in (dict(dt_initial=0.0), dict(dt_growth=0.9), dict(inner_sweeps=0),
                dict(steady_tol=0.0), dict(max_outer=0), dict(eq_tol=-1.0)):
        with pytest.raises(DomainError):
            SolverConfig(**bad)
    with pytest.raises(StructuralError):
        SolverConfig.from_dict({"dt_grow": 1.1})
    assert SolverConfig.from_dict({"dt_growth": 1.1}).dt_growth == 1.1


def test_time_step_cap():
    grid = shock_grid()
    mesh = rectangle(0.1, 0.1, 3, 3)
    s = SteadySolver(mesh, grid, all_inflow(FREE), GAS,
                     SolverConfig(dt_initial=1e-7, dt_growth=2.0, dt_max_factor=8.0))
    s.initialize(FREE)
    dts = [s.advance()[1] for _ in range(6)]
    assert np.allclose(dts, [1e-7, 2e-7, 4e-7, 8e-7, 8e-7, 8e-7])


def test_solver_rejects_mismatched_grid():
    g3 = uniform_grid(FineGridSpec(np.full(3, -1e3), np.full(3, 1e3), 500.0, (5, 5, 5)))
    with pytest.raises(StructuralError):
        SteadySolver(rectangle(1, 1, 2, 2), g3, all_inflow(FREE), GAS)


def test_interpolate_macro():
    mesh = rectangle(1.0, 1.0, 3, 2)
    k = np.arange(6.0)
    f = MacroField((3, 2), 1 + k, np.zeros((6, 2)), 300 + k)  # i fastest
    rho, _, T = interpolate_macro(f, mesh)
    # solver order is k = i*nj + j
    assert np.array_equal(rho, [1, 4, 2, 5, 3, 6]) and np.array_equal(T - 299, rho)
    c = mesh.centers.transpose(1, 0, 2).reshape(-1, 2)
    g = MacroField((6,), 1 + k, np.zeros((6, 2)), 300 + k, coords=c)
    assert np.allclose(interpolate_macro(g, mesh)[0], rho)
    with pytest.raises(StructuralError):
        interpolate_macro(MacroField((6,), 1 + k, np.zeros((6, 2)), 300 + k), mesh)
