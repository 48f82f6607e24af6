import numpy as np
import pytest

from rarevel.errors import GridInadequacyError, StructuralError
from rarevel.kinetic import PrimitiveState, argon
from rarevel.mesh import annulus_sector, rectangle
from rarevel.solver.bc import (
    BoundarySet, DiffuseWall, Inflow, Outflow, SymmetryPlane, fill_ghosts, side_views,
    wall_mass_flux,
)
from rarevel.solver.steady import SteadySolver
from rarevel.velgrid import (
    FineGridSpec, generate_grid, rankine_hugoniot_fields, symmetrize_grid,
    uniform_grid,
)

GAS = argon()
FREE = PrimitiveState(3.17e-6, [5810.0, 0.0], 242.4)


def shock_grid(mode="P0", sym=False):
    field = rankine_hugoniot_fields(FREE, 293.0, GAS)
    g, _, _ = generate_grid(field, GAS, c=3, a=2, mode=mode, wall_T=293.0,
                            symmetry_axis=1 if sym else None)
    return g


def centred_grid(mode):
    s = np.sqrt(GAS.R * 293.0)
    return uniform_grid(FineGridSpec(np.array([-6 * s, -6 * s]), np.array([6 * s, 6 * s]),
                                     s / 2, (25, 25)), mode)


def random_state(rng, mesh, Q):
    ni, nj = mesh.shape
    return rng.uniform(0.0, 1.0, (ni + 4, nj + 4, 2 * Q)) * 1e-12


def walls_everywhere(T=293.0):
    return {s: DiffuseWall(T) for s in ("imin", "imax", "jmin", "jmax")}


@pytest.mark.parametrize("mode", ["Q1", "P0"])
@pytest.mark.parametrize("curved", [False, True])
def test_diffuse_wall_zero_mass_flux(mode, curved):
    rng = np.random.default_rng(11)
    grid = shock_grid(mode)
    mesh = annulus_sector(0.1, 0.2, 6, 7) if curved else rectangle(0.1, 0.05, 6, 7)
    bs = BoundarySet(walls_everywhere(), mesh, grid, GAS)
    Q = grid.npoints
    for _ in range(10):
        F = random_state(rng, mesh, Q)
        fill_ghosts(F, bs)
        for side in bs.wall_sides:
            a_in = bs.data[side][0]
            _, _, i1, _ = side_views(F, side)
            out = np.einsum("nq,nq,q->n", np.abs(np.minimum(a_in, 0)), i1[:, :Q], grid.weights)
            assert np.all(np.abs(wall_mass_flux(F, bs, side)) <= 1e-12 * out)


@pytest.mark.parametrize("mode", ["Q1", "P0"])
def test_wall_equilibrium_has_no_heat_flux(mode):
    grid = centred_grid(mode)
    for mesh in (rectangle(0.1, 0.05, 5, 4), annulus_sector(0.1, 0.2, 5, 4)):
        solver = SteadySolver(mesh, grid, walls_everywhere(), GAS)
        solver.initialize(PrimitiveState(2e-5, [0.0, 0.0], 293.0))
        q = solver.wall_heat_flux().q_n
        scale = 2e-5 * (GAS.R * 293.0) ** 1.5
        assert np.all(np.abs(q) <= 1e-10 * scale)


def test_wall_sigma_equals_density_at_rest():
    grid = centred_grid("Q1")
    mesh = rectangle(0.1, 0.05, 3, 3)
    solver = SteadySolver(mesh, grid, walls_everywhere(), GAS)
    solver.initialize(PrimitiveState(4e-6, [0.0, 0.0], 293.0))
    sig = solver.boundaries.fill(solver.F)
    for s in sig.values():
        assert np.allclose(s, 4e-6, rtol=1e-9)


def test_inflow_and_outflow_ghosts():
    rng = np.random.default_rng(1)
    grid = shock_grid()
    mesh = rectangle(0.1, 0.05, 4, 3)
    bs = BoundarySet({"imin": Inflow(FREE), "imax": Outflow(), "jmin": Outflow(),
                      "jmax": Outflow()}, mesh, grid, GAS)
    F = random_state(rng, mesh, grid.npoints)
    fill_ghosts(F, bs)
    g1, g2, i1, _ = side_views(F, "imin")
    assert np.array_equal(g1, g2)
    assert np.allclose(g1[0, :grid.npoints] @ grid.weights, FREE.rho, rtol=1e-10)
    for side in ("imax", "jmin", "jmax"):
        g1, g2, i1, _ = side_views(F, side)
        assert np.array_equal(g1, i1) and np.array_equal(g2, i1)


def test_symmetry_plane_mirrors():
    rng = np.random.default_rng(4)
    grid = shock_grid(sym=True)
    mesh = annulus_sector(0.1, 0.2, 4, 5)
    bs = BoundarySet({"imin": DiffuseWall(293.0), "imax": Inflow(FREE),
                      "jmin": SymmetryPlane(1), "jmax": Outflow()}, mesh, grid, GAS)
    F = random_state(rng, mesh, grid.npoints)
    fill_ghosts(F, bs)
    p = np.concatenate([grid.symmetry_pairing, grid.symmetry_pairing + grid.npoints])
    g1, g2, i1, i2 = side_views(F, "jmin")
    assert np.array_equal(g1, i1[:, p]) and np.array_equal(g2, i2[:, p])


def test_boundary_errors():
    grid = shock_grid()
    mesh = annulus_sector(0.1, 0.2, 4, 5)
    with pytest.raises(StructuralError):
        BoundarySet({"imin": Outflow()}, mesh, grid, GAS)
    bcs = {"imin": DiffuseWall(293.0), "imax": Inflow(FREE), "jmin": SymmetryPlane(1),
           "jmax": Outflow()}
    with pytest.raises(StructuralError):
        BoundarySet(bcs, mesh, grid, GAS)  # grid carries no pairing
    sym = symmetrize_grid(grid, 1)
    with pytest.raises(StructuralError):  # the jmax side of the sector is not an x-y plane
        BoundarySet(dict(bcs, jmin=Outflow(), jmax=SymmetryPlane(1)), mesh, sym, GAS)
    one_sided = uniform_grid(FineGridSpec(np.array([100.0, -50.0]), np.array([300.0, 50.0]),
                                          100.0, (3, 2)), "Q1")
    with pytest.raises(GridInadequacyError):
        BoundarySet(walls_everywhere(), rectangle(1, 1, 2, 2), one_sided, GAS)
