"""Locally refined discrete-velocity grids built from macroscopic fields.

Pipeline::

    spec = fine_grid_spec(field, gas, c=4, a=2)
    phi = build_support_function(field, spec, gas, c=4, wall_T=293.0)
    grid = attach_quadrature(generate_amr(spec, phi, a=2), "P0")

Leaves are stored on an integer lattice (origin + integer multiples of a
per-axis unit) so vertex deduplication, mirroring and weight sums are exact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, RefinementOverflowError, StructuralError
from .kinetic import GasModel, PrimitiveState

DEFAULT_C = 4.0
DEFAULT_A = 2.0
DEFAULT_MAX_LEVEL = 12


@dataclass
class MacroField:
    """Cell-wise (rho, u, T) on a structured mesh, i fastest."""

    dims: tuple
    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray
    coords: Optional[np.ndarray] = None

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.rho = np.asarray(self.rho, dtype=float).reshape(-1)
        self.T = np.asarray(self.T, dtype=float).reshape(-1)
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim == 1:
            self.u = self.u.reshape(len(self.rho), -1)
        n = len(self.rho)
        if n == 0:
            raise StructuralError("empty macroscopic field")
        if int(np.prod(self.dims)) != n or self.u.shape[0] != n or self.T.shape != (n,):
            raise StructuralError(f"dims {self.dims} inconsistent with {n} cells")
        if self.coords is not None:
            self.coords = np.asarray(self.coords, dtype=float).reshape(n, -1)
        bad = np.flatnonzero(~(self.rho > 0) | ~(self.T > 0))
        if bad.size:
            k = int(bad[0])
            raise DomainError(f"cell {self.cell_index(k)}: rho={self.rho[k]}, T={self.T[k]}")

    @property
    def ncells(self) -> int:
        return len(self.rho)

    @property
    def dim(self) -> int:
        return self.u.shape[1]

    def cell_index(self, k):
        """Structured index of flat cell ``k`` (i fastest)."""
        idx = []
        for n in self.dims:
            idx.append(k % n)
            k //= n
        return tuple(int(i) for i in idx)

    def cell(self, k) -> PrimitiveState:
        return PrimitiveState(self.rho[k], self.u[k], self.T[k])

    def thermal_speed(self, gas: GasModel) -> np.ndarray:
        return np.sqrt(gas.R * self.T)

    def mirrored(self, axis: int) -> "MacroField":
        """Field extended with its mirror image (velocity component flipped)."""
        u2 = self.u.copy()
        u2[:, axis] *= -1
        coords = None
        if self.coords is not None and self.coords.shape[1] > axis:
            c2 = self.coords.copy()
            c2[:, axis] *= -1
            coords = np.concatenate([self.coords, c2])
        return MacroField((2 * self.ncells,), np.concatenate([self.rho, self.rho]),
                          np.concatenate([self.u, u2]), np.concatenate([self.T, self.T]),
                          coords)


@dataclass
class FineGridSpec:
    vmin: np.ndarray
    vmax: np.ndarray
    dv: float
    n: tuple
    p0_extended: bool = False

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.n))

    def axis_nodes(self, axis) -> np.ndarray:
        return self.vmin[axis] + self.dv * np.arange(self.n[axis])

    def nodes(self) -> np.ndarray:
        """All fine nodes, shape ``(npoints, d)``, C order over axes."""
        mesh = np.meshgrid(*[self.axis_nodes(k) for k in range(self.dim)], indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _fit_axis(lo, hi, dv, half=False, symmetric=False):
    if symmetric:
        k = math.ceil(max(abs(lo), abs(hi)) / dv - 1e-9)
        return -k * dv, k * dv, 2 * k + 1
    if half:
        k = max(1, math.ceil(hi / dv - 1e-9))
        return 0.0, k * dv, k + 1
    span = hi - lo
    k = max(1, math.ceil(span / dv - 1e-9))
    extra = k * dv - span
    return lo - 0.5 * extra, hi + 0.5 * extra, k + 1


def fine_grid_spec(field: MacroField, gas: GasModel, c=DEFAULT_C, a=DEFAULT_A,
                   extend_for_p0=False, symmetric_axes: Sequence[int] = (),
                   half_axes: Sequence[int] = ()) -> FineGridSpec:
    """Bounds ``min/max(u +- c sqrt(RT))`` and step ``a min sqrt(RT)``.

    The span of every axis is widened symmetrically to an integer number of
    steps.  ``symmetric_axes`` forces bounds ``[-V, V]`` with a node at 0;
    ``half_axes`` pins the lower bound at 0 (cylindrical radius, or the
    half-grid that is later mirrored).
    """
    if not (c > 0 and a > 0):
        raise DomainError("c and a must be positive")
    if field.ncells == 0:
        raise StructuralError("empty field")
    s = field.thermal_speed(gas)
    dv = a * float(s.min())
    hi = np.max(field.u + c * s[:, None], axis=0)
    lo = np.min(field.u - c * s[:, None], axis=0)
    vmin, vmax, n = [], [], []
    for k in range(field.dim):
        l, h, m = _fit_axis(lo[k], hi[k], dv, half=k in half_axes,
                            symmetric=k in symmetric_axes)
        if extend_for_p0:
            h += dv
            m += 1
            if k not in half_axes:
                l -= dv
                m += 1
        vmin.append(l)
        vmax.append(h)
        n.append(m)
    return FineGridSpec(np.array(vmin), np.array(vmax), dv, tuple(n), bool(extend_for_p0))


@dataclass
class SupportFunction:
    phi: np.ndarray            # one value per fine node, flattened like spec.nodes()
    spec: FineGridSpec
    wall_entry: Optional[tuple] = None   # (velocity vector, sqrt(R T_wall))

    @property
    def values(self) -> np.ndarray:
        """Node values plus the wall entry, if any."""
        if self.wall_entry is None:
            return self.phi
        return np.append(self.phi, self.wall_entry[1])

    def as_lattice(self) -> np.ndarray:
        return self.phi.reshape(self.spec.n)


def build_support_function(field: MacroField, spec: FineGridSpec, gas: GasModel,
                           c=DEFAULT_C, wall_T=None) -> SupportFunction:
    """Support function on the fine nodes.

    Cells are visited by decreasing sqrt(RT); each overwrites the nodes
    inside its sphere ``|v - u| <= c sqrt(RT)``, so the narrowest covering
    distribution wins.  Nodes covered by no sphere keep ``max sqrt(RT)``.
    """
    if field.dim != spec.dim:
        raise StructuralError(f"field has {field.dim} velocity components, grid {spec.dim}")
    psi = field.thermal_speed(gas)
    order = np.argsort(-psi, kind="stable")
    phi = np.full(spec.n, psi.max())
    axes = [spec.axis_nodes(k) for k in range(spec.dim)]
    for I in order:
        center = field.u[I]
        radius = c * psi[I]
        sl = []
        for k in range(spec.dim):
            i0 = max(0, math.floor((center[k] - radius - spec.vmin[k]) / spec.dv) - 1)
            i1 = min(spec.n[k], math.ceil((center[k] + radius - spec.vmin[k]) / spec.dv) + 2)
            if i1 <= i0:
                break
            sl.append(slice(i0, i1))
        else:
            d2 = np.zeros([s.stop - s.start for s in sl])
            for k, s in enumerate(sl):
                shape = [1] * spec.dim
                shape[k] = -1
                d2 = d2 + ((axes[k][s] - center[k]) ** 2).reshape(shape)
            block = phi[tuple(sl)]
            block[d2 <= radius * radius] = psi[I]
    wall = None
    if wall_T is not None:
        wall = (np.zeros(spec.dim), math.sqrt(gas.R * wall_T))
    return SupportFunction(phi.reshape(-1), spec, wall)


def support_function_oracle(field: MacroField, spec: FineGridSpec, gas: GasModel, c=DEFAULT_C):
    """Closed-form min over covering spheres, capped by max sqrt(RT); no sorting."""
    psi = field.thermal_speed(gas)
    nodes = spec.nodes()
    out = np.empty(len(nodes))
    for s in range(0, len(nodes), 4096):
        diff = nodes[s:s + 4096, None, :] - field.u[None]
        inside = np.sqrt(np.sum(diff * diff, axis=2)) <= c * psi
        out[s:s + 4096] = np.min(np.where(inside, psi, psi.max()), axis=1)
    return out


@dataclass
class AmrVelocityGrid:
    """Velocity grid made of axis-aligned leaves on an integer lattice.

    ``origin + unit * k`` are the lattice coordinates; ``leaf_lo`` and
    ``leaf_size`` are integer lattice boxes.  Cylindrical grids live in the
    ``(v_x, zeta)`` half plane and are rotated over ``n_omega`` angles.
    """

    origin: np.ndarray
    unit: np.ndarray
    extent: np.ndarray
    leaf_lo: np.ndarray
    leaf_size: np.ndarray
    levels: np.ndarray
    coordinate_system: str = "cartesian"
    n_omega: int = 0
    mode: Optional[str] = None
    points: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    point_keys: Optional[np.ndarray] = None
    symmetry_axis: Optional[int] = None
    symmetry_pairing: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return len(self.origin)

    @property
    def nleaves(self) -> int:
        return len(self.levels)

    @property
    def npoints(self) -> int:
        return 0 if self.weights is None else len(self.weights)

    @property
    def root_lo(self) -> np.ndarray:
        return self.origin.copy()

    @property
    def root_hi(self) -> np.ndarray:
        return self.origin + self.unit * self.extent

    @property
    def centers(self) -> np.ndarray:
        return self.origin + self.unit * (self.leaf_lo + 0.5 * self.leaf_size)

    @property
    def half_widths(self) -> np.ndarray:
        return 0.5 * self.unit * self.leaf_size

    @property
    def delta_omega(self) -> float:
        return math.pi / self.n_omega if self.n_omega else 0.0

    def leaf_bounds(self):
        lo = self.origin + self.unit * self.leaf_lo
        hi = self.origin + self.unit * (self.leaf_lo + self.leaf_size)
        return lo, hi

    def leaf_volumes(self) -> np.ndarray:
        """Measure of each leaf (cylindrical: integrated over omega in [0, pi])."""
        if self.coordinate_system == "cylindrical":
            lo, hi = self.leaf_bounds()
            return (hi[:, 0] - lo[:, 0]) * 0.5 * (hi[:, 1] ** 2 - lo[:, 1] ** 2) * math.pi
        return np.prod(self.leaf_size, axis=1).astype(float) * float(np.prod(self.unit))

    def root_volume(self) -> float:
        lo, hi = self.root_lo, self.root_hi
        if self.coordinate_system == "cylindrical":
            return float((hi[0] - lo[0]) * 0.5 * (hi[1] ** 2 - lo[1] ** 2) * math.pi)
        return float(np.prod(hi - lo))

    def min_cell_size(self) -> float:
        return float(np.min(self.leaf_size * self.unit))

    def max_cell_size(self) -> float:
        return float(np.max(self.leaf_size * self.unit))

    def cartesian_points(self) -> np.ndarray:
        """3D Cartesian velocities of a cylindrical grid (omega in [0, pi])."""
        if self.coordinate_system != "cylindrical":
            return self.points
        vx, zeta, om = self.points.T
        return np.stack([vx, zeta * np.cos(om), zeta * np.sin(om)], axis=1)

    def pair_of(self, q):
        return int(self.symmetry_pairing[q])


def _leaf_min_phi(phi_lat, spec: FineGridSpec, lo, hi, wall_entry):
    sl = []
    for k in range(spec.dim):
        i0 = max(0, math.ceil((lo[k] - spec.vmin[k]) / spec.dv - 1e-9))
        i1 = min(spec.n[k] - 1, math.floor((hi[k] - spec.vmin[k]) / spec.dv + 1e-9))
        if i1 < i0:
            sl = None
            break
        sl.append(slice(i0, i1 + 1))
    m = None if sl is None else float(phi_lat[tuple(sl)].min())
    if wall_entry is not None:
        v0, val = wall_entry
        if np.all(lo <= v0) and np.all(v0 <= hi):
            m = val if m is None else min(m, val)
    return m


def generate_amr(spec: FineGridSpec, phi: SupportFunction, a=DEFAULT_A,
                 max_level=DEFAULT_MAX_LEVEL) -> AmrVelocityGrid:
    """Recursive bisection of the fine-grid box driven by the support function.

    A cell is split into ``2**d`` children while one of its edges exceeds
    ``a * min(phi)`` over the fine nodes it contains; cells that contain no
    node use ``a * max(phi)``.
    """
    d = spec.dim
    phi_lat = phi.as_lattice()
    top = a * float(np.max(phi.values))
    lo_root = np.asarray(spec.vmin, dtype=float)
    width = np.asarray(spec.vmax, dtype=float) - lo_root
    leaves = []
    stack = [(0, (0,) * d)]
    corners = list(np.ndindex(*(2,) * d))
    while stack:
        level, idx = stack.pop()
        edge = width / 2 ** level
        lo = lo_root + edge * np.array(idx)
        hi = lo + edge
        m = _leaf_min_phi(phi_lat, spec, lo, hi, phi.wall_entry)
        m = top if m is None else a * m
        if np.any(edge > m):
            if level >= max_level:
                raise RefinementOverflowError(
                    f"cell at level {level} with bounds {lo.tolist()}..{hi.tolist()} "
                    f"still exceeds a*min(phi)={m:.6g}", cell=(level, idx))
            for off in reversed(corners):
                stack.append((level + 1, tuple(2 * i + o for i, o in zip(idx, off))))
        else:
            leaves.append((level, idx))
    lmax = max(lv for lv, _ in leaves)
    levels = np.array([lv for lv, _ in leaves], dtype=np.int64)
    size = (2 ** (lmax - levels))[:, None] * np.ones((1, d), dtype=np.int64)
    leaf_lo = np.array([idx for _, idx in leaves], dtype=np.int64) * size
    unit = width / 2 ** lmax
    extent = np.full(d, 2 ** lmax, dtype=np.int64)
    grid = AmrVelocityGrid(lo_root, unit, extent, leaf_lo, size, levels)
    return _sorted(grid)


def _sorted(grid: AmrVelocityGrid) -> AmrVelocityGrid:
    # lexicographic by centre coordinate, axis 0 first
    key2 = 2 * grid.leaf_lo + grid.leaf_size
    order = np.lexsort(key2.T[::-1])
    grid.leaf_lo = grid.leaf_lo[order]
    grid.leaf_size = grid.leaf_size[order]
    grid.levels = grid.levels[order]
    return grid


def uniform_grid(spec: FineGridSpec, mode="Q1", coordinate_system="cartesian",
                 n_omega=0) -> AmrVelocityGrid:
    """The fine Cartesian grid itself, one leaf per lattice cell."""
    d = spec.dim
    cells = np.array(list(np.ndindex(*[n - 1 for n in spec.n])), dtype=np.int64)
    grid = AmrVelocityGrid(np.asarray(spec.vmin, float), np.full(d, spec.dv),
                           np.array([n - 1 for n in spec.n], dtype=np.int64),
                           cells, np.ones_like(cells), np.zeros(len(cells), dtype=np.int64),
                           coordinate_system=coordinate_system, n_omega=n_omega)
    return attach_quadrature(_sorted(grid), mode)


def attach_quadrature(grid: AmrVelocityGrid, mode="P0") -> AmrVelocityGrid:
    """Q1: leaf vertices with corner-shared volumes; P0: leaf centres with volumes."""
    mode = mode.upper()
    if mode not in ("Q1", "P0"):
        raise ValueError(f"unknown quadrature mode {mode!r}")
    d = grid.dim
    cyl = grid.coordinate_system == "cylindrical"
    if mode == "P0":
        keys = 2 * grid.leaf_lo + grid.leaf_size
        if cyl:
            lo, hi = grid.leaf_bounds()
            w2 = (hi[:, 0] - lo[:, 0]) * 0.5 * (hi[:, 1] ** 2 - lo[:, 1] ** 2)
        else:
            w2 = np.prod(grid.leaf_size, axis=1).astype(float) * float(np.prod(grid.unit))
    else:
        corners = np.array(list(np.ndindex(*(2,) * d)), dtype=np.int64)
        allkeys = (2 * (grid.leaf_lo[:, None, :] + corners[None] * grid.leaf_size[:, None, :])
                   ).reshape(-1, d)
        keys, inverse = np.unique(allkeys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        if cyl:
            lo, hi = grid.leaf_bounds()
            vol = (hi[:, 0] - lo[:, 0]) * 0.5 * (hi[:, 1] ** 2 - lo[:, 1] ** 2) / 2 ** d
            w2 = np.zeros(len(keys))
            np.add.at(w2, inverse, np.repeat(vol, 2 ** d))
        else:
            # integer lattice volumes keep shared-vertex sums exact
            ivol = np.prod(grid.leaf_size, axis=1)
            acc = np.zeros(len(keys), dtype=np.int64)
            np.add.at(acc, inverse, np.repeat(ivol, 2 ** d))
            w2 = acc.astype(float) * (float(np.prod(grid.unit)) / 2 ** d)
    pts2 = grid.origin + grid.unit * (0.5 * keys)
    out = replace(grid, mode=mode, symmetry_pairing=None)
    if cyl:
        n_om = grid.n_omega
        dom = math.pi / n_om
        omega = (np.arange(n_om) + 0.5) * dom
        npt = len(pts2)
        out.points = np.column_stack([np.repeat(pts2, n_om, axis=0),
                                      np.tile(omega, npt)])
        out.weights = np.repeat(w2 * dom, n_om)
        out.point_keys = np.column_stack([np.repeat(keys, n_om, axis=0),
                                          np.tile(np.arange(n_om), npt)])
    else:
        out.points = pts2
        out.weights = w2
        out.point_keys = keys
    if grid.symmetry_axis is not None and not cyl:
        ax = grid.symmetry_axis
        out.symmetry_pairing = p = _pairing(out, ax)
        # exact mirror images (origin + unit*k rounds differently on both sides)
        out.points = out.points.copy()
        out.points[:, ax] = 0.5 * (out.points[:, ax] - out.points[p, ax])
    return out


def _pairing(grid: AmrVelocityGrid, axis: int) -> np.ndarray:
    plane2 = int(round(-4 * grid.origin[axis] / grid.unit[axis]))  # doubled-unit keys
    lookup = {tuple(k): q for q, k in enumerate(grid.point_keys.tolist())}
    pairing = np.empty(grid.npoints, dtype=np.int64)
    for q, k in enumerate(grid.point_keys.tolist()):
        k = list(k)
        k[axis] = plane2 - k[axis]
        try:
            pairing[q] = lookup[tuple(k)]
        except KeyError:
            raise StructuralError(f"point {q} has no mirror image across axis {axis}") from None
    return pairing


def symmetrize_grid(grid: AmrVelocityGrid, axis: int) -> AmrVelocityGrid:
    """Mirror-symmetric grid about ``v[axis] = 0`` plus the point pairing.

    A one-sided grid (root box starting or ending at 0) is reflected and
    merged; a grid whose root box is already symmetric must have mirror-
    symmetric leaves.
    """
    if grid.coordinate_system != "cartesian":
        raise StructuralError("only Cartesian grids can be symmetrized")
    mode = grid.mode or "P0"
    o = grid.origin[axis]
    u = grid.unit[axis]
    ext = int(grid.extent[axis])
    plane = -o / u
    if abs(plane - round(plane)) > 1e-9 * max(1.0, abs(plane)):
        raise StructuralError("symmetry plane is not on the grid lattice")
    plane = int(round(plane))
    lo = grid.leaf_lo.copy()
    size = grid.leaf_size
    mirror_lo = lo.copy()
    mirror_lo[:, axis] = 2 * plane - lo[:, axis] - size[:, axis]
    if plane == ext or plane == 0:
        origin = grid.origin.copy()
        extent = grid.extent.copy()
        extent[axis] = 2 * ext
        if plane == 0:
            origin[axis] = -ext * u
            shift = ext
        else:
            shift = 0
        lo[:, axis] += shift
        mirror_lo[:, axis] += shift
        new = AmrVelocityGrid(origin, grid.unit.copy(), extent,
                              np.concatenate([lo, mirror_lo]),
                              np.concatenate([size, size]),
                              np.concatenate([grid.levels, grid.levels]),
                              symmetry_axis=axis)
    elif 2 * plane == ext:
        a = {(tuple(l), tuple(s)) for l, s in zip(lo.tolist(), size.tolist())}
        b = {(tuple(l), tuple(s)) for l, s in zip(mirror_lo.tolist(), size.tolist())}
        if a != b:
            raise StructuralError("root box is symmetric but the leaves are not")
        new = replace(grid, symmetry_axis=axis, leaf_lo=lo.copy())
    else:
        raise StructuralError("root box is neither one-sided nor symmetric about 0")
    return attach_quadrature(_sorted(new), mode)


def check_terminal_property(grid: AmrVelocityGrid, spec: FineGridSpec,
                            phi: SupportFunction, a=DEFAULT_A) -> bool:
    phi_lat = phi.as_lattice()
    top = a * float(np.max(phi.values))
    lo, hi = grid.leaf_bounds()
    for k in range(grid.nleaves):
        m = _leaf_min_phi(phi_lat, spec, lo[k], hi[k], phi.wall_entry)
        m = top if m is None else a * m
        if np.any(hi[k] - lo[k] > m * (1 + 1e-12)):
            return False
    return True


def leaves_disjoint(grid: AmrVelocityGrid) -> bool:
    """Exact check on the integer lattice: total leaf volume equals the
    volume covered (by painting a boolean lattice)."""
    paint = np.zeros(tuple(int(e) for e in grid.extent), dtype=np.int32)
    for lo, sz in zip(grid.leaf_lo, grid.leaf_size):
        paint[tuple(slice(int(l), int(l + s)) for l, s in zip(lo, sz))] += 1
    return bool(np.all(paint == 1))


# -- variants -----------------------------------------------------------------

def rankine_hugoniot_fields(upstream: PrimitiveState, wall_T: float, gas: GasModel) -> MacroField:
    """Upstream, post normal-shock and wall states as a three-cell field."""
    speed = float(np.linalg.norm(upstream.u))
    g = gas.gamma
    c_sound = math.sqrt(g * gas.R * upstream.T)
    M = speed / c_sound
    if not M > 1:
        raise DomainError(f"upstream Mach number {M:.4g} is not supersonic")
    M2 = M * M
    rho_ratio = (g + 1) * M2 / ((g - 1) * M2 + 2)
    T_ratio = (2 * g * M2 - (g - 1)) * ((g - 1) * M2 + 2) / ((g + 1) ** 2 * M2)
    rho_d = upstream.rho * rho_ratio
    T_d = upstream.T * T_ratio
    u_d = upstream.u / rho_ratio
    p_d = rho_d * gas.R * T_d
    rho_w = p_d / (gas.R * wall_T)
    d = len(upstream.u)
    return MacroField((3,), [upstream.rho, rho_d, rho_w],
                      np.stack([upstream.u, u_d, np.zeros(d)]),
                      [upstream.T, T_d, wall_T])


def normal_shock_ratios(M, gamma):
    """(density, velocity, temperature) ratios across a stationary normal shock."""
    M2 = M * M
    r = (gamma + 1) * M2 / ((gamma - 1) * M2 + 2)
    t = (2 * gamma * M2 - (gamma - 1)) * ((gamma - 1) * M2 + 2) / ((gamma + 1) ** 2 * M2)
    return r, 1.0 / r, t


def generate_grid(field: MacroField, gas: GasModel, c=DEFAULT_C, a=DEFAULT_A, mode="P0",
                  extend_for_p0=False, wall_T=None, symmetry_axis=None,
                  max_level=DEFAULT_MAX_LEVEL):
    """Fine spec -> support function -> AMR -> quadrature (-> mirror).

    With ``symmetry_axis`` the field is mirrored, the half grid
    ``v[axis] >= 0`` is refined and then reflected.  Returns
    ``(grid, spec, phi)`` where ``spec`` is the full fine grid.
    """
    if symmetry_axis is None:
        spec = fine_grid_spec(field, gas, c, a, extend_for_p0)
        phi = build_support_function(field, spec, gas, c, wall_T)
        grid = attach_quadrature(generate_amr(spec, phi, a, max_level), mode)
        return grid, spec, phi
    full = field.mirrored(symmetry_axis)
    half = fine_grid_spec(full, gas, c, a, extend_for_p0, half_axes=(symmetry_axis,))
    phi = build_support_function(full, half, gas, c, wall_T)
    grid = generate_amr(half, phi, a, max_level)
    grid.mode = mode
    grid = symmetrize_grid(grid, symmetry_axis)
    spec = fine_grid_spec(full, gas, c, a, extend_for_p0, symmetric_axes=(symmetry_axis,))
    return grid, spec, phi


def generate_axisym_grid(field: MacroField, gas: GasModel, c=DEFAULT_C, a=DEFAULT_A,
                         n_omega=30, mode="Q1", wall_T=None,
                         max_level=DEFAULT_MAX_LEVEL):
    """Cylindrical ``(v_x, zeta, omega)`` grid: 2D AMR in ``(v_x, zeta)`` with
    ``zeta >= 0``, rotated over ``n_omega`` uniform angles in ``[0, pi]``.

    ``field.u`` holds ``(u_x, u_r)``.  Returns ``(grid, spec, phi)``.
    """
    if field.dim != 2:
        raise StructuralError("axisymmetric fields need (u_x, u_r) velocities")
    if n_omega < 2:
        raise DomainError("n_omega must be at least 2")
    plane = MacroField(field.dims, field.rho, np.abs(field.u), field.T)
    plane.u[:, 0] = field.u[:, 0]
    spec = fine_grid_spec(plane, gas, c, a, half_axes=(1,))
    phi = build_support_function(plane, spec, gas, c, wall_T)
    grid = generate_amr(spec, phi, a, max_level)
    grid.coordinate_system = "cylindrical"
    grid.n_omega = int(n_omega)
    return attach_quadrature(grid, mode), spec, phi


def uniform_axisym_grid(spec: FineGridSpec, n_omega=30, mode="Q1") -> AmrVelocityGrid:
    return uniform_grid(spec, mode, "cylindrical", n_omega)


# -- grid files ---------------------------------------------------------------

def grid_to_dict(grid: AmrVelocityGrid) -> dict:
    centers = grid.centers
    half = grid.half_widths
    doc = {
        "coordinate_system": grid.coordinate_system,
        "root_bounds": [grid.root_lo.tolist(), grid.root_hi.tolist()],
        "mode": grid.mode,
        "lattice": {"origin": grid.origin.tolist(), "unit": grid.unit.tolist(),
                    "extent": [int(e) for e in grid.extent]},
        "n_omega": int(grid.n_omega),
        "leaves": [{"center": c.tolist(), "half_width": h.tolist(), "level": int(l)}
                   for c, h, l in zip(centers, half, grid.levels)],
        "points": grid.points.tolist(),
        "weights": grid.weights.tolist(),
    }
    if grid.symmetry_pairing is not None:
        doc["symmetry_axis"] = int(grid.symmetry_axis)
        doc["symmetry_pairing"] = grid.symmetry_pairing.tolist()
    return doc


def grid_from_dict(doc: dict) -> AmrVelocityGrid:
    lat = doc["lattice"]
    origin = np.array(lat["origin"], dtype=float)
    unit = np.array(lat["unit"], dtype=float)
    centers = np.array([lf["center"] for lf in doc["leaves"]], dtype=float)
    half = np.array([lf["half_width"] for lf in doc["leaves"]], dtype=float)
    size = np.rint(2 * half / unit).astype(np.int64)
    lo = np.rint((centers - half - origin) / unit).astype(np.int64)
    grid = AmrVelocityGrid(origin, unit, np.array(lat["extent"], dtype=np.int64), lo, size,
                           np.array([lf["level"] for lf in doc["leaves"]], dtype=np.int64),
                           coordinate_system=doc["coordinate_system"],
                           n_omega=int(doc.get("n_omega", 0)))
    grid.symmetry_axis = doc.get("symmetry_axis")
    mode = doc.get("mode")
    if mode is not None:
        grid = attach_quadrature(grid, mode)
        # stored values win: they are the exact ones that were used
        grid.points = np.array(doc["points"], dtype=float)
        grid.weights = np.array(doc["weights"], dtype=float)
        if "symmetry_pairing" in doc:
            grid.symmetry_pairing = np.array(doc["symmetry_pairing"], dtype=np.int64)
    return grid


def write_grid(grid: AmrVelocityGrid, path) -> None:
    # json emits repr() floats: 17 significant digits, exact round trip
    with open(path, "w") as fh:
        json.dump(grid_to_dict(grid), fh)


def read_grid(path) -> AmrVelocityGrid:
    with open(path) as fh:
        return grid_from_dict(json.load(fh))
