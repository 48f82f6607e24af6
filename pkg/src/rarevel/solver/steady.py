"""Steady-state driver: right-hand side, implicit step, time-step policy, outputs."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, fields

import numpy as np

from ..equilibrium import solve_equilibria
from ..errors import DivergenceError, DomainError, StructuralError
from ..kinetic import GasModel, PrimitiveState, conserved_arrays, relaxation_time_arrays
from ..mesh import SpaceMesh2D, wall_angles
from ..velgrid import MacroField
from .bc import BoundarySet, DiffuseWall, Inflow, side_views
from .jgs import ImplicitData, cell_moments, jgs_solve
from .transport import cfl_time_step, transport_divergence

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    dt_initial: float | None = None
    dt_growth: float = 1.05
    dt_max_factor: float = 1e6
    inner_sweeps: int = 3
    steady_tol: float = 1e-8
    max_outer: int = 5000
    limiter_enabled: bool = True
    second_order_half_factor: bool = False
    eq_tol: float = 1e-10
    eq_max_iter: int = 50

    def __post_init__(self):
        if self.dt_initial is not None and not self.dt_initial > 0:
            raise DomainError("dt_initial must be positive")
        if not self.dt_growth >= 1.0 or not self.dt_max_factor >= 1.0:
            raise DomainError("dt_growth and dt_max_factor must be >= 1")
        if int(self.inner_sweeps) < 1:
            raise DomainError("inner_sweeps must be at least 1")
        if not self.steady_tol > 0 or int(self.max_outer) < 1:
            raise DomainError("steady_tol and max_outer must be positive")
        if not self.eq_tol > 0 or int(self.eq_max_iter) < 1:
            raise DomainError("equilibrium tolerance and iteration cap must be positive")

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise StructuralError(f"unknown solver keys: {unknown}")
        return cls(**doc)


@dataclass
class WallFlux:
    x: np.ndarray
    y: np.ndarray
    theta_deg: np.ndarray
    q_n: np.ndarray


@dataclass
class SteadySolveReport:
    field: MacroField
    residuals: list
    dts: list
    iterations: int
    converged: bool
    wall_flux: WallFlux | None
    sigma_history: list = field(default_factory=list)
    negative_counts: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def residual_drop(self):
        return self.residuals[0] / self.residuals[-1] if self.residuals else 1.0

    @property
    def monotone_tail(self):
        """Last tenth of the history non-increasing up to 1% noise."""
        r = np.asarray(self.residuals)
        tail = r[-max(2, len(r) // 10):]
        return bool(np.all(tail[1:] <= tail[:-1] * 1.01))


class SteadySolver:
    """Owns the padded state ``F`` of shape (ni+4, nj+4, 2Q) and its caches."""

    def __init__(self, mesh: SpaceMesh2D, grid, bcs, gas: GasModel, config=None):
        if getattr(grid, "coordinate_system", "cartesian") != "cartesian":
            raise StructuralError("the solver needs a Cartesian velocity grid")
        if grid.points.shape[1] != gas.d_v:
            raise StructuralError(f"grid dimension {grid.points.shape[1]} != gas d_v {gas.d_v}")
        self.mesh = mesh
        self.grid = grid
        self.gas = gas
        self.config = config or SolverConfig()
        self.boundaries = bcs if isinstance(bcs, BoundarySet) else BoundarySet(
            bcs, mesh, grid, gas, eq_tol=self.config.eq_tol)
        self.v = np.ascontiguousarray(grid.points, dtype=float)
        self.w = np.ascontiguousarray(grid.weights, dtype=float)
        self.Q = len(self.w)
        self.v2 = np.concatenate([self.v, self.v])
        ni, nj = mesh.shape
        self.F = np.zeros((ni + 4, nj + 4, 2 * self.Q))
        self.alpha = None
        self.dt0 = self.config.dt_initial or cfl_time_step(mesh, self.v)
        self.dt = self.dt0
        self.iteration = 0
        self.reference = self._reference_state()
        self.sigmas = {}

    # -- setup ---------------------------------------------------------------
    def _reference_state(self):
        inflows = [bc.state for bc in self.boundaries.bcs.values() if isinstance(bc, Inflow)]
        return inflows[0] if inflows else None

    @property
    def interior(self):
        return self.F[2:-2, 2:-2]

    def initialize(self, init):
        """Set ``(f, g)`` to the discrete equilibrium of a macro field or a uniform state."""
        ni, nj = self.mesh.shape
        if isinstance(init, PrimitiveState):
            rho = np.full(ni * nj, init.rho)
            u = np.tile(init.u, (ni * nj, 1))
            T = np.full(ni * nj, init.T)
        elif isinstance(init, MacroField):
            rho, u, T = interpolate_macro(init, self.mesh)
        else:
            raise StructuralError(f"cannot initialise from {type(init).__name__}")
        if self.reference is None:
            k = int(np.argmax(rho))
            self.reference = PrimitiveState(rho[k], u[k], T[k])
        U = conserved_arrays(rho, u, T, self.gas)
        eq = solve_equilibria(U, self.grid, self.gas, tol=self.config.eq_tol,
                              max_iter=self.config.eq_max_iter, labels=self._labels())
        self.alpha = eq.alpha
        self.interior[:] = np.concatenate([eq.M, eq.N], axis=1).reshape(ni, nj, -1)
        self.iteration = 0
        self.dt = self.dt0
        return self

    def _labels(self):
        ni, nj = self.mesh.shape
        return [(k // nj, k % nj) for k in range(ni * nj)]

    # -- operators -----------------------------------------------------------
    def conserved(self):
        ni, nj = self.mesh.shape
        U = np.empty((ni * nj, self.v.shape[1] + 2))
        cell_moments(self.F, self.v, self.w, U, True)
        return U

    def assemble_rhs(self):
        """Second-order right-hand side with fresh ghosts and equilibria.

        Returns ``(rhs, eq, tau)``; ``rhs`` has shape (ni, nj, 2Q).
        """
        cfg = self.config
        ni, nj = self.mesh.shape
        self.sigmas = self.boundaries.fill(self.F)
        U = self.conserved()
        eq = solve_equilibria(U, self.grid, self.gas, alpha0=self.alpha, tol=cfg.eq_tol,
                              max_iter=cfg.eq_max_iter, labels=self._labels())
        self.alpha = eq.alpha
        rho = U[:, 0]
        T = eq.c0 ** 2 / self.gas.R
        tau = relaxation_time_arrays(rho, T, self.gas)
        rhs = transport_divergence(self.F, self.mesh, self.v2,
                                   "second" if cfg.limiter_enabled else "first",
                                   cfg.second_order_half_factor)
        np.negative(rhs, out=rhs)
        Meq = np.concatenate([eq.M, eq.N], axis=1).reshape(ni, nj, -1)
        rhs += (Meq - self.interior) / tau.reshape(ni, nj, 1)
        return rhs, eq, tau

    def residual_norm(self, rhs):
        """Dimensionless L2 norm of the right-hand side.

        ``g`` is scaled by the characteristic speed squared, time by the
        transit time of the domain, and the result by the same norm of the
        reference equilibrium.
        """
        ref = self.reference
        vchar = max(float(np.linalg.norm(ref.u)), np.sqrt(self.gas.R * ref.T))
        ni, nj = self.mesh.shape
        if not hasattr(self, "_ref_norm"):
            eq = solve_equilibria(conserved_arrays(ref.rho, ref.u, ref.T, self.gas)[None],
                                  self.grid, self.gas, tol=self.config.eq_tol)
            self._vchar = vchar
            self._ref_norm = np.sqrt(np.sum(eq.M[0] ** 2 * self.w)
                                     + np.sum((eq.N[0] / vchar ** 2) ** 2 * self.w))
            ext = np.ptp(self.mesh.nodes.reshape(-1, 2), axis=0).max()
            self._t_ref = ext / vchar
            self._vol_w = self.mesh.volumes / self.mesh.volumes.sum()
        Q = self.Q
        s = (np.einsum("ijq,q->ij", rhs[..., :Q] ** 2, self.w)
             + np.einsum("ijq,q->ij", rhs[..., Q:] ** 2, self.w) / vchar ** 4)
        return float(np.sqrt(np.sum(s * self._vol_w)) * self._t_ref / self._ref_norm)

    def advance(self):
        """One implicit step; returns the residual of the state it started from."""
        rhs, eq, tau = self.assemble_rhs()
        res = self.residual_norm(rhs)
        if not np.isfinite(res):
            raise DivergenceError(f"non-finite residual at iteration {self.iteration}",
                                  iteration=self.iteration)
        imp = ImplicitData(eq, tau, self.grid)
        dF = jgs_solve(rhs, self.mesh, self.v2, imp, self.dt, self.config.inner_sweeps)
        self.interior[:] += dF
        if not np.all(np.isfinite(dF)):
            raise DivergenceError(f"non-finite update at iteration {self.iteration}",
                                  iteration=self.iteration)
        dt_used = self.dt
        self.iteration += 1
        self.dt = min(self.dt * self.config.dt_growth, self.dt0 * self.config.dt_max_factor)
        return res, dt_used

    # -- outputs -------------------------------------------------------------
    def macro_field(self) -> MacroField:
        """Cell-centred rho, u, T in the i-fastest order of the macro-field format."""
        ni, nj = self.mesh.shape
        U = self.conserved()
        rho = U[:, 0]
        u = U[:, 1:-1] / rho[:, None]
        T = (U[:, -1] - 0.5 * rho * np.sum(u * u, axis=1)) / (self.gas.energy_factor * rho * self.gas.R)
        order = np.arange(ni * nj).reshape(ni, nj).T.ravel()
        coords = self.mesh.centers.transpose(1, 0, 2).reshape(-1, 2)
        return MacroField((ni, nj), rho[order], u[order], T[order], coords=coords)

    def wall_heat_flux(self) -> WallFlux:
        """Net upwind energy flux into every diffuse-wall face, W/m^2."""
        walls = self.boundaries.wall_sides
        if not walls:
            raise StructuralError("no diffuse wall on this mesh")
        self.boundaries.fill(self.F)
        Q = self.Q
        e = 0.5 * np.sum(self.v ** 2, axis=1)
        xs, ys, qs = [], [], []
        for side in walls:
            a_in = self.boundaries.data[side][0]
            g1, _, i1, _ = side_views(self.F, side)
            fb = np.where(a_in > 0, g1[:, :Q], i1[:, :Q])
            gb = np.where(a_in > 0, g1[:, Q:], i1[:, Q:])
            length = np.linalg.norm(self._face_normals(side), axis=1)
            q = -np.einsum("nq,nq,q->n", a_in, fb * e + gb, self.w) / length
            centers = self._face_centers(side)
            xs.append(centers[:, 0])
            ys.append(centers[:, 1])
            qs.append(q)
        x, y = np.concatenate(xs), np.concatenate(ys)
        theta = (wall_angles(self.mesh, np.stack([x, y], axis=1))
                 if self.mesh.body_center is not None else np.full(len(x), np.nan))
        return WallFlux(x, y, theta, np.concatenate(qs))

    def _face_normals(self, side):
        return self.mesh.boundary_faces(side)[1]

    def _face_centers(self, side):
        return self.mesh.boundary_faces(side)[0]

    def negative_count(self):
        return int(np.count_nonzero(self.interior[..., :self.Q] < 0))

    def run(self, max_outer=None, callback=None) -> SteadySolveReport:
        cfg = self.config
        max_outer = max_outer or cfg.max_outer
        residuals, dts, sig, neg = [], [], [], []
        t0 = time.perf_counter()
        converged = False
        for _ in range(max_outer):
            res, dt = self.advance()
            residuals.append(res)
            dts.append(dt)
            sig.append({s: float(np.mean(v)) for s, v in self.sigmas.items()})
            neg.append(self.negative_count())
            if callback is not None:
                callback(self.iteration, res, dt)
            if self.iteration % 50 == 0:
                log.info("iter %d residual %.3e dt %.3e", self.iteration, res, dt)
            if res <= cfg.steady_tol:
                converged = True
                break
        flux = self.wall_heat_flux() if self.boundaries.wall_sides else None
        return SteadySolveReport(self.macro_field(), residuals, dts, self.iteration, converged,
                                 flux, sig, neg, time.perf_counter() - t0)


def interpolate_macro(field: MacroField, mesh: SpaceMesh2D):
    """Cell values of ``field`` on ``mesh`` in the solver's ``k = i*nj + j`` order."""
    ni, nj = mesh.shape
    if field.coords is None:
        if tuple(field.dims) != (ni, nj):
            raise StructuralError(f"field dims {field.dims} do not match mesh {(ni, nj)} "
                                  "and the field has no coordinates")
        order = np.arange(ni * nj).reshape(nj, ni).T.ravel()
        return field.rho[order], field.u[order], field.T[order]
    from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator

    pts = np.asarray(field.coords)[:, :2]
    data = np.column_stack([field.rho, field.u, field.T])
    target = mesh.centers.reshape(-1, 2)
    vals = LinearNDInterpolator(pts, data)(target)
    miss = np.any(~np.isfinite(vals), axis=1)
    if np.any(miss):
        vals[miss] = NearestNDInterpolator(pts, data)(target[miss])
    d = field.u.shape[1]
    return vals[:, 0], vals[:, 1:1 + d], vals[:, 1 + d]


def run_to_steady(mesh, grid, bcs, gas, init, config=None, callback=None) -> SteadySolveReport:
    solver = SteadySolver(mesh, grid, bcs, gas, config)
    solver.initialize(init)
    return solver.run(callback=callback)
