"""Gas model, macroscopic states, moments and the continuous Maxwellian.

Velocities, temperatures and densities are SI throughout.  The solver works
with the reduced pair ``(f, g)``: ``f`` lives on a ``d_v``-dimensional
velocity grid and ``g`` carries the energy of the eliminated velocity
components plus the internal degrees of freedom, so that

    E = 1/2 rho |u|^2 + (3 + delta)/2 rho R T

holds for every ``d_v``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class GasModel:
    """Gas constant, power-law viscosity and degrees of freedom.

    ``delta`` is the number of internal degrees of freedom of the real gas
    (0 for argon, 2 for air).  ``d_v`` is the dimension of the discrete
    velocity grid used by the solver.
    """

    R: float
    mu_ref: float
    T_ref: float
    omega_visc: float = 0.81
    delta: int = 0
    d_v: int = 2

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"gas constant must be positive, got {self.R}")
        if not self.mu_ref > 0 or not self.T_ref > 0:
            raise DomainError("mu_ref and T_ref must be positive")
        if not 0.5 <= self.omega_visc <= 1.5:
            raise DomainError(f"omega_visc={self.omega_visc} outside [0.5, 1.5]")
        if self.delta < 0 or int(self.delta) != self.delta:
            raise DomainError(f"delta must be a non-negative integer, got {self.delta}")
        if self.d_v not in (2, 3):
            raise DomainError(f"d_v must be 2 or 3, got {self.d_v}")

    @property
    def delta_eff(self) -> int:
        """Internal degrees carried by ``g``: real ones plus eliminated velocities."""
        return int(self.delta) + 3 - self.d_v

    @property
    def gamma(self) -> float:
        return (5.0 + self.delta) / (3.0 + self.delta)

    @property
    def energy_factor(self) -> float:
        """(3 + delta)/2, so that internal energy density is this times rho R T."""
        return 0.5 * (3 + self.delta)

    def viscosity(self, T):
        return self.mu_ref * (np.asarray(T) / self.T_ref) ** self.omega_visc

    @classmethod
    def from_molecular_mass(cls, mass, **kwargs) -> "GasModel":
        return cls(R=BOLTZMANN / mass, **kwargs)


def argon(d_v=2) -> GasModel:
    """Argon with the usual VHS reference viscosity (273 K)."""
    return GasModel(R=208.13, mu_ref=2.117e-5, T_ref=273.0, omega_visc=0.81,
                    delta=0, d_v=d_v)


def air(d_v=2) -> GasModel:
    return GasModel(R=287.04, mu_ref=1.719e-5, T_ref=273.0, omega_visc=0.77,
                    delta=2, d_v=d_v)


@dataclass(frozen=True)
class ConservedState:
    rho: float
    momentum: np.ndarray
    E: float

    def __post_init__(self):
        object.__setattr__(self, "momentum", np.asarray(self.momentum, dtype=float))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.rho], self.momentum, [self.E]])

    @classmethod
    def from_vector(cls, U) -> "ConservedState":
        U = np.asarray(U, dtype=float)
        return cls(float(U[0]), U[1:-1].copy(), float(U[-1]))


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: np.ndarray
    T: float

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        if not self.rho > 0:
            raise DomainError(f"density must be positive, got {self.rho}")
        if not self.T > 0:
            raise DomainError(f"temperature must be positive, got {self.T}")


def primitive_from_conserved(U: ConservedState, gas: GasModel) -> PrimitiveState:
    if not U.rho > 0:
        raise DomainError(f"non-positive density {U.rho}")
    u = U.momentum / U.rho
    e_int = U.E - 0.5 * U.rho * float(u @ u)
    if not e_int > 0:
        raise DomainError(f"non-positive internal energy {e_int}")
    T = e_int / (gas.energy_factor * U.rho * gas.R)
    return PrimitiveState(U.rho, u, T)


def conserved_from_primitive(p: PrimitiveState, gas: GasModel) -> ConservedState:
    E = 0.5 * p.rho * float(p.u @ p.u) + gas.energy_factor * p.rho * gas.R * p.T
    return ConservedState(p.rho, p.rho * p.u, E)


def primitive_arrays(U, gas: GasModel):
    """Vectorised conversion of a ``(..., d_v + 2)`` array of conserved states.

    Returns ``(rho, u, T)``; no validation, callers check positivity.
    """
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    u = U[..., 1:-1] / rho[..., None]
    e_int = U[..., -1] - 0.5 * rho * np.sum(u * u, axis=-1)
    T = e_int / (gas.energy_factor * rho * gas.R)
    return rho, u, T


def conserved_arrays(rho, u, T, gas: GasModel):
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    E = 0.5 * rho * np.sum(u * u, axis=-1) + gas.energy_factor * rho * gas.R * T
    return np.concatenate([rho[..., None], rho[..., None] * u, E[..., None]], axis=-1)


def collision_invariants(v) -> np.ndarray:
    """m(v) = (1, v, |v|^2/2) for an array of velocities ``(..., d)``."""
    v = np.asarray(v, dtype=float)
    ones = np.ones(v.shape[:-1] + (1,))
    return np.concatenate([ones, v, 0.5 * np.sum(v * v, axis=-1, keepdims=True)], axis=-1)


def moments(f, g, grid) -> ConservedState:
    """Discrete moments ``sum_q (m(v_q) f_q + e_E g_q) w_q``.

    The sum runs in ascending point order so repeated calls are bit-identical.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    v = grid.points
    w = grid.weights
    if f.shape != (len(w),) or g.shape != (len(w),):
        raise StructuralError(
            f"f{f.shape}, g{g.shape} do not match a grid of {len(w)} points")
    if getattr(grid, "coordinate_system", "cartesian") != "cartesian":
        raise StructuralError("moments are only defined on Cartesian velocity grids")
    d = v.shape[1]
    rho = 0.0
    mom = np.zeros(d)
    E = 0.0
    fw = f * w
    gw = g * w
    for q in range(len(w)):
        rho += fw[q]
        mom += v[q] * fw[q]
        E += 0.5 * (v[q] @ v[q]) * fw[q] + gw[q]
    return ConservedState(rho, mom, E)


def maxwellian_value(p: PrimitiveState, v, gas: GasModel):
    """Continuous Maxwellian on the ``d_v``-dimensional velocity space."""
    v = np.asarray(v, dtype=float)
    RT = gas.R * p.T
    c2 = np.sum((v - p.u) ** 2, axis=-1)
    return p.rho * (2 * np.pi * RT) ** (-0.5 * gas.d_v) * np.exp(-c2 / (2 * RT))


def relaxation_time(p: PrimitiveState, gas: GasModel):
    """BGK relaxation time mu(T) / (rho R T)."""
    return gas.viscosity(p.T) / (p.rho * gas.R * p.T)


def relaxation_time_arrays(rho, T, gas: GasModel):
    return gas.viscosity(T) / (rho * gas.R * T)


def mean_free_path(rho, T, gas: GasModel):
    """Hard-sphere style estimate mu/rho * sqrt(pi / (2 R T))."""
    return gas.viscosity(T) / rho * np.sqrt(np.pi / (2 * gas.R * T))
