"""Analytic bow-shock fields standing in for a continuum pre-simulation.

The shock follows Billig's hyperbolic shape around a circular body.  The state
jumps across it with the oblique Rankine-Hugoniot relations, spread over a
tanh layer whose temperature front runs slightly ahead of the velocity front
(as in a kinetic shock).  Between shock and wall the velocity decays to zero,
the temperature falls towards the wall value (with an optional slip jump) and
the pressure is nearly uniform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .kinetic import GasModel
from .velgrid import MacroField, normal_shock_ratios


@dataclass(frozen=True)
class BowShockModel:
    radius: float
    rho_inf: float
    u_inf: float
    T_inf: float
    T_wall: float
    gas: GasModel
    standoff_scale: float = 2.16
    thickness: float = 0.81
    temperature_lead: float = 2.08
    peak_factor: float = 0.89
    velocity_exponent: float = 0.91
    wall_layer: float = 0.106
    wall_slip: float = 0.066

    @property
    def mach(self):
        return self.u_inf / math.sqrt(self.gas.gamma * self.gas.R * self.T_inf)

    def _shape(self):
        M = self.mach
        if M <= 1:
            raise DomainError("bow-shock surrogate needs a supersonic free stream")
        delta = self.standoff_scale * 0.386 * math.exp(4.67 / M ** 2) * self.radius
        rc = 1.386 * math.exp(1.8 / (M - 1) ** 0.75) * self.radius
        tb = math.tan(math.asin(1.0 / M))
        return delta, rc, tb

    def shock_radius(self, theta):
        """Distance from the body centre to the shock along the ray at ``theta`` (rad)."""
        delta, rc, tb = self._shape()
        nose = self.radius + delta

        def gap(r):
            y = r * math.sin(theta)
            x_up = nose - rc / tb ** 2 * (math.sqrt(1 + (y * tb / rc) ** 2) - 1)
            return r * math.cos(theta) - x_up

        return brentq(gap, 1e-9 * nose, 50 * nose, xtol=1e-14)

    def _post_shock(self, theta, r_s):
        """Velocity, density, temperature and pressure just behind the shock."""
        _, rc, tb = self._shape()
        y = r_s * math.sin(theta)
        slope = y / (rc * math.sqrt(1 + (y * tb / rc) ** 2))
        n = np.array([1.0, -slope]) / math.hypot(1.0, slope)
        t = np.array([slope, 1.0]) / math.hypot(1.0, slope)
        un = self.u_inf * n[0]
        ut = self.u_inf * t[0]
        a = math.sqrt(self.gas.gamma * self.gas.R * self.T_inf)
        Mn = max(un / a, 1.0 + 1e-9)
        rr, _, tr = normal_shock_ratios(Mn, self.gas.gamma)
        u2 = ut * t + un / rr * n
        p_inf = self.rho_inf * self.gas.R * self.T_inf
        return u2, self.rho_inf * rr, self.T_inf * tr, p_inf * rr * tr

    def evaluate(self, x, y):
        """``(rho, u, T)`` at physical points; the free stream moves along +x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        r = np.hypot(x, y)
        theta = np.arctan2(np.abs(y), -x)
        sgn = np.where(y < 0, -1.0, 1.0)
        rho = np.empty_like(r)
        u = np.empty(r.shape + (2,))
        T = np.empty_like(r)
        R = self.gas.R
        for k in np.ndindex(r.shape):
            th = float(theta[k])
            rs = self.shock_radius(th)
            eta = (r[k] - self.radius) / (rs - self.radius)
            u2, rho2, T2, p2 = self._post_shock(th, rs)
            wu = 0.5 * (1 + math.tanh((1 - eta) / self.thickness))
            wT = 0.5 * (1 + math.tanh((1 + self.temperature_lead * self.thickness - eta)
                                      / self.thickness))
            e = min(max(eta, 0.0), 1.0)
            g = e ** self.velocity_exponent
            Tpk = self.peak_factor * T2
            Tgw = self.T_wall + self.wall_slip * (Tpk - self.T_wall)
            Ttop = Tgw + (Tpk - Tgw) * (
                (1 - math.exp(-e / self.wall_layer)) / (1 - math.exp(-1 / self.wall_layer)))
            vel = u2 * g
            p_in = p2 * (1 + 0.15 * (1 - e) * math.cos(th) ** 2)
            uu = np.array([self.u_inf, 0.0]) * (1 - wu) + vel * wu
            Tk = self.T_inf * (1 - wT) + Ttop * wT
            rin = p_in / (R * Ttop)
            rho[k] = self.rho_inf * (1 - wu) + rin * wu
            T[k] = Tk
            u[k] = (uu[0], sgn[k] * uu[1])
        return rho, u, T


def cylinder_model(gas: GasModel, **kwargs) -> BowShockModel:
    """Mach-20 argon flow on a 0.1 m cylinder with a 293 K wall."""
    base = dict(radius=0.1, rho_inf=3.17e-6, u_inf=5810.0, T_inf=242.4, T_wall=293.0, gas=gas)
    base.update(kwargs)
    return BowShockModel(**base)


def sphere_model(gas: GasModel, **kwargs) -> BowShockModel:
    """Mach-20 air on a 0.1 m sphere (p = 0.16 Pa), sampled in the meridian half-plane."""
    T_inf = 0.16 / (3.17e-6 * gas.R)
    u_inf = 20.0 * math.sqrt(gas.gamma * gas.R * T_inf)
    base = dict(radius=0.1, rho_inf=3.17e-6, u_inf=u_inf, T_inf=T_inf, T_wall=280.0, gas=gas,
                standoff_scale=0.8, thickness=0.6, temperature_lead=1.5, peak_factor=1.0,
                velocity_exponent=1.5, wall_layer=0.1, wall_slip=0.05)
    base.update(kwargs)
    return BowShockModel(**base)


def sample_field(model: BowShockModel, ni=50, nj=50, r_outer=0.8, theta_max=100.0):
    """Structured sample on a polar patch; i runs wall-normal and fastest."""
    rr = model.radius + (r_outer - model.radius) * (np.arange(ni) + 0.5) / ni
    th = np.radians(theta_max * (np.arange(nj) + 0.5) / nj)
    R, TH = np.meshgrid(rr, th, indexing="xy")
    x = -R * np.cos(TH)
    y = R * np.sin(TH)
    rho, u, T = model.evaluate(x.ravel(), y.ravel())
    coords = np.column_stack([x.ravel(), y.ravel()])
    return MacroField((ni, nj), rho, u, T, coords=coords)
