"""Upwind finite-volume transport on padded distribution arrays."""
from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True, inline="always")
def minmod3(a, b, c):
    if a > 0.0 and b > 0.0 and c > 0.0:
        return min(a, b, c)
    if a < 0.0 and b < 0.0 and c < 0.0:
        return max(a, b, c)
    return 0.0


@nb.njit(cache=True)
def _divergence(F, vx, vy, normal_i, normal_j, vol, second, slope_factor, out):
    ni, nj = vol.shape
    nq = vx.shape[0]
    nh = nq // 2
    # stacked (f, g) columns repeat the velocities: reuse v . nu for the second half
    shared = nq % 2 == 0 and np.all(vx[:nh] == vx[nh:]) and np.all(vy[:nh] == vy[nh:])
    av = np.empty(nq)
    out[:] = 0.0
    for i in range(ni + 1):
        L = i + 1
        R = i + 2
        for j in range(nj):
            J = j + 2
            nx = normal_i[i, j, 0]
            ny = normal_i[i, j, 1]
            for q in range(nq):
                if shared and q >= nh:
                    a = av[q - nh]
                else:
                    a = vx[q] * nx + vy[q] * ny
                    av[q] = a
                fl = F[L, J, q]
                fr = F[R, J, q]
                if a > 0.0:
                    flux = a * fl
                else:
                    flux = a * fr
                if second:
                    m = minmod3(fl - F[L - 1, J, q], fr - fl, F[R + 1, J, q] - fr)
                    flux += abs(a) * slope_factor * m
                if i > 0:
                    out[i - 1, j, q] += flux
                if i < ni:
                    out[i, j, q] -= flux
    for i in range(ni):
        I = i + 2
        for j in range(nj + 1):
            Lj = j + 1
            Rj = j + 2
            nx = normal_j[i, j, 0]
            ny = normal_j[i, j, 1]
            for q in range(nq):
                if shared and q >= nh:
                    b = av[q - nh]
                else:
                    b = vx[q] * nx + vy[q] * ny
                    av[q] = b
                fl = F[I, Lj, q]
                fr = F[I, Rj, q]
                if b > 0.0:
                    flux = b * fl
                else:
                    flux = b * fr
                if second:
                    m = minmod3(fl - F[I, Lj - 1, q], fr - fl, F[I, Rj + 1, q] - fr)
                    flux += abs(b) * slope_factor * m
                if j > 0:
                    out[i, j - 1, q] += flux
                if j < nj:
                    out[i, j, q] -= flux
    for i in range(ni):
        for j in range(nj):
            inv = 1.0 / vol[i, j]
            for q in range(nq):
                out[i, j, q] *= inv


def transport_divergence(F, mesh, velocities, order="second", half_factor=False, out=None):
    """``(v . grad f)`` per interior cell for every column of ``F``.

    ``velocities`` has one row per column of ``F`` (the stacked pair uses the
    grid points twice).  ``order='first'`` drops the limited slope term.
    """
    v = np.asarray(velocities, dtype=float)
    ni, nj = mesh.shape
    if out is None:
        out = np.empty((ni, nj, F.shape[2]))
    _divergence(F, np.ascontiguousarray(v[:, 0]), np.ascontiguousarray(v[:, 1]),
                mesh.normal_i, mesh.normal_j, mesh.volumes, order == "second",
                0.5 if half_factor else 1.0, out)
    return out


def cfl_time_step(mesh, velocities):
    """min over cells and points of |cell| / sum_faces |v . nu|."""
    v = np.asarray(velocities, dtype=float)[:, :2]
    s = (np.abs(mesh.normal_i[:-1] @ v.T) + np.abs(mesh.normal_i[1:] @ v.T)
         + np.abs(mesh.normal_j[:, :-1] @ v.T) + np.abs(mesh.normal_j[:, 1:] @ v.T))
    s = np.max(s, axis=2)
    return float(np.min(mesh.volumes / s))
