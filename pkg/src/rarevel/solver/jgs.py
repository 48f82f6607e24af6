"""Linearised implicit step: Jacobi over velocity points, line Gauss-Seidel in space.

The system solved each outer iteration is

    (I/dt + T + R) dF = RHS,      R dF = (dF - dM(dU)) / tau,

with ``T`` the first-order upwind transport operator and ``dU`` the moments
of ``dF``.  ``R`` is split into its diagonal ``(1 - D_q)/tau`` and the
off-diagonal part ``E dF = (dM(dU) - D_q dF_q)/tau``, which is lagged from
one Jacobi pass to the next.  Ghost cells carry ``dF = 0``.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from ..errors import LinearSolverError


@nb.njit(cache=True)
def cell_moments(F, v, w, U, ghosts):
    """Moments of the stacked pair per cell, flattened as ``k = i*nj + j``."""
    off = 2 if ghosts else 0
    ni = F.shape[0] - 2 * off
    nj = F.shape[1] - 2 * off
    Q, d = v.shape
    D = d + 2
    for i in range(ni):
        for j in range(nj):
            k = i * nj + j
            for c in range(D):
                U[k, c] = 0.0
            for q in range(Q):
                fw = F[i + off, j + off, q] * w[q]
                gw = F[i + off, j + off, Q + q] * w[q]
                U[k, 0] += fw
                s = 0.0
                for c in range(d):
                    U[k, c + 1] += v[q, c] * fw
                    s += v[q, c] * v[q, c]
                U[k, D - 1] += 0.5 * s * fw + gw


@nb.njit(cache=True)
def implicit_diagonals(M, N, Ainv, u0, c0, betaE, v, w, Dm):
    """Self-coupling ``w_q dM_q/df_q`` and ``w_q dN_q/dg_q`` per cell."""
    nc, Q = M.shape
    d = v.shape[1]
    D = d + 2
    mh = np.empty(D)
    for k in range(nc):
        cc = c0[k]
        for q in range(Q):
            mh[0] = 1.0
            s = 0.0
            for c in range(d):
                x = (v[q, c] - u0[k, c]) / cc
                mh[c + 1] = x
                s += x * x
            mh[D - 1] = 0.5 * s
            qf = 0.0
            qg = -Ainv[k, D - 1, D - 1] / betaE[k]
            for a in range(D):
                t = 0.0
                for b in range(D):
                    t += Ainv[k, a, b] * mh[b]
                qf += mh[a] * t
                qg += mh[a] * Ainv[k, a, D - 1]
            Dm[k, q] = M[k, q] * qf * w[q]
            Dm[k, Q + q] = N[k, q] / (cc * cc) * qg * w[q]


@nb.njit(cache=True)
def e_action(X, M, N, Ainv, u0, c0, betaE, tau, Dm, v, w, out):
    """``out = E X`` for an interior-only stacked array ``X`` of shape (ni, nj, 2Q)."""
    ni, nj, _ = X.shape
    Q, d = v.shape
    D = d + 2
    dU = np.empty(D)
    z = np.empty(D)
    y = np.empty(D)
    for i in range(ni):
        for j in range(nj):
            k = i * nj + j
            for c in range(D):
                dU[c] = 0.0
            for q in range(Q):
                fw = X[i, j, q] * w[q]
                s = 0.0
                dU[0] += fw
                for c in range(d):
                    dU[c + 1] += v[q, c] * fw
                    s += v[q, c] * v[q, c]
                dU[D - 1] += 0.5 * s * fw + X[i, j, Q + q] * w[q]
            cc = c0[k]
            z[0] = dU[0]
            uu = 0.0
            zE = dU[D - 1]
            for c in range(d):
                z[c + 1] = (dU[c + 1] - u0[k, c] * dU[0]) / cc
                uu += u0[k, c] * u0[k, c]
                zE -= cc * u0[k, c] * z[c + 1]
            z[D - 1] = (zE - 0.5 * uu * dU[0]) / (cc * cc)
            for a in range(D):
                t = 0.0
                for b in range(D):
                    t += Ainv[k, a, b] * z[b]
                y[a] = t
            shift = y[D - 1] / betaE[k]
            it = 1.0 / tau[k]
            for q in range(Q):
                s = y[0]
                x2 = 0.0
                for c in range(d):
                    x = (v[q, c] - u0[k, c]) / cc
                    s += x * y[c + 1]
                    x2 += x * x
                s += 0.5 * x2 * y[D - 1]
                out[i, j, q] = (M[k, q] * s - Dm[k, q] * X[i, j, q]) * it
                out[i, j, Q + q] = (N[k, q] * (s - shift) - Dm[k, Q + q] * X[i, j, Q + q]) * it


@nb.njit(cache=True)
def _line(S, X, j, vx, vy, normal_i, normal_j, vol, inv_dt, Delta, cp, dp):
    """Thomas solve along i for line j; f and g (columns q and q+Q) share coefficients."""
    ni, nj, nq = X.shape
    Q = nq // 2
    for i in range(ni):
        ax0 = normal_i[i, j, 0]
        ay0 = normal_i[i, j, 1]
        ax1 = normal_i[i + 1, j, 0]
        ay1 = normal_i[i + 1, j, 1]
        bx0 = normal_j[i, j, 0]
        by0 = normal_j[i, j, 1]
        bx1 = normal_j[i, j + 1, 0]
        by1 = normal_j[i, j + 1, 1]
        iv = 1.0 / vol[i, j]
        for q in range(Q):
            am = vx[q] * ax0 + vy[q] * ay0
            ap = vx[q] * ax1 + vy[q] * ay1
            bm = vx[q] * bx0 + vy[q] * by0
            bp = vx[q] * bx1 + vy[q] * by1
            base = inv_dt + (max(ap, 0.0) - min(am, 0.0) + max(bp, 0.0) - min(bm, 0.0)) * iv
            wm = max(bm, 0.0) * iv
            wp = min(bp, 0.0) * iv
            upper = min(ap, 0.0) * iv
            lower = -max(am, 0.0) * iv
            for h in range(2):
                c = q + h * Q
                diag = base + Delta[i, j, c]
                r = S[i, j, c]
                if j > 0:
                    r += wm * X[i, j - 1, c]
                if j < nj - 1:
                    r -= wp * X[i, j + 1, c]
                if i > 0:
                    diag -= lower * cp[i - 1, c]
                    r -= lower * dp[i - 1, c]
                if not abs(diag) > 1e-300 or not math.isfinite(diag):
                    return i * nq + c
                cp[i, c] = upper / diag
                dp[i, c] = r / diag
    for c in range(nq):
        X[ni - 1, j, c] = dp[ni - 1, c]
    for i in range(ni - 2, -1, -1):
        for c in range(nq):
            X[i, j, c] = dp[i, c] - cp[i, c] * X[i + 1, j, c]
    return -1


@nb.njit(cache=True)
def _jgs(rhs, X, vx, vy, normal_i, normal_j, vol, inv_dt, Delta, P,
         M, N, Ainv, u0, c0, betaE, tau, Dm, v, w, S, E):
    ni, nj, nq = X.shape
    cp = np.empty((ni, nq))
    dp = np.empty((ni, nq))
    X[:] = 0.0
    for p in range(P):
        if p == 0:
            S[:] = rhs
        else:
            e_action(X, M, N, Ainv, u0, c0, betaE, tau, Dm, v, w, E)
            for i in range(ni):
                for j in range(nj):
                    for q in range(nq):
                        S[i, j, q] = rhs[i, j, q] + E[i, j, q]
        for j in range(nj):
            bad = _line(S, X, j, vx, vy, normal_i, normal_j, vol, inv_dt, Delta, cp, dp)
            if bad >= 0:
                return j, bad
        for j in range(nj - 1, -1, -1):
            bad = _line(S, X, j, vx, vy, normal_i, normal_j, vol, inv_dt, Delta, cp, dp)
            if bad >= 0:
                return j, bad
    return -1, -1


class ImplicitData:
    """Per-cell equilibrium quantities entering the implicit operator."""

    def __init__(self, eq, tau, grid):
        self.M = eq.M
        self.N = eq.N
        self.Ainv = eq.Ainv
        self.u0 = eq.u0
        self.c0 = eq.c0
        self.betaE = eq.alpha[:, -1] * eq.c0 ** 2
        self.tau = np.ascontiguousarray(tau, dtype=float).ravel()
        self.v = np.ascontiguousarray(grid.points, dtype=float)
        self.w = np.ascontiguousarray(grid.weights, dtype=float)
        Q = len(self.w)
        self.Dm = np.empty((len(self.tau), 2 * Q))
        implicit_diagonals(self.M, self.N, self.Ainv, self.u0, self.c0, self.betaE,
                           self.v, self.w, self.Dm)

    def delta(self, shape):
        """Diagonal of the linearised collision operator, ``(1 - D_q)/tau``."""
        return ((1.0 - self.Dm) / self.tau[:, None]).reshape(shape)

    def apply_e(self, X):
        out = np.empty_like(X)
        e_action(X, self.M, self.N, self.Ainv, self.u0, self.c0, self.betaE, self.tau,
                 self.Dm, self.v, self.w, out)
        return out


def jgs_solve(rhs, mesh, velocities, implicit: ImplicitData, dt, P=3, Delta=None):
    """Approximate solution of the implicit system with ``P`` Jacobi passes."""
    ni, nj, nq = rhs.shape
    v = np.asarray(velocities, dtype=float)
    if Delta is None:
        Delta = implicit.delta(rhs.shape)
    X = np.empty_like(rhs)
    S = np.empty_like(rhs)
    E = np.empty_like(rhs)
    j, bad = _jgs(np.ascontiguousarray(rhs), X, np.ascontiguousarray(v[:, 0]),
                  np.ascontiguousarray(v[:, 1]), mesh.normal_i, mesh.normal_j, mesh.volumes,
                  1.0 / dt, Delta, int(P), implicit.M, implicit.N, implicit.Ainv,
                  implicit.u0, implicit.c0, implicit.betaE, implicit.tau, implicit.Dm,
                  implicit.v, implicit.w, S, E)
    if j >= 0:
        i, q = divmod(int(bad), nq)
        raise LinearSolverError(f"tridiagonal pivot vanished at cell ({i}, {j}), point {q}")
    return X
