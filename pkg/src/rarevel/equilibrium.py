"""Conservative discrete equilibrium on an arbitrary velocity grid.

The pair ``M_q = exp(alpha . m(v_q))``, ``N_q = delta/2 * M_q / (-alpha_E)``
is fitted by Newton's method so that its discrete moments reproduce ``U``
exactly.  Internally each state is solved in the shifted, scaled variable
``xi = (v - u) / sqrt(RT)``; with ``m(v) = L m(xi)`` the multipliers become
``beta = L^T alpha`` and everything is O(1), which keeps the Newton matrix
well conditioned at hypersonic Mach numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import GridInadequacyError, NonConvergenceError, StructuralError
from .kinetic import ConservedState, GasModel, PrimitiveState, conserved_from_primitive

OK, SINGULAR, NOT_CONVERGED, BAD_STATE = 0, 1, 2, 3
MAX_HALVINGS = 8


def initial_alpha(p: PrimitiveState, gas: GasModel) -> np.ndarray:
    """Exponent of the continuous Maxwellian, ``(ln a0, u/RT, -1/RT)``."""
    RT = gas.R * p.T
    u = np.asarray(p.u, dtype=float)
    a0 = math.log(p.rho / (2 * math.pi * RT) ** (0.5 * len(u))) - float(u @ u) / (2 * RT)
    return np.concatenate([[a0], u / RT, [-1.0 / RT]])


@nb.njit(cache=True)
def _invert(A, out):
    """Gauss-Jordan with partial pivoting; returns False on a tiny pivot."""
    n = A.shape[0]
    W = A.copy()
    for i in range(n):
        for j in range(n):
            out[i, j] = 1.0 if i == j else 0.0
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale = max(scale, abs(W[i, j]))
    if scale == 0.0:
        return False
    for k in range(n):
        p = k
        for i in range(k + 1, n):
            if abs(W[i, k]) > abs(W[p, k]):
                p = i
        if abs(W[p, k]) <= 1e-13 * scale:
            return False
        if p != k:
            for j in range(n):
                W[k, j], W[p, j] = W[p, j], W[k, j]
                out[k, j], out[p, j] = out[p, j], out[k, j]
        piv = W[k, k]
        for j in range(n):
            W[k, j] /= piv
            out[k, j] /= piv
        for i in range(n):
            if i != k:
                fac = W[i, k]
                if fac != 0.0:
                    for j in range(n):
                        W[i, j] -= fac * W[k, j]
                        out[i, j] -= fac * out[k, j]
    return True


@nb.njit(cache=True)
def _sym_part_pd(A):
    n = A.shape[0]
    S = 0.5 * (A + A.T)
    for j in range(n):
        s = S[j, j]
        for k in range(j):
            s -= S[j, k] * S[j, k]
        if s <= 0.0:
            return False
        d = math.sqrt(s)
        S[j, j] = d
        for i in range(j + 1, n):
            t = S[i, j]
            for k in range(j):
                t -= S[i, k] * S[j, k]
            S[i, j] = t / d
    return True


@nb.njit(cache=True)
def _eval(beta, xi, w, half_delta, M, G, A, need_A):
    """Moments of (M, N) in scaled variables, the residual-free part G and A."""
    Q, d = xi.shape
    D = d + 2
    for i in range(D):
        G[i] = 0.0
        for j in range(D):
            A[i, j] = 0.0
    inv_mbE = 1.0 / (-beta[D - 1])
    m = np.empty(D)
    for q in range(Q):
        m[0] = 1.0
        s = 0.0
        for k in range(d):
            m[k + 1] = xi[q, k]
            s += xi[q, k] * xi[q, k]
        m[D - 1] = 0.5 * s
        ex = beta[0]
        for k in range(1, D):
            ex += beta[k] * m[k]
        Mq = math.exp(ex)
        M[q] = Mq
        mw = Mq * w[q]
        nw = half_delta * inv_mbE * mw
        for i in range(D):
            G[i] += m[i] * mw
        G[D - 1] += nw
        if need_A:
            for i in range(D):
                for j in range(D):
                    A[i, j] += m[i] * m[j] * mw
            for j in range(D):
                A[D - 1, j] += m[j] * nw
            A[D - 1, D - 1] += nw * inv_mbE


@nb.njit(cache=True)
def _scaled_norm(Gh, u0, c0, rho, E):
    D = Gh.shape[0]
    d = D - 2
    vref = 0.0
    for k in range(d):
        vref += u0[k] * u0[k]
    vref = max(math.sqrt(vref), c0)
    r = abs(Gh[0]) / rho
    GE = c0 * c0 * Gh[D - 1]
    uu = 0.0
    for k in range(d):
        gv = u0[k] * Gh[0] + c0 * Gh[k + 1]
        r = max(r, abs(gv) / (rho * vref))
        GE += c0 * u0[k] * Gh[k + 1]
        uu += u0[k] * u0[k]
    GE += 0.5 * uu * Gh[0]
    return max(r, abs(GE) / E)


@nb.njit(cache=True)
def _newton_one(beta, xi, w, half_delta, target, u0, c0, rho, E, tol, max_iter, Mq, A, Ainv):
    """Damped Newton from ``beta``; returns (status, iterations, residual)."""
    Q, d = xi.shape
    D = d + 2
    G = np.empty(D)
    trialM = np.empty(Q)
    trialG = np.empty(D)
    trialA = np.empty((D, D))
    trial = np.empty(D)
    _eval(beta, xi, w, half_delta, Mq, G, A, True)
    G -= target
    r = _scaled_norm(G, u0, c0, rho, E)
    it = 0
    while r > tol or not math.isfinite(r):
        if it >= max_iter or not math.isfinite(r):
            return NOT_CONVERGED, it, r
        if not _invert(A, Ainv):
            return SINGULAR, it, r
        step = -(Ainv @ G)
        lam = 1.0
        accepted = False
        rt = r
        for h in range(MAX_HALVINGS + 1):
            for k in range(D):
                trial[k] = beta[k] + lam * step[k]
            if trial[D - 1] < 0.0:
                _eval(trial, xi, w, half_delta, trialM, trialG, trialA, True)
                trialG -= target
                rt = _scaled_norm(trialG, u0, c0, rho, E)
                if math.isfinite(rt) and (rt < r or h == MAX_HALVINGS):
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            return SINGULAR, it, r
        beta[:] = trial
        Mq[:] = trialM
        G[:] = trialG
        A[:, :] = trialA
        r = rt
        it += 1
    if not _invert(A, Ainv) or not _sym_part_pd(A):
        return SINGULAR, it, r
    return OK, it, r


@nb.njit(cache=True, parallel=True)
def _newton_cells(U, v, w, R, efac, half_delta, alpha0, has_alpha0, tol, max_iter,
                  M_out, alpha_out, Ainv_out, u0_out, c0_out, iters, resid, status):
    nc = U.shape[0]
    Q, d = v.shape
    D = d + 2
    for c in nb.prange(nc):
        rho = U[c, 0]
        E = U[c, D - 1]
        uu = 0.0
        for k in range(d):
            u0_out[c, k] = U[c, k + 1] / rho if rho > 0 else 0.0
            uu += u0_out[c, k] * u0_out[c, k]
        eint = E - 0.5 * rho * uu
        if not (rho > 0.0) or not (eint > 0.0) or not math.isfinite(E):
            status[c] = BAD_STATE
            continue
        RT = eint / (efac * rho)
        c0 = math.sqrt(RT)
        c0_out[c] = c0
        u0 = u0_out[c]
        xi = np.empty((Q, d))
        for q in range(Q):
            for k in range(d):
                xi[q, k] = (v[q, k] - u0[k]) / c0
        target = np.zeros(D)
        target[0] = rho
        target[D - 1] = efac * rho
        cold = np.zeros(D)
        cold[0] = math.log(rho / (2.0 * math.pi * RT) ** (0.5 * d))
        cold[D - 1] = -1.0
        beta = cold.copy()
        warm = False
        if has_alpha0:
            a = alpha0[c]
            aE = a[D - 1]
            beta[0] = a[0] + 0.5 * aE * uu
            for k in range(d):
                beta[0] += a[k + 1] * u0[k]
                beta[k + 1] = c0 * (a[k + 1] + aE * u0[k])
            beta[D - 1] = c0 * c0 * aE
            warm = beta[D - 1] < 0.0 and math.isfinite(beta[0])
            if not warm:
                beta[:] = cold
        Mq = M_out[c]
        A = np.empty((D, D))
        Ainv = np.empty((D, D))
        st, it, r = _newton_one(beta, xi, w, half_delta, target, u0, c0, rho, E, tol,
                                max_iter, Mq, A, Ainv)
        if st != OK and warm:
            # a stale warm start can sit outside Newton's basin; restart from the Maxwellian
            beta[:] = cold
            st, it2, r = _newton_one(beta, xi, w, half_delta, target, u0, c0, rho, E, tol,
                                     max_iter, Mq, A, Ainv)
            it += it2
        iters[c] = it
        resid[c] = r
        status[c] = st
        Ainv_out[c] = Ainv
        aE = beta[D - 1] / (c0 * c0)
        alpha_out[c, D - 1] = aE
        a0 = beta[0]
        for k in range(d):
            ak = beta[k + 1] / c0 - aE * u0[k]
            alpha_out[c, k + 1] = ak
            a0 -= ak * u0[k]
        alpha_out[c, 0] = a0 - 0.5 * aE * uu


@dataclass
class BatchEquilibrium:
    """Per-cell equilibria; ``Ainv`` is the inverse Newton matrix in scaled variables."""

    alpha: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Ainv: np.ndarray
    u0: np.ndarray
    c0: np.ndarray
    iterations: np.ndarray
    residual: np.ndarray
    status: np.ndarray

    def check(self, labels=None):
        """Raise on the first failed cell."""
        bad = np.flatnonzero(self.status != OK)
        if not bad.size:
            return self
        k = int(bad[0])
        where = f"cell {labels[k] if labels is not None else k}"
        st = self.status[k]
        if st == NOT_CONVERGED:
            raise NonConvergenceError(f"{where}: Newton did not converge, residual "
                                      f"{self.residual[k]:.3e}", residual=float(self.residual[k]))
        if st == BAD_STATE:
            raise GridInadequacyError(f"{where}: moments are not a valid state "
                                      "(non-positive density or internal energy)")
        raise GridInadequacyError(f"{where}: singular moment matrix; the velocity grid "
                                  "is too coarse or too narrow for this state")


def solve_equilibria(U, grid, gas: GasModel, alpha0=None, tol=1e-10, max_iter=50,
                     raise_errors=True, labels=None) -> BatchEquilibrium:
    """Vectorised driver over an ``(ncells, d+2)`` array of conserved states."""
    U = np.ascontiguousarray(U, dtype=float)
    v = np.ascontiguousarray(grid.points, dtype=float)
    w = np.ascontiguousarray(grid.weights, dtype=float)
    nc, D = U.shape
    Q, d = v.shape
    if D != d + 2:
        raise StructuralError(f"state has {D} components, grid dimension {d}")
    M = np.empty((nc, Q))
    alpha = np.zeros((nc, D))
    Ainv = np.zeros((nc, D, D))
    u0 = np.zeros((nc, d))
    c0 = np.ones(nc)
    iters = np.zeros(nc, dtype=np.int64)
    res = np.zeros(nc)
    status = np.zeros(nc, dtype=np.int64)
    has = alpha0 is not None
    a0 = np.ascontiguousarray(alpha0 if has else np.zeros((nc, D)), dtype=float)
    half_delta = 0.5 * gas.delta_eff
    _newton_cells(U, v, w, gas.R, gas.energy_factor, half_delta, a0, has, tol, max_iter,
                  M, alpha, Ainv, u0, c0, iters, res, status)
    with np.errstate(divide="ignore", invalid="ignore"):  # failed cells keep alpha = 0
        N = half_delta * M / (-alpha[:, -1])[:, None]
    out = BatchEquilibrium(alpha, M, N, Ainv, u0, c0, iters, res, status)
    return out.check(labels) if raise_errors else out


@dataclass
class DiscreteEquilibrium:
    alpha: np.ndarray
    M: np.ndarray
    N: np.ndarray
    residual_norm: float
    newton_iterations: int
    _batch: BatchEquilibrium = None


def solve_discrete_equilibrium(U, grid, gas: GasModel, tol=1e-10, max_iter=50,
                               alpha0=None) -> DiscreteEquilibrium:
    """Newton solve of ``sum (m M_q + e_E N_q) w_q = U``."""
    if isinstance(U, PrimitiveState):
        U = conserved_from_primitive(U, gas)
    Uv = U.as_vector() if isinstance(U, ConservedState) else np.asarray(U, dtype=float)
    a0 = None if alpha0 is None else np.asarray(alpha0, dtype=float)[None]
    b = solve_equilibria(Uv[None], grid, gas, a0, tol, max_iter)
    return DiscreteEquilibrium(b.alpha[0], b.M[0], b.N[0], float(b.residual[0]),
                               int(b.iterations[0]), b)


class EquilibriumJacobian:
    """Derivatives of ``(M_q, N_q)`` with respect to the conserved state.

    ``apply(dU)`` returns ``(dM, dN)``; ``diagonals()`` the self-coupling
    terms ``D^f_q = w_q dM_q/df_q`` and ``D^g_q = w_q dN_q/dg_q``.
    """

    def __init__(self, eq: DiscreteEquilibrium, grid, gas: GasModel):
        b = eq._batch
        self.M = eq.M
        self.N = eq.N
        self.w = np.asarray(grid.weights, dtype=float)
        self.u0 = b.u0[0]
        self.c0 = float(b.c0[0])
        self.Ainv_hat = b.Ainv[0]
        self.alpha = eq.alpha
        d = len(self.u0)
        self.D = d + 2
        self.xi = (np.asarray(grid.points) - self.u0) / self.c0
        self.mhat = np.column_stack([np.ones(len(self.w)), self.xi,
                                     0.5 * np.sum(self.xi ** 2, axis=1)])
        self.beta_E = self.alpha[-1] * self.c0 ** 2
        self.L = _lower(self.u0, self.c0)

    @property
    def A(self) -> np.ndarray:
        """Newton matrix d U / d alpha in the original variables."""
        Ahat = np.linalg.inv(self.Ainv_hat)
        return self.L @ Ahat @ self.L.T

    def _scaled(self, dU):
        return self.Ainv_hat @ np.linalg.solve(self.L, np.asarray(dU, dtype=float))

    def apply(self, dU):
        y = self._scaled(dU)
        e = np.zeros(self.D)
        e[-1] = 1.0
        dM = self.M * (self.mhat @ y)
        dN = self.N * ((self.mhat - e / self.beta_E) @ y)
        return dM, dN

    def diagonals(self):
        AiM = self.mhat @ self.Ainv_hat.T
        Df = self.M * np.sum(AiM * self.mhat, axis=1) * self.w
        mg = self.mhat.copy()
        mg[:, -1] -= 1.0 / self.beta_E
        Dg = self.N / self.c0 ** 2 * (mg @ self.Ainv_hat[:, -1]) * self.w
        return Df, Dg


def equilibrium_jacobian_products(eq: DiscreteEquilibrium, grid, gas: GasModel):
    return EquilibriumJacobian(eq, grid, gas)


def _lower(u0, c0):
    d = len(u0)
    D = d + 2
    L = np.zeros((D, D))
    L[0, 0] = 1.0
    L[1:d + 1, 0] = u0
    L[1:d + 1, 1:d + 1] = c0 * np.eye(d)
    L[D - 1, 0] = 0.5 * float(u0 @ u0)
    L[D - 1, 1:d + 1] = c0 * u0
    L[D - 1, D - 1] = c0 * c0
    return L
