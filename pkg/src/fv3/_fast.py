"""Fused numba sweep for uniform grids.

Mirrors ``Operator2D._sweep`` of :mod:`fv3.scheme2d` (reconstruction,
positivity scale-back, midpoint conversion, numerical flux, averaging) in a
single compiled pass.  The numpy code stays the reference; the two agree to
round-off.
"""
from __future__ import annotations

import os

import numba as nb
import numpy as np

# the bundled TBB is too old; workqueue is always available
nb.config.THREADING_LAYER = "workqueue"

KERNEL_IDS = {"h3": 0, "h3l": 1, "h3lc": 2, "weno3js": 3, "weno3z": 4, "none": 5}

# status codes returned by sweep()
OK, BAD_MEAN, BAD_FACE = 0, 1, 2


def set_threads(n=None):
    """Cap numba worker threads, by default from ``FV3_THREADS``."""
    if n is None:
        env = os.environ.get("FV3_THREADS")
        if not env:
            return nb.get_num_threads()
        n = int(env)
    n = max(1, min(int(n), nb.config.NUMBA_NUM_THREADS))
    nb.set_num_threads(n)
    return n


@nb.njit(cache=True, inline="always")
def _h3l(a, b):
    s = 1.0 if b >= 0 else -1.0
    sh3 = s * ((2.0 * b + a) / 3.0)
    inner = min(min(2.0 * s * a, sh3), 1.5 * abs(b))
    return s * max(0.0, min(sh3, max(-s * a, inner)))


@nb.njit(cache=True, inline="always")
def _slope(kid, a, b, tau, eps):
    if kid == 0:
        return (2.0 * b + a) / 3.0
    if kid == 1:
        return _h3l(a, b)
    if kid == 2:
        if a * a + b * b < tau:
            return (2.0 * b + a) / 3.0
        return _h3l(a, b)
    if kid == 3 or kid == 4:
        b0 = a * a
        b1 = b * b
        if kid == 3:
            a0 = (1.0 / 3.0) / (eps + b0) ** 2
            a1 = (2.0 / 3.0) / (eps + b1) ** 2
        else:
            t = abs(b0 - b1)
            a0 = (1.0 / 3.0) * (1.0 + (t / (eps + b0)) ** 2)
            a1 = (2.0 / 3.0) * (1.0 + (t / (eps + b1)) ** 2)
        return (a0 * a + a1 * b) / (a0 + a1)
    return 0.0


@nb.njit(cache=True, inline="always")
def _pressure(r, mx, my, e, g):
    return (g - 1.0) * (e - 0.5 * (mx ** 2 + my ** 2) / r)


@nb.njit(cache=True, inline="always")
def _ok(r, mx, my, e, g, peps):
    return r >= peps and _pressure(r, mx, my, e, g) >= peps


@nb.njit(cache=True)
def _limit(mean, R, L, g, peps, i, j):
    """Positivity scale-back of cell (i, j); returns a status code."""
    m0, m1, m2, m3 = mean[i, j, 0], mean[i, j, 1], mean[i, j, 2], mean[i, j, 3]
    if not _ok(m0, m1, m2, m3, g, peps):
        return BAD_MEAN
    if _ok(R[i, j, 0], R[i, j, 1], R[i, j, 2], R[i, j, 3], g, peps) and \
            _ok(L[i, j, 0], L[i, j, 1], L[i, j, 2], L[i, j, 3], g, peps):
        return OK
    lo = 0.0
    hi = 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        feas = True
        for F in (R, L):
            if not _ok(m0 + mid * (F[i, j, 0] - m0), m1 + mid * (F[i, j, 1] - m1),
                       m2 + mid * (F[i, j, 2] - m2), m3 + mid * (F[i, j, 3] - m3), g, peps):
                feas = False
        if feas:
            lo = mid
        else:
            hi = mid
    for k in range(4):
        R[i, j, k] = mean[i, j, k] + lo * (R[i, j, k] - mean[i, j, k])
        L[i, j, k] = mean[i, j, k] + lo * (L[i, j, k] - mean[i, j, k])
    return OK


@nb.njit(cache=True, inline="always")
def _rusanov(ql, qr, axis, g, out):
    rl, rr = ql[0], qr[0]
    pl = _pressure(rl, ql[1], ql[2], ql[3], g)
    pr = _pressure(rr, qr[1], qr[2], qr[3], g)
    if not (rl > 0 and rr > 0 and pl > 0 and pr > 0):
        return False
    ul = ql[1 + axis] / rl
    ur = qr[1 + axis] / rr
    s = max(abs(ul) + np.sqrt(g * pl / rl), abs(ur) + np.sqrt(g * pr / rr))
    if axis == 0:
        fl0, fl1, fl2, fl3 = ql[1], ql[1] * ul + pl, ql[2] * ul, ul * (ql[3] + pl)
        fr0, fr1, fr2, fr3 = qr[1], qr[1] * ur + pr, qr[2] * ur, ur * (qr[3] + pr)
    else:
        fl0, fl1, fl2, fl3 = ql[2], ql[1] * ul, ql[2] * ul + pl, ul * (ql[3] + pl)
        fr0, fr1, fr2, fr3 = qr[2], qr[1] * ur, qr[2] * ur + pr, ur * (qr[3] + pr)
    out[0] = 0.5 * (fl0 + fr0) - 0.5 * s * (qr[0] - ql[0])
    out[1] = 0.5 * (fl1 + fr1) - 0.5 * s * (qr[1] - ql[1])
    out[2] = 0.5 * (fl2 + fr2) - 0.5 * s * (qr[2] - ql[2])
    out[3] = 0.5 * (fl3 + fr3) - 0.5 * s * (qr[3] - ql[3])
    return True


@nb.njit(cache=True, parallel=True)
def sweep(Q, kid, taus, eps, order_fix, euler, axis, g, peps, speed, counts):
    """Averaged fluxes through the interior interfaces along axis 1 of ``Q``.

    ``Q`` stacks ``NB`` padded blocks ``(NB, M, T, K)`` with two ghost layers
    on both axes and the sweep direction second; ``taus`` holds one switch
    threshold per block.  Returns ``(F, status, where)`` where ``F`` has
    shape ``(NB, M - 3, T - 4, K)``; a nonzero ``status[b, i]`` flags a
    failure in sweep row ``i`` of block ``b`` at transverse index
    ``where[b, i]``.  ``counts`` receives the number of smooth and limited
    evaluations of the combined kernel.
    """
    NB, M, T, K = Q.shape
    R = np.empty((NB, M - 2, T, K))
    L = np.empty((NB, M - 2, T, K))
    n_smooth = 0
    n_lim = 0
    for bi in nb.prange(NB * (M - 2)):
        b = bi // (M - 2)
        i = bi % (M - 2) + 1
        tau = taus[b]
        for j in range(T):
            for k in range(K):
                x = Q[b, i, j, k] - Q[b, i - 1, j, k]
                y = Q[b, i + 1, j, k] - Q[b, i, j, k]
                if kid == 2:
                    if x * x + y * y < tau:
                        n_smooth += 2
                    else:
                        n_lim += 2
                R[b, i - 1, j, k] = Q[b, i, j, k] + 0.5 * _slope(kid, x, y, tau, eps)
                L[b, i - 1, j, k] = Q[b, i, j, k] - 0.5 * _slope(kid, y, x, tau, eps)
    counts[0] += n_smooth
    counts[1] += n_lim
    status = np.zeros((NB, M - 2), dtype=np.int64)
    where = np.zeros((NB, M - 2), dtype=np.int64)
    if euler:
        for bi in nb.prange(NB * (M - 2)):
            b = bi // (M - 2)
            i = bi % (M - 2)
            for j in range(T):
                st = _limit(Q[b, 1:M - 1], R[b], L[b], g, peps, i, j)
                if st != OK and status[b, i] == OK:
                    status[b, i] = st
                    where[b, i] = j
    if order_fix:
        Rp = np.empty((NB, M - 2, T - 2, K))
        Lp = np.empty((NB, M - 2, T - 2, K))
        for bi in nb.prange(NB * (M - 2)):
            b = bi // (M - 2)
            i = bi % (M - 2)
            for j in range(1, T - 1):
                for k in range(K):
                    Rp[b, i, j - 1, k] = R[b, i, j, k] - (
                        R[b, i, j - 1, k] - 2.0 * R[b, i, j, k] + R[b, i, j + 1, k]) / 24.0
                    Lp[b, i, j - 1, k] = L[b, i, j, k] - (
                        L[b, i, j - 1, k] - 2.0 * L[b, i, j, k] + L[b, i, j + 1, k]) / 24.0
            if euler:
                for j in range(T - 2):
                    st = _limit(Q[b, 1:M - 1, 1:T - 1], Rp[b], Lp[b], g, peps, i, j)
                    if st != OK and status[b, i] == OK:
                        status[b, i] = st
                        where[b, i] = j + 1
        off = 1
    else:
        Rp = np.ascontiguousarray(R[:, :, 2:T - 2])
        Lp = np.ascontiguousarray(L[:, :, 2:T - 2])
        off = 2
    TP = T - 2 * off
    Fp = np.empty((NB, M - 3, TP, K))
    for bf in nb.prange(NB * (M - 3)):
        b = bf // (M - 3)
        f = bf % (M - 3)
        tmp = np.empty(K)
        for j in range(TP):
            if euler:
                if not _rusanov(Rp[b, f, j], Lp[b, f + 1, j], axis, g, tmp):
                    if status[b, f] == OK:
                        status[b, f] = BAD_FACE
                        where[b, f] = j + off
                    tmp[:] = np.nan
                for k in range(K):
                    Fp[b, f, j, k] = tmp[k]
            else:
                for k in range(K):
                    Fp[b, f, j, k] = speed * (Rp[b, f, j, k] if speed >= 0 else Lp[b, f + 1, j, k])
    if not order_fix:
        return Fp, status, where
    F = np.empty((NB, M - 3, T - 4, K))
    for bf in nb.prange(NB * (M - 3)):
        b = bf // (M - 3)
        f = bf % (M - 3)
        for j in range(1, T - 3):
            for k in range(K):
                F[b, f, j - 1, k] = Fp[b, f, j, k] + (
                    Fp[b, f, j - 1, k] - 2.0 * Fp[b, f, j, k] + Fp[b, f, j + 1, k]) / 24.0
    return F, status, where


@nb.njit(cache=True)
def _quarters_ok(Z, g, peps):
    for s in range(4):
        if not _ok(Z[s, 0], Z[s, 1], Z[s, 2], Z[s, 3], g, peps):
            return False
    return True


@nb.njit(cache=True, parallel=True)
def prolong_into(C, coarse, missing, ng, euler, g, peps):
    """Fill cells of the padded fine canvas ``C`` flagged in ``missing``.

    ``coarse`` is the padded canvas one level down; both carry ``ng`` ghost
    layers.  Same arithmetic as ``fv3.amr.prolong`` including the positivity
    scale-back of the four quarters.  Returns the number of coarse cells with
    an unphysical mean (those are left untouched).
    """
    nxc = coarse.shape[0] - 2 * ng
    nyc = coarse.shape[1] - 2 * ng
    K = C.shape[2]
    bad = 0
    for ci in nb.prange(nxc):
        Z = np.empty((4, K))
        m = np.empty(K)
        for cj in range(nyc):
            a = 2 * ci
            b = 2 * cj
            if not (missing[a, b] or missing[a + 1, b] or missing[a, b + 1] or missing[a + 1, b + 1]):
                continue
            i = ci + ng
            j = cj + ng
            for k in range(K):
                q = coarse[i, j, k]
                cx = (coarse[i + 1, j, k] - coarse[i - 1, j, k]) / 8.0
                cy = (coarse[i, j + 1, k] - coarse[i, j - 1, k]) / 8.0
                cxy = ((coarse[i + 1, j + 1, k] - coarse[i + 1, j - 1, k])
                       - (coarse[i - 1, j + 1, k] - coarse[i - 1, j - 1, k])) / 64.0
                m[k] = q
                # quarter order: (-,-), (+,-), (-,+), (+,+)
                Z[0, k] = (q + -1.0 * cx) + -1.0 * (cy + -1.0 * cxy)
                Z[1, k] = (q + 1.0 * cx) + -1.0 * (cy + 1.0 * cxy)
                Z[2, k] = (q + -1.0 * cx) + 1.0 * (cy + -1.0 * cxy)
                Z[3, k] = (q + 1.0 * cx) + 1.0 * (cy + 1.0 * cxy)
            if euler:
                if not _ok(m[0], m[1], m[2], m[3], g, peps):
                    bad += 1
                    continue
                if not _quarters_ok(Z, g, peps):
                    lo = 0.0
                    hi = 1.0
                    W = np.empty((4, K))
                    for _ in range(60):
                        mid = 0.5 * (lo + hi)
                        for s in range(4):
                            for k in range(K):
                                W[s, k] = m[k] + mid * (Z[s, k] - m[k])
                        if _quarters_ok(W, g, peps):
                            lo = mid
                        else:
                            hi = mid
                    for s in range(4):
                        for k in range(K):
                            Z[s, k] = m[k] + lo * (Z[s, k] - m[k])
            for s in range(4):
                fa = a + (s & 1)
                fb = b + (s >> 1)
                if missing[fa, fb]:
                    for k in range(K):
                        C[fa + ng, fb + ng, k] = Z[s, k]
    return bad
