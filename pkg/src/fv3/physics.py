"""Flux functions for linear advection and the 2D Euler equations.

States carry their components on the last axis.  Euler states are
conserved ``(rho, rho*u, rho*v, E)``; ``axis`` selects the flux direction
(0 for x, 1 for y).
"""
from __future__ import annotations

import numpy as np

GAMMA = 1.4
POSITIVITY_EPS = 1e-10


class PhysicsError(ValueError):
    """An unphysical state was met.  ``where`` holds offending indices if known."""

    def __init__(self, msg, state=None, where=None):
        super().__init__(msg)
        self.state = state
        self.where = where


class Advection:
    """Scalar linear advection ``u_t + a u_x + b u_y = 0``."""

    ncomp = 1

    def __init__(self, a: float = 1.0, b: float = 0.0):
        self.speed = (float(a), float(b))

    def __repr__(self):
        return f"Advection(a={self.speed[0]}, b={self.speed[1]})"

    def flux(self, q, axis=0):
        return self.speed[axis] * q

    def numerical_flux(self, ql, qr, axis=0):
        a = self.speed[axis]
        return a * ql if a >= 0 else a * qr

    def max_speed(self, q, axis=0) -> float:
        return abs(self.speed[axis])

    def check(self, q):
        if not np.all(np.isfinite(q)):
            raise PhysicsError("non-finite advected quantity")


class Euler:
    """Compressible Euler equations for an ideal gas."""

    ncomp = 4

    def __init__(self, gamma: float = GAMMA):
        self.gamma = float(gamma)

    def __repr__(self):
        return f"Euler(gamma={self.gamma})"

    # -- state algebra ---------------------------------------------------
    def to_conserved(self, w):
        """``(rho, u, v, p)`` -> ``(rho, rho u, rho v, E)``."""
        w = np.asarray(w, dtype=float)
        rho, u, v, p = np.moveaxis(w, -1, 0)
        e = p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
        return np.stack([rho, rho * u, rho * v, e], axis=-1)

    def to_primitive(self, q):
        q = np.asarray(q, dtype=float)
        rho = q[..., 0]
        u = q[..., 1] / rho
        v = q[..., 2] / rho
        p = self.pressure(q)
        return np.stack([rho, u, v, p], axis=-1)

    def pressure(self, q):
        rho = q[..., 0]
        kin = 0.5 * (q[..., 1] ** 2 + q[..., 2] ** 2) / rho
        return (self.gamma - 1.0) * (q[..., 3] - kin)

    def sound_speed(self, q):
        return np.sqrt(self.gamma * self.pressure(q) / q[..., 0])

    def check(self, q):
        """Raise :class:`PhysicsError` unless ``rho > 0`` and ``p > 0`` everywhere."""
        rho = q[..., 0]
        bad = ~(rho > 0)
        if not bad.any():
            bad = ~(self.pressure(q) > 0)
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise PhysicsError(f"unphysical Euler state at index {idx}: {q[idx]}",
                               state=q[idx], where=idx)

    # -- fluxes ----------------------------------------------------------
    def _flux(self, q, p, axis):
        rho, mx, my, e = np.moveaxis(q, -1, 0)
        if axis == 0:
            un = mx / rho
            return np.stack([mx, mx * un + p, my * un, un * (e + p)], axis=-1)
        un = my / rho
        return np.stack([my, mx * un, my * un + p, un * (e + p)], axis=-1)

    def flux(self, q, axis=0):
        q = np.asarray(q, dtype=float)
        self.check(q)
        return self._flux(q, self.pressure(q), axis)

    def max_speed(self, q, axis=0) -> float:
        return float(np.max(np.abs(q[..., 1 + axis] / q[..., 0]) + self.sound_speed(q)))

    def numerical_flux(self, ql, qr, axis=0):
        """Rusanov (local Lax-Friedrichs) flux."""
        ql = np.asarray(ql, dtype=float)
        qr = np.asarray(qr, dtype=float)
        pl = self.pressure(ql)
        pr = self.pressure(qr)
        if not (np.all(ql[..., 0] > 0) and np.all(qr[..., 0] > 0)
                and np.all(pl > 0) and np.all(pr > 0)):
            self.check(ql)
            self.check(qr)
        g = self.gamma
        sl = np.abs(ql[..., 1 + axis] / ql[..., 0]) + np.sqrt(g * pl / ql[..., 0])
        sr = np.abs(qr[..., 1 + axis] / qr[..., 0]) + np.sqrt(g * pr / qr[..., 0])
        s = np.maximum(sl, sr)[..., None]
        return 0.5 * (self._flux(ql, pl, axis) + self._flux(qr, pr, axis)) - 0.5 * s * (qr - ql)


def euler_flux_x(q, gamma=GAMMA):
    return Euler(gamma).flux(q, 0)


def euler_flux_y(q, gamma=GAMMA):
    return Euler(gamma).flux(q, 1)


def positivity_fix(mean, faces, gamma=GAMMA, eps=POSITIVITY_EPS):
    """Scale reconstructed interface states of each cell back toward its mean.

    ``mean`` has shape ``(..., 4)`` and ``faces`` is a sequence of arrays of the
    same shape (one per interface of the cell).  Where any face has density or
    pressure below ``eps`` every face ``f`` of that cell becomes
    ``theta*f + (1-theta)*mean`` with the largest admissible ``theta``.
    Returns ``(new_faces, theta)``; faces of untouched cells are returned as is.
    """
    phys = Euler(gamma)
    mean = np.asarray(mean, dtype=float)
    faces = [np.asarray(f, dtype=float) for f in faces]

    def ok(states):
        return (states[..., 0] >= eps) & (phys.pressure(states) >= eps)

    bad_mean = ~ok(mean)
    if bad_mean.any():
        idx = tuple(int(i) for i in np.argwhere(bad_mean)[0])
        raise PhysicsError(f"cell mean is unphysical at index {idx}: {mean[idx]}",
                           state=mean[idx], where=idx)

    violating = np.zeros(mean.shape[:-1], dtype=bool)
    for f in faces:
        violating |= ~ok(f)
    theta = np.ones(mean.shape[:-1])
    if not violating.any():
        return faces, theta

    m = mean[violating]
    fv = [f[violating] for f in faces]
    lo = np.zeros(m.shape[0])
    hi = np.ones(m.shape[0])
    # feasibility is an interval [0, theta*] since rho and p are concave in theta
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        feas = np.ones_like(mid, dtype=bool)
        for f in fv:
            feas &= ok(m + mid[:, None] * (f - m))
        lo = np.where(feas, mid, lo)
        hi = np.where(feas, hi, mid)
    theta[violating] = lo
    out = []
    for f, sub in zip(faces, fv):
        g = f.copy()
        g[violating] = m + lo[:, None] * (sub - m)
        out.append(g)
    return out, theta
