"""Dimension-split third-order scheme on (possibly non-uniform) 2D grids.

One right-hand-side evaluation performs

1. 1D reconstruction of interface averages row by row and column by column,
2. conversion of interface averages to interface-midpoint values,
3. numerical fluxes at interface midpoints,
4. conversion of midpoint fluxes back to interface-averaged fluxes,

and then differences the averaged fluxes.  Steps 2 and 4 are the fourth-order
transverse corrections ``-/+ (1/24) * second difference``; switching them off
(``order_fix=False``) gives the plain dimension-by-dimension scheme.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import boundary
from . import kernels as kn
from .mesh import Grid2D, mean_width
from .physics import GAMMA, POSITIVITY_EPS, Advection, Euler, PhysicsError, positivity_fix
from .scheme1d import NGHOST, cell_face_states, face_states

try:
    from . import _fast
except ImportError:  # pragma: no cover
    _fast = None


def face_average_to_point(avg, axis: int):
    """Midpoint values from interface averages, correcting along ``axis``.

    The output is two entries shorter than the input along ``axis``.
    """
    a = np.moveaxis(avg, axis, 0)
    out = a[1:-1] - (a[:-2] - 2.0 * a[1:-1] + a[2:]) / 24.0
    return np.moveaxis(out, 0, axis)


def flux_point_to_average(pts, axis: int):
    """Interface-averaged fluxes from midpoint fluxes (two shorter along ``axis``)."""
    a = np.moveaxis(pts, axis, 0)
    out = a[1:-1] + (a[:-2] - 2.0 * a[1:-1] + a[2:]) / 24.0
    return np.moveaxis(out, 0, axis)


@dataclass
class CellField2D:
    values: np.ndarray
    grid: Grid2D
    bcs: dict = field(default_factory=lambda: boundary.normalize("periodic"))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 2:
            v = v[..., None]
        if v.shape[:2] != self.grid.shape:
            raise ValueError(f"values of shape {v.shape[:2]} on a {self.grid.shape} grid")
        self.values = v
        self.bcs = boundary.normalize(self.bcs)


def _limit(physics, mean, right, left):
    if not isinstance(physics, Euler):
        return right, left
    (right, left), _ = positivity_fix(mean, [right, left], physics.gamma)
    return right, left


def _numpy_sweep(P, axis, kernel, physics, params, order_fix, counter, widths, neq_form):
    # sweep direction first, block axis second, transverse axis third
    Q = np.moveaxis(P, 1 + axis, 0)
    right, left = cell_face_states(Q, kernel, params, widths, counter, neq_form)
    mean = Q[1:-1]
    right, left = _limit(physics, mean, right, left)
    if order_fix:
        right = face_average_to_point(right, 2)
        left = face_average_to_point(left, 2)
        right, left = _limit(physics, mean[:, :, 1:-1], right, left)
    else:
        right, left = right[:, :, 2:-2], left[:, :, 2:-2]
    f = physics.numerical_flux(right[:-1], left[1:], axis)
    if order_fix:
        f = flux_point_to_average(f, 2)
    return np.moveaxis(f, 0, 1 + axis)


def _numba_sweep(P, axis, kernel, physics, taus, order_fix, counter):
    Q = np.ascontiguousarray(np.moveaxis(P, 1 + axis, 1))
    counts = np.zeros(2, dtype=np.int64)
    if isinstance(physics, Euler):
        g, speed = physics.gamma, 0.0
    else:
        g, speed = GAMMA, physics.speed[axis]
    taus = np.broadcast_to(np.asarray(taus, dtype=float), (Q.shape[0],)).copy()
    F, status, where = _fast.sweep(Q, _fast.KERNEL_IDS[kernel], taus, kn.WENO_EPS, order_fix,
                                   isinstance(physics, Euler), axis, g, POSITIVITY_EPS,
                                   speed, counts)
    if counter is not None:
        counter.h3 += int(counts[0])
        counter.h3l += int(counts[1])
    if status.any():
        b, i = (int(v) for v in np.argwhere(status)[0])
        idx = (i + 1, int(where[b, i]))
        if axis == 1:
            idx = idx[::-1]
        what = "cell mean" if status[b, i] == _fast.BAD_MEAN else "interface state"
        raise PhysicsError(f"unphysical {what} in block {b} near padded cell {idx}",
                           where=(b,) + idx)
    return np.moveaxis(F, 1, 1 + axis)


def block_fluxes(P, axis: int, kernel: str, physics, taus, order_fix: bool = True,
                 counter=None, widths=None, neq_form: str = "scaled", backend: str = "numpy"):
    """Interface-averaged fluxes along ``axis`` for a stack of padded blocks.

    ``P`` has shape ``(NB, nx + 4, ny + 4, K)``; ``taus`` is a scalar or one
    switch threshold per block.  Returns ``(NB, nx + 1, ny, K)`` for
    ``axis=0`` and ``(NB, nx, ny + 1, K)`` for ``axis=1``.  ``widths`` (padded
    widths along ``axis``, shared by all blocks) selects the non-equidistant
    reconstruction, which only the numpy backend provides.
    """
    if backend == "numba":
        if widths is not None:
            raise ValueError("the numba backend handles uniform blocks only")
        return _numba_sweep(P, axis, kernel, physics, taus, order_fix, counter)
    taus = np.asarray(taus, dtype=float)
    if taus.ndim:
        taus = taus[None, :, None, None]
    return _numpy_sweep(P, axis, kernel, physics, _Tau(taus), order_fix, counter, widths, neq_form)


class _Tau:
    """Stand-in for :class:`SwitchParams` carrying a precomputed threshold."""

    def __init__(self, tau):
        self.tau = tau


class Operator2D:
    """``u -> du/dt`` for the dimension-split scheme on a fixed grid.

    ``u`` has shape ``(nx, ny, K)``.  Cell widths enter the reconstruction
    only when the grid is non-uniform.  ``backend="auto"`` picks the compiled
    sweep whenever it applies (uniform grid, numba importable).
    """

    def __init__(self, grid: Grid2D, kernel: str, physics, alpha: float = 0.0,
                 bcs="periodic", order_fix: bool = True, counter=None,
                 neq_form: str = "scaled", backend: str = "auto"):
        kn.slope(kernel, 0.0, 0.0, kn.SwitchParams(alpha, 1.0))
        self.grid = grid
        self.kernel = kernel
        self.physics = physics
        self.alpha = alpha
        self.bcs = boundary.normalize(bcs)
        self.order_fix = order_fix
        self.counter = counter
        self.neq_form = neq_form
        ng = NGHOST
        self.params = (kn.SwitchParams(alpha, mean_width(grid.gx)),
                       kn.SwitchParams(alpha, mean_width(grid.gy)))
        self._xc = boundary.pad_coords(grid.gx.boundaries, ng)
        self._yc = boundary.pad_coords(grid.gy.boundaries, ng)
        self._widths = (None, None)
        if not grid.is_uniform:
            self._widths = tuple(
                self._padded_widths(g.widths, self.bcs[s])
                for g, s in ((grid.gx, "xlo"), (grid.gy, "ylo")))
        self._inv_dx = (1.0 / grid.gx.widths)[:, None, None]
        self._inv_dy = (1.0 / grid.gy.widths)[None, :, None]
        if backend not in ("auto", "numpy", "numba"):
            raise ValueError(f"unknown backend {backend!r}")
        fast_ok = _fast is not None and grid.is_uniform and isinstance(physics, (Euler, Advection))
        if backend == "numba" and not fast_ok:
            raise ValueError("the numba backend needs numba, a uniform grid and Euler or advection")
        self.backend = "numba" if backend != "numpy" and fast_ok else "numpy"

    @staticmethod
    def _padded_widths(w, rule):
        ng = NGHOST
        if rule == "periodic":
            return np.concatenate([w[-ng:], w, w[:ng]])
        return np.concatenate([w[ng - 1::-1], w, w[:-ng - 1:-1]])

    def pad(self, u, t=0.0):
        ng = NGHOST
        nx, ny, k = u.shape
        P = np.empty((nx + 2 * ng, ny + 2 * ng, k))
        P[ng:-ng, ng:-ng] = u
        return boundary.fill(P, self.bcs, ng, self._xc, self._yc, t)

    def _sweep(self, P, axis):
        return block_fluxes(P[None], axis, self.kernel, self.physics, self.params[axis].tau,
                            self.order_fix, self.counter, self._widths[axis], self.neq_form,
                            self.backend)[0]

    def fluxes(self, u, t=0.0):
        """Interface-averaged fluxes ``(F, G)`` of shapes ``(nx+1, ny, K)`` and ``(nx, ny+1, K)``."""
        P = self.pad(u, t)
        return self._sweep(P, 0), self._sweep(P, 1)

    def __call__(self, u, t=0.0):
        F, G = self.fluxes(u, t)
        return -(F[1:] - F[:-1]) * self._inv_dx - (G[:, 1:] - G[:, :-1]) * self._inv_dy

    def max_dt(self, u, cfl: float) -> float:
        sx = self.physics.max_speed(u, 0)
        sy = self.physics.max_speed(u, 1)
        rate = sx / self.grid.gx.widths.min() + sy / self.grid.gy.widths.min()
        if rate == 0:
            raise ZeroDivisionError("zero wave speed: time step is unbounded")
        return cfl / rate


def reconstruct_faces_2d(f: CellField2D, kernel: str, alpha: float = 0.0, t=0.0):
    """Interface averages ``(x_minus, x_plus, y_minus, y_plus)`` of a field.

    x arrays have shape ``(nx+1, ny, K)``, y arrays ``(nx, ny+1, K)``.
    """
    op = Operator2D(f.grid, kernel, _NullPhysics(), alpha, f.bcs)
    P = op.pad(f.values, t)
    ng = NGHOST
    xr, xl = face_states(P[:, ng:-ng], kernel, op.params[0], op._widths[0])
    Qy = np.moveaxis(P[ng:-ng, :], 1, 0)
    yr, yl = face_states(Qy, kernel, op.params[1], op._widths[1])
    return xr, xl, np.moveaxis(yr, 0, 1), np.moveaxis(yl, 0, 1)


class _NullPhysics:
    ncomp = 0


def rhs_2d(f: CellField2D, kernel: str, alpha: float, physics, order_fix=True, t=0.0):
    return Operator2D(f.grid, kernel, physics, alpha, f.bcs, order_fix)(f.values, t)
