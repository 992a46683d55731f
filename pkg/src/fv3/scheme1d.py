"""Semi-discrete finite-volume operator in one space dimension."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as kn
from .mesh import Grid1D, mean_width

NGHOST = 2
BOUNDARY_CONDITIONS = ("periodic", "outflow")


def pad(values, bc: str, axis: int = 0, ng: int = NGHOST):
    """Return ``values`` extended by ``ng`` ghost layers on both ends of ``axis``."""
    v = np.moveaxis(np.asarray(values), axis, 0)
    if bc == "periodic":
        out = np.concatenate([v[-ng:], v, v[:ng]])
    elif bc == "outflow":
        out = np.concatenate([np.repeat(v[:1], ng, 0), v, np.repeat(v[-1:], ng, 0)])
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return np.moveaxis(out, 0, axis)


def cell_face_states(v, kernel: str, params: kn.SwitchParams | None = None, widths=None,
                     counter: kn.BranchCounter | None = None, neq_form: str = "scaled"):
    """Right and left interface values of every cell ``1..M-2`` of a padded array."""
    d = np.diff(v, axis=0)
    dm, dp = d[:-1], d[1:]
    c = v[1:-1]
    if widths is None:
        hr = kn.slope(kernel, dm, dp, params, counter)
        hl = kn.slope(kernel, dp, dm, params, counter)
    else:
        w = np.asarray(widths, dtype=float).reshape((-1,) + (1,) * (v.ndim - 1))
        wm, wi, wp = w[:-2], w[1:-1], w[2:]
        if kernel == "h3":
            hr = kn.h3_neq(dm, dp, wm, wi, wp)
            hl = kn.h3_neq(dp, dm, wp, wi, wm)
        else:
            hr = kn.slope(kernel, *kn.scale_slopes_right(dm, dp, wm, wi, wp), params, counter)
            hl = kn.slope(kernel, *kn.scale_slopes_left(dm, dp, wm, wi, wp), params, counter)
            if neq_form == "scaled":
                f = kn.outer_width_factor(wm, wi, wp)
                hr = f * hr
                hl = f * hl
            elif neq_form != "literal":
                raise ValueError(f"unknown neq_form {neq_form!r}")
    return c + 0.5 * hr, c - 0.5 * hl


def face_states(v, kernel: str, params: kn.SwitchParams | None = None, widths=None,
                counter: kn.BranchCounter | None = None, neq_form: str = "scaled"):
    """Interface states along axis 0 of a padded array.

    ``v`` holds ``M`` cells along axis 0 (interior plus two ghost layers per
    side).  Returns ``(um, up)`` for the ``M - 3`` faces between cells
    ``1..M-2``: ``um[k]`` is the left (minus) state and ``up[k]`` the right
    (plus) state of the face between cells ``k+1`` and ``k+2``.

    ``widths`` (length ``M``, ghosts included) selects the non-equidistant
    path.  There ``h3`` uses the exact quadratic reconstruction and every other
    kernel is applied to the width-scaled slopes.  With ``neq_form="scaled"``
    the limited slope is multiplied by ``dx_i / D_i`` so its smooth branch
    coincides with the quadratic reconstruction; ``"literal"`` omits the factor.
    """
    right, left = cell_face_states(v, kernel, params, widths, counter, neq_form)
    return right[:-1], left[1:]


@dataclass
class CellField1D:
    """Cell averages ``values`` of shape ``(N, K)`` on ``grid``."""

    values: np.ndarray
    grid: Grid1D
    bc: str = "periodic"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.n:
            raise ValueError(f"{v.shape[0]} values for {self.grid.n} cells")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        self.values = v


def switch_params(grid: Grid1D, alpha: float) -> kn.SwitchParams:
    return kn.SwitchParams(alpha, mean_width(grid))


def _padded_widths(grid: Grid1D, bc: str):
    if grid.is_uniform:
        return None
    return pad(grid.widths, bc)


def reconstruct_1d(field: CellField1D, kernel: str, params: kn.SwitchParams | None = None,
                   counter=None, neq_form: str = "scaled"):
    """Left/right states at all ``N + 1`` faces, each of shape ``(N + 1, K)``."""
    v = pad(field.values, field.bc)
    return face_states(v, kernel, params, _padded_widths(field.grid, field.bc), counter, neq_form)


class Operator1D:
    """The map ``u -> du/dt`` for fixed grid, kernel, physics and boundary condition."""

    def __init__(self, grid: Grid1D, kernel: str, physics, alpha: float = 0.0,
                 bc: str = "periodic", neq_form: str = "scaled", counter=None):
        if bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"unknown boundary condition {bc!r}")
        kn.slope(kernel, 0.0, 0.0, kn.SwitchParams(alpha, 1.0))  # validates the name
        self.grid = grid
        self.kernel = kernel
        self.physics = physics
        self.params = switch_params(grid, alpha)
        self.bc = bc
        self.neq_form = neq_form
        self.counter = counter
        self._widths = _padded_widths(grid, bc)
        self._inv_dx = (1.0 / grid.widths)[:, None]

    def fluxes(self, u):
        v = pad(u, self.bc)
        um, up = face_states(v, self.kernel, self.params, self._widths, self.counter,
                             self.neq_form)
        return self.physics.numerical_flux(um, up, 0)

    def __call__(self, u):
        f = self.fluxes(u)
        return -(f[1:] - f[:-1]) * self._inv_dx

    def max_dt(self, u, cfl: float) -> float:
        s = self.physics.max_speed(u, 0)
        if s == 0:
            raise ZeroDivisionError("zero wave speed: time step is unbounded")
        return cfl * float(np.min(self.grid.widths)) / s


def rhs_1d(field: CellField1D, kernel: str, params: kn.SwitchParams | None, physics,
           counter=None, neq_form: str = "scaled"):
    um, up = reconstruct_1d(field, kernel, params, counter, neq_form)
    f = physics.numerical_flux(um, up, 0)
    return -(f[1:] - f[:-1]) / field.grid.widths[:, None]
