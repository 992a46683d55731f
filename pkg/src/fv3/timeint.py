"""SSP-RK3 time stepping and CFL control."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


class UnboundedTimestep(ZeroDivisionError):
    """All wave speeds vanish; the caller has to cap the step."""


@dataclass
class StepControl:
    cfl: float
    t: float
    t_end: float

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t > self.t_end:
            raise ValueError("start time after end time")

    def clamp(self, dt: float) -> float:
        if self.t + dt >= self.t_end:
            return self.t_end - self.t
        return dt


def ssp_rk3_step(u, dt: float, rhs, t=None):
    """One step of the three-stage, third-order SSP Runge-Kutta scheme.

    With ``t`` given, ``rhs`` is called as ``rhs(u, t_stage)`` (stage times
    ``t``, ``t+dt``, ``t+dt/2``), which time-dependent boundaries need.
    ``rhs`` may raise; ``u`` is never modified in place, so a failed step
    leaves the caller's state intact.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t is None:
        f = lambda v, s: rhs(v)
        t = 0.0
    else:
        f = rhs
    u1 = u + dt * f(u, t)
    u2 = 0.75 * u + 0.25 * (u1 + dt * f(u1, t + dt))
    return u / 3.0 + (2.0 / 3.0) * (u2 + dt * f(u2, t + 0.5 * dt))


def dt_1d(widths, speed: float, cfl: float) -> float:
    if speed == 0:
        raise UnboundedTimestep("zero wave speed")
    return cfl * float(np.min(widths)) / speed


def dt_2d(dx_min: float, dy_min: float, sx: float, sy: float, cfl: float) -> float:
    """Summed-directions CFL condition ``dt (sx/dx + sy/dy) = cfl``."""
    rate = sx / dx_min + sy / dy_min
    if rate == 0:
        raise UnboundedTimestep("zero wave speed")
    return cfl / rate


def compute_dt(u, grid, physics, cfl: float) -> float:
    """CFL time step for a 1D (``Grid1D``) or 2D (``Grid2D``) state."""
    if hasattr(grid, "gx"):
        return dt_2d(float(grid.gx.widths.min()), float(grid.gy.widths.min()),
                     physics.max_speed(u, 0), physics.max_speed(u, 1), cfl)
    return dt_1d(grid.widths, physics.max_speed(u, 0), cfl)


def integrate(u, t0: float, t_end: float, rhs, dt_fn, callback=None, max_steps=None,
              timed: bool = False):
    """Advance ``u`` from ``t0`` to exactly ``t_end``.

    ``dt_fn(u, t)`` proposes a step; the last one is shortened to land on
    ``t_end``.  ``callback(u, t, step)`` may return a replacement state (used
    for regridding).  ``timed`` passes stage times to ``rhs``.  Returns
    ``(u, steps)``.
    """
    ctl = StepControl(1.0, t0, t_end)
    steps = 0
    while ctl.t < t_end:
        dt = ctl.clamp(dt_fn(u, ctl.t))
        u = ssp_rk3_step(u, dt, rhs, ctl.t if timed else None)
        steps += 1
        ctl.t = t_end if dt == t_end - ctl.t else ctl.t + dt
        if callback is not None:
            r = callback(u, ctl.t, steps)
            if r is not None:
                u = r
        if max_steps is not None and steps >= max_steps:
            break
    return u, steps
