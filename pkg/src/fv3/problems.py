"""Benchmark scenarios: initial data, boundaries, alpha, end time and references.

Initial conditions are pointwise functions returning conserved states with a
trailing component axis.  :func:`cell_averages` integrates them with tensor
Gauss-Legendre quadrature, which is how every run is initialised.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .physics import GAMMA, Advection, Euler

QUAD_POINTS = 4


@dataclass(frozen=True)
class Scenario:
    name: str
    physics: object
    domain: tuple
    initial: Callable
    bcs: object
    alpha: float
    t_end: float
    cfl: float
    exact: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")

    @property
    def ndim(self) -> int:
        return 1 if np.ndim(self.domain[0]) == 0 else 2


def _nodes(b, n):
    x, w = leggauss(n)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (b[:-1] + b[1:])
    half = 0.5 * np.diff(b)
    return mid[:, None] + half[:, None] * x, 0.5 * w


def cell_averages(fn, grid, n: int = QUAD_POINTS, t: float | None = None):
    """Cell averages of ``fn`` on a 1D or 2D grid by n-point Gauss quadrature.

    ``fn(x)`` or ``fn(x, y)`` (``fn(..., t)`` when ``t`` is given) must return
    an array with a trailing component axis.
    """
    extra = () if t is None else (t,)
    if hasattr(grid, "gx"):
        xs, wx = _nodes(grid.gx.boundaries, n)
        ys, wy = _nodes(grid.gy.boundaries, n)
        v = fn(xs[:, None, :, None], ys[None, :, None, :], *extra)
        return np.einsum("ijabk,a,b->ijk", v, wx, wy)
    xs, wx = _nodes(grid.boundaries, n)
    return np.einsum("iak,a->ik", fn(xs, *extra), wx)


# -- linear advection -----------------------------------------------------

def _sine1d(x, t=0.0):
    return np.sin(2 * np.pi * (x - t))[..., None]


def advection_1d() -> Scenario:
    return Scenario("advection_1d", Advection(1.0), (0.0, 1.0), _sine1d, "periodic",
                    alpha=4 * np.pi ** 2, t_end=1.0, cfl=0.95, exact=_sine1d)


def advection_2d(a: float = 1.0, b: float = 0.0) -> Scenario:
    def u0(x, y):
        return (0.5 * np.sin(np.pi * x) * np.sin(np.pi * y))[..., None]

    def exact(x, y, t):
        # periodic on [-1, 1]^2
        return u0(x - a * t, y - b * t)

    return Scenario("advection_2d", Advection(a, b), ((-1.0, 1.0), (-1.0, 1.0)), u0,
                    "periodic", alpha=np.pi ** 2, t_end=2.0, cfl=0.5, exact=exact,
                    params={"a": a, "b": b})


# -- isentropic vortex ----------------------------------------------------

VORTEX_STRENGTH = 5.0


def vortex_temperature(r2, gamma=GAMMA, sigma=VORTEX_STRENGTH):
    return -(gamma - 1) * sigma ** 2 / (8 * gamma * np.pi ** 2) * np.exp(1 - r2)


def vortex(exponent: str = "standard", gamma: float = GAMMA) -> Scenario:
    """Hu's vortex on ``[-7, 7]^2`` advected once around the periodic box.

    ``exponent="standard"`` uses ``exp(0.5 (1 - r^2))`` in the velocity
    perturbation; ``"verbatim"`` uses ``exp(0.5 (1 - r))``.
    """
    if exponent not in ("standard", "verbatim"):
        raise ValueError(f"unknown vortex exponent form {exponent!r}")
    eu = Euler(gamma)
    sigma = VORTEX_STRENGTH

    def w0(x, y):
        x, y = np.broadcast_arrays(x, y)
        r2 = x * x + y * y
        dT = vortex_temperature(r2, gamma, sigma)
        e = np.exp(0.5 * (1 - r2)) if exponent == "standard" else np.exp(0.5 * (1 - np.sqrt(r2)))
        k = sigma / (2 * np.pi) * e
        rho = (1 + dT) ** (1 / (gamma - 1))
        p = (1 + dT) ** (gamma / (gamma - 1))
        return eu.to_conserved(np.stack([rho, 1 - y * k, 1 + x * k, p], axis=-1))

    def exact(x, y, t):
        # one full period at t = 14; only used there
        return w0(x, y)

    return Scenario("vortex", eu, ((-7.0, 7.0), (-7.0, 7.0)), w0, "periodic",
                    alpha=7.9, t_end=14.0, cfl=0.5, exact=exact,
                    params={"exponent": exponent})


# -- double Mach reflection -------------------------------------------------

DMR_X0 = 1.0 / 6.0
DMR_PRE = (1.4, 0.0, 0.0, 1.0)
DMR_POST = (8.0, 8.25 * math.cos(math.pi / 6), -8.25 * math.sin(math.pi / 6), 116.5)


def normal_shock(mach: float, rho1: float = 1.4, p1: float = 1.0, gamma: float = GAMMA):
    """Post-shock ``(rho, p, normal speed behind the shock)`` for a shock
    moving at ``mach`` into gas at rest (lab frame)."""
    c1 = math.sqrt(gamma * p1 / rho1)
    m2 = mach * mach
    rho2 = rho1 * (gamma + 1) * m2 / ((gamma - 1) * m2 + 2)
    p2 = p1 * (2 * gamma * m2 - (gamma - 1)) / (gamma + 1)
    s = mach * c1
    return rho2, p2, s * (1 - rho1 / rho2)


def dmr_shock_x(y, t):
    """x position of the incident shock at height ``y`` and time ``t``."""
    return DMR_X0 + (y + 20.0 * t) / math.sqrt(3.0)


def double_mach(gamma: float = GAMMA) -> Scenario:
    eu = Euler(gamma)
    pre = eu.to_conserved(DMR_PRE)
    post = eu.to_conserved(DMR_POST)

    def w0(x, y):
        x, y = np.broadcast_arrays(x, y)
        behind = (x < dmr_shock_x(y, 0.0))[..., None]
        return np.where(behind, post, pre)

    def inflow(P, side, ng, xc, yc, t):
        P[:ng, ng:-ng] = post

    def bottom(P, side, ng, xc, yc, t):
        mirror = P[:, 2 * ng - 1:ng - 1:-1].copy()
        mirror[..., 2] *= -1.0
        wall = (xc >= DMR_X0)[:, None, None]
        P[:, :ng] = np.where(wall, mirror, post)

    def top(P, side, ng, xc, yc, t):
        ys = yc[-ng:]
        behind = (xc[:, None] < dmr_shock_x(ys[None, :], t))[..., None]
        P[:, -ng:] = np.where(behind, post, pre)

    bcs = {"xlo": inflow, "xhi": "outflow", "ylo": bottom, "yhi": top}
    return Scenario("double_mach", eu, ((0.0, 3.0), (0.0, 1.0)), w0, bcs,
                    alpha=0.0, t_end=0.2, cfl=0.5, params={"time_dependent": True})


# -- four-shock Riemann problem -------------------------------------------

# (rho, p, u, v) per quadrant: NE, NW, SW, SE
RIEMANN_STATES = {
    "ne": (1.5, 1.5, 0.0, 0.0),
    "nw": (0.5323, 0.3, 1.2060, 0.0),
    "sw": (0.1380, 0.029, 1.2060, 1.2060),
    "se": (0.5323, 0.3, 0.0, 1.2060),
}


def riemann_2d(gamma: float = GAMMA) -> Scenario:
    eu = Euler(gamma)
    cons = {k: eu.to_conserved((r, u, v, p)) for k, (r, p, u, v) in RIEMANN_STATES.items()}

    def w0(x, y):
        x, y = np.broadcast_arrays(x, y)
        east = (x > 0.5)[..., None]
        north = (y > 0.5)[..., None]
        return np.where(north, np.where(east, cons["ne"], cons["nw"]),
                        np.where(east, cons["se"], cons["sw"]))

    return Scenario("riemann_2d", eu, ((0.0, 1.0), (0.0, 1.0)), w0, "outflow",
                    alpha=0.0, t_end=0.3, cfl=0.5)


SCENARIOS = {
    "advection_1d": advection_1d,
    "advection_2d": advection_2d,
    "vortex": vortex,
    "double_mach": double_mach,
    "riemann_2d": riemann_2d,
}


def get(name: str, **kw) -> Scenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; valid: {', '.join(SCENARIOS)}") from None
    return factory(**kw)
