"""Pointwise reconstruction kernels.

Every kernel maps a pair of undivided differences ``(dm, dp)`` to a slope
``H`` such that the right interface value of cell ``i`` is ``u_i + H/2``.
The left interface uses the same kernel with swapped arguments,
``u_i - H(dp, dm)/2``.  All functions broadcast over numpy arrays and are
applied component-wise to systems.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNELS = ("h3", "h3l", "h3lc", "weno3js", "weno3z", "none")
WENO_EPS = 1e-6


@dataclass(frozen=True)
class SwitchParams:
    """Parameters of the smooth/non-smooth switch of the combined limiter.

    ``alpha`` bounds the second derivative of the initial data away from
    discontinuities and ``dx`` is the (mean) mesh size.
    """

    alpha: float
    dx: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.dx <= 0:
            raise ValueError(f"dx must be positive, got {self.dx}")

    @property
    def tau(self) -> float:
        return 2.5 * (self.alpha * self.dx**2) ** 2


@dataclass
class BranchCounter:
    """Tally of which branch the combined limiter took."""

    h3: int = 0
    h3l: int = 0

    def reset(self):
        self.h3 = self.h3l = 0


def _sgn(x):
    # sgn(0) = +1
    return np.where(x >= 0, 1.0, -1.0)


def h3(dm, dp):
    return (2.0 * dp + dm) / 3.0


def h3l(dm, dp):
    dm = np.asarray(dm, dtype=float)
    dp = np.asarray(dp, dtype=float)
    s = _sgn(dp)
    sh3 = s * h3(dm, dp)
    inner = np.minimum(np.minimum(2.0 * s * dm, sh3), 1.5 * np.abs(dp))
    return s * np.maximum(0.0, np.minimum(sh3, np.maximum(-s * dm, inner)))


def h3lc(dm, dp, params: SwitchParams, counter: BranchCounter | None = None):
    """Combined limiter: ``h3`` where ``dm**2 + dp**2 < tau``, ``h3l`` elsewhere."""
    dm = np.asarray(dm, dtype=float)
    dp = np.asarray(dp, dtype=float)
    smooth = dm * dm + dp * dp < params.tau
    if counter is not None:
        n_smooth = int(np.count_nonzero(smooth))
        counter.h3 += n_smooth
        counter.h3l += smooth.size - n_smooth
    return np.where(smooth, h3(dm, dp), h3l(dm, dp))


def weno3(dm, dp, variant: str = "JS", eps: float = WENO_EPS, power: int = 2):
    """Third-order WENO written as a slope.

    Candidate interface values are ``u + dm/2`` (stencil i-1, i) and
    ``u + dp/2`` (stencil i, i+1) with linear weights 1/3 and 2/3.
    """
    dm = np.asarray(dm, dtype=float)
    dp = np.asarray(dp, dtype=float)
    b0 = dm * dm
    b1 = dp * dp
    variant = variant.upper()
    if variant == "JS":
        a0 = (1.0 / 3.0) / (eps + b0) ** 2
        a1 = (2.0 / 3.0) / (eps + b1) ** 2
    elif variant == "Z":
        tau = np.abs(b0 - b1)
        a0 = (1.0 / 3.0) * (1.0 + (tau / (eps + b0)) ** power)
        a1 = (2.0 / 3.0) * (1.0 + (tau / (eps + b1)) ** power)
    else:
        raise ValueError(f"unknown WENO variant {variant!r}")
    return (a0 * dm + a1 * dp) / (a0 + a1)


def slope(kernel: str, dm, dp, params: SwitchParams | None = None,
          counter: BranchCounter | None = None):
    """Dispatch to a kernel by name."""
    if kernel == "h3":
        return h3(dm, dp)
    if kernel == "h3l":
        return h3l(dm, dp)
    if kernel == "h3lc":
        if params is None:
            raise ValueError("h3lc needs SwitchParams")
        return h3lc(dm, dp, params, counter)
    if kernel == "weno3js":
        return weno3(dm, dp, "JS")
    if kernel == "weno3z":
        return weno3(dm, dp, "Z")
    if kernel == "none":
        # piecewise-constant data, first-order scheme
        return np.zeros(np.broadcast(dm, dp).shape)
    raise ValueError(f"unknown kernel {kernel!r}; valid kernels: {', '.join(KERNELS)}")


# --- non-equidistant grids -------------------------------------------------
#
# Width triples are passed as (dxm, dxi, dxp) = widths of cells i-1, i, i+1.

def width_means(dxm, dxi, dxp):
    """Return ``(D_i, D_minus, D_plus)``: the three-cell mean and both face means."""
    return (dxm + dxi + dxp) / 3.0, 0.5 * (dxm + dxi), 0.5 * (dxi + dxp)


def h3_neq(dm, dp, dxm, dxi, dxp):
    """Unlimited quadratic reconstruction on a non-uniform stencil.

    For the left interface call ``h3_neq(dp, dm, dxp, dxi, dxm)``.
    """
    _, d_m, d_p = width_means(dxm, dxi, dxp)
    # ratios first so equal widths reproduce h3 bit for bit
    return outer_width_factor(dxm, dxi, dxp) * (2.0 * (d_m / d_p) * dp + (dxp / d_m) * dm) / 3.0


def scale_slopes_right(dm, dp, dxm, dxi, dxp):
    _, d_m, d_p = width_means(dxm, dxi, dxp)
    return (dxp / d_m) * dm, (d_m / d_p) * dp


def scale_slopes_left(dm, dp, dxm, dxi, dxp):
    """Scaled pair for the left interface, ordered as ``(first, second)`` limiter arguments."""
    _, d_m, d_p = width_means(dxm, dxi, dxp)
    return (dxm / d_p) * dp, (d_p / d_m) * dm


def h3lc_neq(dm, dp, dxm, dxi, dxp, side: str, params: SwitchParams,
             counter: BranchCounter | None = None):
    """Combined limiter evaluated on the width-scaled slopes.

    ``params.dx`` must be the mean mesh width of the grid.  The returned
    value is the limiter applied to the scaled pair; it lacks the factor
    ``dxi / D_i`` that :func:`h3_neq` carries (see :func:`outer_width_factor`).
    """
    if side == "right":
        a, b = scale_slopes_right(dm, dp, dxm, dxi, dxp)
    elif side == "left":
        a, b = scale_slopes_left(dm, dp, dxm, dxi, dxp)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return h3lc(a, b, params, counter)


def outer_width_factor(dxm, dxi, dxp):
    """``dxi / D_i``; multiplying a scaled-slope H3 value by it gives :func:`h3_neq`."""
    return 3.0 * dxi / (dxm + dxi + dxp)


def quadratic_from_averages(um, ui, up, dxm, dxi, dxp):
    """Coefficients ``(a, b, c)`` of ``p(x) = a(x-x_i)^2 + b(x-x_i) + c``.

    ``p`` has cell averages ``um, ui, up`` over the three cells of widths
    ``dxm, dxi, dxp``.  Closed forms written out term by term so they can
    serve as an oracle independent of :func:`h3_neq`.
    """
    d_i = (dxm + dxi + dxp) / 3.0
    hm = 0.5 * (dxi + dxm)
    hp = 0.5 * (dxi + dxp)
    den = hm * hp * d_i
    a = 0.5 * (hp * (um - ui) + hm * (up - ui)) / den
    # solves the three average conditions exactly (checked symbolically)
    b = (ui * (dxp - dxm) * (6.0 * d_i + dxi)
         - 2.0 * um * hp * (2.0 * hp + dxp)
         + 2.0 * up * hm * (2.0 * hm + dxm)) / (12.0 * den)
    cden = 4.0 * (dxi + dxm) * (dxi + dxp) * 3.0 * d_i
    sm = dxm + dxp
    c = (ui * (dxi * (6.0 * dxi**2 + 9.0 * dxi * sm + 4.0 * sm**2) + 4.0 * dxi * dxm * dxp)
         + 4.0 * dxm * dxp * sm * ui
         - dxi**2 * (um * (dxi + dxp) + up * (dxi + dxm))) / cden
    return a, b, c
