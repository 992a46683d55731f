"""Tensor-product meshes in one and two dimensions.

Grids are described by their cell boundaries; widths and centers are derived
once at construction and never change afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MIN_CELLS = 3


class GridError(ValueError):
    """Raised for invalid grid parameters or non-monotone boundaries."""


@dataclass(frozen=True)
class Grid1D:
    """A 1D partition of ``[x_left, x_right]`` into ``n`` cells."""

    boundaries: np.ndarray
    widths: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.ndim != 1 or b.size < MIN_CELLS + 1:
            raise GridError(f"need at least {MIN_CELLS} cells, got {b.size - 1}")
        w = np.diff(b)
        bad = np.flatnonzero(w <= 0)
        if bad.size:
            raise GridError(f"boundaries not strictly increasing at index {bad[0] + 1}")
        b.setflags(write=False)
        w.setflags(write=False)
        c = 0.5 * (b[:-1] + b[1:])
        c.setflags(write=False)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "centers", c)

    @property
    def n(self) -> int:
        return self.widths.size

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.boundaries[0]), float(self.boundaries[-1])

    @property
    def length(self) -> float:
        return float(self.boundaries[-1] - self.boundaries[0])

    @property
    def is_uniform(self) -> bool:
        # linspace round-off makes equal widths differ in the last bits
        w = self.widths
        return bool(np.all(np.abs(w - w[0]) <= 1e-12 * w[0]))

    def to_csv(self, path) -> None:
        """Write one boundary coordinate per line."""
        Path(path).write_text("".join(f"{x:.17g}\n" for x in self.boundaries))

    @classmethod
    def from_csv(cls, path) -> "Grid1D":
        return cls(np.loadtxt(path, ndmin=1))


@dataclass(frozen=True)
class Grid2D:
    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.n, self.gy.n

    @property
    def areas(self) -> np.ndarray:
        return np.outer(self.gx.widths, self.gy.widths)

    @property
    def is_uniform(self) -> bool:
        return self.gx.is_uniform and self.gy.is_uniform


def _check_domain(domain, n):
    xl, xr = map(float, domain)
    if n < MIN_CELLS:
        raise GridError(f"n={n} is below the stencil minimum of {MIN_CELLS}")
    if not xl < xr:
        raise GridError(f"degenerate domain [{xl}, {xr}]")
    return xl, xr


def _uniform_boundaries(xl, xr, n):
    b = xl + (xr - xl) * np.arange(n + 1) / n
    b[-1] = xr
    return b


def build_uniform_1d(domain, n: int) -> Grid1D:
    xl, xr = _check_domain(domain, n)
    return Grid1D(_uniform_boundaries(xl, xr, n))


def _perturbed(b, shift):
    out = b.copy()
    out[1:-1] += shift[1:-1]
    w = np.diff(out)
    bad = np.flatnonzero(w <= 0)
    if bad.size:
        raise GridError(f"perturbation breaks monotonicity at boundary index {bad[0] + 1}")
    return out


def build_perturbed_1d(domain, n: int, c1: float, c2: float) -> Grid1D:
    """Uniform grid with ``c1*sin(2*pi*c2*x)`` added to every interior boundary."""
    xl, xr = _check_domain(domain, n)
    b = _uniform_boundaries(xl, xr, n)
    if c1 == 0:
        return Grid1D(b)
    return Grid1D(_perturbed(b, c1 * np.sin(c2 * 2 * np.pi * b)))


def build_random_1d(domain, n: int, amplitude: float, seed: int) -> Grid1D:
    """Jitter interior boundaries by ``U(-amplitude, amplitude) * dx``.

    Offsets are drawn from ``numpy.random.default_rng(seed)`` (PCG64), one
    draw per boundary including the two fixed endpoints, so a given
    ``(n, amplitude, seed)`` always produces the same grid.
    """
    if not 0 <= amplitude < 0.5:
        raise GridError(f"amplitude must lie in [0, 0.5), got {amplitude}")
    xl, xr = _check_domain(domain, n)
    b = _uniform_boundaries(xl, xr, n)
    if amplitude == 0:
        return Grid1D(b)
    rng = np.random.default_rng(seed)
    dx = (xr - xl) / n
    return Grid1D(_perturbed(b, rng.uniform(-amplitude, amplitude, n + 1) * dx))


def _sine_mapped_axis(domain, n, delta, c):
    xl, xr = _check_domain(domain, n)
    b = _uniform_boundaries(xl, xr, n)
    if delta == 0:
        return Grid1D(b)
    return Grid1D(_perturbed(b, delta * np.sin(c * np.pi * b)))


def build_nonuniform_2d(domain, nx: int, ny: int, dx_amp: float, cx: float,
                        dy_amp: float, cy: float) -> Grid2D:
    """Axis-aligned grid with ``x -> x + dx_amp*sin(cx*pi*x)`` (same for y).

    The map is applied to the interior cell boundaries of each axis so the
    mesh stays a tensor product; centers are midpoints of the mapped
    boundaries.  ``domain`` is ``((x0, x1), (y0, y1))``.
    """
    (x0, x1), (y0, y1) = domain
    return Grid2D(_sine_mapped_axis((x0, x1), nx, dx_amp, cx),
                  _sine_mapped_axis((y0, y1), ny, dy_amp, cy))


def build_uniform_2d(domain, nx: int, ny: int) -> Grid2D:
    (x0, x1), (y0, y1) = domain
    return Grid2D(build_uniform_1d((x0, x1), nx), build_uniform_1d((y0, y1), ny))


def mean_width(g: Grid1D) -> float:
    return g.length / g.n
