"""Block-structured adaptive mesh refinement without time subcycling.

Level ``l`` tiles the domain with ``root[0]*2**l x root[1]*2**l`` blocks of
``bx x by`` cells.  The leaves (blocks that are not refined) carry the
solution and are stacked into one array of shape ``(nleaf, bx, by, K)`` so
that a right-hand-side evaluation is a single call of the block sweep.

Ghost cells are filled through one full-domain array per level, the level
*canvas*:

1. every leaf writes its cells into the canvas of its level,
2. canvases are restricted upward (2x2 means) wherever a finer level covers
   them,
3. going from coarse to fine, regions of a canvas that belong to coarser
   leaves are filled by conservative quadratic prolongation, and the
   physical boundary rules pad each canvas,
4. every leaf reads its padded block back from its canvas.

Afterwards each canvas holds a valid representation of the whole solution
at its resolution, which is also what regridding uses to initialise new
leaves.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import boundary
from . import kernels as kn
from .mesh import Grid1D, Grid2D, build_uniform_1d, mean_width
from .physics import POSITIVITY_EPS, Euler, PhysicsError, positivity_fix
from .scheme1d import NGHOST
from .scheme2d import Operator2D, block_fluxes

try:
    from . import _fast
except ImportError:  # pragma: no cover
    _fast = None

log = logging.getLogger(__name__)

NEIGHBORS = [(di, dj) for di, dj in product((-1, 0, 1), repeat=2) if (di, dj) != (0, 0)]


class StructureError(RuntimeError):
    """The block hierarchy violates nesting or coverage."""


@dataclass(frozen=True)
class Block:
    level: int
    origin: tuple
    cells: np.ndarray      # padded, (bx + 4, by + 4, K)

    @property
    def interior(self):
        g = NGHOST
        return self.cells[g:-g, g:-g]


# -- cell-level operators -------------------------------------------------

def refinement_indicator(q, i, j, dx, dy):
    """Normalised second-difference sensor at cell ``(i, j)`` of a 2D array."""
    c = q[i, j]
    if c == 0:
        return np.inf
    num = abs(q[i - 1, j] - 2 * c + q[i + 1, j]) + abs(q[i, j - 1] - 2 * c + q[i, j + 1])
    return num / (abs(c) * dx * dy)


def indicator_field(P, dx, dy, ng: int = NGHOST):
    """Vectorised :func:`refinement_indicator` over the interior of padded ``P``.

    ``P`` is ``(..., nx + 2 ng, ny + 2 ng)``; ``dx``/``dy`` broadcast against
    the leading axes.
    """
    c = P[..., ng:-ng, ng:-ng]
    dxx = np.abs(P[..., ng - 1:-ng - 1, ng:-ng] - 2 * c + P[..., ng + 1:P.shape[-2] - ng + 1, ng:-ng])
    dyy = np.abs(P[..., ng:-ng, ng - 1:-ng - 1] - 2 * c + P[..., ng:-ng, ng + 1:P.shape[-1] - ng + 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (dxx + dyy) / (np.abs(c) * dx * dy)
    return np.where(c == 0, np.inf, d)


def restrict(children):
    """Coarse cells from fine data: mean of each 2x2 group of the last two spatial axes.

    ``children`` is ``(..., 2 nx, 2 ny, K)``; a pair of odd extents is a
    structural error.
    """
    f = np.asarray(children)
    if f.shape[-3] % 2 or f.shape[-2] % 2:
        raise StructureError(f"cannot restrict odd extent {f.shape[-3:-1]}")
    return 0.25 * ((f[..., 0::2, 0::2, :] + f[..., 1::2, 0::2, :])
                   + (f[..., 0::2, 1::2, :] + f[..., 1::2, 1::2, :]))


def restrict_children(children):
    """Coarse block from its four children ``[[sw, nw], [se, ne]]`` (index ``[di][dj]``)."""
    if len(children) != 2 or any(len(c) != 2 for c in children) or \
            any(c is None for row in children for c in row):
        raise StructureError("restriction needs all four children")
    rows = [np.concatenate(col, axis=1) for col in children]
    return restrict(np.concatenate(rows, axis=0))


def prolong(P, physics=None):
    """Fine cells from padded coarse data.

    ``P`` is ``(..., nx + 2, ny + 2, K)`` with one ghost ring.  Each coarse
    cell's tensor quadratic is averaged over its four quarters, giving
    ``(..., 2 nx, 2 ny, K)``.  For Euler states the quarters of a cell are
    scaled toward the coarse mean where density or pressure would drop
    below the positivity floor, which keeps the map conservative.
    """
    P = np.asarray(P, dtype=float)
    q = P[..., 1:-1, 1:-1, :]
    cx = (P[..., 2:, 1:-1, :] - P[..., :-2, 1:-1, :]) / 8.0
    cy = (P[..., 1:-1, 2:, :] - P[..., 1:-1, :-2, :]) / 8.0
    cxy = ((P[..., 2:, 2:, :] - P[..., 2:, :-2, :]) - (P[..., :-2, 2:, :] - P[..., :-2, :-2, :])) / 64.0
    quarters = {}
    for sx, sy in product((-1.0, 1.0), repeat=2):
        quarters[sx, sy] = (q + sx * cx) + sy * (cy + sx * cxy)
    if isinstance(physics, Euler):
        keys = list(quarters)
        fixed, _ = positivity_fix(q, [quarters[k] for k in keys], physics.gamma, POSITIVITY_EPS)
        quarters = dict(zip(keys, fixed))
    shape = q.shape[:-3] + (2 * q.shape[-3], 2 * q.shape[-2], q.shape[-1])
    out = np.empty(shape)
    out[..., 0::2, 0::2, :] = quarters[-1.0, -1.0]
    out[..., 1::2, 0::2, :] = quarters[1.0, -1.0]
    out[..., 0::2, 1::2, :] = quarters[-1.0, 1.0]
    out[..., 1::2, 1::2, :] = quarters[1.0, 1.0]
    return out


# -- the forest -------------------------------------------------------------

class AmrForest:
    """Leaves of a block quadtree over a rectangle plus their cell data.

    ``leaves`` is a sorted list of ``(level, i, j)`` keys and ``data`` the
    stacked interior cells in the same order.
    """

    def __init__(self, domain, block=(16, 16), levels=(0, 2), delta0=np.inf, ncomp=1,
                 bcs="periodic", root=(1, 1), physics=None, fast=None):
        self.domain = tuple(tuple(map(float, d)) for d in domain)
        self.bx, self.by = map(int, block)
        if self.bx < 4 or self.by < 4 or self.bx % 2 or self.by % 2:
            raise ValueError(f"block dimensions must be even and at least 4, got {block}")
        self.lmin, self.lmax = map(int, levels)
        if not 0 <= self.lmin <= self.lmax:
            raise ValueError(f"invalid level range {levels}")
        self.delta0 = float(delta0)
        self.ncomp = int(ncomp)
        self.bcs = boundary.normalize(bcs)
        self.root = tuple(map(int, root))
        self.physics = physics
        self.fast = (_fast is not None) if fast is None else bool(fast) and _fast is not None
        self._grids = {}
        self.leaves = [(self.lmin, i, j) for i in range(self.nblocks(self.lmin)[0])
                       for j in range(self.nblocks(self.lmin)[1])]
        self.data = np.zeros((len(self.leaves), self.bx, self.by, self.ncomp))
        self.canvases = {}
        self._index()

    # geometry ------------------------------------------------------------
    def nblocks(self, level):
        return self.root[0] << level, self.root[1] << level

    def ncells(self, level):
        nbx, nby = self.nblocks(level)
        return nbx * self.bx, nby * self.by

    def grid(self, level) -> Grid2D:
        """Uniform grid of the whole domain at ``level``."""
        if level not in self._grids:
            nx, ny = self.ncells(level)
            self._grids[level] = Grid2D(build_uniform_1d(self.domain[0], nx),
                                        build_uniform_1d(self.domain[1], ny))
        return self._grids[level]

    def spacing(self, level):
        g = self.grid(level)
        return mean_width(g.gx), mean_width(g.gy)

    def block_grid(self, key) -> Grid2D:
        level, i, j = key
        g = self.grid(level)
        bx = g.gx.boundaries[i * self.bx:(i + 1) * self.bx + 1]
        by = g.gy.boundaries[j * self.by:(j + 1) * self.by + 1]
        return Grid2D(Grid1D(bx), Grid1D(by))

    def bounds(self, key):
        level, i, j = key
        g = self.grid(level)
        return (g.gx.boundaries[i * self.bx], g.gx.boundaries[(i + 1) * self.bx],
                g.gy.boundaries[j * self.by], g.gy.boundaries[(j + 1) * self.by])

    # bookkeeping ---------------------------------------------------------
    def _index(self):
        self.leaves = sorted(self.leaves)
        self._leafset = set(self.leaves)
        self._pos = {k: n for n, k in enumerate(self.leaves)}
        self.levels_used = sorted({k[0] for k in self.leaves})
        lv = np.array([k[0] for k in self.leaves])
        self._by_level = {l: np.flatnonzero(lv == l) for l in self.levels_used}
        inv_dx, inv_dy = [], []
        for level, i, j in self.leaves:
            g = self.grid(level)
            inv_dx.append(1.0 / g.gx.widths[i * self.bx:(i + 1) * self.bx])
            inv_dy.append(1.0 / g.gy.widths[j * self.by:(j + 1) * self.by])
        self._inv_dx = np.array(inv_dx)[:, :, None, None]
        self.generation = getattr(self, "generation", -1) + 1
        self._inv_dy = np.array(inv_dy)[:, None, :, None]
        self._checked = False
        self._layout_cache = {}

    def copy(self):
        other = object.__new__(AmrForest)
        other.__dict__.update(self.__dict__)
        other.data = self.data.copy()
        other.leaves = list(self.leaves)
        other.canvases = {}
        other._index()
        return other

    def leaf_level_at(self, level, i, j):
        """Level of the leaf covering block ``(level, i, j)``'s region.

        Returns ``level + 1`` if the region is refined and ``None`` if it lies
        outside a non-periodic domain.
        """
        reg = self._neighbor_region(level, i, j)
        if reg is None:
            return None
        leaf = self._covering_leaf(*reg, self._leafset)
        return level + 1 if leaf is None else leaf[0]

    def nesting_violations(self):
        """Pairs of touching leaves (diagonals included) more than one level apart."""
        bad = []
        for level, i, j in self.leaves:
            for di, dj in NEIGHBORS:
                lv = self.leaf_level_at(level, i + di, j + dj)
                if lv is not None and lv < level - 1:
                    bad.append(((level, i, j), (di, dj), lv))
        return bad

    def check(self):
        """Raise :class:`StructureError` unless the leaves tile the domain and nest properly."""
        area = sum(4.0 ** -k[0] for k in self.leaves)
        if abs(area - self.root[0] * self.root[1]) > 1e-12:
            raise StructureError(f"leaves cover {area} root blocks, expected {self.root[0] * self.root[1]}")
        for level, i, j in self.leaves:
            for lv in range(self.lmin, level):
                s = level - lv
                if (lv, i >> s, j >> s) in self._leafset:
                    raise StructureError(f"leaf {(level, i, j)} overlaps leaf {(lv, i >> s, j >> s)}")
        bad = self.nesting_violations()
        if bad:
            raise StructureError(f"nesting violated: leaf {bad[0][0]} touches level {bad[0][2]}")
        self._checked = True

    def blocks(self):
        """Leaves as :class:`Block` objects (padded data from the last ghost fill)."""
        P = self.padded()
        return [Block(k[0], (k[1], k[2]), P[n]) for n, k in enumerate(self.leaves)]

    # data movement -------------------------------------------------------
    def _cell_ranges(self, keys, pad):
        i = np.array([k[1] for k in keys])[:, None]
        j = np.array([k[2] for k in keys])[:, None]
        rows = i * self.bx + np.arange(self.bx + 2 * pad)
        cols = j * self.by + np.arange(self.by + 2 * pad)
        return rows[:, :, None], cols[:, None, :]

    def _pad_coords(self, level):
        g = self.grid(level)
        return (boundary.pad_coords(g.gx.boundaries, NGHOST),
                boundary.pad_coords(g.gy.boundaries, NGHOST))

    def _region_mask(self, level, keys):
        nbx, nby = self.nblocks(level)
        m = np.zeros((nbx, nby), dtype=bool)
        for _, i, j in keys:
            m[i, j] = True
        return np.repeat(np.repeat(m, self.bx, 0), self.by, 1)

    def _layout(self, top):
        """Per-level leaf index ranges and ownership masks, cached per structure."""
        if top in self._layout_cache:
            return self._layout_cache[top]
        writes, own, cover = {}, {}, {}
        for level in range(top, self.lmin - 1, -1):
            have = np.zeros(self.ncells(level), dtype=bool)
            idx = self._by_level.get(level)
            if idx is not None and idx.size:
                keys = [self.leaves[n] for n in idx]
                writes[level] = (idx, self._cell_ranges(keys, 0))
                have |= self._region_mask(level, keys)
            if level < top:
                # regions held by finer leaves, possibly via finer restriction
                fh = own[level + 1]
                cov = fh[0::2, 0::2] & fh[1::2, 0::2] & fh[0::2, 1::2] & fh[1::2, 1::2]
                if cov.any():
                    cover[level] = cov
                    have |= cov
            own[level] = have
        reads = {level: self._cell_ranges([self.leaves[n] for n in idx], NGHOST)
                 for level, idx in self._by_level.items()}
        self._layout_cache[top] = out = (writes, own, cover, reads)
        return out

    def fill_canvases(self, t=0.0, upto=None):
        """Build valid padded canvases for every level up to ``upto`` (default ``lmax`` used)."""
        if not self._checked:
            self.check()
        g = NGHOST
        top = max(self.levels_used) if upto is None else upto
        writes, own, cover, _ = self._layout(top)
        canv = {}
        for level in range(top, self.lmin - 1, -1):
            nx, ny = self.ncells(level)
            C = np.empty((nx + 2 * g, ny + 2 * g, self.ncomp))
            if level in writes:
                idx, (r, c) = writes[level]
                C[r + g, c + g] = self.data[idx]
            if level in cover:
                cov = cover[level]
                C[g:-g, g:-g][cov] = restrict(canv[level + 1][g:-g, g:-g])[cov]
            canv[level] = C
        for level in range(self.lmin, top + 1):
            C = canv[level]
            missing = ~own[level]
            if level > self.lmin and missing.any():
                self._prolong_into(C, canv[level - 1], missing)
            elif missing.any():
                raise StructureError(f"level {level} canvas has uncovered cells")
            xc, yc = self._pad_coords(level)
            boundary.fill(C, self.bcs, g, xc, yc, t)
        self.canvases = canv
        return canv

    def _prolong_into(self, C, coarse, missing):
        g = NGHOST
        euler = isinstance(self.physics, Euler)
        if self.fast and (euler or self.physics is None):
            gamma = self.physics.gamma if euler else 1.4
            bad = _fast.prolong_into(C, coarse, missing, g, euler, gamma, POSITIVITY_EPS)
            if bad:
                raise PhysicsError(f"{bad} unphysical coarse cell means during prolongation")
            return
        fine = prolong(coarse[g - 1:coarse.shape[0] - g + 1, g - 1:coarse.shape[1] - g + 1],
                       self.physics)
        C[g:-g, g:-g][missing] = fine[missing]

    def padded(self, t=None):
        """Stacked padded leaves ``(nleaf, bx + 4, by + 4, K)`` from the canvases.

        With ``t`` given the canvases are rebuilt first.
        """
        if t is not None or not self.canvases:
            self.fill_canvases(0.0 if t is None else t)
        P = np.empty((len(self.leaves), self.bx + 2 * NGHOST, self.by + 2 * NGHOST, self.ncomp))
        reads = self._layout(max(self.levels_used))[3]
        for level, idx in self._by_level.items():
            r, c = reads[level]
            P[idx] = self.canvases[level][r, c]
        return P

    def fill_ghosts(self, t=0.0):
        return self.padded(t)

    def total(self):
        """Integral of every component over the domain."""
        out = np.zeros(self.ncomp)
        for level, idx in self._by_level.items():
            dx, dy = self.spacing(level)
            out += self.data[idx].sum(axis=(0, 1, 2)) * dx * dy
        return out

    def to_uniform(self, level=None, t=0.0):
        """The solution on the uniform grid of ``level`` (default: finest used)."""
        level = max(self.levels_used) if level is None else level
        canv = self.fill_canvases(t, upto=max(level, max(self.levels_used)))
        g = NGHOST
        return canv[level][g:-g, g:-g].copy()

    def set_from_function(self, fn):
        """Initialise every leaf with exact cell averages of ``fn(x, y)``."""
        from .problems import cell_averages
        for n, key in enumerate(self.leaves):
            self.data[n] = cell_averages(fn, self.block_grid(key))
        self.canvases = {}

    # regridding ----------------------------------------------------------
    def indicators(self, P=None):
        """Sensor values ``(nleaf, bx, by)`` on the first component."""
        if P is None:
            P = self.padded()
        dx = np.array([self.spacing(k[0])[0] for k in self.leaves])[:, None, None]
        dy = np.array([self.spacing(k[0])[1] for k in self.leaves])[:, None, None]
        return indicator_field(P[..., 0], dx, dy)

    def _neighbor_region(self, level, i, j):
        nbx, nby = self.nblocks(level)
        if self.bcs["xlo"] == "periodic":
            i %= nbx
        if self.bcs["ylo"] == "periodic":
            j %= nby
        if 0 <= i < nbx and 0 <= j < nby:
            return level, i, j
        return None

    def _covering_leaf(self, level, i, j, leafset):
        for lv in range(level, self.lmin - 1, -1):
            s = level - lv
            k = (lv, i >> s, j >> s)
            if k in leafset:
                return k
        return None

    def plan_refinement(self, delta):
        """Leaves to refine: flagged blocks plus the neighbours toward flagged quadrants."""
        flagged = set()
        hx, hy = self.bx // 2, self.by // 2
        for n, (level, i, j) in enumerate(self.leaves):
            hot = delta[n] > self.delta0
            if level >= self.lmax or not hot.any():
                continue
            flagged.add((level, i, j))
            q = [hot[:hx, :hy].any(), hot[:hx, hy:].any(), hot[hx:, :hy].any(), hot[hx:, hy:].any()]
            dirs = set()
            for (sx, sy), on in zip(((-1, -1), (-1, 1), (1, -1), (1, 1)), q):
                if on:
                    dirs.update({(sx, 0), (0, sy), (sx, sy)})
            for di, dj in dirs:
                reg = self._neighbor_region(level, i + di, j + dj)
                if reg is None:
                    continue
                leaf = self._covering_leaf(*reg, self._leafset)
                if leaf is not None and leaf[0] < self.lmax:
                    flagged.add(leaf)
        return flagged

    def _nest(self, leafset):
        """Refine coarse leaves until no two touching leaves differ by more than one level."""
        changed = True
        while changed:
            changed = False
            for level, i, j in sorted(leafset, reverse=True):
                if (level, i, j) not in leafset:
                    continue
                for di, dj in NEIGHBORS:
                    reg = self._neighbor_region(level, i + di, j + dj)
                    if reg is None:
                        continue
                    leaf = self._covering_leaf(*reg, leafset)
                    if leaf is not None and leaf[0] < level - 1:
                        leafset.discard(leaf)
                        leafset.update(_children(leaf))
                        changed = True
        return leafset

    def _nested_ok(self, leafset, key):
        level, i, j = key
        for di, dj in NEIGHBORS:
            reg = self._neighbor_region(level, i + di, j + dj)
            if reg is None:
                continue
            # a refined child of the neighbouring region holds leaves two levels finer
            for ch in _children(reg):
                if self._covering_leaf(*ch, leafset) is None:
                    return False
        return True

    def regrid(self, t=0.0):
        """Refine flagged blocks, restore nesting, merge quiet siblings.

        Returns True when the leaf set changed.  Conservation holds to
        round-off: new leaves take their cells from the level canvases.
        """
        P = self.padded(t)
        delta = self.indicators(P)
        leafset = set(self.leaves)
        for key in self.plan_refinement(delta):
            leafset.discard(key)
            leafset.update(_children(key))
        leafset = self._nest(leafset)
        # coarsening: all four children are leaves and quiet
        quiet = {k for n, k in enumerate(self.leaves) if np.all(delta[n] < self.delta0 / 4)}
        parents = {_parent(k) for k in quiet if k[0] > self.lmin}
        for par in sorted(parents, reverse=True):
            kids = _children(par)
            if all(k in quiet and k in leafset for k in kids):
                trial = (leafset - set(kids)) | {par}
                if self._nested_ok(trial, par):
                    leafset = trial
        if leafset == self._leafset:
            return False
        self._apply(sorted(leafset), t)
        return True

    def _apply(self, new_leaves, t):
        top = max(max(k[0] for k in new_leaves), max(self.levels_used))
        canv = self.fill_canvases(t, upto=top)
        g = NGHOST
        data = np.empty((len(new_leaves), self.bx, self.by, self.ncomp))
        for n, (level, i, j) in enumerate(new_leaves):
            data[n] = canv[level][g + i * self.bx:g + (i + 1) * self.bx,
                                  g + j * self.by:g + (j + 1) * self.by]
        self.leaves = list(new_leaves)
        self.data = data
        self.canvases = {}
        self._index()
        self.check()

    def initialize(self, fn, max_passes=None):
        """Exact averages of ``fn`` on an adapted hierarchy, refining until stable."""
        self.set_from_function(fn)
        for _ in range(max_passes or (self.lmax - self.lmin + 1)):
            if not self.regrid(0.0):
                break
            self.set_from_function(fn)

    def to_csv(self, path):
        """Forest structure: one row per leaf with level, origin and bounds."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["level", "i", "j", "x0", "x1", "y0", "y1"])
            for key in self.leaves:
                w.writerow([*key, *(f"{v:.17g}" for v in self.bounds(key))])


def _children(key):
    level, i, j = key
    return [(level + 1, 2 * i + a, 2 * j + b) for a in (0, 1) for b in (0, 1)]


def _parent(key):
    level, i, j = key
    return level - 1, i >> 1, j >> 1


# -- solver -----------------------------------------------------------------

class AmrSolver:
    """Semi-discrete operator and time step on an :class:`AmrForest`.

    A single global time step is used on all levels.  Fluxes at coarse/fine
    interfaces are not corrected, so conservation across level jumps is
    approximate.
    """

    def __init__(self, forest: AmrForest, kernel: str, physics, alpha=0.0, order_fix=True,
                 counter=None, backend="auto"):
        kn.slope(kernel, 0.0, 0.0, kn.SwitchParams(alpha, 1.0))
        self.forest = forest
        self.kernel = kernel
        self.physics = physics
        self.alpha = alpha
        self.order_fix = order_fix
        self.counter = counter
        probe = Operator2D(forest.grid(forest.lmin), kernel, physics, alpha, forest.bcs,
                           order_fix, backend=backend)
        self.backend = probe.backend
        self._tau_cache = (None, None)

    def _taus(self, axis):
        f = self.forest
        if self._tau_cache[0] != f.generation:
            self._tau_cache = (f.generation, [
                np.array([kn.SwitchParams(self.alpha, f.spacing(k[0])[ax]).tau for k in f.leaves])
                for ax in (0, 1)])
        return self._tau_cache[1][axis]

    def rhs(self, data, t=0.0):
        f = self.forest
        f.data = data
        P = f.padded(t)
        F = block_fluxes(P, 0, self.kernel, self.physics, self._taus(0), self.order_fix,
                         self.counter, backend=self.backend)
        G = block_fluxes(P, 1, self.kernel, self.physics, self._taus(1), self.order_fix,
                         self.counter, backend=self.backend)
        return -(F[:, 1:] - F[:, :-1]) * f._inv_dx - (G[:, :, 1:] - G[:, :, :-1]) * f._inv_dy

    __call__ = rhs

    def max_dt(self, data, cfl):
        f = self.forest
        rate = 0.0
        for level, idx in f._by_level.items():
            g = f.grid(level)
            u = data[idx]
            sx = self.physics.max_speed(u, 0)
            sy = self.physics.max_speed(u, 1)
            rate = max(rate, sx / g.gx.widths.min() + sy / g.gy.widths.min())
        if rate == 0:
            raise ZeroDivisionError("zero wave speed: time step is unbounded")
        return cfl / rate
