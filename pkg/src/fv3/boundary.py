"""Ghost-cell filling for cell-centred 2D arrays.

A padded array has shape ``(nx + 2*ng, ny + 2*ng, K)``.  Sides are named
``xlo, xhi, ylo, yhi`` and each takes a rule: ``"periodic"``,
``"outflow"`` (zero gradient), ``"reflect"`` (mirror, normal momentum
negated for Euler states) or a callable
``rule(P, side, ng, xc, yc, t)`` that writes the ghost slab of its side.
``xc``/``yc`` are padded cell-center coordinates.  x sides are filled first
on interior rows, then y sides over the full width, which fills corners.
"""
from __future__ import annotations

import numpy as np

SIDES = ("xlo", "xhi", "ylo", "yhi")
RULES = ("periodic", "outflow", "reflect")


def side_slices(side: str, ng: int):
    """Index tuples ``(ghost, mirror_source)`` for the given side."""
    axis = 0 if side[0] == "x" else 1
    if side.endswith("lo"):
        ghost = slice(0, ng)
        src = slice(2 * ng - 1, ng - 1, -1)
    else:
        ghost = slice(-ng, None)
        src = slice(-ng - 1, -2 * ng - 1, -1)
    return axis, ghost, src


def _index(axis, s, rows):
    return (s, rows) if axis == 0 else (rows, s)


def fill_side(P, side, rule, ng, xc=None, yc=None, t=0.0):
    axis, ghost, mirror = side_slices(side, ng)
    rows = slice(ng, -ng) if axis == 0 else slice(None)
    if callable(rule):
        rule(P, side, ng, xc, yc, t)
        return
    if rule == "periodic":
        src = slice(-2 * ng, -ng) if side.endswith("lo") else slice(ng, 2 * ng)
        P[_index(axis, ghost, rows)] = P[_index(axis, src, rows)]
    elif rule == "outflow":
        edge = slice(ng, ng + 1) if side.endswith("lo") else slice(-ng - 1, -ng)
        P[_index(axis, ghost, rows)] = P[_index(axis, edge, rows)]
    elif rule == "reflect":
        P[_index(axis, ghost, rows)] = P[_index(axis, mirror, rows)]
        if P.shape[-1] == 4:
            P[_index(axis, ghost, rows) + (1 + axis,)] *= -1.0
    else:
        raise ValueError(f"unknown boundary rule {rule!r}")


def fill(P, bcs: dict, ng: int, xc=None, yc=None, t=0.0):
    for side in SIDES:
        fill_side(P, side, bcs[side], ng, xc, yc, t)
    return P


def pad_coords(b, ng):
    """Cell centers of an axis extended by ``ng`` mirrored ghost cells per side."""
    b = np.asarray(b, dtype=float)
    w = np.diff(b)
    lo = b[0] - np.cumsum(w[:ng])[::-1]
    hi = b[-1] + np.cumsum(w[::-1][:ng])
    bb = np.concatenate([lo, b, hi])
    return 0.5 * (bb[:-1] + bb[1:])


def normalize(bcs) -> dict:
    """Accept a single rule, or a mapping with keys ``x``/``y``/sides."""
    if isinstance(bcs, str) or callable(bcs):
        bcs = {s: bcs for s in SIDES}
    out = {}
    for s in SIDES:
        if s in bcs:
            out[s] = bcs[s]
        elif s[0] in bcs:
            out[s] = bcs[s[0]]
        else:
            raise ValueError(f"no boundary rule for side {s}")
        if not callable(out[s]) and out[s] not in RULES:
            raise ValueError(f"unknown boundary rule {out[s]!r} for side {s}")
    if (out["xlo"] == "periodic") != (out["xhi"] == "periodic") or \
            (out["ylo"] == "periodic") != (out["yhi"] == "periodic"):
        raise ValueError("periodic boundaries must be paired")
    return out
