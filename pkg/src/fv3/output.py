"""Snapshot, forest and manifest writers.

Formats (all numbers written with 17 significant digits so reruns are
byte-identical):

* 1D CSV: header ``x,q0[,q1,...]``, one row per cell with its center and
  cell averages.
* 2D CSV: first line ``Nx,Ny``, then one row per cell in row-major order
  (cell ``(i, j)`` is row ``i*Ny + j``, ``i`` along x), holding the cell's
  components separated by commas.
* 2D binary (``.fv3``), little endian::

      offset  size          content
      0       4             magic b"FV3G"
      4       4             uint32 format version (1)
      8       4             uint32 Nx
      12      4             uint32 Ny
      16      4             uint32 K, components per cell
      20      8*(Nx+1)      float64 x cell boundaries
      ...     8*(Ny+1)      float64 y cell boundaries
      ...     8*Nx*Ny*K     float64 cell averages, C order (i, j, k)

* AMR: one 2D CSV per leaf block ``blocks/L<level>_<i>_<j>.csv`` plus the
  forest index ``forest.csv`` (level, i, j and block bounds).
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"FV3G"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def _fmt_rows(rows):
    return "".join(",".join(f"{v:.17g}" for v in r) + "\n" for r in rows)


def write_csv_1d(path, grid, u):
    u = np.asarray(u).reshape(grid.n, -1)
    head = "x," + ",".join(f"q{k}" for k in range(u.shape[1])) + "\n"
    Path(path).write_text(head + _fmt_rows(np.column_stack([grid.centers, u])))


def write_csv_2d(path, u):
    u = np.asarray(u)
    nx, ny = u.shape[:2]
    Path(path).write_text(f"{nx},{ny}\n" + _fmt_rows(u.reshape(nx * ny, -1)))


def read_csv_2d(path):
    with open(path) as fh:
        nx, ny = map(int, fh.readline().split(","))
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data.reshape(nx, ny, -1)


def write_binary_2d(path, grid, u):
    u = np.ascontiguousarray(u, dtype="<f8")
    nx, ny = u.shape[:2]
    u = u.reshape(nx, ny, -1)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, nx, ny, u.shape[2]))
        fh.write(np.asarray(grid.gx.boundaries, dtype="<f8").tobytes())
        fh.write(np.asarray(grid.gy.boundaries, dtype="<f8").tobytes())
        fh.write(u.tobytes())


def read_binary_2d(path):
    """Returns ``(x_boundaries, y_boundaries, values)``."""
    raw = Path(path).read_bytes()
    magic, ver, nx, ny, k = _HEADER.unpack_from(raw)
    if magic != MAGIC or ver != VERSION:
        raise ValueError(f"{path}: not a version-{VERSION} fv3 grid dump")
    off = _HEADER.size
    xb = np.frombuffer(raw, "<f8", nx + 1, off)
    off += 8 * (nx + 1)
    yb = np.frombuffer(raw, "<f8", ny + 1, off)
    off += 8 * (ny + 1)
    return xb, yb, np.frombuffer(raw, "<f8", nx * ny * k, off).reshape(nx, ny, k)


def write_forest(directory, forest):
    d = Path(directory)
    (d / "blocks").mkdir(parents=True, exist_ok=True)
    forest.to_csv(d / "forest.csv")
    for key, block in zip(forest.leaves, forest.data):
        write_csv_2d(d / "blocks" / "L{}_{}_{}.csv".format(*key), block)


def write_snapshot(directory, stem, result, fmt="csv"):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    if result.forest is not None:
        write_forest(d / stem, result.forest)
        return d / stem
    if result.scenario.ndim == 1:
        path = d / f"{stem}.csv"
        write_csv_1d(path, result.grid, result.values)
    elif fmt == "binary":
        path = d / f"{stem}.fv3"
        write_binary_2d(path, result.grid, result.values)
    else:
        path = d / f"{stem}.csv"
        write_csv_2d(path, result.values)
    return path


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (tuple, set, np.ndarray)):
        return list(o)
    return str(o)


GNUPLOT = """\
set logscale xy
set xlabel "N"
set ylabel "error"
set key bottom left
set terminal pngcairo size 800,600
set output "{stem}.png"
plot "{stem}.dat" using 1:2 with linespoints title "L1", \\
     "{stem}.dat" using 1:3 with linespoints title "Linf"
"""


def write_report(directory, report, stem="convergence"):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    report.to_csv(d / f"{stem}.csv")
    report.to_gnuplot(d / f"{stem}.dat")
    (d / f"{stem}.gp").write_text(GNUPLOT.format(stem=stem))
