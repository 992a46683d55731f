"""Error norms, empirical orders of convergence and convergence ladders."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

UNDEFINED = float("nan")


def _weights(grid):
    return grid.areas if hasattr(grid, "gx") else grid.widths


def _diff(numeric, exact, component):
    d = np.asarray(numeric, dtype=float) - np.asarray(exact, dtype=float)
    if component is not None:
        d = d[..., component]
    return np.abs(d)


def l1_error(numeric, exact, grid, component=None, normalize: bool = False) -> float:
    """``sum(|cell| * |numeric - exact|)``; divided by the domain size if ``normalize``.

    ``numeric`` and ``exact`` hold one value (or state vector) per cell;
    ``component`` picks one entry of the state vector.
    """
    w = _weights(grid)
    d = _diff(numeric, exact, component)
    # trailing component axes are summed as well
    e = float(np.sum(w.reshape(w.shape + (1,) * (d.ndim - w.ndim)) * d))
    if normalize:
        e /= float(np.sum(w))
    return e


def linf_error(numeric, exact, component=None) -> float:
    return float(np.max(_diff(numeric, exact, component)))


def eoc(err_a: float, err_b: float, n_a: float, n_b: float) -> float:
    """Order from errors ``err_a`` on ``n_a`` cells and ``err_b`` on ``n_b`` cells.

    Returns :data:`UNDEFINED` (nan) when either error is not positive.
    """
    if not (err_a > 0 and err_b > 0) or n_a == n_b:
        return UNDEFINED
    return math.log(err_b / err_a) / math.log(n_a / n_b)


@dataclass
class Row:
    n: object               # N, or (Nx, Ny)
    l1: float
    linf: float
    eoc1: float = UNDEFINED
    eocinf: float = UNDEFINED
    error: str | None = None

    @property
    def label(self) -> str:
        return f"{self.n[0]}x{self.n[1]}" if isinstance(self.n, tuple) else str(self.n)

    @property
    def resolution(self) -> float:
        return float(self.n[0]) if isinstance(self.n, tuple) else float(self.n)


@dataclass
class ErrorReport:
    rows: list = field(default_factory=list)

    def add(self, n, l1, linf, error=None):
        row = Row(n, l1, linf, error=error)
        prev = next((r for r in reversed(self.rows) if r.error is None), None)
        if prev is not None and error is None:
            row.eoc1 = eoc(prev.l1, l1, prev.resolution, row.resolution)
            row.eocinf = eoc(prev.linf, linf, prev.resolution, row.resolution)
        self.rows.append(row)
        return row

    @property
    def l1(self):
        return [r.l1 for r in self.rows]

    @property
    def eoc1(self):
        return [r.eoc1 for r in self.rows]

    @property
    def eocinf(self):
        return [r.eocinf for r in self.rows]

    def to_csv(self, path=None) -> str:
        """``N,L1,EOC1,Linf,EOCinf``; undefined orders are left empty."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "L1", "EOC1", "Linf", "EOCinf"])
        for r in self.rows:
            w.writerow([r.label, _fmt(r.l1), _fmt(r.eoc1, ".4f"), _fmt(r.linf), _fmt(r.eocinf, ".4f")])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_gnuplot(self, path=None) -> str:
        """Whitespace-separated ``N L1 Linf`` columns for a log-log plot."""
        lines = ["# N L1 Linf"]
        lines += [f"{r.resolution:g} {_fmt(r.l1)} {_fmt(r.linf)}" for r in self.rows if r.error is None]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def __str__(self):
        out = [f"{'N':>9} {'L1':>11} {'EOC':>6} {'Linf':>11} {'EOC':>6}"]
        for r in self.rows:
            if r.error:
                out.append(f"{r.label:>9}  failed: {r.error}")
            else:
                out.append(f"{r.label:>9} {r.l1:11.3e} {r.eoc1:6.2f} {r.linf:11.3e} {r.eocinf:6.2f}")
        return "\n".join(out)


def _fmt(x, spec=".6e"):
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, spec)


def convergence_ladder(run, grids) -> ErrorReport:
    """Call ``run(n) -> (l1, linf)`` for every resolution and tabulate the orders.

    A failing rung is recorded with its error message and the ladder goes on.
    """
    grids = list(grids)
    if len(grids) < 2:
        raise ValueError("a convergence ladder needs at least two grids")
    report = ErrorReport()
    for n in grids:
        try:
            l1, linf = run(n)
        except Exception as exc:  # keep the rest of the ladder
            log.warning("rung %s failed: %s", n, exc)
            report.add(n, UNDEFINED, UNDEFINED, error=str(exc))
            continue
        report.add(n, l1, linf)
    return report
