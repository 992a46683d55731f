"""Run orchestration: scenario + grid + operator + time loop + error norms."""
from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels as kn
from . import mesh, problems
from .amr import AmrForest, AmrSolver
from .analysis import ErrorReport, convergence_ladder, l1_error, linf_error
from .config import RunConfig
from .physics import Euler, PhysicsError
from .scheme1d import Operator1D
from .scheme2d import Operator2D
from .timeint import integrate

log = logging.getLogger(__name__)

# how each scenario's error is measured: state component and domain normalisation
ERROR_NORMS = {
    "vortex": {"component": 0, "normalize": True},
}


class RunFailure(RuntimeError):
    def __init__(self, msg, t, step, where=None):
        super().__init__(msg)
        self.t = t
        self.step = step
        self.where = where


@dataclass
class RunResult:
    scenario: problems.Scenario
    n: object
    values: np.ndarray
    t: float
    steps: int
    wall: float
    grid: object = None                 # Grid1D / Grid2D, or None for AMR
    forest: AmrForest | None = None
    counter: kn.BranchCounter = field(default_factory=kn.BranchCounter)
    regrids: int = 0
    failure: RunFailure | None = None
    l1: float | None = None
    linf: float | None = None

    @property
    def ok(self):
        return self.failure is None


def scenario_for(cfg: RunConfig) -> problems.Scenario:
    kw = {}
    if cfg.scenario == "advection_2d":
        kw = {"a": cfg.speed[0], "b": cfg.speed[1]}
    elif cfg.scenario == "vortex":
        kw = {"exponent": cfg.vortex_exponent}
    sc = problems.get(cfg.scenario, **kw)
    over = {k: v for k, v in (("cfl", cfg.cfl), ("t_end", cfg.t_end), ("alpha", cfg.alpha))
            if v is not None}
    return dataclasses.replace(sc, **over) if over else sc


def _cells(sc, n):
    """(nx, ny) for a 2D size entry; a bare N keeps the domain's aspect ratio."""
    if isinstance(n, tuple):
        return n
    (x0, x1), (y0, y1) = sc.domain
    return n, max(1, int(round(n * (y1 - y0) / (x1 - x0))))


def build_grid(cfg: RunConfig, sc, n):
    g = cfg.grid
    if sc.ndim == 1:
        if g.type == "uniform":
            return mesh.build_uniform_1d(sc.domain, n)
        if g.type == "perturbed":
            c1 = g.c1 if g.c1 is not None else 1.0 / (10.0 * g.c2)
            return mesh.build_perturbed_1d(sc.domain, n, c1, g.c2)
        if g.type == "random":
            return mesh.build_random_1d(sc.domain, n, g.amplitude, g.seed)
    else:
        nx, ny = _cells(sc, n)
        if g.type == "uniform":
            return mesh.build_uniform_2d(sc.domain, nx, ny)
        if g.type == "nonuniform":
            return mesh.build_nonuniform_2d(sc.domain, nx, ny, g.dx, g.cx, g.dy, g.cy)
    raise ValueError(f"grid type {g.type!r} does not fit scenario {sc.name!r}")


def _check_state(sc, u, t, step):
    if isinstance(sc.physics, Euler):
        try:
            sc.physics.check(u)
        except PhysicsError as exc:
            raise RunFailure(f"t={t:.6g}, step {step}: {exc}", t, step, exc.where) from None
    elif not np.all(np.isfinite(u)):
        raise RunFailure(f"t={t:.6g}, step {step}: non-finite values", t, step)


def simulate(cfg: RunConfig, n=None, on_step=None) -> RunResult:
    """Run one configuration on resolution ``n`` (default: first entry of ``grid.n``).

    ``on_step(result_so_far, u, t, step)`` is called after every step.  Solver
    failures are caught and stored in ``result.failure`` with the last good
    state in ``result.values``.
    """
    sc = scenario_for(cfg)
    n = cfg.grid.n[0] if n is None else n
    counter = kn.BranchCounter()
    # 2D operators take the stage time for time-dependent boundaries
    timed = sc.ndim == 2
    res = RunResult(sc, n, None, 0.0, 0, 0.0, counter=counter)

    if cfg.grid.type == "amr":
        g = cfg.grid
        K = 4 if isinstance(sc.physics, Euler) else 1
        forest = AmrForest(sc.domain, g.block, g.levels, g.delta0, K, sc.bcs,
                           physics=sc.physics if K == 4 else None)
        forest.initialize(sc.initial)
        op = AmrSolver(forest, cfg.kernel, sc.physics, sc.alpha, cfg.order_fix, counter,
                       cfg.backend)
        res.forest = forest
        u0 = forest.data

        def dt_fn(u, t):
            return op.max_dt(u, sc.cfl)
    else:
        grid = build_grid(cfg, sc, n)
        res.grid = grid
        u0 = problems.cell_averages(sc.initial, grid)
        if sc.ndim == 1:
            op = Operator1D(grid, cfg.kernel, sc.physics, sc.alpha, sc.bcs, cfg.neq_form, counter)
            dt_fn = lambda u, t: op.max_dt(u, sc.cfl)
        else:
            op = Operator2D(grid, cfg.kernel, sc.physics, sc.alpha, sc.bcs, cfg.order_fix,
                            counter, cfg.neq_form, cfg.backend)
            dt_fn = lambda u, t: op.max_dt(u, sc.cfl)
        forest = None

    state = {"u": u0, "t": 0.0, "step": 0}

    def callback(u, t, step):
        _check_state(sc, u, t, step)
        out = None
        if forest is not None:
            forest.data = u
            if step % cfg.grid.regrid_every == 0 and forest.regrid(t):
                res.regrids += 1
                out = forest.data
        state.update(u=u if out is None else out, t=t, step=step)
        if on_step is not None:
            on_step(res, state["u"], t, step)
        return out

    t0 = time.perf_counter()
    try:
        _check_state(sc, u0, 0.0, 0)
        integrate(u0, 0.0, sc.t_end, op, dt_fn, callback, timed=timed)
    except RunFailure as exc:
        res.failure = exc
    except PhysicsError as exc:
        res.failure = RunFailure(f"t={state['t']:.6g}, step {state['step'] + 1}: {exc}",
                                 state["t"], state["step"] + 1, exc.where)
    res.wall = time.perf_counter() - t0
    res.values, res.t, res.steps = state["u"], state["t"], state["step"]
    if forest is not None:
        forest.data = res.values
    if res.ok and sc.exact is not None and res.grid is not None:
        res.l1, res.linf = errors(sc, res.values, res.grid, res.t)
    return res


def errors(sc, u, grid, t):
    """(L1, Linf) against the cell-averaged exact solution at time ``t``."""
    kw = ERROR_NORMS.get(sc.name, {})
    ex = problems.cell_averages(sc.exact, grid, t=t)
    comp = kw.get("component")
    return (l1_error(u, ex, grid, comp, kw.get("normalize", False)),
            linf_error(u, ex, comp))


def convergence(cfg: RunConfig, grids=None) -> ErrorReport:
    """Error ladder over ``grids`` (default: all entries of ``grid.n``)."""
    sc = scenario_for(cfg)
    if sc.exact is None:
        raise ValueError(f"scenario {sc.name!r} has no exact solution")
    if cfg.grid.type == "amr":
        raise ValueError("convergence ladders need a fixed grid type")

    def run(n):
        r = simulate(cfg, n)
        if r.failure is not None:
            raise r.failure
        log.info("N=%s: L1=%.4e Linf=%.4e (%d steps, %.1fs)", n, r.l1, r.linf, r.steps, r.wall)
        return r.l1, r.linf

    return convergence_ladder(run, cfg.grid.n if grids is None else grids)
