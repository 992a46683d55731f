"""Command line entry point ``fv3``.

    fv3 run <cfg> [--out DIR]
    fv3 convergence <cfg> [--out DIR]
    fv3 validate-config <cfg>

``FV3_THREADS`` caps the number of compiled-kernel worker threads.
Exit status: 0 on success, 1 on a solver failure, 2 on a bad configuration.
"""
from __future__ import annotations

import argparse
import logging
import math
import platform
import sys
import time
from pathlib import Path

from . import output, runner
from .analysis import ErrorReport
from .config import ConfigError, load_config

log = logging.getLogger("fv3")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _threads():
    try:
        from . import _fast
    except ImportError:
        return None
    return _fast.set_threads()


def _num(x):
    # JSON has no infinities
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def _manifest(cfg, res, threads):
    sc = res.scenario
    m = {
        "config": {k: (_num(v) if not isinstance(v, dict) else {kk: _num(vv) for kk, vv in v.items()})
                   for k, v in cfg.to_dict().items()},
        "resolved": {"scenario": sc.name, "cfl": sc.cfl, "t_end": sc.t_end, "alpha": sc.alpha,
                     "resolution": res.n, "params": sc.params},
        "status": "ok" if res.ok else "failed",
        "t_final": res.t,
        "steps": res.steps,
        "wall_time_s": round(res.wall, 3),
        "branch_counts": {"h3": res.counter.h3, "h3l": res.counter.h3l},
        "threads": threads,
        "python": platform.python_version(),
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if res.forest is not None:
        m["amr"] = {"leaves": len(res.forest.leaves), "levels_used": res.forest.levels_used,
                    "regrids": res.regrids}
    if res.failure is not None:
        m["failure"] = {"message": str(res.failure), "t": res.failure.t,
                        "step": res.failure.step, "cell": res.failure.where}
    if res.l1 is not None:
        m["errors"] = {"L1": res.l1, "Linf": res.linf}
    return m


def cmd_run(args):
    cfg = load_config(args.config)
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = _threads()

    def on_step(res, u, t, step):
        if cfg.every and step % cfg.every == 0:
            res.values, res.t = u, t
            output.write_snapshot(out, f"snap_{step:06d}", res, cfg.fmt)

    res = runner.simulate(cfg, on_step=on_step)
    output.write_snapshot(out, "final", res, cfg.fmt)
    if res.l1 is not None:
        report = ErrorReport()
        report.add(res.n, res.l1, res.linf)
        report.to_csv(out / "errors.csv")
    output.write_manifest(out / "manifest.json", _manifest(cfg, res, threads))
    if not res.ok:
        print(f"run failed: {res.failure}", file=sys.stderr)
        return EXIT_FAILED
    msg = f"{res.scenario.name}: t={res.t:.6g} after {res.steps} steps in {res.wall:.1f}s"
    if res.l1 is not None:
        msg += f", L1={res.l1:.4e}, Linf={res.linf:.4e}"
    print(msg)
    print(f"output written to {out}")
    return EXIT_OK


def cmd_convergence(args):
    cfg = load_config(args.config)
    out = Path(args.out or cfg.out_dir)
    _threads()
    report = runner.convergence(cfg)
    output.write_report(out, report)
    print(report)
    print(f"report written to {out / 'convergence.csv'}")
    return EXIT_FAILED if any(r.error for r in report.rows) else EXIT_OK


def cmd_validate(args):
    cfg = load_config(args.config)
    print(f"{args.config}: ok ({cfg.scenario}, kernel {cfg.kernel}, grid {cfg.grid.type})")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="fv3", description="Third-order finite volume solver.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one simulation")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides [output] dir)")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("convergence", help="run the grid ladder and tabulate orders")
    c.add_argument("config")
    c.add_argument("--out", help="output directory (overrides [output] dir)")
    c.set_defaults(func=cmd_convergence)
    v = sub.add_parser("validate-config", help="parse and check a configuration")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
