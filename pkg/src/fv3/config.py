"""Run configuration files.

The format is ``key = value`` lines grouped under ``[section]`` headers;
``#`` and ``;`` start comments.  Every error names the offending line.

Example::

    [run]
    scenario = double_mach
    kernel = h3lc

    [grid]
    type = amr
    block = 36x12
    levels = 3..7
    delta0 = 2000
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .kernels import KERNELS
from .problems import SCENARIOS

GRID_TYPES = ("uniform", "perturbed", "random", "nonuniform", "amr")
ONE_D = ("advection_1d",)


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


@dataclass
class GridSpec:
    type: str = "uniform"
    n: list = field(default_factory=lambda: [64])
    c1: float | None = None
    c2: float = 5.0
    seed: int = 1
    amplitude: float = 0.25
    dx: float = 0.1
    cx: float = 2.0
    dy: float = 0.1
    cy: float = 1.0
    block: tuple = (16, 16)
    levels: tuple = (0, 2)
    delta0: float = math.inf
    regrid_every: int = 4


@dataclass
class RunConfig:
    scenario: str
    kernel: str = "h3lc"
    grid: GridSpec = field(default_factory=GridSpec)
    cfl: float | None = None
    t_end: float | None = None
    alpha: float | None = None
    order_fix: bool = True
    speed: tuple = (1.0, 0.0)
    vortex_exponent: str = "standard"
    neq_form: str = "scaled"
    backend: str = "auto"
    out_dir: str = "out"
    every: int = 0
    fmt: str = "csv"
    source: str | None = None

    def to_dict(self):
        d = asdict(self)
        d["grid"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d["grid"].items()}
        return d

    @property
    def ndim(self):
        return 1 if self.scenario in ONE_D else 2


# -- value parsers ----------------------------------------------------------

def _float(s):
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"malformed number {s!r}") from None


def _pos_float(s):
    v = _float(s)
    if not v > 0:
        raise ValueError(f"expected a positive number, got {s}")
    return v


def _int(s):
    try:
        return int(s)
    except ValueError:
        raise ValueError(f"malformed integer {s!r}") from None


def _pos_int(s):
    v = _int(s)
    if v <= 0:
        raise ValueError(f"expected a positive integer, got {s}")
    return v


def _bool(s):
    low = s.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {s!r}")


def _choice(options):
    def parse(s):
        if s not in options:
            raise ValueError(f"unknown value {s!r}; valid: {', '.join(options)}")
        return s
    return parse


def _kernel(s):
    if s not in KERNELS:
        raise ValueError(f"unknown kernel {s!r}; valid kernels: {', '.join(KERNELS)}")
    return s


def _scenario(s):
    if s not in SCENARIOS:
        raise ValueError(f"unknown scenario {s!r}; valid scenarios: {', '.join(SCENARIOS)}")
    return s


def _dims(s):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", s)
    if not m:
        raise ValueError(f"expected WIDTHxHEIGHT, got {s!r}")
    return int(m.group(1)), int(m.group(2))


def _levels(s):
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", s)
    if not m:
        raise ValueError(f"expected MIN..MAX, got {s!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise ValueError(f"level range {s!r} is empty")
    return lo, hi


def _sizes(s):
    out = []
    for part in s.split(","):
        part = part.strip()
        if "x" in part.lower():
            out.append(_dims(part))
        else:
            out.append(_pos_int(part))
    if not out:
        raise ValueError("empty grid size list")
    return out


def _pair(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {s!r}")
    return _float(parts[0]), _float(parts[1])


def _delta0(s):
    return math.inf if s.lower() in ("inf", "infinity", "never") else _pos_float(s)


# section -> key -> (attribute path, parser)
SCHEMA = {
    "run": {
        "scenario": ("scenario", _scenario),
        "kernel": ("kernel", _kernel),
        "cfl": ("cfl", _pos_float),
        "t_end": ("t_end", _pos_float),
        "alpha": ("alpha", _float),
        "order_fix": ("order_fix", _bool),
        "neq_form": ("neq_form", _choice(("scaled", "literal"))),
        "backend": ("backend", _choice(("auto", "numpy", "numba"))),
    },
    "scenario": {
        "speed": ("speed", _pair),
        "vortex_exponent": ("vortex_exponent", _choice(("standard", "verbatim"))),
    },
    "grid": {
        "type": ("grid.type", _choice(GRID_TYPES)),
        "n": ("grid.n", _sizes),
        "c1": ("grid.c1", _float),
        "c2": ("grid.c2", _float),
        "seed": ("grid.seed", _int),
        "amplitude": ("grid.amplitude", _float),
        "dx": ("grid.dx", _float),
        "cx": ("grid.cx", _float),
        "dy": ("grid.dy", _float),
        "cy": ("grid.cy", _float),
        "block": ("grid.block", _dims),
        "levels": ("grid.levels", _levels),
        "delta0": ("grid.delta0", _delta0),
        "regrid_every": ("grid.regrid_every", _pos_int),
    },
    "output": {
        "dir": ("out_dir", str),
        "every": ("every", _int),
        "format": ("fmt", _choice(("csv", "binary"))),
    },
}


def parse_config(text: str, source: str | None = None) -> RunConfig:
    """Parse and validate configuration text; raise :class:`ConfigError` on the first problem."""
    values = {}
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"[#;]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", line)
        if m:
            section = m.group(1).lower()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]; valid: "
                                  + ", ".join(f"[{s}]" for s in SCHEMA), lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, _, val = (p.strip() for p in line.partition("="))
        key = key.lower()
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]; valid: "
                              + ", ".join(SCHEMA[section]), lineno)
        attr, parse = SCHEMA[section][key]
        if attr in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[attr]})", lineno)
        if not val:
            raise ConfigError(f"missing value for {key!r}", lineno)
        try:
            values[attr] = parse(val)
        except ValueError as exc:
            raise ConfigError(str(exc), lineno) from None
        lines[attr] = lineno

    if "scenario" not in values:
        raise ConfigError("missing required key 'scenario' in [run]")
    grid = GridSpec()
    cfg = RunConfig(scenario=values["scenario"], grid=grid, source=source)
    for attr, v in values.items():
        if attr.startswith("grid."):
            setattr(grid, attr[5:], v)
        else:
            setattr(cfg, attr, v)
    _validate(cfg, lines)
    return cfg


def _validate(cfg: RunConfig, lines):
    g = cfg.grid
    where = lines.get("grid.type")
    if cfg.ndim == 1 and g.type in ("nonuniform", "amr"):
        raise ConfigError(f"grid type {g.type!r} needs a 2D scenario", where)
    if cfg.ndim == 2 and g.type in ("perturbed", "random"):
        raise ConfigError(f"grid type {g.type!r} is one-dimensional", where)
    if cfg.ndim == 1 and any(isinstance(n, tuple) for n in g.n):
        raise ConfigError("1D grids take a single cell count", lines.get("grid.n"))
    if cfg.cfl is not None and cfg.cfl > 1:
        raise ConfigError(f"cfl must lie in (0, 1], got {cfg.cfl}", lines.get("cfl"))
    if g.type == "random" and not 0 <= g.amplitude < 0.5:
        raise ConfigError("random grid amplitude must lie in [0, 0.5)", lines.get("grid.amplitude"))
    if g.type == "amr":
        bx, by = g.block
        if bx < 4 or by < 4 or bx % 2 or by % 2:
            raise ConfigError(f"block dimensions must be even and at least 4, got {bx}x{by}",
                              lines.get("grid.block"))
    amr_keys = ("grid.block", "grid.levels", "grid.delta0", "grid.regrid_every")
    for k in amr_keys:
        if k in lines and g.type != "amr":
            raise ConfigError(f"{k[5:]!r} only applies to grid type 'amr'", lines[k])
    if cfg.alpha is not None and cfg.alpha < 0:
        raise ConfigError("alpha must be non-negative", lines.get("alpha"))
    if cfg.every < 0:
        raise ConfigError("output cadence must be >= 0", lines.get("every"))
    if "speed" in lines and cfg.scenario != "advection_2d":
        raise ConfigError("'speed' only applies to advection_2d", lines["speed"])
    if "vortex_exponent" in lines and cfg.scenario != "vortex":
        raise ConfigError("'vortex_exponent' only applies to vortex", lines["vortex_exponent"])


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{p}: not valid UTF-8 ({exc.reason})") from None
    try:
        return parse_config(text, source=str(p))
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from None
