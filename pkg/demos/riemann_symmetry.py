"""Four-shock Riemann problem: positivity and diagonal symmetry.

Run:  python demos/riemann_symmetry.py [N]
"""
import sys

import numpy as np

from fv3.config import parse_config
from fv3.runner import simulate

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
cfg = parse_config(f"[run]\nscenario = riemann_2d\n[grid]\nn = {n}\n")
res = simulate(cfg)
q = res.values
w = res.scenario.physics.to_primitive(q)
mirror = q.transpose(1, 0, 2)[..., [0, 2, 1, 3]]

print(f"{n}x{n}: t={res.t:.3f} after {res.steps} steps ({res.wall:.1f}s)")
print(f"min density {w[..., 0].min():.4f}, min pressure {w[..., 3].min():.4f}")
print(f"max |q(x,y) - swap(q(y,x))| = {np.max(np.abs(q - mirror)):.2e}")
print(f"limiter branches: h3 {res.counter.h3}, h3l {res.counter.h3l}")

# a coarse text picture of the density
rows = w[::max(1, n // 32), ::max(1, n // 32), 0].T[::-1]
shades = " .:-=+*#%@"
lo, hi = rows.min(), rows.max()
for r in rows:
    print("".join(shades[int((v - lo) / (hi - lo + 1e-12) * (len(shades) - 1))] for v in r))
