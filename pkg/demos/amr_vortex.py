"""Short adaptive run of the isentropic vortex, with the block layout.

Writes the forest index to out/demo_amr/forest.csv (level, i, j, bounds);
plot it with any tool that draws rectangles.

Run:  python demos/amr_vortex.py
"""
from pathlib import Path

from fv3.config import parse_config
from fv3.output import write_forest
from fv3.runner import simulate

cfg = parse_config("""
[run]
scenario = vortex
t_end = 1.0

[grid]
type = amr
block = 16x16
levels = 1..3
delta0 = 0.1
""")

def progress(res, u, t, step):
    if step % 20 == 0:
        f = res.forest
        levels = {l: sum(1 for k in f.leaves if k[0] == l) for l in f.levels_used}
        print(f"step {step:4d}  t={t:.3f}  leaves per level {levels}")


res = simulate(cfg, on_step=progress)
f = res.forest
print(f"\nfinished: {res.steps} steps, {res.regrids} regrids, {len(f.leaves)} leaves, "
      f"{res.wall:.1f}s")
print("nesting violations:", len(f.nesting_violations()))
rho = f.to_uniform()[..., 0]
print(f"density range on the finest canvas: {rho.min():.4f} .. {rho.max():.4f}")

out = Path("out/demo_amr")
write_forest(out, f)
print(f"forest written to {out}/forest.csv")
