"""Why the transverse 1/24 corrections matter, and when they do not.

Measures the error of one right-hand-side evaluation against the exact time
derivative of the cell averages, with and without the corrections.

Run:  python demos/order_fix.py
"""
import numpy as np

from fv3 import mesh, problems
from fv3.scheme2d import Operator2D


def rhs_error(sc, n, order_fix, dudt):
    g = mesh.build_uniform_2d(sc.domain, n, n)
    u = problems.cell_averages(sc.initial, g)
    r = Operator2D(g, "h3", sc.physics, sc.alpha, "periodic", order_fix)(u)
    return np.einsum("ij,ijk->k", g.areas, np.abs(r - problems.cell_averages(dudt, g)))


def show(title, sc, dudt, sizes, comp):
    print(title)
    for fix in (True, False):
        e = np.array([rhs_error(sc, n, fix, dudt)[comp] for n in sizes])
        orders = np.log2(e[:-1] / e[1:])
        print(f"  order_fix={'on ' if fix else 'off'}  errors {' '.join(f'{v:.3e}' for v in e)}"
              f"   orders {' '.join(f'{o:.2f}' for o in orders)}")


adv = problems.advection_2d(1.0, 1.0)
show("linear advection (flux is linear, the corrections cancel):", adv,
     lambda x, y: (-0.5 * np.pi * np.sin(np.pi * (x + y)))[..., None], [16, 32, 64, 128], 0)

vx = problems.vortex()
h = 1e-5


def vortex_dudt(x, y):
    w = vx.initial
    return -(w(x + h, y) - w(x - h, y) + w(x, y + h) - w(x, y - h)) / (2 * h)


show("\nisentropic vortex, x-momentum (nonlinear flux):", vx, vortex_dudt, [64, 128, 256, 512], 1)
