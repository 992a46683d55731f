import numpy as np
import pytest
from hypothesis import given, strategies as st

from fv3 import mesh
from fv3.physics import Advection, Euler
from fv3.timeint import (StepControl, UnboundedTimestep, compute_dt, dt_2d, integrate,
                         ssp_rk3_step)


def test_zero_rhs():
    u = np.array([1.0, 2.0])
    np.testing.assert_array_equal(ssp_rk3_step(u, 0.3, lambda v: 0 * v), u)


def test_scalar_decay():
    assert ssp_rk3_step(1.0, 0.1, lambda v: -v) == pytest.approx(0.9048333333333333, abs=1e-15)
    # third-order Taylor polynomial of exp(-0.1)
    assert ssp_rk3_step(1.0, 0.1, lambda v: -v) == pytest.approx(1 - 0.1 + 0.005 - 0.1**3 / 6, rel=1e-15)


@given(seed=st.integers(0, 1000), dt=st.floats(1e-3, 1.0))
def test_linear_step_is_cubic_taylor(seed, dt):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(4, 4))
    u = rng.normal(size=4)
    M = dt * A
    T = np.eye(4) + M + M @ M / 2 + M @ M @ M / 6
    np.testing.assert_allclose(ssp_rk3_step(u, dt, lambda v: A @ v), T @ u, rtol=1e-10, atol=1e-12)


def test_temporal_order():
    errs = []
    for n in (10, 20, 40, 80):
        u, _ = integrate(1.0, 0.0, 1.0, lambda v: -v, lambda v, t: 1.0 / n)
        errs.append(abs(u - np.exp(-1.0)))
    r = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(np.abs(r - 8) < 0.4), r


def test_stage_times():
    seen = []
    ssp_rk3_step(0.0, 0.2, lambda v, t: seen.append(t) or 0.0, t=1.0)
    assert seen == [1.0, 1.2, 1.1]


def test_failed_stage_leaves_state():
    u = np.ones(3)

    def bad(v):
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        ssp_rk3_step(u, 0.1, bad)
    np.testing.assert_array_equal(u, 1.0)


def test_dt_advection():
    g = mesh.build_uniform_1d((0, 1), 25)
    assert compute_dt(np.zeros((25, 1)), g, Advection(1.0), 0.95) == pytest.approx(0.038, rel=1e-14)


def test_dt_quiescent_euler():
    e = Euler()
    q = np.tile(e.to_conserved([1, 0, 0, 1]), (8, 8, 1))
    g = mesh.build_uniform_2d(((0, 1), (0, 1)), 8, 8)
    c = np.sqrt(1.4)
    assert e.max_speed(q) == pytest.approx(c)
    assert compute_dt(q, g, e, 0.5) == pytest.approx(0.5 / (2 * c / 0.125))


def test_dt_unbounded():
    with pytest.raises(UnboundedTimestep):
        dt_2d(0.1, 0.1, 0.0, 0.0, 0.5)


def test_clamp():
    s = StepControl(0.5, 0.95, 1.0)
    assert s.clamp(0.1) == pytest.approx(0.05)
    assert s.clamp(0.01) == 0.01
    with pytest.raises(ValueError):
        StepControl(1.5, 0.0, 1.0)


@given(t_end=st.floats(1e-3, 10), dt=st.floats(1e-3, 1))
def test_lands_on_t_end(t_end, dt):
    times = []
    integrate(0.0, 0.0, t_end, lambda v: 0.0, lambda v, t: dt, lambda u, t, s: times.append(t))
    assert times[-1] == t_end
    assert all(t <= t_end for t in times)
