import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from fv3 import kernels as kn

finite = st.floats(-1e3, 1e3, allow_nan=False)
width = st.floats(0.05, 20.0)


def test_h3_examples():
    assert kn.h3(1.0, 1.0) == 1.0
    assert kn.h3(0.0, 0.0) == 0.0
    assert kn.h3(1.0, 4.0) == 3.0


def test_h3l_examples():
    assert kn.h3l(1.0, 1.0) == 1.0
    assert kn.h3l(0.0, 0.0) == 0.0
    assert kn.h3l(4.0, 1.0) == 1.5
    assert kn.h3l(-1.0, 1.0) == pytest.approx(1 / 3, abs=1e-16)


def test_switch_params():
    p = kn.SwitchParams(1.0, 0.1)
    assert p.tau == pytest.approx(2.5e-4, rel=1e-14)
    assert kn.SwitchParams(0.0, 0.1).tau == 0.0
    with pytest.raises(ValueError):
        kn.SwitchParams(-1.0, 0.1)


def test_h3lc_examples():
    c = kn.BranchCounter()
    p = kn.SwitchParams(1.0, 0.1)
    assert kn.h3lc(1e-6, 1e-6, p, c) == pytest.approx(1e-6, rel=1e-15)
    assert (c.h3, c.h3l) == (1, 0)
    assert kn.h3lc(1.0, 1.0, p, c) == 1.0
    assert (c.h3, c.h3l) == (1, 1)


def test_h3lc_alpha_zero_is_h3l(rng):
    dm, dp = rng.normal(size=(2, 1000)) * 1e-8
    np.testing.assert_array_equal(kn.h3lc(dm, dp, kn.SwitchParams(0.0, 0.1)), kn.h3l(dm, dp))


def test_h3_neq_examples():
    assert kn.h3_neq(1.0, 1.0, 1.0, 2.0, 1.0) == pytest.approx(4 / 3, rel=1e-15)
    assert kn.h3_neq(0.0, 0.0, 0.3, 2.0, 1.1) == 0.0


def test_scale_slopes_examples():
    np.testing.assert_allclose(kn.scale_slopes_right(1.0, 1.0, 1.0, 2.0, 1.0), (2 / 3, 1.0), rtol=1e-15)
    np.testing.assert_allclose(kn.scale_slopes_left(1.0, 1.0, 1.0, 2.0, 1.0), (2 / 3, 1.0), rtol=1e-15)
    assert kn.scale_slopes_right(0.0, 0.0, 1.0, 2.0, 3.0) == (0.0, 0.0)
    assert kn.scale_slopes_left(0.0, 0.0, 1.0, 2.0, 3.0) == (0.0, 0.0)
    assert kn.scale_slopes_left(2.0, 3.0, 0.5, 0.5, 0.5) == (3.0, 2.0)


def test_h3lc_neq_examples():
    p = kn.SwitchParams(1e9, 1.0)
    assert kn.h3lc_neq(1.0, 1.0, 1.0, 2.0, 1.0, "right", p) == pytest.approx(8 / 9, rel=1e-15)
    # the outer factor closes the gap to the unlimited non-uniform slope
    assert (kn.outer_width_factor(1.0, 2.0, 1.0) * kn.h3lc_neq(1.0, 1.0, 1.0, 2.0, 1.0, "right", p)
            == pytest.approx(kn.h3_neq(1.0, 1.0, 1.0, 2.0, 1.0), rel=1e-15))
    a, b = kn.scale_slopes_right(1.0, -0.5, 1.0, 2.0, 1.3)
    assert kn.h3lc_neq(1.0, -0.5, 1.0, 2.0, 1.3, "right", kn.SwitchParams(0.0, 1.0)) == kn.h3l(a, b)
    with pytest.raises(ValueError):
        kn.h3lc_neq(1.0, 1.0, 1.0, 1.0, 1.0, "up", p)


def test_weno3_examples():
    for v in ("JS", "Z"):
        assert kn.weno3(1.0, 1.0, v) == pytest.approx(1.0, rel=1e-15)
        assert kn.weno3(0.0, 0.0, v) == 0.0
    eps = 1e-6
    a0 = (1 / 3) / (eps + 1.0) ** 2
    a1 = (2 / 3) / eps**2
    h = kn.weno3(1.0, 0.0, "JS", eps)
    assert 0.0 <= h <= 1 / 3
    assert h == pytest.approx(a0 / (a0 + a1), rel=1e-14)


def test_quadratic_from_averages_examples():
    np.testing.assert_allclose(kn.quadratic_from_averages(2.0, 2.0, 2.0, 0.3, 1.0, 2.0), (0, 0, 2.0), atol=1e-14)
    a, b, c = kn.quadratic_from_averages(1.0, 3.0, 5.0, 0.5, 0.5, 0.5)
    assert a == pytest.approx(0, abs=1e-14) and b == pytest.approx(4.0) and c == pytest.approx(3.0)
    np.testing.assert_allclose(kn.quadratic_from_averages(0.0, 1.0, 4.0, 1.0, 1.0, 1.0), (1, 2, 11 / 12),
                               rtol=1e-14)


def test_unknown_kernel():
    with pytest.raises(ValueError, match="h3lc"):
        kn.slope("h3lz", 1.0, 1.0)


def test_none_kernel_is_zero():
    assert np.all(kn.slope("none", np.ones(5), np.arange(5.0)) == 0)


def _cell_mean(coef, lo, hi):
    a, b, c = coef
    F = lambda x: a * x**3 / 3 + b * x**2 / 2 + c * x
    return (F(hi) - F(lo)) / (hi - lo)


@given(um=finite, ui=finite, up=finite, dxm=width, dxi=width, dxp=width)
def test_quadratic_from_averages_reproduces_averages(um, ui, up, dxm, dxi, dxp):
    coef = kn.quadratic_from_averages(um, ui, up, dxm, dxi, dxp)
    h = dxi / 2
    scale = max(abs(um), abs(ui), abs(up), 1e-300)
    for target, lo, hi in ((um, -h - dxm, -h), (ui, -h, h), (up, h, h + dxp)):
        assert abs(_cell_mean(coef, lo, hi) - target) <= 1e-10 * scale


@given(um=finite, ui=finite, up=finite, dxm=width, dxi=width, dxp=width)
def test_h3_neq_matches_polynomial(um, ui, up, dxm, dxi, dxp):
    a, b, c = kn.quadratic_from_averages(um, ui, up, dxm, dxi, dxp)
    h = dxi / 2
    dm, dp = ui - um, up - ui
    scale = max(abs(um), abs(ui), abs(up), 1e-300)
    right = ui + kn.h3_neq(dm, dp, dxm, dxi, dxp) / 2
    left = ui - kn.h3_neq(dp, dm, dxp, dxi, dxm) / 2
    assert abs(right - (a * h * h + b * h + c)) <= 1e-10 * scale
    assert abs(left - (a * h * h - b * h + c)) <= 1e-10 * scale


@given(dm=finite, dp=finite, dx=width, alpha=st.floats(0, 1e3))
def test_uniform_collapse(dm, dp, dx, alpha):
    p = kn.SwitchParams(alpha, dx)
    assert kn.h3_neq(dm, dp, dx, dx, dx) == kn.h3(dm, dp)
    assert kn.scale_slopes_right(dm, dp, dx, dx, dx) == (dm, dp)
    assert kn.scale_slopes_left(dm, dp, dx, dx, dx) == (dp, dm)
    assert kn.h3lc_neq(dm, dp, dx, dx, dx, "right", p) == kn.h3lc(dm, dp, p)
    assert kn.h3lc_neq(dm, dp, dx, dx, dx, "left", p) == kn.h3lc(dp, dm, p)


@given(dm=finite, dp=finite)
def test_h3l_antisymmetry(dm, dp):
    assume(dp != 0)
    assert kn.h3l(-dm, -dp) == -kn.h3l(dm, dp)


def test_h3l_antisymmetry_bulk(rng):
    dm, dp = rng.normal(size=(2, 100_000)) * rng.choice([1e-8, 1.0, 1e4], size=(2, 100_000))
    dp[dp == 0] = 1.0
    np.testing.assert_array_equal(kn.h3l(-dm, -dp), -kn.h3l(dm, dp))


@given(a=finite, b=finite, c=finite, x0=st.floats(-5, 5), dx=st.floats(0.01, 2))
def test_h3_exact_for_quadratics(a, b, c, x0, dx):
    F = lambda x: a * x**3 / 3 + b * x**2 / 2 + c * x
    edges = x0 + dx * np.arange(-1.5, 2.0)      # three cells, centre cell at x0
    u = (F(edges[1:]) - F(edges[:-1])) / dx
    face = x0 + dx / 2
    exact = a * face**2 + b * face + c
    got = u[1] + kn.h3(u[1] - u[0], u[2] - u[1]) / 2
    scale = abs(a) * (abs(x0) + 2 * dx) ** 2 + abs(b) * (abs(x0) + 2 * dx) + abs(c) + 1e-300
    assert abs(got - exact) <= 1e-12 * scale


@given(dm=finite, dp=finite, dx=width)
def test_switch_has_single_boundary(dm, dp, dx):
    s = dm * dm + dp * dp
    for alpha in (0.0, 1e-3, 0.1, 1.0, 10.0, 1e3):
        p = kn.SwitchParams(alpha, dx)
        expect = kn.h3(dm, dp) if p.tau > s else kn.h3l(dm, dp)
        assert kn.h3lc(dm, dp, p) == expect


def test_random_kernel_sweep(rng):
    # 10^5 random pairs: h3lc never leaves the h3/h3l pair and weno stays between the candidates
    dm, dp = rng.normal(size=(2, 100_000))
    p = kn.SwitchParams(3.0, 0.5)
    out = kn.h3lc(dm, dp, p)
    smooth = dm**2 + dp**2 < p.tau
    np.testing.assert_array_equal(out[smooth], kn.h3(dm, dp)[smooth])
    np.testing.assert_array_equal(out[~smooth], kn.h3l(dm, dp)[~smooth])
    for v in ("JS", "Z"):
        w = kn.weno3(dm, dp, v)
        assert np.all(w >= np.minimum(dm, dp) - 1e-12) and np.all(w <= np.maximum(dm, dp) + 1e-12)
