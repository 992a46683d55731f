import numpy as np
import pytest
from hypothesis import given, strategies as st

from fv3 import mesh
from fv3.mesh import GridError


def test_uniform_boundaries():
    g = mesh.build_uniform_1d((0.0, 1.0), 4)
    np.testing.assert_array_equal(g.boundaries, [0, 0.25, 0.5, 0.75, 1])


def test_too_few_cells():
    with pytest.raises(GridError):
        mesh.build_uniform_1d((0.0, 1.0), 2)


def test_degenerate_domain():
    with pytest.raises(GridError):
        mesh.build_uniform_1d((1.0, 1.0), 8)


def test_vortex_widths():
    g = mesh.build_uniform_1d((-7.0, 7.0), 64)
    np.testing.assert_allclose(g.widths, 0.21875, rtol=0, atol=1e-15)


def test_perturbed_zero_amplitude_is_uniform():
    a = mesh.build_perturbed_1d((0.0, 1.0), 37, 0.0, 5.0)
    b = mesh.build_uniform_1d((0.0, 1.0), 37)
    np.testing.assert_array_equal(a.boundaries, b.boundaries)


def test_perturbed_test_grid():
    g = mesh.build_perturbed_1d((0.0, 1.0), 25, 1 / 50, 5.0)
    b = np.linspace(0, 1, 26)
    np.testing.assert_allclose(g.boundaries[1:-1], b[1:-1] + np.sin(10 * np.pi * b[1:-1]) / 50,
                               rtol=0, atol=1e-15)
    assert g.boundaries[0] == 0.0 and g.boundaries[-1] == 1.0


def test_perturbed_breaks_monotonicity():
    with pytest.raises(GridError, match="index"):
        mesh.build_perturbed_1d((0.0, 1.0), 25, 0.1, 5.3)


def test_perturbed_aliased_wave_is_harmless():
    # sin(100*pi*i/25) vanishes on every boundary, so nothing crosses
    g = mesh.build_perturbed_1d((0.0, 1.0), 25, 0.03, 50.0)
    np.testing.assert_allclose(g.widths, 0.04, atol=1e-13)


def test_random_grid():
    a = mesh.build_random_1d((0.0, 1.0), 25, 0.25, 1)
    b = mesh.build_random_1d((0.0, 1.0), 25, 0.25, 1)
    np.testing.assert_array_equal(a.boundaries, b.boundaries)
    assert np.all(np.diff(a.boundaries) > 0)
    u = mesh.build_random_1d((0.0, 1.0), 25, 0.0, 7)
    np.testing.assert_array_equal(u.boundaries, mesh.build_uniform_1d((0.0, 1.0), 25).boundaries)


def test_random_amplitude_bound():
    with pytest.raises(GridError):
        mesh.build_random_1d((0.0, 1.0), 25, 0.5, 1)


def test_nonuniform_2d():
    g = mesh.build_nonuniform_2d(((-1, 1), (-1, 1)), 30, 30, 0.1, 2, 0.1, 1)
    assert g.shape == (30, 30)
    assert abs(g.gx.widths.sum() - 2) < 1e-13
    assert abs(g.gy.widths.sum() - 2) < 1e-13
    assert not g.is_uniform
    flat = mesh.build_nonuniform_2d(((-1, 1), (-1, 1)), 12, 9, 0.0, 2, 0.0, 1)
    ref = mesh.build_uniform_2d(((-1, 1), (-1, 1)), 12, 9)
    np.testing.assert_array_equal(flat.gx.boundaries, ref.gx.boundaries)
    np.testing.assert_array_equal(flat.gy.boundaries, ref.gy.boundaries)


def test_mean_width():
    assert mesh.mean_width(mesh.build_uniform_1d((0, 1), 10)) == pytest.approx(0.1, abs=1e-16)
    assert mesh.mean_width(mesh.build_perturbed_1d((0, 1), 25, 0.02, 5)) == pytest.approx(0.04, abs=1e-16)
    assert mesh.mean_width(mesh.build_random_1d((0, 1), 50, 0.3, 3)) == pytest.approx(0.02, abs=1e-16)


def test_csv_round_trip(tmp_path):
    g = mesh.build_random_1d((0.0, 1.0), 11, 0.2, 4)
    g.to_csv(tmp_path / "g.csv")
    h = mesh.Grid1D.from_csv(tmp_path / "g.csv")
    np.testing.assert_array_equal(g.boundaries, h.boundaries)


@given(n=st.integers(3, 400), amp=st.floats(0, 0.49), seed=st.integers(0, 2**32 - 1),
       lo=st.floats(-10, 10), length=st.floats(0.1, 20))
def test_grid_invariants(n, amp, seed, lo, length):
    g = mesh.build_random_1d((lo, lo + length), n, amp, seed)
    assert np.all(np.diff(g.boundaries) > 0)
    assert np.all(g.widths > 0)
    assert abs(g.widths.sum() - length) <= 1e-12 * max(length, abs(lo))
    np.testing.assert_allclose(g.centers, 0.5 * (g.boundaries[1:] + g.boundaries[:-1]))
    assert mesh.mean_width(g) == pytest.approx(length / n, rel=1e-12)


@given(n=st.integers(3, 200), c2=st.floats(0.5, 10))
def test_mean_width_ignores_interior_perturbation(n, c2):
    c1 = 0.2 / (n * c2 * 2 * np.pi)     # small enough to keep monotonicity
    g = mesh.build_perturbed_1d((0.0, 1.0), n, c1, c2)
    assert mesh.mean_width(g) == pytest.approx(1.0 / n, rel=1e-12)
