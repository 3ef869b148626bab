import math
import warnings

import numpy as np
import pytest

from oracles import angular_average_quad
from radialtomo.radial2d import (GridSpec, ImageGrid, KernelLabel, RadialProfile,
                                 TruncationWarning, angular_average, build_radial,
                                 factor_profiles, radial_kernel, rasterize)


@pytest.fixture(scope="module")
def phi_r(db6):
    return radial_kernel(db6, "scaling", 0, 0)


def test_angular_average_at_origin(db6):
    val = angular_average(db6.Phi, db6.Psi, 0.0)
    assert val == pytest.approx(db6.Phi(0.0) * db6.Psi(0.0), abs=1e-15)


def test_angular_average_beyond_reach(db6):
    assert angular_average(db6.Phi, db6.Phi, math.sqrt(2) * 11 + 0.01) == 0.0


def test_angular_average_matches_adaptive_quadrature(db6):
    got = angular_average(db6.Phi, db6.Phi, 1.0, n_angles=512)
    ref = angular_average_quad(db6.Phi, db6.Phi, 1.0, pieces=16)
    assert abs(ref - angular_average_quad(db6.Phi, db6.Phi, 1.0, pieces=24)) < 1e-8
    assert abs(got - ref) < 1e-6


def test_angular_average_rejects_bad_input(db6):
    with pytest.raises(ValueError):
        angular_average(db6.Phi, db6.Phi, -1.0)
    with pytest.raises(ValueError):
        angular_average(db6.Phi, db6.Phi, 1.0, n_angles=4)


def test_scaling_kernel_moment_and_support(phi_r):
    assert abs(phi_r.integral() - 1.0) < 1e-3
    assert phi_r.support_radius == pytest.approx(math.sqrt(2) * 11)
    assert np.all(phi_r.values[phi_r.radii >= phi_r.support_radius] == 0.0)
    assert phi_r(phi_r.support_radius) == 0.0 and phi_r(100.0) == 0.0
    assert phi_r.label == KernelLabel("scaling", 0, 0)
    assert phi_r.radii_step == 2.0**-10


@pytest.mark.parametrize("kind,j,k", [("diagonal", 0, 0), ("horizontal", 0, 1),
                                      ("vertical", 1, 0), ("diagonal", 1, 0)])
def test_wavelet_kernel_moments(db6, kind, j, k):
    rp = radial_kernel(db6, kind, j, k, radii_step=2.0**-8)
    assert abs(rp.integral()) < 1e-3


def test_horizontal_vertical_symmetry(db6):
    for j, k in [(0, 1), (1, 0), (-1, 1)]:
        h = radial_kernel(db6, "horizontal", j, k, radii_step=2.0**-7)
        v = radial_kernel(db6, "vertical", k, j, radii_step=2.0**-7)
        assert h.support_radius == v.support_radius
        assert np.max(np.abs(h.values - v.values)) <= 1e-9


def test_support_radius_uses_widest_factor(db6):
    rp = radial_kernel(db6, "horizontal", -1, 1, radii_step=2.0**-6)
    assert rp.support_radius == pytest.approx(math.sqrt(2) * 22)


@pytest.mark.parametrize("label", [KernelLabel("scaling", 0, 0), KernelLabel("horizontal", 0, 1),
                                   KernelLabel("diagonal", 1, 1), KernelLabel("horizontal", -1, 1)])
def test_doubling_angles_changes_little(db6, label):
    p, q = factor_profiles(db6, label)
    a = build_radial(label.kind, p, q, label.j, label.k, radii_step=2.0**-5, n_angles=512)
    b = build_radial(label.kind, p, q, label.j, label.k, radii_step=2.0**-5, n_angles=1024)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_build_radial_needs_positive_step(db6):
    with pytest.raises(ValueError):
        build_radial("scaling", db6.Phi, db6.Phi, radii_step=0.0)


def test_rasterize_zero_profile():
    rp = RadialProfile(0.1, np.zeros(20), 1.9)
    img = rasterize(rp, GridSpec(16, 2.0))
    assert not img.values.any()


def test_raster_symmetries_exact(phi_r):
    img = rasterize(phi_r, GridSpec(64, 16.0)).values
    np.testing.assert_array_equal(img, img.T)
    np.testing.assert_array_equal(img, np.rot90(img))
    np.testing.assert_array_equal(img, np.rot90(img, 2))


def test_raster_quadrature_matches_radial_quadrature(phi_r):
    spec = GridSpec(128, 16.0)
    img = rasterize(phi_r, spec)
    assert img.values.sum() * spec.pixel_size**2 == pytest.approx(phi_r.integral(), rel=1e-2)


def test_raster_zero_outside_support(phi_r):
    spec = GridSpec(96, 24.0)
    img = rasterize(phi_r, spec)
    X, Y = spec.mesh()
    outside = np.hypot(X, Y) > phi_r.support_radius + spec.pixel_size
    assert not img.values[outside].any()


def test_rasterize_warns_when_clipped(phi_r):
    with pytest.warns(TruncationWarning):
        rasterize(phi_r, GridSpec(32, 4.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rasterize(phi_r, GridSpec(32, 16.0))


def test_rasterize_scale(phi_r):
    # two wavelet units per grid unit shrink the footprint by half
    a = rasterize(phi_r, GridSpec(64, 8.0), scale=2.0).values
    b = rasterize(phi_r, GridSpec(64, 16.0)).values
    np.testing.assert_array_equal(a, b)


def test_rotation_invariance_of_evaluator(phi_r):
    rng = np.random.default_rng(7)
    pts = rng.uniform(-12, 12, size=(100, 2))
    base = phi_r.evaluate(pts[:, 0], pts[:, 1])
    for t in np.linspace(0.1, 2 * math.pi, 8, endpoint=False):
        c, s = math.cos(t), math.sin(t)
        rot = phi_r.evaluate(c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1])
        assert np.max(np.abs(rot - base)) <= 1e-9


def test_kernel_label_keys():
    lab = KernelLabel("diagonal", -1, 2)
    assert lab.key == "diagonal_-1_2"
    assert KernelLabel.from_key(lab.key) == lab
    with pytest.raises(ValueError):
        KernelLabel("sideways", 0, 0)


def test_image_grid_validation_and_arithmetic():
    spec = GridSpec(4, 1.0)
    a = ImageGrid(spec, np.ones((4, 4)))
    assert ((a + a) - a).values.sum() == 16
    assert (2 * a).values[0, 0] == 2
    with pytest.raises(ValueError):
        ImageGrid(spec, np.ones((3, 4)))
    with pytest.raises(ValueError):
        GridSpec(0)
    assert spec.pixel_size == 0.5
    np.testing.assert_allclose(spec.centers, [-0.75, -0.25, 0.25, 0.75])


def test_radial_profile_csv(tmp_path, phi_r):
    path = tmp_path / "phi_r.csv"
    phi_r.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1], phi_r.values)
    np.testing.assert_array_equal(data[:, 0], phi_r.radii)
