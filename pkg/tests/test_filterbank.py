import math

import numpy as np
import pytest

from radialtomo.filterbank import (BankMissError, KernelBank, bank_labels, build_bank,
                                   energy_leakage, project_radial, radial_spectrum_slice,
                                   ramp_kernel)
from radialtomo.radial2d import GridSpec, KernelLabel, RadialProfile, radial_kernel, rasterize
from radialtomo.spectral import DyadicSpectra, radial_spectrum_from_factors


@pytest.fixture(scope="module")
def phi_r(db6):
    return radial_kernel(db6, "scaling", 0, 0)


@pytest.fixture(scope="module")
def psi_d(db6):
    return radial_kernel(db6, "diagonal", 0, 0, radii_step=2.0**-8)


@pytest.fixture(scope="module")
def phi_kernel(phi_r):
    return ramp_kernel(phi_r)


def centre(s):
    return len(s.values) // 2


def test_slice_at_zero_frequency(phi_r, psi_d):
    assert radial_spectrum_slice(phi_r).at_zero() == pytest.approx(1.0, abs=1e-3)
    assert abs(radial_spectrum_slice(psi_d).at_zero()) < 1e-3


def test_slice_is_real_and_even(phi_r):
    s = radial_spectrum_slice(phi_r)
    assert not np.iscomplexobj(s.values)
    c = centre(s)
    np.testing.assert_allclose(s.values[c + 1:], s.values[c - 1:0:-1][: len(s.values) - c - 1],
                               atol=1e-9)


def test_projection_of_disk_indicator():
    # the projection of the indicator of a disk of radius a is the chord 2 sqrt(a^2 - s^2)
    rp = RadialProfile(2.0**-8, np.r_[np.ones(257), np.zeros(4)], 1.0)
    proj = project_radial(rp, step=2.0**-6)
    s = proj.grid
    inner = np.abs(s) < 0.9
    np.testing.assert_allclose(proj.values[inner], 2 * np.sqrt(1 - s[inner] ** 2), atol=2e-2)


def test_slice_matches_two_dimensional_transform(phi_r):
    # independent route: rasterize, integrate out y, transform along x
    spec = GridSpec(512, 16.0)
    img = rasterize(phi_r, spec).values
    h = spec.pixel_size
    profile = img.sum(axis=0) * h
    s = radial_spectrum_slice(phi_r)
    c = centre(s)
    idx = c + np.arange(0, 400, 20)
    ref = np.array([np.sum(profile * np.exp(-2j * math.pi * w * spec.centers)) * h
                    for w in s.freqs[idx]])
    np.testing.assert_allclose(s.values[idx], ref.real, atol=1e-3)


@pytest.mark.parametrize("kind,j,k", [("scaling", 0, 0), ("horizontal", 0, 1), ("diagonal", 0, 0)])
def test_slice_matches_angular_average_of_factor_spectra(db6, kind, j, k):
    rp = radial_kernel(db6, kind, j, k, radii_step=2.0**-8)
    s = radial_spectrum_slice(rp)
    c = centre(s)
    idx = c + np.arange(0, int(1.5 / s.freq_step), 25)
    ref = radial_spectrum_from_factors(DyadicSpectra(db6.Phi, db6.Psi), kind, j, k, s.freqs[idx])
    np.testing.assert_allclose(s.values[idx], ref, atol=1e-3)


def test_zero_source_gives_zero_kernel():
    rp = RadialProfile(0.125, np.zeros(40), 4.875)
    k = ramp_kernel(rp, half_window=32.0)
    assert not np.any(k.profile.values)


def test_ramp_kernel_validation(phi_r):
    with pytest.raises(ValueError):
        ramp_kernel(phi_r, n_freq=1000)


@pytest.mark.parametrize("which", ["phi_r", "psi_d"])
def test_full_period_mean_vanishes(request, which):
    rp = request.getfixturevalue(which)
    k = ramp_kernel(rp, half_window=None)
    assert abs(k.profile.integral()) <= 1e-6


def test_truncated_mean_is_the_missing_tail(phi_kernel):
    # beyond the window the kernel is -1/(2 pi^2 s^2); cutting it off leaves 1/(pi^2 W)
    W = phi_kernel.profile.half_width
    assert phi_kernel.profile.integral() == pytest.approx(1.0 / (math.pi**2 * W), rel=1e-2)


def test_kernel_is_even(phi_kernel):
    v = np.asarray(phi_kernel.profile.values)
    assert np.max(np.abs(v - v[::-1])) <= 1e-9
    assert phi_kernel.profile.start == -phi_kernel.profile.stop


def test_kernel_decay(phi_kernel, phi_r):
    p = phi_kernel.profile
    R = phi_r.support_radius
    far = np.abs(p.grid) > R
    C = np.max(p.grid[far] ** 2 * np.abs(p.values[far]))
    # the tail constant is 1/(2 pi^2) because the kernel integrates to 1; the
    # periodization adds a ~1e-9 offset that shows up only near the window edge
    assert C <= 1.005 / (2 * math.pi**2)
    assert p(100.0) * 100.0**2 == pytest.approx(-1.0 / (2 * math.pi**2), rel=1e-3)


def test_energy_leakage_of_scaling_kernel(phi_kernel, phi_r):
    assert energy_leakage(phi_kernel, phi_r.support_radius) <= 1e-3


def test_energy_leakage_support_covers_window(phi_kernel):
    assert energy_leakage(phi_kernel, 1e4, window=40.0, raster_step=0.25) == 0.0


def test_unfiltered_kernel_does_not_leak(phi_r):
    assert energy_leakage(phi_r, phi_r.support_radius, raster_step=1 / 16) <= 1e-12


def test_energy_leakage_validation(phi_kernel):
    with pytest.raises(ValueError):
        energy_leakage(phi_kernel, 0.0)
    with pytest.raises(ValueError):
        energy_leakage(phi_kernel, 10.0, measure="max")


def test_bank_labels_enumeration():
    labels = bank_labels(0, 2)
    assert len(labels) == 1 + 3 + 3 + 9
    assert labels[0] == KernelLabel("scaling", 0, 0)
    assert KernelLabel("vertical", 2, 0) in labels
    assert KernelLabel("diagonal", 2, 1) in labels
    assert not any(lab.kind == "vertical" for lab in bank_labels(-1, 2, include_vertical=False))


SMALL = [KernelLabel("scaling", 0, 0), KernelLabel("diagonal", 0, 0)]


@pytest.fixture(scope="module")
def small_bank():
    return build_bank(6, labels=SMALL, half_window=64.0)


def test_bank_round_trip(tmp_path, small_bank):
    small_bank.save(tmp_path / "bank")
    back = KernelBank.load(tmp_path / "bank")
    assert (back.order, back.levels, back.n_angles, back.half_window) == (6, 10, 512, 64.0)
    assert set(back.labels()) == set(SMALL)
    for lab in SMALL:
        np.testing.assert_array_equal(back.kernel(lab).profile.values,
                                      small_bank.kernel(lab).profile.values)
        assert back.kernel(lab).step == small_bank.kernel(lab).step
        assert back.kernel(lab).profile.start == small_bank.kernel(lab).profile.start
        np.testing.assert_array_equal(back.radial(lab).values, small_bank.radial(lab).values)
        assert back.radial(lab).support_radius == small_bank.radial(lab).support_radius


def test_manifest_lists_support_radii(tmp_path, small_bank):
    small_bank.save(tmp_path)
    text = (tmp_path / "manifest.txt").read_text()
    for lab in SMALL:
        line = next(ln for ln in text.splitlines() if ln.startswith(f"kernel {lab.key} "))
        assert f"support_radius={small_bank.radial(lab).support_radius!r}" in line


def test_rebuild_is_byte_identical(tmp_path, small_bank):
    small_bank.save(tmp_path / "a")
    build_bank(6, labels=SMALL, half_window=64.0).save(tmp_path / "b")
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_bank_miss_names_the_kernel(small_bank):
    with pytest.raises(BankMissError) as err:
        small_bank.kernel(KernelLabel("horizontal", 0, 2))
    assert str(err.value) == "kernel bank has no entry for kind=horizontal j=0 k=2"
    assert KernelLabel("scaling", 0, 0) in small_bank


def test_load_without_manifest(tmp_path):
    with pytest.raises(FileNotFoundError):
        KernelBank.load(tmp_path)
