"""Numerical self-checks run by ``radialtomo verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import filterbank, phantom, radial2d, spectral, wavelet1d


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} value={self.value:.6g} threshold={self.threshold:.6g} {status}"


def _upper(name, value, threshold) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value <= threshold))


def shift_orthonormality_error(h) -> float:
    """max_m |sum_k h_k h_{k+2m} - delta_m|."""
    h = np.asarray(h, dtype=float)
    c = np.correlate(h, h, mode="full")
    mid = len(h) - 1
    even = c[mid % 2::2]
    target = np.zeros_like(even)
    target[mid // 2] = 1.0
    return float(np.max(np.abs(even - target)))


def integer_sample_error(Phi: wavelet1d.SampledProfile1D) -> float:
    """max_m |Phi(m) - delta_m| over the integers covered by the samples."""
    per_unit = int(round(1.0 / Phi.step))
    zero = int(round(-Phi.start / Phi.step))
    ints = np.asarray(Phi.values)[zero % per_unit::per_unit]
    target = np.zeros_like(ints)
    target[zero // per_unit] = 1.0
    return float(np.max(np.abs(ints - target)))


def mass_spread(sino: phantom.Sinogram) -> float:
    m = sino.masses()
    return float((m.max() - m.min()) / abs(m.mean()))


def gaussian_image(spec: radial2d.GridSpec, width: float = 0.15, center=(0.1, -0.05)):
    X, Y = spec.mesh()
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    return radial2d.ImageGrid(spec, np.exp(-r2 / (2 * width**2)))


def run_checks(order: int = 6, levels: int = wavelet1d.DEFAULT_LEVELS,
               n_angles: int = radial2d.DEFAULT_N_ANGLES,
               corrupt_filter: bool = False) -> list[CheckResult]:
    out = []
    sums, ortho = [], []
    for n in range(1, wavelet1d.MAX_ORDER + 1):
        h = np.array(wavelet1d.daubechies_filter(n).h)
        if corrupt_filter and n == order:
            h[0] += 1e-3
        sums.append(abs(h.sum() - math.sqrt(2.0)))
        ortho.append(shift_orthonormality_error(h))
    out.append(_upper("filter_sum", max(sums), 1e-12))
    out.append(_upper("filter_orthonormality", max(ortho), 1e-12))

    pair = wavelet1d.autocorrelation_pair(order, levels)
    out.append(_upper("scaling_integer_samples", integer_sample_error(pair.Phi), 1e-6))

    spectra = spectral.DyadicSpectra(pair.Phi, pair.Psi)
    dev = max(spectral.partition_check(J, J + 8, spectra) for J in range(-2, 3))
    out.append(_upper("telescoping_partition", dev, 1e-6))

    labels = [radial2d.KernelLabel(*x) for x in
              (("scaling", 0, 0), ("horizontal", 0, 0), ("horizontal", 0, 1),
               ("vertical", 1, 0), ("diagonal", 0, 0))]
    bank = filterbank.build_bank(order, levels=levels, n_angles=n_angles, labels=labels)
    rp = bank.radial(labels[0])
    out.append(_upper("scaling_moment", abs(rp.integral() - 1.0), 1e-3))
    detail = max(abs(bank.radial(lab).integral()) for lab in labels[1:])
    out.append(_upper("wavelet_moment", detail, 1e-3))
    sym = np.max(np.abs(bank.radial(labels[2]).values - bank.radial(labels[3]).values))
    out.append(_upper("horizontal_vertical_symmetry", sym, 1e-9))
    full = filterbank.ramp_kernel(rp, half_window=None)
    out.append(_upper("ramp_kernel_mean", abs(full.profile.integral()), 1e-6))
    leak = filterbank.energy_leakage(bank.kernel(labels[0]), rp.support_radius)
    out.append(_upper("energy_leakage_percent", leak, 1e-3))

    spec = radial2d.GridSpec(128)
    bump = gaussian_image(spec)
    fs = max(phantom.fourier_slice_check(bump, th)
             for th in np.arange(8) * math.pi / 8)
    out.append(_upper("fourier_slice", fs, 1e-2))

    disk = phantom.disk(0.8)
    img = disk.rasterize(spec, supersample=4)
    angles = phantom.default_angles(180)
    offsets = phantom.default_offsets(181)
    num = phantom.radon_numeric(img, angles, offsets)
    ana = phantom.sinogram_analytic(disk, angles, offsets)
    rel = np.linalg.norm(num.values - ana.values) / np.linalg.norm(ana.values)
    out.append(_upper("radon_vs_analytic", rel, 2e-2))
    out.append(_upper("projection_mass_spread", mass_spread(num), 1e-3))
    return out
