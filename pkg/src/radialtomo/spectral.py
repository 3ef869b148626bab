"""Fourier transforms of sampled profiles and the partition-of-unity checks.

Transforms use the convention f^(w) = integral f(t) exp(-2 pi i t w) dt, so
frequencies are in cycles per unit. Dilation acts as
Phi_j^(w) = Phi^(2^-j w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .wavelet1d import SampledProfile1D, write_columns_csv


@dataclass(frozen=True)
class SpectrumSamples:
    """Transform samples at ``freq_step * (i - n // 2)``."""

    freq_step: float
    values: np.ndarray

    @property
    def freqs(self) -> np.ndarray:
        n = len(self.values)
        return self.freq_step * (np.arange(n) - n // 2)

    def at_zero(self):
        return self.values[len(self.values) // 2]

    def to_csv(self, path) -> None:
        vals = np.asarray(self.values)
        if np.iscomplexobj(vals):
            write_columns_csv(path, ("freq", "real", "imag"), self.freqs, vals.real, vals.imag)
        else:
            write_columns_csv(path, ("freq", "value"), self.freqs, vals)


def _is_even(p: SampledProfile1D) -> bool:
    return math.isclose(p.start, -p.stop, rel_tol=0.0, abs_tol=1e-12 * p.step)


def spectrum(p: SampledProfile1D, n_freq: int) -> SpectrumSamples:
    """FFT samples of the transform of ``p`` (zero-padded to ``n_freq``).

    Returns real values when ``p`` lives on a grid symmetric about 0.
    """
    n = len(p.values)
    if n_freq < n or n_freq & (n_freq - 1):
        raise ValueError("n_freq must be a power of two >= the profile length")
    buf = np.zeros(n_freq)
    buf[:n] = p.values
    raw = np.fft.fftshift(np.fft.fft(buf))
    freq_step = 1.0 / (n_freq * p.step)
    freqs = freq_step * (np.arange(n_freq) - n_freq // 2)
    vals = raw * p.step * np.exp(-2j * math.pi * freqs * p.start)
    if _is_even(p):
        vals = vals.real
    return SpectrumSamples(freq_step, vals)


def _uniform_step(freqs: np.ndarray):
    if freqs.ndim != 1 or len(freqs) < 3:
        return None
    d = np.diff(freqs)
    if d[0] != 0 and np.allclose(d, d[0], rtol=1e-12, atol=0.0):
        return float(d[0])
    return None


def evaluate_spectrum(p: SampledProfile1D, freqs) -> np.ndarray:
    """Transform of ``p`` at arbitrary frequencies.

    Uniform 1D frequency grids go through a chirp-z transform; anything else
    falls back to direct summation. Even profiles give real output.
    """
    freqs = np.asarray(freqs, dtype=float)
    even = _is_even(p)
    df = _uniform_step(freqs)
    if df is not None:
        f0 = freqs[0]
        a = np.exp(2j * math.pi * f0 * p.step)
        w = np.exp(-2j * math.pi * df * p.step)
        raw = czt(np.asarray(p.values, dtype=complex), m=len(freqs), w=w, a=a)
        out = raw * p.step * np.exp(-2j * math.pi * freqs * p.start)
        return out.real if even else out
    x = p.grid
    v = np.asarray(p.values)
    flat = freqs.ravel()
    out = np.empty(flat.shape, dtype=float if even else complex)
    chunk = max(1, (1 << 22) // len(x))
    for lo in range(0, len(flat), chunk):
        arg = 2.0 * math.pi * np.outer(flat[lo:lo + chunk], x)
        if even:
            out[lo:lo + chunk] = np.cos(arg) @ v * p.step
        else:
            out[lo:lo + chunk] = np.exp(-1j * arg) @ v * p.step
    return out.reshape(freqs.shape)


class DyadicSpectra:
    """Phi^ and Psi^ of one autocorrelation pair, evaluated at any scale."""

    def __init__(self, Phi: SampledProfile1D, Psi: SampledProfile1D):
        self.Phi = Phi
        self.Psi = Psi

    def scaling(self, j: int, w):
        return evaluate_spectrum(self.Phi, np.asarray(w, dtype=float) * 2.0**-j)

    def wavelet(self, j: int, w):
        return evaluate_spectrum(self.Psi, np.asarray(w, dtype=float) * 2.0**-j)


def telescoped_sum(J: int, M: int, spectra: DyadicSpectra, w) -> np.ndarray:
    """Phi_J^(w) + sum_{j=J}^{M} Psi_j^(w)."""
    total = spectra.scaling(J, w)
    for j in range(J, M + 1):
        total = total + spectra.wavelet(j, w)
    return total


def partition_deviation(J: int, M: int, spectra: DyadicSpectra, w) -> np.ndarray:
    """Pointwise |Phi_J^ + sum Psi_j^ - Phi_{M+1}^| on the frequencies ``w``."""
    if J > M + 1:
        raise ValueError("need J <= M + 1")
    return np.abs(telescoped_sum(J, M, spectra, w) - spectra.scaling(M + 1, w))


def partition_check(J: int, M: int, spectra: DyadicSpectra, band: float = 4.0,
                    n_points: int = 1025) -> float:
    """Max deviation of the finite telescoping identity over |w| <= band.

    ``M = J - 1`` is the empty sum and returns exactly 0.
    """
    w = np.linspace(-band, band, n_points)
    return float(np.max(partition_deviation(J, M, spectra, w)))


def partition_of_unity_gap(J: int, M: int, spectra: DyadicSpectra, band: float = 1.0,
                           n_points: int = 513) -> float:
    """Max |Phi_J^ + sum_{j=J}^{M} Psi_j^ - 1| over |w| <= band."""
    w = np.linspace(-band, band, n_points)
    return float(np.max(np.abs(telescoped_sum(J, M, spectra, w) - 1.0)))


def product_partition_check(J: int, M: int, xi, spectra: DyadicSpectra,
                            n_angles: int = 64) -> float:
    """Compare the angular average of the four-term product expansion at ``xi``
    with the angular average of Phi_{M+1}^ x Phi_{M+1}^.
    """
    if J > M:
        raise ValueError("need J <= M")
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    xi = np.asarray(xi, dtype=float)
    theta = np.arange(n_angles) * (2.0 * math.pi / n_angles)
    a = xi[0] * np.cos(theta) + xi[1] * np.sin(theta)
    b = -xi[0] * np.sin(theta) + xi[1] * np.cos(theta)
    phi_a, phi_b = spectra.scaling(J, a), spectra.scaling(J, b)
    psi_a = [spectra.wavelet(j, a) for j in range(J, M + 1)]
    psi_b = [spectra.wavelet(j, b) for j in range(J, M + 1)]
    expansion = phi_a * phi_b
    expansion = expansion + phi_a * sum(psi_b) + sum(psi_a) * phi_b
    expansion = expansion + sum(psi_a) * sum(psi_b)
    remainder = spectra.scaling(M + 1, a) * spectra.scaling(M + 1, b)
    return float(abs(np.mean(expansion) - np.mean(remainder)))


def product_expansion(J: int, M: int, xi, spectra: DyadicSpectra, n_angles: int = 64) -> float:
    """Angular average of the truncated four-term expansion at ``xi``."""
    xi = np.asarray(xi, dtype=float)
    theta = np.arange(n_angles) * (2.0 * math.pi / n_angles)
    a = xi[0] * np.cos(theta) + xi[1] * np.sin(theta)
    b = -xi[0] * np.sin(theta) + xi[1] * np.cos(theta)
    fa = telescoped_sum(J, M, spectra, a)
    fb = telescoped_sum(J, M, spectra, b)
    return float(np.mean(fa * fb))


def radial_spectrum_from_factors(spectra: DyadicSpectra, kind: str, j: int, k: int,
                                 rho, n_angles: int = 512) -> np.ndarray:
    """(1/2pi) integral p^(rho cos t) q^(rho sin t) dt for the kernel factors."""
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    theta = np.arange(n_angles) * (2.0 * math.pi / n_angles)
    a = rho[:, None] * np.cos(theta)[None, :]
    b = rho[:, None] * np.sin(theta)[None, :]
    first = spectra.wavelet if kind in ("vertical", "diagonal") else spectra.scaling
    second = spectra.wavelet if kind in ("horizontal", "diagonal") else spectra.scaling
    return np.mean(first(j, a) * second(k, b), axis=1)


def write_deviation_csv(path, w, deviation) -> None:
    write_columns_csv(path, ("omega", "deviation"), w, deviation)
