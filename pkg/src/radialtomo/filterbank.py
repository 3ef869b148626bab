"""Ramp-filtered 1D kernels of radial functions and the kernel bank.

For a radial eta the filter |t| eta^(t u_0) does not depend on the projection
angle. Its slice eta^(t u_0) is obtained from the projection R_0 eta (an Abel
integral of the radial profile) followed by a 1D transform.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import j0

from .radial2d import (DEFAULT_N_ANGLES, GridSpec, KernelLabel, RadialProfile,
                       radial_kernel, rasterize)
from .spectral import SpectrumSamples, spectrum
from .wavelet1d import (DEFAULT_LEVELS, AutocorrelationPair, SampledProfile1D,
                        autocorrelation_pair, read_profile_csv)

DEFAULT_HALF_WINDOW = 512.0
MANIFEST = "manifest.txt"


class BankMissError(KeyError):
    """A reconstruction asked for a kernel the bank does not hold."""

    def __init__(self, label: KernelLabel):
        super().__init__(label)
        self.label = label

    def __str__(self):
        lab = self.label
        return f"kernel bank has no entry for kind={lab.kind} j={lab.j} k={lab.k}"


@dataclass(frozen=True)
class RampKernel:
    """1D convolution kernel applied to every projection."""

    profile: SampledProfile1D
    source: KernelLabel | None
    band_limit: float

    @property
    def step(self) -> float:
        return self.profile.step

    def antiderivative(self):
        """Cumulative trapezoid integral on the kernel grid, zero at the left end."""
        v = np.asarray(self.profile.values)
        c = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]))]) * self.step
        return self.profile.grid, c


def default_projection_step(label: KernelLabel | None) -> float:
    finest = 0 if label is None else max(label.j, label.k, 0)
    return 2.0 ** (-5 - finest)


def _next_pow2(n: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def project_radial(rp: RadialProfile, step: float | None = None) -> SampledProfile1D:
    """R_0 eta(s) = 2 * integral_0^inf eta(sqrt(s^2 + u^2)) du, on a symmetric grid.

    The substitution removes the Abel singularity; the integrand is even in u
    and flat at the far end, so the trapezoid rule is very accurate.
    """
    if step is None:
        step = default_projection_step(rp.label)
    ns = int(math.floor(rp.support_radius / step)) + 1
    s = step * np.arange(ns)
    w = np.full(ns, step)
    w[0] = 0.5 * step
    half = np.empty(ns)
    rows = max(1, (1 << 22) // ns)
    for lo in range(0, ns, rows):
        half[lo:lo + rows] = 2.0 * (rp(np.hypot(s[lo:lo + rows, None], s[None, :])) @ w)
    values = np.concatenate([half[:0:-1], half])
    return SampledProfile1D(-(ns - 1) * step, step, values)


def radial_spectrum_slice(rp: RadialProfile, n_freq: int | None = None,
                          step: float | None = None) -> SpectrumSamples:
    """eta^(t u_0) sampled on a symmetric frequency grid (real, even)."""
    proj = project_radial(rp, step)
    if n_freq is None:
        n_freq = _next_pow2(2 * len(proj.values))
    return spectrum(proj, n_freq)


def ramp_kernel(rp: RadialProfile, n_freq: int | None = None, step: float | None = None,
                half_window: float | None = DEFAULT_HALF_WINDOW) -> RampKernel:
    """Inverse transform of |t| eta^(t u_0).

    The projection is zero-padded to ``n_freq`` samples, multiplied by |t| at
    the exact bin frequencies (no window) and transformed back. The result is
    the periodization of the true kernel, whose tail decays only like
    -eta^(0) / (2 pi^2 s^2); the default period is therefore 32x the stored
    window so the wrapped tail stays below 1e-9 per unit of projected mass.
    Only ``|s| <= half_window`` is kept; ``None`` keeps the whole period.
    """
    proj = project_radial(rp, step)
    step = proj.step
    n = len(proj.values)
    if n_freq is None:
        span = 2.0 * (half_window if half_window is not None else DEFAULT_HALF_WINDOW)
        n_freq = _next_pow2(max(2 * n, 16.0 * span / step))
    if n_freq < 2 * n or n_freq & (n_freq - 1):
        raise ValueError("n_freq must be a power of two >= 2x the projection length")
    half = (n - 1) // 2
    buf = np.zeros(n_freq)
    buf[: half + 1] = proj.values[half:]
    buf[n_freq - half:] = proj.values[:half]
    spec = np.fft.rfft(buf).real * step
    tau = np.fft.rfftfreq(n_freq, step)
    k = np.fft.irfft(tau * spec, n_freq) / step
    m = n_freq // 2 - 1
    if half_window is not None:
        m = min(m, int(round(half_window / step)))
    vals = np.concatenate([k[n_freq - m:], k[: m + 1]])
    vals = 0.5 * (vals + vals[::-1])
    prof = SampledProfile1D(-m * step, step, vals)
    return RampKernel(prof, rp.label, 0.5 / step)


def ramp_filtered_radial(kern: RampKernel, radii) -> np.ndarray:
    """2D function whose projections equal ``kern``: inverse Hankel of |rho| eta^(rho)."""
    v = np.asarray(kern.profile.values)
    m = (len(v) - 1) // 2
    buf = np.zeros(2 * m + 2)
    buf[: m + 1] = v[m:]
    buf[m + 2:] = v[:m]
    n = len(buf)
    khat = np.fft.rfft(buf).real * kern.step
    rho = np.arange(len(khat)) / (n * kern.step)
    drho = 1.0 / (n * kern.step)
    radii = np.asarray(radii, dtype=float)
    out = np.empty(len(radii))
    rows = max(1, (1 << 22) // len(rho))
    weights = khat * rho * drho * 2.0 * math.pi
    weights[-1] *= 0.5
    for lo in range(0, len(radii), rows):
        out[lo:lo + rows] = j0(2.0 * math.pi * np.outer(radii[lo:lo + rows], rho)) @ weights
    return out


def energy_leakage(kern: RampKernel | RadialProfile, support_radius: float,
                   window: float | None = None, raster_step: float | None = None,
                   measure: str = "energy") -> float:
    """Percentage of a kernel's 2D L2 content outside the disk of ``support_radius``.

    A :class:`RampKernel` is turned back into its 2D ramp-filtered function
    first; a :class:`RadialProfile` is used as is. The function is rasterized
    on a square of half-width ``window`` (default 4x the support) and the pixel
    sums are compared; a support covering the whole window gives 0.
    ``measure="energy"`` compares squared norms,
    ``measure="norm"`` the norms themselves.
    """
    if not support_radius > 0:
        raise ValueError("support_radius must be positive")
    if measure not in ("energy", "norm"):
        raise ValueError("measure must be 'energy' or 'norm'")
    if window is None:
        window = 4.0 * support_radius
        if isinstance(kern, RampKernel):
            # the inverse Hankel transform is only trustworthy well inside the kernel window
            window = min(window, kern.profile.half_width / (2.0 * math.sqrt(2.0)))
    if raster_step is None:
        raster_step = window / 1024.0
    n = 2 * int(math.ceil(window / raster_step))
    spec = GridSpec(n, n * raster_step / 2.0)
    if isinstance(kern, RampKernel):
        radii = raster_step * np.arange(int(math.ceil(math.sqrt(2.0) * spec.extent / raster_step)) + 2)
        prof = RadialProfile(raster_step, ramp_filtered_radial(kern, radii), radii[-1] + raster_step)
    else:
        prof = kern
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        img = rasterize(prof, spec).values
    X, Y = spec.mesh()
    outside = np.hypot(X, Y) >= support_radius
    total = float(np.sum(img**2))
    if total == 0.0:
        return 0.0
    frac = float(np.sum(img[outside] ** 2)) / total
    return 100.0 * (frac if measure == "energy" else math.sqrt(frac))


# --------------------------------------------------------------------- bank


def bank_labels(J: int, Jmax: int, include_vertical: bool = True) -> list[KernelLabel]:
    """Every kernel of the truncated decomposition with coarsest scale J."""
    labels = [KernelLabel("scaling", J, J)]
    details = range(J, Jmax + 1)
    labels += [KernelLabel("horizontal", J, j) for j in details]
    if include_vertical:
        labels += [KernelLabel("vertical", j, J) for j in details]
    labels += [KernelLabel("diagonal", j, k) for j in details for k in details]
    return labels


@dataclass
class BankEntry:
    radial: RadialProfile
    kernel: RampKernel


@dataclass
class KernelBank:
    order: int
    levels: int
    n_angles: int
    half_window: float
    entries: dict[str, BankEntry] = field(default_factory=dict)

    def __contains__(self, label: KernelLabel) -> bool:
        return label.key in self.entries

    def __getitem__(self, label: KernelLabel) -> BankEntry:
        try:
            return self.entries[label.key]
        except KeyError:
            raise BankMissError(label) from None

    def labels(self) -> list[KernelLabel]:
        return [KernelLabel.from_key(k) for k in self.entries]

    def kernel(self, label: KernelLabel) -> RampKernel:
        return self[label].kernel

    def radial(self, label: KernelLabel) -> RadialProfile:
        return self[label].radial

    def save(self, directory) -> Path:
        """Write ``manifest.txt`` plus one radial and one ramp CSV per kernel."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        lines = [
            "# radial wavelet kernel bank",
            f"order = {self.order}",
            f"levels = {self.levels}",
            f"n_angles = {self.n_angles}",
            f"half_window = {self.half_window!r}",
            "units = wavelet units (x = 1 is one unit of the dilation 2^j x)",
            "normalization = f*eta(x) = sum_theta (R_theta f * k)(x . u_theta) * pi / n_theta",
        ]
        for key in sorted(self.entries):
            e = self.entries[key]
            e.radial.to_csv(out / f"radial_{key}.csv")
            e.kernel.profile.to_csv(out / f"ramp_{key}.csv")
            lines.append(
                f"kernel {key} support_radius={e.radial.support_radius!r} "
                f"radii_step={e.radial.radii_step!r} kernel_step={e.kernel.step!r} "
                f"kernel_samples={len(e.kernel.profile.values)}")
        (out / MANIFEST).write_text("\n".join(lines) + "\n")
        return out

    @classmethod
    def load(cls, directory) -> "KernelBank":
        d = Path(directory)
        path = d / MANIFEST
        if not path.is_file():
            raise FileNotFoundError(f"no kernel bank manifest at {path}")
        meta, kernels = {}, []
        for line in path.read_text().splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            if line.startswith("kernel "):
                parts = line.split()
                kernels.append((parts[1], dict(p.split("=", 1) for p in parts[2:])))
            else:
                key, _, val = line.partition("=")
                meta[key.strip()] = val.strip()
        bank = cls(int(meta["order"]), int(meta["levels"]), int(meta["n_angles"]),
                   float(meta["half_window"]))
        for key, info in kernels:
            label = KernelLabel.from_key(key)
            rad = np.loadtxt(d / f"radial_{key}.csv", delimiter=",", skiprows=1, ndmin=2)
            radial = RadialProfile(float(info["radii_step"]), rad[:, 1],
                                   float(info["support_radius"]), label)
            prof = read_profile_csv(d / f"ramp_{key}.csv")
            prof = SampledProfile1D(prof.start, float(info["kernel_step"]), prof.values)
            bank.entries[key] = BankEntry(radial, RampKernel(prof, label, 0.5 / prof.step))
        return bank


def build_entry(pair: AutocorrelationPair, label: KernelLabel, n_angles: int = DEFAULT_N_ANGLES,
                half_window: float = DEFAULT_HALF_WINDOW) -> BankEntry:
    radial = radial_kernel(pair, label.kind, label.j, label.k, n_angles=n_angles)
    return BankEntry(radial, ramp_kernel(radial, half_window=half_window))


def _build_one(args):
    order, levels, label, n_angles, half_window = args
    return build_entry(_pair_cached(order, levels), label, n_angles, half_window)


_PAIRS: dict = {}


def _pair_cached(order: int, levels: int) -> AutocorrelationPair:
    if (order, levels) not in _PAIRS:
        _PAIRS[(order, levels)] = autocorrelation_pair(order, levels)
    return _PAIRS[(order, levels)]


def build_bank(order: int = 6, J: int = 0, Jmax: int = 2, levels: int = DEFAULT_LEVELS,
               n_angles: int = DEFAULT_N_ANGLES, half_window: float = DEFAULT_HALF_WINDOW,
               include_vertical: bool = True, labels=None, workers: int = 1) -> KernelBank:
    """Radial profiles and ramp kernels for every label of the decomposition."""
    if labels is None:
        labels = bank_labels(J, Jmax, include_vertical)
    jobs = [(order, levels, lab, n_angles, half_window) for lab in labels]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            entries = list(pool.map(_build_one, jobs))
    else:
        entries = [_build_one(job) for job in jobs]
    bank = KernelBank(order, levels, n_angles, half_window)
    for lab, entry in zip(labels, entries):
        bank.entries[lab.key] = entry
    return bank
