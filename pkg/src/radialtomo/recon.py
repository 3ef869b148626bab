"""Convolution-backprojection with radial kernels and multilevel reconstruction.

Kernels live in wavelet units; ``scale`` converts physical image coordinates
into those units (by default one unit per pixel). A kernel k in wavelet units
acts on physical data as ``scale**2 * k(scale * s)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .filterbank import KernelBank, RampKernel
from .phantom import Sinogram
from .radial2d import GridSpec, ImageGrid, KernelLabel, TruncationWarning
from .wavelet1d import SampledProfile1D


@dataclass(frozen=True)
class ROI:
    """Disk of interest in physical coordinates plus the data margin around it."""

    center: tuple[float, float]
    radius: float
    margin: float

    @classmethod
    def from_pixels(cls, spec: GridSpec, radius_px: float, margin_px: float,
                    center=(0.0, 0.0)) -> "ROI":
        h = spec.pixel_size
        return cls(tuple(map(float, center)), radius_px * h, margin_px * h)

    def mask(self, spec: GridSpec, shrink: float = 0.0) -> np.ndarray:
        X, Y = spec.mesh()
        return np.hypot(X - self.center[0], Y - self.center[1]) <= self.radius - shrink


@dataclass
class ReconPlan:
    J: int
    Jmax: int
    bank: KernelBank
    grid: GridSpec
    roi: ROI | None = None
    scale: float | None = None
    resample: str = "bandlimited"

    def __post_init__(self):
        if self.Jmax < self.J - 1:
            raise ValueError("need Jmax >= J - 1 (J - 1 keeps only the approximation)")
        if self.scale is None:
            self.scale = 1.0 / self.grid.pixel_size
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.roi is not None and self.roi.radius + self.roi.margin > self.grid.extent:
            raise ValueError("roi radius + margin exceeds the grid extent")

    def terms(self) -> list[tuple[str, KernelLabel, float]]:
        """(component name, kernel label, weight) of the truncated expansion."""
        J = self.J
        out = [("approx", KernelLabel("scaling", J, J), 1.0)]
        details = range(J, self.Jmax + 1)
        out += [(f"h_{j}", KernelLabel("horizontal", J, j), 2.0) for j in details]
        out += [(f"d_{j}_{k}", KernelLabel("diagonal", j, k), 1.0) for j in details for k in details]
        return out


@dataclass
class ReconResult:
    image: ImageGrid
    components: dict[str, ImageGrid] = field(default_factory=dict)


def bandlimit(kern: RampKernel, nyquist: float) -> RampKernel:
    """Remove the kernel's content above ``nyquist`` (cycles per wavelet unit)."""
    if nyquist >= kern.band_limit:
        return kern
    v = np.asarray(kern.profile.values)
    m = (len(v) - 1) // 2
    n = 2 * m + 2
    buf = np.zeros(n)
    buf[: m + 1] = v[m:]
    buf[m + 2:] = v[:m]
    spec = np.fft.rfft(buf)
    spec[np.fft.rfftfreq(n, kern.step) > nyquist] = 0.0
    out = np.fft.irfft(spec, n)
    vals = np.concatenate([out[m + 2:], out[: m + 1]])
    vals = 0.5 * (vals + vals[::-1])
    return RampKernel(SampledProfile1D(kern.profile.start, kern.step, vals), kern.source, nyquist)


def detector_kernel(kern: RampKernel, dt: float, scale: float, n_lags: int,
                    method: str = "bandlimited") -> np.ndarray:
    """Discrete convolution weights at lags ``m * dt`` for m = -n_lags..n_lags.

    ``linear`` interpolates the physical kernel at the lags (times dt).
    ``bandlimited`` first removes everything above the detector Nyquist
    frequency, so kernel content the detector grid cannot carry does not
    alias back. ``cell`` averages the kernel over each detector cell.
    """
    lags = dt * np.arange(-n_lags, n_lags + 1)
    if method == "bandlimited":
        kern = bandlimit(kern, 0.5 / (scale * dt))
        method = "linear"
    if method == "linear":
        return scale**2 * kern.profile(scale * lags) * dt
    if method == "cell":
        grid, cum = kern.antiderivative()
        edges = scale * np.concatenate([lags - 0.5 * dt, [lags[-1] + 0.5 * dt]])
        c = np.interp(edges, grid, cum)
        return scale * np.diff(c)
    raise ValueError(f"unknown resampling method {method!r}")


def _check_angles(angles: np.ndarray) -> None:
    n = len(angles)
    if n < 2 or not np.allclose(angles, np.arange(n) * (math.pi / n) + angles[0], atol=1e-9):
        raise ValueError("angles must be uniform over [0, pi)")


def backproject(filtered: np.ndarray, angles, offsets, spec: GridSpec) -> ImageGrid:
    """Sum over angles of the filtered projections at x . u_theta, times pi / n."""
    angles = np.asarray(angles, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    X, Y = spec.mesh()
    acc = np.zeros_like(X)
    for a, th in enumerate(angles):
        t = X * math.cos(th) + Y * math.sin(th)
        acc += np.interp(t, offsets, filtered[a], left=0.0, right=0.0)
    return ImageGrid(spec, acc * (math.pi / len(angles)))


def _check_coverage(sino: Sinogram, spec: GridSpec) -> None:
    diag = math.sqrt(2.0) * spec.extent
    if min(-sino.offsets[0], sino.offsets[-1]) < diag - 1e-9:
        warnings.warn(
            f"detector range [{sino.offsets[0]:g}, {sino.offsets[-1]:g}] is shorter than the "
            f"grid diagonal {diag:g}; truncation artifacts expected",
            TruncationWarning, stacklevel=3)


def filter_sinogram(sino: Sinogram, weights: np.ndarray) -> np.ndarray:
    """Linear (zero-padded) convolution of every projection with the centered weights."""
    n_lags = (len(weights) - 1) // 2
    full = fftconvolve(sino.values, weights[None, :], mode="full", axes=1)
    return full[:, n_lags:n_lags + len(sino.offsets)]


def filtered_backprojection(sino: Sinogram, kern: RampKernel, grid: GridSpec,
                            scale: float | None = None, method: str = "bandlimited") -> ImageGrid:
    """f * eta on ``grid`` from parallel-beam data over [0, pi)."""
    _check_angles(sino.angles)
    _check_coverage(sino, grid)
    if scale is None:
        scale = 1.0 / grid.pixel_size
    w = detector_kernel(kern, sino.detector_step, scale, len(sino.offsets) - 1, method)
    return backproject(filter_sinogram(sino, w), sino.angles, sino.offsets, grid)


def _combined_weights(sino: Sinogram, plan: ReconPlan, terms) -> np.ndarray:
    n_lags = len(sino.offsets) - 1
    total = np.zeros(2 * n_lags + 1)
    for _, label, weight in terms:
        total += weight * detector_kernel(plan.bank.kernel(label), sino.detector_step,
                                          plan.scale, n_lags, plan.resample)
    return total


def multilevel_reconstruct(sino: Sinogram, plan: ReconPlan,
                           components: bool = False) -> ReconResult:
    """Approximation at scale J plus horizontal and diagonal details up to Jmax.

    The kernels are summed before filtering, so the total costs a single
    backprojection; ``components=True`` also backprojects every term.
    """
    _check_angles(sino.angles)
    _check_coverage(sino, plan.grid)
    terms = plan.terms()
    for _, label, _ in terms:
        plan.bank[label]  # raises BankMissError before any work is done
    image = backproject(filter_sinogram(sino, _combined_weights(sino, plan, terms)),
                        sino.angles, sino.offsets, plan.grid)
    parts = {}
    if components:
        for name, label, weight in terms:
            w = _combined_weights(sino, plan, [(name, label, weight)])
            parts[name] = backproject(filter_sinogram(sino, w), sino.angles, sino.offsets,
                                      plan.grid)
    return ReconResult(image, parts)


def widest_half_support(plan: ReconPlan) -> float:
    """Largest nominal kernel radius of the plan, in physical units."""
    return max(plan.bank.radial(label).support_radius for _, label, _ in plan.terms()) / plan.scale


def truncate_sinogram(sino: Sinogram, roi: ROI) -> Sinogram:
    """Zero every ray farther than radius + margin from the ROI center."""
    proj_c = roi.center[0] * np.cos(sino.angles) + roi.center[1] * np.sin(sino.angles)
    keep = np.abs(sino.offsets[None, :] - proj_c[:, None]) <= roi.radius + roi.margin
    return sino.with_values(np.where(keep, sino.values, 0.0))


def interior_reconstruct(sino: Sinogram, plan: ReconPlan,
                         components: bool = False) -> ReconResult:
    """Multilevel reconstruction from rays near the ROI only, masked to the ROI."""
    roi = plan.roi
    if roi is None:
        raise ValueError("interior reconstruction needs plan.roi")
    need = widest_half_support(plan)
    if roi.margin < need:
        warnings.warn(
            f"margin {roi.margin:g} is below the widest kernel half-support; "
            f"the kernels need a margin of {need:g}", TruncationWarning, stacklevel=2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = multilevel_reconstruct(truncate_sinogram(sino, roi), plan, components)
    mask = roi.mask(plan.grid)

    def cut(img: ImageGrid) -> ImageGrid:
        return ImageGrid(img.spec, np.where(mask, img.values, 0.0))

    return ReconResult(cut(res.image), {k: cut(v) for k, v in res.components.items()})


def relative_error(f: ImageGrid, fr: ImageGrid, mask=None) -> float:
    """||f - fr||_2 / ||f||_2 over all pixels (or over ``mask``)."""
    if f.spec != fr.spec:
        raise ValueError("images live on different grids")
    a, b = f.values, fr.values
    if mask is not None:
        a, b = a[mask], b[mask]
    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        raise ValueError("relative error undefined: reference image has zero norm")
    return float(np.linalg.norm(a - b)) / norm
