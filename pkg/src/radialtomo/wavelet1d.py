"""Daubechies filters, cascade sampling and autocorrelation profiles.

Profiles are stored on uniform grids (``start + i * step``) and evaluated by
linear interpolation with zero extension outside the sampled support.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numpy as np
from scipy.special import comb

MAX_ORDER = 10
DEFAULT_LEVELS = 10


class ConvergenceError(ArithmeticError):
    """Raised when the cascade refinement does not settle."""


@dataclass(frozen=True)
class FilterPair:
    """Orthonormal low-pass/high-pass pair of a Daubechies wavelet."""

    order: int
    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.h.setflags(write=False)
        self.g.setflags(write=False)

    @property
    def length(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class SampledProfile1D:
    """Compactly supported 1D function sampled at ``start + i * step``."""

    start: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def stop(self) -> float:
        return self.start + (len(self.values) - 1) * self.step

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(len(self.values))

    @property
    def half_width(self) -> float:
        """Largest |x| covered by the sampled support."""
        return max(abs(self.start), abs(self.stop))

    def __call__(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)

    def integral(self) -> float:
        # endpoints vanish, so the trapezoid rule reduces to a plain sum
        return float(self.step * np.sum(self.values))

    def to_csv(self, path) -> None:
        write_columns_csv(path, ("x", "value"), self.grid, self.values)


def write_columns_csv(path, header, *columns) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([f"{float(v):.17g}" for v in row])


def read_profile_csv(path) -> SampledProfile1D:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, v = data[:, 0], data[:, 1]
    step = (x[-1] - x[0]) / (len(x) - 1) if len(x) > 1 else 1.0
    return SampledProfile1D(float(x[0]), float(step), v)


def _extremal_phase_lowpass(order: int) -> np.ndarray:
    """Spectral factorization of the Daubechies half-band polynomial.

    P(y) = sum_k C(N-1+k, k) y^k with y = (2 - z - 1/z) / 4; the zeros inside
    the unit circle give the extremal-phase filter. Done in 60-digit
    arithmetic so orders up to 10 keep orthonormality at machine precision.
    """
    with mpmath.workdps(60):
        poly_y = [mpmath.mpf(int(comb(order - 1 + k, k, exact=True)))
                  for k in reversed(range(order))]
        y_roots = mpmath.polyroots(poly_y, maxsteps=200, extraprec=200)
        zeros = [mpmath.mpf(-1)] * order
        for y in y_roots:
            # z + 1/z = 2 - 4y, keep the root inside the unit circle
            b = 2 - 4 * y
            disc = mpmath.sqrt(b * b - 4)
            z1, z2 = (b + disc) / 2, (b - disc) / 2
            zeros.append(z1 if abs(z1) < 1 else z2)
        coeffs = [mpmath.mpc(1)]
        for z in zeros:
            coeffs = [a - z * b for a, b in zip(coeffs + [0], [0] + coeffs)]
        coeffs = [mpmath.re(c) for c in coeffs]
        scale = mpmath.sqrt(2) / mpmath.fsum(coeffs)
        return np.array([float(c * scale) for c in coeffs])


def daubechies_filter(order: int) -> FilterPair:
    """Extremal-phase Daubechies filter pair ``dbN`` with ``2N`` taps.

    Parameters
    ----------
    order : int
        Number of vanishing moments, 1 to 10.

    Returns
    -------
    FilterPair
        ``h`` sums to sqrt(2); ``g[k] = (-1)**k * h[2N-1-k]``.
    """
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise TypeError("order must be an integer")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}], got {order}")
    order = int(order)
    if order == 1:
        h = np.array([1.0, 1.0]) / math.sqrt(2.0)
    elif order == 2:
        s3 = math.sqrt(3.0)
        h = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4.0 * math.sqrt(2.0))
    else:
        h = _extremal_phase_lowpass(order)
    g = ((-1.0) ** np.arange(len(h))) * h[::-1]
    return FilterPair(order, h.copy(), g)


def _refine(coarse: np.ndarray, c: np.ndarray, spacing: int, size: int) -> np.ndarray:
    """Evaluate sum_k c_k f(2x - k) on the next dyadic grid.

    On the fine grid x = i 2^-l, the argument 2x - k sits at index
    ``i - k * spacing`` of the coarse grid, with ``spacing = 2^(l-1)``.
    """
    out = np.zeros(size)
    for k, ck in enumerate(c):
        lo = k * spacing
        hi = min(size, lo + len(coarse))
        if hi > lo:
            out[lo:hi] += ck * coarse[: hi - lo]
    return out


def cascade(filters: FilterPair, levels: int = DEFAULT_LEVELS):
    """Sample the scaling function and wavelet on the grid ``i * 2**-levels``.

    Classic cascade: start from the box function on [0, 1) and apply the
    refinement equation ``levels`` times. The iterates are scaled iterated
    filters of an orthonormal bank, so their integer shifts stay exactly
    orthonormal at every level.

    Returns
    -------
    phi, psi : SampledProfile1D
        Both supported on ``[0, 2N-1]``.

    Raises
    ------
    ConvergenceError
        If the L2 distance between successive iterates stops shrinking.
    """
    if levels < 4:
        raise ValueError("levels must be >= 4")
    n = filters.length
    span = n - 1
    c = math.sqrt(2.0) * np.asarray(filters.h)
    d = math.sqrt(2.0) * np.asarray(filters.g)
    phi = np.zeros(n)
    phi[0] = 1.0
    last_gap = np.inf
    prev = phi
    for lev in range(1, levels + 1):
        size = span * 2**lev + 1
        spacing = 2 ** (lev - 1)
        if lev == levels:
            psi = _refine(prev, d, spacing, size)
        cur = _refine(prev, c, spacing, size)
        # L2 gap to the linear interpolant of the previous level
        x_new = np.arange(size) / 2**lev
        x_old = np.arange(len(prev)) / spacing
        gap = math.sqrt(np.sum((cur - np.interp(x_new, x_old, prev)) ** 2) / 2**lev)
        if not np.isfinite(gap) or (lev >= 4 and gap > last_gap):
            raise ConvergenceError(
                f"cascade does not converge: level {lev} gap {gap:.3g} >= {last_gap:.3g}")
        last_gap = gap
        prev = cur
    step = 2.0**-levels
    return SampledProfile1D(0.0, step, prev), SampledProfile1D(0.0, step, psi)


def autocorrelate(p: SampledProfile1D) -> SampledProfile1D:
    """q(x) = integral p(t) p(t - x) dt, sampled on the symmetric grid.

    Direct discrete correlation scaled by the step; the result is mirrored so
    that q(x) == q(-x) holds bitwise.
    """
    v = np.asarray(p.values)
    q = np.correlate(v, v, mode="full") * p.step
    q = 0.5 * (q + q[::-1])
    half = (len(v) - 1) * p.step
    return SampledProfile1D(-half, p.step, q)


def dilate(p: SampledProfile1D, j: int) -> SampledProfile1D:
    """x -> 2^j p(2^j x); the integral is preserved exactly."""
    s = 2.0 ** int(j)
    return SampledProfile1D(p.start / s, p.step / s, np.asarray(p.values) * s)


@dataclass(frozen=True)
class AutocorrelationPair:
    """Autocorrelation scaling function and wavelet (Phi, Psi) of one dbN."""

    order: int
    levels: int
    Phi: SampledProfile1D
    Psi: SampledProfile1D

    def scaling(self, j: int) -> SampledProfile1D:
        return dilate(self.Phi, j)

    def wavelet(self, j: int) -> SampledProfile1D:
        return dilate(self.Psi, j)


def autocorrelation_pair(order: int = 6, levels: int = DEFAULT_LEVELS) -> AutocorrelationPair:
    phi, psi = cascade(daubechies_filter(order), levels)
    return AutocorrelationPair(order, levels, autocorrelate(phi), autocorrelate(psi))
