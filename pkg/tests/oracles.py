"""Reference computations that share no code path with the package internals."""

import math
import warnings

import numpy as np
from scipy import integrate


def direct_transform(x, values, step, freqs):
    """Riemann sum of integral f(t) exp(-2 pi i t w) dt, one frequency at a time."""
    return np.array([np.sum(values * np.exp(-2j * math.pi * w * x)) * step for w in freqs])


def angular_average_quad(p, q, r, pieces=16):
    """(1/2pi) * integral over the circle by adaptive quadrature on ``pieces`` arcs.

    The interpolated profiles have a kink at every sample, which makes QUADPACK
    report roundoff; callers check stability by varying ``pieces``.
    """
    def f(t):
        return float(p(r * math.cos(t)) * q(r * math.sin(t)))
    edges = np.linspace(0.0, 2.0 * math.pi, pieces + 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total = sum(integrate.quad(f, a, b, limit=400, epsabs=1e-11)[0]
                    for a, b in zip(edges, edges[1:]))
    return total / (2.0 * math.pi)


def disk_convolution(radial, radii, a, center, X, Y):
    """(1_disk * eta)(x) by polar quadrature around every point x.

    The circle of radius r around x meets the disk (radius a) in an arc of
    angle 2 arccos((r^2 + d^2 - a^2) / (2 r d)), d = |x - center|, so the 2D
    convolution reduces to a 1D integral over r of eta(r) r arc(r).
    """
    d = np.hypot(X - center[0], Y - center[1]).ravel()
    step = radii[1] - radii[0]
    w = radial * radii * step
    w[-1] *= 0.5
    reach = radii[-1]
    out = np.zeros(len(d))
    inner = d <= a - reach
    out[inner] = 2.0 * math.pi * w.sum()
    idx = np.nonzero(~inner & (d < a + reach))[0]
    rows = max(1, (1 << 22) // len(radii))
    for lo in range(0, len(idx), rows):
        ii = idx[lo:lo + rows]
        dd = np.maximum(d[ii, None], 1e-300)
        c = (radii[None, :] ** 2 + dd**2 - a * a) / (2.0 * radii[None, :] * dd + 1e-300)
        out[ii] = (2.0 * np.arccos(np.clip(c, -1.0, 1.0))) @ w
    return out.reshape(X.shape)


def disk_chord(t, radius=1.0, center_shift=0.0):
    t = np.asarray(t, dtype=float) - center_shift
    return 2.0 * np.sqrt(np.maximum(radius**2 - t**2, 0.0))
