"""Radial autocorrelation-wavelet kernels for filtered back-projection."""

__version__ = "0.1.0"
