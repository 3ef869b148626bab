"""File formats: PGM/PNG images, CSV matrices, sinograms and metric tables."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

from .phantom import Sinogram
from .radial2d import GridSpec, ImageGrid


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def quantize(values: np.ndarray, bits: int, window=None) -> np.ndarray:
    """Map ``window = (lo, hi)`` (default: data range) linearly onto 0..2**bits-1."""
    values = np.asarray(values, dtype=float)
    lo, hi = window if window is not None else (values.min(), values.max())
    top = 2**bits - 1
    if hi <= lo:
        return np.zeros(values.shape, dtype=np.uint16 if bits > 8 else np.uint8)
    scaled = np.clip((values - lo) / (hi - lo), 0.0, 1.0) * top
    return np.rint(scaled).astype(np.uint16 if bits > 8 else np.uint8)


def _rows_top_down(img: ImageGrid) -> np.ndarray:
    # row 0 of the grid is y = -extent; images are stored with +y at the top
    return img.values[::-1]


def write_pgm(img: ImageGrid, path, window=None) -> None:
    """16-bit binary PGM."""
    Image.fromarray(quantize(_rows_top_down(img), 16, window)).save(Path(path), format="PPM")


def write_png(img: ImageGrid, path, window=None) -> None:
    """8-bit grayscale PNG for viewing."""
    Image.fromarray(quantize(_rows_top_down(img), 8, window)).save(Path(path), format="PNG")


def read_pgm(path) -> np.ndarray:
    """Raw integer samples of a PGM, top row first."""
    with Image.open(path) as im:
        return np.array(im)


def write_image_csv(img: ImageGrid, path) -> None:
    """Pixel values, one grid row per line, row 0 at y = -extent."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        for row in img.values:
            w.writerow([_fmt(v) for v in row])


def read_image_csv(path, extent: float = 1.0) -> ImageGrid:
    vals = np.loadtxt(path, delimiter=",", ndmin=2)
    return ImageGrid(GridSpec(vals.shape[0], extent), vals)


def write_sinogram_csv(sino: Sinogram, path) -> None:
    """First row: ``theta`` then the detector offsets; one row per angle after that."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", *(_fmt(t) for t in sino.offsets)])
        for th, row in zip(sino.angles, sino.values):
            w.writerow([_fmt(th), *(_fmt(v) for v in row)])


def read_sinogram_csv(path) -> Sinogram:
    with Path(path).open() as fh:
        header = next(csv.reader(fh))
    if not header or header[0] != "theta":
        raise ValueError(f"{path}: not a sinogram table")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    offsets = np.array([float(v) for v in header[1:]])
    return Sinogram(data[:, 0], offsets, data[:, 1:])


def write_table_csv(path, header, rows) -> None:
    """Generic table; floats get 17 significant digits, everything else ``str``."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in row])
