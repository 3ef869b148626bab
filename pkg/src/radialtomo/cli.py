"""Command-line entry point: ``radialtomo <subcommand> [options]``.

Every run is described by a :class:`RunConfig`, read from a ``key = value``
file (``--config``) and overridden by flags of the same name.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import checks, export
from .filterbank import BankMissError, KernelBank, build_bank, energy_leakage
from .phantom import (EllipsePhantom, Sinogram, default_angles, disk, load_phantom,
                      radon_numeric, shepp_logan, sinogram_analytic)
from .radial2d import KINDS, GridSpec, KernelLabel, TruncationWarning
from .recon import ROI, ReconPlan, interior_reconstruct, multilevel_reconstruct, relative_error
from .wavelet1d import MAX_ORDER

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3
EXIT_MISSING = 4

FORMATS = ("pgm", "png", "csv")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    order: int = 6
    levels: int = 10
    n_angles: int = 512
    projections: int = 1440
    detector_step: float = 0.125  # in pixels
    grid: int = 183
    J: int = 0
    Jmax: int = 2
    roi_radius: float = 16.0  # pixels
    roi_margin: float = 8.0  # pixels
    roi_center_x: float = 0.0
    roi_center_y: float = 0.0
    phantom: str = "shepp-logan"
    bank: str = "bank"
    out: str = "out"
    formats: str = "pgm,png,csv"
    resample: str = "bandlimited"
    half_window: float = 512.0
    workers: int = 1

    def validate(self) -> "RunConfig":
        if not 1 <= self.order <= MAX_ORDER:
            raise UsageError(f"order must be in [1, {MAX_ORDER}], got {self.order}")
        if not 4 <= self.levels <= 16:
            raise UsageError(f"levels must be in [4, 16], got {self.levels}")
        if self.n_angles < 8 or self.n_angles % 4:
            raise UsageError("n_angles must be a multiple of 4 and >= 8")
        if self.projections < 2:
            raise UsageError("projections must be >= 2")
        if not self.detector_step > 0:
            raise UsageError("detector_step must be positive")
        if self.grid < 8:
            raise UsageError("grid must be >= 8 pixels")
        if self.J > self.Jmax:
            raise UsageError("need J <= Jmax")
        if self.roi_radius <= 0 or self.roi_margin < 0:
            raise UsageError("roi_radius must be positive and roi_margin non-negative")
        if not set(self.format_list()) <= set(FORMATS):
            raise UsageError(f"formats must be drawn from {','.join(FORMATS)}")
        if self.resample not in ("bandlimited", "linear", "cell"):
            raise UsageError("resample must be bandlimited, linear or cell")
        if not self.half_window > 0 or self.workers < 1:
            raise UsageError("half_window must be positive and workers >= 1")
        return self

    def format_list(self) -> list[str]:
        return [f for f in self.formats.split(",") if f]

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"config line {lineno}: expected key = value")
            cfg.set(key.strip(), val.strip())
        return cfg

    def set(self, key: str, value: str) -> None:
        types = {f.name: f.type for f in fields(self)}
        if key not in types:
            raise UsageError(f"unknown config key {key!r}")
        conv = {"int": int, "float": float, "str": str}[types[key]]
        try:
            setattr(self, key, conv(value))
        except ValueError:
            raise UsageError(f"bad value for {key}: {value!r}") from None

    # derived geometry
    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid)

    def detector_offsets(self) -> np.ndarray:
        spec = self.grid_spec()
        dt = self.detector_step * spec.pixel_size
        half = int(math.ceil(math.sqrt(2.0) * spec.extent / dt))
        return dt * np.arange(-half, half + 1)

    def roi(self) -> ROI:
        return ROI.from_pixels(self.grid_spec(), self.roi_radius, self.roi_margin,
                               (self.roi_center_x, self.roi_center_y))


def make_phantom(name: str) -> EllipsePhantom:
    if name == "shepp-logan":
        return shepp_logan()
    if name == "disk":
        return disk(0.5)
    path = Path(name)
    if not path.is_file():
        raise FileNotFoundError(f"phantom {name!r} is neither built in nor a file")
    return load_phantom(path)


def write_image(img, out: Path, stem: str, cfg: RunConfig) -> None:
    for fmt in cfg.format_list():
        target = out / f"{stem}.{fmt}"
        if fmt == "pgm":
            export.write_pgm(img, target)
        elif fmt == "png":
            export.write_png(img, target)
        else:
            export.write_image_csv(img, target)


def _load_bank(cfg: RunConfig) -> KernelBank:
    return KernelBank.load(cfg.bank)


def _sinogram(cfg: RunConfig, args) -> tuple[Sinogram, EllipsePhantom | None]:
    if getattr(args, "sinogram", None):
        path = Path(args.sinogram)
        if not path.is_file():
            raise FileNotFoundError(f"no sinogram at {path}")
        return export.read_sinogram_csv(path), None
    ph = make_phantom(cfg.phantom)
    return sinogram_analytic(ph, default_angles(cfg.projections), cfg.detector_offsets()), ph


# ---------------------------------------------------------------- commands


def cmd_build_bank(cfg: RunConfig, args) -> int:
    t0 = time.perf_counter()
    bank = build_bank(cfg.order, cfg.J, cfg.Jmax, levels=cfg.levels, n_angles=cfg.n_angles,
                      half_window=cfg.half_window, workers=cfg.workers)
    out = bank.save(cfg.bank)
    print(f"wrote {len(bank.entries)} kernels to {out} in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK


def cmd_phantom(cfg: RunConfig, args) -> int:
    ph = make_phantom(cfg.phantom)
    out = Path(cfg.out)
    img = ph.rasterize(cfg.grid_spec(), supersample=args.supersample)
    out.mkdir(parents=True, exist_ok=True)
    write_image(img, out, "phantom", cfg)
    (out / "phantom.txt").write_text(ph.to_table())
    print(f"wrote phantom {cfg.phantom} ({cfg.grid}x{cfg.grid}) to {out}")
    return EXIT_OK


def cmd_radon(cfg: RunConfig, args) -> int:
    ph = make_phantom(cfg.phantom)
    angles, offsets = default_angles(cfg.projections), cfg.detector_offsets()
    if args.numeric:
        sino = radon_numeric(ph.rasterize(cfg.grid_spec()), angles, offsets)
    else:
        sino = sinogram_analytic(ph, angles, offsets)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    export.write_sinogram_csv(sino, out / "sinogram.csv")
    print(f"wrote {sino.values.shape[0]}x{sino.values.shape[1]} sinogram to {out / 'sinogram.csv'}")
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig, args) -> int:
    bank = _load_bank(cfg)
    sino, ph = _sinogram(cfg, args)
    spec = cfg.grid_spec()
    plan = ReconPlan(cfg.J, cfg.Jmax, bank, spec, resample=cfg.resample)
    result = multilevel_reconstruct(sino, plan, components=True)
    rows = []
    if ph is not None:
        ref = ph.rasterize(spec)
        for jmax in range(cfg.J - 1, cfg.Jmax + 1):
            part = multilevel_reconstruct(
                sino, dataclasses.replace(plan, Jmax=jmax, scale=plan.scale)).image
            rows.append((jmax, relative_error(ref, part)))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_image(result.image, out, "reconstruction", cfg)
    for name, img in result.components.items():
        write_image(img, out, name, cfg)
    if rows:
        export.write_table_csv(out / "metrics.csv", ("Jmax", "relative_error"), rows)
        for jmax, err in rows:
            print(f"J={cfg.J} Jmax={jmax} relative_error={err:.6g}")
    (out / "config.txt").write_text(cfg.to_text())
    return EXIT_OK


def cmd_interior(cfg: RunConfig, args) -> int:
    bank = _load_bank(cfg)
    sino, ph = _sinogram(cfg, args)
    spec = cfg.grid_spec()
    roi = cfg.roi()
    plan = ReconPlan(cfg.J, cfg.Jmax, bank, spec, roi=roi, resample=cfg.resample)
    inner = interior_reconstruct(sino, plan, components=True)
    rows = []
    if ph is not None:
        ref = ph.rasterize(spec)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            full = multilevel_reconstruct(sino, plan).image
        mask = roi.mask(spec)
        rim = roi.mask(spec, shrink=2 * spec.pixel_size)
        e_full = relative_error(ref, full, mask)
        e_int = relative_error(ref, inner.image, mask)
        rows = [("roi_error_full_data", e_full), ("roi_error_interior", e_int),
                ("interior_over_full", e_int / e_full),
                ("interior_vs_full_inner_roi", relative_error(full, inner.image, rim))]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_image(inner.image, out, "interior", cfg)
    for name, img in inner.components.items():
        write_image(img, out, f"interior_{name}", cfg)
    if rows:
        export.write_table_csv(out / "interior_metrics.csv", ("metric", "value"), rows)
        for name, val in rows:
            print(f"{name}={val:.6g}")
    (out / "config.txt").write_text(cfg.to_text())
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    results = checks.run_checks(cfg.order, cfg.levels, cfg.n_angles,
                                corrupt_filter=args.corrupt_filter)
    for r in results:
        print(r.line())
    if args.report:
        export.write_table_csv(args.report, ("check", "value", "threshold", "status"),
                               [(r.name, r.value, r.threshold, "PASS" if r.passed else "FAIL")
                                for r in results])
    ok = all(r.passed for r in results)
    print("overall", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_leakage(cfg: RunConfig, args) -> int:
    label = KernelLabel(args.kind, args.j, args.k)
    bank = build_bank(cfg.order, levels=cfg.levels, n_angles=cfg.n_angles,
                      half_window=cfg.half_window, labels=[label])
    entry = bank[label]
    radius = entry.radial.support_radius if args.radius is None else args.radius
    energy = energy_leakage(entry.kernel, radius)
    norm = energy_leakage(entry.kernel, radius, measure="norm")
    print(f"kernel={label.key} support_radius={radius:.6g} "
          f"energy_leakage_percent={energy:.6g} norm_leakage_percent={norm:.6g}")
    return EXIT_OK


COMMANDS = {
    "build-bank": (cmd_build_bank, "build radial kernels and ramp filters into a bank directory"),
    "phantom": (cmd_phantom, "rasterize a phantom"),
    "radon": (cmd_radon, "write the sinogram of a phantom"),
    "reconstruct": (cmd_reconstruct, "multilevel reconstruction with per-term images"),
    "interior": (cmd_interior, "reconstruct a region of interest from truncated data"),
    "verify": (cmd_verify, "run the numerical self-checks"),
    "leakage": (cmd_leakage, "energy of a ramp-filtered kernel outside its support"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radialtomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value file")
        for f in fields(RunConfig):
            p.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cfg_{f.name}",
                           metavar=f.type.upper(), default=None)
        if name in ("reconstruct", "interior"):
            p.add_argument("--sinogram", help="sinogram CSV instead of the configured phantom")
        if name == "phantom":
            p.add_argument("--supersample", type=int, default=1)
        if name == "radon":
            p.add_argument("--numeric", action="store_true",
                           help="integrate the rasterized phantom instead of the exact chords")
        if name == "verify":
            p.add_argument("--corrupt-filter", action="store_true",
                           help="perturb one filter tap (negative control)")
            p.add_argument("--report", help="also write the results as CSV")
        if name == "leakage":
            p.add_argument("--kind", choices=KINDS, default="scaling")
            p.add_argument("--j", type=int, default=0)
            p.add_argument("--k", type=int, default=0)
            p.add_argument("--radius", type=float, default=None,
                           help="support radius in wavelet units (default: nominal)")
    return parser


def load_config(args) -> RunConfig:
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"no config file at {path}")
        cfg = RunConfig.from_text(path.read_text())
    else:
        cfg = RunConfig()
    for f in fields(RunConfig):
        val = getattr(args, f"cfg_{f.name}")
        if val is not None:
            cfg.set(f.name, val)
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command][0](cfg, args)
    except UsageError as exc:
        print(f"radialtomo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BankMissError, FileNotFoundError) as exc:
        print(f"radialtomo: error: {exc}", file=sys.stderr)
        return EXIT_MISSING


if __name__ == "__main__":
    sys.exit(main())
