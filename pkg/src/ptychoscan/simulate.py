"""Scan-grid construction, the far-field forward model, Poisson-noise
calibration, and dataset packaging.

The forward model per probe position l is ``y_l = |F(p * o_l)|^2`` where
``o_l`` is the detector-sized window of the object at that position and F is
the centered unitary DFT.  Noisy datasets carry integer Poisson counts; the
calibration scale that realizes the target mean SNR is folded into the stored
probe (a single global adjustment of the probe intensity), so data and probe
stay mutually consistent.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import BundleFormatError, IntensityError
from .field import WindowOffset, as_field, crop_window, dft2_unitary, read_c64, write_c64
from .geometry import inverse_overlap_approx, overlap_ratio
from .probe import ProbeSpec, spec_meta, synthesize_probe

PATTERNS_MAGIC = b"PTYD"
PATTERNS_VERSION = 1
FORMAT_VERSION = 1

# Poisson means above this overflow the practical range of the sampler.
MAX_POISSON_MEAN = 1e12


def read_grayscale(path) -> np.ndarray:
    """Load a grayscale raster (binary PGM, 8 or 16 bit; PNG also accepted)."""
    with Image.open(path) as img:
        if img.mode not in ("L", "I", "I;16", "F"):
            img = img.convert("L")
        return np.asarray(img, dtype=np.float64)


def load_phase_object(image, phase_min: float = 0.0, phase_max: float = math.pi / 2) -> np.ndarray:
    """Map a grayscale image linearly onto phases and return exp(i*phase).

    The image's [min, max] range maps to [phase_min, phase_max]; every sample
    of the result has unit amplitude.  A constant image has no range to map,
    so its phase is set to the interval midpoint with a warning.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"image must be a non-empty 2D array, got shape {arr.shape}")
    if not phase_min < phase_max:
        raise ValueError(f"need phase_min < phase_max, got [{phase_min}, {phase_max}]")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        warnings.warn("constant image: mapping all pixels to the midpoint phase")
        phase = np.full(arr.shape, 0.5 * (phase_min + phase_max))
    else:
        phase = phase_min + (arr - lo) * ((phase_max - phase_min) / (hi - lo))
    return np.exp(1j * phase)


def pad_symmetric(obj, pad_px: int) -> np.ndarray:
    """Mirror-reflect padding on all four sides; the center stays bit-identical."""
    o = as_field(obj)
    p = int(pad_px)
    if p < 0:
        raise ValueError(f"padding must be non-negative, got {p}")
    if p > min(o.shape):
        raise ValueError(
            f"padding {p} exceeds the field size {o.shape}; reflection is undefined"
        )
    if p == 0:
        return o.copy()
    return np.pad(o, p, mode="symmetric")


@dataclass(frozen=True)
class ScanGrid:
    """Regular raster of detector-sized windows on the padded object canvas."""

    step_px: int
    rows: int
    cols: int
    offsets: tuple[WindowOffset, ...]
    probe_radius_px: float
    rho_requested: float
    rho_achieved: float
    pad_px: int
    canvas: tuple[int, int]
    detector: tuple[int, int]
    origin: tuple[int, int]

    @property
    def n_positions(self) -> int:
        return self.rows * self.cols


def default_pad_px(detector_w: int) -> int:
    """Default symmetric padding: 85% of the detector width."""
    return round(0.85 * detector_w)


def _as_dims(dims) -> tuple[int, int]:
    if np.isscalar(dims):
        return int(dims), int(dims)
    h, w = dims
    return int(h), int(w)


def build_scan_grid(
    object_dims,
    detector_dims,
    probe_radius_px: float,
    rho: float,
    pad_px: Optional[int] = None,
) -> ScanGrid:
    """Construct the maximal centered raster for a target overlap ratio.

    The step is d = max(1, round(2 * probe_radius_px * gamma)) with gamma from
    the approximate inverse of the overlap function; the raster is the largest
    grid of detector-sized windows that fits the padded canvas, centered on it.
    ``rho_achieved`` records the overlap implied by the quantized step.
    """
    oh, ow = _as_dims(object_dims)
    dh, dw = _as_dims(detector_dims)
    if probe_radius_px < 4:
        raise ValueError(f"probe radius must be at least 4 px, got {probe_radius_px}")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"overlap ratio must be in [0, 1), got {rho}")
    if pad_px is None:
        pad_px = default_pad_px(dw)
    ch, cw = oh + 2 * pad_px, ow + 2 * pad_px
    if dh > ch or dw > cw:
        raise ValueError(f"detector {dh}x{dw} exceeds padded canvas {ch}x{cw}")
    gamma = inverse_overlap_approx(rho)
    d = max(1, round(2 * probe_radius_px * gamma))
    rows = (ch - dh) // d + 1
    cols = (cw - dw) // d + 1
    origin = ((ch - dh - (rows - 1) * d) // 2, (cw - dw - (cols - 1) * d) // 2)
    offsets = tuple(
        WindowOffset(origin[0] + i * d, origin[1] + j * d)
        for i in range(rows)
        for j in range(cols)
    )
    return ScanGrid(
        step_px=d,
        rows=rows,
        cols=cols,
        offsets=offsets,
        probe_radius_px=float(probe_radius_px),
        rho_requested=float(rho),
        rho_achieved=overlap_ratio(min(1.0, d / (2.0 * probe_radius_px))),
        pad_px=int(pad_px),
        canvas=(ch, cw),
        detector=(dh, dw),
        origin=origin,
    )


def forward_pattern(obj, probe, offset) -> np.ndarray:
    """Diffraction pattern |F(p * o_l)|^2 for the window at ``offset``."""
    p = as_field(probe)
    window = crop_window(obj, offset, p.shape[0], p.shape[1])
    wave = dft2_unitary(p * window)
    return np.abs(wave) ** 2


def expected_poisson_snr_db(pattern) -> float:
    """Expected power SNR (dB) of a Poisson draw with mean ``pattern``.

    The signal power is sum(y^2) and the expected noise power is the summed
    variance sum(y), giving 10*log10(sum(y^2)/sum(y)).
    """
    y = np.asarray(pattern, dtype=np.float64)
    total = float(y.sum())
    if total <= 0:
        raise ValueError("pattern has no intensity; SNR is undefined")
    return 10.0 * math.log10(float((y * y).sum()) / total)


def calibrate_intensity(noiseless_patterns, target_msnr_db: float) -> float:
    """Global scale s so the mean expected SNR of s*y_l hits the target.

    Scaling every pattern by s shifts each SNR by exactly 10*log10(s), so the
    calibration is closed-form.
    """
    stack = np.asarray(noiseless_patterns, dtype=np.float64)
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise ValueError(f"expected a non-empty pattern stack, got shape {stack.shape}")
    current = float(np.mean([expected_poisson_snr_db(y) for y in stack]))
    return 10.0 ** ((float(target_msnr_db) - current) / 10.0)


@dataclass(frozen=True)
class NoiseConfig:
    """Noise model: 'noiseless' or 'poisson' at a target mean SNR."""

    kind: str = "noiseless"
    target_msnr_db: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("noiseless", "poisson"):
            raise ValueError(f"noise kind must be 'noiseless' or 'poisson', got {self.kind!r}")
        if self.kind == "poisson":
            if self.target_msnr_db is None or not math.isfinite(self.target_msnr_db):
                raise ValueError("poisson noise requires a finite target mSNR")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


@dataclass
class Dataset4D:
    """Stack of diffraction patterns plus the geometry and probe that made them."""

    patterns: np.ndarray
    grid: ScanGrid
    probe: np.ndarray
    object_truth: Optional[np.ndarray] = None
    meta: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.patterns = np.asarray(self.patterns, dtype=np.float64)
        if self.patterns.ndim != 3:
            raise ValueError(f"patterns must be N x H x W, got shape {self.patterns.shape}")
        if self.patterns.shape[0] != self.grid.n_positions:
            raise ValueError(
                f"{self.patterns.shape[0]} patterns for {self.grid.n_positions} scan positions"
            )
        if not np.isfinite(self.patterns).all() or (self.patterns < 0).any():
            raise ValueError("patterns must be finite and non-negative")


def simulate_dataset(obj, spec: ProbeSpec, grid: ScanGrid, noise: NoiseConfig) -> Dataset4D:
    """Generate all diffraction patterns for ``grid`` and package them.

    With Poisson noise, a single global intensity scale is calibrated so the
    mean expected SNR over this dataset's patterns hits the target; the scale
    multiplies the pattern means before drawing counts and is folded into the
    stored probe (sqrt(s) amplitude), with a per-pattern child generator
    spawned from the seed so draws are independent of iteration order.
    """
    o = as_field(obj)
    probe = synthesize_probe(spec)
    if probe.shape != grid.detector:
        raise ValueError(f"probe grid {probe.shape} != detector dims {grid.detector}")
    if o.shape != grid.canvas:
        raise ValueError(f"object shape {o.shape} != scan canvas {grid.canvas}")

    n = grid.n_positions
    dh, dw = grid.detector
    patterns = np.empty((n, dh, dw))
    for l, offset in enumerate(grid.offsets):
        patterns[l] = forward_pattern(o, probe, offset)

    scale = 1.0
    msnr_achieved = None
    if noise.kind == "poisson":
        scale = calibrate_intensity(patterns, noise.target_msnr_db)
        patterns *= scale
        peak = float(patterns.max())
        if peak > MAX_POISSON_MEAN:
            raise IntensityError(
                f"calibrated Poisson mean {peak:.3e} exceeds {MAX_POISSON_MEAN:.0e}; "
                "lower the target mSNR"
            )
        msnr_achieved = float(np.mean([expected_poisson_snr_db(y) for y in patterns]))
        children = np.random.SeedSequence(noise.seed).spawn(n)
        for l in range(n):
            rng = np.random.default_rng(children[l])
            patterns[l] = rng.poisson(patterns[l])
        probe = probe * math.sqrt(scale)

    meta = {
        "format_version": FORMAT_VERSION,
        "probe": spec_meta(spec),
        "noise_kind": noise.kind,
        "msnr_target_db": noise.target_msnr_db,
        "msnr_achieved_db": msnr_achieved,
        "intensity_scale": scale,
        "seed": noise.seed,
        "rho_requested": grid.rho_requested,
        "rho_achieved": grid.rho_achieved,
        "step_px": grid.step_px,
        "probe_radius_px": grid.probe_radius_px,
        "pad_px": grid.pad_px,
        "canvas_h": grid.canvas[0],
        "canvas_w": grid.canvas[1],
        "detector_h": grid.detector[0],
        "detector_w": grid.detector[1],
        "grid_rows": grid.rows,
        "grid_cols": grid.cols,
        "origin_row": grid.origin[0],
        "origin_col": grid.origin[1],
    }
    return Dataset4D(patterns=patterns, grid=grid, probe=probe, object_truth=o.copy(), meta=meta)


def save_bundle(path, dataset: Dataset4D) -> None:
    """Write a dataset bundle directory.

    Contents: ``meta.json``, ``patterns.f32`` ("PTYD" + u32 version + u32
    N,H,W + float32 C-order data), ``positions.i32`` (N pairs of little-endian
    i32 row,col), ``probe.c64``, and ``object_truth.c64`` when truth is known.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    n, h, w = dataset.patterns.shape
    with open(root / "patterns.f32", "wb") as fh:
        fh.write(PATTERNS_MAGIC)
        fh.write(struct.pack("<IIII", PATTERNS_VERSION, n, h, w))
        fh.write(np.ascontiguousarray(dataset.patterns.astype("<f4")).tobytes())
    positions = np.array(dataset.grid.offsets, dtype="<i4")
    (root / "positions.i32").write_bytes(positions.tobytes())
    write_c64(root / "probe.c64", dataset.probe)
    if dataset.object_truth is not None:
        write_c64(root / "object_truth.c64", dataset.object_truth)
    (root / "meta.json").write_text(json.dumps(dataset.meta, sort_keys=True, indent=2) + "\n")


def _require(meta: dict, key: str, path):
    if key not in meta:
        raise BundleFormatError(f"{path}: meta.json is missing required field {key!r}")
    return meta[key]


def load_bundle(path) -> Dataset4D:
    """Read a bundle written by :func:`save_bundle`, validating each file."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise BundleFormatError(f"{meta_path}: missing")
    meta = json.loads(meta_path.read_text())

    pat_path = root / "patterns.f32"
    with open(pat_path, "rb") as fh:
        header = fh.read(20)
        if len(header) < 20 or header[:4] != PATTERNS_MAGIC:
            raise BundleFormatError(f"{pat_path}: not a pattern stack (bad magic)")
        version, n, h, w = struct.unpack("<IIII", header[4:20])
        if version != PATTERNS_VERSION:
            raise BundleFormatError(f"{pat_path}: unsupported version {version}")
        payload = fh.read()
    if len(payload) != n * h * w * 4:
        raise BundleFormatError(f"{pat_path}: truncated payload")
    patterns = np.frombuffer(payload, dtype="<f4").reshape(n, h, w).astype(np.float64)

    pos_path = root / "positions.i32"
    raw = pos_path.read_bytes()
    if len(raw) != n * 8:
        raise BundleFormatError(f"{pos_path}: expected {n} (row, col) pairs")
    positions = np.frombuffer(raw, dtype="<i4").reshape(n, 2)

    probe = read_c64(root / "probe.c64")
    truth_path = root / "object_truth.c64"
    truth = read_c64(truth_path) if truth_path.is_file() else None

    rows = int(_require(meta, "grid_rows", meta_path))
    cols = int(_require(meta, "grid_cols", meta_path))
    if rows * cols != n:
        raise BundleFormatError(f"{meta_path}: grid_rows*grid_cols != pattern count {n}")
    grid = ScanGrid(
        step_px=int(_require(meta, "step_px", meta_path)),
        rows=rows,
        cols=cols,
        offsets=tuple(WindowOffset(int(r), int(c)) for r, c in positions),
        probe_radius_px=float(_require(meta, "probe_radius_px", meta_path)),
        rho_requested=float(_require(meta, "rho_requested", meta_path)),
        rho_achieved=float(_require(meta, "rho_achieved", meta_path)),
        pad_px=int(_require(meta, "pad_px", meta_path)),
        canvas=(int(_require(meta, "canvas_h", meta_path)), int(meta["canvas_w"])),
        detector=(int(_require(meta, "detector_h", meta_path)), int(meta["detector_w"])),
        origin=(int(_require(meta, "origin_row", meta_path)), int(meta["origin_col"])),
    )
    if probe.shape != grid.detector:
        raise BundleFormatError(f"{root}: probe.c64 shape {probe.shape} != detector {grid.detector}")
    if truth is not None and truth.shape != grid.canvas:
        raise BundleFormatError(f"{root}: object_truth.c64 shape {truth.shape} != canvas {grid.canvas}")
    return Dataset4D(patterns=patterns, grid=grid, probe=probe, object_truth=truth, meta=meta)
