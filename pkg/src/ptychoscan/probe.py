"""Defocused-probe synthesis on the detector grid.

The probe is the inverse transform of a top-hat aperture (cutoff at the
convergence semi-angle alpha) carrying the quadratic defocus phase
(pi/lambda) * defocus * |theta|^2, normalized so the total intensity equals
``intensity_i0``.  In the geometric-optics limit it illuminates a disk of
radius r = tan(alpha) * defocus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ApertureResolutionError
from .field import idft2_unitary


@dataclass(frozen=True)
class ProbeSpec:
    """Physical probe parameters plus the detector grid they are sampled on.

    ``fill_fraction`` is the fraction of the (shorter) array side spanned by
    the geometric illumination disk diameter; keeping it at or below 0.5
    leaves a guard band so the probe tails are not wrapped by the periodic
    transform.
    """

    defocus_m: float
    alpha_rad: float
    lambda_m: float
    intensity_i0: float = 1.0
    grid: tuple[int, int] = (256, 256)
    fill_fraction: float = 0.5

    def __post_init__(self):
        if self.defocus_m < 0:
            raise ValueError(f"defocus must be non-negative, got {self.defocus_m}")
        if self.alpha_rad <= 0:
            raise ValueError(f"convergence semi-angle must be positive, got {self.alpha_rad}")
        if self.lambda_m <= 0:
            raise ValueError(f"wavelength must be positive, got {self.lambda_m}")
        if self.intensity_i0 <= 0:
            raise ValueError(f"probe intensity must be positive, got {self.intensity_i0}")
        if not 0 < self.fill_fraction <= 0.5:
            raise ValueError(f"fill fraction must be in (0, 0.5], got {self.fill_fraction}")
        h, w = self.grid
        if h < 2 or w < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.grid}")


def probe_radius_m(spec: ProbeSpec) -> float:
    """Geometric illumination radius r = tan(alpha) * defocus."""
    return math.tan(spec.alpha_rad) * spec.defocus_m


def probe_radius_px(spec: ProbeSpec) -> float:
    """Illumination radius in pixels: fill_fraction * min(grid) / 2."""
    return spec.fill_fraction * min(spec.grid) / 2.0


def real_space_pixel_m(spec: ProbeSpec) -> float:
    """Pixel size making the disk diameter span fill_fraction of the array."""
    r = probe_radius_m(spec)
    if r == 0:
        raise ValueError(
            "probe radius is 0 (zero defocus); pass pixel_m to synthesize_probe explicitly"
        )
    return 2.0 * r / (spec.fill_fraction * min(spec.grid))


def synthesize_probe(spec: ProbeSpec, pixel_m: float | None = None) -> np.ndarray:
    """Sample the probe wave on the detector grid.

    The angular grid has pitch dtheta = lambda / (min(grid) * pixel_m); the
    aperture passes |theta| <= alpha and the defocus phase is
    (pi/lambda) * defocus * |theta|^2.  The result is centered at
    (H//2, W//2) and scaled so that sum(|p|^2) equals ``intensity_i0``.

    ``pixel_m`` overrides the real-space sampling; it is required when
    ``defocus_m`` is 0 (the geometric radius no longer fixes a scale).
    """
    if pixel_m is None:
        pixel_m = real_space_pixel_m(spec)
    if pixel_m <= 0:
        raise ValueError(f"pixel size must be positive, got {pixel_m}")
    h, w = spec.grid
    n = min(h, w)
    dtheta = spec.lambda_m / (n * pixel_m)
    aperture_px = spec.alpha_rad / dtheta
    if aperture_px < 2:
        raise ApertureResolutionError(
            f"aperture radius is {aperture_px:.3f} reciprocal px (< 2); "
            "the top-hat support is under-resolved on this grid"
        )
    ty = (np.arange(h) - h // 2) * dtheta
    tx = (np.arange(w) - w // 2) * dtheta
    theta2 = ty[:, None] ** 2 + tx[None, :] ** 2
    aperture = np.sqrt(theta2) <= spec.alpha_rad
    wave = aperture * np.exp(1j * (math.pi / spec.lambda_m) * spec.defocus_m * theta2)
    p = idft2_unitary(wave)
    p *= math.sqrt(spec.intensity_i0 / float(np.sum(np.abs(p) ** 2)))
    return p


def spec_meta(spec: ProbeSpec, pixel_m: float | None = None) -> dict:
    """Probe parameters as a flat JSON-ready mapping (echoed into dataset metadata)."""
    if pixel_m is None:
        pixel_m = real_space_pixel_m(spec)
    return {
        "defocus_m": spec.defocus_m,
        "alpha_rad": spec.alpha_rad,
        "lambda_m": spec.lambda_m,
        "intensity_i0": spec.intensity_i0,
        "grid_h": spec.grid[0],
        "grid_w": spec.grid[1],
        "fill_fraction": spec.fill_fraction,
        "pixel_m": pixel_m,
    }
