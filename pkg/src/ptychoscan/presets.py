"""Named parameter sets for desk-scale (ci) and full-scale (paper) runs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .probe import ProbeSpec


@dataclass(frozen=True)
class Preset:
    name: str
    object_px: int
    detector_px: int
    defocus_m: float
    alpha_rad: float
    lambda_m: float
    fill_fraction: float
    intensity_i0: float
    pad_px: int
    n_itr: int
    alpha_o: float
    bar_phase_max: float
    smooth_phase_max: float
    sweep_rho: tuple[float, ...]
    sweep_msnr: tuple[float | None, ...]

    @property
    def probe_radius_px(self) -> float:
        return self.fill_fraction * self.detector_px / 2.0

    def probe_spec(self) -> ProbeSpec:
        return ProbeSpec(
            defocus_m=self.defocus_m,
            alpha_rad=self.alpha_rad,
            lambda_m=self.lambda_m,
            intensity_i0=self.intensity_i0,
            grid=(self.detector_px, self.detector_px),
            fill_fraction=self.fill_fraction,
        )


# Desk-scale preset: small grids and a short, aggressive schedule so a full
# simulate/reconstruct cycle completes in seconds.  The shallower defocus
# keeps the aperture well resolved on the 64-pixel detector and flattens the
# probe, which speeds up convergence at this scale.
CI = Preset(
    name="ci",
    object_px=128,
    detector_px=64,
    defocus_m=0.30e-6,
    alpha_rad=6e-3,
    lambda_m=1.96e-12,
    fill_fraction=0.5,
    intensity_i0=1.0,
    pad_px=54,
    n_itr=25,
    alpha_o=2.0,
    bar_phase_max=2.8,
    smooth_phase_max=math.pi / 2,
    sweep_rho=(0.40, 0.60),
    sweep_msnr=(None, 12.0),
)

# Full-scale preset mirroring the experimental protocol: 512^2 objects on a
# 256^2 detector, 1 um defocus, 100 iterations at a conservative step size.
PAPER = Preset(
    name="paper",
    object_px=512,
    detector_px=256,
    defocus_m=1.0e-6,
    alpha_rad=6e-3,
    lambda_m=1.96e-12,
    fill_fraction=0.5,
    intensity_i0=1.0,
    pad_px=218,
    n_itr=100,
    alpha_o=0.1,
    bar_phase_max=math.pi / 2,
    smooth_phase_max=math.pi / 2,
    sweep_rho=tuple(round(0.05 * k, 2) for k in range(20)),
    sweep_msnr=(None, 20.0, 26.0),
)

PRESETS = {p.name: p for p in (CI, PAPER)}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
