"""Reconstruction quality metrics that are blind to the global complex scale."""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .field import as_field
from .geometry import overlap_ratio

# Residual ratios below this underflow the log; report the floor instead.
FLOOR_RATIO = 1e-30
FLOOR_DB = -300.0


class EvalRegion(NamedTuple):
    """Rectangular evaluation window shared by truth and estimate."""

    top: int
    left: int
    height: int
    width: int


def _crop(arr: np.ndarray, region: EvalRegion) -> np.ndarray:
    t, l, h, w = region
    if t < 0 or l < 0 or h < 1 or w < 1 or t + h > arr.shape[0] or l + w > arr.shape[1]:
        raise ValueError(f"region {region} exceeds field shape {arr.shape}")
    return arr[t : t + h, l : l + w]


def nrmse_db(truth, estimate, region: Optional[EvalRegion] = None) -> float:
    """Normalized RMS error in dB after optimal complex scalar alignment.

    Computes nu = <estimate, truth> / ||estimate||^2 (the least-squares complex
    scale) and returns 10*log10(||truth - nu*estimate||^2 / ||truth||^2).
    A ratio below 1e-30 reports the -300 dB floor (perfect recovery up to the
    global scale).
    """
    o = as_field(truth)
    oh = as_field(estimate)
    if region is not None:
        o = _crop(o, region)
        oh = _crop(oh, region)
    if o.shape != oh.shape:
        raise ValueError(f"truth {o.shape} and estimate {oh.shape} shapes differ")
    est_power = float(np.vdot(oh, oh).real)
    if est_power == 0.0:
        raise ValueError("estimate is identically zero; the alignment scale is undefined")
    truth_power = float(np.vdot(o, o).real)
    if truth_power == 0.0:
        raise ValueError("truth is identically zero on the evaluation region")
    nu = np.vdot(oh, o) / est_power
    ratio = float(np.vdot(o - nu * oh, o - nu * oh).real) / truth_power
    if ratio < FLOOR_RATIO:
        return FLOOR_DB
    return 10.0 * math.log10(ratio)


def achieved_overlap(grid) -> float:
    """Overlap ratio implied by a grid's quantized step and probe radius."""
    if grid.probe_radius_px <= 0:
        raise ValueError(f"probe radius must be positive, got {grid.probe_radius_px}")
    return overlap_ratio(min(1.0, grid.step_px / (2.0 * grid.probe_radius_px)))
