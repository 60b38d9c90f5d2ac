"""Iterative ptychographic engines: PIE and its phase-object variant CPIE.

Each position update crops the object window, propagates the exit wave to the
detector, replaces its magnitudes with the measured square roots, propagates
back, and nudges the window along the probe-weighted difference.  CPIE
additionally projects the window onto unit modulus after every update, which
is what lets it tolerate sparse overlap and noisy magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DivergenceError
from .field import as_field, dft2_unitary, idft2_unitary
from .metrics import EvalRegion, nrmse_db


@dataclass(frozen=True)
class ReconConfig:
    """Engine selection and iteration parameters."""

    algorithm: str = "cpie"
    n_itr: int = 100
    alpha_o: float = 0.1
    seed: int = 0
    initial_object: Optional[np.ndarray] = None
    raster_order: bool = False

    def __post_init__(self):
        if self.algorithm not in ("pie", "cpie"):
            raise ValueError(f"algorithm must be 'pie' or 'cpie', got {self.algorithm!r}")
        if self.n_itr < 1:
            raise ValueError(f"need at least one iteration, got {self.n_itr}")
        if not 0.0 < self.alpha_o <= 2.0:
            raise ValueError(f"object step size must be in (0, 2], got {self.alpha_o}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


class IterationStats(NamedTuple):
    iteration: int
    residual: float
    nrmse_db: Optional[float]


@dataclass
class ReconResult:
    object_estimate: np.ndarray
    per_iteration_log: list[IterationStats]

    @property
    def final_nrmse_db(self) -> Optional[float]:
        return self.per_iteration_log[-1].nrmse_db if self.per_iteration_log else None


def _unit_phasor(z: np.ndarray) -> np.ndarray:
    """exp(i*angle(z)) with the convention angle(0) = 0."""
    mag = np.abs(z)
    out = np.ones_like(z)
    np.divide(z, mag, out=out, where=mag > 0)
    return out


def _update_window(window, probe, sqrt_pattern, alpha_o, constrain, probe_correction):
    """One engine step on a detector-sized window; returns (new window, |detector wave|)."""
    psi_u = probe * window
    phi_u = dft2_unitary(psi_u)
    psi_c = idft2_unitary(sqrt_pattern * _unit_phasor(phi_u))
    updated = window + alpha_o * probe_correction * (psi_c - psi_u)
    if constrain:
        updated = _unit_phasor(updated)
    return updated, np.abs(phi_u)


def _probe_correction(probe: np.ndarray) -> np.ndarray:
    peak = float(np.max(np.abs(probe)))
    if peak == 0.0:
        raise ValueError("probe is identically zero")
    return np.conj(probe) / peak**2


def single_position_update(obj, probe, pattern, offset, alpha_o: float, constrain: bool) -> np.ndarray:
    """Pure single-position update: returns the full object with one window refreshed."""
    o = as_field(obj).copy()
    p = as_field(probe)
    y = np.asarray(pattern, dtype=np.float64)
    if y.shape != p.shape:
        raise ValueError(f"pattern shape {y.shape} != probe shape {p.shape}")
    row, col = int(offset[0]), int(offset[1])
    h, w = p.shape
    if row < 0 or col < 0 or row + h > o.shape[0] or col + w > o.shape[1]:
        raise ValueError(f"window at ({row}, {col}) exceeds canvas {o.shape}")
    window = o[row : row + h, col : col + w]
    updated, _ = _update_window(
        window, p, np.sqrt(y), alpha_o, constrain, _probe_correction(p)
    )
    o[row : row + h, col : col + w] = updated
    return o


def reconstruct(dataset, probe, config: ReconConfig) -> ReconResult:
    """Run the configured engine over all scan positions for ``config.n_itr`` iterations.

    Positions are visited in a freshly shuffled order each iteration (or in
    raster order when ``config.raster_order`` is set).  The per-iteration
    residual is the mean over positions of sum((sqrt(y) - |phi|)^2) / sum(y);
    when the dataset carries ground truth, NRMSE over the central unpadded
    region is logged as well.  Results are deterministic for a fixed seed.
    """
    p = as_field(probe)
    grid = dataset.grid
    if p.shape != grid.detector:
        raise ValueError(f"probe shape {p.shape} != detector dims {grid.detector}")
    correction = _probe_correction(p)
    h, w = p.shape

    if config.initial_object is not None:
        o = as_field(config.initial_object).copy()
        if o.shape != grid.canvas:
            raise ValueError(f"initial object {o.shape} != canvas {grid.canvas}")
    else:
        o = np.ones(grid.canvas, dtype=np.complex128)

    region = None
    truth = dataset.object_truth
    if truth is not None:
        pad = grid.pad_px
        region = EvalRegion(pad, pad, grid.canvas[0] - 2 * pad, grid.canvas[1] - 2 * pad)

    sqrt_y = np.sqrt(dataset.patterns)
    pattern_energy = dataset.patterns.sum(axis=(1, 2))
    constrain = config.algorithm == "cpie"
    rng = np.random.default_rng(config.seed)
    n = grid.n_positions

    log: list[IterationStats] = []
    for iteration in range(1, config.n_itr + 1):
        order = np.arange(n) if config.raster_order else rng.permutation(n)
        residual_sum = 0.0
        for l in order:
            row, col = grid.offsets[l]
            window = o[row : row + h, col : col + w]
            updated, detector_mag = _update_window(
                window, p, sqrt_y[l], config.alpha_o, constrain, correction
            )
            o[row : row + h, col : col + w] = updated
            if pattern_energy[l] > 0:
                residual_sum += float(((sqrt_y[l] - detector_mag) ** 2).sum()) / pattern_energy[l]
        if not np.isfinite(o).all():
            raise DivergenceError(iteration)
        err = nrmse_db(truth, o, region) if truth is not None else None
        log.append(IterationStats(iteration, residual_sum / n, err))
    return ReconResult(object_estimate=o, per_iteration_log=log)


RECON_LOG_HEADER = "iter,residual,nrmse_db"


def recon_log_csv(result: ReconResult) -> str:
    """Per-iteration log as CSV; the nrmse_db cell is empty without ground truth."""
    lines = [RECON_LOG_HEADER]
    for stats in result.per_iteration_log:
        err = "" if stats.nrmse_db is None else f"{stats.nrmse_db:.4f}"
        lines.append(f"{stats.iteration},{stats.residual:.6e},{err}")
    return "\n".join(lines) + "\n"
