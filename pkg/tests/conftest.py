"""Shared test fixtures and helpers."""

from __future__ import annotations

import numpy as np
import pytest

import ptychoscan as P
from ptychoscan.cli import main as cli_main


def run_cli(argv):
    """Invoke the CLI in-process; returns the exit code (argparse exits map to 2)."""
    try:
        return cli_main(list(argv))
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0


def unitary_dft_matrix(n: int) -> np.ndarray:
    """Centered unitary DFT matrix: W[u, m] = exp(-2*pi*i*(u-c)*(m-c)/n)/sqrt(n)."""
    c = n // 2
    idx = np.arange(n) - c
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def direct_dft2(field: np.ndarray) -> np.ndarray:
    """Quadratic-time reference for the centered unitary 2D DFT."""
    h, w = field.shape
    return unitary_dft_matrix(h) @ field @ unitary_dft_matrix(w).T


def random_field(rng, shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def tiny_dataset(rho=0.5, noise=None, object_px=64, detector_px=32, pad_px=24, seed=0):
    """Small end-to-end dataset for reconstruction tests (fractions of a second)."""
    spec = P.ProbeSpec(
        defocus_m=0.3e-6,
        alpha_rad=6e-3,
        lambda_m=1.96e-12,
        intensity_i0=1.0,
        grid=(detector_px, detector_px),
        fill_fraction=0.5,
    )
    obj = P.load_phase_object(P.smooth_bumps(object_px), 0.0, np.pi / 2)
    radius = spec.fill_fraction * detector_px / 2.0
    grid = P.build_scan_grid(obj.shape, (detector_px, detector_px), radius, rho, pad_px)
    padded = P.pad_symmetric(obj, grid.pad_px)
    if noise is None:
        cfg = P.NoiseConfig(kind="noiseless", seed=seed)
    else:
        cfg = P.NoiseConfig(kind="poisson", target_msnr_db=noise, seed=seed)
    return P.simulate_dataset(padded, spec, grid, cfg)


@pytest.fixture(scope="session")
def small_bundle_dir(tmp_path_factory):
    """A simulated bundle on disk, shared by CLI tests."""
    out = tmp_path_factory.mktemp("bundle") / "data"
    code = run_cli(
        [
            "simulate",
            "--object", "bars",
            "--object-size", "64",
            "--detector", "32",
            "--rho", "0.4",
            "--pad", "16",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    return out
