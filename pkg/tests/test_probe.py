"""Defocused-probe synthesis tests."""

import math

import numpy as np
import pytest

from ptychoscan import (
    ApertureResolutionError,
    ProbeSpec,
    probe_radius_m,
    probe_radius_px,
    real_space_pixel_m,
    synthesize_probe,
)
from ptychoscan.probe import spec_meta
from conftest import direct_dft2


def full_scale_spec(defocus_m=1.0e-6, **kwargs):
    params = dict(
        defocus_m=defocus_m,
        alpha_rad=6e-3,
        lambda_m=1.96e-12,
        intensity_i0=1.0,
        grid=(256, 256),
        fill_fraction=0.5,
    )
    params.update(kwargs)
    return ProbeSpec(**params)


class TestSpecValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"defocus_m": -1e-9},
            {"alpha_rad": 0.0},
            {"lambda_m": 0.0},
            {"intensity_i0": 0.0},
            {"fill_fraction": 0.6},
            {"fill_fraction": 0.0},
            {"grid": (1, 8)},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            full_scale_spec(**kwargs)


class TestGeometricScales:
    def test_radius_meters(self):
        # tan(6 mrad) * 1 um = 6.000072 nm.
        assert probe_radius_m(full_scale_spec()) == pytest.approx(6.000072e-9, rel=1e-6)

    def test_radius_pixels(self):
        assert probe_radius_px(full_scale_spec()) == 64.0
        assert probe_radius_px(full_scale_spec(grid=(64, 64))) == 16.0

    def test_pixel_size(self):
        # Disk diameter (2 * 6.000072 nm) spans half of 256 px -> 0.09375 nm per px.
        expected = 2 * math.tan(6e-3) * 1e-6 / (0.5 * 256)
        assert real_space_pixel_m(full_scale_spec()) == pytest.approx(expected, rel=1e-12)
        assert real_space_pixel_m(full_scale_spec()) == pytest.approx(9.375e-11, rel=1e-4)

    def test_zero_defocus_needs_explicit_pixel(self):
        with pytest.raises(ValueError, match="pixel_m"):
            real_space_pixel_m(full_scale_spec(defocus_m=0.0))


class TestSynthesis:
    def test_energy_normalization(self):
        for i0 in (1.0, 2.5):
            p = synthesize_probe(full_scale_spec(intensity_i0=i0))
            assert float(np.sum(np.abs(p) ** 2)) == pytest.approx(i0, rel=1e-12)

    def test_matches_direct_transform_oracle(self):
        # Rebuild the aperture + defocus phase independently and invert with a
        # dense unitary DFT matrix.
        spec = full_scale_spec(grid=(64, 64), defocus_m=0.3e-6)
        pixel = real_space_pixel_m(spec)
        dtheta = spec.lambda_m / (64 * pixel)
        idx = np.arange(64) - 32
        t2 = (idx[:, None] * dtheta) ** 2 + (idx[None, :] * dtheta) ** 2
        wave = (np.sqrt(t2) <= spec.alpha_rad) * np.exp(
            1j * math.pi / spec.lambda_m * spec.defocus_m * t2
        )
        expected = np.conj(direct_dft2(np.conj(wave)))  # unitary inverse transform
        expected *= math.sqrt(1.0 / float(np.sum(np.abs(expected) ** 2)))
        got = synthesize_probe(spec)
        assert np.abs(got - expected).max() < 1e-12

    def test_zero_defocus_with_pixel_override(self):
        spec = full_scale_spec(defocus_m=0.0, grid=(64, 64))
        p = synthesize_probe(spec, pixel_m=5e-11)
        assert p.shape == (64, 64)
        assert float(np.sum(np.abs(p) ** 2)) == pytest.approx(1.0, rel=1e-12)
        # The focused probe peaks at the array center.
        peak = np.unravel_index(np.argmax(np.abs(p)), p.shape)
        assert peak == (32, 32)

    def test_radial_symmetry(self):
        p = np.abs(synthesize_probe(full_scale_spec()))
        # Index 0 carries the unpaired Nyquist row/column; the rest is symmetric.
        core = p[1:, 1:]
        assert np.abs(core - core[::-1, ::-1]).max() < 1e-8 * p.max()
        assert np.abs(core - core.T).max() < 1e-8 * p.max()

    def test_defocus_grows_the_spot(self):
        pixel = real_space_pixel_m(full_scale_spec())
        yy, xx = np.mgrid[0:256, 0:256]
        radii = []
        for defocus in (0.0, 0.25e-6, 0.5e-6, 1.0e-6):
            p = synthesize_probe(full_scale_spec(defocus_m=defocus), pixel_m=pixel)
            intensity = np.abs(p) ** 2
            cy = float((intensity * yy).sum())
            cx = float((intensity * xx).sum())
            radii.append(math.sqrt(float((intensity * ((yy - cy) ** 2 + (xx - cx) ** 2)).sum())))
        assert all(a < b for a, b in zip(radii, radii[1:]))

    def test_energy_concentrated_in_geometric_disk(self):
        spec = full_scale_spec()
        p = synthesize_probe(spec)
        rr = np.hypot(*(np.mgrid[0:256, 0:256] - 128.0))
        inside = float(np.sum(np.abs(p[rr <= 1.1 * probe_radius_px(spec)]) ** 2))
        assert inside >= 0.9

    def test_under_resolved_aperture_raises(self):
        spec = full_scale_spec(grid=(64, 64))
        with pytest.raises(ApertureResolutionError):
            synthesize_probe(spec, pixel_m=5e-12)

    def test_bad_pixel_override(self):
        with pytest.raises(ValueError):
            synthesize_probe(full_scale_spec(), pixel_m=-1e-11)


class TestSpecMeta:
    def test_flat_json_ready_mapping(self):
        meta = spec_meta(full_scale_spec())
        assert meta["grid_h"] == 256 and meta["grid_w"] == 256
        assert meta["pixel_m"] == pytest.approx(real_space_pixel_m(full_scale_spec()))
        assert all(isinstance(v, (int, float)) for v in meta.values())
