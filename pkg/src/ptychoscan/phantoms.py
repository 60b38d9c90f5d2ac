"""Procedurally generated grayscale test objects.

Both phantoms return float64 arrays normalized to [0, 1]; feed them to
:func:`ptychoscan.simulate.load_phase_object` to turn them into unit-amplitude
phase objects.
"""

from __future__ import annotations

import numpy as np


def bar_chart(n: int) -> np.ndarray:
    """Resolution-chart phantom: a 3x3 arrangement of three-bar triplets.

    Triplets alternate between horizontal and vertical orientation; bar width
    scales with ``n`` and stays close to the reconstruction resolution limit,
    which makes this target deliberately demanding.
    """
    if n < 48:
        raise ValueError(f"bar chart needs at least 48 px, got {n}")
    img = np.zeros((n, n))
    width = max(2, n // 42)
    arm = 5 * width
    for gy in range(3):
        for gx in range(3):
            y0 = n // 8 + gy * (n // 3)
            x0 = n // 8 + gx * (n // 3)
            horizontal = (gy + gx) % 2 == 0
            for k in range(3):
                if horizontal:
                    img[y0 + 2 * k * width : y0 + (2 * k + 1) * width, x0 : x0 + arm] = 1.0
                else:
                    img[y0 : y0 + arm, x0 + 2 * k * width : x0 + (2 * k + 1) * width] = 1.0
    return img


def smooth_bumps(n: int) -> np.ndarray:
    """Smooth phantom: four signed Gaussian bumps, normalized to [0, 1]."""
    if n < 8:
        raise ValueError(f"smooth phantom needs at least 8 px, got {n}")
    y, x = np.meshgrid(np.linspace(-1, 1, n), np.linspace(-1, 1, n), indexing="ij")
    z = (
        np.exp(-((y + 0.35) ** 2 + (x + 0.35) ** 2) / 0.03)
        - 0.9 * np.exp(-((y - 0.3) ** 2 + (x + 0.25) ** 2) / 0.025)
        + 0.8 * np.exp(-((y - 0.05) ** 2 + (x - 0.3) ** 2) / 0.04)
        - 0.7 * np.exp(-((y + 0.3) ** 2 + (x - 0.3) ** 2) / 0.02)
    )
    z -= z.min()
    z /= z.max()
    return z
