"""Scan-overlap geometry: the overlap ratio R(gamma), its inverses, the
neighbor-overlap count D(rho), and per-pixel coverage statistics C(rho).

All quantities here depend only on the scan geometry (step size and probe
radius), never on the recovery algorithm.  ``gamma`` is the step ratio
(scan step divided by probe diameter) and ``rho`` the fractional overlap
area of two adjacent circular illuminations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ResolutionError, UnboundedOverlapError

# Thresholds of the piecewise approximate inverse of R.
RHO0 = 0.0448
RHO1 = 0.5816


def overlap_ratio(gamma: float) -> float:
    """Overlap area fraction of two unit disks with center distance 2*gamma.

    R(gamma) = (2/pi) * (arccos(gamma) - gamma*sqrt(1 - gamma^2)); strictly
    decreasing from R(0) = 1 (coincident) to R(1) = 0 (tangent).
    """
    g = float(gamma)
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"step ratio must be in [0, 1], got {g}")
    return (2.0 / math.pi) * (math.acos(g) - g * math.sqrt(1.0 - g * g))


def inverse_overlap_approx(rho: float) -> float:
    """Piecewise closed-form approximation of the inverse of :func:`overlap_ratio`.

    Branch thresholds RHO0 and RHO1 split the range into a near-tangent cube-root
    regime, a middle square-root regime, and a linear regime near full overlap.
    The result is clamped to [0, 1].
    """
    r = float(rho)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"overlap ratio must be in [0, 1], got {r}")
    if r > RHO1:
        g = (math.pi / 4.0) * (1.0 - r)
    elif r >= RHO0:
        g = math.cos(0.5 * (math.pi / 2.0 - 1.0 + math.sqrt(2.0 * math.pi * r + 3.0 - math.pi)))
    else:
        g = math.cos(0.5 * (6.0 * math.pi * r) ** (1.0 / 3.0))
    return min(1.0, max(0.0, g))


def inverse_overlap_exact(rho: float, tol: float = 1e-12) -> float:
    """Invert :func:`overlap_ratio` by bisection to |R(gamma) - rho| <= tol."""
    r = float(rho)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"overlap ratio must be in [0, 1], got {r}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if r == 0.0:
        return 1.0
    if r == 1.0:
        return 0.0
    lo, hi = 0.0, 1.0  # R(lo) = 1 >= rho >= R(hi) = 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = overlap_ratio(mid)
        if abs(val - r) <= tol:
            return mid
        if val > r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def count_overlapping(rho: float, max_radius: Optional[int] = None) -> int:
    """Number of raster lattice sites whose illumination overlaps the central one.

    Counts signed integer offsets (l1, l2) != (0, 0) with
    gamma * sqrt(l1^2 + l2^2) < 1 (strict), where gamma is the exact step
    ratio for ``rho``.  ``max_radius`` bounds the enumeration; it defaults to
    ceil(1/gamma), the smallest radius that cannot miss a qualifying site.
    """
    r = float(rho)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"overlap ratio must be in [0, 1], got {r}")
    gamma = inverse_overlap_exact(r, tol=1e-13)
    if gamma == 0.0:
        raise UnboundedOverlapError(
            "step ratio is 0 (full overlap): every lattice site qualifies; "
            "cap the count by the scan-grid extent instead"
        )
    needed = math.ceil(1.0 / gamma)
    if max_radius is None:
        max_radius = needed
    elif max_radius < max(1, needed):
        raise ValueError(f"max_radius {max_radius} is too small; need at least {needed}")
    count = 0
    for l1 in range(-max_radius, max_radius + 1):
        for l2 in range(-max_radius, max_radius + 1):
            if (l1, l2) == (0, 0):
                continue
            if gamma * math.hypot(l1, l2) < 1.0:
                count += 1
    return count


def coverage_counts(rho: float, probe_diameter_px: int) -> np.ndarray:
    """Per-pixel illumination counts over the central evaluation box.

    A raster of disks (radius L/2, step d = round(gamma*L) with gamma from the
    approximate inverse, matching the simulator's step quantization) is centered
    on a 3L x 3L simulation box; every probe whose disk intersects the box is
    stamped, and the returned (L, L) integer array holds the counts for the
    pixels of the central L x L evaluation box.  A pixel is covered when its
    center lies strictly inside a disk.
    """
    L = int(probe_diameter_px)
    if L < 8:
        raise ValueError(f"probe diameter must be at least 8 px, got {L}")
    r = float(rho)
    if not 0.0 <= r < 1.0:
        raise ValueError(f"overlap ratio must be in [0, 1), got {r}")
    gamma = inverse_overlap_approx(r)
    d = round(gamma * L)
    if d == 0:
        raise ResolutionError(
            f"step rounds to 0 px for rho={r} at L={L}; increase the probe diameter"
        )
    radius = L / 2.0
    center = 1.5 * L
    # A disk at center + k*d intersects the [0, 3L) box iff |k*d| < 1.5L + radius.
    kmax = math.ceil((1.5 * L + radius) / d)
    ks = [k for k in range(-kmax, kmax + 1) if abs(k) * d < 1.5 * L + radius]
    # Pixel centers of the evaluation box: L + i + 0.5 for i in [0, L).
    axis = np.arange(L) + L + 0.5
    r2 = radius * radius
    counts = np.zeros((L, L), dtype=np.int64)
    for ky in ks:
        cy = center + ky * d
        dy2 = (axis - cy) ** 2
        rows = np.nonzero(dy2 < r2)[0]
        if rows.size == 0:
            continue
        ylo, yhi = rows[0], rows[-1] + 1
        for kx in ks:
            cx = center + kx * d
            dx2 = (axis - cx) ** 2
            cols = np.nonzero(dx2 < r2)[0]
            if cols.size == 0:
                continue
            xlo, xhi = cols[0], cols[-1] + 1
            mask = dy2[ylo:yhi, None] + dx2[None, xlo:xhi] < r2
            counts[ylo:yhi, xlo:xhi] += mask
    return counts


@dataclass(frozen=True)
class CoverageStats:
    """Summary of D(rho) and the per-pixel coverage distribution C(rho)."""

    d_count: int
    m_c: int
    big_m_c: int
    mu_c: float
    var_c: float
    sigma_c: float


def pixel_coverage_stats(rho: float, probe_diameter_px: int = 256) -> CoverageStats:
    """Coverage statistics over the evaluation box plus the overlap count D(rho)."""
    counts = coverage_counts(rho, probe_diameter_px)
    mu = float(counts.mean())
    var = float(counts.var())
    return CoverageStats(
        d_count=count_overlapping(rho),
        m_c=int(counts.min()),
        big_m_c=int(counts.max()),
        mu_c=mu,
        var_c=var,
        sigma_c=math.sqrt(var),
    )


@dataclass(frozen=True)
class GeometryRow:
    rho: float
    gamma: Optional[float] = None
    stats: Optional[CoverageStats] = None
    sigma_over_mu: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class GeometryReport:
    probe_diameter_px: int
    rows: tuple[GeometryRow, ...]


def sweep_geometry(rho_values: Iterable[float], probe_diameter_px: int = 256) -> GeometryReport:
    """Compute one :class:`GeometryRow` per rho (sorted ascending).

    Per-row failures are recorded in the row's ``error`` field rather than
    aborting the sweep.
    """
    rows = []
    for rho in sorted(float(r) for r in rho_values):
        try:
            gamma = inverse_overlap_approx(rho)
            stats = pixel_coverage_stats(rho, probe_diameter_px)
            ratio = stats.sigma_c / stats.mu_c if stats.mu_c > 0 else 0.0
            rows.append(GeometryRow(rho=rho, gamma=gamma, stats=stats, sigma_over_mu=ratio))
        except (ValueError, ResolutionError, UnboundedOverlapError) as exc:
            rows.append(GeometryRow(rho=rho, error=str(exc)))
    return GeometryReport(probe_diameter_px=probe_diameter_px, rows=tuple(rows))


GEOMETRY_CSV_HEADER = "rho,gamma,D,m_C,M_C,mu_C,var_C,std_C,std_over_mu,error"


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6g}"


def geometry_csv(report: GeometryReport) -> str:
    """Serialize a report as CSV (6 significant digits per numeric value)."""
    lines = [GEOMETRY_CSV_HEADER]
    for row in report.rows:
        if row.error is not None:
            lines.append(f"{_fmt(row.rho)},{_fmt(row.gamma)},,,,,,,,{row.error}")
            continue
        s = row.stats
        lines.append(
            ",".join(
                [
                    _fmt(row.rho),
                    _fmt(row.gamma),
                    str(s.d_count),
                    str(s.m_c),
                    str(s.big_m_c),
                    _fmt(s.mu_c),
                    _fmt(s.var_c),
                    _fmt(s.sigma_c),
                    _fmt(row.sigma_over_mu),
                    "",
                ]
            )
        )
    return "\n".join(lines) + "\n"
