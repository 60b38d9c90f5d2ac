"""ptychoscan: defocused-probe 4D-STEM simulation, PIE/CPIE phase retrieval,
and scan-overlap geometry analysis."""

from .errors import (
    ApertureResolutionError,
    BundleFormatError,
    DivergenceError,
    IntensityError,
    ResolutionError,
    UnboundedOverlapError,
)
from .field import (
    WindowOffset,
    crop_window,
    dft2_unitary,
    idft2_unitary,
    insert_window,
    read_c64,
    write_c64,
)
from .geometry import (
    CoverageStats,
    GeometryReport,
    GeometryRow,
    count_overlapping,
    coverage_counts,
    geometry_csv,
    inverse_overlap_approx,
    inverse_overlap_exact,
    overlap_ratio,
    pixel_coverage_stats,
    sweep_geometry,
)
from .metrics import EvalRegion, achieved_overlap, nrmse_db
from .phantoms import bar_chart, smooth_bumps
from .presets import CI, PAPER, PRESETS, Preset, get_preset
from .probe import ProbeSpec, probe_radius_m, probe_radius_px, real_space_pixel_m, synthesize_probe
from .recon import (
    IterationStats,
    ReconConfig,
    ReconResult,
    recon_log_csv,
    reconstruct,
    single_position_update,
)
from .simulate import (
    Dataset4D,
    NoiseConfig,
    ScanGrid,
    build_scan_grid,
    calibrate_intensity,
    expected_poisson_snr_db,
    forward_pattern,
    load_bundle,
    load_phase_object,
    pad_symmetric,
    read_grayscale,
    save_bundle,
    simulate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ApertureResolutionError",
    "BundleFormatError",
    "CI",
    "CoverageStats",
    "Dataset4D",
    "DivergenceError",
    "EvalRegion",
    "GeometryReport",
    "GeometryRow",
    "IntensityError",
    "IterationStats",
    "NoiseConfig",
    "PAPER",
    "PRESETS",
    "Preset",
    "ProbeSpec",
    "ReconConfig",
    "ReconResult",
    "ResolutionError",
    "ScanGrid",
    "UnboundedOverlapError",
    "WindowOffset",
    "achieved_overlap",
    "bar_chart",
    "build_scan_grid",
    "calibrate_intensity",
    "count_overlapping",
    "coverage_counts",
    "crop_window",
    "dft2_unitary",
    "expected_poisson_snr_db",
    "forward_pattern",
    "geometry_csv",
    "get_preset",
    "idft2_unitary",
    "insert_window",
    "inverse_overlap_approx",
    "inverse_overlap_exact",
    "load_bundle",
    "load_phase_object",
    "nrmse_db",
    "overlap_ratio",
    "pad_symmetric",
    "pixel_coverage_stats",
    "probe_radius_m",
    "probe_radius_px",
    "read_c64",
    "read_grayscale",
    "real_space_pixel_m",
    "recon_log_csv",
    "reconstruct",
    "save_bundle",
    "simulate_dataset",
    "single_position_update",
    "smooth_bumps",
    "sweep_geometry",
    "synthesize_probe",
    "write_c64",
]
