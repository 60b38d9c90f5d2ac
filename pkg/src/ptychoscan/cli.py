"""Command-line interface: geometry sweeps, dataset simulation, reconstruction,
evaluation, and full overlap x noise x algorithm sweeps.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from . import phantoms
from .field import read_c64, write_c64
from .metrics import EvalRegion, nrmse_db
from .presets import get_preset
from .probe import ProbeSpec
from .recon import ReconConfig, recon_log_csv, reconstruct
from .simulate import (
    NoiseConfig,
    build_scan_grid,
    load_bundle,
    load_phase_object,
    pad_symmetric,
    read_grayscale,
    save_bundle,
    simulate_dataset,
)
from .geometry import geometry_csv, sweep_geometry

SUMMARY_HEADER = "rho,rho_achieved,msnr_target,msnr_achieved,algo,seed,final_nrmse_db,runtime_s,error"


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_phase_pgm(path: Path, field: np.ndarray) -> None:
    """8-bit grayscale phase image with the fixed range [-pi, pi] -> [0, 255]."""
    phase = np.angle(field)
    levels = np.clip(np.round((phase + math.pi) / (2 * math.pi) * 255.0), 0, 255)
    Image.fromarray(levels.astype(np.uint8)).save(path)


def _resolve_object(args, preset) -> np.ndarray:
    """Builtin phantom name or a grayscale image path -> raw grayscale array."""
    size = args.object_size or (preset.object_px if preset else 512)
    if args.object == "bars":
        return phantoms.bar_chart(size)
    if args.object == "smooth":
        return phantoms.smooth_bumps(size)
    return read_grayscale(args.object)


def _default_phase_max(args, preset) -> float:
    if args.phase_max is not None:
        return args.phase_max
    if preset is not None:
        return preset.smooth_phase_max if args.object == "smooth" else preset.bar_phase_max
    return math.pi / 2


def cmd_geometry(args) -> int:
    if args.rho_values:
        rhos = [float(tok) for tok in args.rho_values.split(",") if tok.strip()]
    else:
        rhos = list(np.arange(args.rho_min, args.rho_max + 1e-12, args.rho_step))
    report = sweep_geometry(rhos, probe_diameter_px=args.probe_diameter)
    _atomic_write_text(Path(args.out), geometry_csv(report))
    failures = [row for row in report.rows if row.error is not None]
    for row in failures:
        print(f"rho={row.rho:.6g}: {row.error}", file=sys.stderr)
    print(f"wrote {len(report.rows)} rows to {args.out}")
    return 1 if failures else 0


def _simulate_from_args(args, preset):
    raw = _resolve_object(args, preset)
    phase_max = _default_phase_max(args, preset)
    obj = load_phase_object(raw, args.phase_min, phase_max)
    detector = args.detector or (preset.detector_px if preset else 256)
    pad = args.pad if args.pad is not None else None
    spec = ProbeSpec(
        defocus_m=args.defocus if args.defocus is not None else (preset.defocus_m if preset else 1e-6),
        alpha_rad=args.alpha if args.alpha is not None else (preset.alpha_rad if preset else 6e-3),
        lambda_m=args.lambda_m if args.lambda_m is not None else (preset.lambda_m if preset else 1.96e-12),
        intensity_i0=args.i0 if args.i0 is not None else (preset.intensity_i0 if preset else 1.0),
        grid=(detector, detector),
        fill_fraction=args.fill if args.fill is not None else (preset.fill_fraction if preset else 0.5),
    )
    radius_px = spec.fill_fraction * detector / 2.0
    grid = build_scan_grid(obj.shape, (detector, detector), radius_px, args.rho, pad)
    padded = pad_symmetric(obj, grid.pad_px)
    if args.noise == "poisson":
        noise = NoiseConfig(kind="poisson", target_msnr_db=args.msnr, seed=args.seed)
    else:
        noise = NoiseConfig(kind="noiseless", seed=args.seed)
    return simulate_dataset(padded, spec, grid, noise)


def cmd_simulate(args) -> int:
    preset = get_preset(args.preset) if args.preset else None
    dataset = _simulate_from_args(args, preset)
    save_bundle(args.out, dataset)
    achieved = dataset.meta["msnr_achieved_db"]
    msnr_text = "n/a" if achieved is None else f"{achieved:.4f} dB"
    print(
        f"simulated {dataset.patterns.shape[0]} patterns: "
        f"rho_achieved={dataset.grid.rho_achieved:.6f}, msnr_achieved={msnr_text}"
    )
    return 0


def cmd_reconstruct(args) -> int:
    preset = get_preset(args.preset) if args.preset else None
    dataset = load_bundle(args.bundle)
    config = ReconConfig(
        algorithm=args.algo,
        n_itr=args.iters if args.iters is not None else (preset.n_itr if preset else 100),
        alpha_o=args.alpha_o if args.alpha_o is not None else (preset.alpha_o if preset else 0.1),
        seed=args.seed,
        raster_order=args.raster_order,
    )
    result = reconstruct(dataset, dataset.probe, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_c64(out / "estimate.c64", result.object_estimate)
    _atomic_write_text(out / "log.csv", recon_log_csv(result))
    pad = dataset.grid.pad_px
    ch, cw = dataset.grid.canvas
    central = result.object_estimate[pad : ch - pad, pad : cw - pad]
    _write_phase_pgm(out / "phase.pgm", central)
    if result.final_nrmse_db is not None:
        print(f"final nrmse_db={result.final_nrmse_db:.4f}")
    else:
        print(f"finished {config.n_itr} iterations (no ground truth in bundle)")
    return 0


def cmd_evaluate(args) -> int:
    truth = read_c64(args.truth)
    estimate = read_c64(args.estimate)
    region = EvalRegion(*args.region) if args.region else None
    if region is None and truth.shape != estimate.shape:
        print(
            f"error: truth shape {truth.shape} != estimate shape {estimate.shape}",
            file=sys.stderr,
        )
        return 1
    print(f"{nrmse_db(truth, estimate, region):.4f}")
    return 0


def _run_sweep_cell(cell: dict) -> dict:
    """Simulate, reconstruct, and evaluate one (rho, noise, algo, seed) cell."""
    start = time.perf_counter()
    row = {
        "rho": cell["rho"],
        "rho_achieved": None,
        "msnr_target": cell["msnr"],
        "msnr_achieved": None,
        "algo": cell["algo"],
        "seed": cell["seed"],
        "final_nrmse_db": None,
        "error": "",
    }
    try:
        preset = get_preset(cell["preset"])
        raw = (
            phantoms.bar_chart(preset.object_px)
            if cell["object"] == "bars"
            else phantoms.smooth_bumps(preset.object_px)
        )
        obj = load_phase_object(raw, 0.0, cell["phase_max"])
        spec = preset.probe_spec()
        grid = build_scan_grid(
            obj.shape,
            (preset.detector_px, preset.detector_px),
            preset.probe_radius_px,
            cell["rho"],
            preset.pad_px,
        )
        padded = pad_symmetric(obj, grid.pad_px)
        if cell["msnr"] is None:
            noise = NoiseConfig(kind="noiseless", seed=cell["seed"])
        else:
            noise = NoiseConfig(kind="poisson", target_msnr_db=cell["msnr"], seed=cell["seed"])
        dataset = simulate_dataset(padded, spec, grid, noise)
        config = ReconConfig(
            algorithm=cell["algo"],
            n_itr=preset.n_itr,
            alpha_o=preset.alpha_o,
            seed=cell["seed"],
        )
        result = reconstruct(dataset, dataset.probe, config)
        row["rho_achieved"] = dataset.grid.rho_achieved
        row["msnr_achieved"] = dataset.meta["msnr_achieved_db"]
        row["final_nrmse_db"] = result.final_nrmse_db
    except Exception as exc:  # recorded per cell; the sweep itself continues
        row["error"] = str(exc)
    row["runtime_s"] = time.perf_counter() - start
    return row


def _cell_key(cell: dict) -> str:
    noise = "none" if cell["msnr"] is None else f"{cell['msnr']:g}db"
    return f"rho{cell['rho']:.4f}_{noise}_{cell['algo']}_seed{cell['seed']}"


def _summary_csv(rows: list[dict]) -> str:
    def fmt(value, spec):
        return "" if value is None else format(value, spec)

    lines = [SUMMARY_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    format(row["rho"], ".6g"),
                    fmt(row["rho_achieved"], ".6f"),
                    fmt(row["msnr_target"], ".6g"),
                    fmt(row["msnr_achieved"], ".4f"),
                    row["algo"],
                    str(row["seed"]),
                    fmt(row["final_nrmse_db"], ".4f"),
                    format(row["runtime_s"], ".3f"),
                    row["error"],
                ]
            )
        )
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    preset = get_preset(args.preset)
    rhos = (
        [float(tok) for tok in args.rho_values.split(",") if tok.strip()]
        if args.rho_values
        else list(preset.sweep_rho)
    )
    if args.msnr_values:
        msnrs = [
            None if tok.strip().lower() == "none" else float(tok)
            for tok in args.msnr_values.split(",")
            if tok.strip()
        ]
    else:
        msnrs = list(preset.sweep_msnr)
    algos = [tok.strip().lower() for tok in args.algos.split(",") if tok.strip()]
    seeds = [int(tok) for tok in args.seeds.split(",")] if args.seeds else [args.seed]
    phase_max = args.phase_max if args.phase_max is not None else (
        preset.smooth_phase_max if args.object == "smooth" else preset.bar_phase_max
    )

    cells = [
        {
            "preset": preset.name,
            "object": args.object,
            "phase_max": phase_max,
            "rho": rho,
            "msnr": msnr,
            "algo": algo,
            "seed": seed,
        }
        for rho in rhos
        for msnr in msnrs
        for algo in algos
        for seed in seeds
    ]
    cells.sort(key=lambda c: (c["rho"], -math.inf if c["msnr"] is None else c["msnr"], c["algo"], c["seed"]))

    out = Path(args.out)
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)

    pending = []
    for cell in cells:
        cell_path = cells_dir / f"{_cell_key(cell)}.json"
        if args.force or not cell_path.is_file():
            pending.append(cell)

    if pending:
        if args.threads > 1:
            with ProcessPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(_run_sweep_cell, pending))
        else:
            results = [_run_sweep_cell(cell) for cell in pending]
        for cell, row in zip(pending, results):
            path = cells_dir / f"{_cell_key(cell)}.json"
            _atomic_write_text(path, json.dumps(row, sort_keys=True, indent=2) + "\n")

    rows = []
    for cell in cells:
        cell_path = cells_dir / f"{_cell_key(cell)}.json"
        rows.append(json.loads(cell_path.read_text()))
    _atomic_write_text(out / "summary.csv", _summary_csv(rows))

    failures = [row for row in rows if row["error"]]
    for row in failures:
        print(f"cell rho={row['rho']} algo={row['algo']}: {row['error']}", file=sys.stderr)
    print(f"wrote {len(rows)} cells to {out / 'summary.csv'}")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptychoscan",
        description="Simulate defocused-probe 4D-STEM scans, reconstruct phase objects "
        "with PIE/CPIE, and analyze scan-overlap geometry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_geo = sub.add_parser("geometry", help="overlap-geometry sweep -> CSV")
    p_geo.add_argument("--rho-min", type=float, default=0.05)
    p_geo.add_argument("--rho-max", type=float, default=0.95)
    p_geo.add_argument("--rho-step", type=float, default=0.05)
    p_geo.add_argument("--rho-values", help="comma-separated list overriding the range flags")
    p_geo.add_argument("--probe-diameter", type=int, default=256)
    p_geo.add_argument("--out", required=True)
    p_geo.set_defaults(func=cmd_geometry)

    p_sim = sub.add_parser("simulate", help="simulate a 4D dataset bundle")
    p_sim.add_argument("--object", default="bars", help="'bars', 'smooth', or an image path")
    p_sim.add_argument("--object-size", type=int, help="builtin phantom size in px")
    p_sim.add_argument("--phase-min", type=float, default=0.0)
    p_sim.add_argument("--phase-max", type=float)
    p_sim.add_argument("--rho", type=float, required=True)
    p_sim.add_argument("--noise", choices=["none", "poisson"], default="none")
    p_sim.add_argument("--msnr", type=float, help="target mean SNR in dB (poisson)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--defocus", type=float, help="defocus in m")
    p_sim.add_argument("--alpha", type=float, help="convergence semi-angle in rad")
    p_sim.add_argument("--lambda", dest="lambda_m", type=float, help="wavelength in m")
    p_sim.add_argument("--detector", type=int, help="detector side in px")
    p_sim.add_argument("--fill", type=float, help="disk diameter / array side")
    p_sim.add_argument("--i0", type=float, help="total probe intensity")
    p_sim.add_argument("--pad", type=int, help="symmetric padding in px")
    p_sim.add_argument("--preset", choices=["ci", "paper"])
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="run PIE/CPIE on a bundle")
    p_rec.add_argument("--bundle", required=True)
    p_rec.add_argument("--algo", choices=["pie", "cpie"], default="cpie")
    p_rec.add_argument("--iters", type=int)
    p_rec.add_argument("--alpha-o", type=float)
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--raster-order", action="store_true")
    p_rec.add_argument("--preset", choices=["ci", "paper"])
    p_rec.add_argument("--out", required=True)
    p_rec.set_defaults(func=cmd_reconstruct)

    p_eval = sub.add_parser("evaluate", help="NRMSE between two c64 blobs")
    p_eval.add_argument("--truth", required=True)
    p_eval.add_argument("--estimate", required=True)
    p_eval.add_argument("--region", type=int, nargs=4, metavar=("TOP", "LEFT", "HEIGHT", "WIDTH"))
    p_eval.set_defaults(func=cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="overlap x noise x algorithm sweep -> summary CSV")
    p_sweep.add_argument("--preset", choices=["ci", "paper"], default="ci")
    p_sweep.add_argument("--object", choices=["bars", "smooth"], default="bars")
    p_sweep.add_argument("--phase-max", type=float)
    p_sweep.add_argument("--rho-values", help="comma-separated overlap ratios")
    p_sweep.add_argument("--msnr-values", help="comma-separated dB values; 'none' for noiseless")
    p_sweep.add_argument("--algos", default="pie,cpie")
    p_sweep.add_argument("--seeds", help="comma-separated replicate seeds")
    p_sweep.add_argument("--seed", type=int, default=1)
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--force", action="store_true", help="recompute existing cells")
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
