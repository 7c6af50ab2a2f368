"""Command-line interface.

Subcommands map onto the library surface: ``analyze`` runs a sweep,
``spectroscopy`` emits synthetic two-tone data, ``calibrate`` finds the
drive frequency, ``rabi-check`` validates the extracted gate rate with
time-domain populations, and ``chi-zero`` traces cross-Kerr-free points.

Exit codes: 0 success, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .fock import FockLayout, number_op
from .floquet import (
    calibrate_drive_frequency,
    floquet_decompose,
    propagate_one_period,
    rabi_crosscheck,
    static_eigensolve,
)
from .reports import (
    GATE_PAIR,
    GateReport,
    build_hamiltonian,
    chi_zero_curve,
    sweep,
    two_tone_spectrum,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_csv(path: str, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_metadata(path: str, cfg: RunConfig, command: str, elapsed: float) -> None:
    meta = {
        "tool": "parafloq",
        "version": __version__,
        "command": command,
        "elapsed_seconds": round(elapsed, 3),
        "config": cfg.raw,
    }
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _output_path(args, cfg: RunConfig, default: str) -> str:
    if args.output:
        return args.output
    return cfg.output.get("path", default)


def _setup_system(cfg: RunConfig, rwa: bool):
    from .reports import GateReport  # noqa: F401  (keeps import graph flat)

    layout = FockLayout(tuple(cfg.numerics["dims"]))
    H = build_hamiltonian(cfg.model, cfg.drive, layout)
    if rwa:
        from .circuit import rwa_strip

        H = rwa_strip(H)
    ref = static_eigensolve(H.static_part, layout)
    return layout, H, ref


def _resolve_drive(cfg: RunConfig, H, ref):
    """Calibrated drive frequency, or the configured fixed one."""
    if not cfg.calibrate and cfg.drive.omega_d is not None:
        return cfg.drive.omega_d, math.nan
    guess = abs(ref.energy((0, 1, 0)) - ref.energy((1, 0, 0)))
    return calibrate_drive_frequency(
        H,
        ref,
        guess,
        pair=GATE_PAIR,
        tol=cfg.numerics["propagator_tol"],
        n_grid=cfg.numerics["grid_points"],
    )


def cmd_analyze(args, cfg: RunConfig) -> int:
    t0 = time.time()
    reports = sweep(cfg, mode=args.mode, threads=args.threads, rwa=args.rwa_strip)
    path = _output_path(args, cfg, "analyze.csv")
    _write_csv(path, list(GateReport.CSV_FIELDS), [r.to_row() for r in reports])
    _write_metadata(path, cfg, "analyze", time.time() - t0)
    failures = [r for r in reports if r.error]
    print(f"wrote {len(reports)} rows to {path} ({len(failures)} flagged)")
    if failures and len(failures) == len(reports):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_spectroscopy(args, cfg: RunConfig) -> int:
    t0 = time.time()
    lo, hi = (int(x) for x in args.k_range.split(":"))
    layout, H, ref = _setup_system(cfg, args.rwa_strip)
    omega_d, _ = _resolve_drive(cfg, H, ref)
    grid = propagate_one_period(
        H, omega_d, tol=cfg.numerics["propagator_tol"], n_grid=cfg.numerics["grid_points"]
    )
    sol = floquet_decompose(grid, ref, cfg.numerics["overlap_threshold"])
    probe = number_op(layout, 0)
    points = two_tone_spectrum(sol, probe, k_range=(lo, hi))
    path = _output_path(args, cfg, "spectroscopy.csv")
    rows = [
        ["".join(map(str, p.alpha)), "".join(map(str, p.beta)), p.k, p.frequency, p.weight]
        for p in points
    ]
    _write_csv(path, ["alpha", "beta", "k", "frequency_ghz", "weight"], rows)
    _write_metadata(path, cfg, "spectroscopy", time.time() - t0)
    print(f"wrote {len(points)} spectroscopy points to {path} (omega_d={omega_d:.6f} GHz)")
    return EXIT_OK


def cmd_calibrate(args, cfg: RunConfig) -> int:
    t0 = time.time()
    layout, H, ref = _setup_system(cfg, args.rwa_strip)
    guess = abs(ref.energy((0, 1, 0)) - ref.energy((1, 0, 0)))
    omega_star, gap = calibrate_drive_frequency(
        H,
        ref,
        guess,
        pair=GATE_PAIR,
        tol=cfg.numerics["propagator_tol"],
        n_grid=cfg.numerics["grid_points"],
    )
    path = _output_path(args, cfg, "calibrate.csv")
    _write_csv(
        path,
        ["guess_ghz", "omega_d_star_ghz", "gap_ghz", "J_ab_ghz"],
        [[guess, omega_star, gap, gap / 2.0]],
    )
    _write_metadata(path, cfg, "calibrate", time.time() - t0)
    print(f"omega_d* = {omega_star:.6f} GHz, J_ab = {gap / 2.0 * 1e3:.4f} MHz")
    return EXIT_OK


def cmd_rabi_check(args, cfg: RunConfig) -> int:
    t0 = time.time()
    layout, H, ref = _setup_system(cfg, args.rwa_strip)
    omega_star, gap = _resolve_drive(cfg, H, ref)
    grid = propagate_one_period(
        H, omega_star, tol=cfg.numerics["propagator_tol"], n_grid=cfg.numerics["grid_points"]
    )
    J = gap / 2.0 if not math.isnan(gap) else math.nan
    if math.isnan(J) or J <= 0:
        sol = floquet_decompose(grid, ref, cfg.numerics["overlap_threshold"])
        from .reports import gate_amplitude

        J = gate_amplitude(sol)
    # a full swap cycle lasts 1/(2J) ns; convert to drive periods of 1/omega_d ns
    n_periods = max(10, int(math.ceil(omega_star / (2.0 * J)))) if J > 0 else 100
    traces = rabi_crosscheck(
        grid, ref, GATE_PAIR[1], n_periods, watch_labels=GATE_PAIR[::-1]
    )
    path = _output_path(args, cfg, "rabi.csv")

    def model_pop(t):
        return math.sin(2.0 * math.pi * J * t) ** 2

    rows = [
        [t, traces[GATE_PAIR[1]][i], traces[GATE_PAIR[0]][i], model_pop(t)]
        for i, t in enumerate(traces["times"])
    ]
    _write_csv(path, ["time_ns", "P_initial", "P_target", "sin2_Jt"], rows)
    _write_metadata(path, cfg, "rabi-check", time.time() - t0)
    dev = max(
        abs(traces[GATE_PAIR[0]][i] - model_pop(t))
        for i, t in enumerate(traces["times"])
    )
    print(f"wrote {len(rows)} stroboscopic samples to {path}; max |P - sin^2(Jt)| = {dev:.3e}")
    return EXIT_OK


def cmd_chi_zero(args, cfg: RunConfig) -> int:
    t0 = time.time()
    reports = sweep(cfg, mode="floquet", threads=args.threads, rwa=args.rwa_strip)
    result = chi_zero_curve(cfg, reports)
    path = _output_path(args, cfg, "chi_zero.csv")
    rows = [[v2, root, J] for v2, root, J in result.roots]
    _write_csv(path, ["slice_value", "control_root", "J_at_root_ghz"], rows)
    _write_metadata(path, cfg, "chi-zero", time.time() - t0)
    for v2, reason in result.omitted:
        print(f"slice {v2}: omitted ({reason})")
    for s in result.sweet_spots:
        print(f"sweet spot near control value {s:.6f}")
    print(f"wrote {len(rows)} roots to {path}")
    if not rows and result.omitted:
        return EXIT_NUMERICAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parafloq",
        description="Characterize parametrically driven two-qubit gates",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("analyze", cmd_analyze),
        ("spectroscopy", cmd_spectroscopy),
        ("calibrate", cmd_calibrate),
        ("rabi-check", cmd_rabi_check),
        ("chi-zero", cmd_chi_zero),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--mode", choices=("analytic", "floquet", "both"), default="both")
        p.add_argument("--rwa-strip", action="store_true")
        if name == "spectroscopy":
            p.add_argument("--k-range", default="-15:15")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
