"""Gate observables, synthetic spectroscopy, and sweep orchestration.

Everything downstream of the Floquet engine lives here: extracting the
gate amplitude and cross-Kerr from labeled quasienergies, Fourier
spectra for two-tone response, parameter sweeps, and the search for
cross-Kerr-free operating points.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analytics import (
    circuit_first_order,
    toy_bessel_gate_rate,
    toy_first_order,
    toy_second_order_chi,
)
from .circuit import (
    CircuitParams,
    DriveSpec,
    HarmonicHamiltonian,
    ToyParams,
    build_circuit_hamiltonian,
    build_toy_hamiltonian,
    rwa_strip,
)
from .config import RunConfig
from .fock import FockLayout, OperatorMatrix
from .floquet import (
    FloquetSolution,
    StaticReference,
    calibrate_drive_frequency,
    floquet_decompose,
    floquet_modes_on_grid,
    labeled_gap,
    propagate_one_period,
    static_eigensolve,
)

TWO_PI = 2.0 * math.pi

GATE_PAIR = ((1, 0, 0), (0, 1, 0))
WALSH_LABELS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0))
SPECTRO_LABELS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


class ExcludedLabelError(RuntimeError):
    """A required Floquet label fell into the exclusion set."""


@dataclass
class GateReport:
    """One sweep point worth of observables.  NaN marks unavailable."""

    index: int
    axis: str = ""
    value: float = math.nan
    axis2: str = ""
    value2: float = math.nan
    omega_d_star: float = math.nan
    J_floquet: float = math.nan
    chi_floquet: float = math.nan
    stark_100: float = math.nan
    stark_010: float = math.nan
    stark_001: float = math.nan
    J1: float = math.nan
    J_bessel: float = math.nan
    chi1: float = math.nan
    chi2: float = math.nan
    K_ab: float = math.nan
    excluded: str = ""
    error: str = ""

    CSV_FIELDS = (
        "index", "axis", "value", "axis2", "value2", "omega_d_star",
        "J_floquet", "chi_floquet", "stark_100", "stark_010", "stark_001",
        "J1", "J_bessel", "chi1", "chi2", "K_ab", "excluded", "error",
    )

    def to_row(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


@dataclass(frozen=True)
class SpectroscopyPoint:
    """One candidate probe transition with its response weight."""

    alpha: tuple
    beta: tuple
    k: int
    frequency: float  # GHz
    weight: float


def pair_subspace_score(solution: FloquetSolution, pair: tuple = GATE_PAIR) -> float:
    """Joint tracking quality of two labels.

    At an anticrossing the two Floquet modes are near-equal mixtures of
    the two reference states, so the individual overlaps hover at 1/2
    while the two-dimensional subspaces still coincide.  This score is
    the mean total weight of the reference pair inside the mode pair;
    it stays near 1 through the crossing and only drops when population
    leaks to other states.
    """
    ref = solution.reference
    vecs = np.column_stack([ref.vector(lab) for lab in pair])
    modes = solution.modes_t0[:, [solution.labels[lab][0] for lab in pair]]
    return float(np.sum(np.abs(vecs.conj().T @ modes) ** 2) / len(pair))


def gate_amplitude(
    solution: FloquetSolution, pair: tuple = GATE_PAIR, threshold: float = 0.5
) -> float:
    """Half the labeled anticrossing gap at the calibrated drive.

    Exclusion is judged on the two-state subspace, not per label: the
    intentional hybridization at the anticrossing halves the individual
    overlaps without making the gap ill-defined.
    """
    bad = [lab for lab in pair if lab in solution.excluded]
    if bad and pair_subspace_score(solution, pair) < threshold:
        raise ExcludedLabelError(f"labels excluded: {bad}")
    return labeled_gap(solution, pair) / 2.0


def dynamical_cross_kerr(solution: FloquetSolution, threshold: float = 0.5) -> float:
    """Interaction energy of joint excitation, from unfolded quasienergies.

    The gate pair enters only through the sum of its two unfolded
    quasienergies, which is invariant under mixing inside the pair, so
    the pair is accepted on its joint subspace score.  The ground and
    doubly excited labels must be individually tracked.
    """
    for lab in ((0, 0, 0), (1, 1, 0)):
        if lab in solution.excluded:
            raise ExcludedLabelError(f"label excluded: {lab}")
    pair = ((1, 0, 0), (0, 1, 0))
    bad = [lab for lab in pair if lab in solution.excluded]
    if bad and pair_subspace_score(solution, pair) < threshold:
        raise ExcludedLabelError(f"labels excluded: {bad}")
    e = {lab: solution.unfolded(lab) for lab in WALSH_LABELS}
    return e[(1, 1, 0)] - e[(1, 0, 0)] - e[(0, 1, 0)] + e[(0, 0, 0)]


def ac_stark_shifts(solution: FloquetSolution, labels=((1, 0, 0), (0, 1, 0), (0, 0, 1))) -> dict:
    """Unfolded quasienergy minus the static reference energy, per label."""
    out = {}
    for lab in labels:
        if lab in solution.excluded:
            out[lab] = math.nan
        else:
            out[lab] = solution.unfolded(lab) - solution.reference.energy(lab)
    return out


def two_tone_spectrum(
    solution: FloquetSolution,
    probe: OperatorMatrix,
    k_range: tuple = (-15, 15),
    labels: tuple = SPECTRO_LABELS,
) -> list:
    """Probe transition frequencies and weights from Fourier coefficients.

    The periodic matrix element of the probe between two Floquet modes is
    sampled on the stored grid and transformed; weight is the magnitude
    of the coefficient, frequency is the quasienergy difference shifted
    by k drive quanta.
    """
    if not probe.is_hermitian(1e-9):
        raise ValueError("probe operator must be Hermitian")
    modes = floquet_modes_on_grid(solution)  # [time, dim, mode]
    n_t = len(solution.grid.times) - 1  # drop duplicated endpoint
    usable = [lab for lab in labels if lab not in solution.excluded]
    idx = {lab: solution.labels[lab][0] for lab in usable}
    eps = solution.quasienergies
    X = probe.array
    points = []
    phases = np.exp(
        1j * TWO_PI * np.outer(np.arange(k_range[0], k_range[1] + 1), np.arange(n_t)) / n_t
    )
    ks = range(k_range[0], k_range[1] + 1)
    for a_lab in usable:
        for b_lab in usable:
            if a_lab == b_lab:
                continue
            ia, ib = idx[a_lab], idx[b_lab]
            f = np.array(
                [np.vdot(modes[t][:, ib], X @ modes[t][:, ia]) for t in range(n_t)]
            )
            coeffs = phases @ f / n_t
            for k, c in zip(ks, coeffs):
                points.append(
                    SpectroscopyPoint(
                        alpha=a_lab,
                        beta=b_lab,
                        k=int(k),
                        frequency=float(eps[ia] - eps[ib] + k * solution.omega_d),
                        weight=float(abs(c)),
                    )
                )
    return points


def _apply_axis(model, drive: DriveSpec, axis: str, value: float):
    """Return (model, drive) with one sweep axis set."""
    if isinstance(model, ToyParams):
        if axis == "omega_c":
            return replace(model, omega_c=value), drive
        if axis == "delta":
            return replace(model, delta=value), drive
    else:
        if axis == "phi_ext_bar_over_2pi":
            return model, replace(drive, phi_ext_bar=TWO_PI * value)
        if axis == "delta_phi_over_2pi":
            return model, replace(drive, delta_phi=TWO_PI * value)
    raise ValueError(f"unknown sweep axis {axis!r} for this model")


def build_hamiltonian(model, drive: DriveSpec, layout: FockLayout) -> HarmonicHamiltonian:
    if isinstance(model, ToyParams):
        return build_toy_hamiltonian(model, drive, layout)
    return build_circuit_hamiltonian(model, drive, layout)


def _analytic_columns(report: GateReport, model, drive: DriveSpec, numerics: dict) -> None:
    from .normal_modes import drive_dependent_basis, toy_normal_mode_basis

    den_tol = numerics.get("den_tol", 1e-3)
    if isinstance(model, ToyParams):
        basis = toy_normal_mode_basis(model)
        first = toy_first_order(basis, model)
        report.J1 = first.J_ab
        report.chi1 = first.chi_ab
        omega_d = drive.omega_d
        if omega_d is None:
            omega_d = abs(basis.freqs[1] - basis.freqs[0])
        report.J_bessel = toy_bessel_gate_rate(
            basis, model, replace(drive, omega_d=omega_d)
        )
        second = toy_second_order_chi(basis, model, den_tol=den_tol)
        if not second.divergent_dressed:
            report.chi2 = first.chi_ab + second.chi2_dressed
    else:
        basis = drive_dependent_basis(model, drive)
        first = circuit_first_order(basis, model, drive)
        report.J1 = first.J_ab
        report.chi1 = first.chi_ab
        report.K_ab = first.K_ab


def compute_point(
    model,
    drive: DriveSpec,
    numerics: dict,
    calibrate: bool,
    mode: str = "both",
    rwa: bool = False,
    report: GateReport = None,
) -> GateReport:
    """Full single-point pipeline: build, calibrate, solve, extract."""
    if report is None:
        report = GateReport(index=0)
    if mode in ("analytic", "both"):
        try:
            _analytic_columns(report, model, drive, numerics)
        except Exception as exc:
            report.error = f"analytic: {exc}"
    if mode not in ("floquet", "both"):
        return report
    try:
        layout = FockLayout(tuple(numerics["dims"]))
        H = build_hamiltonian(model, drive, layout)
        if rwa:
            H = rwa_strip(H)
        ref = static_eigensolve(H.static_part, layout)
        if calibrate or drive.omega_d is None:
            guess = ref.energy((0, 1, 0)) - ref.energy((1, 0, 0))
            omega_star, gap = calibrate_drive_frequency(
                H,
                ref,
                abs(guess),
                pair=GATE_PAIR,
                tol=numerics["propagator_tol"],
                n_grid=numerics["grid_points"],
            )
        else:
            omega_star = drive.omega_d
        report.omega_d_star = omega_star
        grid = propagate_one_period(
            H, omega_star, tol=numerics["propagator_tol"], n_grid=numerics["grid_points"]
        )
        sol = floquet_decompose(grid, ref, numerics["overlap_threshold"])
        report.excluded = ";".join(
            "".join(map(str, lab)) for lab in sorted(sol.excluded)
        )
        try:
            report.J_floquet = gate_amplitude(sol)
        except ExcludedLabelError:
            pass
        try:
            report.chi_floquet = dynamical_cross_kerr(sol)
        except ExcludedLabelError:
            pass
        stark = ac_stark_shifts(sol)
        report.stark_100 = stark[(1, 0, 0)]
        report.stark_010 = stark[(0, 1, 0)]
        report.stark_001 = stark[(0, 0, 1)]
    except Exception as exc:
        report.error = (report.error + "; " if report.error else "") + f"floquet: {exc}"
    return report


def sweep(cfg: RunConfig, mode: str = "both", threads: int = 1, rwa: bool = False) -> list:
    """Evaluate every grid point; failures become flagged rows.

    Output ordering is by grid index regardless of execution order, so
    results are identical across thread counts.
    """
    sw = cfg.sweep
    if sw is None:
        points = [(0, None, None, None, None)]
    else:
        values = np.linspace(sw["start"], sw["stop"], sw["count"])
        if "axis2" in sw:
            pairs = [
                (sw["axis"], v1, sw["axis2"]["axis"], v2)
                for v2 in sw["axis2"]["values"]
                for v1 in values
            ]
        else:
            pairs = [(sw["axis"], v, "", math.nan) for v in values]
        points = [(i, a1, v1, a2, v2) for i, (a1, v1, a2, v2) in enumerate(pairs)]

    def run_one(point):
        i, axis, value, axis2, value2 = point
        model, drive = cfg.model, cfg.drive
        report = GateReport(index=i)
        if axis is not None:
            report.axis, report.value = axis, float(value)
            model, drive = _apply_axis(model, drive, axis, float(value))
            if axis2:
                report.axis2, report.value2 = axis2, float(value2)
                model, drive = _apply_axis(model, drive, axis2, float(value2))
        return compute_point(
            model, drive, cfg.numerics, cfg.calibrate, mode=mode, rwa=rwa, report=report
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(run_one, points))
    else:
        reports = [run_one(p) for p in points]
    reports.sort(key=lambda r: r.index)
    return reports


@dataclass
class ChiZeroResult:
    """Cross-Kerr-free operating points per drive-amplitude slice."""

    roots: list = field(default_factory=list)  # (value2, control root, J at root)
    omitted: list = field(default_factory=list)  # (value2, reason)
    sweet_spots: list = field(default_factory=list)  # control values with flat chi(delta)
    traces: dict = field(default_factory=dict)  # value2 -> list of (chi, J)


def chi_zero_curve(cfg: RunConfig, reports: list, refine: bool = True) -> ChiZeroResult:
    """Locate sign changes of the cross-Kerr along the control axis.

    For each secondary-axis slice the first bracketing pair of grid
    points is interpolated linearly and, when requested, refined with
    two extra Floquet solves (bisection steps).  Slices without a sign
    change are reported as omitted.
    """
    result = ChiZeroResult()
    slices: dict = {}
    for r in reports:
        slices.setdefault(r.value2 if r.axis2 else math.nan, []).append(r)

    for v2, rows in sorted(slices.items(), key=lambda kv: (math.isnan(kv[0]), kv[0])):
        rows = sorted(rows, key=lambda r: r.value)
        usable = [r for r in rows if not math.isnan(r.chi_floquet)]
        result.traces[v2] = [
            (r.chi_floquet, r.J_floquet) for r in usable if not math.isnan(r.J_floquet)
        ]
        bracket = None
        for r1, r2 in zip(usable, usable[1:]):
            if r1.chi_floquet == 0.0 or r1.chi_floquet * r2.chi_floquet < 0:
                bracket = (r1, r2)
                break
        if bracket is None:
            result.omitted.append((v2, "no sign change of chi along the control axis"))
            continue
        r1, r2 = bracket
        x1, x2 = r1.value, r2.value
        c1, c2 = r1.chi_floquet, r2.chi_floquet
        root = x1 if c1 == 0 else x1 - c1 * (x2 - x1) / (c2 - c1)
        J_est = r1.J_floquet
        if refine:
            axis = r1.axis
            axis2 = r1.axis2
            lo, hi, clo = x1, x2, c1
            for _ in range(2):
                mid = 0.5 * (lo + hi)
                model, drive = cfg.model, cfg.drive
                model, drive = _apply_axis(model, drive, axis, mid)
                if axis2:
                    model, drive = _apply_axis(model, drive, axis2, v2)
                rep = compute_point(model, drive, cfg.numerics, cfg.calibrate)
                if math.isnan(rep.chi_floquet):
                    break
                if clo * rep.chi_floquet <= 0:
                    hi = mid
                else:
                    lo, clo = mid, rep.chi_floquet
                J_est = rep.J_floquet
            root = 0.5 * (lo + hi)
        result.roots.append((v2, float(root), float(J_est)))

    # a sweet spot is a control value whose chi barely moves with the
    # secondary axis: finite-difference slope changes sign or stays tiny
    keys = [k for k in sorted(result.traces) if not math.isnan(k)]
    if len(keys) >= 2:
        by_value = {}
        for r in reports:
            if not math.isnan(r.chi_floquet) and r.axis2:
                by_value.setdefault(round(r.value, 12), {})[r.value2] = r.chi_floquet
        k0, k1 = keys[0], keys[1]
        grid = sorted(v for v, d in by_value.items() if k0 in d and k1 in d)
        slopes = [
            (v, (by_value[v][k1] - by_value[v][k0]) / (k1 - k0)) for v in grid
        ]
        for (va, sa), (vb, sb) in zip(slopes, slopes[1:]):
            if sa == 0.0 or sa * sb < 0:
                result.sweet_spots.append(
                    va if sa == 0 else va - sa * (vb - va) / (sb - sa)
                )
    return result
