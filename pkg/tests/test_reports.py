"""Gate observables, spectroscopy, sweeps, and the cross-Kerr-free search."""

import math

import numpy as np
import pytest

from parafloq.circuit import DriveSpec, ToyParams, build_toy_hamiltonian
from parafloq.config import parse_config
from parafloq.fock import FockLayout, OperatorMatrix, number_op
from parafloq.floquet import floquet_decompose, propagate_one_period, static_eigensolve
from parafloq.reports import (
    GateReport,
    SpectroscopyPoint,
    ac_stark_shifts,
    chi_zero_curve,
    compute_point,
    dynamical_cross_kerr,
    gate_amplitude,
    pair_subspace_score,
    sweep,
    two_tone_spectrum,
)

TWO_PI = 2.0 * math.pi


def toy(delta=0.0, **overrides):
    base = dict(
        omega_a=4.0, omega_b=4.7, omega_c=4.3,
        alpha_a=-0.2, alpha_b=-0.2, alpha_c=0.1,
        g_bc=-0.08, g_ca=0.08, delta=delta,
    )
    base.update(overrides)
    return ToyParams(**base)


def solve(toy_params, omega_d, dims=(3, 3, 3), tol=1e-8, n_grid=32):
    layout = FockLayout(dims)
    H = build_toy_hamiltonian(toy_params, DriveSpec(), layout)
    ref = static_eigensolve(H.static_part, layout)
    grid = propagate_one_period(H, omega_d, tol=tol, n_grid=n_grid)
    return ref, floquet_decompose(grid, ref)


def test_static_walsh_identity():
    # with the drive off, the cross-Kerr from quasienergies equals the
    # Walsh combination of exact static eigenenergies
    ref, sol = solve(toy(), 0.9)
    chi = dynamical_cross_kerr(sol)
    static = (
        ref.energy((1, 1, 0))
        - ref.energy((1, 0, 0))
        - ref.energy((0, 1, 0))
        + ref.energy((0, 0, 0))
    )
    assert chi == pytest.approx(static, abs=1e-10)


def test_uncoupled_observables_vanish():
    # drive the bare splitting: without couplings there is no anticrossing,
    # so the folded gap and the Walsh combination both vanish
    ref, sol = solve(toy(g_bc=0.0, g_ca=0.0), 0.7)
    assert gate_amplitude(sol) == pytest.approx(0.0, abs=1e-9)
    assert dynamical_cross_kerr(sol) == pytest.approx(0.0, abs=1e-9)
    stark = ac_stark_shifts(sol)
    for v in stark.values():
        assert v == pytest.approx(0.0, abs=1e-8)


def test_gate_amplitude_invariant_under_global_shift():
    t = toy(delta=0.0)
    layout = FockLayout((3, 3, 3))
    H = build_toy_hamiltonian(t, DriveSpec(), layout)
    shift = 0.37 * TWO_PI
    H2_static = OperatorMatrix(
        layout, H.static_part.array + shift * np.eye(layout.total_dim), "rad/ns"
    )
    from parafloq.circuit import HarmonicHamiltonian

    H2 = HarmonicHamiltonian(H2_static, H.harmonics)
    refs, sols = [], []
    for ham in (H, H2):
        ref = static_eigensolve(ham.static_part, layout)
        grid = propagate_one_period(ham, 0.9, tol=1e-9, n_grid=32)
        sols.append(floquet_decompose(grid, ref))
    assert gate_amplitude(sols[0]) == pytest.approx(gate_amplitude(sols[1]), abs=1e-8)


def test_pair_subspace_score_near_one_for_clean_solution():
    _, sol = solve(toy(), 0.9)
    assert pair_subspace_score(sol) > 0.95


def test_spectroscopy_static_reduction():
    # with the drive off each pair has a single bright line whose weight is
    # the static matrix element and whose frequency is the static difference
    ref, sol = solve(toy(), 0.9)
    probe = number_op(sol.grid.layout, 0)
    points = two_tone_spectrum(sol, probe, k_range=(-8, 8))
    by_pair = {}
    for p in points:
        by_pair.setdefault((p.alpha, p.beta), []).append(p)
    for (a_lab, b_lab), group in by_pair.items():
        static = abs(np.vdot(ref.vector(b_lab), probe.array @ ref.vector(a_lab)))
        bright = max(group, key=lambda p: p.weight)
        if static > 1e-7:
            assert bright.weight == pytest.approx(static, abs=1e-7)
            assert bright.frequency == pytest.approx(
                ref.energy(a_lab) - ref.energy(b_lab), abs=1e-8
            )
        for p in group:
            if p is not bright:
                assert p.weight < 1e-7


def test_spectroscopy_ladder_and_conjugation():
    ref, sol = solve(toy(delta=0.0), 0.9)
    probe = number_op(sol.grid.layout, 0)
    points = two_tone_spectrum(sol, probe, k_range=(-4, 4))
    by_pair = {}
    for p in points:
        by_pair.setdefault((p.alpha, p.beta), {})[p.k] = p
    for (a, b), ladder in by_pair.items():
        ks = sorted(ladder)
        for k1, k2 in zip(ks, ks[1:]):
            spacing = ladder[k2].frequency - ladder[k1].frequency
            assert spacing == pytest.approx((k2 - k1) * sol.omega_d, abs=1e-12)
        # |X_ab,k| = |X_ba,-k|
        for k in ks:
            mirror = by_pair[(b, a)][-k]
            assert ladder[k].weight == pytest.approx(mirror.weight, abs=1e-10)
    with pytest.raises(ValueError):
        # non-Hermitian probe is rejected
        bad = OperatorMatrix(
            sol.grid.layout, np.triu(np.ones((27, 27), dtype=complex))
        )
        two_tone_spectrum(sol, bad)


def base_config(**sweep_kwargs):
    cfg = {
        "toy": {
            "omega_a": 4.0, "omega_b": 4.7, "omega_c": 4.3,
            "alpha_a": -0.2, "alpha_b": -0.2, "alpha_c": 0.1,
            "g_bc": -0.08, "g_ca": 0.08,
        },
        "drive": {"omega_d": 0.9},
        "numerics": {"dims": [3, 3, 3], "propagator_tol": 1e-7, "grid_points": 16},
    }
    if sweep_kwargs:
        cfg["sweep"] = sweep_kwargs
    return parse_config(cfg)


def test_single_point_sweep_equals_direct_computation():
    cfg = base_config()
    reports = sweep(cfg, mode="floquet")
    assert len(reports) == 1
    direct = compute_point(cfg.model, cfg.drive, cfg.numerics, cfg.calibrate, mode="floquet")
    assert reports[0].J_floquet == pytest.approx(direct.J_floquet, abs=1e-12)
    assert reports[0].chi_floquet == pytest.approx(direct.chi_floquet, abs=1e-12)


def test_sweep_deterministic_and_thread_invariant():
    cfg = base_config(axis="omega_c", start=4.2, stop=4.4, count=3)
    serial = sweep(cfg, mode="floquet", threads=1)
    again = sweep(cfg, mode="floquet", threads=1)
    threaded = sweep(cfg, mode="floquet", threads=3)
    for a, b, c in zip(serial, again, threaded):
        assert a.to_row() == b.to_row() == c.to_row()
    assert [r.index for r in serial] == [0, 1, 2]
    assert [r.value for r in serial] == pytest.approx([4.2, 4.3, 4.4])


def test_sweep_records_per_point_failures():
    cfg = base_config(axis="omega_c", start=4.2, stop=4.3, count=2)
    # a driven point with an unreachable tolerance flags every row
    cfg2 = parse_config(
        {
            **cfg.raw,
            "drive": {"omega_d": 0.9, "delta": 0.3},
            "numerics": {"dims": [3, 3, 3], "propagator_tol": 1e-16, "grid_points": 8},
        }
    )
    reports = sweep(cfg2, mode="floquet")
    assert len(reports) == 2
    assert all(r.error for r in reports)
    assert all(math.isnan(r.J_floquet) for r in reports)


def test_analytic_columns_populated():
    cfg = base_config()
    report = sweep(cfg, mode="analytic")[0]
    assert not math.isnan(report.J1)
    assert not math.isnan(report.chi1)
    assert not math.isnan(report.J_bessel)
    assert math.isnan(report.J_floquet)


def test_csv_row_matches_field_order():
    r = GateReport(index=3, axis="omega_c", value=4.25)
    row = r.to_row()
    assert row[0] == 3
    assert row[1] == "omega_c"
    assert row[2] == 4.25
    assert len(row) == len(GateReport.CSV_FIELDS)


def synthetic_reports(chis, values, value2=0.1, J=0.02):
    out = []
    for i, (v, c) in enumerate(zip(values, chis)):
        out.append(
            GateReport(
                index=i, axis="omega_c", value=v,
                axis2="delta", value2=value2,
                J_floquet=J, chi_floquet=c,
            )
        )
    return out


def test_chi_zero_curve_linear_interpolation():
    cfg = base_config()
    values = [4.0, 4.1, 4.2, 4.3]
    reports = synthetic_reports([-2.0, -1.0, 1.0, 3.0], values)
    result = chi_zero_curve(cfg, reports, refine=False)
    assert len(result.roots) == 1
    v2, root, J = result.roots[0]
    assert root == pytest.approx(4.15)
    assert J == pytest.approx(0.02)
    assert not result.omitted


def test_chi_zero_curve_omits_monotone_slice():
    cfg = base_config()
    reports = synthetic_reports([1.0, 2.0, 3.0], [4.0, 4.1, 4.2])
    result = chi_zero_curve(cfg, reports, refine=False)
    assert not result.roots
    assert len(result.omitted) == 1
    assert "no sign change" in result.omitted[0][1]


def test_chi_zero_curve_sweet_spot_detection():
    cfg = base_config()
    values = [4.0, 4.1, 4.2]
    # slope of chi with respect to the drive-amplitude slice flips sign
    # between the first and last control values
    slice_a = synthetic_reports([-1.0, 0.5, 2.0], values, value2=0.1)
    slice_b = synthetic_reports([-1.5, 0.5, 2.5], values, value2=0.2)
    result = chi_zero_curve(cfg, slice_a + slice_b, refine=False)
    assert len(result.sweet_spots) == 1
    assert 4.0 < result.sweet_spots[0] < 4.2
