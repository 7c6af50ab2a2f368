"""Closed-form coupling constants of the driven three-mode system.

First- and second-order rotating-wave results expressed through the
hybridization coefficients of a :class:`NormalModeBasis`.  Everything
here is a pure function of its inputs and returns GHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .circuit import CircuitParams, DriveSpec, ToyParams, classical_displacement, solve_eta
from .normal_modes import NormalModeBasis, drive_dependent_basis

DEN_TOL_GHZ = 1e-3

# bookkeeping parameter of the perturbative expansion; kept explicit so the
# power counting in the formulas below stays visible
LAMBDA = 1.0


@dataclass(frozen=True)
class EffectiveCouplings:
    """Coupling constants of the effective gate Hamiltonian, GHz."""

    J_ab: float
    alpha_a: float
    alpha_b: float
    alpha_c: float
    chi_ab: float
    chi_bc: float
    chi_ca: float
    J_ab_cond: dict = field(default_factory=dict)
    K_ab: float = 0.0
    order: int = 1


@dataclass(frozen=True)
class CrossResonanceCouplings:
    """Rates of the parametrically activated cross-resonance terms, GHz."""

    Omega_a: float
    Omega_aa: float
    Omega_ab: float
    Omega_ac: float


@dataclass(frozen=True)
class SecondOrderChi:
    """Second-order cross-Kerr between the two qubit-like modes.

    ``chi2_bare`` uses plain normal-mode frequency denominators;
    ``chi2_dressed`` corrects the denominators with anharmonicity
    combinations (virtual two-photon processes see shifted poles).
    ``divergent`` is set when any denominator comes within ``den_tol``
    of zero, in which case the corresponding value is unreliable.
    """

    chi2_bare: float
    chi2_dressed: float
    divergent_bare: bool
    divergent_dressed: bool


def toy_first_order(basis: NormalModeBasis, toy: ToyParams) -> EffectiveCouplings:
    """Lowest-order couplings from hybridization alone."""
    u = basis.u
    alpha_bare = np.array([toy.alpha_a, toy.alpha_b, toy.alpha_c])
    J = u[2, 0] * u[2, 1] * toy.delta / 2.0
    alpha_dressed = [float(np.sum(u[:, j] ** 4 * alpha_bare)) for j in range(3)]

    def chi(j, k):
        return float(np.sum(2.0 * u[:, j] ** 2 * u[:, k] ** 2 * alpha_bare))

    return EffectiveCouplings(
        J_ab=J,
        alpha_a=alpha_dressed[0],
        alpha_b=alpha_dressed[1],
        alpha_c=alpha_dressed[2],
        chi_ab=chi(0, 1),
        chi_bc=chi(1, 2),
        chi_ca=chi(2, 0),
        order=1,
    )


def toy_second_order_chi(
    basis: NormalModeBasis, toy: ToyParams, den_tol: float = DEN_TOL_GHZ
) -> SecondOrderChi:
    """Second-order cross-Kerr, plain and anharmonicity-dressed flavors.

    The sums run over bare-mode anharmonicities weighted by hybridization
    coefficients taken with the normal-mode index first.
    """
    w = basis.u.T  # w[normal, bare]
    al = np.array([toy.alpha_a, toy.alpha_b, toy.alpha_c])
    wa, wb, wc = w[0], w[1], w[2]
    oa, ob, oc = basis.freqs

    n1 = float(np.sum(wa**2 * wb * wc * al))
    n2 = float(np.sum(wa * wb**2 * wc * al))
    n3 = float(np.sum(wa * wb * wc**2 * al))
    n4 = float(np.sum(wa**3 * wb * al))
    n5 = float(np.sum(wa * wb**3 * al))
    # drive-linear piece; with the convention above u_ac -> w[0, 2]
    n6 = w[0, 2] * w[1, 2] * float(np.sum(wa * wb * (wa**2 - wb**2) * al))

    dens_bare = [ob - oc, oa - oc, oa + ob - 2.0 * oc, oa - ob, oa - ob, oa - ob]
    dens_dressed = [
        ob - oc + float(np.sum(2.0 * wa**2 * (wb**2 - wc**2) * al)),
        oa - oc + float(np.sum(2.0 * wb**2 * (wa**2 - wc**2) * al)),
        oa + ob - 2.0 * oc + float(np.sum((2.0 * wa**2 * wb**2 - wc**4) * al)),
        oa - ob + float(np.sum((wa**4 - 2.0 * wa**2 * wb**2) * al)),
        oa - ob + float(np.sum((2.0 * wa**2 * wb**2 - wb**4) * al)),
    ]
    nums = [4.0 * n1**2, 4.0 * n2**2, 2.0 * n3**2, -2.0 * n4**2, 2.0 * n5**2]

    div_bare = any(abs(d) < den_tol for d in dens_bare)
    div_dressed = any(abs(d) < den_tol for d in dens_dressed) or abs(dens_bare[5]) < den_tol

    def safe(num, den):
        return num / den if abs(den) >= den_tol else 0.0

    chi_bare = sum(safe(n, d) for n, d in zip(nums, dens_bare[:5]))
    chi_bare += safe(toy.delta * n6, dens_bare[5])
    chi_dressed = sum(safe(n, d) for n, d in zip(nums, dens_dressed))
    chi_dressed += safe(toy.delta * n6, dens_bare[5])
    return SecondOrderChi(chi_bare, chi_dressed, div_bare, div_dressed)


def toy_bessel_gate_rate(basis: NormalModeBasis, toy: ToyParams, drive: DriveSpec) -> float:
    """Gate rate including drive-amplitude saturation through Bessel factors."""
    if drive.omega_d is None or drive.omega_d <= 0:
        raise ValueError("drive.omega_d must be positive")
    u = basis.u
    d = toy.delta
    xa = d * u[2, 0] ** 2 / drive.omega_d
    xb = d * u[2, 1] ** 2 / drive.omega_d
    return (
        (d / 2.0)
        * u[2, 0]
        * u[2, 1]
        * (jv(0, xa) * jv(0, xb) + 3.0 * jv(1, xa) * jv(1, xb))
    )


def _coupler_branch_energies(
    params: CircuitParams, drive: DriveSpec, basis: NormalModeBasis
) -> tuple[float, float]:
    """Exponentially reduced coupler Josephson energies for the two branches."""
    uc2 = float(np.sum(basis.u[2] ** 2))
    E_alpha = math.exp(-uc2 / 4.0) * params.E_Jc
    E_beta = math.exp(-uc2 / (4.0 * params.N**2)) * params.E_Jc
    return E_alpha, E_beta


def circuit_first_order(
    basis: NormalModeBasis, params: CircuitParams, drive: DriveSpec
) -> EffectiveCouplings:
    """Full-circuit couplings with flux-angle and Bessel drive factors.

    Flux angles are taken relative to the displaced coupler minimum, so
    this is consistent with the Hamiltonian built by the circuit module.
    """
    u = basis.u
    mu_a, mu_b = params.flux_weights()
    N = params.N
    eps = params.epsilon
    phi_cls = classical_displacement(params, drive)
    theta_a = phi_cls + mu_a * drive.phi_ext_bar
    theta_b = phi_cls / N + mu_b * drive.phi_ext_bar
    E_alpha, E_beta = _coupler_branch_energies(params, drive, basis)

    E_prime = np.array(
        [
            math.exp(-float(np.sum(u[0] ** 2)) / 4.0) * params.E_Ja,
            math.exp(-float(np.sum(u[1] ** 2)) / 4.0) * params.E_Jb,
            params.alpha * eps * jv(0, mu_a * drive.delta_phi) * math.cos(theta_a) * E_alpha
            + (params.beta / N**3) * jv(0, mu_b * drive.delta_phi) * math.cos(theta_b) * E_beta,
        ]
    )

    J = -(u[2, 0] * u[2, 1] / 2.0) * (
        params.alpha * eps * jv(1, mu_a * drive.delta_phi) * math.sin(theta_a) * E_alpha
        + (params.beta / N) * jv(1, mu_b * drive.delta_phi) * math.sin(theta_b) * E_beta
    )
    alpha_dressed = [-(1.0 / 8.0) * float(np.sum(u[:, j] ** 4 * E_prime)) for j in range(3)]

    def chi(j, k):
        return -(1.0 / 4.0) * float(np.sum(u[:, j] ** 2 * u[:, k] ** 2 * E_prime))

    cond = {key: -(u[2, j] ** 2 / 4.0) * J for j, key in enumerate(("a", "b", "c"))}
    K = -(u[2, 0] ** 2 * u[2, 1] ** 2 / 16.0) * (
        params.alpha * eps * jv(2, mu_a * drive.delta_phi) * math.cos(theta_a) * E_alpha
        + (params.beta / N**3) * jv(2, mu_b * drive.delta_phi) * math.cos(theta_b) * E_beta
    )
    return EffectiveCouplings(
        J_ab=J,
        alpha_a=alpha_dressed[0],
        alpha_b=alpha_dressed[1],
        alpha_c=alpha_dressed[2],
        chi_ab=chi(0, 1),
        chi_bc=chi(1, 2),
        chi_ca=chi(2, 0),
        J_ab_cond=cond,
        K_ab=K,
        order=1,
    )


def cross_resonance_couplings(
    basis: NormalModeBasis, params: CircuitParams, drive: DriveSpec
) -> CrossResonanceCouplings:
    """Rates for a drive at the bare qubit frequency (target-mode drive)."""
    u = basis.u
    mu_a, mu_b = params.flux_weights()
    N = params.N
    eps = params.epsilon
    phi_cls = classical_displacement(params, drive)
    theta_a = phi_cls + mu_a * drive.phi_ext_bar
    theta_b = phi_cls / N + mu_b * drive.phi_ext_bar
    E_alpha, E_beta = _coupler_branch_energies(params, drive, basis)

    fa = params.alpha * eps * jv(1, mu_a * drive.delta_phi) * math.cos(theta_a) * E_alpha
    fb = params.beta * jv(1, mu_b * drive.delta_phi) * math.cos(theta_b) * E_beta
    E2 = (fa + fb) / math.sqrt(2.0)
    E3 = -(fa + fb / N**2) / math.sqrt(2.0)
    return CrossResonanceCouplings(
        Omega_a=u[2, 0] * E2,
        Omega_aa=u[2, 0] ** 3 * E3 / 2.0,
        Omega_ab=u[2, 0] * u[2, 1] ** 2 * E3,
        Omega_ac=u[2, 0] * u[2, 2] ** 2 * E3,
    )


def coupler_frequency(params: CircuitParams, drive: DriveSpec, phi_ext_bar: float) -> float:
    """Coupler normal-mode frequency at a given static flux, GHz."""
    d = DriveSpec(
        phi_ext_bar=phi_ext_bar,
        delta_phi=drive.delta_phi,
        omega_d=drive.omega_d,
        n_harmonics=drive.n_harmonics,
    )
    return float(drive_dependent_basis(params, d).freqs[2])


def flux_reparametrization(
    params: CircuitParams,
    drive: DriveSpec,
    target_omega_c: float,
    bracket_halfwidth: float = 1.5,
) -> float:
    """Flux bias whose coupler normal-mode frequency equals the target.

    Used to absorb higher-order corrections to the coupler transition
    into a redefinition of the static flux.  Solves by bisection on a
    bracket around the nominal bias; raises if no sign change is found.
    """

    def residual(phi):
        return coupler_frequency(params, drive, phi) - target_omega_c

    phi0 = drive.phi_ext_bar
    r0 = residual(phi0)
    if abs(r0) < 1e-9:
        return phi0
    for half in np.linspace(0.05, bracket_halfwidth, 12):
        lo, hi = phi0 - half, phi0 + half
        try:
            rlo, rhi = residual(lo), residual(hi)
        except Exception:
            continue
        if rlo * rhi < 0:
            root = brentq(residual, lo, hi, xtol=1e-12)
            if abs(residual(root)) > 1e-9:
                raise RuntimeError("flux reparametrization did not converge")
            return float(root)
    raise ValueError("no flux bracket found for the requested coupler frequency")


GATE_TABLE = {
    "iSWAP": ("difference", "a†a b†b cross-Kerr"),
    "two-mode-squeezing": ("sum", "a†a b†b cross-Kerr"),
    "CZ": (None, None),
    "CNOT": ("target", "-i(a - a†) a†a local drive"),
    "CSWAP": ("difference", "unconditional beam-splitter -i a†b + H.c."),
}


def gate_menu(omega_a: float, omega_b: float, requested_gate: str) -> dict:
    """Drive frequency and dominant unwanted term for a requested gate."""
    if requested_gate not in GATE_TABLE:
        raise ValueError(
            f"unknown gate {requested_gate!r}; choose from {sorted(GATE_TABLE)}"
        )
    kind, unwanted = GATE_TABLE[requested_gate]
    if kind is None:
        omega_d = None
    elif kind == "difference":
        omega_d = abs(omega_a - omega_b)
    elif kind == "sum":
        omega_d = omega_a + omega_b
    else:
        omega_d = omega_a
    return {"gate": requested_gate, "omega_d": omega_d, "unwanted": unwanted}
