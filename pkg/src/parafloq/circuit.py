"""Physical circuit parameters to bare-mode Hamiltonians.

Input frequencies and energies are ordinary frequencies in GHz
(E/h conventions); constructed Hamiltonian matrices are in angular
units, rad/ns.  Flux variables are in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import jv

from .fock import (
    FockLayout,
    OperatorMatrix,
    annihilator,
    embed,
    total_number_projector_mask,
)

TWO_PI = 2.0 * math.pi

# e^2 / (2 h), expressed in GHz * fF: charging energy of 1 fF.
E_SQUARED_OVER_2H_GHZ_FF = 19.370454

ETA_BRACKET = (1e-6, 10.0)
ETA_TOL = 1e-12


class ModeSofteningError(ValueError):
    """Coupler form factor is nonpositive: flux bias too close to frustration."""


@dataclass(frozen=True)
class CircuitParams:
    """Capacitances in fF, Josephson energies in GHz."""

    C_a: float
    C_b: float
    C_c: float
    E_Ja: float
    E_Jb: float
    E_Jc: float
    alpha: float
    beta: float
    N: int
    C_ab: float = 0.0
    C_bc: float = 0.0
    C_ac: float = 0.0
    C_alpha: float | None = None
    C_beta: float | None = None
    mu_alpha: float | None = None
    mu_beta: float | None = None
    epsilon: float = 1.0

    def __post_init__(self):
        if min(self.C_a, self.C_b, self.C_c) <= 0:
            raise ValueError("diagonal capacitances must be positive")
        if min(self.C_ab, self.C_bc, self.C_ac) < 0:
            raise ValueError("coupling capacitances must be nonnegative")
        if min(self.E_Ja, self.E_Jb, self.E_Jc) <= 0:
            raise ValueError("Josephson energies must be positive")
        if self.N < 1:
            raise ValueError("array junction count N must be >= 1")

    def flux_weights(self) -> tuple[float, float]:
        """Branch flux weights (mu_alpha, mu_beta).

        Explicit mu values win; otherwise they follow from the branch
        capacitances; otherwise the flux is allocated entirely to the
        single-junction branch (mu_alpha=1, mu_beta=0), the zero-shunt
        limit of the capacitance rule.
        """
        if self.mu_alpha is not None or self.mu_beta is not None:
            ma = 1.0 if self.mu_alpha is None else self.mu_alpha
            mb = (ma - 1.0) / self.N if self.mu_beta is None else self.mu_beta
            return ma, mb
        if self.C_alpha is not None or self.C_beta is not None:
            return mu_weights(self.C_alpha or 0.0, self.C_beta or 0.0, self.N)
        return 1.0, 0.0


@dataclass(frozen=True)
class DriveSpec:
    """Static flux bias, flux-modulation amplitude (radians) and drive frequency (GHz)."""

    phi_ext_bar: float = 0.0
    delta_phi: float = 0.0
    omega_d: float | None = None
    n_harmonics: int = 2

    def __post_init__(self):
        if self.delta_phi < 0:
            raise ValueError("delta_phi must be >= 0")
        if self.omega_d is not None and self.omega_d <= 0:
            raise ValueError("omega_d must be positive when set")
        if self.n_harmonics < 1:
            raise ValueError("n_harmonics must be >= 1")


@dataclass(frozen=True)
class ToyParams:
    """Kerr-oscillator triple with beam-splitter couplings, all in GHz."""

    omega_a: float
    omega_b: float
    omega_c: float
    alpha_a: float
    alpha_b: float
    alpha_c: float
    g_ab: float = 0.0
    g_bc: float = 0.0
    g_ca: float = 0.0
    delta: float = 0.0


@dataclass
class HarmonicHamiltonian:
    """H(t) = H0 + sum_n [C_n cos(n w_d t) + S_n sin(n w_d t)], components in rad/ns."""

    static_part: OperatorMatrix
    harmonics: dict[int, tuple[OperatorMatrix, OperatorMatrix]] = field(default_factory=dict)

    @property
    def layout(self) -> FockLayout:
        return self.static_part.layout

    def at(self, t: float, omega_d: float) -> np.ndarray:
        """Evaluate H(t) for angular drive frequency omega_d (rad/ns)."""
        h = self.static_part.array.copy()
        for n, (cos_part, sin_part) in self.harmonics.items():
            h += math.cos(n * omega_d * t) * cos_part.array
            h += math.sin(n * omega_d * t) * sin_part.array
        return h

    def is_static(self) -> bool:
        return not any(
            np.any(c.array) or np.any(s.array) for c, s in self.harmonics.values()
        )


def charging_energies(params: CircuitParams) -> dict[str, float]:
    """Charging energies (GHz) from inverting the capacitance matrix."""
    C = np.array(
        [
            [params.C_a + params.C_ab + params.C_ac, -params.C_ab, -params.C_ac],
            [-params.C_ab, params.C_b + params.C_ab + params.C_bc, -params.C_bc],
            [-params.C_ac, -params.C_bc, params.C_c + params.C_ac + params.C_bc],
        ]
    )
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise ValueError("capacitance matrix is not positive definite") from exc
    Cinv = np.linalg.inv(C)
    k = E_SQUARED_OVER_2H_GHZ_FF
    return {
        "E_Ca": k * Cinv[0, 0],
        "E_Cb": k * Cinv[1, 1],
        "E_Cc": k * Cinv[2, 2],
        # cross charging energies carry twice the e^2/2 scale so that the
        # kinetic energy reads 4 E_Cjk n_j n_k per unordered pair
        "E_Cab": 2.0 * k * Cinv[0, 1],
        "E_Cbc": 2.0 * k * Cinv[1, 2],
        "E_Cca": 2.0 * k * Cinv[2, 0],
    }


def mu_weights(C_alpha: float, C_beta: float, N: int) -> tuple[float, float]:
    """Flux allocation weights from the two branch-capacitance constraints."""
    total = C_alpha + C_beta
    if total <= 0:
        raise ValueError("need C_alpha + C_beta > 0")
    mu_a = C_beta / total
    mu_b = -(C_alpha / total) / N
    return mu_a, mu_b


def classical_displacement(params: CircuitParams, drive: DriveSpec) -> float:
    """Minimum of the static coupler potential in the principal branch.

    Root of  alpha J0(mu_a dphi) sin(phi + mu_a phibar)
           + beta  J0(mu_b dphi) sin(phi/N + mu_b phibar) = 0
    with positive curvature.
    """
    mu_a, mu_b = params.flux_weights()
    N = params.N
    ca = params.alpha * jv(0, mu_a * drive.delta_phi)
    cb = params.beta * jv(0, mu_b * drive.delta_phi)
    pa = mu_a * drive.phi_ext_bar
    pb = mu_b * drive.phi_ext_bar

    def grad(phi):
        return ca * math.sin(phi + pa) + cb * math.sin(phi / N + pb)

    def curv(phi):
        return ca * math.cos(phi + pa) + cb * math.cos(phi / N + pb) / N

    # Newton from the symmetric point, then fall back to a dense scan
    phi = 0.0
    for _ in range(50):
        c = curv(phi)
        if c == 0.0:
            break
        step = grad(phi) / c
        phi -= step
        if abs(step) < 1e-14:
            break
    if -math.pi < phi <= math.pi and abs(grad(phi)) < 1e-12 and curv(phi) > 0:
        return phi
    xs = np.linspace(-math.pi, math.pi, 2001)
    gs = np.array([grad(x) for x in xs])
    for i in range(len(xs) - 1):
        if gs[i] == 0.0 and curv(xs[i]) > 0:
            return float(xs[i])
        if gs[i] * gs[i + 1] < 0:
            root = brentq(grad, xs[i], xs[i + 1], xtol=1e-14)
            if curv(root) > 0:
                return float(root)
    raise ValueError("no minimum of the coupler potential in the principal branch")


def _coupler_form_factor(
    params: CircuitParams, drive: DriveSpec, phi_cls: float
) -> callable:
    """F(eta_c) such that the coupler's quadratic self-term vanishes."""
    mu_a, mu_b = params.flux_weights()
    N = params.N
    fa = params.alpha * jv(0, mu_a * drive.delta_phi) * math.cos(phi_cls + mu_a * drive.phi_ext_bar)
    fb = params.beta * jv(0, mu_b * drive.delta_phi) * math.cos(phi_cls / N + mu_b * drive.phi_ext_bar)

    def F(eta):
        return fa * math.exp(-eta / 4.0) + (fb / N) * math.exp(-eta / (4.0 * N * N))

    return F


def solve_eta(params: CircuitParams, drive: DriveSpec) -> dict[str, float]:
    """Zero-point spreads eta_j from F(eta) eta^2 = 8 E_C / E_J, by bisection."""
    ec = charging_energies(params)
    phi_cls = classical_displacement(params, drive)
    out = {}
    specs = {
        "eta_a": (ec["E_Ca"], params.E_Ja, lambda eta: math.exp(-eta / 4.0)),
        "eta_b": (ec["E_Cb"], params.E_Jb, lambda eta: math.exp(-eta / 4.0)),
        "eta_c": (ec["E_Cc"], params.E_Jc, _coupler_form_factor(params, drive, phi_cls)),
    }
    for name, (E_C, E_J, F) in specs.items():
        target = 8.0 * E_C / E_J

        def residual(eta, F=F, target=target):
            return F(eta) * eta * eta - target

        lo, hi = ETA_BRACKET
        if residual(lo) >= 0 or residual(hi) <= 0:
            raise ModeSofteningError(
                f"no bracket for {name}: coupler form factor nonpositive "
                f"(flux bias too close to frustration)"
            )
        out[name] = brentq(residual, lo, hi, xtol=ETA_TOL)
    return out


def _transmon_quartic(layout: FockLayout, mode: int, omega: float, anh: float) -> np.ndarray:
    """omega a†a + (anh/2) a†²a² + quartic counter-rotating corrections (GHz in, GHz out)."""
    a = annihilator(layout, mode).array
    ad = a.conj().T
    n = ad @ a
    a2 = a @ a
    h = omega * n
    h = h + (anh / 2.0) * (ad @ ad @ a2)
    h = h + (anh / 12.0) * (a2 @ a2 + (a2 @ a2).conj().T)
    cross = ad @ (a @ a2)
    h = h + (anh / 3.0) * (cross + cross.conj().T)
    return h


def build_circuit_hamiltonian(
    params: CircuitParams, drive: DriveSpec, layout: FockLayout
) -> HarmonicHamiltonian:
    """Quartic bare-mode Hamiltonian plus drive harmonics, in rad/ns.

    The coupler phase is displaced to the static potential minimum before
    expansion; drive harmonics are kept up to drive.n_harmonics (quartic
    monomials, first and second harmonic).
    """
    if min(layout.dims) < 3:
        import warnings

        warnings.warn(
            "dims < 3 cannot represent quartic monomials faithfully", stacklevel=2
        )
    ec = charging_energies(params)
    mu_a, mu_b = params.flux_weights()
    phi_cls = classical_displacement(params, drive)
    etas = solve_eta(params, drive)
    eta_a, eta_b, eta_c = etas["eta_a"], etas["eta_b"], etas["eta_c"]
    N = params.N
    eps = params.epsilon
    theta_a = phi_cls + mu_a * drive.phi_ext_bar
    theta_b = phi_cls / N + mu_b * drive.phi_ext_bar

    omega = {
        "a": 8.0 * ec["E_Ca"] / eta_a,
        "b": 8.0 * ec["E_Cb"] / eta_b,
        "c": 8.0 * ec["E_Cc"] / eta_c,
    }
    anh = {"a": -ec["E_Ca"], "b": -ec["E_Cb"], "c": -ec["E_Cc"]}

    h0 = _transmon_quartic(layout, 0, omega["a"], anh["a"])
    h0 = h0 + _transmon_quartic(layout, 1, omega["b"], anh["b"])
    h0 = h0 + _transmon_quartic(layout, 2, omega["c"], anh["c"])

    # parity-breaking static coupler terms
    j0a = jv(0, mu_a * drive.delta_phi)
    j0b = jv(0, mu_b * drive.delta_phi)
    ga = params.alpha * eps * math.exp(-eta_c / 4.0) * j0a * math.sin(theta_a) * params.E_Jc
    gb = params.beta * math.exp(-eta_c / (4.0 * N * N)) * j0b * math.sin(theta_b) * params.E_Jc
    g_c3 = -(ga + gb / (N * N)) * eta_c**1.5 / (12.0 * math.sqrt(2.0))
    g_c1 = (ga + gb) * math.sqrt(eta_c) / math.sqrt(2.0)

    c = annihilator(layout, 2).array
    cd = c.conj().T
    c2 = c @ c
    cubic = c @ c2 + 3.0 * (cd @ c2)
    h0 = h0 + g_c3 * (cubic + cubic.conj().T)
    h0 = h0 + g_c1 * (c + cd)

    # capacitive couplings -2 E_Cjk / sqrt(eta_j eta_k) (j - j†)(k - k†)
    ops = [annihilator(layout, m).array for m in range(3)]
    diffs = [op - op.conj().T for op in ops]
    for (i, j, key, ei, ej) in [
        (0, 1, "E_Cab", eta_a, eta_b),
        (1, 2, "E_Cbc", eta_b, eta_c),
        (2, 0, "E_Cca", eta_c, eta_a),
    ]:
        h0 = h0 - (2.0 * ec[key] / math.sqrt(ei * ej)) * (diffs[i] @ diffs[j])

    harmonics: dict[int, tuple[OperatorMatrix, OperatorMatrix]] = {}
    dim = layout.total_dim
    if drive.delta_phi > 0:
        # drive-harmonic monomial coefficients; the beta branch enters with
        # 1/N^(order) ladder weights from expanding cos(phi_c/N)
        def branch_pair(n_bessel):
            wa = (
                params.alpha
                * eps
                * math.exp(-eta_c / 4.0)
                * jv(n_bessel, mu_a * drive.delta_phi)
                * params.E_Jc
            )
            wb = (
                params.beta
                * math.exp(-eta_c / (4.0 * N * N))
                * jv(n_bessel, mu_b * drive.delta_phi)
                * params.E_Jc
            )
            return wa, wb

        w1a, w1b = branch_pair(1)
        w2a, w2b = branch_pair(2)
        sqeta = math.sqrt(eta_c)
        rows = [
            # (monomial, hermitian?, alpha ladder factor, beta ladder factor,
            #  trig of theta on the first harmonic, trig on the second).
            # The trig tags carry the row's sign; signed trig strings keep
            # the row table in one piece.
            (cd, False, math.sqrt(2.0) * sqeta, math.sqrt(2.0) * sqeta, "+cos", "+sin"),
            (cd @ cd, False, eta_c / 2.0, eta_c / (2.0 * N), "-sin", "+cos"),
            (cd @ c, True, eta_c, eta_c / N, "-sin", "+cos"),
            (cd @ cd @ cd, False, eta_c**1.5 / (6.0 * math.sqrt(2.0)),
             eta_c**1.5 / (6.0 * math.sqrt(2.0) * N * N), "-cos", "-sin"),
            (cd @ cd @ c, False, eta_c**1.5 / (2.0 * math.sqrt(2.0)),
             eta_c**1.5 / (2.0 * math.sqrt(2.0) * N * N), "-cos", "-sin"),
            (cd @ cd @ cd @ cd, False, eta_c**2 / 48.0, eta_c**2 / (48.0 * N**3), "+sin", "-cos"),
            (cd @ cd @ cd @ c, False, eta_c**2 / 12.0, eta_c**2 / (12.0 * N**3), "+sin", "-cos"),
            (cd @ cd @ c2, True, eta_c**2 / 8.0, eta_c**2 / (8.0 * N**3), "+sin", "-cos"),
        ]

        def trig(which, theta):
            sign = 1.0 if which[0] == "+" else -1.0
            fn = math.cos if which[1:] == "cos" else math.sin
            return sign * fn(theta)

        s1 = np.zeros((dim, dim), dtype=complex)
        c2h = np.zeros((dim, dim), dtype=complex)
        for mono, herm, la, lb, t1, t2 in rows:
            sym = mono if herm else mono + mono.conj().T
            s1 += (w1a * la * trig(t1, theta_a) + w1b * lb * trig(t1, theta_b)) * sym
            if drive.n_harmonics >= 2:
                c2h += (w2a * la * trig(t2, theta_a) + w2b * lb * trig(t2, theta_b)) * sym
        zeros = np.zeros((dim, dim), dtype=complex)
        harmonics[1] = (
            OperatorMatrix(layout, zeros.copy(), "rad/ns"),
            OperatorMatrix(layout, TWO_PI * s1, "rad/ns"),
        )
        if drive.n_harmonics >= 2:
            harmonics[2] = (
                OperatorMatrix(layout, TWO_PI * c2h, "rad/ns"),
                OperatorMatrix(layout, zeros.copy(), "rad/ns"),
            )

    return HarmonicHamiltonian(
        OperatorMatrix(layout, TWO_PI * h0, "rad/ns"), harmonics
    )


def build_toy_hamiltonian(
    toy: ToyParams, drive: DriveSpec, layout: FockLayout
) -> HarmonicHamiltonian:
    """Kerr oscillators with beam-splitter couplings and a coupler-frequency drive."""
    ops = [annihilator(layout, m).array for m in range(3)]
    dim = layout.total_dim
    h0 = np.zeros((dim, dim), dtype=complex)
    for m, (w, anh) in enumerate(
        [
            (toy.omega_a, toy.alpha_a),
            (toy.omega_b, toy.alpha_b),
            (toy.omega_c, toy.alpha_c),
        ]
    ):
        a = ops[m]
        ad = a.conj().T
        h0 += w * (ad @ a) + (anh / 2.0) * (ad @ ad @ a @ a)
    for (i, j, g) in [(0, 1, toy.g_ab), (1, 2, toy.g_bc), (2, 0, toy.g_ca)]:
        bs = ops[i].conj().T @ ops[j]
        h0 -= g * (bs + bs.conj().T)
    harmonics: dict[int, tuple[OperatorMatrix, OperatorMatrix]] = {}
    if toy.delta != 0.0:
        nc = ops[2].conj().T @ ops[2]
        zeros = np.zeros((dim, dim), dtype=complex)
        harmonics[1] = (
            OperatorMatrix(layout, zeros, "rad/ns"),
            OperatorMatrix(layout, TWO_PI * toy.delta * nc, "rad/ns"),
        )
    return HarmonicHamiltonian(OperatorMatrix(layout, TWO_PI * h0, "rad/ns"), harmonics)


def rwa_strip(h: HarmonicHamiltonian) -> HarmonicHamiltonian:
    """Remove every total-photon-number nonconserving matrix element."""
    mask = total_number_projector_mask(h.layout)
    static = OperatorMatrix(h.layout, h.static_part.array * mask, h.static_part.units)
    harmonics = {
        n: (
            OperatorMatrix(h.layout, cos_p.array * mask, cos_p.units),
            OperatorMatrix(h.layout, sin_p.array * mask, sin_p.units),
        )
        for n, (cos_p, sin_p) in h.harmonics.items()
    }
    return HarmonicHamiltonian(static, harmonics)
