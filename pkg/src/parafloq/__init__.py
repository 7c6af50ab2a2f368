"""Perturbative and Floquet analysis of parametrically driven two-qubit gates."""

from .fock import FockLayout, OperatorMatrix, annihilator, number_op
from .circuit import (
    CircuitParams,
    DriveSpec,
    HarmonicHamiltonian,
    ModeSofteningError,
    ToyParams,
    build_circuit_hamiltonian,
    build_toy_hamiltonian,
    charging_energies,
    classical_displacement,
    mu_weights,
    rwa_strip,
    solve_eta,
)

from .normal_modes import (
    NormalModeBasis,
    QuadraticForm,
    drive_dependent_basis,
    normal_mode_transform,
    toy_normal_mode_basis,
)
from .analytics import (
    CrossResonanceCouplings,
    EffectiveCouplings,
    circuit_first_order,
    cross_resonance_couplings,
    flux_reparametrization,
    gate_menu,
    toy_bessel_gate_rate,
    toy_first_order,
    toy_second_order_chi,
)
from .floquet import (
    FloquetSolution,
    PropagatorGrid,
    StaticReference,
    calibrate_drive_frequency,
    floquet_decompose,
    floquet_modes_on_grid,
    propagate_one_period,
    rabi_crosscheck,
    static_eigensolve,
)
from .reports import (
    GateReport,
    SpectroscopyPoint,
    chi_zero_curve,
    dynamical_cross_kerr,
    gate_amplitude,
    sweep,
    two_tone_spectrum,
)
from .config import ConfigError, RunConfig, load_config, parse_config

__version__ = "0.1.0"
