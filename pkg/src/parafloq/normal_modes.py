"""Normal-mode decomposition of the quadratic circuit Hamiltonian.

Diagonalizes H = sum A_jk n_j n_k + sum B_jj phi_j^2 (B diagonal) into
independent oscillators, keeping track of the hybridization matrices
that express bare phase and charge coordinates through normal-mode
ladder operators.  All energies in GHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .circuit import CircuitParams, DriveSpec, ToyParams, charging_energies, solve_eta

UV_CANONICAL_TOL = 1e-10


@dataclass(frozen=True)
class QuadraticForm:
    """Capacitive matrix A (full) and inductive diagonal B, GHz."""

    A: np.ndarray
    B_diag: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B_diag, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if B.shape != (A.shape[0],):
            raise ValueError("B_diag length must match A")
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise ValueError("A must be symmetric")
        if np.any(B <= 0):
            raise ValueError("inductive energies must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B_diag", B)


@dataclass(frozen=True)
class NormalModeBasis:
    """Hybridization data: bare coordinate = sum over normal-mode ladders.

    ``u[i, j]`` multiplies (b_j + b_j†)/sqrt(2) in the bare phase phi_i;
    ``v[i, j]`` multiplies (b_j - b_j†)/(i sqrt(2)) in the bare charge n_i.
    ``freqs`` are normal-mode frequencies in GHz, ``eps`` the zero-point
    spreads of the normal modes.
    """

    u: np.ndarray
    v: np.ndarray
    freqs: np.ndarray
    eps: np.ndarray

    def canonical_defect(self) -> float:
        n = self.u.shape[0]
        return float(np.max(np.abs(self.u @ self.v.T - np.eye(n))))


def normal_mode_transform(form: QuadraticForm) -> NormalModeBasis:
    """Diagonalize the quadratic form; three-step rescaled orthogonal scheme.

    Rescale to a common inductive energy, diagonalize the rescaled
    capacitive matrix with an orthogonal transformation, then undo the
    rescaling.  Mode ordering follows the bare modes by largest overlap,
    with signs fixed so the diagonal of u is positive.
    """
    A = form.A
    B = form.B_diag
    n = len(B)
    B_ref = float(np.prod(B)) ** (1.0 / n)
    f = np.sqrt(B_ref / B)
    Ap = A / np.outer(f, f)
    D, W = np.linalg.eigh(Ap)  # columns of W are eigenvectors of A'
    if np.any(D <= 0):
        raise ValueError("rescaled capacitive matrix is not positive definite")

    # label each normal mode by the bare mode it overlaps most
    rows, cols = linear_sum_assignment(-(W**2))
    order = np.empty(n, dtype=int)
    order[rows] = cols
    W = W[:, order]
    D = D[order]
    W = W * np.where(np.diag(W) < 0, -1.0, 1.0)[None, :]

    U = np.outer(f, 1.0 / f) * W
    V = np.outer(1.0 / f, f) * W
    freqs = 2.0 * np.sqrt(B_ref * D)
    eps = np.sqrt(B_ref * D) / B
    u = U * np.sqrt(eps)[None, :]
    v = V / np.sqrt(eps)[None, :]
    basis = NormalModeBasis(u, v, freqs, eps)
    if basis.canonical_defect() > UV_CANONICAL_TOL:
        raise RuntimeError("normal-mode transformation is not canonical")
    return basis


def drive_dependent_basis(params: CircuitParams, drive: DriveSpec) -> NormalModeBasis:
    """Normal modes of the time-averaged quadratic circuit Hamiltonian.

    The coupler's inductive energy carries the drive dependence through
    its zero-point spread, so the hybridization coefficients shift with
    both flux bias and modulation amplitude.
    """
    ec = charging_energies(params)
    etas = solve_eta(params, drive)
    A = np.array(
        [
            [4.0 * ec["E_Ca"], 2.0 * ec["E_Cab"], 2.0 * ec["E_Cca"]],
            [2.0 * ec["E_Cab"], 4.0 * ec["E_Cb"], 2.0 * ec["E_Cbc"]],
            [2.0 * ec["E_Cca"], 2.0 * ec["E_Cbc"], 4.0 * ec["E_Cc"]],
        ]
    )
    B = np.array(
        [
            4.0 * ec["E_Ca"] / etas["eta_a"] ** 2,
            4.0 * ec["E_Cb"] / etas["eta_b"] ** 2,
            4.0 * ec["E_Cc"] / etas["eta_c"] ** 2,
        ]
    )
    return normal_mode_transform(QuadraticForm(A, B))


def toy_normal_mode_basis(toy: ToyParams) -> NormalModeBasis:
    """Orthonormal hybridization for the beam-splitter-coupled triple.

    The quadratic part is already written in ladder operators, so the
    frequency matrix is diagonalized directly; u = v orthogonal and all
    zero-point spreads equal one.
    """
    M = np.array(
        [
            [toy.omega_a, -toy.g_ab, -toy.g_ca],
            [-toy.g_ab, toy.omega_b, -toy.g_bc],
            [-toy.g_ca, -toy.g_bc, toy.omega_c],
        ]
    )
    D, W = np.linalg.eigh(M)
    rows, cols = linear_sum_assignment(-(W**2))
    order = np.empty(3, dtype=int)
    order[rows] = cols
    W = W[:, order]
    D = D[order]
    W = W * np.where(np.diag(W) < 0, -1.0, 1.0)[None, :]
    return NormalModeBasis(W.copy(), W.copy(), D, np.ones(3))
