"""Truncated bosonic operators on tensor-product Fock spaces.

All matrices are dense complex arrays on the truncated Hilbert space
defined by a :class:`FockLayout`.  Tensor factors are composed row-major
in the fixed mode order (a, b, c, ...), so basis index
``i = n_0 * d_1 * d_2 + n_1 * d_2 + n_2`` for three modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-9


@dataclass(frozen=True)
class FockLayout:
    """Per-mode truncation dimensions; immutable after construction."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("need at least one mode")
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode needs dimension >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @cached_property
    def basis_occupations(self) -> np.ndarray:
        """Occupation numbers of every basis state, shape (total_dim, n_modes)."""
        grids = np.meshgrid(*[np.arange(d) for d in self.dims], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index_of(self, occupation: tuple[int, ...]) -> int:
        if len(occupation) != self.n_modes:
            raise ValueError("occupation length mismatch")
        idx = 0
        for n, d in zip(occupation, self.dims):
            if not 0 <= n < d:
                raise ValueError(f"occupation {occupation} outside truncation {self.dims}")
            idx = idx * d + n
        return idx


@dataclass
class OperatorMatrix:
    """Dense operator on a FockLayout with a units tag.

    ``units`` is either "dimensionless" or "rad/ns" (angular frequency);
    all Hamiltonian pieces built by this package carry "rad/ns".
    """

    layout: FockLayout
    array: np.ndarray
    units: str = "dimensionless"

    def __post_init__(self):
        self.array = np.asarray(self.array, dtype=complex)
        n = self.layout.total_dim
        if self.array.shape != (n, n):
            raise ValueError(f"matrix shape {self.array.shape} != layout dimension {n}")

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.array - self.array.conj().T)))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_defect() < tol

    def unitarity_defect(self) -> float:
        n = self.layout.total_dim
        return float(np.max(np.abs(self.array.conj().T @ self.array - np.eye(n))))

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_defect() < tol

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.layout, self.array.conj().T, self.units)


def _single_mode_ladder(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def embed(layout: FockLayout, mode: int, local: np.ndarray) -> np.ndarray:
    """Tensor-embed a single-mode matrix with identities on the other modes."""
    if not 0 <= mode < layout.n_modes:
        raise ValueError(f"mode {mode} out of range for {layout.n_modes} modes")
    out = np.eye(1, dtype=complex)
    for m, d in enumerate(layout.dims):
        factor = local if m == mode else np.eye(d, dtype=complex)
        out = np.kron(out, factor)
    return out


def annihilator(layout: FockLayout, mode: int) -> OperatorMatrix:
    """Embedded annihilation operator, <n-1|a|n> = sqrt(n)."""
    if not 0 <= mode < layout.n_modes:
        raise ValueError(f"mode {mode} out of range for {layout.n_modes} modes")
    return OperatorMatrix(layout, embed(layout, mode, _single_mode_ladder(layout.dims[mode])))


def number_op(layout: FockLayout, mode: int) -> OperatorMatrix:
    a = annihilator(layout, mode).array
    return OperatorMatrix(layout, a.conj().T @ a)


def quadratures(layout: FockLayout, mode: int, scale: float) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Phase and charge quadratures for a given impedance-like scale.

    phi = sqrt(scale/2) (a + a†),  n = -i sqrt(1/(2 scale)) (a - a†).
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    a = annihilator(layout, mode).array
    ad = a.conj().T
    phi = math.sqrt(scale / 2.0) * (a + ad)
    n = -1j * math.sqrt(1.0 / (2.0 * scale)) * (a - ad)
    return OperatorMatrix(layout, phi), OperatorMatrix(layout, n)


def normal_ordered_trig(kind: str, prefactor: float, max_total_order: int) -> dict[tuple[int, int], float]:
    """Normal-ordered series coefficients of cos(phi) or sin(phi).

    With phi = sqrt(eta/2)(a + a†) and eta = ``prefactor``:

      cos phi = e^{-eta/4} sum_{m+n even} (-eta/2)^{(m+n)/2} a†^m a^n / (m! n!)
      sin phi = e^{-eta/4} sqrt(eta/2) sum_{m+n odd} (-eta/2)^{(m+n-1)/2} a†^m a^n / (m! n!)

    Returns {(m, n): coefficient} truncated at m + n <= max_total_order.
    """
    if prefactor <= 0:
        raise ValueError(f"prefactor must be positive, got {prefactor}")
    if max_total_order < 0:
        raise ValueError("max_total_order must be >= 0")
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    eta = float(prefactor)
    gauss = math.exp(-eta / 4.0)
    parity = 0 if kind == "cos" else 1
    coeffs: dict[tuple[int, int], float] = {}
    for total in range(parity, max_total_order + 1):
        if total % 2 != parity:
            continue
        if kind == "cos":
            power = (-eta / 2.0) ** (total // 2)
            front = gauss
        else:
            power = (-eta / 2.0) ** ((total - 1) // 2)
            front = gauss * math.sqrt(eta / 2.0)
        for m in range(total + 1):
            n = total - m
            coeffs[(m, n)] = front * power / (math.factorial(m) * math.factorial(n))
    return coeffs


def materialize(
    coeffs: dict[tuple[int, int], complex],
    layout: FockLayout,
    mode: int | None = None,
    weights: np.ndarray | None = None,
    units: str = "dimensionless",
) -> OperatorMatrix:
    """Assemble sum_{mn} c_{mn} A†^m A^n on the truncated space.

    For a single mode, A is that mode's annihilator.  With ``weights``
    w_beta the collective mode A = sum_beta w_beta b_beta / sqrt(sum w^2)
    is used, which is bosonic ([A, A†] = 1 up to truncation); the caller
    is responsible for generating ``coeffs`` with the matching effective
    prefactor sum w^2.
    """
    if (mode is None) == (weights is None):
        raise ValueError("specify exactly one of mode or weights")
    dim = layout.total_dim
    if not coeffs:
        return OperatorMatrix(layout, np.zeros((dim, dim), dtype=complex), units)
    max_power = max(max(m, n) for m, n in coeffs)
    if max_power > min(layout.dims) - 1:
        raise ValueError(
            f"monomial power {max_power} exceeds truncation {layout.dims}; enlarge dims"
        )
    if mode is not None:
        a = annihilator(layout, mode).array
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (layout.n_modes,):
            raise ValueError("weights must have one entry per mode")
        norm = math.sqrt(float(np.sum(w**2)))
        if norm == 0:
            raise ValueError("weights must not all vanish")
        a = sum(w[m] * annihilator(layout, m).array for m in range(layout.n_modes)) / norm
    ad = a.conj().T
    # cache powers of a and a†
    a_pow = [np.eye(dim, dtype=complex)]
    ad_pow = [np.eye(dim, dtype=complex)]
    for _ in range(max_power):
        a_pow.append(a_pow[-1] @ a)
        ad_pow.append(ad_pow[-1] @ ad)
    out = np.zeros((dim, dim), dtype=complex)
    for (m, n), c in coeffs.items():
        out += c * (ad_pow[m] @ a_pow[n])
    return OperatorMatrix(layout, out, units)


def total_number_projector_mask(layout: FockLayout) -> np.ndarray:
    """Boolean mask keeping only matrix elements conserving total occupation."""
    tot = layout.basis_occupations.sum(axis=1)
    return tot[:, None] == tot[None, :]
