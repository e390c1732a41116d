"""Single-excitation-sector model matrices.

Basis ordering (dimension K+2 for K retained defects):

    index 0      -- vacuum (no excitation anywhere)
    index 1      -- qubit excited
    index 2..K+1 -- defect i excited, in retained (sorted) order

The Hamiltonian lives in the frame rotating at the qubit frequency, so
only detunings survive on the diagonal; elements are in rad/us. Rates
are in 1/us. The vacuum row/column of H is identically zero: coherent
dynamics conserve the excitation, only collapse channels reach vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .constants import RADS_TO_RADUS
from .ensemble import RetainedSet

BASIS_DOC = "0=vacuum, 1=qubit, 2..K+1=retained TLSs in sorted order"


@dataclass(frozen=True)
class ModelMatrices:
    """Hamiltonian (rad/us) and collapse rates (1/us) over the basis."""

    dim: int
    hamiltonian: np.ndarray = field(repr=False)
    collapse_rates: np.ndarray = field(repr=False)  # length K, aligned to TLS order
    basis: str = BASIS_DOC

    def __post_init__(self):
        h = np.ascontiguousarray(self.hamiltonian, dtype=complex)
        r = np.asarray(self.collapse_rates, float)
        if h.shape != (self.dim, self.dim):
            raise ValueError("hamiltonian shape mismatch")
        if r.shape != (self.dim - 2,):
            raise ValueError("collapse_rates must have length dim-2")
        if not np.all(np.isfinite(h.view(float))):
            raise ValueError("hamiltonian must be finite")
        if np.max(np.abs(h - h.conj().T)) > 1e-12:
            raise ValueError("hamiltonian must be Hermitian within 1e-12")
        if np.any(np.abs(h[0, :]) > 0) or np.any(np.abs(h[:, 0]) > 0):
            raise ValueError("vacuum row/column must be zero")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("collapse rates must be finite and non-negative")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "collapse_rates", r)

    @property
    def n_tls(self) -> int:
        return self.dim - 2

    def rates_by_basis(self) -> np.ndarray:
        """Length-dim rate vector: zero at vacuum and qubit indices."""
        out = np.zeros(self.dim)
        out[2:] = self.collapse_rates
        return out

    def with_rates(self, collapse_rates) -> "ModelMatrices":
        return replace(self, collapse_rates=np.asarray(collapse_rates, float))

    def scale_qubit_couplings(self, factor: float) -> "ModelMatrices":
        """Uniformly rescale the qubit-TLS flip-flop elements (a dipole
        moment change at fixed geometry)."""
        h = self.hamiltonian.copy()
        h[1, 2:] *= factor
        h[2:, 1] *= factor
        return replace(self, hamiltonian=h)


@dataclass(frozen=True)
class CollapseChannel:
    """Phonon-emission jump from one excited basis state to vacuum."""

    index: int  # basis index of the decaying state
    rate: float  # 1/us

    def matrix(self, dim: int) -> np.ndarray:
        c = np.zeros((dim, dim), complex)
        c[0, self.index] = np.sqrt(self.rate)
        return c


def build_hamiltonian(retained: RetainedSet, qubit_freq: float | None = None) -> ModelMatrices:
    """Assemble the rotating-frame single-excitation Hamiltonian and the
    collapse rates from a retained set."""
    k = len(retained)
    if k == 0:
        raise ValueError("retained set is empty")
    if qubit_freq is None:
        qubit_freq = retained.qubit_freq
    dim = k + 2
    h = np.zeros((dim, dim), complex)
    det = 2.0 * np.pi * (retained.energies() - qubit_freq) * RADS_TO_RADUS
    om = retained.omegas() * RADS_TO_RADUS
    h[np.arange(2, dim), np.arange(2, dim)] = det
    h[1, 2:] = om
    h[2:, 1] = om
    h[2:, 2:] += retained.pair_coupling * RADS_TO_RADUS
    h[np.arange(2, dim), np.arange(2, dim)] = det  # pair_coupling diag is zero anyway

    t1 = retained.t1_times()
    if np.any(t1 <= 0):
        raise ValueError("TLS relaxation times must be positive")
    with np.errstate(divide="ignore"):
        rates = np.where(np.isfinite(t1), 1.0 / t1, 0.0)
    return ModelMatrices(dim=dim, hamiltonian=h, collapse_rates=rates)


def build_collapse(model_or_set) -> list[CollapseChannel]:
    """Collapse channel list: one jump per finite-lifetime defect. Dark
    defects (zero rate) contribute no channel; the qubit has none."""
    if isinstance(model_or_set, RetainedSet):
        model = build_hamiltonian(model_or_set)
    else:
        model = model_or_set
    return [
        CollapseChannel(index=i + 2, rate=float(r))
        for i, r in enumerate(model.collapse_rates)
        if r > 0
    ]


@dataclass(frozen=True)
class InitialState:
    """Qubit preparation with all TLSs in the ground state."""

    kind: str  # "excited" or "superposition"
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.rho, complex)
        if abs(np.trace(r) - 1) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if np.max(np.abs(r - r.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        object.__setattr__(self, "rho", r)

    def amplitude_vector(self) -> np.ndarray:
        """Pure-state amplitudes over the basis (both kinds are pure)."""
        dim = self.rho.shape[0]
        psi = np.zeros(dim, complex)
        if self.kind == "excited":
            psi[1] = 1.0
        else:
            psi[0] = psi[1] = 1.0 / np.sqrt(2.0)
        return psi


def initial_state(kind: str, dim: int) -> InitialState:
    """`excited` prepares |1>; `superposition` prepares (|0>+|1>)/sqrt(2)."""
    if dim < 3:
        raise ValueError("dim must be >= 3")
    rho = np.zeros((dim, dim), complex)
    if kind == "excited":
        rho[1, 1] = 1.0
    elif kind == "superposition":
        rho[0, 0] = rho[0, 1] = rho[1, 0] = rho[1, 1] = 0.5
    else:
        raise ValueError(f"unknown initial-state kind {kind!r}")
    return InitialState(kind=kind, rho=rho)
