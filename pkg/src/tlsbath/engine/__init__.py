"""Lindblad dynamics engines.

Two equivalent paths integrate the same model:

* ``evolve_full`` -- the reference path, integrating the density matrix
  under the Lindblad master equation term for term.
* ``evolve_fast`` -- the production path. Every collapse channel jumps
  into the vacuum state, which is coherently decoupled, so the excited
  sector evolves as a pure amplitude vector under the non-Hermitian
  H_eff = H_e - (i/2) diag(rates); populations are |psi|^2, the vacuum
  amplitude is conserved, and the qubit coherence is |c_vac|*|psi_q|.

Both use the same adaptive Dormand-Prince 5(4) stepper with dense output
onto a uniform grid. A compiled Cython kernel is used when available;
set TLSBATH_PURE_PYTHON=1 to force the pure-Python twin.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from ..model import InitialState, ModelMatrices
from . import dp54
from .dp54 import IntegrationError

if os.environ.get("TLSBATH_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = dp54
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build-less checkout
        _impl = dp54
        BACKEND = "python"


class UnsupportedStateError(ValueError):
    """Initial state outside the family an engine supports."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float | None = None  # us; None = unlimited
    horizon: float = 500.0  # us
    output_points: int = 2000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.output_points < 2:
            raise ValueError("need at least 2 output points")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.output_points)

    @property
    def max_step_value(self) -> float:
        return np.inf if self.max_step is None else self.max_step


@dataclass(frozen=True)
class Trajectory:
    """Observables on the output grid."""

    t: np.ndarray = field(repr=False)
    p_qubit: np.ndarray = field(repr=False)
    p_tls_total: np.ndarray = field(repr=False)
    coherence_abs: np.ndarray = field(repr=False)
    trace: np.ndarray = field(repr=False)
    engine: str = "fast"

    CSV_COLUMNS = ("t_us", "p_qubit", "p_tls_total", "coherence_abs", "trace")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_COLUMNS)
            for row in zip(
                self.t, self.p_qubit, self.p_tls_total, self.coherence_abs, self.trace
            ):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, engine="fast") -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        return cls(
            t=data[:, 0],
            p_qubit=data[:, 1],
            p_tls_total=data[:, 2],
            coherence_abs=data[:, 3],
            trace=data[:, 4],
            engine=engine,
        )


def observables(state) -> tuple[float, float, float, float]:
    """(p_qubit, p_tls_total, coherence_abs, trace) of a density matrix
    or a pure amplitude vector over the model basis."""
    state = np.asarray(state)
    if state.ndim == 2:
        d = np.diagonal(state).real
        return float(d[1]), float(d[2:].sum()), float(abs(state[0, 1])), float(d.sum())
    if state.ndim == 1:
        p = np.abs(state) ** 2
        return (
            float(p[1]),
            float(p[2:].sum()),
            float(abs(state[0]) * abs(state[1])),
            float(p.sum()),
        )
    raise ValueError("state must be a vector or a matrix")


def lindblad_rhs(rho: np.ndarray, model: ModelMatrices) -> np.ndarray:
    """Right-hand side of the master equation for jump-to-vacuum
    channels: -i[H, rho] plus, per channel, population gain in the vacuum
    corner and amplitude damping of the channel's row and column."""
    rho = np.asarray(rho, complex)
    if rho.shape != (model.dim, model.dim):
        raise ValueError("rho dimension mismatch")
    h = model.hamiltonian
    rates = model.rates_by_basis()
    hr = 0.5 * rates
    out = -1j * (h @ rho - rho @ h)
    out -= hr[:, None] * rho + rho * hr[None, :]
    out[0, 0] += rates @ np.diagonal(rho)
    return out


def _as_rho(state, dim) -> np.ndarray:
    if isinstance(state, InitialState):
        rho = state.rho
    else:
        rho = np.asarray(state, complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"initial state must be {dim}x{dim}")
    return rho


def evolve_full(
    rho0,
    model: ModelMatrices,
    cfg: IntegratorConfig | None = None,
    return_states_at=None,
):
    """Integrate the full master equation; the accepted state is
    re-symmetrized each step. Returns a Trajectory, or (Trajectory,
    {grid_index: rho}) when return_states_at (times, us) is given."""
    cfg = cfg or IntegratorConfig()
    rho0 = _as_rho(rho0, model.dim)
    grid = cfg.time_grid()
    idx = None
    if return_states_at is not None:
        times = np.atleast_1d(np.asarray(return_states_at, float))
        idx = np.clip(
            np.searchsorted(grid, times - 1e-12), 0, len(grid) - 1
        ).astype(np.int64)
    p_q, p_tls, coh, trace, states = _impl.solve_lindblad(
        model.hamiltonian,
        model.rates_by_basis(),
        rho0,
        grid,
        cfg.rel_tol,
        cfg.abs_tol,
        max_step=cfg.max_step_value,
        states_at_idx=idx,
    )
    traj = Trajectory(
        t=grid, p_qubit=p_q, p_tls_total=p_tls, coherence_abs=coh, trace=trace,
        engine="full",
    )
    if return_states_at is None:
        return traj
    return traj, states


def evolve_fast(
    psi0, model: ModelMatrices, cfg: IntegratorConfig | None = None
) -> Trajectory:
    """Integrate the excited-sector amplitude vector under the
    non-Hermitian effective Hamiltonian. psi0 is a normalized amplitude
    vector over the full basis (or an InitialState)."""
    cfg = cfg or IntegratorConfig()
    if isinstance(psi0, InitialState):
        psi0 = psi0.amplitude_vector()
    psi0 = np.asarray(psi0, complex)
    if psi0.shape != (model.dim,):
        raise UnsupportedStateError(
            f"initial amplitude vector must have length {model.dim}"
        )
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-9:
        raise UnsupportedStateError("initial state must be normalized")

    c_vac = abs(psi0[0])
    h_e = model.hamiltonian[1:, 1:]
    rates_e = model.rates_by_basis()[1:]
    a = -1j * h_e - 0.5 * np.diag(rates_e).astype(complex)
    grid = cfg.time_grid()
    y = _impl.solve_linear(
        a, psi0[1:], grid, cfg.rel_tol, cfg.abs_tol, max_step=cfg.max_step_value
    )
    pops = np.abs(y) ** 2
    p_q = pops[:, 0]
    return Trajectory(
        t=grid,
        p_qubit=p_q,
        p_tls_total=pops[:, 1:].sum(axis=1),
        coherence_abs=c_vac * np.abs(y[:, 0]),
        trace=np.ones(len(grid)),
        engine="fast",
    )
