import numpy as np
import pytest

from tlsbath.ensemble import RetainedSet, TlsDefect
from tlsbath.geometry import Position
from tlsbath.model import ModelMatrices


def make_defect(
    omega=1e4,
    delta0_norm=0.5,
    energy_freq=5e9,
    distance_to_jj=10.0,
    x=10.0,
    y=0.0,
    depth=1.0,
    t1_tls=None,
    dipole=3.0,
    g=None,
):
    """Hand-built defect with self-consistent derived fields."""
    if g is None:
        g = omega / delta0_norm if delta0_norm > 0 else 0.0
    delta_norm = float(np.sqrt(max(0.0, 1.0 - delta0_norm**2)))
    if t1_tls is None:
        t1_tls = 0.05 / delta0_norm**2 if delta0_norm > 0 else np.inf
    return TlsDefect(
        position=Position(x, y, depth),
        energy_freq=energy_freq,
        delta0_norm=delta0_norm,
        delta_norm=delta_norm,
        log_tan_half_theta=0.0,
        dipole=dipole,
        dipole_field_angle=0.0,
        local_field=(1.0, 0.0, 0.0),
        g=g,
        omega=omega,
        t1_tls=t1_tls,
        distance_to_jj=distance_to_jj,
    )


def make_retained(defects, pair_coupling=None, qubit_freq=5e9):
    k = len(defects)
    j = np.zeros((k, k)) if pair_coupling is None else np.asarray(pair_coupling, float)
    return RetainedSet(tuple(defects), j, qubit_freq=qubit_freq)


def random_model(rng, k, det_scale=2 * np.pi * 10.0, t1_min=0.05, coupling=0.5):
    """Physical-range random single-excitation model (rad/us units)."""
    dim = k + 2
    det = rng.uniform(-det_scale, det_scale, k)
    om = rng.uniform(-coupling, coupling, k)
    d0 = rng.uniform(0.01, 1.0, k)
    rates = d0**2 / t1_min
    h = np.zeros((dim, dim), complex)
    h[1, 2:] = om
    h[2:, 1] = om
    h[np.arange(2, dim), np.arange(2, dim)] = det
    jmax = 0.01 * coupling
    j = rng.uniform(-jmax, jmax, (k, k))
    j = np.triu(j, 1)
    h[2:, 2:] += j + j.T
    return ModelMatrices(dim=dim, hamiltonian=h, collapse_rates=rates)


def liouvillian(model):
    """Dense vectorized Liouvillian (row-major vec) for expm oracles."""
    h = model.hamiltonian
    dim = model.dim
    rates = model.rates_by_basis()
    eye = np.eye(dim)
    L = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for idx in range(dim):
        if rates[idx] == 0:
            continue
        s = np.zeros((dim, dim))
        s[0, idx] = 1.0
        ss = s.T @ s
        L += rates[idx] * (
            np.kron(s, s.conj()) - 0.5 * (np.kron(ss, eye) + np.kron(eye, ss.T))
        )
    return L


def expm_qubit_population(model, rho0, t_grid):
    """p_qubit(t) by repeated application of expm(L*dt) on the uniform grid."""
    from scipy.linalg import expm

    dt = t_grid[1] - t_grid[0]
    assert np.allclose(np.diff(t_grid), dt)
    M = expm(liouvillian(model) * dt)
    vec = np.asarray(rho0, complex).ravel().copy()
    out = np.empty(len(t_grid))
    for i in range(len(t_grid)):
        out[i] = vec.reshape(model.dim, model.dim)[1, 1].real
        vec = M @ vec
    return out


@pytest.fixture(scope="session")
def small_geometry():
    from tlsbath.geometry import default_transmon_geometry

    return default_transmon_geometry()


@pytest.fixture(scope="session")
def small_field(small_geometry):
    """Coarse synthetic map; fast to build, fine for sampling tests."""
    from tlsbath.fieldmap import SyntheticFieldParams, synthetic_field

    return synthetic_field(small_geometry, SyntheticFieldParams(spacing=7.5))
