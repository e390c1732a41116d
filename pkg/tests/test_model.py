import math

import numpy as np
import pytest

from conftest import make_defect, make_retained
from tlsbath.model import (
    build_collapse,
    build_hamiltonian,
    initial_state,
)


def test_single_resonant_tls():
    om = 2 * math.pi * 0.1 * 1e6  # rad/s -> 2pi*0.1 rad/us after conversion
    rs = make_retained([make_defect(omega=om, delta0_norm=1.0, energy_freq=5e9)])
    m = build_hamiltonian(rs, qubit_freq=5e9)
    h = m.hamiltonian
    assert m.dim == 3
    assert h[1, 2] == pytest.approx(2 * math.pi * 0.1)
    assert h[2, 1] == pytest.approx(2 * math.pi * 0.1)
    mask = np.ones((3, 3), bool)
    mask[1, 2] = mask[2, 1] = False
    assert np.all(h[mask] == 0)


def test_detuning_unit_conversion():
    rs = make_retained([make_defect(energy_freq=5e9 + 10e6)])
    m = build_hamiltonian(rs, qubit_freq=5e9)
    det = m.hamiltonian[2, 2].real
    assert det == pytest.approx(62.8319, rel=1e-6)
    assert det == pytest.approx(2 * math.pi * 10, rel=1e-9)


def test_decoupled_pair_has_no_cross_term():
    d1 = make_defect(omega=2.0e4, x=10.0)
    d2 = make_defect(omega=1.0e4, x=500.0)
    rs = make_retained([d1, d2])  # zero pair coupling
    m = build_hamiltonian(rs)
    assert m.hamiltonian[2, 3] == 0


def test_pair_coupling_enters_hamiltonian():
    d1 = make_defect(omega=2.0e4, x=10.0)
    d2 = make_defect(omega=1.0e4, x=11.0)
    j = np.array([[0.0, 3.0e3], [3.0e3, 0.0]])
    rs = make_retained([d1, d2], pair_coupling=j)
    m = build_hamiltonian(rs)
    assert m.hamiltonian[2, 3] == pytest.approx(3.0e3 * 1e-6)


def test_vacuum_row_zero_and_hermitian():
    rs = make_retained([make_defect(omega=1e4), make_defect(omega=5e3, x=20.0)])
    m = build_hamiltonian(rs)
    h = m.hamiltonian
    assert np.all(h[0, :] == 0) and np.all(h[:, 0] == 0)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_collapse_rates_and_channels():
    d_live = make_defect(omega=1e4, delta0_norm=1.0, t1_tls=0.05)
    d_dark = make_defect(omega=0.0, delta0_norm=0.0, t1_tls=np.inf, x=20.0, g=0.0)
    rs = make_retained([d_live, d_dark])
    m = build_hamiltonian(rs)
    assert m.collapse_rates == pytest.approx([20.0, 0.0])
    channels = build_collapse(m)
    assert len(channels) == 1
    assert channels[0].index == 2
    assert channels[0].rate == pytest.approx(20.0)
    c = channels[0].matrix(m.dim)
    assert c[0, 2] == pytest.approx(math.sqrt(20.0))
    assert np.count_nonzero(c) == 1


def test_collapse_channel_count():
    defects = [make_defect(omega=1e4 - i, x=10.0 + i, delta0_norm=0.5) for i in range(5)]
    rs = make_retained(defects)
    assert len(build_collapse(rs)) == 5


def test_negative_t1_rejected():
    d = make_defect(t1_tls=-1.0)
    rs = make_retained([d])
    with pytest.raises(ValueError):
        build_hamiltonian(rs)


def test_nonfinite_coupling_rejected():
    d = make_defect(omega=np.nan)
    with pytest.raises(ValueError):
        build_hamiltonian(make_retained([d]))


def test_empty_set_rejected():
    with pytest.raises(ValueError):
        build_hamiltonian(make_retained([]))


def test_initial_state_excited():
    s = initial_state("excited", 3)
    expected = np.zeros((3, 3))
    expected[1, 1] = 1.0
    assert np.array_equal(s.rho, expected)
    assert np.trace(s.rho) == 1.0


def test_initial_state_superposition():
    s = initial_state("superposition", 4)
    assert s.rho[0, 0] == s.rho[0, 1] == s.rho[1, 0] == s.rho[1, 1] == 0.5
    assert np.trace(s.rho) == pytest.approx(1.0)
    psi = s.amplitude_vector()
    assert np.allclose(np.outer(psi, psi.conj()), s.rho)


def test_initial_state_errors():
    with pytest.raises(ValueError):
        initial_state("excited", 2)
    with pytest.raises(ValueError):
        initial_state("thermal", 3)


def test_rates_by_basis_layout():
    rs = make_retained([make_defect(t1_tls=0.1), make_defect(t1_tls=0.2, x=20.0, omega=5e3)])
    m = build_hamiltonian(rs)
    rb = m.rates_by_basis()
    assert rb[0] == rb[1] == 0.0
    assert rb[2] == pytest.approx(10.0)
    assert rb[3] == pytest.approx(5.0)


def test_scale_qubit_couplings():
    d1 = make_defect(omega=2.0e4, x=10.0)
    d2 = make_defect(omega=1.0e4, x=11.0)
    j = np.array([[0.0, 3.0e3], [3.0e3, 0.0]])
    m = build_hamiltonian(make_retained([d1, d2], pair_coupling=j))
    half = m.scale_qubit_couplings(0.5)
    assert half.hamiltonian[1, 2] == pytest.approx(0.5 * m.hamiltonian[1, 2])
    assert half.hamiltonian[2, 3] == m.hamiltonian[2, 3]  # TLS-TLS unchanged
    assert np.array_equal(half.collapse_rates, m.collapse_rates)


def test_with_rates():
    m = build_hamiltonian(make_retained([make_defect()]))
    m2 = m.with_rates([7.0])
    assert m2.collapse_rates == pytest.approx([7.0])
    assert np.array_equal(m2.hamiltonian, m.hamiltonian)
