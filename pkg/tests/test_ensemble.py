import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import kstest

from conftest import make_defect, make_retained
from tlsbath.constants import DEBYE, HBAR
from tlsbath.ensemble import (
    EnsembleSpec,
    TlsEnsemble,
    load_retained_set,
    sample_ensemble,
    save_retained_set,
    select_top_k,
    tls_relaxation_time,
    tls_tls_coupling,
    tunneling_fractions,
)


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(dipole_moment=5.0)
    with pytest.raises(ValueError):
        EnsembleSpec(t1_min=0.0)
    with pytest.raises(ValueError):
        EnsembleSpec(retain_k=0)
    with pytest.raises(ValueError):
        EnsembleSpec(n_total=10, retain_k=11)
    with pytest.raises(ValueError):
        EnsembleSpec(rank_by="energy")


def test_tunneling_fraction_boundaries():
    d0, dn, z = tunneling_fractions(1.0, -1e4)
    assert d0 == 1.0 and dn == 0.0 and z == 0.0
    d0, dn, z = tunneling_fractions(0.0, -1e4)
    assert z == -1e4
    assert d0 == 0.0  # underflow flushed to exact zero
    assert dn == 1.0


def test_tunneling_fraction_identity():
    u = np.random.default_rng(0).uniform(0, 1, 10_000)
    d0, dn, _ = tunneling_fractions(u, -100.0)
    assert np.max(np.abs(d0**2 + dn**2 - 1.0)) < 1e-12


def test_tunneling_underflow_is_exact_zero():
    # z < ln(smallest normal) must flush, not produce subnormals
    d0, _, _ = tunneling_fractions(np.array([0.05]), -1e4)  # z = -9500
    assert d0[0] == 0.0


def test_relaxation_time_values():
    assert tls_relaxation_time(1.0, 0.05) == pytest.approx(0.05)
    assert tls_relaxation_time(0.1, 0.05) == pytest.approx(5.0)
    assert tls_relaxation_time(0.5, 1.0) == pytest.approx(4.0)
    assert tls_relaxation_time(0.0, 0.05) == math.inf  # dark sentinel
    with pytest.raises(ValueError):
        tls_relaxation_time(1.5, 0.05)
    with pytest.raises(ValueError):
        tls_relaxation_time(0.5, -1.0)


def test_pair_coupling_hand_value():
    a = make_defect(delta0_norm=1.0, x=0.0, y=0.0, depth=0.0)
    b = make_defect(delta0_norm=1.0, x=1.0, y=0.0, depth=0.0)  # 1 um apart
    j = tls_tls_coupling(a, b)
    # C_rms/(4 r^3)/hbar = 1.6e-48 / 4e-18 / 1.0546e-34
    assert j == pytest.approx(3.793e3, rel=1e-3)
    assert j / (2 * math.pi) == pytest.approx(604.0, rel=2e-3)


def test_pair_coupling_zero_for_dark():
    a = make_defect(delta0_norm=0.0, omega=0.0, x=0.0)
    b = make_defect(delta0_norm=1.0, x=1.0)
    assert tls_tls_coupling(a, b) == 0.0


def test_pair_coupling_cube_law():
    a = make_defect(delta0_norm=1.0, x=0.0)
    b1 = make_defect(delta0_norm=1.0, x=1.0)
    b2 = make_defect(delta0_norm=1.0, x=2.0)
    assert tls_tls_coupling(a, b1) == pytest.approx(8.0 * tls_tls_coupling(a, b2))


def test_pair_coupling_clamped_at_1nm():
    a = make_defect(delta0_norm=1.0, x=0.0, depth=0.0)
    b = make_defect(delta0_norm=1.0, x=0.0, depth=0.0)  # coincident
    c = make_defect(delta0_norm=1.0, x=1e-3, depth=0.0)  # exactly 1 nm
    assert tls_tls_coupling(a, b) == pytest.approx(tls_tls_coupling(a, c))


def _toy_ensemble(omegas, distances, spec=None):
    n = len(omegas)
    spec = spec or EnsembleSpec(n_total=n, retain_k=min(n, 2))
    z = np.zeros(n)
    om = np.asarray(omegas, float)
    d0 = np.full(n, 0.5)
    return TlsEnsemble(
        spec,
        x=np.asarray(distances, float),
        y=np.zeros(n),
        depth=np.zeros(n),
        energy_freq=np.full(n, 5e9),
        delta0_norm=d0,
        delta_norm=np.sqrt(1 - d0**2),
        log_tan_half_theta=z,
        dipole_field_angle=np.zeros(n),
        local_field=np.tile([1.0, 0, 0], (n, 1)),
        g=om / d0,
        omega=om,
        t1_tls=np.full(n, 0.2),
        distance_to_jj=np.asarray(distances, float),
    )


def test_select_top_k_orders_by_strength():
    two_pi = 2 * math.pi
    ens = _toy_ensemble([5e3 * two_pi, 1e3 * two_pi, 3e3 * two_pi], [10.0, 20.0, 30.0])
    rs = select_top_k(ens, 2)
    assert [abs(d.omega) for d in rs.defects] == pytest.approx(
        [5e3 * two_pi, 3e3 * two_pi]
    )


def test_select_top_k_tie_break_by_distance_then_index():
    ens = _toy_ensemble([1.0, 1.0, 1.0], [30.0, 10.0, 10.0])
    rs = select_top_k(ens, 3)
    assert [d.distance_to_jj for d in rs.defects] == [10.0, 10.0, 30.0]
    assert rs.defects[0].position.x == 10.0  # index 1 before index 2


def test_select_top_k_boundary_and_errors():
    ens = _toy_ensemble([1.0, 2.0], [1.0, 2.0])
    rs = select_top_k(ens, 2)
    assert len(rs) == 2
    with pytest.raises(ValueError):
        select_top_k(ens, 3)


def test_sampling_deterministic(small_geometry, small_field):
    spec = EnsembleSpec(n_total=5_000, retain_k=50, seed=11)
    a = sample_ensemble(spec, small_geometry, small_field)
    b = sample_ensemble(spec, small_geometry, small_field)
    assert np.array_equal(a.omega, b.omega)
    assert np.array_equal(a.x, b.x)
    ra = select_top_k(a, 50)
    rb = select_top_k(b, 50)
    assert ra.defects == rb.defects
    assert np.array_equal(ra.pair_coupling, rb.pair_coupling)


def test_sampled_invariants(small_geometry, small_field):
    spec = EnsembleSpec(n_total=20_000, retain_k=100, seed=3)
    ens = sample_ensemble(spec, small_geometry, small_field)
    assert np.max(np.abs(ens.delta0_norm**2 + ens.delta_norm**2 - 1.0)) < 1e-12
    assert np.array_equal(ens.omega, ens.g * ens.delta0_norm)
    assert np.all(np.abs(ens.omega) <= np.abs(ens.g) + 1e-300)
    assert np.all(
        np.abs(ens.energy_freq - spec.qubit_freq) <= spec.band_halfwidth
    )
    live = ens.delta0_norm > 0
    assert np.array_equal(
        ens.t1_tls[live], spec.t1_min / np.square(ens.delta0_norm[live])
    )
    assert np.all(np.isinf(ens.t1_tls[~live]))


def test_g_hand_value(small_geometry):
    # 3 Debye in a 1 V/m field at zero angle: p*E/hbar = 9.489e4 rad/s
    assert 3 * DEBYE * 1.0 / HBAR == pytest.approx(9.4898e4, rel=1e-4)
    assert (3 * DEBYE * 1.0 / HBAR) / (2 * math.pi) == pytest.approx(15.1e3, rel=2e-3)


def test_retained_strength_dominates_rest(small_geometry, small_field):
    spec = EnsembleSpec(n_total=20_000, retain_k=50, seed=5)
    ens = sample_ensemble(spec, small_geometry, small_field)
    rs = select_top_k(ens, 50)
    strengths = np.sort(np.abs(ens.omega))[::-1]
    retained_min = min(abs(d.omega) for d in rs.defects)
    assert retained_min >= strengths[50] - 1e-300


def test_ks_energy_and_theta(small_geometry, small_field):
    spec = EnsembleSpec(n_total=100_000, retain_k=1, seed=9)
    ens = sample_ensemble(spec, small_geometry, small_field)
    res = kstest(
        ens.energy_freq,
        "uniform",
        args=(spec.qubit_freq - spec.band_halfwidth, 2 * spec.band_halfwidth),
    )
    assert res.pvalue > 0.01
    res = kstest(
        ens.log_tan_half_theta,
        "uniform",
        args=(spec.log_tan_half_cutoff, -spec.log_tan_half_cutoff),
    )
    assert res.pvalue > 0.01


def test_rank_by_g_option(small_geometry, small_field):
    spec = EnsembleSpec(n_total=20_000, retain_k=10, seed=5, rank_by="g")
    ens = sample_ensemble(spec, small_geometry, small_field)
    rs = select_top_k(ens, 10)
    gs = [abs(d.g) for d in rs.defects]
    assert gs == sorted(gs, reverse=True)
    assert max(abs(ens.g)) == pytest.approx(gs[0])


def test_retained_set_validation():
    d1 = make_defect(omega=5.0)
    d2 = make_defect(omega=3.0, x=20.0)
    with pytest.raises(ValueError, match="sorted"):
        make_retained([d2, d1])
    j = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        make_retained([d1, d2], pair_coupling=j)


def test_retained_set_truncate():
    defects = [make_defect(omega=5.0 - i, x=10.0 + i) for i in range(4)]
    j = np.arange(16, dtype=float).reshape(4, 4)
    j = np.triu(j, 1)
    j = j + j.T
    rs = make_retained(defects, pair_coupling=j)
    t = rs.truncate(2)
    assert len(t) == 2
    assert np.array_equal(t.pair_coupling, j[:2, :2])
    with pytest.raises(ValueError):
        rs.truncate(5)


def test_retained_set_round_trip(tmp_path, small_geometry, small_field):
    spec = EnsembleSpec(n_total=5_000, retain_k=20, seed=2)
    ens = sample_ensemble(spec, small_geometry, small_field)
    rs = select_top_k(ens, 20)
    path = tmp_path / "retained.jsonl"
    save_retained_set(rs, path)
    loaded = load_retained_set(path)
    assert loaded.defects == rs.defects
    assert np.array_equal(loaded.pair_coupling, rs.pair_coupling)
    assert loaded.qubit_freq == rs.qubit_freq


def test_sample_requires_scaled_map(small_geometry, small_field):
    raw = replace(small_field, photon_scaled=False, omega_q=None)
    with pytest.raises(ValueError, match="photon-normalized"):
        sample_ensemble(EnsembleSpec(n_total=10, retain_k=1), small_geometry, raw)
