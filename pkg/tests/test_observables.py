"""Tests for occupations, receiver magnetization, and battery metrics."""

import warnings

import numpy as np
import pytest

from ppxfer import ChainSpec, occupation_profile
from ppxfer.chain import CouplingProfile, adjacency_matrix, build_profile
from ppxfer.observables import (
    battery_metrics,
    interaction_energy,
    magnetization_receiver,
    occupation,
    switching_energy,
)
from ppxfer.oracle import oracle_occupation
from ppxfer.spectral import decompose_chain, diagonalize


def defected_decomposition(spec, shift=0.02):
    """Decomposition with an on-site defect on the last receiver site.

    A coupling (bond) defect keeps the chain bipartite and cannot move
    the hopping-energy observables off zero; an on-site defect can.
    """
    profile = build_profile(spec)
    onsite = profile.onsite.copy()
    onsite[-1] += shift
    return diagonalize(adjacency_matrix(CouplingProfile(onsite=onsite, hop=profile.hop)))


def test_occupation_marks_sender_block_at_time_zero():
    spec = ChainSpec(n_s=2, n_w=3, j0=0.05)
    for site in range(1, 8):
        expected = 1.0 if site <= 2 else 0.0
        assert occupation(spec, 0.0, site) == pytest.approx(expected, abs=1e-12)


def test_occupation_total_is_conserved():
    spec = ChainSpec(n_s=3, n_w=5, j0=0.04)
    rng = np.random.default_rng(2)
    for t in rng.uniform(0.0, 80.0, size=6):
        prof = occupation_profile(spec, float(t))
        assert prof.shape == (11,)
        assert np.all(prof >= -1e-14)
        assert np.sum(prof) == pytest.approx(3.0, abs=1e-10)


def test_occupation_profile_matches_sitewise_calls():
    spec = ChainSpec(n_s=2, n_w=2, j0=0.1)
    t = 4.2
    prof = occupation_profile(spec, t)
    for site in range(1, 7):
        assert prof[site - 1] == pytest.approx(occupation(spec, t, site), abs=1e-14)


def test_occupation_matches_sector_oracle_for_both_statistics():
    # One-body densities from a filled block are statistics-independent,
    # so a single amplitude-based value must match both sector evolutions.
    spec = ChainSpec(n_s=2, n_w=2, j0=0.1)
    t = 2.0
    for site in range(1, 7):
        fast = occupation(spec, t, site)
        for stats in ("fermion", "boson"):
            probe = ChainSpec(n_s=2, n_w=2, j0=0.1, statistics=stats)
            assert fast == pytest.approx(oracle_occupation(probe, t, site), abs=1e-10)


def test_occupation_rejects_out_of_range_site():
    spec = ChainSpec(n_s=1, n_w=1, j0=0.1)
    with pytest.raises(ValueError):
        occupation(spec, 1.0, 0)
    with pytest.raises(ValueError):
        occupation(spec, 1.0, 4)


def test_magnetization_starts_at_empty_block_value():
    spec = ChainSpec(n_s=3, n_w=7, j0=0.02)
    assert magnetization_receiver(spec, 0.0) == pytest.approx(-1.5, abs=1e-12)


def test_magnetization_equals_receiver_occupation_minus_half_filling():
    spec = ChainSpec(n_s=3, n_w=7, j0=0.05)
    dec = decompose_chain(spec)
    rng = np.random.default_rng(14)
    for t in rng.uniform(0.0, 300.0, size=10):
        mag = magnetization_receiver(spec, float(t), dec)
        prof = occupation_profile(spec, float(t), dec)
        occ_r = float(np.sum(prof[-3:]))
        assert mag == pytest.approx(occ_r - 1.5, abs=1e-12)


def test_magnetization_stays_in_physical_window():
    spec = ChainSpec(n_s=2, n_w=4, j0=0.08)
    dec = decompose_chain(spec)
    rng = np.random.default_rng(8)
    for t in rng.uniform(0.0, 500.0, size=20):
        mag = magnetization_receiver(spec, float(t), dec)
        assert -1.0 - 1e-12 <= mag <= 1.0 + 1e-12


def test_hopping_energies_vanish_on_uniform_chains():
    # Bipartite sublattice structure forces both observables to zero for
    # any pure-hopping chain, mirror-symmetric or not.
    spec = ChainSpec(n_s=2, n_w=5, j0=0.1)
    dec = decompose_chain(spec)
    for t in (0.0, 3.7, 18.1, 44.2):
        assert abs(interaction_energy(spec, t, dec)) < 1e-10
        assert abs(switching_energy(spec, t, dec)) < 1e-10


def test_hopping_energies_vanish_even_with_a_bond_defect():
    # Perturbing a coupling keeps the chain bipartite: still zero.
    spec = ChainSpec(n_s=2, n_w=5, j0=0.1)
    profile = build_profile(spec)
    hop = profile.hop.copy()
    hop[-1] += 0.02
    dec = diagonalize(adjacency_matrix(CouplingProfile(onsite=profile.onsite, hop=hop)))
    worst = max(abs(interaction_energy(spec, t, dec)) for t in np.linspace(0.0, 60.0, 40))
    assert worst < 1e-12


def test_on_site_defect_breaks_the_energy_zeros():
    spec = ChainSpec(n_s=2, n_w=5, j0=0.1)
    dec = defected_decomposition(spec)
    grid = np.linspace(0.0, 60.0, 120)
    worst_int = max(abs(interaction_energy(spec, float(t), dec)) for t in grid)
    worst_sw = max(abs(switching_energy(spec, float(t), dec)) for t in grid)
    assert worst_int > 1e-6
    assert worst_sw > 1e-8


def test_total_energy_is_conserved_with_defect():
    # <H> built from the same amplitudes must be time-independent even on
    # a defected (non-mirror, non-bipartite) chain.
    spec = ChainSpec(n_s=2, n_w=5, j0=0.1)
    profile = build_profile(spec)
    onsite = profile.onsite.copy()
    onsite[-1] += 0.02
    dec = diagonalize(adjacency_matrix(CouplingProfile(onsite=onsite, hop=profile.hop)))

    def total_energy(t):
        phases = np.exp(-1j * dec.eigenvalues * t)
        rows = (dec.eigenvectors[:2, :] * phases) @ dec.eigenvectors.T
        dens = np.sum(np.abs(rows) ** 2, axis=0)
        e = float(np.dot(onsite, dens))
        for b in range(len(profile.hop)):
            overlap = np.sum(np.conj(rows[:, b]) * rows[:, b + 1])
            e += profile.hop[b] * float(overlap.real)
        return e

    e0 = total_energy(0.0)
    for t in (2.9, 13.4, 57.0):
        assert total_energy(t) == pytest.approx(e0, abs=1e-10)


def test_battery_report_structure_and_initial_state():
    spec = ChainSpec(n_s=2, n_w=8, j0=0.05, h=2.0)
    rep = battery_metrics(spec)
    n = len(rep.times)
    for arr in (rep.e_b, rep.e_onsite, rep.e_hop, rep.p_s, rep.delta_e_sw):
        assert len(arr) == n
    assert np.allclose(rep.e_b, rep.e_onsite + rep.e_hop, atol=1e-14)
    # Empty battery: stored energy is -n_B h / 2, power starts at 0.
    assert rep.times[0] == 0.0
    assert rep.e_b[0] == pytest.approx(-2.0, abs=1e-10)
    assert rep.p_s[0] == 0.0
    # Hopping and switching parts stay at the sublattice-protected zeros.
    assert np.max(np.abs(rep.e_hop)) < 1e-10
    assert np.max(np.abs(rep.delta_e_sw)) < 1e-10


def test_battery_extrema_are_consistent_with_their_grids():
    spec = ChainSpec(n_s=2, n_w=8, j0=0.05, h=2.0)
    rep = battery_metrics(spec)
    assert rep.e_bar == np.max(rep.e_b)
    assert rep.p_tilde == np.max(rep.p_s)
    k = int(np.argmax(rep.e_b))
    assert rep.tau_bar == rep.times[k]
    assert rep.p_bar == rep.p_s[k]
    assert rep.p_bar <= rep.p_tilde
    # Charging gain is bounded by flipping every battery site.
    assert rep.e_bar - rep.e_b[0] <= 2 * 2.0 + 1e-9


def test_battery_accepts_explicit_grid():
    spec = ChainSpec(n_s=1, n_w=4, j0=0.1, h=2.0)
    rep = battery_metrics(spec, t_grid=np.array([0.0, 1.0, 2.0]))
    assert list(rep.times) == [0.0, 1.0, 2.0]
    assert len(rep.e_b) == 3


def test_battery_warns_when_field_is_weak():
    spec = ChainSpec(n_s=1, n_w=2, j0=0.1, h=0.5)
    with pytest.warns(UserWarning, match="h="):
        battery_metrics(spec, t_grid=np.array([0.0, 1.0]))
