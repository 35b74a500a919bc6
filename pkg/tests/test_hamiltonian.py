import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinequil import (
    DomainError,
    EigensolverError,
    HamiltonianSpec,
    ResourceLimitError,
    Spectrum,
    build_hamiltonian,
    diagonalize,
    scan_degenerate_gaps,
)

from _support import SZ, kron_hamiltonian, default_spectrum, site_op

couplings = st.floats(min_value=0.0, max_value=3.0, allow_nan=False)


def test_single_site_only_field_survives():
    H = build_hamiltonian(HamiltonianSpec(1, J=1, hz=0.01))
    np.testing.assert_array_equal(H, np.diag([0.005, -0.005]))


def test_two_sites_match_hand_built_tensor_products():
    from _support import I2, SX, SY

    expected = (np.kron(SX, SX) + 1.4 * np.kron(SY, SY) + 0.5 * np.kron(SZ, SZ)) / 4 \
        + 0.01 * (np.kron(SZ, I2) + np.kron(I2, SZ)) / 2
    H = build_hamiltonian(HamiltonianSpec(2, J=1, Jy=1.4, Jz=0.5, hz=0.01))
    np.testing.assert_allclose(H, expected.real, atol=1e-15)
    assert np.max(np.abs(expected.imag)) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_matches_kron_oracle_default_params(n):
    np.testing.assert_allclose(build_hamiltonian(HamiltonianSpec(n)), kron_hamiltonian(n).real, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 5), J=st.floats(-2, 2, allow_nan=False), Jy=couplings, Jz=couplings, hz=couplings)
def test_matches_kron_oracle_random_params(n, J, Jy, Jz, hz):
    H = build_hamiltonian(HamiltonianSpec(n, J, Jy, Jz, hz))
    np.testing.assert_allclose(H, kron_hamiltonian(n, J, Jy, Jz, hz).real, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), Jy=couplings, Jz=couplings, hz=couplings)
def test_hermitian_real_traceless(n, Jy, Jz, hz):
    H = build_hamiltonian(HamiltonianSpec(n, 1.0, Jy, Jz, hz))
    assert H.dtype == np.float64
    assert np.max(np.abs(H - H.conj().T)) < 1e-12
    assert abs(np.trace(H)) < 1e-9


def _total_sz(n):
    return sum(site_op(SZ / 2, i, n) for i in range(1, n + 1)).real


def test_isotropic_xy_conserves_total_sz():
    n = 6
    Sz = _total_sz(n)
    H = build_hamiltonian(HamiltonianSpec(n, Jy=1.0))
    assert np.max(np.abs(H @ Sz - Sz @ H)) < 1e-12
    H = build_hamiltonian(HamiltonianSpec(n, Jy=1.4))
    assert np.max(np.abs(H @ Sz - Sz @ H)) > 1e-3


@pytest.mark.parametrize("field,value", [("Jy", -0.1), ("Jz", -1.0), ("hz", -0.01)])
def test_negative_couplings_rejected(field, value):
    with pytest.raises(DomainError, match=field):
        HamiltonianSpec(4, **{field: value})


def test_invalid_chain_length():
    with pytest.raises(DomainError):
        HamiltonianSpec(0)


def test_dimension_cap():
    with pytest.raises(ResourceLimitError):
        build_hamiltonian(HamiltonianSpec(5), dim_cap=16)
    assert build_hamiltonian(HamiltonianSpec(4), dim_cap=16).shape == (16, 16)


def test_diagonalize_diagonal_matrix():
    spec = diagonalize(np.diag([0.005, -0.005]))
    np.testing.assert_array_equal(spec.energies, [-0.005, 0.005])
    np.testing.assert_array_equal(spec.vectors, [[0.0, 1.0], [1.0, 0.0]])


def test_two_site_closed_form_eigenvalues():
    Jy, Jz, hz = 1.4, 0.5, 0.01
    # {|00>,|11>} block and {|01>,|10>} block are each 2x2.
    r = np.hypot(hz, (1 - Jy) / 4)
    expected = sorted([Jz / 4 + r, Jz / 4 - r, -Jz / 4 + (1 + Jy) / 4, -Jz / 4 - (1 + Jy) / 4])
    spec = diagonalize(build_hamiltonian(HamiltonianSpec(2, 1.0, Jy, Jz, hz)))
    np.testing.assert_allclose(spec.energies, expected, atol=1e-12, rtol=0)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_spectrum_invariants(n):
    H = build_hamiltonian(HamiltonianSpec(n))
    s = diagonalize(H)
    D = 2 ** n
    V, E = s.vectors, s.energies
    assert np.all(np.diff(E) >= 0)
    assert np.max(np.abs(V.T @ V - np.eye(D))) < 1e-10
    assert np.max(np.abs(H @ V - V * E)) < 1e-8 * np.max(np.abs(H)) * D
    assert abs(E.sum()) < 1e-9
    assert np.max(np.abs((V * E) @ V.T - H)) < 1e-8


@pytest.mark.parametrize("n", range(1, 11))
def test_spectrum_mean_zero(n):
    assert abs(default_spectrum(n).energies.mean()) < 1e-9


def test_phase_convention_and_determinism():
    H = build_hamiltonian(HamiltonianSpec(6))
    a, b = diagonalize(H), diagonalize(H.copy())
    np.testing.assert_array_equal(a.energies, b.energies)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    pivots = np.argmax(np.abs(a.vectors), axis=0)
    assert np.all(a.vectors[pivots, np.arange(64)] > 0)


def test_spectrum_is_read_only():
    s = default_spectrum(3)
    with pytest.raises(ValueError):
        s.energies[0] = 1.0


def test_diagonalize_rejects_non_hermitian():
    with pytest.raises(DomainError):
        diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_diagonalize_reports_bad_residual(monkeypatch):
    def broken(H):
        return np.zeros(H.shape[0]), np.eye(H.shape[0])

    monkeypatch.setattr(np.linalg, "eigh", broken)
    with pytest.raises(EigensolverError) as info:
        diagonalize(np.array([[1.0, 0.5], [0.5, 2.0]]))
    assert info.value.residual > 0


def _brute_gap_collisions(levels, tol):
    gaps = [levels[j] - levels[i] for i, j in itertools.combinations(range(len(levels)), 2)]
    g = np.array(gaps)
    count = 0
    for start in range(0, g.size, 2048):
        block = g[start:start + 2048]
        close = np.abs(block[:, None] - g[None, :]) < tol
        idx = np.arange(start, start + block.size)
        # unordered pairs: count partners with a larger index only
        close &= np.arange(g.size)[None, :] > idx[:, None]
        count += int(close.sum())
    return count


def test_gap_scan_examples():
    r = scan_degenerate_gaps(np.array([0.0, 1.0, 3.0]), 1e-9)
    assert (r.degenerate_energies, r.degenerate_gaps) == (0, 0)
    r = scan_degenerate_gaps(np.array([0.0, 1.0, 2.0]), 1e-9)
    assert (r.degenerate_energies, r.degenerate_gaps) == (0, 1)


def test_gap_scan_degenerate_levels_do_not_fake_gap_collisions():
    r = scan_degenerate_gaps(np.array([0.0, 0.0, 1.0]), 1e-9)
    assert r.degenerate_energies == 1
    assert r.degenerate_gaps == 0
    assert r.distinct_levels == 2


def test_gap_scan_accepts_spectrum_and_checks_args():
    s = default_spectrum(3)
    assert isinstance(s, Spectrum)
    assert scan_degenerate_gaps(s, 1e-10).distinct_levels == 8
    with pytest.raises(DomainError):
        scan_degenerate_gaps(s, 0.0)
    with pytest.raises(ResourceLimitError):
        scan_degenerate_gaps(s, 1e-10, max_dim=4)


@pytest.mark.parametrize("n,tol", [(6, 1e-10), (6, 1e-6), (8, 1e-10), (8, 1e-7), (8, 1e-5)])
def test_gap_scan_matches_brute_force(n, tol):
    E = default_spectrum(n).energies
    r = scan_degenerate_gaps(E, tol)
    assert r.degenerate_energies == 0
    assert r.degenerate_gaps == _brute_gap_collisions(E, tol)


def test_default_model_has_no_level_or_gap_collisions_at_n8():
    r = scan_degenerate_gaps(default_spectrum(8), 1e-10)
    assert r.degenerate_energies == 0
    assert r.degenerate_gaps == 0
