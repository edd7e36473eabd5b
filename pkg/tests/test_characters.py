from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fusion_algebra.characters import (
    CharacterTable,
    chi,
    load_cache,
    power_sum,
    rank_level_duality_failures,
    s_matrix,
    s_zero,
    schur_newton,
    schur_value,
    symmetry_residual,
    unitarity_residual,
)
from fusion_algebra.cyclotomic import root_of_unity
from fusion_algebra.weight_lattice import (
    AlgebraSpec,
    apply_C,
    apply_J,
    ality,
    partition_labels,
    young_rows,
)


def kac_peterson(spec: AlgebraSpec) -> np.ndarray:
    """S from the Weyl-group determinant with orthonormal coordinates, phase fixed by S_00 > 0."""
    rbar, kbar = spec.rbar, spec.kbar
    L = [np.array(partition_labels(w), dtype=float) for w in spec.weights]
    n = len(L)
    S = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            x, y = L[a], L[b]
            gram = np.outer(x, y) - x.sum() * y.sum() / rbar**2
            S[a, b] = np.linalg.det(np.exp(-2j * np.pi * gram / kbar))
    S /= np.sqrt(rbar) * kbar ** (spec.r / 2)
    return S * abs(S[0, 0]) / S[0, 0]


def bialternant(lam, mu, spec: AlgebraSpec) -> complex:
    """chi via det(x_i^(rows_j + rbar - j)) / det(x_i^(rbar - j)) with the ality phase."""
    rbar, kbar = spec.rbar, spec.kbar
    x = np.exp(-2j * np.pi * np.array(partition_labels(mu)) / kbar)
    rows = young_rows(lam) + [0]
    num = np.linalg.det(np.array([[xi ** (rows[j] + rbar - 1 - j) for j in range(rbar)] for xi in x]))
    den = np.linalg.det(np.array([[xi ** (rbar - 1 - j) for j in range(rbar)] for xi in x]))
    t_lam = sum(j * v for j, v in enumerate(lam))
    t_mu_rho = sum(j * (v + 1) for j, v in enumerate(mu))
    return np.exp(2j * np.pi * t_lam * t_mu_rho / (rbar * kbar)) * num / den


@pytest.mark.parametrize("k", range(1, 9))
def test_su2_closed_form(k):
    spec = AlgebraSpec(1, k)
    S = s_matrix(spec)
    a = np.arange(k + 1)
    expected = np.sqrt(2 / (k + 2)) * np.sin(np.pi * np.outer(a + 1, a + 1) / (k + 2))
    assert np.abs(S - expected).max() < 1e-12


@pytest.mark.parametrize("r,k", [(2, 3), (3, 2), (2, 5), (3, 3), (4, 2)])
def test_s_matrix_against_weyl_determinant(r, k):
    spec = AlgebraSpec(r, k)
    assert np.abs(s_matrix(spec) - kac_peterson(spec)).max() < 1e-10


@pytest.mark.parametrize("r,k", [(2, 3), (3, 4), (1, 6), (4, 2)])
def test_exact_chi_against_bialternant(r, k):
    spec = AlgebraSpec(r, k)
    for lam in spec.weights:
        for mu in spec.weights:
            assert abs(chi(lam, mu, spec).to_complex() - bialternant(lam, mu, spec)) < 1e-9


@pytest.mark.parametrize("r,k", [(2, 3), (3, 4), (5, 2), (2, 7)])
def test_schur_routes_agree(r, k):
    # Jacobi-Trudi (direct or complementary) against the Newton-identity route
    spec = AlgebraSpec(r, k)
    for lam in spec.weights:
        for mu in spec.weights[::3]:
            jt = schur_value(lam, mu, spec, "jacobi_trudi")
            assert jt == schur_value(lam, mu, spec, "dual")
            assert jt == schur_newton(lam, mu, spec)


@pytest.mark.parametrize("r,k", [(2, 3), (3, 4)])
def test_conjugation_and_simple_current_symmetries(r, k):
    spec = AlgebraSpec(r, k)
    n = spec.rbar
    for lam in spec.weights:
        for mu in spec.weights:
            value = chi(lam, mu, spec)
            assert chi(apply_C(lam), mu, spec) == value.conjugate()
            assert chi(lam, apply_C(mu), spec) == value.conjugate()
            for a in range(n):
                b = (a + 1) % n
                phase = root_of_unity(n, b * ality(lam) + a * ality(mu) + k * a * b)
                assert chi(apply_J(lam, a), apply_J(mu, b), spec) == phase * value


@pytest.mark.parametrize("r,k", [(1, 3), (2, 2), (3, 4)])
def test_rank_level_duality_exact(r, k):
    assert rank_level_duality_failures(AlgebraSpec(r, k)) == []


def test_special_values():
    spec = AlgebraSpec(3, 4)
    vac = spec.vacuum()
    for mu in spec.weights[::5]:
        assert chi(vac, mu, spec) == root_of_unity(1, 0)
    # chi at the vacuum is the quantum dimension
    S = s_matrix(spec)
    for lam in spec.weights[::4]:
        qd = S[spec.index[lam], 0] / S[0, 0]
        assert abs(chi(lam, vac, spec).to_complex() - qd) < 1e-10


def test_power_sum_matches_definition():
    spec = AlgebraSpec(2, 4)
    for mu in spec.weights:
        x = np.exp(-2j * np.pi * np.array(partition_labels(mu)) / spec.kbar)
        for ell in range(0, 8):
            assert abs(power_sum(ell, mu, spec).to_complex() - np.sum(x**ell)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5))
def test_unitary_symmetric(r, k):
    S = s_matrix(AlgebraSpec(r, k))
    assert unitarity_residual(S) < 1e-10
    assert symmetry_residual(S) < 1e-10


def test_s_zero_is_first_row():
    spec = AlgebraSpec(3, 3)
    S = s_matrix(spec)
    for i, mu in enumerate(spec.weights):
        assert abs(S[0, i] - s_zero(mu, spec)) < 1e-12


def test_table_rows_match_free_function():
    spec = AlgebraSpec(2, 4)
    table = CharacterTable(spec)
    lam = spec.fundamental(1)
    row = table.chi_row(lam)
    assert row == [chi(lam, mu, spec) for mu in spec.weights]
    assert np.abs(table.chi_float[spec.index[lam]] - [v.to_complex() for v in row]).max() < 1e-10


def test_cache_roundtrip(tmp_path):
    spec = AlgebraSpec(2, 3)
    table = CharacterTable(spec, cache_dir=tmp_path, use_cache=True)
    table.chi_row(spec.fundamental(1))
    path = table.save()
    header, S, rows = load_cache(path, spec)
    assert header["enumeration_hash"] == spec.enumeration_hash
    assert np.array_equal(S, table.S)
    assert rows[spec.fundamental(1)] == table.chi_row(spec.fundamental(1))
    fresh = CharacterTable(spec, cache_dir=tmp_path, use_cache=True)
    assert np.array_equal(fresh.S, table.S)
