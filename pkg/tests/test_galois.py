from __future__ import annotations

import math

import numpy as np
import pytest

from fusion_algebra.characters import chi, s_zero
from fusion_algebra.cyclotomic import units
from fusion_algebra.galois import (
    GaloisContext,
    commutes_with_C,
    exact_s_zero,
    expected_w1_stabilizer,
    field_identification,
    homomorphism_failures,
    orbit_minimality_check,
    predicted_K,
    quantum_dimension,
    sigma_formula_image,
    stabilizer,
    two_sine,
    verify_entry_identity,
    verify_sigma_formula,
)
from fusion_algebra.weight_lattice import AlgebraSpec, apply_C, j_orbit


@pytest.mark.parametrize("m,kbar", [(1, 5), (2, 7), (3, 8), (5, 12)])
def test_two_sine(m, kbar):
    assert abs(two_sine(m, kbar).to_complex() - 2 * math.sin(math.pi * m / kbar)) < 1e-12


@pytest.mark.parametrize("r,k", [(1, 4), (2, 3), (3, 2), (3, 4), (4, 3)])
def test_exact_s_zero_matches_float(r, k):
    spec = AlgebraSpec(r, k)
    for mu in spec.weights:
        assert abs(exact_s_zero(mu, spec).to_complex() - s_zero(mu, spec)) < 1e-12


@pytest.mark.parametrize("r,k", [(2, 3), (1, 4)])
def test_entry_identity_exact(r, k):
    assert verify_entry_identity(AlgebraSpec(r, k)) == []


@pytest.mark.parametrize("r,k", [(2, 3), (1, 4), (3, 2)])
def test_action_is_group_homomorphism(r, k):
    spec = AlgebraSpec(r, k)
    ctx = GaloisContext(spec)
    assert homomorphism_failures(spec, ctx) == []
    assert commutes_with_C(spec, ctx)


def test_minus_one_is_conjugation():
    spec = AlgebraSpec(2, 4)
    ctx = GaloisContext(spec)
    act = ctx.action(-1)
    for mu in spec.weights:
        assert act.image(mu, spec) == apply_C(mu)
    assert ctx.action(1).permutation == tuple(range(spec.size))


def test_permutation_moves_fundamental_row():
    # sigma_ell applied to chi_w1(mu) lands on chi_w1(sigma_ell mu)
    spec = AlgebraSpec(2, 3)
    ctx = GaloisContext(spec)
    row = ctx.fundamental_rows[0]
    for act in ctx.all_actions():
        for j in range(spec.size):
            assert row[j].galois(act.ell) == row[act.permutation[j]]


@pytest.mark.parametrize("r,k", [(2, 3), (3, 4), (2, 5)])
def test_sigma_formula(r, k):
    rep = verify_sigma_formula(AlgebraSpec(r, k))
    assert rep.ok and rep.checked


def test_sigma_formula_sign_convention_matters():
    # the unsigned reading disagrees for a = 1 on A_{2,3}
    rep = verify_sigma_formula(AlgebraSpec(2, 3))
    assert len(rep.literal_failures) == 12
    assert all((ell % 6) != 1 for ell, _ in rep.literal_failures)


def test_sigma_image_basic():
    mu = (1, 1, 1)
    assert sigma_formula_image(mu, 0, 0) == mu
    assert sigma_formula_image(mu, 1, 0) == apply_C(mu)


@pytest.mark.parametrize("r,k,m", [(4, 4, 1), (5, 4, 1), (3, 4, 1), (4, 5, 2)])
def test_orbit_minimality(r, k, m):
    rep = orbit_minimality_check(m, AlgebraSpec(r, k))
    assert rep.ok and not rep.violations


def test_orbit_exception_reproduced():
    spec = AlgebraSpec(3, 4)
    rep = orbit_minimality_check(2, spec)
    assert rep.exceptional and rep.violations and rep.orbit_preserved
    w = spec.fundamental(2)
    assert {e.image for e in rep.entries} <= j_orbit(w)
    assert rep.ok


def test_orbit_check_domain():
    with pytest.raises(ValueError):
        orbit_minimality_check(3, AlgebraSpec(4, 4))


def test_quantum_dimension_of_simple_current():
    spec = AlgebraSpec(3, 3)
    assert abs(quantum_dimension((0, 3, 0, 0), spec) - 1) < 1e-12
    assert quantum_dimension(spec.fundamental(1), spec) > 1


@pytest.mark.parametrize("r,k", [(2, 3), (3, 4), (5, 4), (6, 3)])
def test_w1_stabilizer(r, k):
    spec = AlgebraSpec(r, k)
    assert stabilizer(spec.fundamental(1), spec) == expected_w1_stabilizer(spec)


@pytest.mark.parametrize("r,k,stab", [(2, 4, [1, 4, 16]), (2, 5, [1, 19]),
                                      (3, 3, [1, 9, 25]), (4, 3, [1, 11])])
def test_w1_stabilizer_larger_at_small_level(r, k, stab):
    # found by exhaustive search; each extra element fixes the whole exact chi column
    spec = AlgebraSpec(r, k)
    assert stabilizer(spec.fundamental(1), spec) == stab
    w = spec.fundamental(1)
    for ell in stab:
        assert all(chi(lam, w, spec).galois(ell) == chi(lam, w, spec) for lam in spec.weights)


@pytest.mark.parametrize("r,k,L,K", [(2, 3, 18, "Q_18"), (3, 4, 32, "Q_32"),
                                     (4, 3, 40, "Q_40"), (5, 3, 54, "Q_54[sqrt2]")])
def test_field_identification(r, k, L, K):
    rep = field_identification(AlgebraSpec(r, k))
    assert rep.stabilizer == [1]
    assert rep.L_order == L
    assert rep.K_descriptor == K == rep.K_predicted
    assert rep.ok


def test_predicted_K_branches():
    assert predicted_K(AlgebraSpec(5, 3)) == "Q_54[sqrt2]"
    assert predicted_K(AlgebraSpec(5, 5)) == "Q_66[sqrt-2]"
    assert predicted_K(AlgebraSpec(5, 4)) == "Q_60"


def test_parities_are_signs():
    spec = AlgebraSpec(3, 2)
    ctx = GaloisContext(spec)
    for ell in units(ctx.n):
        act = ctx.action(ell)
        assert set(act.parity) <= {1, -1}
        # parity is the sign of the real number sigma(S_0mu) / S_0,sigma(mu)
        for j in range(spec.size):
            lhs = ctx.s_zero[j].galois(act.lift).to_complex()
            rhs = ctx.s_zero[act.permutation[j]].to_complex()
            assert np.sign(lhs.real) * np.sign(rhs.real) == act.parity[j]
