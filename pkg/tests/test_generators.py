from __future__ import annotations

import itertools

import numpy as np
import pytest

from fusion_algebra.characters import CharacterTable
from fusion_algebra.generators import (
    SignatureEngine,
    c_canonical,
    corollary1_predicate,
    divisor_generators,
    dual_spec,
    duality_transfer,
    fusion_rank,
    hook,
    is_generator,
    passes_lower_bound_certificate,
    prefix_prediction,
    rank_lower_bound,
)
from fusion_algebra.weight_lattice import AlgebraSpec, apply_C


def brute_generates(members, table: CharacterTable) -> bool:
    """Do the float signature columns separate all weights?  Rounded to 1e-6."""
    rows = table.chi_float[[table.index[g] for g in members]]
    keys = {tuple(np.round(np.concatenate([col.real, col.imag]), 6)) for col in rows.T}
    return len(keys) == table.spec.size


@pytest.mark.parametrize("r,k", [(1, 3), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)])
def test_is_generator_against_brute_force(r, k):
    spec = AlgebraSpec(r, k)
    table = CharacterTable(spec)
    for a, b in itertools.combinations(spec.weights, 2):
        assert is_generator([a, b], table).is_generator == brute_generates([a, b], table)
    for a in spec.weights:
        assert is_generator([a], table).is_generator == brute_generates([a], table)


def test_non_generator_has_exact_witness():
    spec = AlgebraSpec(3, 2)
    table = CharacterTable(spec)
    res = is_generator([spec.fundamental(1)], table)
    assert not res.is_generator
    mu, nu = res.witness_pair
    assert mu != nu
    assert table.chi(spec.fundamental(1), mu) == table.chi(spec.fundamental(1), nu)


def test_engine_float_and_exact_agree():
    spec = AlgebraSpec(3, 4)
    engine = SignatureEngine(CharacterTable(spec))
    for g in spec.weights[:12]:
        assert engine.test([g]).is_generator == (engine.certify([g]).is_generator)


@pytest.mark.parametrize("r", range(1, 6))
@pytest.mark.parametrize("k", range(1, 9))
def test_corollary_predicate_matches_search(r, k):
    spec = AlgebraSpec(r, k)
    assert corollary1_predicate(spec) == is_generator([spec.fundamental(1)], spec).is_generator


@pytest.mark.parametrize("r", range(1, 6))
@pytest.mark.parametrize("k", range(1, 9))
def test_fundamental_prefix(r, k):
    # the first prefix that generates is exactly the predicted one
    spec = AlgebraSpec(r, k)
    table = CharacterTable(spec)
    first_true = next(m for m in range(1, r + 1) if prefix_prediction(spec, m))
    for m in range(1, r + 1):
        got = is_generator([spec.fundamental(a) for a in range(1, m + 1)], table).is_generator
        if m >= first_true:
            assert got
        if m == first_true - 1:
            assert not got


@pytest.mark.parametrize("r,k", [(2, 4), (3, 2), (3, 4), (5, 3), (4, 5), (2, 3), (1, 4)])
def test_rank_bounds(r, k):
    spec = AlgebraSpec(r, k)
    div, tau = divisor_generators(spec)
    assert is_generator(div, spec).is_generator
    if tau is not None:
        assert is_generator(tau, spec).is_generator
    res = fusion_rank(spec, max_size=3)
    assert res.rank is not None
    assert rank_lower_bound(spec).bound <= res.rank <= len(div)
    for w in res.witnesses:
        assert passes_lower_bound_certificate(w, spec)


@pytest.mark.parametrize("r,k,expected", [(2, 4, 1), (3, 2, 2), (4, 5, 1), (3, 3, 1), (5, 2, 2)])
def test_small_ranks(r, k, expected):
    assert fusion_rank(AlgebraSpec(r, k)).rank == expected


def test_lower_bound_values():
    lb = rank_lower_bound(AlgebraSpec(3, 4))
    assert lb.D == 4 and lb.bound == 2
    lb = rank_lower_bound(AlgebraSpec(5, 4))
    assert lb.D == 2 and lb.bound == 2  # prime slot and level slot
    lb = rank_lower_bound(AlgebraSpec(4, 3))
    assert lb.D == 1 and lb.bound == 1  # only the level slot


def test_lower_bound_rejects_are_non_generators():
    spec = AlgebraSpec(3, 2)
    table = CharacterTable(spec)
    for pair in itertools.combinations(spec.weights, 2):
        if not passes_lower_bound_certificate(pair, spec):
            assert not is_generator(pair, table).is_generator


def test_divisor_generator_edge_cases():
    spec = AlgebraSpec(3, 4)  # k = rbar uses J0 in the dual set
    div, tau = divisor_generators(spec)
    assert div == [spec.fundamental(1), spec.fundamental(2)]
    assert tau == [spec.fundamental(1), spec.fundamental(2), (0, 4, 0, 0)]  # J0 = k w^1
    spec = AlgebraSpec(1, 6)  # would need w^2 on A_1
    assert divisor_generators(spec)[1] is None


def test_hooks():
    spec = AlgebraSpec(4, 3)
    assert hook(spec, 3, 1) == (1, 1, 1, 0, 0)
    assert hook(spec, 2, 2) == (1, 2, 0, 0, 0)


def test_c_canonical_picks_one_of_pair():
    cperm = [0, 2, 1, 3]
    assert c_canonical((0, 1), cperm) and not c_canonical((0, 2), cperm)
    assert c_canonical((0, 3), cperm)


@pytest.mark.parametrize("r,k", [(1, 3), (2, 5)])
def test_duality_transfer(r, k):
    spec = AlgebraSpec(r, k)
    res = fusion_rank(spec, max_size=2)
    dual = dual_spec(spec)
    assert res.witnesses
    for members in res.witnesses[:5]:
        image = duality_transfer(members, spec)
        assert all(sum(g) == dual.k and len(g) == dual.rbar for g in image)
        assert is_generator(image, dual).is_generator


def test_witnesses_are_conjugation_representatives():
    spec = AlgebraSpec(4, 5)
    res = fusion_rank(spec)
    assert res.rank == 1 and res.complete
    # only one of {Gamma, C Gamma} is listed, and the other generates too
    reps = {frozenset(w) for w in res.witnesses}
    for w in res.witnesses:
        conj = frozenset(apply_C(g) for g in w)
        assert conj == frozenset(w) or conj not in reps
        assert is_generator(sorted(conj), spec).is_generator


@pytest.mark.slow
def test_rank_monotone_in_level_for_rank4():
    ranks = [fusion_rank(AlgebraSpec(4, k), max_size=2).rank for k in (5, 7, 9)]
    assert ranks == [1, 2, 1]
