"""Fusion-generators, fusion-rank search and the divisor generators.

A set Gamma of weights is a fusion-generator when mu -> (chi_gamma(mu))_gamma
is injective.  Acceptance and rejection are both decided exactly: a generator
is certified by a full pass of canonical signature keys through a hash set,
and a rejection by an exactly confirmed colliding pair.  Floats are used only
to propose which pairs might collide.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .characters import CharacterTable
from .cyclotomic import prime_factors
from .fixed_points import is_nz
from .fusion import is_w1_invertible
from .weight_lattice import (
    AlgebraSpec,
    Weight,
    ality,
    apply_C,
    apply_J,
    format_weight,
    tau_dual,
)

FLOAT_MERGE_TOL = 1e-7
DEFAULT_WITNESS_LIMIT = 60_000


@dataclass
class GeneratorResult:
    members: tuple[Weight, ...]
    is_generator: bool
    witness_pair: tuple[Weight, Weight] | None = None
    certified: str = "exact"

    def to_record(self) -> dict:
        rec = {"members": [format_weight(g) for g in self.members],
               "is_generator": self.is_generator, "certified": self.certified}
        if self.witness_pair:
            rec["witness_pair"] = [format_weight(w) for w in self.witness_pair]
        return rec


class SignatureEngine:
    """Exact and float signature data for one algebra, shared across candidates."""

    def __init__(self, table: CharacterTable):
        self.table = table
        self.spec = table.spec
        self._keys: dict[Weight, list] = {}
        self._labels: dict[Weight, np.ndarray] = {}

    def exact_keys(self, gamma: Weight) -> list:
        keys = self._keys.get(gamma)
        if keys is None:
            keys = [c.key() for c in self.table.chi_row(gamma)]
            self._keys[gamma] = keys
        return keys

    def float_labels(self, gamma: Weight) -> np.ndarray:
        """Cluster ids of chi_gamma(mu) over mu; equal exact values share an id."""
        labels = self._labels.get(gamma)
        if labels is None:
            vals = self.table.chi_float[self.table.index[gamma]]
            pts = np.column_stack([vals.real, vals.imag])
            scale = max(1.0, float(np.abs(vals).max()))
            pairs = cKDTree(pts).query_pairs(FLOAT_MERGE_TOL * scale, output_type="ndarray")
            labels = _components(len(vals), pairs)
            self._labels[gamma] = labels
        return labels

    def exact_equal(self, gamma: Weight, mu: Weight, nu: Weight) -> bool:
        return self.table.chi(gamma, mu) == self.table.chi(gamma, nu)

    def certify(self, members: Sequence[Weight]) -> GeneratorResult:
        """Full exact injectivity pass."""
        members = tuple(members)
        rows = [self.exact_keys(g) for g in members]
        seen: dict[tuple, int] = {}
        for j in range(self.spec.size):
            sig = tuple(row[j] for row in rows)
            other = seen.setdefault(sig, j)
            if other != j:
                ws = self.spec.weights
                return GeneratorResult(members, False, (ws[other], ws[j]))
        return GeneratorResult(members, True)

    def float_collision(self, members: Sequence[Weight]) -> tuple[int, int] | None:
        """Some pair mu != nu whose float signatures agree, or None."""
        combined = np.zeros(self.spec.size, dtype=np.int64)
        for g in members:
            lab = self.float_labels(g)
            combined = combined * (int(lab.max()) + 1) + lab
            _, combined = np.unique(combined, return_inverse=True)
        order = np.argsort(combined, kind="stable")
        same = np.flatnonzero(combined[order][1:] == combined[order][:-1])
        if same.size == 0:
            return None
        return int(order[same[0]]), int(order[same[0] + 1])

    def test(self, members: Sequence[Weight]) -> GeneratorResult:
        """Float proposal, then exact confirmation either way."""
        members = tuple(members)
        hit = self.float_collision(members)
        if hit is not None:
            mu, nu = (self.spec.weights[i] for i in hit)
            if all(self.exact_equal(g, mu, nu) for g in members):
                return GeneratorResult(members, False, (mu, nu))
        return self.certify(members)


def _components(n: int, pairs: np.ndarray) -> np.ndarray:
    graph = coo_matrix((np.ones(len(pairs), dtype=np.int8), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels.astype(np.int64)


def signature_table(members: Sequence[Weight], table: CharacterTable) -> dict[Weight, tuple]:
    engine = SignatureEngine(table)
    rows = [engine.exact_keys(g) for g in members]
    return {mu: tuple(row[j] for row in rows) for j, mu in enumerate(table.weights)}


def is_generator(members: Sequence[Weight], spec_or_table: AlgebraSpec | CharacterTable) -> GeneratorResult:
    table = spec_or_table if isinstance(spec_or_table, CharacterTable) else CharacterTable(spec_or_table)
    return SignatureEngine(table).certify(members)


# ---------------------------------------------------------------------------
# lower bound


@dataclass
class LowerBound:
    bound: int
    D: int
    factorization: dict[int, int]
    slots: list[tuple[str, int, int]]  # ("prime", p, l) or ("level", D, 0)

    def to_record(self) -> dict:
        return {"bound": self.bound, "D": self.D,
                "factorization": {str(p): a for p, a in self.factorization.items()},
                "slots": [list(s) for s in self.slots]}


def _factorize(n: int) -> dict[int, int]:
    out = {}
    for p in prime_factors(n):
        a = 0
        while n % p == 0:
            n //= p
            a += 1
        out[p] = a
    return out


def rank_lower_bound(spec: AlgebraSpec) -> LowerBound:
    D = math.gcd(spec.rbar, spec.k)
    fac = _factorize(D)
    slots = [("prime", p, ell) for p, a in fac.items() for ell in range(1, a + 1)]
    if D != spec.rbar:
        slots.append(("level", D, 0))
    return LowerBound(len(slots), D, fac, slots)


def slot_of(gamma: Weight, spec: AlgebraSpec, lb: LowerBound | None = None) -> int | None:
    """Index of the lower-bound slot this weight can fill, or None.

    Slot (p, l) needs gamma in NZ(rbar p^l / D) with gcd(D, t(gamma)) = D/p^l;
    the extra slot needs gamma in NZ(rbar/D) with D | t(gamma).  The gcd
    conditions are mutually exclusive, so each weight fills at most one slot.
    """
    lb = lb or rank_lower_bound(spec)
    D = lb.D
    g = math.gcd(D, ality(gamma))
    for i, (kind, p, ell) in enumerate(lb.slots):
        if kind == "prime" and g == D // p ** ell:
            if is_nz(gamma, spec.rbar * p ** ell // D, spec):
                return i
        elif kind == "level" and g == D:
            if is_nz(gamma, spec.rbar // D, spec):
                return i
    return None


def passes_lower_bound_certificate(members: Iterable[Weight], spec: AlgebraSpec,
                                   lb: LowerBound | None = None) -> bool:
    lb = lb or rank_lower_bound(spec)
    filled = {slot_of(g, spec, lb) for g in members}
    return all(i in filled for i in range(len(lb.slots)))


# ---------------------------------------------------------------------------
# divisor generators and predicates


def divisor_generators(spec: AlgebraSpec) -> tuple[list[Weight], list[Weight] | None]:
    """(Gamma_div, Gamma_div^tau).

    The second set is None when it would need a fundamental weight w^d with
    d > r.  When k = r+1 the weight w^k does not exist and J0 = k w^1 is used.
    """
    r, k, kbar, rbar = spec.r, spec.k, spec.kbar, spec.rbar
    div = [spec.fundamental(d) for d in range(1, r + 1) if 2 * d <= rbar and kbar % d == 0]
    ds = [d for d in range(1, k // 2 + 1) if kbar % d == 0]
    if any(d > r for d in ds):
        return div, None
    tau = [spec.fundamental(d) for d in ds]
    if k >= 1 and rbar % k == 0:
        extra = apply_J(spec.vacuum(), 1) if k == rbar else spec.fundamental(k)
        if extra not in tau:
            tau.append(extra)
    return div, tau


def hook(spec: AlgebraSpec, d: int, ell: int) -> Weight:
    """The hook ell*w^1 + w^{d-ell}, 1 <= ell <= d."""
    labels = [0] * spec.rbar
    labels[1] += ell
    labels[d - ell] += 1  # d - ell = 0 lands in slot 0 and is absorbed by the level
    labels[0] = spec.k - sum(labels[1:])
    return spec.weight(labels)


def corollary1_predicate(spec: AlgebraSpec) -> bool:
    """Closed-form test for {w^1} being a fusion-generator."""
    m = min(spec.rbar, spec.k)
    primes_ok = all(2 * p > m for p in prime_factors(spec.kbar))
    g = math.gcd(spec.rbar, spec.k)
    return primes_ok and (spec.k % spec.rbar == 0 or g == 1)


def prefix_prediction(spec: AlgebraSpec, m: int) -> bool:
    """Is {w^1..w^m} predicted to generate: contains Gamma_div or Gamma_div^tau."""
    prefix = {spec.fundamental(a) for a in range(1, m + 1)}
    div, tau = divisor_generators(spec)
    return set(div) <= prefix or (tau is not None and set(tau) <= prefix)


# ---------------------------------------------------------------------------
# rank search


@dataclass
class RankResult:
    spec: AlgebraSpec
    rank: int | None
    lower: int
    upper: int | None
    witnesses: list[tuple[Weight, ...]] = field(default_factory=list)
    complete: bool = False
    rejected: dict[int, int] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"r": self.spec.r, "k": self.spec.k, "rank": self.rank,
                "lower": self.lower, "upper": self.upper,
                "witnesses": [[format_weight(g) for g in w] for w in self.witnesses],
                "witnesses_complete": self.complete,
                "rejected": {str(s): n for s, n in self.rejected.items()},
                "certified": "exact"}


def c_canonical(members: Sequence[int], cperm: Sequence[int]) -> bool:
    """True when this index set is the representative of {Gamma, C Gamma}."""
    own = tuple(sorted(members))
    return own <= tuple(sorted(cperm[i] for i in members))


def _candidates(pool: Sequence[int], size: int, cperm: Sequence[int]) -> Iterator[tuple[int, ...]]:
    for combo in itertools.combinations(pool, size):
        if c_canonical(combo, cperm):
            yield combo


def seed_sets(spec: AlgebraSpec, size: int) -> list[tuple[Weight, ...]]:
    """Likely generators of a given size: fundamental subsets, then the divisor sets."""
    out = []
    div, tau = divisor_generators(spec)
    for s in (div, tau):
        if s is not None and len(s) == size:
            out.append(tuple(s))
    for combo in itertools.combinations(range(1, spec.r + 1), size):
        out.append(tuple(spec.fundamental(a) for a in combo))
    seen = set()
    return [s for s in out if not (frozenset(s) in seen or seen.add(frozenset(s)))]


def fusion_rank(spec: AlgebraSpec, max_size: int = 3, fundamental_only: bool = False,
                table: CharacterTable | None = None, witness_limit: int = DEFAULT_WITNESS_LIMIT,
                certify_witnesses: bool = True) -> RankResult:
    """Smallest generator size, searched upward from the proven lower bound.

    Sizes whose candidate count is within ``witness_limit`` are searched
    exhaustively over representatives of {Gamma, C Gamma}, so every witness
    of the minimal size is reported.  Larger sizes fall back to seed sets;
    a seed succeeding at the lower bound still fixes the rank, but the
    witness list is then marked incomplete.
    """
    table = table or CharacterTable(spec)
    engine = SignatureEngine(table)
    lb = rank_lower_bound(spec)
    weights = spec.weights
    if fundamental_only:
        pool = [spec.index[spec.fundamental(a)] for a in range(1, spec.r + 1)]
    else:
        pool = list(range(spec.size))
    cperm = [spec.index[apply_C(w)] for w in weights]
    slots = {i: slot_of(weights[i], spec, lb) for i in pool}
    lower = max(lb.bound, 1)
    if spec.size == 1:
        return RankResult(spec, 0, 0, 0, [()], True)
    result = RankResult(spec, None, lower, None)
    for size in range(lower, max_size + 1):
        n_cand = math.comb(len(pool), size)
        if n_cand <= witness_limit:
            found = []
            rejected = 0
            for combo in _candidates(pool, size, cperm):
                if not all(i in {slots[c] for c in combo} for i in range(len(lb.slots))):
                    rejected += 1  # fails the lower-bound certificate, a proven non-generator
                    continue
                members = tuple(weights[c] for c in combo)
                hit = engine.float_collision(members)
                if hit is not None:
                    mu, nu = (weights[i] for i in hit)
                    if all(engine.exact_equal(g, mu, nu) for g in members):
                        rejected += 1
                        continue
                if not certify_witnesses:
                    found.append(members)
                    continue
                res = engine.certify(members)
                if res.is_generator:
                    found.append(members)
                else:
                    rejected += 1
            result.rejected[size] = rejected
            if found:
                result.rank = result.lower = result.upper = size
                result.witnesses = found
                result.complete = certify_witnesses
                return result
            result.lower = size + 1
            continue
        for seed in seed_sets(spec, size):
            if fundamental_only and any(g not in {weights[i] for i in pool} for g in seed):
                continue
            if engine.certify(seed).is_generator:
                result.witnesses.append(seed)
        if result.witnesses:
            result.upper = size
            if size == result.lower:
                result.rank = size
            return result
        return result  # undecided at this size: report the interval
    return result


# ---------------------------------------------------------------------------
# rank-level duality transfer


def duality_transfer(members: Sequence[Weight], spec: AlgebraSpec) -> list[Weight]:
    """Map a generator of A_{r,k} to one of A_{k-1,r+1} by transpose and a J-twist.

    Each image tau(gamma) is rotated by J^a with a chosen so that
    gcd(a(r+1) + t(gamma), k) = gcd(t(gamma), r+1, k).
    """
    if spec.k % spec.rbar == 0:
        raise ValueError("duality transfer needs r+1 not dividing k")
    out = []
    for g in members:
        t = sum(j * x for j, x in enumerate(g))
        target = math.gcd(math.gcd(t, spec.rbar), spec.k)
        a = next(a for a in range(spec.k) if math.gcd(a * spec.rbar + t, spec.k) == target)
        out.append(apply_J(tau_dual(g, spec.k), a))
    return out


def dual_spec(spec: AlgebraSpec) -> AlgebraSpec:
    return AlgebraSpec(spec.k - 1, spec.rbar)


# ---------------------------------------------------------------------------
# Table reproduction


@dataclass
class TableCell:
    r: int
    k: int
    basis: tuple[Weight, ...]
    basis_is_generator: bool
    rank: int | None
    lower: int
    w1_invertible: bool
    witnesses: list[tuple[Weight, ...]]
    witnesses_complete: bool
    basis_witness_pair: tuple[Weight, Weight] | None = None

    def to_record(self) -> dict:
        rec = {"r": self.r, "k": self.k, "rank": self.rank,
               "basis_list": [format_weight(g) for g in self.basis],
               "basis_is_generator": self.basis_is_generator,
               "w1_invertible": self.w1_invertible,
               "witness_count": len(self.witnesses),
               "witnesses_complete": self.witnesses_complete,
               "certified": "exact"}
        if self.basis_witness_pair:
            # two weights the listed basis cannot tell apart
            rec["basis_witness_pair"] = [format_weight(w) for w in self.basis_witness_pair]
        return rec


def reproduce_cell(spec: AlgebraSpec, basis: Sequence[Weight], max_size: int = 3,
                   witness_limit: int = DEFAULT_WITNESS_LIMIT) -> TableCell:
    """Certify a listed basis and the rank in one cell."""
    table = CharacterTable(spec)
    engine = SignatureEngine(table)
    basis = tuple(basis)
    basis_res = engine.certify(basis)
    ok = basis_res.is_generator
    lb = rank_lower_bound(spec)
    if ok and len(basis) == max(lb.bound, 1) and math.comb(spec.size, len(basis)) > witness_limit:
        # the bound is attained, so the rank is settled without a search
        rank_res = RankResult(spec, len(basis), len(basis), len(basis), [basis], False)
    else:
        rank_res = fusion_rank(spec, max_size, table=table, witness_limit=witness_limit)
    return TableCell(spec.r, spec.k, basis, ok, rank_res.rank, rank_res.lower,
                     is_w1_invertible(spec), rank_res.witnesses, rank_res.complete,
                     basis_res.witness_pair)


def load_table(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return json.load(fh)["cells"]


def golden_basis(cell: dict, spec: AlgebraSpec) -> tuple[Weight, ...]:
    return tuple(spec.weight([int(x) for x in b.split(",")], with_zeroth=False)
                 for b in cell["basis"])


def compare_cell(cell: dict, got: TableCell) -> list[str]:
    """Differences between a golden cell and a reproduced one (empty when they agree)."""
    spec = AlgebraSpec(cell["r"], cell["k"])
    basis = golden_basis(cell, spec)
    problems = []
    if not got.basis_is_generator:
        problems.append("listed basis is not a generator")
    if got.rank != len(basis):
        problems.append(f"rank {got.rank} != basis size {len(basis)}")
    if got.witnesses_complete and basis not in got.witnesses and \
            tuple(apply_C(g) for g in basis) not in got.witnesses and \
            not any(set(w) == set(basis) or set(w) == {apply_C(g) for g in basis} for w in got.witnesses):
        problems.append("listed basis missing from the witness list")
    if got.w1_invertible != cell["w1_invertible"]:
        problems.append(f"w1 invertible {got.w1_invertible} != {cell['w1_invertible']}")
    return problems
