"""Fusion coefficients, invertibility of N_{w^1}, and zero constructions.

Fusion coefficients come from the Verlinde sum evaluated in floats and rounded,
with the rounding residual checked.  Everything that decides a theorem, such
as whether chi_{w^1}(mu) vanishes, uses exact cyclotomic zero tests instead.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .characters import CharacterTable
from .cyclotomic import CycNumber, prime_factors, reduction
from .weight_lattice import (
    AlgebraSpec,
    CapacityError,
    Weight,
    apply_J,
    format_weight,
    from_partition_labels,
    partition_labels,
)

INTEGRALITY_TOL = 1e-6


class IntegralityError(ArithmeticError):
    """A Verlinde sum did not round cleanly to a nonnegative integer."""


@dataclass
class FusionMatrix:
    """N_lambda with entries[mu, nu] = N_{lambda,mu}^nu in enumeration order."""

    lam: Weight
    entries: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        if (self.entries < 0).any():
            raise IntegralityError(f"negative fusion coefficient in N_{self.lam}")


def _round_checked(values: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    if np.abs(values.imag).max(initial=0.0) >= INTEGRALITY_TOL:
        raise IntegralityError(f"{what}: imaginary part {np.abs(values.imag).max():.2e}")
    real = values.real
    rounded = np.rint(real)
    resid = float(np.abs(real - rounded).max(initial=0.0))
    if resid >= INTEGRALITY_TOL:
        raise IntegralityError(f"{what}: rounding residual {resid:.2e}")
    if (rounded < 0).any():
        raise IntegralityError(f"{what}: negative coefficient")
    return rounded.astype(np.int64), resid


def verlinde_coefficient(lam: Weight, mu: Weight, nu: Weight, table: CharacterTable) -> int:
    """N_{lambda,mu}^nu = sum_g S_{lam,g} S_{mu,g} conj(S_{nu,g}) / S_{0,g}."""
    S = table.S
    i, j, m = table.index[lam], table.index[mu], table.index[nu]
    val = np.sum(S[i] * S[j] * S[m].conj() / S[0])
    out, _ = _round_checked(np.array([val]), f"N_{{{lam},{mu}}}^{nu}")
    return int(out[0])


def fusion_matrix(lam: Weight, table: CharacterTable) -> FusionMatrix:
    S = table.S
    ratio = S[table.index[lam]] / S[0]
    vals = (S * ratio[None, :]) @ S.conj().T
    entries, resid = _round_checked(vals, f"N_{lam}")
    return FusionMatrix(lam, entries, resid)


def fusion_product(lam: Weight, mu: Weight, table: CharacterTable) -> dict[Weight, int]:
    """lambda x mu decomposed as {nu: N_{lambda,mu}^nu} (nonzero terms only)."""
    N = fusion_matrix(lam, table).entries
    row = N[table.index[mu]]
    return {table.weights[j]: int(c) for j, c in enumerate(row) if c}


def all_fusion_matrices(table: CharacterTable) -> np.ndarray:
    """Array N[lam, mu, nu] for every triple."""
    S = table.S
    ratio = S / S[0][None, :]
    vals = np.einsum("ag,lg,bg->lab", S, ratio, S.conj())
    entries, _ = _round_checked(vals, "fusion tensor")
    return entries


# ---------------------------------------------------------------------------
# invertibility of N_{w^1}


def prime_set(spec: AlgebraSpec) -> list[int]:
    """Primes p <= min(r+1, k) dividing k + r + 1."""
    bound = min(spec.rbar, spec.k)
    return [p for p in prime_factors(spec.kbar) if p <= bound]


def in_semigroup(n: int, gens: Iterable[int]) -> bool:
    """Is n a nonnegative integer combination of gens?"""
    gens = [g for g in gens if g > 0]
    if n < 0:
        return False
    reach = [False] * (n + 1)
    reach[0] = True
    for v in range(1, n + 1):
        reach[v] = any(v >= g and reach[v - g] for g in gens)
    return reach[n]


def conjecture2_predicate(spec: AlgebraSpec) -> bool:
    """True when both r+1 and k are combinations of the primes in prime_set."""
    P = prime_set(spec)
    return in_semigroup(spec.rbar, P) and in_semigroup(spec.k, P)


def w1_sum_vectors(spec: AlgebraSpec, weights: Sequence[Weight] | None = None) -> np.ndarray:
    """Rows of counts c[mu, a] = #{j : mu(j) = a}; row mu represents sum_j xi^{mu(j)}."""
    weights = spec.weights if weights is None else weights
    n = spec.kbar
    out = np.zeros((len(weights), n), dtype=np.int64)
    for i, w in enumerate(weights):
        out[i, list(partition_labels(w))] = 1
    return out


def chi_w1_zero_mask(spec: AlgebraSpec, weights: Sequence[Weight] | None = None) -> np.ndarray:
    """Exact test of sum_j xi_kbar^{mu(j)} == 0, one boolean per weight.

    chi_{w^1}(mu) is a root of unity times the conjugate of this sum, so the
    two vanish together.  Each row is reduced modulo Phi_kbar with integer
    arithmetic; a row is zero exactly when its canonical form is.
    """
    counts = w1_sum_vectors(spec, weights)
    red = reduction(spec.kbar)
    if spec.rbar * red.max_abs < 1 << 62:
        canon = counts @ red.table_i64
    else:
        canon = counts.astype(object).dot(red.table_obj) != 0
    return ~np.asarray(canon != 0).any(axis=1)


def chi_w1_zero_set(spec: AlgebraSpec, prefilter: bool = True, validate: bool = False) -> list[Weight]:
    """All mu with chi_{w^1}(mu) = 0.

    With ``prefilter`` the scan is skipped when r+1 or k is not a combination
    of the admissible primes, since then no zero can exist.  ``validate``
    runs the full scan regardless and raises if the shortcut was wrong.
    """
    if prefilter and not conjecture2_predicate(spec):
        if validate:
            found = chi_w1_zero_set(spec, prefilter=False)
            if found:
                raise AssertionError(f"{spec}: prefilter skipped {len(found)} zeros")
        return []
    mask = chi_w1_zero_mask(spec)
    return [w for w, z in zip(spec.weights, mask) if z]


def is_w1_invertible(spec: AlgebraSpec, prefilter: bool = True) -> bool:
    return not chi_w1_zero_set(spec, prefilter=prefilter)


def w1_vanishes_at(mu: Weight, spec: AlgebraSpec) -> bool:
    return CycNumber.from_exponents(spec.kbar, partition_labels(mu)).is_zero()


# ---------------------------------------------------------------------------
# constructive zeros


class ZeroConstructionError(ValueError):
    pass


@dataclass
class ZeroConstruction:
    weight: Weight
    labels: tuple[int, ...]
    recipe: str
    progressions: list[tuple[int, int]]  # (offset, stride)
    certified: bool


def _label_set(progs: list[tuple[int, int]], kbar: int) -> list[int]:
    out = []
    for offset, stride in progs:
        out.extend((offset + m * stride) % kbar for m in range(kbar // stride))
    return out


def _two_prime_progressions(kbar: int, p: int, q: int, a: int, b: int) -> list[tuple[int, int]]:
    """a progressions of stride kbar/p, then b of stride kbar/q.

    Offsets for the first family run 0, kbar/q, ..., (q-1)kbar/q, 1, 1+kbar/q, ...;
    the second family starts at ceil(a/q) and steps by kbar/p.
    """
    progs = []
    for t in range(a):
        progs.append((t // q + (t % q) * (kbar // q), kbar // p))
    start = -(-a // q)
    for t in range(b):
        progs.append((start + t // p + (t % p) * (kbar // p), kbar // q))
    return progs


def _multi_prime_progressions(kbar: int, primes: Sequence[int], mults: Sequence[int]) -> list[tuple[int, int]]:
    """Offsets c_ij = j - 1 + sum_{l<i} a_l with stride kbar/p_i."""
    progs = []
    base = 0
    for p, a in zip(primes, mults):
        for j in range(a):
            progs.append((base + j, kbar // p))
        base += a
    return progs


def construct_zero_weight(rbar: int, kbar: int, primes: Sequence[int], mults: Sequence[int]) -> ZeroConstruction:
    """Build mu with chi_{w^1}(mu) = 0 from disjoint arithmetic progressions.

    Each progression of stride kbar/p sums to zero in sum_j xi^{mu(j)}.  With
    two primes the staggered offsets are tried first, then the general
    offsets; the result is certified by an exact zero test.
    """
    primes = list(primes)
    mults = list(mults)
    if not primes:
        raise ZeroConstructionError(f"no admissible primes for rbar={rbar}, kbar={kbar}")
    if len(primes) != len(mults) or len(set(primes)) != len(primes):
        raise ZeroConstructionError("primes must be distinct and match the multiplicities")
    for p in primes:
        if kbar % p:
            raise ZeroConstructionError(f"prime {p} does not divide kbar={kbar}")
    if sum(p * a for p, a in zip(primes, mults)) != rbar:
        raise ZeroConstructionError(f"sum a_i p_i != rbar={rbar}")
    if kbar <= rbar:
        raise ZeroConstructionError("kbar must exceed rbar")

    attempts: list[tuple[str, list[tuple[int, int]], str | None]] = []
    if len(primes) == 2:
        (p, q), (a, b) = primes, mults
        need = p * q * (-(-a // q) + -(-b // p))
        why = None if kbar % (p * q) == 0 and kbar >= need else \
            f"two-prime bound needs pq | kbar and kbar >= {need}"
        attempts.append(("two-prime", _two_prime_progressions(kbar, p, q, a, b), why))
    violated = []
    for i in range(len(primes)):
        for j in range(i + 1, len(primes)):
            need = primes[i] * primes[j] * sum(mults[i:j + 1])
            if kbar < need:
                violated.append(f"kbar >= p{i + 1}*p{j + 1}*(a{i + 1}+..+a{j + 1}) = {need}")
    attempts.append(("multi-prime", _multi_prime_progressions(kbar, primes, mults),
                     "; ".join(violated) or None))

    reasons = []
    for name, progs, why in attempts:
        if why is not None:
            reasons.append(f"{name}: {why}")
            continue
        labels = _label_set(progs, kbar)
        if len(set(labels)) != len(labels):
            reasons.append(f"{name}: progressions overlap")
            continue
        lo = min(labels)
        labels = sorted(((x - lo) % kbar for x in labels), reverse=True)
        weight = from_partition_labels(labels, level=kbar - rbar)
        certified = CycNumber.from_exponents(kbar, labels).is_zero()
        if not certified:
            reasons.append(f"{name}: exact zero test failed")
            continue
        return ZeroConstruction(weight, tuple(labels), name, progs, certified)
    raise ZeroConstructionError("; ".join(reasons))


def admissible_decompositions(rbar: int, primes: Sequence[int]) -> Iterable[tuple[list[int], list[int]]]:
    """All (primes_used, multiplicities) with sum a_i p_i = rbar, a_i >= 1."""
    primes = sorted(primes)

    def rec(i: int, left: int, used: list[int], mults: list[int]):
        if left == 0:
            yield list(used), list(mults)
            return
        if i == len(primes):
            return
        yield from rec(i + 1, left, used, mults)
        p = primes[i]
        for a in range(1, left // p + 1):
            yield from rec(i + 1, left - a * p, used + [p], mults + [a])

    yield from rec(0, rbar, [], [])


def find_zero_construction(rbar: int, kbar: int) -> ZeroConstruction:
    """Try every decomposition rbar = sum a_i p_i over primes p | kbar, p <= min(rbar, k)."""
    k = kbar - rbar
    primes = [p for p in prime_factors(kbar) if p <= min(rbar, k)]
    if not primes:
        raise ZeroConstructionError(f"no admissible primes: none divides kbar={kbar} and is <= min(rbar, k)")
    reasons = []
    for used, mults in admissible_decompositions(rbar, primes):
        try:
            return construct_zero_weight(rbar, kbar, used, mults)
        except ZeroConstructionError as exc:
            reasons.append(f"{dict(zip(used, mults))}: {exc}")
    if not reasons:
        raise ZeroConstructionError(f"rbar={rbar} is not a combination of the admissible primes {primes}")
    raise ZeroConstructionError("; ".join(reasons))


# ---------------------------------------------------------------------------
# scanning the invertibility conjecture


@dataclass
class ScanRecord:
    r: int
    k: int
    predicate: bool
    invertible: bool
    witness_weight: Weight | None
    elapsed_ms: float
    error: str | None = None

    @property
    def match(self) -> bool:
        # the predicate claims non-invertibility
        return self.error is None and self.predicate == (not self.invertible)

    def to_record(self) -> dict:
        rec = {"r": self.r, "k": self.k, "predicate": self.predicate,
               "invertible": self.invertible, "elapsed_ms": round(self.elapsed_ms, 3)}
        if self.witness_weight is not None:
            rec["witness_weight"] = format_weight(self.witness_weight)
        if self.error is not None:
            rec["error"] = self.error
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> ScanRecord:
        w = rec.get("witness_weight")
        return cls(int(rec["r"]), int(rec["k"]), bool(rec["predicate"]), bool(rec["invertible"]),
                   tuple(int(x) for x in w.split(",")) if w else None, float(rec["elapsed_ms"]),
                   rec.get("error"))


@dataclass
class ScanReport:
    records: list[ScanRecord] = field(default_factory=list)

    @property
    def mismatches(self) -> list[ScanRecord]:
        return [rec for rec in self.records if not rec.match]


def scan_cell(r: int, k: int) -> ScanRecord:
    start = time.perf_counter()
    spec = AlgebraSpec(r, k)
    try:
        zeros = chi_w1_zero_set(spec, prefilter=False)
    except CapacityError as exc:
        return ScanRecord(r, k, conjecture2_predicate(spec), False, None,
                          (time.perf_counter() - start) * 1000.0, str(exc))
    elapsed = (time.perf_counter() - start) * 1000.0
    return ScanRecord(r, k, conjecture2_predicate(spec), not zeros, zeros[0] if zeros else None, elapsed)


def _read_journal(path: Path) -> dict[tuple[int, int], ScanRecord]:
    done = {}
    if path.exists():
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = ScanRecord.from_record(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError):
                    continue  # a torn last line from an interrupted run
                done[(rec.r, rec.k)] = rec
    return done


def conjecture2_scan(cells: Iterable[tuple[int, int]], journal: str | os.PathLike | None = None,
                     jobs: int = 1) -> ScanReport:
    """Compare the prime predicate with exhaustive exact ground truth on each cell.

    Finished cells are appended to ``journal`` (JSON lines) as they complete,
    and cells already present there are not recomputed.
    """
    cells = list(cells)
    path = Path(journal) if journal else None
    done = _read_journal(path) if path else {}
    todo = [c for c in cells if c not in done]
    fh = open(path, "a") if path else None
    if fh and path.stat().st_size:
        with open(path, "rb") as check:
            check.seek(-1, os.SEEK_END)
            if check.read(1) != b"\n":
                fh.write("\n")  # terminate a torn line so the next record starts clean
    try:
        def record(rec: ScanRecord) -> None:
            done[(rec.r, rec.k)] = rec
            if fh:
                fh.write(json.dumps(rec.to_record()) + "\n")
                fh.flush()

        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for rec in pool.map(scan_cell, [c[0] for c in todo], [c[1] for c in todo]):
                    record(rec)
        else:
            for r, k in todo:
                record(scan_cell(r, k))
    finally:
        if fh:
            fh.close()
    return ScanReport([done[c] for c in cells])


def simple_current_inverse_holds(spec: AlgebraSpec, table: CharacterTable, a: int = 1) -> bool:
    """N_{J^a 0} N_{J^-a 0} = I (forward direction of the inverse criterion)."""
    vac = spec.vacuum()
    A = fusion_matrix(apply_J(vac, a), table).entries
    B = fusion_matrix(apply_J(vac, -a), table).entries
    return bool((A @ B == np.eye(len(A), dtype=np.int64)).all())
