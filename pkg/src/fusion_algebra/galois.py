"""Galois action on P_+: permutation, parities, orbit checks and field identification.

sigma_ell acts on Q_{(r+1)(k+r+1)} and permutes weights through
sigma chi_lam(mu) = chi_lam(sigma mu).  The permutation is found by matching
exact signatures of the fundamental characters.  Parities need the exact
value of S_{0,mu}, which lives in Q_{4(r+1)(k+r+1)} because of the square
roots in the normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .characters import CharacterTable, s_entry
from .cyclotomic import CycNumber, lift_unit, root_of_unity, sqrt_integer, units
from .weight_lattice import (
    AlgebraSpec,
    Weight,
    apply_C,
    apply_J,
    format_weight,
    j_orbit,
    partition_labels,
    shifted_ality,
)

QDIM_MARGIN = 1e-9


class GaloisMatchError(RuntimeError):
    """sigma_ell of a signature matched no weight; points at a table or coprimality bug."""


def field_order(spec: AlgebraSpec) -> int:
    """n = (r+1)(k+r+1), the conductor of the field of all chi values."""
    return spec.rbar * spec.kbar


def two_sine(m: int, kbar: int) -> CycNumber:
    """2 sin(pi m / kbar) = -i (xi_{2kbar}^m - xi_{2kbar}^-m), as an element of Q_{4kbar}."""
    n = 4 * kbar
    vec = np.zeros(n, dtype=np.int64)
    vec[(kbar + 2 * m) % n] -= 1  # -i xi^{2m}
    vec[(kbar - 2 * m) % n] += 1  # +i xi^{-2m}
    return CycNumber.from_group_ring(n, vec)


def exact_s_zero(mu: Weight, spec: AlgebraSpec) -> CycNumber:
    """S_{0,mu} = (r+1)^{-1/2} kbar^{-r/2} prod_{a<b} 2 sin(pi (mu(a) - mu(b)) / kbar)."""
    labels = partition_labels(mu)
    kbar = spec.kbar
    prod = CycNumber.one(4 * kbar)
    for a in range(len(labels)):
        for b in range(a + 1, len(labels)):
            prod = prod * two_sine(labels[a] - labels[b], kbar)
    const = Fraction(1, spec.rbar * kbar ** (spec.r // 2))
    roots = sqrt_integer(spec.rbar)
    if spec.r % 2:
        roots = roots * sqrt_integer(kbar)
        const /= kbar
    return prod * roots * const


@dataclass
class GaloisAction:
    ell: int
    lift: int  # representative mod 4n used for parities
    permutation: tuple[int, ...]
    parity: tuple[int, ...] | None

    def image(self, mu: Weight, spec: AlgebraSpec) -> Weight:
        return spec.weights[self.permutation[spec.index[mu]]]

    def cycles(self) -> list[list[int]]:
        seen = set()
        out = []
        for start in range(len(self.permutation)):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            nxt = self.permutation[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.permutation[nxt]
            out.append(cyc)
        return out

    def to_record(self) -> dict:
        rec = {"ell": self.ell, "lift": self.lift,
               "permutation_cycles": [c for c in self.cycles() if len(c) > 1],
               "certified": "exact"}
        if self.parity is not None:
            rec["parity_vector"] = list(self.parity)
        return rec


class GaloisContext:
    """Exact fundamental signatures and S_{0,mu} values for one algebra."""

    def __init__(self, spec: AlgebraSpec, table: CharacterTable | None = None):
        self.spec = spec
        self.table = table or CharacterTable(spec)
        self.n = field_order(spec)
        self._actions: dict[tuple[int, bool], GaloisAction] = {}

    @cached_property
    def fundamental_rows(self) -> list[list[CycNumber]]:
        return [self.table.chi_row(self.spec.fundamental(a)) for a in range(1, self.spec.r + 1)]

    @cached_property
    def signature_index(self) -> dict[tuple, int]:
        rows = self.fundamental_rows
        index = {}
        for j in range(self.spec.size):
            sig = tuple(row[j].key() for row in rows)
            if sig in index:
                raise GaloisMatchError("fundamental characters fail to separate weights")
            index[sig] = j
        return index

    @cached_property
    def s_zero(self) -> list[CycNumber]:
        return [exact_s_zero(mu, self.spec) for mu in self.spec.weights]

    def action(self, ell: int, with_parity: bool = True) -> GaloisAction:
        key = (ell % self.n, with_parity)
        if key in self._actions:
            return self._actions[key]
        ell %= self.n
        if math.gcd(ell, self.n) != 1:
            raise ValueError(f"ell={ell} is not coprime to {self.n}")
        perm = []
        for j in range(self.spec.size):
            sig = tuple(row[j].galois(ell).key() for row in self.fundamental_rows)
            target = self.signature_index.get(sig)
            if target is None:
                raise GaloisMatchError(f"no weight matches sigma_{ell} of {self.spec.weights[j]}")
            perm.append(target)
        lift = lift_unit(ell, self.n, 4 * self.n)
        parity = None
        if with_parity:
            parity = []
            for j, t in enumerate(perm):
                image = self.s_zero[j].galois(lift)
                if image == self.s_zero[t]:
                    parity.append(1)
                elif image == -self.s_zero[t]:
                    parity.append(-1)
                else:
                    raise GaloisMatchError(f"sigma_{lift} S_0mu is not +-S_0,sigma mu at mu index {j}")
        act = GaloisAction(ell, lift, tuple(perm), tuple(parity) if parity else None)
        self._actions[key] = act
        return act

    def all_actions(self, with_parity: bool = False) -> list[GaloisAction]:
        return [self.action(ell, with_parity) for ell in units(self.n)]


def galois_permutation(ell: int, spec: AlgebraSpec, ctx: GaloisContext | None = None) -> GaloisAction:
    ctx = ctx or GaloisContext(spec)
    return ctx.action(ell, with_parity=True)


# ---------------------------------------------------------------------------
# identities


def sigma_formula_image(mu: Weight, a: int, b: int, literal: bool = False) -> Weight:
    """Predicted sigma_ell mu for ell = (-1)^a + b kbar.

    sigma_{-1} is C and C J C = J^-1, so ell = -(1 - b kbar) gives
    C J^{-b t(mu+rho)} mu = J^{b t(mu+rho)} C mu.  ``literal`` applies
    C^a J^{b t(mu+rho)} instead, which disagrees when a = 1 with the J used here.
    """
    shift = b * shifted_ality(mu)
    if a % 2 and not literal:
        shift = -shift
    out = apply_J(mu, shift)
    return apply_C(out) if a % 2 else out


@dataclass
class SigmaReport:
    checked: list[tuple[int, int, int]] = field(default_factory=list)  # (ell, a, b)
    failures: list[tuple[int, Weight]] = field(default_factory=list)
    literal_failures: list[tuple[int, Weight]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_sigma_formula(spec: AlgebraSpec, ctx: GaloisContext | None = None) -> SigmaReport:
    """Check sigma_ell mu = J^{b t(mu+rho)} C^a mu for every unit ell = (-1)^a + b kbar."""
    ctx = ctx or GaloisContext(spec)
    n = ctx.n
    report = SigmaReport()
    for a in (0, 1):
        for b in range(spec.rbar):
            ell = ((-1) ** a + b * spec.kbar) % n
            if math.gcd(ell, n) != 1:
                continue
            act = ctx.action(ell, with_parity=False)
            report.checked.append((ell, a, b))
            for j, mu in enumerate(spec.weights):
                image = spec.weights[act.permutation[j]]
                if image != sigma_formula_image(mu, a, b):
                    report.failures.append((ell, mu))
                if image != sigma_formula_image(mu, a, b, literal=True):
                    report.literal_failures.append((ell, mu))
    return report


def verify_entry_identity(spec: AlgebraSpec, ctx: GaloisContext | None = None,
                          ells: list[int] | None = None) -> list[tuple[int, Weight, Weight]]:
    """Failures of sigma S_{lam,mu} = eps(mu) S_{lam,sigma mu}, exactly in Q_{4n}."""
    ctx = ctx or GaloisContext(spec)
    failures = []
    weights = spec.weights
    rows = {lam: ctx.table.chi_row(lam) for lam in weights}
    for ell in ells if ells is not None else units(ctx.n):
        act = ctx.action(ell)
        for j, mu in enumerate(weights):
            t = act.permutation[j]
            for lam in weights:
                lhs = (rows[lam][j] * ctx.s_zero[j]).galois(act.lift)
                rhs = rows[lam][t] * ctx.s_zero[t] * act.parity[j]
                if lhs != rhs:
                    failures.append((ell, lam, mu))
    return failures


def homomorphism_failures(spec: AlgebraSpec, ctx: GaloisContext | None = None) -> list[tuple[int, int]]:
    """Pairs (l1, l2) where sigma_l1 sigma_l2 != sigma_{l1 l2} or parities fail to multiply.

    Parities depend on the lift to Q_{4n}, so they are compared with the lift
    of the product taken as the product of the lifts.
    """
    ctx = ctx or GaloisContext(spec)
    n = ctx.n
    bad = []
    us = units(n)
    for l1 in us:
        a1 = ctx.action(l1)
        for l2 in us:
            a2 = ctx.action(l2)
            a12 = ctx.action(l1 * l2 % n)
            perm = tuple(a1.permutation[a2.permutation[j]] for j in range(spec.size))
            if perm != a12.permutation:
                bad.append((l1, l2))
                continue
            lift = a1.lift * a2.lift % (4 * n)
            for j in range(spec.size):
                image = ctx.s_zero[j].galois(lift)
                eps = a2.parity[j] * a1.parity[a2.permutation[j]]
                if image != ctx.s_zero[perm[j]] * eps:
                    bad.append((l1, l2))
                    break
    return bad


def commutes_with_C(spec: AlgebraSpec, ctx: GaloisContext | None = None) -> bool:
    ctx = ctx or GaloisContext(spec)
    for act in ctx.all_actions():
        for j, mu in enumerate(spec.weights):
            if spec.index[apply_C(spec.weights[act.permutation[j]])] != \
                    act.permutation[spec.index[apply_C(mu)]]:
                return False
    return True


# ---------------------------------------------------------------------------
# quantum dimensions and orbits


def quantum_dimension(lam: Weight, spec: AlgebraSpec) -> float:
    """S_{lam,0} / S_{0,0}."""
    vac = spec.vacuum()
    return float((s_entry(lam, vac, spec) / s_entry(vac, vac, spec)).real)


@dataclass
class OrbitEntry:
    ell: int
    image: Weight
    in_orbit: bool
    expected_in_orbit: bool  # ell = +-1 mod kbar
    qdim_ratio: float


@dataclass
class OrbitReport:
    spec: AlgebraSpec
    m: int
    entries: list[OrbitEntry]
    exceptional: bool

    @property
    def violations(self) -> list[OrbitEntry]:
        out = []
        for e in self.entries:
            if e.in_orbit != e.expected_in_orbit:
                out.append(e)
            elif not e.expected_in_orbit and not e.qdim_ratio > 1 + QDIM_MARGIN:
                out.append(e)
        return out

    @property
    def orbit_preserved(self) -> bool:
        """Every image lies in the J-orbit [w^m] and has the same quantum dimension."""
        w = self.spec.fundamental(self.m)
        orbit = j_orbit(w)
        return all(e.image in orbit and abs(e.qdim_ratio - 1) < QDIM_MARGIN for e in self.entries)

    @property
    def ok(self) -> bool:
        # the known exception: the whole Galois orbit of w^m stays inside [w^m]
        if self.exceptional:
            return self.orbit_preserved and bool(self.violations)
        return not self.violations

    def to_record(self) -> dict:
        return {"r": self.spec.r, "k": self.spec.k, "m": self.m, "exceptional": self.exceptional,
                "orbit_preserved": self.orbit_preserved, "ok": self.ok, "violations": [e.ell for e in self.violations],
                "images": {str(e.ell): format_weight(e.image) for e in self.entries},
                "certified": "exact"}


EXCEPTIONS = {(3, 4, 2)}


def orbit_minimality_check(m: int, spec: AlgebraSpec, ctx: GaloisContext | None = None) -> OrbitReport:
    """Galois images of w^m: in the J-orbits of w^m, C w^m exactly when ell = +-1 mod kbar,
    and otherwise of strictly larger quantum dimension."""
    if spec.k <= 2 or spec.r == 1:
        raise ValueError("needs k > 2 and r != 1")
    if not 1 <= m <= min(spec.rbar - 2, spec.k - 2):
        raise ValueError(f"m={m} outside 1..min(r-1, k-2)")
    ctx = ctx or GaloisContext(spec)
    w = spec.fundamental(m)
    orbit = j_orbit(w) | j_orbit(apply_C(w))
    base = quantum_dimension(w, spec)
    entries = []
    for act in ctx.all_actions():
        img = act.image(w, spec)
        expected = act.ell % spec.kbar in (1, spec.kbar - 1)
        entries.append(OrbitEntry(act.ell, img, img in orbit, expected,
                                  quantum_dimension(img, spec) / base))
    return OrbitReport(spec, m, entries, (spec.r, spec.k, m) in EXCEPTIONS)


def stabilizer(lam: Weight, spec: AlgebraSpec, ctx: GaloisContext | None = None) -> list[int]:
    """All units ell mod n whose permutation fixes lam."""
    ctx = ctx or GaloisContext(spec)
    i = spec.index[lam]
    return [act.ell for act in ctx.all_actions() if act.permutation[i] == i]


def expected_w1_stabilizer(spec: AlgebraSpec) -> list[int]:
    n = field_order(spec)
    if spec.r % 4 == 1 and spec.k % 2 == 0:
        return sorted({1, 1 + n // 2})
    return [1]


# ---------------------------------------------------------------------------
# fields


@dataclass
class FieldReport:
    r: int
    k: int
    L_order: int  # n when the stabilizer is trivial; otherwise the conductor of the fixed field
    conductor: int  # minimal m with the same field (Q_n = Q_{n/2} for n = 2 mod 4)
    stabilizer: list[int]
    K_descriptor: str
    K_predicted: str
    K_degree_over_L: int

    @property
    def ok(self) -> bool:
        return self.stabilizer == [1] and self.K_descriptor == self.K_predicted

    @property
    def r_bar_k_bar(self) -> int:
        return (self.r + 1) * (self.k + self.r + 1)

    def to_record(self) -> dict:
        return {"r": self.r, "k": self.k, "L_order": self.L_order, "conductor": self.conductor,
                "stabilizer": self.stabilizer, "K_descriptor": self.K_descriptor,
                "K_predicted": self.K_predicted, "K_degree_over_L": self.K_degree_over_L,
                "certified": "exact"}


def predicted_K(spec: AlgebraSpec) -> str:
    n = field_order(spec)
    if spec.r % 4 != 1 or spec.k % 2 == 0:
        return f"Q_{n}"
    return f"Q_{n}[sqrt2]" if spec.rbar * spec.k % 8 == 2 else f"Q_{n}[sqrt-2]"


def _conductor_of_fixed_field(stab: list[int], n: int) -> int:
    """Smallest m | n such that every ell = 1 mod m lies in the stabilizer."""
    s = set(stab)
    for m in sorted(d for d in range(1, n + 1) if n % d == 0):
        if all(ell in s for ell in units(n) if ell % m == 1 % m):
            return m
    return n


def field_identification(spec: AlgebraSpec, ctx: GaloisContext | None = None) -> FieldReport:
    """Identify L (generated by the chi values) and K (generated by the S entries)."""
    if spec.k <= 2 or spec.r == 1:
        raise ValueError("field identification covers k > 2 and r != 1 only")
    ctx = ctx or GaloisContext(spec)
    n = ctx.n
    stab = [act.ell for act in ctx.all_actions() if act.permutation == tuple(range(spec.size))]
    conductor = _conductor_of_fixed_field(stab, n)
    L_order = n if stab == [1] else conductor
    # K over Q_n: elements of Gal(Q_4n/Q_n) that also fix every S_{0,mu}
    H = [h for h in units(4 * n) if h % n == 1 % n]
    F = [h for h in H if all(s.galois(h) == s for s in ctx.s_zero)]
    degree = len(H) // len(F)
    if degree == 1:
        desc = f"Q_{n}"
    else:
        desc = f"Q_{n}[?]"
        for name, c in (("sqrt2", sqrt_integer(2)), ("sqrt-2", sqrt_integer(2) * root_of_unity(4))):
            fixed_by_F = all(c.galois(h) == c for h in F)
            in_Qn = all(c.galois(h) == c for h in H)
            if degree == 2 and fixed_by_F and not in_Qn:
                desc = f"Q_{n}[{name}]"
                break
    return FieldReport(spec.r, spec.k, L_order, conductor, stab, desc, predicted_K(spec), degree)
