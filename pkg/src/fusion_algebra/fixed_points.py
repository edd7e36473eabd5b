"""Fusion eigenvalues at simple-current fixed points.

For d dividing r+1 with q = (r+1)/d dividing k, a weight lambda can only have
nonzero eigenvalues at J^d-fixed points when, for each i = 1..q, exactly d of
its partition labels are congruent to -i mod q.  For such lambda the value at
a fixed point phi factors as a signed product of eigenvalues of A_{d-1} at
level kd/(r+1), evaluated at the truncated point phi' = (phi_0..phi_{d-1}):

    chi_lambda(phi) = sgn(pi) * zeta * (-1)^(t(lambda)(1 - d/(r+1)))
                      * prod_i chi'_{lambda'(i)}(phi')

Here zeta is a root of unity.  The literal closed form for zeta that one
might write down from the derivation does not hold under the conventions
used in this package.  The verifier therefore solves for zeta exactly at each
point and checks that it does not depend on phi.  In every case examined,
zeta comes out as 1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from .characters import (
    CharacterTable,
    PointData,
    chi_from_schur,
    degree,
    is_zero_chi,
    power_sum,
    s_zero,
    schur_group_ring,
)
from .cyclotomic import CycNumber, root_of_unity
from .weight_lattice import (
    AlgebraSpec,
    Weight,
    apply_J,
    ality,
    check_fixed_divisor,
    fixed_points,
    partition_labels,
    shifted_ality,
    truncate_fixed_point,
)


def permutation_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation of 0..n-1 given as a list of images."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class NZDecomposition:
    d: int
    classes: tuple[tuple[int, ...], ...]
    pi_sign: int
    factors: tuple[Weight, ...]


@dataclass(frozen=True)
class NotMember:
    """Residue class i (1-based) holds ``count`` partition labels instead of d."""

    d: int
    residue_class: int
    count: int


def nz_test(lam: Weight, d: int, spec: AlgebraSpec) -> NZDecomposition | NotMember:
    """Decide membership of lambda in NZ(d) and build its factor weights."""
    check_fixed_divisor(spec, d)
    rbar = spec.rbar
    q = rbar // d
    labels = partition_labels(lam)
    classes = []
    for i in range(1, q + 1):
        idx = tuple(ell for ell in range(1, rbar + 1) if (labels[ell - 1] + i) % q == 0)
        if len(idx) != d:
            return NotMember(d, i, len(idx))
        classes.append(idx)
    kp = spec.k // q
    factors = []
    for idx in classes:
        tail = tuple((labels[idx[j] - 1] - labels[idx[j + 1] - 1]) // q - 1 for j in range(d - 1))
        factors.append((kp - sum(tail),) + tail)
    perm = [0] * rbar
    for i in range(1, q + 1):
        for j in range(1, d + 1):
            perm[i + (j - 1) * q - 1] = classes[i - 1][j - 1] - 1
    return NZDecomposition(d, tuple(classes), permutation_sign(perm), tuple(factors))


def is_nz(lam: Weight, d: int, spec: AlgebraSpec) -> bool:
    return isinstance(nz_test(lam, d, spec), NZDecomposition)


def canonical_fixed_point(spec: AlgebraSpec, d: int) -> Weight:
    """(kd/(r+1)) * sum_i w^(di): the J^d-fixed point whose truncation is the vacuum."""
    check_fixed_divisor(spec, d)
    level = spec.k * d // spec.rbar
    return tuple(level if j % d == 0 else 0 for j in range(spec.rbar))


def small_spec(spec: AlgebraSpec, d: int) -> AlgebraSpec | None:
    """A_{d-1} at level kd/(r+1); None for d = 1 (the trivial algebra)."""
    if d == 1:
        return None
    return AlgebraSpec(d - 1, spec.k * d // spec.rbar)


def _prefactor_sign(lam: Weight, dec: NZDecomposition, spec: AlgebraSpec) -> int:
    # (-1)^(t(lambda)(1 - d/rbar)); t(lambda) is a multiple of q for members
    q = spec.rbar // dec.d
    t = degree(lam)
    expo = (t // q) * (q - 1) if t % q == 0 else None
    if expo is None:
        raise ValueError("members of NZ(d) have ality divisible by (r+1)/d")
    return -1 if expo % 2 else 1


def factor_product(dec: NZDecomposition, phi: Weight, spec: AlgebraSpec) -> CycNumber:
    """prod_i chi'_{lambda'(i)}(phi') (1 for d = 1)."""
    sub = small_spec(spec, dec.d)
    if sub is None:
        return CycNumber.one()
    phip = truncate_fixed_point(phi, dec.d)
    point = PointData(sub, phip)
    out = CycNumber.one(sub.rbar * sub.kbar)
    for f in dec.factors:
        out = out * chi_from_schur(degree(f), point, schur_group_ring(f, point))
    return out


def literal_phase(dec: NZDecomposition, lam: Weight, phi: Weight, spec: AlgebraSpec) -> CycNumber:
    """The closed-form phase read as exp(2 pi i t'(phi'+rho') S / kbar'),
    S = sum_i (lambda(l_d^(i)) + i - q), with lambda(.) the partition labels.

    Kept for comparison only; it is not the phase that makes the identity hold.
    """
    d = dec.d
    q = spec.rbar // d
    kbarp = spec.kbar * d // spec.rbar
    labels = partition_labels(lam)
    total = sum(labels[idx[-1] - 1] + i - q for i, idx in enumerate(dec.classes, start=1))
    tp = shifted_ality(truncate_fixed_point(phi, d))
    return root_of_unity(kbarp, tp * total)


def _solve_root_of_unity(lhs: CycNumber, rhs: CycNumber) -> CycNumber | None:
    """Exact zeta with lhs == zeta * rhs, zeta a root of unity, or None."""
    if rhs.is_zero():
        return CycNumber.one() if lhs.is_zero() else None
    m = lhs.order * rhs.order // math.gcd(lhs.order, rhs.order)
    m = 2 * m
    ratio = lhs.to_complex() / rhs.to_complex()
    if abs(abs(ratio) - 1.0) > 1e-6:
        return None
    guess = round(cmath.phase(ratio) * m / (2 * math.pi)) % m
    for e in (guess, guess - 1, guess + 1):
        zeta = root_of_unity(m, e)
        if lhs == zeta * rhs:
            return zeta.canonicalize()
    return None


@dataclass
class FactorizationRecord:
    lam: Weight
    phi: Weight
    d: int
    member: bool
    lhs_zero: bool
    exact_ok: bool
    phase: CycNumber | None = None
    literal_phase_ok: bool | None = None
    float_s_ok: bool | None = None
    float_s_residual: float | None = None
    detail: str = ""


class _Tables:
    """Character tables for an algebra and its fixed-point factor algebras."""

    def __init__(self, spec: AlgebraSpec):
        self.main = CharacterTable(spec)
        self.subs: dict[int, CharacterTable] = {}

    def sub(self, spec: AlgebraSpec, d: int) -> CharacterTable | None:
        small = small_spec(spec, d)
        if small is None:
            return None
        if d not in self.subs:
            self.subs[d] = CharacterTable(small)
        return self.subs[d]


def factorization_verify(lam: Weight, phi: Weight, d: int, spec: AlgebraSpec,
                         check_float: bool = True, tables: _Tables | None = None
                         ) -> FactorizationRecord:
    """Check the factorization of chi_lambda(phi) exactly, plus its S-matrix form in floats.

    The float check uses the independently assembled float S matrices of both
    algebras, not the exact values.
    """
    check_fixed_divisor(spec, d)
    if apply_J(phi, d) != phi:
        raise ValueError(f"{phi} is not fixed by J^{d}")
    tables = tables or _Tables(spec)
    lhs = tables.main.chi(lam, phi)
    dec = nz_test(lam, d, spec)
    if isinstance(dec, NotMember):
        ok = lhs.is_zero()
        return FactorizationRecord(lam, phi, d, False, lhs.is_zero(), ok,
                                   detail="" if ok else "nonzero value outside NZ(d)")
    sub = tables.sub(spec, d)
    if sub is None:
        prod = CycNumber.one()
    else:
        phip = truncate_fixed_point(phi, d)
        prod = CycNumber.one(sub.spec.rbar * sub.spec.kbar)
        for f in dec.factors:
            prod = prod * sub.chi(f, phip)
    rhs = prod * (dec.pi_sign * _prefactor_sign(lam, dec, spec))
    zeta = _solve_root_of_unity(lhs, rhs)
    rec = FactorizationRecord(lam, phi, d, True, lhs.is_zero(), zeta is not None, phase=zeta)
    if zeta is None:
        rec.detail = f"lhs={lhs!r} rhs={rhs!r}"
        return rec
    rec.literal_phase_ok = lhs == literal_phase(dec, lam, phi, spec) * rhs
    if check_float:
        resid = s_factorization_residual(lam, phi, dec, zeta, spec, tables)
        rec.float_s_residual = resid
        rec.float_s_ok = resid < 1e-9
    return rec


def s_factorization_residual(lam: Weight, phi: Weight, dec: NZDecomposition, zeta: CycNumber,
                             spec: AlgebraSpec, tables: _Tables | None = None) -> float:
    """|S_{lambda,phi} - sign*zeta*(rbar/kbar)^((q-1)/2) prod S'_{lambda'(i),phi'}| in floats."""
    tables = tables or _Tables(spec)
    d = dec.d
    q = spec.rbar // d
    main = tables.main
    lhs = main.S[main.index[lam], main.index[phi]]
    pref = dec.pi_sign * _prefactor_sign(lam, dec, spec) * zeta.to_complex()
    pref *= (spec.rbar / spec.kbar) ** ((q - 1) / 2)
    sub = tables.sub(spec, d)
    if sub is not None:
        col = sub.index[truncate_fixed_point(phi, d)]
        for f in dec.factors:
            pref *= sub.S[sub.index[f], col]
    return abs(lhs - pref)


def s_zero_factorization_residual(phi: Weight, d: int, spec: AlgebraSpec) -> float:
    """|S_{0,phi} - (rbar/kbar)^((q-1)/2) (S'_{0',phi'})^q|."""
    q = spec.rbar // d
    sub = small_spec(spec, d)
    s0p = 1.0 if sub is None else s_zero(truncate_fixed_point(phi, d), sub)
    return abs(s_zero(phi, spec) - (spec.rbar / spec.kbar) ** ((q - 1) / 2) * s0p ** q)


def power_sum_factorization_holds(phi: Weight, d: int, ell: int, spec: AlgebraSpec) -> bool:
    """P_ell[phi] = q * P'_{ell/q}[phi'] if q | ell, else 0 (exact)."""
    q = spec.rbar // d
    lhs = power_sum(ell, phi, spec)
    if ell % q:
        return lhs.is_zero()
    sub = small_spec(spec, d)
    if sub is None:
        rhs = CycNumber.rational(q)
    else:
        rhs = power_sum(ell // q, truncate_fixed_point(phi, d), sub) * q
    return lhs == rhs


@dataclass
class LemmaReport:
    spec: AlgebraSpec
    d: int
    checked: int = 0
    failures: list[FactorizationRecord] = field(default_factory=list)
    non_constant_phase: list[Weight] = field(default_factory=list)
    phases: dict[Weight, CycNumber] = field(default_factory=dict)
    literal_phase_failures: int = 0
    float_failures: int = 0
    max_float_residual: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures and not self.non_constant_phase and self.float_failures == 0


def verify_dichotomy(spec: AlgebraSpec, d: int, check_float: bool = True) -> LemmaReport:
    """Run the factorization check for every lambda and every J^d-fixed point."""
    tables = _Tables(spec)
    report = LemmaReport(spec, d)
    fps = fixed_points(spec, d)
    for lam in spec.weights:
        phase_seen: CycNumber | None = None
        for phi in fps:
            rec = factorization_verify(lam, phi, d, spec, check_float=check_float, tables=tables)
            report.checked += 1
            if not rec.exact_ok:
                report.failures.append(rec)
                continue
            if rec.member:
                if rec.literal_phase_ok is False:
                    report.literal_phase_failures += 1
                if rec.float_s_ok is False:
                    report.float_failures += 1
                if rec.float_s_residual is not None:
                    report.max_float_residual = max(report.max_float_residual, rec.float_s_residual)
                if rec.lhs_zero:
                    continue
                if phase_seen is None:
                    phase_seen = rec.phase
                elif rec.phase != phase_seen:
                    report.non_constant_phase.append(lam)
        if phase_seen is not None:
            report.phases[lam] = phase_seen
    return report


# ---------------------------------------------------------------------------
# hooks a*w^1 + w^b


@dataclass(frozen=True)
class HookPrediction:
    a: int
    b: int
    c: int
    a_prime: int
    a_second: int
    factor: Weight | None  # None when the factor eigenvalue is identically 0
    sign: int
    twisted: bool  # b > rbar - q, where a phase correction is claimed


def hook_prediction(a: int, b: int, spec: AlgebraSpec, d: int) -> HookPrediction | None:
    """Predicted factor weight and sign for the hook a*w^1 + w^b at J^d-fixed points.

    Returns None when (r+1)/d does not divide a+b (the hook is then outside NZ(d)).
    The factor is the A_{d-1} weight (a'-1) w'^1 + w'^(c-a'+1); a label in
    slot d adds a full column and is dropped, one beyond slot d kills it.
    """
    check_fixed_divisor(spec, d)
    q = spec.rbar // d
    if (a + b) % q:
        return None
    c = (a + b) * d // spec.rbar
    a_second = next(x for x in range(1, q + 1) if (a + x) % q == 0)
    a_prime = (a + a_second) // q
    kp = spec.k // q
    top = c - a_prime + 1
    sign = -1 if (a + b + c + (a_second + 1) * (c + a_prime + 1)) % 2 else 1
    factor: Weight | None
    if d == 1:
        factor = (kp,)
    elif top > d:
        factor = None
    else:
        labels = [0] * d
        labels[1] += a_prime - 1
        if 0 < top < d:
            labels[top] += 1
        if sum(labels[1:]) > kp:
            raise ValueError(f"hook factor {labels} exceeds level {kp}")
        labels[0] = kp - sum(labels[1:])
        factor = tuple(labels)
    return HookPrediction(a, b, c, a_prime, a_second, factor, sign, b > spec.rbar - q)


@dataclass
class HookReport:
    hooks: int = 0
    factor_ok: int = 0
    sign_literal_ok: int = 0
    sign_recovered: dict[tuple[int, int], int] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)


def verify_hooks(spec: AlgebraSpec, d: int) -> HookReport:
    """Check that hooks act like hooks of A_{d-1} at fixed points.

    For every hook in NZ(d), the ratio chi_hook(phi) / chi'_factor(phi')
    must be a single sign, the same at every fixed point.
    """
    report = HookReport()
    tables = _Tables(spec)
    sub = tables.sub(spec, d)
    fps = fixed_points(spec, d)
    for b in range(1, spec.rbar):
        for a in range(0, spec.k):
            pred = hook_prediction(a, b, spec, d)
            if pred is None:
                continue
            lam = list(spec.fundamental(b))
            lam[1] += a
            lam[0] -= a
            lam = tuple(lam)
            report.hooks += 1
            signs = set()
            ok = True
            for phi in fps:
                lhs = tables.main.chi(lam, phi)
                if pred.factor is None:
                    rhs = CycNumber.zero()
                elif sub is None:
                    rhs = CycNumber.one()
                else:
                    rhs = sub.chi(pred.factor, truncate_fixed_point(phi, d))
                if rhs.is_zero() or lhs.is_zero():
                    if lhs.is_zero() != rhs.is_zero():
                        ok = False
                    continue
                if lhs == rhs:
                    signs.add(1)
                elif lhs == -rhs:
                    signs.add(-1)
                else:
                    ok = False
                    continue
            if not ok or len(signs) > 1:
                report.failures.append(f"hook a={a}, b={b}: signs {sorted(signs)}")
                continue
            report.factor_ok += 1
            sign = signs.pop() if signs else 1
            report.sign_recovered[(a, b)] = sign
            if sign == pred.sign:
                report.sign_literal_ok += 1
    return report


# ---------------------------------------------------------------------------
# counting


@dataclass
class Census:
    r: int
    k: int
    d: int
    nz: int
    ality_pass: int
    total: int
    per_fixed_point: list[dict] = field(default_factory=list)
    vanish_everywhere_despite_ality: int | None = None

    def to_record(self) -> dict:
        rec = {"r": self.r, "k": self.k, "d": self.d, "nz": self.nz,
               "ality_pass": self.ality_pass, "total": self.total,
               "per_fixed_point": self.per_fixed_point}
        if self.vanish_everywhere_despite_ality is not None:
            rec["vanish_everywhere_despite_ality"] = self.vanish_everywhere_despite_ality
        return rec


def nz_census(spec: AlgebraSpec, d: int, per_fixed_point: bool = True,
              points: Sequence[Weight] | None = None) -> Census:
    """Counts of NZ(d), of weights with ality divisible by (r+1)/d, and of P_+.

    With per_fixed_point, also counts, for each J^d-fixed point, the weights
    with nonzero eigenvalue there.  Every weight gets an exact zero test.
    """
    check_fixed_divisor(spec, d)
    q = spec.rbar // d
    weights = spec.weights
    nz = sum(1 for w in weights if is_nz(w, d, spec))
    ality_pass = sum(1 for w in weights if ality(w) % q == 0)
    census = Census(spec.r, spec.k, d, nz, ality_pass, len(weights))
    if per_fixed_point:
        fps = list(points) if points is not None else fixed_points(spec, d)
        nonzero_somewhere: set[Weight] = set()
        for phi in fps:
            point = PointData(spec, phi)
            count = 0
            for lam in weights:
                if not is_zero_chi(lam, point):
                    count += 1
                    nonzero_somewhere.add(lam)
            census.per_fixed_point.append({"phi": list(phi), "nonzero_count": count})
        if points is None:
            census.vanish_everywhere_despite_ality = ality_pass - len(nonzero_somewhere)
    return census
