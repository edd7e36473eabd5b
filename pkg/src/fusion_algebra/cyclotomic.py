"""Exact arithmetic in cyclotomic fields Q_n = Q(xi_n), xi_n = exp(2 pi i / n).

An element is stored in canonical form: integer coefficients on the power
basis 1, xi, ..., xi^(phi(n)-1), reduced modulo the n-th cyclotomic polynomial,
over a single positive common denominator.  Two elements of the same order are
equal exactly when their canonical forms are equal, so the zero test is a
coefficient check.

Intermediate work happens in the group ring Z[C_n] (length-n coefficient
vectors indexed by exponent), where multiplication is cyclic convolution and
Galois maps permute exponents.  Reduction to the power basis is a matrix
product with a cached reduction table.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

_INT64_SAFE = 1 << 62
# products feed into short sums (Laplace expansion), so keep headroom
_CONV_SAFE = 1 << 56
_SMALL = 1 << 28


def euler_phi(n: int) -> int:
    result = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # integer polynomials, low degree first; den monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


_cyclo_polys: dict[int, list[int]] = {}


def cyclotomic_polynomial(n: int) -> list[int]:
    """Coefficients of Phi_n, low degree first."""
    if n in _cyclo_polys:
        return _cyclo_polys[n]
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n):
        if d < n:
            poly = _poly_divexact(poly, cyclotomic_polynomial(d))
    _cyclo_polys[n] = poly
    return poly


class _Reduction:
    """Row j holds the power-basis coefficients of xi_n^j."""

    def __init__(self, n: int):
        self.n = n
        self.phi = euler_phi(n)
        poly = cyclotomic_polynomial(n)
        deg = self.phi
        rows = []
        cur = [0] * deg
        cur[0] = 1
        for _ in range(n):
            rows.append(list(cur))
            # multiply by x, reduce x^deg = -sum poly[i] x^i
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for i in range(deg):
                    cur[i] -= top * poly[i]
        self.table_obj = np.array(rows, dtype=object).reshape(n, deg)
        self.max_abs = max((abs(x) for row in rows for x in row), default=1)
        self.table_i64 = np.array(rows, dtype=np.int64).reshape(n, deg)

    def reduce(self, vec: np.ndarray) -> tuple[int, ...]:
        """Power-basis coefficients of sum_j vec[j] xi^j (exact)."""
        if vec.dtype != object:
            bound = int(np.abs(vec).sum()) * self.max_abs
            if bound < _INT64_SAFE:
                return tuple(int(x) for x in vec.astype(np.int64) @ self.table_i64)
            vec = vec.astype(object)
        else:
            bound = sum(abs(int(x)) for x in vec) * self.max_abs
            if bound < _INT64_SAFE:
                return tuple(int(x) for x in vec.astype(np.int64) @ self.table_i64)
        return tuple(int(x) for x in vec.dot(self.table_obj))


_reductions: dict[int, _Reduction] = {}
_reductions_lock = threading.Lock()


def reduction(n: int) -> _Reduction:
    red = _reductions.get(n)
    if red is None:
        with _reductions_lock:
            red = _reductions.get(n)
            if red is None:
                red = _Reduction(n)
                _reductions[n] = red
    return red


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product in the group ring Z[C_n] (both vectors of length n)."""
    n = len(a)
    if a.dtype != object and b.dtype != object:
        bound = int(np.abs(a).sum()) * int(np.abs(b).sum())
        if bound < _CONV_SAFE:
            full = np.convolve(a.astype(np.int64), b.astype(np.int64))
            out = full[:n].copy()
            out[: len(full) - n] += full[n:]
            return out
    full = np.convolve(a.astype(object), b.astype(object))
    out = full[:n].copy()
    out[: len(full) - n] += full[n:]
    return out


def _normalize(coeffs: Sequence[int], den: int) -> tuple[tuple[int, ...], int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        coeffs = [-c for c in coeffs]
        den = -den
    g = reduce(math.gcd, coeffs, den)
    if g > 1:
        coeffs = [c // g for c in coeffs]
        den //= g
    return tuple(coeffs), den


@dataclass(frozen=True)
class CycNumber:
    """An element of Q_order in canonical form."""

    order: int
    coeffs: tuple[int, ...]
    den: int = 1

    def __post_init__(self) -> None:
        if len(self.coeffs) != euler_phi(self.order):
            raise ValueError(
                f"order {self.order} needs {euler_phi(self.order)} coefficients, got {len(self.coeffs)}"
            )

    # construction ----------------------------------------------------------

    @classmethod
    def from_group_ring(cls, n: int, vec: Iterable[int] | np.ndarray, den: int = 1) -> CycNumber:
        arr = np.asarray(vec)
        if arr.dtype.kind not in "iuO":
            raise TypeError("group-ring coefficients must be integers")
        if len(arr) != n:
            raise ValueError(f"group-ring vector for order {n} must have length {n}")
        coeffs, den = _normalize(reduction(n).reduce(arr), den)
        return cls(n, coeffs, den)

    @classmethod
    def from_exponents(cls, n: int, exponents: Iterable[int]) -> CycNumber:
        """sum of xi_n^e over the given exponents (with multiplicity)."""
        vec = np.zeros(n, dtype=np.int64)
        for e in exponents:
            vec[e % n] += 1
        return cls.from_group_ring(n, vec)

    @classmethod
    def rational(cls, value: int | Fraction, n: int = 1) -> CycNumber:
        value = Fraction(value)
        coeffs = [0] * euler_phi(n)
        coeffs[0] = value.numerator
        c, d = _normalize(coeffs, value.denominator)
        return cls(n, c, d)

    @classmethod
    def zero(cls, n: int = 1) -> CycNumber:
        return cls(n, (0,) * euler_phi(n), 1)

    @classmethod
    def one(cls, n: int = 1) -> CycNumber:
        return cls.rational(1, n)

    # views -----------------------------------------------------------------

    def group_ring(self) -> np.ndarray:
        """Length-order vector over the common denominator."""
        small = all(-_SMALL < c < _SMALL for c in self.coeffs)
        vec = np.zeros(self.order, dtype=np.int64 if small else object)
        vec[: len(self.coeffs)] = self.coeffs
        return vec

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_complex(self) -> complex:
        """Double-precision value.

        Each term is evaluated with cmath; the absolute error is bounded by
        about 4 * 2^-52 * sum|c_j| / den, far below 1e-10 for the orders and
        coefficient sizes used here.
        """
        n = self.order
        total = 0j
        for j, c in enumerate(self.coeffs):
            if c:
                total += c * cmath.exp(2j * math.pi * j / n)
        return total / self.den

    def error_bound(self) -> float:
        return 4.0 * 2.0 ** -52 * (sum(abs(c) for c in self.coeffs) + 1) / self.den

    # field structure -------------------------------------------------------

    def embed(self, m: int) -> CycNumber:
        """The same value viewed in Q_m (order must divide m)."""
        if m == self.order:
            return self
        if m % self.order:
            raise ValueError(f"cannot embed Q_{self.order} into Q_{m}")
        step = m // self.order
        vec = np.zeros(m, dtype=object)
        for j, c in enumerate(self.coeffs):
            vec[j * step] = c
        return CycNumber.from_group_ring(m, vec, self.den)

    def _pair(self, other: CycNumber | int | Fraction) -> tuple[CycNumber, CycNumber]:
        if not isinstance(other, CycNumber):
            other = CycNumber.rational(other, self.order)
        m = self.order * other.order // math.gcd(self.order, other.order)
        return self.embed(m), other.embed(m)

    def __add__(self, other: CycNumber | int | Fraction) -> CycNumber:
        a, b = self._pair(other)
        coeffs = [x * b.den + y * a.den for x, y in zip(a.coeffs, b.coeffs)]
        c, d = _normalize(coeffs, a.den * b.den)
        return CycNumber(a.order, c, d)

    __radd__ = __add__

    def __neg__(self) -> CycNumber:
        return CycNumber(self.order, tuple(-c for c in self.coeffs), self.den)

    def __sub__(self, other: CycNumber | int | Fraction) -> CycNumber:
        if not isinstance(other, CycNumber):
            other = CycNumber.rational(other, self.order)
        return self + (-other)

    def __rsub__(self, other: int | Fraction) -> CycNumber:
        return (-self) + other

    def __mul__(self, other: CycNumber | int | Fraction) -> CycNumber:
        if not isinstance(other, CycNumber):
            q = Fraction(other)
            c, d = _normalize([x * q.numerator for x in self.coeffs], self.den * q.denominator)
            return CycNumber(self.order, c, d)
        a, b = self._pair(other)
        prod = cyclic_convolve(a.group_ring(), b.group_ring())
        return CycNumber.from_group_ring(a.order, prod, a.den * b.den)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> CycNumber:
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = CycNumber.one(self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def galois(self, ell: int) -> CycNumber:
        """sigma_ell: xi_n -> xi_n^ell."""
        n = self.order
        if math.gcd(ell, n) != 1:
            raise ValueError(f"ell={ell} is not coprime to the order {n}")
        ell %= n
        if ell == 1:
            return self
        vec = np.zeros(n, dtype=object)
        for j, c in enumerate(self.coeffs):
            if c:
                vec[(j * ell) % n] += c
        return CycNumber.from_group_ring(n, vec, self.den)

    def conjugate(self) -> CycNumber:
        return self.galois(-1)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycNumber.rational(other, self.order)
        if not isinstance(other, CycNumber):
            return NotImplemented
        if self.order == other.order:
            return self.coeffs == other.coeffs and self.den == other.den
        return (self - other).is_zero()

    def __hash__(self) -> int:
        # hash the minimal-order form so that equal values hash equally
        c = self.canonicalize()
        return hash((c.order, c.coeffs, c.den))

    def key(self) -> tuple[int, tuple[int, ...], int]:
        """Structural key, valid for comparisons at a fixed order."""
        return (self.order, self.coeffs, self.den)

    def canonicalize(self) -> CycNumber:
        """Rewrite in the smallest Q_m containing the value."""
        n = self.order
        if self.is_rational():
            return CycNumber(1, (self.coeffs[0],), self.den)
        units = [ell for ell in range(1, n) if math.gcd(ell, n) == 1]
        for m in divisors(n):
            if m == n:
                return self
            if m % 4 == 2:
                continue
            if all(self.galois(ell) == self for ell in units if ell % m == 1 % m):
                return self._descend(m)
        return self

    def _descend(self, m: int) -> CycNumber:
        # solve embed(x) = self for x in Q_m; the system is consistent by the fixed-field test
        phi_m = euler_phi(m)
        cols = [CycNumber(m, tuple(1 if i == j else 0 for i in range(phi_m))).embed(self.order).coeffs
                for j in range(phi_m)]
        rows = len(self.coeffs)
        aug = [[Fraction(cols[j][i]) for j in range(phi_m)] + [Fraction(self.coeffs[i])]
               for i in range(rows)]
        piv_cols = []
        row = 0
        for col in range(phi_m):
            pr = next((i for i in range(row, rows) if aug[i][col] != 0), None)
            if pr is None:
                continue
            aug[row], aug[pr] = aug[pr], aug[row]
            pv = aug[row][col]
            aug[row] = [x / pv for x in aug[row]]
            for i in range(rows):
                if i != row and aug[i][col] != 0:
                    f = aug[i][col]
                    aug[i] = [x - f * y for x, y in zip(aug[i], aug[row])]
            piv_cols.append(col)
            row += 1
        sol = [Fraction(0)] * phi_m
        for i, col in enumerate(piv_cols):
            sol[col] = aug[i][-1]
        den = self.den * reduce(lambda a, b: a * b // math.gcd(a, b), (s.denominator for s in sol), 1)
        coeffs = [int(s * den) for s in sol]
        c, d = _normalize(coeffs, den)
        out = CycNumber(m, c, d)
        if out.embed(n := self.order) != self:
            raise ArithmeticError(f"descent from Q_{n} to Q_{m} failed")
        return out

    # serialization ---------------------------------------------------------

    def to_record(self) -> dict:
        nums = []
        dens = []
        for c in self.coeffs:
            f = Fraction(c, self.den)
            nums.append(f.numerator)
            dens.append(f.denominator)
        return {"order": self.order, "numerator": nums, "denominator": dens}

    @classmethod
    def from_record(cls, rec: dict) -> CycNumber:
        n = int(rec["order"])
        fr = [Fraction(int(a), int(b)) for a, b in zip(rec["numerator"], rec["denominator"])]
        if len(fr) not in (n, euler_phi(n)):
            raise ValueError(f"record for order {n} has {len(fr)} coefficients")
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        vec = np.zeros(n, dtype=object)
        for j, f in enumerate(fr):
            vec[j] = int(f * den)
        return cls.from_group_ring(n, vec, den)

    def __repr__(self) -> str:
        terms = [f"{c}*z^{j}" for j, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms) if terms else "0"
        tail = f" / {self.den}" if self.den != 1 else ""
        return f"CycNumber[Q_{self.order}]({body}{tail})"


def root_of_unity(n: int, e: int = 1) -> CycNumber:
    if n < 1:
        raise ValueError("order must be positive")
    return CycNumber.from_exponents(n, [e])


@dataclass(frozen=True)
class GaloisElement:
    """sigma_ell in Gal(Q_n / Q)."""

    order: int
    ell: int

    def __post_init__(self) -> None:
        if math.gcd(self.ell, self.order) != 1:
            raise ValueError(f"ell={self.ell} is not coprime to {self.order}")
        object.__setattr__(self, "ell", self.ell % self.order)

    def __call__(self, a: CycNumber) -> CycNumber:
        if self.order % a.order:
            raise ValueError(f"sigma on Q_{self.order} cannot act on Q_{a.order}")
        return a.embed(self.order).galois(self.ell)

    def compose(self, other: GaloisElement) -> GaloisElement:
        if other.order != self.order:
            raise ValueError("orders differ")
        return GaloisElement(self.order, self.ell * other.ell)


def units(n: int) -> list[int]:
    return [ell for ell in range(1, n + 1) if math.gcd(ell, n) == 1] if n > 1 else [1]


def lift_unit(ell: int, n: int, m: int) -> int:
    """A unit mod m (n | m) congruent to ell mod n."""
    if m % n:
        raise ValueError(f"{n} does not divide {m}")
    ell %= n
    for t in range(m // n):
        cand = ell + t * n
        if math.gcd(cand, m) == 1:
            return cand
    raise ValueError(f"{ell} is not a unit mod {n}")


def sqrt_integer(n: int) -> CycNumber:
    """The positive square root of a positive integer, as an element of Q_{4n}.

    Odd primes use quadratic Gauss sums evaluated as explicit root sums;
    sqrt(2) = xi_8 + xi_8^-1.
    """
    if n < 1:
        raise ValueError("sqrt_integer needs a positive integer")
    square = 1
    free = 1
    m = n
    for p in prime_factors(n):
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        square *= p ** (e // 2)
        if e % 2:
            free *= p
    result = CycNumber.rational(square)
    for p in prime_factors(free):
        result = result * _sqrt_prime(p)
    return result


def _sqrt_prime(p: int) -> CycNumber:
    if p == 2:
        return root_of_unity(8, 1) + root_of_unity(8, -1)
    vec = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        vec[a] = 1 if pow(a, (p - 1) // 2, p) == 1 else -1
    gauss = CycNumber.from_group_ring(p, vec)
    if p % 4 == 1:
        return gauss
    # g^2 = -p, so sqrt(p) = -i g
    return -(root_of_unity(4, 1) * gauss)
