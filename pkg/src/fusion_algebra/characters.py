"""Fusion eigenvalues chi_lambda(mu) via Schur polynomials at roots of unity.

For mu at level k, put kbar = k + r + 1 and x_i = xi_kbar^(-mu(i)) where mu(i)
are the partition labels.  Then

    chi_lambda(mu) = xi_{rbar*kbar}^(t(lambda) * t(mu+rho)) * s_lambda(x_1, ..., x_rbar)

with t(lambda) = sum j*lambda_j taken as an integer.  The Schur value is
computed exactly in the group ring Z[C_kbar]: every x_i is a group element,
so e_m(x) and h_m(x) are integer vectors and a Jacobi-Trudi determinant over
them is an integer vector too.  Reducing modulo Phi_kbar gives a canonical
field element.

The labels mu(i) and the complementary residues Y = Z/kbar minus {mu(i)}
satisfy prod_{X}(1 + x t) * prod_{Y}(1 + y t) = 1 - (-t)^kbar, which gives
h_m(X) = (-1)^m e_m(Y) and e_m(X) = (-1)^m h_m(Y) for m < kbar.  Working
with the smaller of the two sets keeps every evaluation cheap in either the
large-rank or the large-level regime.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cyclotomic import CycNumber, cyclic_convolve, root_of_unity
from .weight_lattice import (
    AlgebraSpec,
    Weight,
    box_count,
    partition_labels,
    shifted_ality,
    tau_dual,
    young_rows,
)

CACHE_FORMAT_VERSION = 1
CACHE_ENV = "FUSION_CACHE_DIR"
DEFAULT_CACHE_DIR = ".fusion-cache"

UNITARITY_TOL = 1e-8


def degree(lam: Weight) -> int:
    """t(lambda) as an integer: the number of boxes of the Young diagram."""
    return sum(j * x for j, x in enumerate(lam))


def conjugate_partition(rows: Sequence[int]) -> list[int]:
    top = rows[0] if rows else 0
    return [sum(1 for p in rows if p >= c) for c in range(1, top + 1)]


# ---------------------------------------------------------------------------
# group-ring symmetric functions


def _gr_zero(n: int) -> np.ndarray:
    return np.zeros(n, dtype=np.int64)


def _gr_delta(n: int, e: int = 0) -> np.ndarray:
    v = _gr_zero(n)
    v[e % n] = 1
    return v


def _gr_shift(v: np.ndarray, e: int) -> np.ndarray:
    """Multiply by the group element g^e."""
    return np.roll(v, e % len(v))


def _elementary_of(exponents: Sequence[int], n: int, upto: int) -> list[np.ndarray]:
    """e_0..e_upto of the group elements g^a, a in exponents."""
    upto = min(upto, len(exponents))
    E = np.zeros((upto + 1, n), dtype=np.int64)
    E[0, 0] = 1
    for a in exponents:
        E[1:] = E[1:] + np.roll(E[:-1], a % n, axis=1)
    return [E[m] for m in range(upto + 1)]


def _complete_from_elementary(E: list[np.ndarray], n: int, upto: int) -> list[np.ndarray]:
    """h_0..h_upto from e_0..e_s of an s-element set: h_m = sum_j (-1)^(j-1) e_j h_(m-j)."""
    s = len(E) - 1
    H = [_gr_delta(n)]
    for m in range(1, upto + 1):
        acc = _gr_zero(n)
        for j in range(1, min(m, s) + 1):
            term = cyclic_convolve(E[j], H[m - j])
            acc = acc + term if j % 2 == 1 else acc - term
        H.append(acc)
    return H


def _pad(seq: list[np.ndarray], n: int, upto: int) -> list[np.ndarray]:
    return seq + [_gr_zero(n) for _ in range(upto + 1 - len(seq))]


@dataclass
class PointData:
    """Per-mu data: partition labels, exponents of x_i, and e/h group-ring vectors."""

    spec: AlgebraSpec
    mu: Weight
    labels: tuple[int, ...] = field(init=False)
    twist: int = field(init=False)
    _e: list[np.ndarray] | None = field(default=None, init=False, repr=False)
    _h: list[np.ndarray] | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self.labels = partition_labels(self.mu)
        self.twist = shifted_ality(self.mu)

    @property
    def kbar(self) -> int:
        return self.spec.kbar

    def x_exponents(self) -> list[int]:
        n = self.kbar
        return [(-a) % n for a in self.labels]

    def complement_exponents(self) -> list[int]:
        n = self.kbar
        present = set(self.labels)
        return [(-a) % n for a in range(n) if a not in present]

    def _build(self) -> None:
        n = self.kbar
        top = n - 1  # every index used by a determinant stays below kbar
        rbar, k = self.spec.rbar, self.spec.k
        if rbar <= k:
            e = _elementary_of(self.x_exponents(), n, rbar)
            h = _complete_from_elementary(e, n, top)
            e = _pad(e, n, top)
        else:
            ey = _elementary_of(self.complement_exponents(), n, k)
            hy = _complete_from_elementary(ey, n, top)
            ey = _pad(ey, n, top)
            e = [hy[m] if m % 2 == 0 else -hy[m] for m in range(top + 1)]
            h = [ey[m] if m % 2 == 0 else -ey[m] for m in range(top + 1)]
        self._e, self._h = e, h

    def e(self, m: int) -> np.ndarray:
        if m < 0:
            return _gr_zero(self.kbar)
        if self._e is None:
            self._build()
        return self._e[m] if m < len(self._e) else _gr_zero(self.kbar)

    def h(self, m: int) -> np.ndarray:
        if m < 0:
            return _gr_zero(self.kbar)
        if m >= self.kbar:
            raise ValueError("complete symmetric index must stay below kbar")
        if self._h is None:
            self._build()
        return self._h[m]


def gr_determinant(matrix: list[list[np.ndarray]], n: int) -> np.ndarray:
    """Determinant over the commutative ring Z[C_n].

    Division-free Laplace expansion, memoized over column subsets (O(m 2^m)
    ring multiplications).  Elimination with division is unsafe here because
    the group ring has zero divisors.
    """
    m = len(matrix)
    if m == 0:
        return _gr_delta(n)
    if m == 1:
        return matrix[0][0]
    if m == 2:
        return cyclic_convolve(matrix[0][0], matrix[1][1]) - cyclic_convolve(matrix[0][1], matrix[1][0])
    # minors of the bottom rows, keyed by column bitmask
    memo: dict[int, np.ndarray] = {}
    last = m - 1
    for j in range(m):
        memo[1 << j] = matrix[last][j]
    for size in range(2, m + 1):
        row = m - size
        nxt: dict[int, np.ndarray] = {}
        for cols in combinations(range(m), size):
            mask = 0
            for c in cols:
                mask |= 1 << c
            acc = None
            for pos, c in enumerate(cols):
                entry = matrix[row][c]
                if not entry.any():
                    continue
                minor = memo[mask ^ (1 << c)]
                if not minor.any():
                    continue
                term = cyclic_convolve(entry, minor)
                if pos % 2:
                    term = -term
                acc = term if acc is None else acc + term
            nxt[mask] = acc if acc is not None else _gr_zero(n)
        memo = nxt
    return memo[(1 << m) - 1]


def _schur_rows_gr(rows: Sequence[int], point: PointData, method: str = "auto") -> np.ndarray:
    """s_rows(x) in Z[C_kbar]; rows is a partition (weakly decreasing, zeros allowed)."""
    n = point.kbar
    rows = [p for p in rows if p > 0]
    if len(rows) > point.spec.rbar:
        return _gr_zero(n)
    if not rows:
        return _gr_delta(n)
    cols = conjugate_partition(rows)
    if method == "auto":
        method = "jacobi_trudi" if len(rows) <= len(cols) else "dual"
    if method == "jacobi_trudi":
        ell = len(rows)
        mat = [[point.h(rows[i] - i + j) for j in range(ell)] for i in range(ell)]
    elif method == "dual":
        ell = len(cols)
        mat = [[point.e(cols[i] - i + j) for j in range(ell)] for i in range(ell)]
    else:
        raise ValueError(f"unknown Schur method {method!r}")
    return gr_determinant(mat, n)


# ---------------------------------------------------------------------------
# independent Newton-identity route (oracle)


def newton_complete(point: PointData, upto: int) -> list[np.ndarray]:
    """h_0..h_upto from power sums by m h_m = sum_{i=1..m} p_i h_(m-i).

    The division by m is exact in Z[C_kbar] because the true h_m is an
    integer vector and the group ring has no additive torsion.
    """
    n = point.kbar
    xs = point.x_exponents()
    P = [None] + [_power_sum_gr(xs, i, n) for i in range(1, upto + 1)]
    H = [_gr_delta(n).astype(object)]
    for m in range(1, upto + 1):
        acc = np.zeros(n, dtype=object)
        for i in range(1, m + 1):
            acc = acc + cyclic_convolve(P[i].astype(object), H[m - i])
        if any(int(c) % m for c in acc):
            raise ArithmeticError("Newton recursion produced a non-integral h_m")
        H.append(np.array([int(c) // m for c in acc], dtype=object))
    return H


def _power_sum_gr(exponents: Sequence[int], ell: int, n: int) -> np.ndarray:
    """Power sum p_ell of the group elements g^a as a group-ring vector."""
    v = np.zeros(n, dtype=np.int64)
    for a in exponents:
        v[(a * ell) % n] += 1
    return v


def schur_newton(lam: Weight, mu: Weight, spec: AlgebraSpec) -> CycNumber:
    """Jacobi-Trudi with h from the Newton recursion; independent of the duality route."""
    point = PointData(spec, mu)
    rows = [p for p in young_rows(lam) if p > 0]
    if not rows:
        return CycNumber.one(spec.kbar)
    H = newton_complete(point, rows[0] + len(rows))
    n = spec.kbar

    def h(m: int) -> np.ndarray:
        return H[m] if m >= 0 else np.zeros(n, dtype=object)

    ell = len(rows)
    mat = [[h(rows[i] - i + j) for j in range(ell)] for i in range(ell)]
    return CycNumber.from_group_ring(n, gr_determinant(mat, n))


# ---------------------------------------------------------------------------
# public exact operations


def power_sum(ell: int, mu: Weight, spec: AlgebraSpec) -> CycNumber:
    """P_ell[mu] = sum_i x_i^ell, an element of Q_kbar."""
    if ell < 0:
        raise ValueError("power sums need ell >= 0")
    n = spec.kbar
    return CycNumber.from_exponents(n, [(-ell * a) for a in partition_labels(mu)])


def schur_group_ring(lam: Weight, point: PointData, method: str = "auto") -> np.ndarray:
    return _schur_rows_gr(young_rows(lam), point, method)


def schur_value(lam: Weight, mu: Weight, spec: AlgebraSpec, method: str = "auto") -> CycNumber:
    """s_lambda(x) at mu, in Q_kbar."""
    point = PointData(spec, mu)
    return CycNumber.from_group_ring(spec.kbar, schur_group_ring(lam, point, method))


def extended_rows(labels: Sequence[int]) -> list[int]:
    """Rows of the diagram with labels (l_1, l_2, ...) of any length."""
    rows = []
    acc = 0
    for x in reversed(labels):
        acc += x
        rows.append(acc)
    rows.reverse()
    return rows


def schur_extended(labels: Sequence[int], mu: Weight, spec: AlgebraSpec) -> CycNumber:
    """Schur value for extended labels (l_1, l_2, ..., l_m), m unrestricted.

    Diagrams with more than r+1 rows vanish, i.e. any positive label beyond
    slot r+1 gives 0; a label in slot r+1 adds full columns.
    """
    point = PointData(spec, mu)
    rows = extended_rows(labels)
    return CycNumber.from_group_ring(spec.kbar, _schur_rows_gr(rows, point))


def chi_from_schur(lam_degree: int, point: PointData, schur_gr: np.ndarray) -> CycNumber:
    spec = point.spec
    n = spec.rbar * spec.kbar
    shift = (lam_degree * point.twist) % n
    vec = np.zeros(n, dtype=schur_gr.dtype)
    idx = (np.arange(spec.kbar) * spec.rbar + shift) % n
    vec[idx] = schur_gr
    return CycNumber.from_group_ring(n, vec)


def chi(lam: Weight, mu: Weight, spec: AlgebraSpec, method: str = "auto") -> CycNumber:
    """Fusion eigenvalue chi_lambda(mu) = S_{lambda,mu}/S_{0,mu}, in Q_{rbar*kbar}."""
    point = PointData(spec, mu)
    return chi_from_schur(degree(lam), point, schur_group_ring(lam, point, method))


def chi_extended(labels: Sequence[int], mu: Weight, spec: AlgebraSpec) -> CycNumber:
    """chi for extended labels (l_1, l_2, ...): the phase uses sum j*l_j over all slots."""
    point = PointData(spec, mu)
    rows = extended_rows(labels)
    deg = sum(rows)
    return chi_from_schur(deg, point, _schur_rows_gr(rows, point))


def is_zero_chi(lam: Weight, point: PointData) -> bool:
    """Exact test chi_lambda(mu) == 0 (the phase is a unit, so test the Schur part)."""
    return CycNumber.from_group_ring(point.kbar, schur_group_ring(lam, point)).is_zero()


# ---------------------------------------------------------------------------
# floating point S data


def _log_s_zero_constant(spec: AlgebraSpec) -> float:
    return -0.5 * math.log(spec.rbar) - 0.5 * spec.r * math.log(spec.kbar)


def log_sine_product(mu: Weight, spec: AlgebraSpec) -> float:
    """log prod_{a<b} 2 sin(pi (mu(a) - mu(b)) / kbar), via the smaller label set."""
    n = spec.kbar
    labels = partition_labels(mu)
    if spec.rbar <= spec.k:
        pts = np.array(labels, dtype=float)
        extra = 0.0
    else:
        present = set(labels)
        pts = np.array([a for a in range(n) if a not in present], dtype=float)
        extra = (n / 2.0 - spec.k) * math.log(n)
    if len(pts) < 2:
        return extra
    diff = np.abs(pts[:, None] - pts[None, :])
    iu = np.triu_indices(len(pts), 1)
    return extra + float(np.sum(np.log(2.0 * np.sin(np.pi * diff[iu] / n))))


def log_sine_product_direct(mu: Weight, spec: AlgebraSpec) -> float:
    labels = np.array(partition_labels(mu), dtype=float)
    iu = np.triu_indices(len(labels), 1)
    diff = labels[:, None] - labels[None, :]
    return float(np.sum(np.log(2.0 * np.sin(np.pi * diff[iu] / spec.kbar))))


def s_zero(mu: Weight, spec: AlgebraSpec) -> float:
    """S_{0,mu} = K * prod_{a<b} 2 sin(pi(mu(a)-mu(b))/kbar), K = rbar^(-1/2) kbar^(-r/2)."""
    return math.exp(_log_s_zero_constant(spec) + log_sine_product(mu, spec))


def _weight_array(weights: Sequence[Weight], spec: AlgebraSpec | None = None) -> np.ndarray:
    if spec is not None and weights is spec.weights:
        return spec.weight_array
    return np.asarray(weights, dtype=np.int64).reshape(len(weights), -1)


def _small_det(m: np.ndarray) -> np.ndarray:
    """Determinants over the last two axes; closed forms up to 3x3, LAPACK beyond."""
    size = m.shape[-1]
    if size == 1:
        return m[..., 0, 0]
    if size == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    if size == 3:
        return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
                - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
                + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))
    return np.linalg.det(m)


def _label_array(W: np.ndarray) -> np.ndarray:
    """Partition labels of every row of a weight array, shape (npts, rbar)."""
    out = np.zeros_like(W)
    out[:, :-1] = np.cumsum((W[:, 1:] + 1)[:, ::-1], axis=1)[:, ::-1]
    return out


def _point_sets(spec: AlgebraSpec, labels: np.ndarray) -> np.ndarray:
    """Per weight, the label set (rbar <= k) or its complement in Z/kbar (rbar > k)."""
    n = spec.kbar
    if spec.rbar <= spec.k:
        return labels
    npts = len(labels)
    mask = np.ones((npts, n), dtype=bool)
    mask[np.arange(npts)[:, None], labels] = False
    return np.nonzero(mask)[1].reshape(npts, spec.k)


def _float_eh(spec: AlgebraSpec, weights: Sequence[Weight] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Arrays E[mu, m], H[mu, m] of e_m(x), h_m(x) for m = 0..kbar-1 (complex)."""
    n = spec.kbar
    top = n - 1
    rbar, k = spec.rbar, spec.k
    npts = len(weights)
    W = weights if isinstance(weights, np.ndarray) else _weight_array(weights)
    lab = _label_array(W)
    pts = np.exp(-2j * np.pi * _point_sets(spec, lab) / n)
    s = pts.shape[1]
    E = np.zeros((npts, s + 1), dtype=complex)
    E[:, 0] = 1.0
    for i in range(s):
        E[:, 1:] = E[:, 1:] + pts[:, i : i + 1] * E[:, :-1]
    H = np.zeros((npts, top + 1), dtype=complex)
    H[:, 0] = 1.0
    for m in range(1, top + 1):
        acc = np.zeros(npts, dtype=complex)
        for j in range(1, min(m, s) + 1):
            term = E[:, j] * H[:, m - j]
            acc = acc + term if j % 2 == 1 else acc - term
        H[:, m] = acc
    Efull = np.zeros((npts, top + 1), dtype=complex)
    Efull[:, : min(s, top) + 1] = E[:, : min(s, top) + 1]
    if rbar <= k:
        return Efull, H
    alt = np.array([(-1) ** m for m in range(top + 1)], dtype=float)
    return H * alt, Efull * alt


def _index_tensor(spec: AlgebraSpec, weights: Sequence[Weight], use_h: bool) -> tuple[np.ndarray, int]:
    """Per-lambda index matrices into the padded e or h table; index -1 means 0."""
    size = max(spec.r if use_h else spec.k, 1)
    W = _weight_array(weights, spec)
    rows = np.zeros((len(W), max(spec.r, 1)), dtype=np.int64)
    if spec.r:
        rows[:, : spec.r] = np.cumsum(W[:, 1:][:, ::-1], axis=1)[:, ::-1]
    if use_h:
        parts = np.zeros((len(W), size), dtype=np.int64)
        parts[:, : rows.shape[1]] = rows[:, :size]
    else:
        # conjugate partition: column c has #{rows >= c+1} boxes
        parts = (rows[:, :, None] >= np.arange(1, size + 1)[None, None, :]).sum(axis=1)
    ar = np.arange(size)
    idx = parts[:, :, None] - ar[None, :, None] + ar[None, None, :]
    idx[idx < 0] = -1
    return idx, size


def chi_float_matrix(spec: AlgebraSpec, lam_weights: Sequence[Weight] | None = None,
                     chunk: int = 256) -> np.ndarray:
    """Float chi[lambda, mu] for lambda in lam_weights (default all) and every mu."""
    weights = spec.weights
    lam_weights = weights if lam_weights is None else list(lam_weights)
    n = spec.kbar
    N = spec.rbar * n
    use_h = spec.r <= spec.k
    idx, size = _index_tensor(spec, lam_weights, use_h)
    degs = _weight_array(lam_weights, spec) @ np.arange(spec.rbar)
    W_mu = _weight_array(weights, spec)
    twists = (W_mu + 1) @ np.arange(spec.rbar)
    out = np.empty((len(lam_weights), len(weights)), dtype=complex)
    # batched determinants: keep each (mu, lambda, size, size) stack near 2M entries
    chunk = max(1, min(chunk, (1 << 21) // (len(lam_weights) * size * size)))
    for start in range(0, len(weights), chunk):
        block = W_mu[start : start + chunk]
        E, H = _float_eh(spec, block)
        table = H if use_h else E
        padded = np.concatenate([table, np.zeros((len(block), 1), dtype=complex)], axis=1)
        vals = _small_det(padded[:, idx])  # (block, lambda)
        phase = np.exp(2j * np.pi * (np.outer(degs, twists[start : start + len(block)]) % N) / N)
        out[:, start : start + len(block)] = phase * vals.T
    return out


def s_zero_vector(spec: AlgebraSpec) -> np.ndarray:
    n = spec.kbar
    pts = _point_sets(spec, _label_array(spec.weight_array)).astype(float)
    extra = 0.0 if spec.rbar <= spec.k else (n / 2.0 - spec.k) * math.log(n)
    total = np.full(len(pts), _log_s_zero_constant(spec) + extra)
    if pts.shape[1] >= 2:
        iu = np.triu_indices(pts.shape[1], 1)
        diff = np.abs(pts[:, iu[0]] - pts[:, iu[1]])
        total += np.log(2.0 * np.sin(np.pi * diff / n)).sum(axis=1)
    return np.exp(total)


def s_entry(lam: Weight, mu: Weight, spec: AlgebraSpec) -> complex:
    return chi(lam, mu, spec).to_complex() * s_zero(mu, spec)


def s_matrix(spec: AlgebraSpec, validate: bool = True) -> np.ndarray:
    """The modular S matrix in enumeration order, S = chi * S_{0,mu} column-wise."""
    S = chi_float_matrix(spec) * s_zero_vector(spec)[None, :]
    if validate:
        resid = unitarity_residual(S)
        if resid >= UNITARITY_TOL or S[0, 0].real <= 0:
            raise ArithmeticError(
                f"S matrix for {spec} fails the normalization check (residual {resid:.3e})"
            )
    return S


def unitarity_residual(S: np.ndarray) -> float:
    return float(np.max(np.abs(S @ S.conj().T - np.eye(len(S)))))


def symmetry_residual(S: np.ndarray) -> float:
    return float(np.max(np.abs(S - S.T)))


# ---------------------------------------------------------------------------
# table with lazy exact rows and a disk cache


class CharacterTable:
    """Float S data plus exact chi rows computed on demand.

    Exact rows are lists of CycNumber in Q_{rbar*kbar}, one per mu in
    enumeration order.  Per-mu group-ring data is memoized.
    """

    def __init__(self, spec: AlgebraSpec, cache_dir: str | os.PathLike | None = None,
                 use_cache: bool = False):
        self.spec = spec
        self.weights = spec.weights
        self.index = spec.index
        self._points: dict[int, PointData] = {}
        self._rows: dict[Weight, list[CycNumber]] = {}
        self._S: np.ndarray | None = None
        self._chi_float: np.ndarray | None = None
        self.use_cache = use_cache
        self.cache_dir = Path(cache_dir or os.environ.get(CACHE_ENV, DEFAULT_CACHE_DIR))

    def point(self, mu_index: int) -> PointData:
        p = self._points.get(mu_index)
        if p is None:
            p = PointData(self.spec, self.weights[mu_index])
            self._points[mu_index] = p
        return p

    def chi(self, lam: Weight, mu: Weight) -> CycNumber:
        point = self.point(self.index[mu])
        return chi_from_schur(degree(lam), point, schur_group_ring(lam, point))

    def chi_row(self, lam: Weight) -> list[CycNumber]:
        row = self._rows.get(lam)
        if row is None:
            deg = degree(lam)
            row = []
            for i in range(len(self.weights)):
                point = self.point(i)
                row.append(chi_from_schur(deg, point, schur_group_ring(lam, point)))
            self._rows[lam] = row
        return row

    def is_zero(self, lam: Weight, mu: Weight) -> bool:
        return is_zero_chi(lam, self.point(self.index[mu]))

    @property
    def S(self) -> np.ndarray:
        if self._S is None:
            loaded = self._load() if self.use_cache else None
            if loaded is None:
                loaded = s_matrix(self.spec)
                if self.use_cache:
                    self._save(loaded)
            self._S = loaded
        return self._S

    @property
    def chi_float(self) -> np.ndarray:
        if self._chi_float is None:
            s0 = self.S[0]
            self._chi_float = self.S / s0[None, :]
        return self._chi_float

    @property
    def s0(self) -> np.ndarray:
        return self.S[0].real.copy()

    # cache file: one JSON header line, then little-endian (re, im) float64 pairs,
    # then optional JSON lines of exact rows

    def cache_path(self) -> Path:
        return self.cache_dir / f"S_r{self.spec.r}_k{self.spec.k}.bin"

    def header(self) -> dict:
        return {
            "format_version": CACHE_FORMAT_VERSION,
            "r": self.spec.r,
            "k": self.spec.k,
            "enumeration_hash": self.spec.enumeration_hash,
            "exact_rows": len(self._rows),
        }

    def _save(self, S: np.ndarray) -> None:
        save_cache(self.cache_path(), self.header(), S, self._rows, self.weights)

    def save(self) -> Path:
        save_cache(self.cache_path(), self.header(), self.S, self._rows, self.weights)
        return self.cache_path()

    def _load(self) -> np.ndarray | None:
        path = self.cache_path()
        if not path.exists():
            return None
        header, S, rows = load_cache(path, self.spec)
        for lam, vals in rows.items():
            self._rows.setdefault(lam, vals)
        return S


class CacheMismatchError(RuntimeError):
    pass


def save_cache(path: Path, header: dict, S: np.ndarray, rows: dict[Weight, list[CycNumber]],
               weights: Sequence[Weight]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    flat = np.empty(S.size * 2, dtype="<f8")
    flat[0::2] = S.real.ravel()
    flat[1::2] = S.imag.ravel()
    with open(tmp, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(flat.tobytes())
        for lam, vals in rows.items():
            rec = {"lambda": list(lam), "values": [v.to_record() for v in vals]}
            fh.write(b"\n" + json.dumps(rec).encode())
    os.replace(tmp, path)


def load_cache(path: Path, spec: AlgebraSpec) -> tuple[dict, np.ndarray, dict[Weight, list[CycNumber]]]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format_version") != CACHE_FORMAT_VERSION:
            raise CacheMismatchError(f"{path}: cache format {header.get('format_version')} "
                                     f"is not {CACHE_FORMAT_VERSION}")
        if (header.get("r"), header.get("k")) != (spec.r, spec.k) or \
                header.get("enumeration_hash") != spec.enumeration_hash:
            raise CacheMismatchError(f"{path}: cache was written for different weights")
        count = spec.size * spec.size * 2
        raw = fh.read(count * 8)
        flat = np.frombuffer(raw, dtype="<f8")
        if len(flat) != count:
            raise CacheMismatchError(f"{path}: truncated S block")
        S = (flat[0::2] + 1j * flat[1::2]).reshape(spec.size, spec.size)
        rows: dict[Weight, list[CycNumber]] = {}
        for line in fh.read().split(b"\n"):
            if not line.strip():
                continue
            rec = json.loads(line)
            rows[tuple(rec["lambda"])] = [CycNumber.from_record(v) for v in rec["values"]]
    return header, S, rows


def exact_rows_equal(a: Iterable[CycNumber], b: Iterable[CycNumber]) -> bool:
    return all(x == y for x, y in zip(a, b))


def rank_level_duality_failures(spec: AlgebraSpec) -> list[tuple[Weight, Weight]]:
    """Pairs (lambda, mu) breaking chi_lam(mu) = xi_{rbar k}^{t(lam)t(mu)} conj(chi~_{tau lam}(tau mu)).

    t is the unreduced box count.  The dual algebra is A_{k-1} at level r+1.
    """
    if spec.k < 2:
        raise ValueError("rank-level duality needs k >= 2")
    dual = AlgebraSpec(spec.k - 1, spec.rbar)
    n = spec.rbar * spec.k
    bad = []
    for lam in spec.weights:
        tl = box_count(lam)
        tau_lam = tau_dual(lam, spec.k)
        for mu in spec.weights:
            phase = root_of_unity(n, tl * box_count(mu))
            rhs = phase * chi(tau_lam, tau_dual(mu, spec.k), dual).conjugate()
            if chi(lam, mu, spec) != rhs:
                bad.append((lam, mu))
    return bad
