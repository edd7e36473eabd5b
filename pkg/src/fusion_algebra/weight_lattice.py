"""Level-k integrable highest weights of A_r and the combinatorial maps on them.

A weight is stored as the full tuple of Dynkin labels (lam_0, lam_1, ..., lam_r)
whose sum is the level.  Everything downstream indexes tables by the position
of a weight in :func:`enumerate_weights`, so that order is part of the contract:
lexicographic on (lam_1, ..., lam_r).
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

Weight = tuple[int, ...]

DEFAULT_CAPACITY = 500_000


class CapacityError(RuntimeError):
    """Raised when a weight set would exceed the configured size limit."""


@dataclass(frozen=True)
class AlgebraSpec:
    """The pair (r, k) for A_r at level k."""

    r: int
    k: int
    capacity: int = field(default=DEFAULT_CAPACITY, compare=False)

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"rank must be positive, got {self.r}")
        if self.k < 0:
            raise ValueError(f"level must be nonnegative, got {self.k}")

    @property
    def rbar(self) -> int:
        return self.r + 1

    @property
    def kbar(self) -> int:
        return self.k + self.r + 1

    @property
    def size(self) -> int:
        return math.comb(self.r + self.k, self.r)

    @cached_property
    def weights(self) -> list[Weight]:
        return enumerate_weights(self)

    @cached_property
    def weight_array(self) -> np.ndarray:
        """The weights as an int64 array of shape (size, r+1)."""
        if self.k == 0:
            return np.zeros((1, self.rbar), dtype=np.int64)
        arr = np.fromiter(itertools.chain.from_iterable(self.weights), dtype=np.int64,
                          count=self.size * self.rbar)
        return arr.reshape(self.size, self.rbar)

    @cached_property
    def index(self) -> dict[Weight, int]:
        return {w: i for i, w in enumerate(self.weights)}

    @cached_property
    def enumeration_hash(self) -> str:
        h = hashlib.sha256()
        for w in self.weights:
            h.update(bytes(str(w), "ascii"))
        return h.hexdigest()[:16]

    def vacuum(self) -> Weight:
        return (self.k,) + (0,) * self.r

    def fundamental(self, i: int, mult: int = 1) -> Weight:
        """The weight mult*w^i padded to level k in slot 0."""
        if not 0 <= i <= self.r:
            raise ValueError(f"fundamental index {i} outside 0..{self.r}")
        labels = [0] * self.rbar
        labels[i] += mult
        labels[0] += self.k - mult
        return check_weight(labels, self)

    def weight(self, labels: Sequence[int], with_zeroth: bool = True) -> Weight:
        if not with_zeroth:
            labels = [self.k - sum(labels)] + list(labels)
        return check_weight(labels, self)

    def __str__(self) -> str:
        return f"A_{self.r} level {self.k}"


def check_weight(labels: Sequence[int], spec: AlgebraSpec) -> Weight:
    w = tuple(int(x) for x in labels)
    if len(w) != spec.rbar:
        raise ValueError(f"expected {spec.rbar} labels, got {len(w)}")
    if any(x < 0 for x in w):
        raise ValueError(f"negative Dynkin label in {w}")
    if sum(w) != spec.k:
        raise ValueError(f"labels {w} sum to {sum(w)}, not level {spec.k}")
    return w


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # all (x_1..x_parts) with sum <= total, lexicographic
    x = [0] * parts
    s = 0
    while True:
        yield tuple(x)
        if parts == 0 or total == 0:
            return
        if s < total:
            x[-1] += 1
            s += 1
            continue
        # sum is full: bump the slot before the last nonzero one, clear the rest
        j = parts - 1
        while x[j] == 0:
            j -= 1
        if j == 0:
            return
        s -= x[j] - 1
        x[j] = 0
        x[j - 1] += 1


def enumerate_weights(spec: AlgebraSpec) -> list[Weight]:
    if spec.size > spec.capacity:
        raise CapacityError(
            f"{spec} has {spec.size} weights, above the capacity limit {spec.capacity}"
        )
    k = spec.k
    return [(k - sum(tail),) + tail for tail in _compositions(k, spec.r)]


def level_of(w: Weight) -> int:
    return sum(w)


def ality(w: Weight) -> int:
    """r-bar-ality: sum of j*lam_j modulo r+1."""
    return sum(j * x for j, x in enumerate(w)) % len(w)


def box_count(w: Weight) -> int:
    """Unreduced t(w) = sum of j*lam_j: the number of boxes in the Young diagram."""
    return sum(j * x for j, x in enumerate(w))


def shifted_ality(w: Weight) -> int:
    """t(w + rho) = sum of j*(lam_j + 1), not reduced."""
    return sum(j * (x + 1) for j, x in enumerate(w))


def apply_J(w: Weight, a: int = 1) -> Weight:
    """Simple current: slot i receives the label of slot i-a."""
    n = len(w)
    a %= n
    if a == 0:
        return w
    return w[n - a:] + w[:n - a]


def apply_C(w: Weight) -> Weight:
    """Charge conjugation: reverse slots 1..r, keep slot 0."""
    return (w[0],) + tuple(reversed(w[1:]))


def partition_labels(w: Weight) -> tuple[int, ...]:
    """The strictly decreasing values mu(l) = sum_{j>=l} (mu_j + 1), l = 1..r+1."""
    out = [0]
    for x in reversed(w[1:]):
        out.append(out[-1] + x + 1)
    out.reverse()
    return tuple(out)


def from_partition_labels(values: Sequence[int], level: int | None = None) -> Weight:
    """Inverse of :func:`partition_labels`.

    Partition labels do not see lam_0, so the level must be supplied to
    recover it; without a level, lam_0 is taken to be 0.
    """
    vals = [int(v) for v in values]
    if not vals or vals[-1] != 0:
        raise ValueError("partition labels must end in 0")
    for a, b in zip(vals, vals[1:]):
        if a <= b:
            raise ValueError(f"partition labels {vals} are not strictly decreasing")
    tail = tuple(a - b - 1 for a, b in zip(vals, vals[1:]))
    if level is None:
        level = sum(tail)
    lam0 = level - sum(tail)
    if lam0 < 0:
        raise ValueError(f"partition labels {vals} exceed level {level}")
    return (lam0,) + tail


def young_rows(w: Weight) -> list[int]:
    """Row lengths p_i = sum_{j>=i} lam_j, i = 1..r (zeros kept)."""
    rows = []
    acc = 0
    for x in reversed(w[1:]):
        acc += x
        rows.append(acc)
    rows.reverse()
    return rows


def fixed_point_order(w: Weight) -> int:
    """Smallest d >= 1 with J^d w = w."""
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and apply_J(w, d) == w:
            return d
    return n


def is_fixed_point(w: Weight) -> bool:
    return fixed_point_order(w) < len(w)


def valid_fixed_divisors(spec: AlgebraSpec) -> list[int]:
    """Divisors d of r+1 for which J^d-fixed points exist, i.e. (r+1)/d divides k."""
    return [d for d in range(1, spec.rbar + 1)
            if spec.rbar % d == 0 and spec.k % (spec.rbar // d) == 0]


def check_fixed_divisor(spec: AlgebraSpec, d: int) -> None:
    if d < 1 or spec.rbar % d:
        raise ValueError(f"d={d} does not divide r+1={spec.rbar}")
    if spec.k % (spec.rbar // d):
        raise ValueError(f"(r+1)/d={spec.rbar // d} does not divide k={spec.k}")


def fixed_points(spec: AlgebraSpec, d: int) -> list[Weight]:
    """All J^d-fixed weights, built by tiling weights of A_{d-1} at level kd/(r+1)."""
    check_fixed_divisor(spec, d)
    q = spec.rbar // d
    small = AlgebraSpec(d - 1, spec.k // q) if d > 1 else None
    if small is None:
        return [(spec.k // q,) * spec.rbar]
    return [tuple(p) * q for p in small.weights]


def truncate_fixed_point(phi: Weight, d: int) -> Weight:
    """The truncated weight (phi_0, ..., phi_{d-1}) of a J^d-fixed point."""
    n = len(phi)
    if d < 1 or n % d:
        raise ValueError(f"d={d} does not divide r+1={n}")
    if apply_J(phi, d) != phi:
        raise ValueError(f"{phi} is not fixed by J^{d}")
    return phi[:d]


def tau_dual(w: Weight, k: int | None = None) -> Weight:
    """Rank-level transpose: a weight of A_{k-1} at level r+1.

    Transpose the Young diagram with rows p_i, drop columns of full length k,
    then read Dynkin labels off the k rows of the transposed diagram.
    """
    if k is None:
        k = sum(w)
    if k < 1:
        raise ValueError("rank-level duality needs level k >= 1")
    rbar = len(w)
    rows = young_rows(w)
    cols = [sum(1 for p in rows if p >= c) for c in range(1, k + 1)]
    full = cols[-1]
    cols = [c - full for c in cols]
    tail = tuple(cols[j] - cols[j + 1] for j in range(k - 1))
    return (rbar - sum(tail),) + tail


def j_orbit(w: Weight) -> frozenset[Weight]:
    return frozenset(apply_J(w, a) for a in range(len(w)))


def format_weight(w: Weight) -> str:
    return ",".join(str(x) for x in w)


def parse_weight(text: str, spec: AlgebraSpec, with_zeroth: bool = True) -> Weight:
    try:
        labels = [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"cannot parse weight {text!r}") from exc
    if not with_zeroth:
        if len(labels) != spec.r:
            raise ValueError(f"expected {spec.r} labels without the zeroth, got {len(labels)}")
        lam0 = spec.k - sum(labels)
        if lam0 < 0:
            raise ValueError(f"labels {labels} exceed level {spec.k}")
        labels = [lam0] + labels
    return check_weight(labels, spec)
