"""Integer partitions and the exact primitives built on them.

A partition is stored as a plain tuple of positive integers in weakly
decreasing order. The empty tuple is the empty partition. Trailing zeros
are never stored, so tuple equality is partition equality.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Iterator, Sequence

Partition = tuple[int, ...]

EMPTY: Partition = ()


def make_partition(parts: Iterable[int]) -> Partition:
    """Build a canonical partition, dropping zeros and checking the order."""
    values = [int(p) for p in parts]
    if any(p < 0 for p in values):
        raise ValueError(f"negative part in {values}")
    trimmed = tuple(p for p in values if p > 0)
    if any(trimmed[i] < trimmed[i + 1] for i in range(len(trimmed) - 1)):
        raise ValueError(f"parts not weakly decreasing: {values}")
    # zeros must only trail
    if len(trimmed) != len(values) and any(values[len(trimmed):]):
        raise ValueError(f"zero part before a positive part: {values}")
    return trimmed


def size(lam: Partition) -> int:
    return sum(lam)


def length(lam: Partition) -> int:
    return len(lam)


def conjugate(lam: Partition) -> Partition:
    if not lam:
        return EMPTY
    return tuple(sum(1 for part in lam if part >= i) for i in range(1, lam[0] + 1))


def _part(lam: Partition, i: int) -> int:
    return lam[i] if i < len(lam) else 0


def interlaces(mu: Partition, lam: Partition, dual: bool = False) -> bool:
    """Return whether mu < lam in the interlacing order.

    With ``dual`` set the test is applied to the conjugates instead.
    """
    if dual:
        mu, lam = conjugate(mu), conjugate(lam)
    if len(mu) > len(lam) or len(lam) > len(mu) + 1:
        return False
    for i in range(len(lam)):
        if _part(mu, i) > lam[i]:
            return False
        if _part(mu, i) < _part(lam, i + 1):
            return False
    return True


def horizontal_strips_below(lam: Partition) -> Iterator[Partition]:
    """All mu with mu < lam."""
    bounds = [(_part(lam, i + 1), lam[i]) for i in range(len(lam))]
    yield from _box_products(bounds)


def horizontal_strips_above(mu: Partition, max_size: int) -> Iterator[Partition]:
    """All lam with mu < lam and size(lam) <= max_size."""
    budget = max_size - size(mu)
    if budget < 0:
        return
    # lam_1 is free above mu_1, lam_i lies in [mu_i, mu_{i-1}]
    first_hi = _part(mu, 0) + budget
    bounds = [(_part(mu, 0), first_hi)]
    bounds += [(_part(mu, i), mu[i - 1]) for i in range(1, len(mu) + 1)]
    for lam in _box_products(bounds, budget + size(mu)):
        yield lam


def _box_products(bounds: Sequence[tuple[int, int]], cap: int | None = None) -> Iterator[Partition]:
    def rec(i: int, acc: list[int], total: int) -> Iterator[Partition]:
        if i == len(bounds):
            yield tuple(p for p in acc if p > 0)
            return
        lo, hi = bounds[i]
        for value in range(lo, hi + 1):
            if cap is not None and total + value > cap:
                break
            acc.append(value)
            yield from rec(i + 1, acc, total + value)
            acc.pop()

    yield from rec(0, [], 0)


def strips_below(lam: Partition, dual: bool) -> Iterator[Partition]:
    if not dual:
        yield from horizontal_strips_below(lam)
        return
    for mu in horizontal_strips_below(conjugate(lam)):
        yield conjugate(mu)


def strips_above(mu: Partition, max_size: int, dual: bool) -> Iterator[Partition]:
    if not dual:
        yield from horizontal_strips_above(mu, max_size)
        return
    for lam in horizontal_strips_above(conjugate(mu), max_size):
        yield conjugate(lam)


def partitions_of(n: int) -> Iterator[Partition]:
    """Partitions of n in reverse lexicographic order."""

    def rec(remaining: int, cap: int) -> Iterator[Partition]:
        if remaining == 0:
            yield EMPTY
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in rec(remaining - first, first):
                yield (first,) + rest

    yield from rec(n, n)


def partitions_up_to(n: int) -> Iterator[Partition]:
    for k in range(n + 1):
        yield from partitions_of(k)


def skew_schur_single(lam: Partition, mu: Partition, x: Fraction) -> Fraction:
    """Single-variable skew Schur function s_{lam/mu}(x)."""
    x = Fraction(x)
    if not interlaces(mu, lam):
        return Fraction(0)
    return x ** (size(lam) - size(mu))


def skew_schur_jacobi_trudi(lam: Partition, mu: Partition, x: Fraction) -> Fraction:
    """The same quantity from det[h_{lam_i - mu_j - i + j}] with h_r = x^r.

    Kept as an independent route for tests.
    """
    x = Fraction(x)
    n = max(len(lam), len(mu))
    if n == 0:
        return Fraction(1)
    matrix = []
    for i in range(n):
        row = []
        for j in range(n):
            r = _part(lam, i) - _part(mu, j) - i + j
            row.append(x**r if r >= 0 else Fraction(0))
        matrix.append(row)
    return _exact_det(matrix)


def _exact_det(matrix: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor:
                for c in range(col, n):
                    a[r][c] -= factor * a[col][c]
    return det


def gamma_k(lam: Partition, k: int, q: float, t: float) -> float:
    """The observable (1 - t^-k) sum_i q^{k lam_i} t^{k(1-i)} + t^{-k l(lam)}.

    At t = 1 the prefactor vanishes and the value is 1 for every partition,
    which is also the limit as t -> 1.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    ell = len(lam)
    if ell == 0:
        return 1.0
    if t == 1:
        return 1.0
    total = sum(q ** (k * part) * t ** (k * (1 - i)) for i, part in enumerate(lam, start=1))
    return (1 - t ** (-k)) * total + t ** (-k * ell)


def f_lambda(lam: Partition, q: float, t: float) -> float:
    return (1 - t) * sum((q**part - 1) * t ** (i - 1) for i, part in enumerate(lam, start=1))


def particle_ordinates(lam: Partition, count: int | None = None) -> list[float]:
    """Ordinates lam_i - i + 1/2 of the highest particles (charge zero)."""
    count = len(lam) if count is None else count
    return [_part(lam, i - 1) - i + 0.5 for i in range(1, count + 1)]


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    value = Fraction(str(text).strip())
    return value


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def partition_to_json(lam: Partition) -> list[int]:
    return list(lam)


def partition_from_json(data: Sequence[int]) -> Partition:
    return make_partition(data)


def dominates_pointwise(a: Partition, b: Partition) -> bool:
    return all(x >= y for x, y in zip_longest(a, b, fillvalue=0))
