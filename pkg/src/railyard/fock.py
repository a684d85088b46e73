"""Truncated Fock space and the transfer operators Gamma_{L+-}, Gamma_{R+-}.

Vectors are dicts from partitions to exact rationals. The truncation level
``N`` bounds the size of every partition that is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

from .graph import RailYardSpec, contributing_pairs, validate_spec, SpecError
from .partitions import (
    EMPTY,
    Partition,
    conjugate,
    partitions_up_to,
    size,
    skew_schur_jacobi_trudi,
    strips_above,
    strips_below,
)

FockVector = dict[Partition, Fraction]

KINDS = ("L+", "L-", "R+", "R-")


def vacuum() -> FockVector:
    return {EMPTY: Fraction(1)}


def apply_gamma(kind: str, x: Fraction, vec: FockVector, N: int) -> FockVector:
    """Apply Gamma_kind(x) to ``vec``, dropping partitions of size > N.

    '+' operators remove a strip (horizontal for L, vertical for R) and
    '-' operators add one.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown operator {kind}")
    x = Fraction(x)
    dual = kind[0] == "R"
    out: FockVector = {}
    for lam, coeff in vec.items():
        if not coeff:
            continue
        if kind[1] == "+":
            targets: Iterable[Partition] = strips_below(lam, dual)
        else:
            targets = strips_above(lam, N, dual)
        lam_size = size(lam)
        for mu in targets:
            d = abs(size(mu) - lam_size)
            out[mu] = out.get(mu, Fraction(0)) + coeff * x**d
    return out


def right_vectors(spec: RailYardSpec, N: int) -> list[FockVector]:
    """Vectors Gamma_i ... Gamma_r |empty>, indexed by i - l, plus |empty> last.

    Entry ``lam`` of the vector at position k is the total weight of all
    continuations from partition k equal to ``lam`` to the empty boundary.
    """
    # <empty| G_l ... G_{i-1} |lam> is nonzero only if lam splits into the
    # strips the '+' operators left of i can remove: lam_{pL+1} <= pR
    kinds = [spec.kind(i) for i in spec.columns]
    vecs: list[FockVector] = [vacuum()]
    for k in reversed(range(len(kinds))):
        vec = apply_gamma(kinds[k], spec.weight(spec.l + k), vecs[-1], N)
        p_l = sum(1 for c in kinds[:k] if c == "L+")
        p_r = sum(1 for c in kinds[:k] if c == "R+")
        vecs.append({lam: c for lam, c in vec.items() if len(lam) <= p_l or lam[p_l] <= p_r})
    vecs.reverse()
    return vecs


def partition_function_braket(spec: RailYardSpec, N: int) -> Fraction:
    return right_vectors(spec, N)[0].get(EMPTY, Fraction(0))


def pair_factor(spec: RailYardSpec, i: int, j: int) -> Fraction:
    p = spec.weight(i) * spec.weight(j)
    if spec.a[i - spec.l] != spec.a[j - spec.l]:
        return 1 + p
    return 1 / (1 - p)


def partition_function_closed(spec: RailYardSpec) -> Fraction:
    report = validate_spec(spec)
    if not report.ok:
        raise SpecError(f"divergent spec, offending pairs {report.violations}")
    z = Fraction(1)
    for i, j in contributing_pairs(spec):
        z *= pair_factor(spec, i, j)
    return z


def tail_bound(spec: RailYardSpec, N: int) -> Fraction:
    """Upper bound on Z minus its size-N truncation.

    Each covering missing from the truncation has at least 2(N + 1)
    diagonal edges. Every pair factor is dominated coefficientwise by
    1 / (1 - rho u) with rho the largest pair product, so the missing mass
    is at most sum_{d > N} C(d + P - 1, P - 1) rho^d over P pairs. The
    ratio of consecutive terms is at most rho (N + 1 + P) / (N + 2), which
    gives a geometric bound.
    """
    pairs = list(contributing_pairs(spec))
    if not pairs:
        return Fraction(0)
    rho = max(spec.weight(i) * spec.weight(j) for i, j in pairs)
    P = len(pairs)
    ratio = rho * Fraction(N + 1 + P, N + 2)
    if ratio >= 1:
        raise SpecError("tail bound unavailable: truncation too small for these weights")
    return comb(N + P, P - 1) * rho ** (N + 1) / (1 - ratio)


# ---------------------------------------------------------------------------
# operator identities


Poly = dict[tuple[int, int], int]


def _matrix_entries(kinds: tuple[str, str], N: int) -> dict[tuple[Partition, Partition], Poly]:
    """Entries <mu| Gamma_k1(x1) Gamma_k2(x2) |nu> as polynomials in x1, x2.

    Intermediate partitions are capped at size N.
    """
    k1, k2 = kinds
    entries: dict[tuple[Partition, Partition], Poly] = {}
    for nu in partitions_up_to(N):
        first = _single_moves(k2, nu, N)
        for kappa, e2 in first:
            for mu, e1 in _single_moves(k1, kappa, N):
                poly = entries.setdefault((mu, nu), {})
                poly[(e1, e2)] = poly.get((e1, e2), 0) + 1
    return entries


def _single_moves(kind: str, lam: Partition, N: int) -> list[tuple[Partition, int]]:
    dual = kind[0] == "R"
    if kind[1] == "+":
        targets = strips_below(lam, dual)
    else:
        targets = strips_above(lam, N, dual)
    return [(mu, abs(size(mu) - size(lam))) for mu in targets]


def _s_degree(mu: Partition, nu: Partition, e1: int, e2: int) -> int:
    base = abs(size(mu) - size(nu))
    return (e1 + e2 - base) // 2


@dataclass
class CommutationReport:
    relation: str
    entries_checked: int = 0
    max_discrepancy: int = 0
    window: int = 0
    degree: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_discrepancy == 0


def _poly_mul_series(poly: Poly, same: bool, degree: int) -> Poly:
    """Multiply by 1/(1 - x1 x2) truncated, or by 1 + x1 x2."""
    out: Poly = {}
    powers = range(degree + 1) if same else range(2)
    for (e1, e2), c in poly.items():
        for j in powers:
            key = (e1 + j, e2 + j)
            out[key] = out.get(key, 0) + c
    return out


def verify_commutation(a1: str, a2: str, x1: Fraction = Fraction(1, 3), x2: Fraction = Fraction(1, 3), N: int = 16, degree: int = 8, sign: str | None = None) -> CommutationReport:
    """Check one relation of the Gamma algebra coefficient by coefficient.

    With ``sign`` unset the mixed relation Gamma_{a1+} Gamma_{a2-} against
    z * Gamma_{a2-} Gamma_{a1+} is checked, z = 1/(1 - x1 x2) for equal
    letters and 1 + x1 x2 otherwise. With ``sign`` set to '+' or '-' the
    same-sign relation Gamma_{a1,s} Gamma_{a2,s} = Gamma_{a2,s} Gamma_{a1,s}
    is checked. Only entries with |mu|, |nu| <= N - degree and terms of
    degree <= ``degree`` in x1 x2 are compared; there truncation is exact.
    The numeric values ``x1, x2`` are used for the convergence precondition.
    """
    x1, x2 = Fraction(x1), Fraction(x2)
    window = N - degree
    if window < 0:
        raise ValueError("degree exceeds truncation")
    if sign is None:
        if a1 == a2 and x1 * x2 >= 1:
            raise ValueError("need x1 x2 < 1 for equal letters")
        name = f"{a1}+ {a2}- vs {a2}- {a1}+"
        lhs = _matrix_entries((a1 + "+", a2 + "-"), N)
        rhs_raw = _matrix_entries((a2 + "-", a1 + "+"), N)
        # rhs has x2 on the left factor; swap exponent order to (x1, x2)
        rhs = {k: {(e1, e2): c for (e2, e1), c in v.items()} for k, v in rhs_raw.items()}
        rhs = {k: _poly_mul_series(v, a1 == a2, degree) for k, v in rhs.items()}
    else:
        name = f"{a1}{sign} {a2}{sign} vs {a2}{sign} {a1}{sign}"
        lhs = _matrix_entries((a1 + sign, a2 + sign), N)
        rhs_raw = _matrix_entries((a2 + sign, a1 + sign), N)
        rhs = {k: {(e1, e2): c for (e2, e1), c in v.items()} for k, v in rhs_raw.items()}
    report = CommutationReport(relation=name, window=window, degree=degree)
    keys = {k for k in set(lhs) | set(rhs) if size(k[0]) <= window and size(k[1]) <= window}
    for key in sorted(keys):
        mu, nu = key
        left = {e: c for e, c in lhs.get(key, {}).items() if _s_degree(mu, nu, *e) <= degree}
        right = {e: c for e, c in rhs.get(key, {}).items() if _s_degree(mu, nu, *e) <= degree}
        report.entries_checked += 1
        for e in set(left) | set(right):
            diff = abs(left.get(e, 0) - right.get(e, 0))
            if diff:
                report.failures.append((mu, nu, e, diff))
            report.max_discrepancy = max(report.max_discrepancy, diff)
    return report


@dataclass
class CauchyReport:
    series: Fraction
    truncated_target: Fraction
    dual_series: Fraction
    dual_target: Fraction

    @property
    def ok(self) -> bool:
        return self.series == self.truncated_target and self.dual_series == self.dual_target


def cauchy_truncated(x: Fraction, y: Fraction, N: int) -> CauchyReport:
    """Single-variable Cauchy identities, summing Schur functions over all
    partitions of size <= N (most of them vanish in one variable)."""
    x, y = Fraction(x), Fraction(y)
    series = Fraction(0)
    dual = Fraction(0)
    for lam in partitions_up_to(N):
        sx = skew_schur_jacobi_trudi(lam, EMPTY, x)
        if not sx:
            continue
        series += sx * skew_schur_jacobi_trudi(lam, EMPTY, y)
        dual += sx * skew_schur_jacobi_trudi(conjugate(lam), EMPTY, y)
    target = sum(((x * y) ** k for k in range(N + 1)), Fraction(0))
    dual_target = 1 + x * y if N >= 1 else Fraction(1)
    return CauchyReport(series, target, dual, dual_target)
