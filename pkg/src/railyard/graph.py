"""Finite rail-yard graphs and their pure dimer coverings.

A covering is stored as its sequence of interlacing partitions. Geometry
(edges, particles, heights) is derived on demand from that sequence.

Column ``i`` sits between partition ``i`` (left) and partition ``i + 1``
(right). Its type ``(a_i, b_i)`` fixes how the two partitions interlace:

    (L, -)   right < left          (L, +)   left < right
    (R, -)   right <' left         (R, +)   left <' right

where ``<'`` is interlacing of conjugates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .partitions import (
    EMPTY,
    Partition,
    conjugate,
    format_rational,
    interlaces,
    make_partition,
    parse_rational,
    size,
)


class SpecError(ValueError):
    """Raised for malformed specs or coverings."""


@dataclass(frozen=True)
class RailYardSpec:
    l: int
    r: int
    a: tuple[str, ...]
    b: tuple[str, ...]
    x: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n = self.r - self.l + 1
        if n < 1:
            raise SpecError(f"need l <= r, got l={self.l}, r={self.r}")
        for name in ("a", "b", "x"):
            if len(getattr(self, name)) != n:
                raise SpecError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        if any(v not in ("L", "R") for v in self.a):
            raise SpecError(f"LR word must use L/R: {self.a}")
        if any(v not in ("+", "-") for v in self.b):
            raise SpecError(f"sign word must use +/-: {self.b}")
        if any(v <= 0 for v in self.x):
            raise SpecError("weights must be positive")

    @property
    def columns(self) -> range:
        return range(self.l, self.r + 1)

    @property
    def n_columns(self) -> int:
        return self.r - self.l + 1

    def kind(self, i: int) -> str:
        """Column type as a two-character string such as 'L+'."""
        k = i - self.l
        return self.a[k] + self.b[k]

    def weight(self, i: int) -> Fraction:
        return self.x[i - self.l]

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "r": self.r,
            "a": list(self.a),
            "b": list(self.b),
            "x": [format_rational(v) for v in self.x],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RailYardSpec":
        try:
            return cls(
                l=int(data["l"]),
                r=int(data["r"]),
                a=tuple(data["a"]),
                b=tuple(data["b"]),
                x=tuple(parse_rational(v) for v in data["x"]),
            )
        except KeyError as exc:
            raise SpecError(f"missing field {exc}") from exc

    @classmethod
    def from_words(cls, a: str | Sequence[str], b: str | Sequence[str], x: Sequence, l: int = 0) -> "RailYardSpec":
        a, b = tuple(a), tuple(b)
        return cls(l=l, r=l + len(a) - 1, a=a, b=b, x=tuple(parse_rational(v) for v in x))


@dataclass
class ValidationReport:
    violations: list[tuple[int, int]] = field(default_factory=list)
    products: list[Fraction] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def contributing_pairs(spec: RailYardSpec) -> Iterator[tuple[int, int]]:
    """Pairs i < j with b_i = + and b_j = -; these are the factors of Z."""
    for i in spec.columns:
        if spec.b[i - spec.l] != "+":
            continue
        for j in range(i + 1, spec.r + 1):
            if spec.b[j - spec.l] == "-":
                yield i, j


def validate_spec(spec: RailYardSpec) -> ValidationReport:
    report = ValidationReport()
    for i, j in contributing_pairs(spec):
        if spec.a[i - spec.l] != spec.a[j - spec.l]:
            continue
        prod = spec.weight(i) * spec.weight(j)
        if prod >= 1:
            report.violations.append((i, j))
            report.products.append(prod)
    return report


@dataclass(frozen=True)
class DimerCovering:
    partitions: tuple[Partition, ...]

    def to_json(self) -> dict:
        return {"partitions": [list(p) for p in self.partitions]}

    @classmethod
    def from_json(cls, data: dict | list) -> "DimerCovering":
        # a bare list is the form printed by the sample command
        parts = data if isinstance(data, list) else data["partitions"]
        return cls(tuple(make_partition(p) for p in parts))

    def at(self, spec: RailYardSpec, m: int) -> Partition:
        """Partition attached to odd column 2m - 1, for m in [l .. r + 1]."""
        return self.partitions[m - spec.l]


def empty_covering(spec: RailYardSpec) -> DimerCovering:
    return DimerCovering((EMPTY,) * (spec.n_columns + 1))


def column_allows(kind: str, left: Partition, right: Partition) -> bool:
    """Whether ``left`` and ``right`` may flank a column of the given type."""
    if kind == "L-":
        return interlaces(right, left)
    if kind == "L+":
        return interlaces(left, right)
    if kind == "R-":
        return interlaces(right, left, dual=True)
    if kind == "R+":
        return interlaces(left, right, dual=True)
    raise SpecError(f"unknown column type {kind}")


def check_covering(spec: RailYardSpec, cover: DimerCovering) -> None:
    if len(cover.partitions) != spec.n_columns + 1:
        raise SpecError(f"covering has {len(cover.partitions)} partitions, expected {spec.n_columns + 1}")
    if cover.partitions[0] or cover.partitions[-1]:
        raise SpecError("boundary partitions must be empty")
    for i in spec.columns:
        k = i - spec.l
        if not column_allows(spec.kind(i), cover.partitions[k], cover.partitions[k + 1]):
            raise SpecError(f"column {i} ({spec.kind(i)}) violates interlacing")


def is_valid_covering(spec: RailYardSpec, cover: DimerCovering) -> bool:
    try:
        check_covering(spec, cover)
    except SpecError:
        return False
    return True


def column_exponents(spec: RailYardSpec, cover: DimerCovering) -> list[int]:
    parts = cover.partitions
    return [abs(size(parts[k + 1]) - size(parts[k])) for k in range(spec.n_columns)]


def covering_weight(spec: RailYardSpec, cover: DimerCovering) -> Fraction:
    check_covering(spec, cover)
    weight = Fraction(1)
    for xi, d in zip(spec.x, column_exponents(spec, cover)):
        weight *= xi**d
    return weight


def covering_weight_float(spec: RailYardSpec, cover: DimerCovering) -> float:
    w = 1.0
    for xi, d in zip(spec.x, column_exponents(spec, cover)):
        w *= float(xi) ** d
    return w


# ---------------------------------------------------------------------------
# geometry


def particle_set(lam: Partition, ylo: float) -> set[float]:
    """Particle ordinates lam_i - i + 1/2 that lie above ``ylo``."""
    out = set()
    i = 1
    while True:
        y = (lam[i - 1] if i <= len(lam) else 0) - i + 0.5
        if y < ylo:
            break
        out.add(y)
        i += 1
    return out


@dataclass
class EdgeConfiguration:
    """Present edges inside a horizontal window.

    Each edge is ``((x_odd, y_odd), (x_even, y_even))``. Vertex ordinates
    are half-integers strictly between ``ylo`` and ``yhi``.
    """

    l: int
    r: int
    ylo: int
    yhi: int
    edges: set[tuple[tuple[int, float], tuple[int, float]]]

    def ordinates(self) -> list[float]:
        return [k + 0.5 for k in range(self.ylo, self.yhi)]

    def to_csv_rows(self) -> list[tuple]:
        rows = sorted(self.edges)
        return [(xo, yo, xe, ye) for (xo, yo), (xe, ye) in rows]


def required_window(cover: DimerCovering) -> tuple[int, int]:
    top = max((p[0] for p in cover.partitions if p), default=0)
    depth = max((len(p) for p in cover.partitions), default=0)
    return -depth - 2, top + 2


def _pair_by_rank(left: list[float], right: list[float], what: str) -> list[tuple[float, float]]:
    if len(left) != len(right):
        raise SpecError(f"{what} counts differ across column ({len(left)} vs {len(right)})")
    return list(zip(sorted(left, reverse=True), sorted(right, reverse=True)))


def to_edge_configuration(spec: RailYardSpec, cover: DimerCovering, window: tuple[int, int] | None = None) -> EdgeConfiguration:
    """Realize a covering as a set of edges of the graph.

    Odd vertices carrying a hole are matched to the right, particles to the
    left. Inside a column the holes (L types) or particles (R types) of the
    two flanking odd columns pair up in order, and a pair whose ordinates
    differ by one is a diagonal edge.
    """
    check_covering(spec, cover)
    need_lo, need_hi = required_window(cover)
    ylo, yhi = window if window is not None else (need_lo, need_hi)
    if ylo > need_lo or yhi < need_hi:
        raise SpecError(f"window ({ylo},{yhi}) too small, need ({need_lo},{need_hi})")
    ys = [k + 0.5 for k in range(ylo, yhi)]
    parts = cover.partitions
    particles = [particle_set(p, ylo) for p in parts]
    holes = [set(ys) - ps for ps in particles]
    edges = set()
    for i in spec.columns:
        k = i - spec.l
        kind = spec.kind(i)
        xo_left, xe, xo_right = 2 * i - 1, 2 * i, 2 * i + 1
        if kind[0] == "L":
            used = set()
            for hl, hr in _pair_by_rank(sorted(holes[k]), sorted(holes[k + 1]), "hole"):
                shift = hl - hr
                expected = 1 if kind == "L+" else -1
                if shift not in (0, expected):
                    raise SpecError(f"column {i}: hole shift {shift} not allowed")
                edges.add(((xo_left, hl), (xe, hr)))
                used.add(hr)
            for y in ys:
                if y not in used:
                    edges.add(((xo_right, y), (xe, y)))
        else:
            used = set()
            for pl, pr in _pair_by_rank(sorted(particles[k]), sorted(particles[k + 1]), "particle"):
                shift = pr - pl
                expected = 1 if kind == "R+" else -1
                if shift not in (0, expected):
                    raise SpecError(f"column {i}: particle shift {shift} not allowed")
                edges.add(((xo_right, pr), (xe, pl)))
                used.add(pl)
            for y in ys:
                if y not in used:
                    edges.add(((xo_left, y), (xe, y)))
    return EdgeConfiguration(spec.l, spec.r, ylo, yhi, edges)


def check_edge_configuration(config: EdgeConfiguration) -> None:
    """Every inner vertex in the window is covered exactly once.

    Rows next to the window edge may lose a diagonal partner to the outside,
    so only rows one unit inside the window are checked.
    """
    counts: dict[tuple[int, float], int] = {}
    for odd, even in config.edges:
        counts[odd] = counts.get(odd, 0) + 1
        counts[even] = counts.get(even, 0) + 1
    for y in config.ordinates()[1:-1]:
        for xv in range(2 * config.l - 1, 2 * config.r + 2):
            c = counts.get((xv, y), 0)
            if xv == 2 * config.l - 1:
                want = 1 if y > 0 else 0
            elif xv == 2 * config.r + 1:
                want = 1 if y < 0 else 0
            else:
                want = 1
            if c != want:
                raise SpecError(f"vertex ({xv},{y}) covered {c} times, expected {want}")


def odd_column_states(config: EdgeConfiguration, m: int) -> dict[float, str]:
    """Read 'particle' or 'hole' for each odd vertex of column 2m - 1."""
    xo = 2 * m - 1
    right = {odd[1] for odd, even in config.edges if odd[0] == xo and even[0] == xo + 1}
    left = {odd[1] for odd, even in config.edges if odd[0] == xo and even[0] == xo - 1}
    # unmatched boundary vertices: particles on the left edge, holes on the right
    default = "particle" if xo == 2 * config.l - 1 else "hole"
    states = {}
    for y in config.ordinates():
        if y in right:
            states[y] = "hole"
        elif y in left:
            states[y] = "particle"
        else:
            states[y] = default
    return states


def charge(config: EdgeConfiguration, m: int) -> int:
    """Particles above the axis minus holes below it, on column 2m - 1."""
    states = odd_column_states(config, m)
    above = sum(1 for y, s in states.items() if y > 0 and s == "particle")
    below = sum(1 for y, s in states.items() if y < 0 and s == "hole")
    return above - below


def partition_from_edges(config: EdgeConfiguration, m: int) -> Partition:
    states = odd_column_states(config, m)
    c = charge(config, m)
    ordered = sorted((y for y, s in states.items() if s == "particle"), reverse=True)
    parts = []
    for i, y in enumerate(ordered, start=1):
        value = y - c + i - 0.5
        if value <= 0:
            break
        parts.append(int(round(value)))
    return make_partition(parts)


def covering_from_edges(spec: RailYardSpec, config: EdgeConfiguration) -> DimerCovering:
    return DimerCovering(tuple(partition_from_edges(config, m) for m in range(spec.l, spec.r + 2)))


def edge_height(config: EdgeConfiguration, m: int, y: float) -> int:
    """Height at (2m - 1/2, y) by counting present edges crossed below y.

    Every present edge of odd column 2m - 1 that leaves to the right
    crosses the line; a diagonal one crosses at the midpoint ordinate.
    """
    xo = 2 * m - 1
    count = 0
    for odd, even in config.edges:
        if odd[0] == xo and even[0] == xo + 1:
            if (odd[1] + even[1]) / 2 < y:
                count += 1
    return 2 * count


# ---------------------------------------------------------------------------
# heights from partitions


def _column_partition(spec: RailYardSpec, cover: DimerCovering, m: int, side: str) -> Partition:
    if side in ("left", "left-of-column"):
        return cover.at(spec, m)
    if side in ("right", "right-of-column"):
        return cover.at(spec, m + 1)
    raise SpecError(f"side must be left or right, got {side}")


def height_at(spec: RailYardSpec, cover: DimerCovering, m: int, y: float, side: str = "left") -> int:
    """Lattice height 2 * #{holes below y} on the odd column next to the line.

    ``side='left'`` is the line x = 2m - 1/2 (partition m), ``side='right'``
    is x = 2m + 1/2 (partition m + 1). Zero below -l(lambda).
    """
    lam = _column_partition(spec, cover, m, side)
    floor_y = -len(lam)
    if y <= floor_y:
        return 0
    parts = set(particle_set(lam, floor_y - 1))
    count = 0
    k = floor_y
    while k + 0.5 < y:
        if k + 0.5 not in parts:
            count += 1
        k += 1
    return 2 * count


def height_profile(lam: Partition) -> tuple[list[float], list[float]]:
    """Breakpoints and values of the piecewise-linear height of one column.

    Particles occupy unit cells [Y - 1/2, Y + 1/2]; the height has slope 2
    off those cells and 0 on them, starting from 0 at -l(lam). Beyond the
    last breakpoint the slope is 2. Agrees with the lattice height at
    integer ordinates.
    """
    ys = [float(-len(lam))]
    hs = [0.0]
    cells = sorted(((p - i), (p - i + 1)) for i, p in enumerate(lam, start=1))
    y, h = ys[0], 0.0
    for lo, hi in cells:
        if lo > y:
            h += 2 * (lo - y)
            ys.append(float(lo))
            hs.append(h)
        ys.append(float(hi))
        hs.append(h)
        y = hi
    return ys, hs


def height_linear(lam: Partition, y: float) -> float:
    ys, hs = height_profile(lam)
    if y <= ys[0]:
        return 0.0
    for k in range(1, len(ys)):
        if y <= ys[k]:
            y0, y1, h0, h1 = ys[k - 1], ys[k], hs[k - 1], hs[k]
            return h0 + (h1 - h0) * (y - y0) / (y1 - y0)
    return hs[-1] + 2 * (y - ys[-1])


def height_transform(lam: Partition, k: int, t: float) -> float:
    """Quadrature of height_linear(lam, y) * t^(k y) over the real line.

    Each linear piece is integrated separately with scipy's quad, so the
    kinks of the height never sit inside an integration interval.
    """
    from scipy.integrate import quad

    if not 0 < t < 1 or k < 1:
        raise ValueError("need 0 < t < 1 and k >= 1")
    rate = k * math.log(t)
    ys, _ = height_profile(lam)
    edges = [*ys, math.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda y: height_linear(lam, y) * math.exp(rate * y), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


# ---------------------------------------------------------------------------
# flips


@dataclass(frozen=True)
class FlipMove:
    index: int  # position in the partition sequence (1 .. n_columns - 1)
    row: int  # 0-based row of the box
    delta: int  # +1 adds a box, -1 removes one


def _neighbors_ok(spec: RailYardSpec, parts: Sequence[Partition], k: int, new: Partition) -> bool:
    left_col = spec.l + k - 1
    right_col = spec.l + k
    return column_allows(spec.kind(left_col), parts[k - 1], new) and column_allows(spec.kind(right_col), new, parts[k + 1])


def _with_box(lam: Partition, row: int, delta: int) -> Partition | None:
    parts = list(lam) + [0]
    if row >= len(parts):
        return None
    value = parts[row] + delta
    if value < 0:
        return None
    if row > 0 and value > parts[row - 1]:
        return None
    if row + 1 < len(parts) and value < parts[row + 1]:
        return None
    parts[row] = value
    return tuple(p for p in parts if p > 0)


def flip_moves(spec: RailYardSpec, cover: DimerCovering, budget: int | None = None) -> list[FlipMove]:
    """Single-box moves on interior partitions that keep the covering legal."""
    moves = []
    parts = cover.partitions
    for k in range(1, spec.n_columns):
        lam = parts[k]
        for row in range(len(lam) + 1):
            for delta in (1, -1):
                new = _with_box(lam, row, delta)
                if new is None:
                    continue
                if budget is not None and size(new) > budget:
                    continue
                if _neighbors_ok(spec, parts, k, new):
                    moves.append(FlipMove(k, row, delta))
    return moves


def apply_flip(spec: RailYardSpec, cover: DimerCovering, move: FlipMove) -> DimerCovering:
    parts = cover.partitions
    k = move.index
    if not 1 <= k < spec.n_columns:
        raise SpecError(f"flip index {k} is not interior")
    new = _with_box(parts[k], move.row, move.delta)
    if new is None or not _neighbors_ok(spec, parts, k, new):
        raise SpecError(f"illegal flip {move}")
    return DimerCovering(parts[:k] + (new,) + parts[k + 1 :])


def flip_weight_ratio(spec: RailYardSpec, cover: DimerCovering, move: FlipMove) -> Fraction:
    """w(M') / w(M) for a legal move, a product of x^{+-1} factors."""
    parts = cover.partitions
    k = move.index
    ratio = Fraction(1)
    old = size(parts[k])
    new = old + move.delta
    for col_k, other in ((k - 1, parts[k - 1]), (k, parts[k + 1])):
        before = abs(old - size(other))
        after = abs(new - size(other))
        ratio *= spec.x[col_k] ** (after - before)
    return ratio


def conjugate_sequence(cover: DimerCovering) -> DimerCovering:
    return DimerCovering(tuple(conjugate(p) for p in cover.partitions))
