"""Scaling-limit layer: limit factors, roots, density, height, frozen boundary, GFF.

Conventions. ``G_chi(w)`` is the product of the four limit factors, each a
ratio of linear terms. Points where a factor of the "<" kind has a pole form
the set ``R_lt``; the Laplace and GFF contours enclose 0 and ``R_lt``. With
this choice the density in the liquid region is ``2 arg(w_plus) / pi`` and it
rises from 0 (below the support) to 2 (above it).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import linear_sum_assignment

from .contour import Circle, ContourError, integrate_contour, integrate_double


class AsymptoticError(RuntimeError):
    pass


class RootCountError(AsymptoticError):
    """More than one conjugate pair: the interleaving assumptions fail."""


@dataclass(frozen=True)
class AsymptoticSpec:
    """Periodic scaling data.

    ``b_seg[p][j]`` is the sign of residue class ``j + 1`` inside segment
    ``(V[p], V[p + 1])``; the outer index runs over segments.
    """

    n: int
    V: tuple[float, ...]
    tau: tuple[float, ...]
    a_res: tuple[str, ...]
    b_seg: tuple[tuple[str, ...], ...]
    beta: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "V", tuple(float(v) for v in self.V))
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        object.__setattr__(self, "a_res", tuple(self.a_res))
        object.__setattr__(self, "b_seg", tuple(tuple(row) for row in self.b_seg))
        if self.n < 1:
            raise ValueError("period n must be positive")
        if any(self.V[i] >= self.V[i + 1] for i in range(len(self.V) - 1)) or len(self.V) < 2:
            raise ValueError("V must be strictly increasing with at least two entries")
        if len(self.tau) != self.n or any(t <= 0 for t in self.tau):
            raise ValueError("tau needs n positive entries")
        if len(self.a_res) != self.n or any(a not in "LR" for a in self.a_res):
            raise ValueError("a_res needs n letters from {L, R}")
        if len(self.b_seg) != self.m or any(len(row) != self.n or any(b not in "+-" for b in row) for row in self.b_seg):
            raise ValueError("b_seg needs m rows of n signs")
        if self.beta <= 0 or int(self.beta) != self.beta:
            raise ValueError("beta must be a positive integer")

    @property
    def m(self) -> int:
        return len(self.V) - 1

    def segment_of(self, chi: float) -> int:
        """1-based segment p with V[p-1] < chi < V[p]."""
        for p in range(1, self.m + 1):
            if self.V[p - 1] < chi < self.V[p]:
                return p
        raise ValueError(f"chi={chi} is outside (V_0, V_m) or on a breakpoint")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "V": list(self.V),
            "tau": list(self.tau),
            "a_res": list(self.a_res),
            "b_seg": [list(row) for row in self.b_seg],
            "beta": self.beta,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AsymptoticSpec":
        if "m" in data and int(data["m"]) != len(data["V"]) - 1:
            raise ValueError(f"m={data['m']} does not match {len(data['V'])} breakpoints")
        return cls(
            n=int(data["n"]),
            V=tuple(data["V"]),
            tau=tuple(data["tau"]),
            a_res=tuple(data["a_res"]),
            b_seg=tuple(tuple(row) for row in data["b_seg"]),
            beta=int(data.get("beta", 1)),
        )


# ---------------------------------------------------------------------------
# limit factors


@dataclass(frozen=True)
class LimitFactor:
    """One factor ``const * (w - zero) / (w - pole)``."""

    family: str  # "1>", "1<", "0>", "0<"
    residue: int
    segment: int
    const: float
    zero: float
    pole: float

    def __call__(self, w):
        return self.const * (w - self.zero) / (w - self.pole)


def _check_chi(spec: AsymptoticSpec, chi: float) -> None:
    if not spec.V[0] < chi < spec.V[-1] or chi in spec.V:
        raise ValueError(f"chi={chi} must lie in (V_0, V_m) away from the breakpoints")


def limit_factors(spec: AsymptoticSpec, chi: float) -> list[LimitFactor]:
    _check_chi(spec, chi)
    out: list[LimitFactor] = []
    V = spec.V
    for p in range(1, spec.m + 1):
        lo, hi = V[p - 1], V[p]
        for j in range(spec.n):
            a, b = spec.a_res[j], spec.b_seg[p - 1][j]
            tj = spec.tau[j]
            if hi > chi and b == "-":
                top = max(lo, chi)
                if a == "L":
                    out.append(LimitFactor("1>", j + 1, p, 1.0, math.exp(hi) / tj, math.exp(top) / tj))
                else:
                    out.append(LimitFactor("0>", j + 1, p, 1.0, -math.exp(top) / tj, -math.exp(hi) / tj))
            if lo < chi and b == "+":
                bot = min(hi, chi)
                if a == "L":
                    out.append(LimitFactor("1<", j + 1, p, math.exp(bot - lo), math.exp(lo) / tj, math.exp(bot) / tj))
                else:
                    out.append(LimitFactor("0<", j + 1, p, math.exp(lo - bot), -math.exp(bot) / tj, -math.exp(lo) / tj))
    return out


@dataclass
class GValues:
    g1_gt: complex
    g1_lt: complex
    g0_gt: complex
    g0_lt: complex

    @property
    def total(self) -> complex:
        return self.g1_gt * self.g1_lt * self.g0_gt * self.g0_lt


def g_chi(spec: AsymptoticSpec, chi: float, w: complex) -> GValues:
    """The four limit factors evaluated in their displayed form.

    This path does not use ``limit_factors`` and serves as its cross-check.
    """
    _check_chi(spec, chi)
    w = complex(w)
    if w == 0:
        raise AsymptoticError("w = 0 is not allowed in the displayed form")
    V = spec.V
    vals = {"1>": 1 + 0j, "1<": 1 + 0j, "0>": 1 + 0j, "0<": 1 + 0j}
    for p in range(1, spec.m + 1):
        lo, hi = V[p - 1], V[p]
        for j in range(spec.n):
            a, b = spec.a_res[j], spec.b_seg[p - 1][j]
            tj = spec.tau[j]
            if hi > chi and b == "-":
                top = max(lo, chi)
                if a == "L":
                    num, den, key = 1 - math.exp(hi) / (w * tj), 1 - math.exp(top) / (w * tj), "1>"
                else:
                    num, den, key = 1 + math.exp(top) / (w * tj), 1 + math.exp(hi) / (w * tj), "0>"
            elif lo < chi and b == "+":
                bot = min(hi, chi)
                if a == "L":
                    num, den, key = 1 - w * math.exp(-lo) * tj, 1 - math.exp(-bot) * w * tj, "1<"
                else:
                    num, den, key = 1 + math.exp(-bot) * w * tj, 1 + w * math.exp(-lo) * tj, "0<"
            else:
                continue
            if den == 0:
                raise AsymptoticError(f"pole of factor {key} (residue {j + 1}, segment {p}) at w={w}")
            vals[key] *= num / den
    return GValues(vals["1>"], vals["1<"], vals["0>"], vals["0<"])


@dataclass
class PoleZeroSets:
    sets: dict[tuple[int, int], list[float]]
    R: list[float]
    R_lt: list[float]


def _minus(a: Sequence[float], b: Sequence[float], tol: float = 1e-12) -> list[float]:
    out = []
    pool = list(b)
    for x in a:
        hit = next((k for k, y in enumerate(pool) if abs(x - y) <= tol * max(1.0, abs(x))), None)
        if hit is None:
            out.append(x)
        else:
            pool.pop(hit)
    return out


def pole_zero_sets(spec: AsymptoticSpec, chi: float) -> PoleZeroSets:
    """Denominator (``(i, 1)``) and numerator (``(i, 2)``) roots of each family.

    Family indices: 1 = "1>", 2 = "1<", 3 = "0>", 4 = "0<". ``R`` collects
    the uncancelled poles of families 1 and 3, ``R_lt`` those of 2 and 4.
    """
    index = {"1>": 1, "1<": 2, "0>": 3, "0<": 4}
    sets: dict[tuple[int, int], list[float]] = {(i, k): [] for i in range(1, 5) for k in (1, 2)}
    for f in limit_factors(spec, chi):
        i = index[f.family]
        sets[(i, 1)].append(f.pole)
        sets[(i, 2)].append(f.zero)
    R = _minus(sets[(1, 1)], sets[(1, 2)]) + _minus(sets[(3, 1)], sets[(3, 2)])
    R_lt = _minus(sets[(2, 1)], sets[(2, 2)]) + _minus(sets[(4, 1)], sets[(4, 2)])
    return PoleZeroSets(sets, sorted(R), sorted(R_lt))


# ---------------------------------------------------------------------------
# rational form


@dataclass(frozen=True)
class RationalG:
    """``const * prod(w - zeros) / prod(w - poles)`` after cancellation."""

    const: float
    zeros: tuple[float, ...]
    poles: tuple[float, ...]

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.full(w.shape, self.const, dtype=complex)
        for z in self.zeros:
            out = out * (w - z)
        for p in self.poles:
            out = out / (w - p)
        return out if out.shape else complex(out)

    def log_derivative(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape, dtype=complex)
        for z in self.zeros:
            out = out + 1 / (w - z)
        for p in self.poles:
            out = out - 1 / (w - p)
        return out if out.shape else complex(out)

    @cached_property
    def _num(self) -> np.ndarray:
        return self.const * np.poly(self.zeros) if self.zeros else np.array([self.const])

    @cached_property
    def _den(self) -> np.ndarray:
        return np.poly(self.poles) if self.poles else np.array([1.0])

    def numerator(self) -> np.ndarray:
        return self._num

    def denominator(self) -> np.ndarray:
        return self._den

    def at_zero(self) -> float:
        return float(self(0.0).real)

    def critical_points(self) -> np.ndarray:
        num, den = self.numerator(), self.denominator()
        poly = np.polysub(np.polymul(np.polyder(num), den), np.polymul(num, np.polyder(den)))
        poly = np.trim_zeros(poly, "f")
        if len(poly) < 2:
            return np.array([])
        return np.roots(poly)


def rational_g(spec: AsymptoticSpec, chi: float) -> RationalG:
    factors = limit_factors(spec, chi)
    const = math.prod(f.const for f in factors)
    zeros = [f.zero for f in factors]
    poles = [f.pole for f in factors]
    zeros_left = _minus(zeros, poles)
    poles_left = _minus(poles, zeros)
    return RationalG(const, tuple(sorted(zeros_left)), tuple(sorted(poles_left)))


_rational_cached = lru_cache(maxsize=4096)(rational_g)


# ---------------------------------------------------------------------------
# roots of G_chi(w) = e^{-n kappa}


@dataclass
class RootClassification:
    all_roots: list[complex]
    real_roots: list[float]
    conjugate_pair: tuple[complex, complex] | None
    region: str
    max_residual: float


def _polish(poly: np.ndarray, roots: np.ndarray, steps: int = 2) -> np.ndarray:
    """Newton steps on all roots at once; a step is kept only if it helps."""
    d = np.polyder(poly)
    r = roots.astype(complex)
    for _ in range(steps):
        pv, dv = np.polyval(poly, r), np.polyval(d, r)
        ok = dv != 0
        step = np.where(ok, pv / np.where(ok, dv, 1), 0)
        cand = r - step
        better = np.abs(np.polyval(poly, cand)) <= np.abs(pv)
        r = np.where(better, cand, r)
    return r


def _roots_of_level(rg: RationalG, y: complex, polish: bool = True) -> np.ndarray:
    num, den = rg.numerator(), rg.denominator()
    k = max(len(num), len(den))
    num = np.concatenate([np.zeros(k - len(num)), num])
    den = np.concatenate([np.zeros(k - len(den)), den])
    poly = np.trim_zeros(num - y * den, "f")
    if len(poly) < 2:
        return np.array([], dtype=complex)
    roots = np.roots(poly)
    if not polish:
        return roots
    return _polish(poly, roots)


def solve_roots(spec: AsymptoticSpec, chi: float, kappa: float, imag_tol: float = 1e-9, residual_tol: float = 1e-8) -> RootClassification:
    """All roots of G_chi(w) = e^{-n kappa}, classified as real or one conjugate pair."""
    rg = _rational_cached(spec, chi)
    y = math.exp(-spec.n * kappa)
    roots = _roots_of_level(rg, y)
    real, nonreal = [], []
    for r in roots:
        (real if abs(r.imag) <= imag_tol * (1 + abs(r)) else nonreal).append(r)
    residual = 0.0
    if len(roots):
        g = np.atleast_1d(rg(roots))
        residual = float(np.max(np.abs(g - y) / np.maximum(np.maximum(1.0, y), np.abs(g))))
    if residual > residual_tol:
        raise AsymptoticError(f"root residual {residual:.3g} exceeds {residual_tol}")
    upper = [r for r in nonreal if r.imag > 0]
    if len(upper) > 1:
        raise RootCountError(f"{len(upper)} conjugate pairs at chi={chi}, kappa={kappa}; run check_assumptions")
    pair = (upper[0], upper[0].conjugate()) if upper else None
    region = "liquid" if pair else "frozen"
    if pair is None and _has_double_real_root(real):
        region = "boundary"
    return RootClassification(list(roots), sorted(r.real for r in real), pair, region, residual)


def _has_double_real_root(real: Sequence[complex], tol: float = 1e-7) -> bool:
    xs = sorted(r.real for r in real)
    return any(abs(xs[i + 1] - xs[i]) <= tol * (1 + abs(xs[i])) for i in range(len(xs) - 1))


def w_plus(spec: AsymptoticSpec, chi: float, kappa: float) -> complex:
    cls = solve_roots(spec, chi, kappa)
    if cls.conjugate_pair is None:
        raise AsymptoticError(f"({chi}, {kappa}) is not in the liquid region")
    return cls.conjugate_pair[0]


# ---------------------------------------------------------------------------
# density


def tracked_density(spec: AsymptoticSpec, chi: float, kappa: float, eta_min: float = 1e-14) -> float:
    """Density from the root-tracking formula, valid in every region.

    rho = 2 * 1[G(0) > y] - (2 / pi) * sum over xi in R_lt of the change in
    arg w_xi(z) as z moves from y + i*inf down to y + i0, where w_xi(z) is
    the root of G = z that tends to xi for large z and y = e^{-n kappa}.
    """
    rg = _rational_cached(spec, chi)
    y = math.exp(-spec.n * kappa)
    g0 = rg.at_zero()
    if g0 > 0:
        # near the level of G(0) a root passes through w = 0 and its argument is
        # ill-conditioned; interpolate between points a safe distance away
        k0 = -math.log(g0) / spec.n
        h = 1e-7
        if abs(kappa - k0) < h:
            lo = tracked_density(spec, chi, k0 - h, eta_min)
            hi = tracked_density(spec, chi, k0 + h, eta_min)
            return lo + (hi - lo) * (kappa - k0 + h) / (2 * h)
    sets = pole_zero_sets(spec, chi)
    targets = [p for p in rg.poles if any(abs(p - q) <= 1e-12 * max(1, abs(p)) for q in sets.R_lt)]
    if not targets:
        return 2.0 if rg.at_zero() > y else 0.0
    scale = max(1.0, y, abs(rg.const)) * 1e6
    poles = np.array(rg.poles, dtype=complex)
    z = complex(y, scale)
    roots = _roots_of_level(rg, z)
    cost = np.abs(roots[:, None] - poles[None, :])
    ri, ci = linear_sum_assignment(cost)
    owner = {int(c): int(r) for r, c in zip(ri, ci)}
    tracked_idx = [owner[k] for k, p in enumerate(rg.poles) if p in targets]
    current = roots
    # count the change of argument from xi itself, not from the start of the path
    total_arg = np.array([cmath.phase(roots[k] / rg.poles[c]) for c, k in ((c, owner[c]) for c, p in enumerate(rg.poles) if p in targets)])
    # walk down the vertical line; halve the step in log(eta) whenever the
    # matching is ambiguous (a root moves more than a third of the gap)
    # stop well below the distance of the smallest root from 0, which scales with |G(0) - y|
    log_eta, log_end = math.log(scale), math.log(eta_min * max(1.0, y) * min(1.0, abs(g0 - y) / max(1.0, y)))
    step = 0.25
    while log_eta > log_end:
        trial = max(log_eta - step, log_end)
        nxt = _roots_of_level(rg, complex(y, math.exp(trial)), polish=False)
        cost = np.abs(current[:, None] - nxt[None, :])
        r_idx, c_idx = linear_sum_assignment(cost)
        perm = np.empty(len(current), dtype=int)
        perm[r_idx] = c_idx
        nxt = nxt[perm]
        moved = np.abs(nxt - current)
        gaps = np.abs(current[:, None] - current[None, :])
        np.fill_diagonal(gaps, np.inf)
        if np.any(moved > gaps.min(axis=1) / 3) and step > 1e-6:
            step /= 2
            continue
        for slot, k in enumerate(tracked_idx):
            total_arg[slot] += cmath.phase(nxt[k] / current[k])
        current = nxt
        log_eta = trial
        step = min(step * 1.5, 1.0)
    indicator = 2.0 if rg.at_zero() > y else 0.0
    return indicator - 2.0 / math.pi * float(np.sum(total_arg))


def density(spec: AsymptoticSpec, chi: float, kappa: float) -> float:
    """Slope of the limit height in kappa: 2 arg(w_plus)/pi when liquid,
    otherwise the frozen value (0 or 2) of the enclosing kappa interval."""
    cls = solve_roots(spec, chi, kappa)
    if cls.conjugate_pair is not None:
        return 2.0 * cmath.phase(cls.conjugate_pair[0]) / math.pi
    st = kappa_structure(spec, chi)
    slot = sum(1 for b in st.breaks if b < kappa)
    if st.kinds[slot] == "frozen":
        return st.frozen_values[slot]
    # liquid interval but no pair: kappa sits on the boundary up to rounding
    return 2.0 if tracked_density(spec, chi, kappa) > 1.0 else 0.0


@dataclass
class KappaStructure:
    """Breakpoints in kappa for fixed chi and the behaviour in between."""

    chi: float
    breaks: list[float]
    kinds: list[str]  # one per interval (len(breaks) + 1): "liquid" or "frozen"
    frozen_values: list[float | None]


@lru_cache(maxsize=512)
def kappa_structure(spec: AsymptoticSpec, chi: float) -> KappaStructure:
    rg = _rational_cached(spec, chi)
    levels = []
    for c in rg.critical_points():
        if abs(c.imag) <= 1e-9 * (1 + abs(c)):
            g = rg(c.real).real
            if g > 0 and math.isfinite(g):
                levels.append(-math.log(g) / spec.n)
    g0 = rg.at_zero()
    if g0 > 0:
        levels.append(-math.log(g0) / spec.n)
    breaks = sorted(set(round(k, 14) for k in levels))
    merged: list[float] = []
    for b in breaks:
        if not merged or b - merged[-1] > 1e-10:
            merged.append(b)
    kinds, values = [], []
    probes = _interval_probes(merged)
    for kappa in probes:
        cls = solve_roots(spec, chi, kappa)
        if cls.conjugate_pair is not None:
            kinds.append("liquid")
            values.append(None)
        else:
            v = tracked_density(spec, chi, kappa)
            if min(abs(v), abs(v - 2)) > 1e-6:
                raise AsymptoticError(f"frozen density {v} is not 0 or 2 at chi={chi}, kappa={kappa}")
            kinds.append("frozen")
            values.append(0.0 if abs(v) < 1 else 2.0)
    return KappaStructure(chi, merged, kinds, values)


def _interval_probes(breaks: Sequence[float]) -> list[float]:
    if not breaks:
        return [0.0]
    probes = [breaks[0] - 1.0]
    probes += [0.5 * (breaks[i] + breaks[i + 1]) for i in range(len(breaks) - 1)]
    probes.append(breaks[-1] + 1.0)
    return probes


def liquid_intervals(spec: AsymptoticSpec, chi: float) -> list[tuple[float, float]]:
    st = kappa_structure(spec, chi)
    edges = [-math.inf, *st.breaks, math.inf]
    return [(edges[i], edges[i + 1]) for i, kind in enumerate(st.kinds) if kind == "liquid"]


def _segment_integral(spec: AsymptoticSpec, chi: float, a: float, b: float, kind: str, value: float | None, weight=None) -> float:
    if b <= a:
        return 0.0
    if kind == "frozen":
        if weight is None:
            return value * (b - a)
        return value * weight(a, b)
    f = (lambda k: density(spec, chi, k)) if weight is None else (lambda k: density(spec, chi, k) * weight.density(k))
    result, _ = quad(f, a, b, limit=200, epsabs=1e-12, epsrel=1e-10)
    return result


def limit_height(spec: AsymptoticSpec, chi: float, kappa: float) -> float:
    """Integral of the density from below the support up to kappa."""
    st = kappa_structure(spec, chi)
    edges = [-math.inf, *st.breaks, math.inf]
    if st.kinds[0] != "frozen" or st.frozen_values[0] != 0.0:
        raise AsymptoticError("density does not vanish below the support")
    total = 0.0
    for i, kind in enumerate(st.kinds):
        a, b = edges[i], min(edges[i + 1], kappa)
        if i == 0 or b <= a:
            continue
        total += _segment_integral(spec, chi, a, b, kind, st.frozen_values[i])
    return total


def limit_height_profile(spec: AsymptoticSpec, chi: float, kappas: Sequence[float]) -> np.ndarray:
    """limit_height at increasing kappas, integrating each stretch once."""
    ks = np.asarray(kappas, dtype=float)
    if np.any(np.diff(ks) < 0):
        raise ValueError("kappas must be nondecreasing")
    st = kappa_structure(spec, chi)
    if st.kinds[0] != "frozen" or st.frozen_values[0] != 0.0:
        raise AsymptoticError("density does not vanish below the support")
    edges = [-math.inf, *st.breaks, math.inf]
    out = np.zeros(len(ks))
    total, pos = 0.0, -math.inf  # height accumulated up to pos
    for n_k, target in enumerate(ks):
        while pos < target:
            slot = sum(1 for b in st.breaks if b <= pos) if math.isfinite(pos) else 0
            stop = min(edges[slot + 1], target)
            if slot > 0:
                total += _segment_integral(spec, chi, pos, stop, st.kinds[slot], st.frozen_values[slot])
            pos = stop
        out[n_k] = total
    return out


# ---------------------------------------------------------------------------
# Laplace identity


def _small_circles(points: Sequence[complex], avoid: Sequence[complex], scale: float = 0.4) -> list[Circle]:
    pts = list(dict.fromkeys(complex(p) for p in points))
    circles = []
    for p in pts:
        others = [abs(p - q) for q in [*pts, *avoid] if abs(p - q) > 1e-14]
        r = scale * min(others) if others else 1.0
        circles.append(Circle(p, r))
    return circles


def contour_moment(spec: AsymptoticSpec, chi: float, alpha: int, scale: float = 0.4) -> complex:
    """(1/2 pi i) * integral of G_chi(w)^alpha dw / w around 0 and R_lt."""
    rg = _rational_cached(spec, chi)
    sets = pole_zero_sets(spec, chi)
    inside = [0.0, *[p for p in rg.poles if p in sets.R_lt]]
    outside = [p for p in rg.poles if p not in inside]
    circles = _small_circles(inside, outside, scale)
    return integrate_contour(lambda w: rg(w) ** alpha / w, circles, tol=1e-13).value


@dataclass
class LaplaceReport:
    chi: float
    alpha: int
    integral_side: float
    contour_side: complex
    relative_gap: float

    @property
    def ok(self) -> bool:
        return self.relative_gap < 1e-3


def laplace_check(spec: AsymptoticSpec, chi: float, alpha: int) -> LaplaceReport:
    """Compare int e^{-n alpha kappa} H d kappa with 2/(n alpha)^2 times the contour moment."""
    if alpha <= 0 or int(alpha) != alpha:
        raise ValueError("alpha must be a positive integer")
    n = spec.n
    rate = n * alpha
    st = kappa_structure(spec, chi)
    edges = [-math.inf, *st.breaks, math.inf]
    # int e^{-rate k} H dk = (1/rate) int e^{-rate k} rho dk (H vanishes below the support)
    total = 0.0
    for i, kind in enumerate(st.kinds):
        a, b = edges[i], edges[i + 1]
        if kind == "frozen":
            v = st.frozen_values[i]
            if v == 0.0:
                continue
            if a == -math.inf:
                raise AsymptoticError("density does not vanish below the support")
            hi_term = 0.0 if b == math.inf else math.exp(-rate * b)
            total += v * (math.exp(-rate * a) - hi_term) / rate
        else:
            val, _ = quad(lambda k: math.exp(-rate * k) * density(spec, chi, k), a, b, limit=200, epsabs=1e-13, epsrel=1e-11)
            total += val
    integral_side = total / rate
    contour = 2.0 / rate**2 * contour_moment(spec, chi, alpha)
    gap = abs(integral_side - contour) / max(abs(contour), 1e-300)
    return LaplaceReport(chi, alpha, integral_side, contour, gap)


# ---------------------------------------------------------------------------
# U / R decomposition and the frozen boundary


def u_chi(spec: AsymptoticSpec, chi: float, w):
    w = np.asarray(w, dtype=complex)
    out = np.ones(w.shape, dtype=complex)
    for j in range(spec.n):
        tj = spec.tau[j]
        if spec.a_res[j] == "R":
            out = out * (1 + math.exp(-chi) * w * tj)
        else:
            out = out / (1 - math.exp(-chi) * w * tj)
    return out if out.shape else complex(out)


def _b(spec: AsymptoticSpec, j: int, lo: int, hi: int) -> str:
    """Sign of residue j on segment (V_lo, V_hi); outside conventions apply."""
    if hi <= 0:
        return "-"
    if lo >= spec.m:
        return "+"
    return spec.b_seg[lo][j]


def r_of_w(spec: AsymptoticSpec, w):
    """The chi-independent part R(w) = A_1 * A_2."""
    w = np.asarray(w, dtype=complex)
    out = np.ones(w.shape, dtype=complex)
    V, m = spec.V, spec.m
    for j in range(spec.n):
        tj = spec.tau[j]
        plus01 = spec.b_seg[0][j] == "+"
        minus_last = spec.b_seg[m - 1][j] == "-"
        if spec.a_res[j] == "L":
            term = lambda v: 1 - math.exp(-v) * w * tj
            sign = -1
        else:
            term = lambda v: 1 + math.exp(-v) * w * tj
            sign = 1
        if plus01:
            out = out * term(V[0]) ** sign
        if minus_last:
            out = out * term(V[m]) ** sign
        for p in range(1, m):
            e = int(spec.b_seg[p][j] == "+") - int(spec.b_seg[p - 1][j] == "+")
            if e:
                out = out * term(V[p]) ** (sign * e)
    return out if out.shape else complex(out)


def f_of_s(spec: AsymptoticSpec, s):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    for j in range(spec.n):
        tj = spec.tau[j]
        if spec.a_res[j] == "L":
            out = out + 1 / (1 - s / tj)
        else:
            out = out - 1 / (1 + s / tj)
    return out if out.shape else float(out)


def g_of_w(spec: AsymptoticSpec, w):
    """Minus the logarithmic derivative of R."""
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape, dtype=complex)
    V, m = spec.V, spec.m
    for j in range(spec.n):
        tj = spec.tau[j]
        plus01 = spec.b_seg[0][j] == "+"
        minus_last = spec.b_seg[m - 1][j] == "-"
        if spec.a_res[j] == "L":
            out = out + sum(
                (int(spec.b_seg[p][j] == "+") - int(spec.b_seg[p - 1][j] == "+")) / (w - math.exp(V[p]) / tj) for p in range(1, m)
            )
            out = out + int(minus_last) / (w - math.exp(V[m]) / tj) + int(plus01) / (w - math.exp(V[0]) / tj)
        else:
            out = out + sum(
                (int(spec.b_seg[p - 1][j] == "+") - int(spec.b_seg[p][j] == "+")) / (w + math.exp(V[p]) / tj) for p in range(1, m)
            )
            out = out - int(minus_last) / (w + math.exp(V[m]) / tj) - int(plus01) / (w + math.exp(V[0]) / tj)
    return out if out.shape else complex(out)


@dataclass
class URFG:
    U: complex
    R: complex
    f: float | None
    g: complex


def u_r_f_g(spec: AsymptoticSpec, chi: float, w: complex) -> URFG:
    w = complex(w)
    s = math.exp(chi) / w.real if w.imag == 0 and w.real != 0 else None
    return URFG(u_chi(spec, chi, w), r_of_w(spec, w), None if s is None else f_of_s(spec, s), g_of_w(spec, w))


def singular_set(spec: AsymptoticSpec) -> list[float]:
    """Zeros and poles of R: the points excluded from the boundary parametrization."""
    V, m = spec.V, spec.m
    pts = set()
    for j in range(spec.n):
        sgn = 1 if spec.a_res[j] == "L" else -1
        tj = spec.tau[j]
        pts.add(sgn * math.exp(V[0]) / tj)
        pts.add(sgn * math.exp(V[m]) / tj)
        for p in range(1, m):
            if spec.b_seg[p - 1][j] != spec.b_seg[p][j]:
                pts.add(sgn * math.exp(V[p]) / tj)
    return sorted(pts)


@dataclass
class CurvePoint:
    u: float
    chi: float
    kappa: float
    residuals: tuple[float, float]


@dataclass
class BoundaryResult:
    points: list[CurvePoint] = field(default_factory=list)
    skipped: list[tuple[float, str]] = field(default_factory=list)


def _solve_f(spec: AsymptoticSpec, target: float) -> list[float]:
    """Real roots of f(s) = target, through the numerator polynomial."""
    terms = []  # (sign, linear factor) with f = sum sign * tau / factor(s)
    for j in range(spec.n):
        tj = spec.tau[j]
        if spec.a_res[j] == "L":
            terms.append((1.0, np.array([-1.0, tj])))  # tau - s
        else:
            terms.append((-1.0, np.array([1.0, tj])))  # tau + s
    full = np.array([1.0])
    for _, lin in terms:
        full = np.polymul(full, lin)
    poly = -target * full
    for k, (sign, _) in enumerate(terms):
        rest = np.array([1.0])
        for j, (_, lin) in enumerate(terms):
            if j != k:
                rest = np.polymul(rest, lin)
        poly = np.polyadd(poly, sign * spec.tau[k] * rest)
    poly = np.trim_zeros(poly, "f")
    if len(poly) < 2:
        return []
    out = []
    for r in np.roots(poly):
        if abs(r.imag) <= 1e-9 * (1 + abs(r)):
            x = r.real
            # Newton polish on f itself
            for _ in range(3):
                d = (f_of_s(spec, x * (1 + 1e-7) + 1e-12) - f_of_s(spec, x)) / (x * 1e-7 + 1e-12)
                if d == 0 or not math.isfinite(d):
                    break
                x -= (f_of_s(spec, x) - target) / d
            out.append(x)
    return out


def boundary_point(spec: AsymptoticSpec, u: float, tol: float = 1e-8) -> CurvePoint | str:
    """The (chi, kappa) at which u is a double root, or a reason it is skipped."""
    if u == 0 or any(abs(u - s) < 1e-12 * max(1, abs(s)) for s in singular_set(spec)):
        return "u is singular"
    target = (u * g_of_w(spec, u)).real
    candidates = []
    for s in _solve_f(spec, target):
        if s * u <= 0:
            continue
        chi = math.log(s * u)
        if not spec.V[0] < chi < spec.V[-1] or any(abs(chi - v) < 1e-12 for v in spec.V):
            continue
        rg = _rational_cached(spec, chi)
        gu = rg(u).real
        if not gu > 0:
            continue
        candidates.append((chi, gu))
    if not candidates:
        return "no branch gives a positive real right-hand side"
    if len(candidates) > 1:
        return f"{len(candidates)} admissible branches"
    chi, gu = candidates[0]
    kappa = -math.log(gu) / spec.n
    rg = _rational_cached(spec, chi)
    r1 = abs(rg(u) - math.exp(-spec.n * kappa)) / max(1.0, gu)
    r2 = abs(rg(u) * rg.log_derivative(u)) / max(1.0, gu)
    if r1 > tol or r2 > tol:
        return f"residuals {r1:.3g}, {r2:.3g} exceed {tol}"
    return CurvePoint(u, chi, kappa, (r1, r2))


def frozen_boundary(spec: AsymptoticSpec, u_grid: Sequence[float], tol: float = 1e-8) -> BoundaryResult:
    result = BoundaryResult()
    for u in u_grid:
        out = boundary_point(spec, float(u), tol)
        if isinstance(out, str):
            result.skipped.append((float(u), out))
        else:
            result.points.append(out)
    return result


def default_u_grid(spec: AsymptoticSpec, per_interval: int = 60) -> np.ndarray:
    """Points between consecutive singular values, clustered near the ends."""
    sing = sorted(set(singular_set(spec)) | {0.0})
    span = max(abs(s) for s in sing) * 4 + 1
    edges = [-span, *sing, span]
    grid = []
    theta = np.linspace(0, math.pi, per_interval + 2)[1:-1]
    for a, b in zip(edges[:-1], edges[1:]):
        grid.extend(a + (b - a) * (1 - np.cos(theta)) / 2)
    return np.array(grid)


# ---------------------------------------------------------------------------
# Gaussian free field covariance


def gff_covariance(spec: AsymptoticSpec, chi_d: float, chi_h: float, k_d: int = 1, k_h: int = 1, scale: float = 0.3, tol: float = 1e-12) -> float:
    """k_d k_h n^2 beta^2 (1/2 pi i)^2 double integral of G_d(z)^{k_d beta} G_h(w)^{k_h beta} / (z - w)^2.

    The contour for the smaller chi sits inside the one for the larger chi,
    which is the limit of the nested finite-size contours. With small
    circles this means the outer contour also circles every point of the
    inner set, at twice the inner radius.
    """
    if chi_d > chi_h:
        chi_d, chi_h, k_d, k_h = chi_h, chi_d, k_h, k_d
    n, beta = spec.n, spec.beta
    gd, gh = _rational_cached(spec, chi_d), _rational_cached(spec, chi_h)
    sd, sh = pole_zero_sets(spec, chi_d), pole_zero_sets(spec, chi_h)
    in_d = [0.0, *[p for p in gd.poles if p in sd.R_lt]]
    in_h = [0.0, *[p for p in gh.poles if p in sh.R_lt]]
    out_d = [p for p in gd.poles if p not in in_d]
    out_h = [p for p in gh.poles if p not in in_h]
    all_pts = list(dict.fromkeys([*in_d, *in_h, *out_d, *out_h, *gd.zeros, *gh.zeros]))

    def base_radius(p: float) -> float:
        d = [abs(p - q) for q in all_pts if abs(p - q) > 1e-13]
        return scale * min(d) if d else 1.0

    def shared(p: float, pts: Sequence[float]) -> bool:
        return any(abs(p - q) <= 1e-13 * max(1, abs(p)) for q in pts)

    for p in in_d:
        if shared(p, out_h):
            raise ValueError(f"point {p:.6g} must be enclosed for chi={chi_d:.4g} but is singular for chi={chi_h:.4g}")
    circles_d = [Circle(p, 0.5 * base_radius(p)) for p in in_d]
    circles_h = [Circle(p, base_radius(p)) for p in dict.fromkeys([*in_h, *[p for p in in_d if not shared(p, in_h)]])]
    ed, eh = k_d * beta, k_h * beta

    def integrand(z, w):
        return gd(z) ** ed * gh(w) ** eh / (z - w) ** 2

    value = integrate_double(integrand, circles_d, circles_h, tol=tol, max_nodes=2048).value
    return float((k_d * k_h * n * n * beta * beta * value).real)


# ---------------------------------------------------------------------------
# assumptions


@dataclass
class AssumptionReport:
    interleaving_failures: list[tuple[float, str]] = field(default_factory=list)
    parameter_violations: list[str] = field(default_factory=list)
    ordering_violations: list[str] = field(default_factory=list)
    chis_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.interleaving_failures


def _interleaving(spec: AsymptoticSpec, chi: float) -> str | None:
    sets = pole_zero_sets(spec, chi)
    s = sets.sets
    poles_a = sorted(_minus(s[(1, 1)], s[(1, 2)]) + _minus(s[(3, 1)], s[(3, 2)]))
    zeros_a = sorted(_minus(s[(1, 2)], s[(1, 1)]) + _minus(s[(3, 2)], s[(3, 1)]))
    for x, y in zip(poles_a[:-1], poles_a[1:]):
        if sum(1 for z in zeros_a if x < z < y) != 1:
            return f"'>' poles {x:.4g}, {y:.4g} not separated by exactly one zero"
    poles_b = sorted(_minus(s[(2, 1)], s[(2, 2)]) + _minus(s[(4, 1)], s[(4, 2)]))
    zeros_b = sorted(_minus(s[(2, 2)], s[(2, 1)]) + _minus(s[(4, 2)], s[(4, 1)]))
    pos = [p for p in poles_b if p > 0]
    neg = [p for p in poles_b if p < 0]
    c3 = max(neg) if neg else None
    c2 = min(pos) if pos else None
    for x, y in zip(poles_b[:-1], poles_b[1:]):
        if x == c3 and y == c2:
            continue
        if sum(1 for z in zeros_b if x < z < y) != 1:
            return f"'<' poles {x:.4g}, {y:.4g} not separated by exactly one zero"
    if poles_b:
        outer = [z for z in zeros_b if z < min(poles_b) or z > max(poles_b)]
        if len(outer) != 1:
            return f"{len(outer)} '<' zeros outside the pole range"
    c5 = max((p for p in poles_a if p > 0), default=None)
    c6 = min((p for p in poles_a if p < 0), default=None)
    # the enclosed set (0 and the '<' poles) must sit strictly inside the '>' poles
    if c3 is not None and c6 is not None and not c6 < c3:
        return "ordering c6 < c3 fails"
    if c5 is not None and c2 is not None and not c2 < c5:
        return "ordering c2 < c5 fails"
    return None


def check_assumptions(spec: AsymptoticSpec, samples_per_segment: int = 7) -> AssumptionReport:
    """Interleaving of poles and zeros at sampled chi, plus the explicit
    parameter inequalities. Only the sampled interleaving decides ``ok``; the
    parameter inequalities are sufficient conditions and are listed."""
    report = AssumptionReport()
    V = spec.V
    for p in range(1, spec.m + 1):
        for c in np.linspace(V[p - 1], V[p], samples_per_segment + 2)[1:-1]:
            report.chis_checked += 1
            msg = _interleaving(spec, float(c))
            if msg:
                report.interleaving_failures.append((float(c), msg))
    n, m = spec.n, spec.m
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ratio = spec.tau[j] / spec.tau[i]
            for p1 in range(1, m + 1):
                for p2 in range(1, m + 1):
                    bi, bj = spec.b_seg[p1 - 1][i], spec.b_seg[p2 - 1][j]
                    tag = f"residues ({i + 1},{j + 1}) segments ({p1},{p2})"
                    if bi == "-" and bj == "+" and p1 > p2:
                        if not ratio < math.exp(V[p2] - V[p1 - 1]):
                            report.parameter_violations.append(f"{tag}: tau ratio {ratio:.4g} >= e^(V_{p2}-V_{p1 - 1})")
                        if not ratio <= math.exp(V[p2 - 1] - V[p1]):
                            report.parameter_violations.append(f"{tag}: tau ratio {ratio:.4g} > e^(V_{p2 - 1}-V_{p1})")
                    if bi == bj and spec.a_res[i] == spec.a_res[j] and spec.tau[i] >= spec.tau[j]:
                        if not ratio <= math.exp(V[p2 - 1] - V[p1]):
                            report.parameter_violations.append(f"{tag}: same type, tau ratio {ratio:.4g} > e^(V_{p2 - 1}-V_{p1})")
                    if spec.a_res[i] == spec.a_res[j] and spec.tau[i] > spec.tau[j]:
                        if not ratio < math.exp(V[p2] - V[p1]):
                            report.ordering_violations.append(f"{tag}: tau ratio {ratio:.4g} >= e^(V_{p2}-V_{p1})")
    return report
