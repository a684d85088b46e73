"""Trapezoid-rule contour integrals and the finite-size moment formulas.

Circles are integrated with the periodic trapezoid rule, which converges
geometrically for integrands analytic near the circle. All integrals carry
the 1/(2 pi i) normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import RailYardSpec

MAX_NODES = 2**20


class ContourError(RuntimeError):
    pass


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def contains(self, p: complex) -> bool:
        return abs(p - self.center) < self.radius

    def distance_to_boundary(self, p: complex) -> float:
        return abs(abs(p - self.center) - self.radius)


@dataclass
class ContourSpec:
    components: list[Circle]
    inside: list[complex] = field(default_factory=list)
    outside: list[complex] = field(default_factory=list)

    def validate(self) -> None:
        for a in range(len(self.components)):
            for b in range(a + 1, len(self.components)):
                ca, cb = self.components[a], self.components[b]
                if abs(ca.center - cb.center) < ca.radius + cb.radius:
                    raise ContourError(f"components {a} and {b} overlap")
        for p in self.inside:
            if not any(c.contains(p) for c in self.components):
                raise ContourError(f"point {p} should be inside the contour")
        for p in self.outside:
            if any(c.contains(p) for c in self.components):
                raise ContourError(f"point {p} should be outside the contour")


@dataclass
class QuadratureResult:
    value: complex
    error_estimate: float
    nodes_used: int


def _circle_nodes(circle: Circle, n: int) -> tuple[np.ndarray, np.ndarray]:
    theta = 2 * np.pi * np.arange(n) / n
    offset = circle.radius * np.exp(1j * theta)
    return circle.center + offset, offset


def circle_average(f: Callable[[np.ndarray], np.ndarray], circle: Circle, n: int) -> complex:
    """(1/2 pi i) * integral of f over the circle with n trapezoid nodes."""
    z, offset = _circle_nodes(circle, n)
    return complex(np.mean(f(z) * offset))


def integrate_contour(
    f: Callable[[np.ndarray], np.ndarray],
    contour: ContourSpec | Circle | Sequence[Circle],
    tol: float = 1e-13,
    start_nodes: int = 32,
    check: bool = True,
) -> QuadratureResult:
    """(1/2 pi i) times the integral of f over every component, positively oriented.

    Node counts double until two successive estimates agree within ``tol``
    (absolute, scaled by max(1, |value|)).
    """
    if isinstance(contour, Circle):
        contour = ContourSpec([contour])
    elif not isinstance(contour, ContourSpec):
        contour = ContourSpec(list(contour))
    if check:
        contour.validate()
    total = 0j
    err = 0.0
    used = 0
    for circle in contour.components:
        n = start_nodes
        prev = circle_average(f, circle, n)
        while True:
            n *= 2
            if n > MAX_NODES:
                raise ContourError(f"no convergence on circle {circle} with {MAX_NODES} nodes (last change {abs(cur - prev):.3g})")
            cur = circle_average(f, circle, n)
            if abs(cur - prev) <= tol * max(1.0, abs(cur)):
                break
            prev = cur
        total += cur
        err += abs(cur - prev)
        used += n
    return QuadratureResult(total, err, used)


def integrate_double(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    contour_z: Sequence[Circle],
    contour_w: Sequence[Circle],
    tol: float = 1e-12,
    start_nodes: int = 32,
    max_nodes: int = 4096,
) -> QuadratureResult:
    """(1/2 pi i)^2 times a double integral over products of circles."""
    n = start_nodes
    prev = None
    while True:
        val = 0j
        for cz in contour_z:
            z, oz = _circle_nodes(cz, n)
            for cw in contour_w:
                w, ow = _circle_nodes(cw, n)
                Z, W = np.meshgrid(z, w, indexing="ij")
                OZ, OW = np.meshgrid(oz, ow, indexing="ij")
                val += complex(np.mean(f(Z, W) * OZ * OW))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return QuadratureResult(val, abs(val - prev), n)
        if 2 * n > max_nodes:
            raise ContourError(f"double integral did not converge (change {abs(val - prev) if prev is not None else float('nan'):.3g})")
        prev = val
        n *= 2


# ---------------------------------------------------------------------------
# finite-size moment integrand


@dataclass
class MomentIntegrand:
    """The product of single-column factors for a reference partition i.

    ``inside`` holds the poles the contour must enclose (besides 0) and
    ``outside`` the poles it must avoid.
    """

    factors: list[tuple[str, float]]
    t: float
    inside: list[complex]
    outside: list[complex]

    def __call__(self, w: np.ndarray) -> np.ndarray:
        t = self.t
        out = np.ones_like(w, dtype=complex)
        for kind, x in self.factors:
            if kind == "L-":
                out = out * (w - x) / (w - t * x)
            elif kind == "R-":
                out = out * (w + t * x) / (w + x)
            elif kind == "L+":
                out = out * (t - w * x) / (t * (1 - w * x))
            else:
                out = out * t * (1 + w * x) / (t + w * x)
        return out


def moment_integrand(spec: RailYardSpec, i: int, t: float) -> MomentIntegrand:
    """Factors for E[gamma_1(lambda^(i); t, t)] with a_i = L.

    Columns j >= i with sign - contribute (w - x)/(w - t x) when a_j = L and
    (w + t x)/(w + x) when a_j = R. Columns j < i with sign + contribute
    (t - w x)/(t (1 - w x)) when a_j = L and t (1 + w x)/(t + w x) when
    a_j = R.
    """
    if not spec.l <= i <= spec.r:
        raise ValueError(f"column {i} outside [{spec.l}, {spec.r}]")
    if spec.a[i - spec.l] != "L":
        raise ValueError("the reference column must have type L")
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    factors, inside, outside = [], [], []
    for j in spec.columns:
        kind = spec.kind(j)
        x = float(spec.weight(j))
        if j >= i and kind[1] == "-":
            factors.append((kind, x))
            inside.append(t * x if kind[0] == "L" else -x)
        elif j < i and kind[1] == "+":
            factors.append((kind, x))
            outside.append(1 / x if kind[0] == "L" else -t / x)
    return MomentIntegrand(factors, t, inside, outside)


def _separating_radius(inside: Sequence[complex], outside: Sequence[complex], gap: float = 1.05) -> float:
    lo = max((abs(p) for p in inside), default=0.0)
    hi = min((abs(p) for p in outside), default=math.inf)
    if lo == 0 and math.isinf(hi):
        return 1.0
    if lo == 0:
        return hi / 2
    if math.isinf(hi):
        return 2 * lo
    if hi < gap * lo:
        raise ContourError(f"no separating circle: inside poles reach {lo:.4g}, outside poles start at {hi:.4g}")
    return math.sqrt(lo * hi)


def finite_moment_k1(spec: RailYardSpec, i: int, t: float, radius: float | None = None, tol: float = 1e-14) -> float:
    """E[gamma_1(lambda^(i); t, t)] as a single contour integral."""
    integrand = moment_integrand(spec, i, t)
    r = _separating_radius(integrand.inside, integrand.outside) if radius is None else radius
    contour = ContourSpec([Circle(0, r)], inside=[0j, *integrand.inside], outside=integrand.outside)
    res = integrate_contour(lambda w: integrand(w) / w, contour, tol=tol)
    if abs(res.value.imag) > 1e-9:
        raise ContourError(f"moment has imaginary part {res.value.imag:.3g}")
    return res.value.real


# ---------------------------------------------------------------------------
# kernels and covariance


@dataclass
class KernelValues:
    T_LL: complex
    T_LR: complex
    T_RL: complex
    D: complex


def kernel_values(z: complex, w: complex, t: float) -> KernelValues:
    """Two-point interaction kernels for singleton variable sets.

    ``D`` is the k = 1 measure factor 1/(2 pi i w).
    """
    if z == 0 or w == 0:
        if w == 0 and z != 0:
            return KernelValues(1.0, 1.0, 1.0, complex("inf"))
        raise ContourError("kernel evaluated at z = 0")
    dens = [(1 - w / (t * z)) * (1 - t * w / z), (1 + t * t * w / z) * (1 + w / z), (1 + w / (t * t * z)) * (1 + w / z)]
    if any(abs(d) < 1e-300 for d in dens):
        raise ContourError("kernel pole hit")
    T_LL = (1 - w / z) ** 2 / dens[0]
    T_LR = (1 + t * w / z) ** 2 / dens[1]
    T_RL = (1 + w / (t * z)) ** 2 / dens[2]
    return KernelValues(T_LL, T_LR, T_RL, 1 / (2j * np.pi * w))


def _t_ll_minus_one(z: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
    # (z - w)^2 / ((z - w/t)(z - t w)) - 1 = (t + 1/t - 2) z w / ((z - w/t)(z - t w))
    return (t + 1 / t - 2) * z * w / ((z - w / t) * (z - t * w))


def _log_interval(f: MomentIntegrand) -> tuple[float, float]:
    lo = max((abs(p) for p in f.inside), default=0.0)
    hi = min((abs(p) for p in f.outside), default=math.inf)
    a = math.log(lo) if lo > 0 else None
    b = math.log(hi) if math.isfinite(hi) else None
    if a is None and b is None:
        return -1.0, 1.0
    if a is None:
        return b - 4.0, b
    if b is None:
        return a, a + 4.0
    return a, b


def covariance_radii(spec: RailYardSpec, i_d: int, i_h: int, t: float, margin: float = 0.05) -> tuple[float, float]:
    """Radii (r_z, r_w) for columns i_d >= i_h (z belongs to the later column).

    Each circle separates its own column's poles and r_z < t * r_w, so the
    z circle excludes both z = t w and z = w / t. Raises ContourError when
    no such pair exists.
    """
    if i_d < i_h:
        raise ValueError("expects i_d >= i_h")
    a_d, b_d = _log_interval(moment_integrand(spec, i_d, t))
    a_h, b_h = _log_interval(moment_integrand(spec, i_h, t))
    band = -math.log(t)
    u_lo, u_hi = max(a_h, a_d + band), b_h
    if u_hi - u_lo < margin:
        raise ContourError("no nested pair of circles for the covariance")
    u = 0.5 * (u_lo + u_hi)
    v_lo, v_hi = a_d, min(b_d, u - band)
    if v_hi - v_lo < margin:
        raise ContourError("no nested pair of circles for the covariance")
    return math.exp(0.5 * (v_lo + v_hi)), math.exp(u)


def _nested_covariance(fd: MomentIntegrand, fh: MomentIntegrand, t: float, rz: float, rw: float, tol: float) -> float:
    def integrand(z, w):
        return fd(z) * fh(w) * _t_ll_minus_one(z, w, t) / (z * w)

    return integrate_double(integrand, [Circle(0, rz)], [Circle(0, rw)], tol=tol).value.real


def _distinct(points: Sequence[complex], eps: float = 1e-12) -> list[complex]:
    out: list[complex] = []
    for p in points:
        if all(abs(p - q) > eps * max(1.0, abs(p)) for q in out):
            out.append(p)
    return out


def _residue_covariance(fd: MomentIntegrand, fh: MomentIntegrand, t: float, tol: float) -> float:
    """Iterated residues on small circles, the continuation of the nested form.

    The inner variable picks up the poles of F_d inside its contour; the
    kernel then has poles at w = t p and w = p / t, which the outer contour
    encloses together with the inside poles of F_h.
    """
    p_in = _distinct(fd.inside)
    p_out_d = _distinct(fd.outside)
    q_out = _distinct(fh.outside)
    qs = _distinct([*fh.inside, *(t * p for p in p_in), *(p / t for p in p_in)])
    for q in qs:
        if any(abs(q - o) < 1e-9 for o in q_out):
            raise ContourError(f"kernel pole {q} collides with an excluded pole")

    def spacing(point: complex, others: Sequence[complex]) -> float:
        d = [abs(point - o) for o in others if o != point]
        return min(d) if d else max(1.0, abs(point))

    deltas = {q: 0.3 * spacing(q, [*qs, *q_out]) for q in qs}
    rho_cap = 0.4 * t * min(deltas.values()) if deltas else 1.0
    rhos = {p: min(0.3 * spacing(p, [*p_in, *p_out_d]), rho_cap) for p in p_in}
    total = 0.0
    for q in qs:
        cw = Circle(q, deltas[q])
        for p in p_in:
            cz = Circle(p, rhos[p])

            def integrand(z, w):
                return fd(z) * fh(w) * _t_ll_minus_one(z, w, t) / (z * w)

            total += integrate_double(integrand, [cz], [cw], tol=tol, max_nodes=8192).value.real
    return total


def finite_covariance_11(
    spec: RailYardSpec,
    i_d: int,
    i_h: int,
    t: float,
    method: str = "auto",
    radii: tuple[float, float] | None = None,
    tol: float = 1e-12,
) -> float:
    """Cov(gamma_1(lambda^(i_d)), gamma_1(lambda^(i_h))) from a double contour integral.

    The integrand is F_d(z) F_h(w) (T_LL(z, w) - 1) / (z w), where
    T_LL - 1 = (t + 1/t - 2) z w / ((z - w/t)(z - t w)). ``method='nested'``
    uses two circles about 0, the later column's radius below t times the
    earlier one's. ``method='residues'`` sums iterated residues on small circles and works
    when no nested pair exists. ``auto`` tries nested first.
    """
    if i_d < i_h:
        i_d, i_h = i_h, i_d
        if radii is not None:
            radii = (radii[1], radii[0])
    fd = moment_integrand(spec, i_d, t)
    fh = moment_integrand(spec, i_h, t)
    if method in ("auto", "nested"):
        try:
            rz, rw = covariance_radii(spec, i_d, i_h, t) if radii is None else radii
            return _nested_covariance(fd, fh, t, rz, rw, tol)
        except ContourError:
            if method == "nested":
                raise
    if method in ("auto", "residues"):
        return _residue_covariance(fd, fh, t, tol)
    raise ValueError(f"unknown method {method}")
