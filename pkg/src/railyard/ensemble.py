"""Enumeration, exact sampling and Markov chains for the dimer measure."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .fock import FockVector, partition_function_closed, right_vectors, tail_bound
from .graph import (
    DimerCovering,
    RailYardSpec,
    SpecError,
    apply_flip,
    covering_weight,
    empty_covering,
    flip_moves,
    flip_weight_ratio,
)
from .partitions import EMPTY, Partition, gamma_k, size, strips_above, strips_below

RNG_NAME = "numpy.random.PCG64"


class EnsembleError(RuntimeError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class WeightedEnsemble:
    entries: list[tuple[DimerCovering, Fraction]]
    budget: int
    tail_bound: Fraction

    @property
    def total_weight(self) -> Fraction:
        return sum((w for _, w in self.entries), Fraction(0))


def _successors(kind: str, lam: Partition, budget: int) -> Iterable[Partition]:
    """Partitions that may follow ``lam`` across a column of this type."""
    dual = kind[0] == "R"
    if kind[1] == "+":
        return strips_above(lam, budget, dual)
    return strips_below(lam, dual)


@lru_cache(maxsize=64)
def _cached_right_vectors(spec: RailYardSpec, budget: int) -> tuple[FockVector, ...]:
    return tuple(right_vectors(spec, budget))


def enumerate_coverings(spec: RailYardSpec, budget: int, cap: int = 200_000) -> WeightedEnsemble:
    """All coverings whose partitions have size <= budget, with exact weights.

    The search only visits partitions from which the empty right boundary is
    still reachable, read off the supports of the right Fock vectors.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    vecs = _cached_right_vectors(spec, budget)
    entries: list[tuple[DimerCovering, Fraction]] = []

    def rec(k: int, seq: list[Partition]) -> None:
        if k == spec.n_columns:
            if seq[-1] == EMPTY:
                cover = DimerCovering(tuple(seq))
                entries.append((cover, covering_weight(spec, cover)))
                if len(entries) > cap:
                    raise EnsembleError(f"ensemble exceeds cap {cap}; lower the budget")
            return
        i = spec.l + k
        support = vecs[k + 1]
        for mu in _successors(spec.kind(i), seq[-1], budget):
            if mu in support:
                seq.append(mu)
                rec(k + 1, seq)
                seq.pop()

    rec(0, [EMPTY])
    return WeightedEnsemble(entries, budget, tail_bound(spec, budget))


def exact_probability(spec: RailYardSpec, cover: DimerCovering) -> Fraction:
    return covering_weight(spec, cover) / partition_function_closed(spec)


def conditional_table(spec: RailYardSpec, budget: int, k: int, lam: Partition) -> dict[Partition, Fraction]:
    """Law of partition k + 1 given partition k = lam, under the truncated measure.

    Transfer weight times the right partition function, normalized.
    """
    vecs = _cached_right_vectors(spec, budget)
    i = spec.l + k
    kind, x = spec.kind(i), spec.weight(i)
    right = vecs[k + 1]
    table: dict[Partition, Fraction] = {}
    for mu in _successors(kind, lam, budget):
        z_right = right.get(mu)
        if z_right:
            table[mu] = x ** abs(size(mu) - size(lam)) * z_right
    total = sum(table.values(), Fraction(0))
    if total == 0:
        raise EnsembleError(f"partition {lam} at position {k} has no continuation")
    return {mu: w / total for mu, w in table.items()}


def sample_exact(spec: RailYardSpec, budget: int, seed: int, threshold: float = 1e-9, rng: np.random.Generator | None = None) -> DimerCovering:
    """Draw one covering left to right from exact conditional tables."""
    z = partition_function_closed(spec)
    tb = tail_bound(spec, budget)
    if tb / z > threshold:
        suggestion = budget
        while tail_bound(spec, suggestion) / z > threshold:
            suggestion += max(1, suggestion // 4)
        raise EnsembleError(f"tail bound {float(tb / z):.3g} of Z exceeds {threshold}; try budget >= {suggestion}")
    rng = make_rng(seed) if rng is None else rng
    seq: list[Partition] = [EMPTY]
    for k in range(spec.n_columns):
        keys, cdf = _conditional_cdf(spec, budget, k, seq[-1])
        u = rng.random() * cdf[-1]
        idx = int(np.searchsorted(cdf, u, side="right"))
        seq.append(keys[min(idx, len(keys) - 1)])
    return DimerCovering(tuple(seq))


@lru_cache(maxsize=100_000)
def _conditional_cdf(spec: RailYardSpec, budget: int, k: int, lam: Partition) -> tuple[list[Partition], np.ndarray]:
    table = conditional_table(spec, budget, k, lam)
    keys = sorted(table)
    return keys, np.cumsum([float(table[mu]) for mu in keys])


def sample_exact_many(spec: RailYardSpec, budget: int, count: int, seed: int) -> list[DimerCovering]:
    rng = make_rng(seed)
    return [sample_exact(spec, budget, seed, rng=rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# flip Metropolis chain


def metropolis_accept(spec: RailYardSpec, cover: DimerCovering, move, budget: int | None) -> tuple[DimerCovering, Fraction]:
    """Proposed state and exact acceptance probability for one move."""
    new = apply_flip(spec, cover, move)
    ratio = flip_weight_ratio(spec, cover, move)
    n_old = len(flip_moves(spec, cover, budget))
    n_new = len(flip_moves(spec, new, budget))
    return new, min(Fraction(1), ratio * n_old / n_new)


def sample_mcmc(
    spec: RailYardSpec,
    steps: int,
    seed: int,
    start: DimerCovering | None = None,
    budget: int | None = None,
    record_every: int = 0,
) -> DimerCovering | tuple[DimerCovering, list[DimerCovering]]:
    """Metropolis chain over single-box flips.

    Proposals are uniform over the current legal moves; acceptance includes
    the ratio of move counts so the chain is reversible for the covering
    measure restricted to partitions of size <= budget.
    """
    rng = make_rng(seed)
    cover = empty_covering(spec) if start is None else start
    xs = [float(v) for v in spec.x]
    # small state spaces revisit the same coverings, so memoize transitions
    moves_cache: dict[DimerCovering, list] = {}
    step_cache: dict[tuple[DimerCovering, int], tuple[DimerCovering, float]] = {}

    def moves_of(c: DimerCovering) -> list:
        found = moves_cache.get(c)
        if found is None:
            if len(moves_cache) > 200_000:
                moves_cache.clear()
                step_cache.clear()
            found = moves_cache[c] = flip_moves(spec, c, budget)
        return found

    def step_of(c: DimerCovering, idx: int, moves: list) -> tuple[DimerCovering, float]:
        found = step_cache.get((c, idx))
        if found is None:
            move = moves[idx]
            new = apply_flip(spec, c, move)
            accept = _float_ratio(xs, c, move) * len(moves) / len(moves_of(new))
            found = step_cache[(c, idx)] = (new, accept)
        return found

    moves = moves_of(cover)
    trace = []
    for step in range(steps):
        if moves:
            new, accept = step_of(cover, int(rng.integers(len(moves))), moves)
            if accept >= 1 or rng.random() < accept:
                cover = new
                moves = moves_of(new)
        if record_every and (step + 1) % record_every == 0:
            trace.append(cover)
    if record_every:
        return cover, trace
    return cover


def _float_ratio(xs: Sequence[float], cover: DimerCovering, move) -> float:
    parts = cover.partitions
    k = move.index
    old = size(parts[k])
    new = old + move.delta
    ratio = 1.0
    for col_k, other in ((k - 1, parts[k - 1]), (k, parts[k + 1])):
        s = size(other)
        ratio *= xs[col_k] ** (abs(new - s) - abs(old - s))
    return ratio


def empirical_distribution(samples: Iterable[DimerCovering]) -> dict[DimerCovering, float]:
    counts: dict[DimerCovering, int] = {}
    total = 0
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
        total += 1
    return {k: v / total for k, v in counts.items()}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(float(p.get(k, 0)) - float(q.get(k, 0))) for k in keys)


# ---------------------------------------------------------------------------
# heat-bath chain on row arrays


class HeatBathChain:
    """Gibbs sampler that resamples one part of one partition at a time.

    Given its neighbours, part j of partition k ranges over an interval and
    its conditional law is a truncated geometric. Parts with k and j of
    fixed parities do not interact, so a sweep updates four sublattices in
    turn with vectorized draws. Each move is a multi-box version of a flip
    and leaves the covering measure invariant.
    """

    def __init__(self, spec: RailYardSpec, rows: int, seed: int, start: DimerCovering | None = None):
        self.spec = spec
        self.rows = rows
        self.rng = make_rng(seed)
        n = spec.n_columns + 1
        self.parts = np.zeros((n, rows + 2), dtype=np.int64)
        if start is not None:
            for k, lam in enumerate(start.partitions):
                if len(lam) > rows:
                    raise ValueError("start covering has too many rows")
                self.parts[k, 1 : 1 + len(lam)] = lam
        # column 0 of self.parts is a sentinel "infinite" part
        self.parts[:, 0] = np.iinfo(np.int64).max // 4
        kinds = [spec.kind(i) for i in spec.columns]
        self.kinds = kinds
        logx = np.array([math.log(float(v)) for v in spec.x])
        # log-ratio of the weight per unit increase of a part of partition k
        self.log_rate = np.zeros(n)
        for k in range(1, n - 1):
            left_sign = 1 if kinds[k - 1][1] == "+" else -1
            right_sign = -1 if kinds[k][1] == "+" else 1
            self.log_rate[k] = left_sign * logx[k - 1] + right_sign * logx[k]

    def _bounds(self, ks: np.ndarray, js: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = self.parts
        lo = P[ks, js + 1].copy()
        hi = P[ks, js - 1].copy()
        for side in ("left", "right"):
            if side == "left":
                nb = ks - 1
                kinds = [self.kinds[k - 1] for k in ks]
            else:
                nb = ks + 1
                kinds = [self.kinds[k] for k in ks]
            A_j = P[nb, js]
            A_prev = P[nb, js - 1]
            A_next = P[nb, js + 1]
            for kind in ("L+", "L-", "R+", "R-"):
                mask = np.array([kk == kind for kk in kinds])
                if not mask.any():
                    continue
                # "grow" means the partition under update is the larger one
                grow = (kind[1] == "+") == (side == "left")
                if kind[0] == "L":
                    if grow:
                        l_, h_ = A_j, A_prev
                    else:
                        l_, h_ = A_next, A_j
                else:
                    if grow:
                        l_, h_ = A_j, A_j + 1
                    else:
                        l_, h_ = A_j - 1, A_j
                lo[mask] = np.maximum(lo[mask], l_[mask])
                hi[mask] = np.minimum(hi[mask], h_[mask])
        return lo, hi

    def _draw(self, lo: np.ndarray, hi: np.ndarray, log_rate: np.ndarray) -> np.ndarray:
        span = hi - lo
        u = self.rng.random(lo.shape)
        out = lo.copy()
        small = np.abs(log_rate) < 1e-14
        if small.any():
            out[small] = lo[small] + np.floor(u[small] * (span[small] + 1)).astype(np.int64)
        pos = ~small
        if pos.any():
            r = log_rate[pos]
            s = span[pos].astype(float)
            # sample from ~ e^{r v} on v = 0..s, written to stay finite for large |r s|
            neg = r < 0
            a = np.abs(r)
            # offset from the heavy end
            tail = -np.expm1(-a * (s + 1))
            off = np.floor(-np.log1p(-u[pos] * tail) / a)
            off = np.minimum(off, s)
            val = np.where(neg, off, s - off)
            out[pos] = lo[pos] + val.astype(np.int64)
        return out

    def sweep(self, count: int = 1) -> None:
        n = self.spec.n_columns + 1
        for _ in range(count):
            for kp in (0, 1):
                ks_all = np.arange(1, n - 1)
                ks_all = ks_all[ks_all % 2 == kp]
                if ks_all.size == 0:
                    continue
                for jp in (0, 1):
                    js_all = np.arange(1, self.rows + 1)
                    js_all = js_all[js_all % 2 == jp]
                    ks, js = np.meshgrid(ks_all, js_all, indexing="ij")
                    ks, js = ks.ravel(), js.ravel()
                    lo, hi = self._bounds(ks, js)
                    if np.any(lo > hi):
                        raise EnsembleError("inconsistent heat-bath bounds")
                    self.parts[ks, js] = self._draw(lo, hi, self.log_rate[ks])
            if np.any(self.parts[1:-1, self.rows] > 0):
                raise EnsembleError("heat-bath chain reached the row cap; raise rows")

    def covering(self) -> DimerCovering:
        seqs = []
        for k in range(self.parts.shape[0]):
            row = self.parts[k, 1 : self.rows + 1]
            seqs.append(tuple(int(v) for v in row if v > 0))
        return DimerCovering(tuple(seqs))


# ---------------------------------------------------------------------------
# observables


@dataclass
class ObservableRow:
    column_index: int
    k: int
    t: float
    mean: float
    stderr: float
    exact_if_available: float | None


def estimate_observables(
    spec: RailYardSpec,
    samples: Sequence[DimerCovering],
    t: float,
    ks: Sequence[int],
    columns: Sequence[int],
    ensemble: WeightedEnsemble | None = None,
) -> list[ObservableRow]:
    """Sample means of gamma_k(lambda^(i); t, t), with exact values if given."""
    if not 0 < t < 1:
        raise ValueError("t must lie in (0, 1)")
    rows = []
    for i in columns:
        for k in ks:
            vals = np.array([gamma_k(s.at(spec, i), k, t, t) for s in samples])
            mean = float(vals.mean()) if len(vals) else float("nan")
            err = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
            exact = None
            if ensemble is not None:
                exact = exact_expectation(spec, ensemble, lambda c: gamma_k(c.at(spec, i), k, t, t))
            rows.append(ObservableRow(i, k, t, mean, err, exact))
    return rows


def exact_expectation(spec: RailYardSpec, ensemble: WeightedEnsemble, fn) -> float:
    total = float(ensemble.total_weight)
    return sum(float(w) * fn(c) for c, w in ensemble.entries) / total


def exact_covariance(spec: RailYardSpec, ensemble: WeightedEnsemble, f, g) -> float:
    ef = exact_expectation(spec, ensemble, f)
    eg = exact_expectation(spec, ensemble, g)
    efg = exact_expectation(spec, ensemble, lambda c: f(c) * g(c))
    return efg - ef * eg


@dataclass
class GammaOracle:
    means: dict[int, float]
    covariances: dict[tuple[int, int], float]
    budget: int
    last_change: float


def gamma_oracle(
    spec: RailYardSpec,
    columns: Sequence[int],
    t: float,
    start: int = 14,
    step: int = 8,
    max_budget: int = 70,
    tol: float = 1e-11,
    cap: int = 1_000_000,
    strict: bool = True,
) -> GammaOracle:
    """Enumeration values of E gamma_1 and Cov(gamma_1, gamma_1) at the given columns.

    gamma_1 grows like t^(-length), so a fixed budget can be far too small
    for small t. The budget grows by ``step`` until two successive values
    agree to ``tol``. If they never do (budget limit or enumeration cap),
    ``strict`` raises EnsembleError; otherwise the last values come back
    with ``last_change`` as an honest error estimate.
    """

    def values(budget: int):
        ens = enumerate_coverings(spec, budget, cap=cap)
        obs = {i: (lambda c, i=i: gamma_k(c.at(spec, i), 1, t, t)) for i in columns}
        means = {i: exact_expectation(spec, ens, obs[i]) for i in columns}
        covs = {(i, j): exact_covariance(spec, ens, obs[i], obs[j]) for i in columns for j in columns if j >= i}
        return means, covs

    def result(means, covs, budget, change) -> GammaOracle:
        return GammaOracle(means, {**covs, **{(j, i): v for (i, j), v in covs.items()}}, budget, change)

    budget = start
    means, covs = values(budget)
    change = math.inf
    while budget + step <= max_budget:
        try:
            new_means, new_covs = values(budget + step)
        except EnsembleError:
            if strict:
                raise
            break
        budget += step
        change = max([abs(new_means[i] - means[i]) for i in columns] + [abs(new_covs[p] - covs[p]) for p in covs])
        means, covs = new_means, new_covs
        if change < tol:
            return result(means, covs, budget, change)
    if strict:
        raise EnsembleError(f"enumeration oracle did not settle below budget {max_budget} (last change {change:.2e})")
    return result(means, covs, budget, change)
