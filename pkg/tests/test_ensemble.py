from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import small_specs
from railyard.ensemble import (
    EnsembleError,
    HeatBathChain,
    conditional_table,
    empirical_distribution,
    enumerate_coverings,
    estimate_observables,
    exact_covariance,
    exact_expectation,
    exact_probability,
    gamma_oracle,
    metropolis_accept,
    sample_exact,
    sample_exact_many,
    sample_mcmc,
    total_variation,
)
from railyard.fock import partition_function_closed
from railyard.graph import (
    DimerCovering,
    RailYardSpec,
    charge,
    empty_covering,
    flip_moves,
    is_valid_covering,
    to_edge_configuration,
)
from railyard.partitions import gamma_k

F = Fraction
MIXED = RailYardSpec.from_words("LR", "+-", ["1/2", "1/2"])
GEOMETRIC = RailYardSpec.from_words("LL", "+-", ["1/2", "1/2"])
FORCED = RailYardSpec.from_words("LL", "-+", ["1/2", "1/2"])


def exact_law(spec, budget):
    ens = enumerate_coverings(spec, budget)
    total = ens.total_weight
    return {c: w / total for c, w in ens.entries}


def test_enumeration_examples():
    ens = enumerate_coverings(MIXED, 5)
    assert sorted(w for _, w in ens.entries) == [F(1, 4), 1]
    assert len(enumerate_coverings(FORCED, 7).entries) == 1
    ens = enumerate_coverings(GEOMETRIC, 6)
    assert sorted(w for _, w in ens.entries) == sorted(F(1, 4) ** k for k in range(7))


def test_enumeration_cap():
    spec = RailYardSpec.from_words("LLLL", "++--", ["1/3"] * 4)
    with pytest.raises(EnsembleError):
        enumerate_coverings(spec, 12, cap=50)


@settings(max_examples=30, deadline=None)
@given(small_specs())
def test_weight_sandwich(spec):
    ens = enumerate_coverings(spec, 6)
    z = partition_function_closed(spec)
    assert ens.total_weight <= z <= ens.total_weight + ens.tail_bound


def test_exact_probability_examples():
    assert exact_probability(FORCED, empty_covering(FORCED)) == 1
    assert exact_probability(MIXED, empty_covering(MIXED)) == F(4, 5)
    assert exact_probability(MIXED, DimerCovering(((), (1,), ()))) == F(1, 5)


def test_conditional_table_geometric():
    budget = 30
    table = conditional_table(GEOMETRIC, budget, 0, ())
    norm = 1 - F(1, 4) ** (budget + 1)
    for k in range(budget + 1):
        assert table[(k,) if k else ()] == F(3, 4) * F(1, 4) ** k / norm


def test_conditional_tables_match_enumeration():
    spec = RailYardSpec.from_words("LRL", "+--", ["1/3", "1/4", "1/5"])
    budget = 6
    ens = enumerate_coverings(spec, budget)
    for k in range(spec.n_columns):
        marginal: dict = {}
        joint: dict = {}
        for c, w in ens.entries:
            prefix = c.partitions[k]
            marginal[prefix] = marginal.get(prefix, 0) + w
            key = (prefix, c.partitions[k + 1])
            joint[key] = joint.get(key, 0) + w
        for lam, total in marginal.items():
            table = conditional_table(spec, budget, k, lam)
            expected = {mu: w / total for (l0, mu), w in joint.items() if l0 == lam}
            assert table == expected


def test_sample_exact_reproducible_and_valid():
    spec = RailYardSpec.from_words("LRL", "+--", ["1/3", "1/4", "1/5"])
    a = sample_exact_many(spec, 30, 50, seed=4)
    b = sample_exact_many(spec, 30, 50, seed=4)
    assert a == b
    for cover in a:
        assert is_valid_covering(spec, cover)
        config = to_edge_configuration(spec, cover)
        assert all(charge(config, m) == 0 for m in range(spec.l, spec.r + 2))
    assert sample_exact(FORCED, 5, seed=9) == empty_covering(FORCED)


def test_sample_exact_frequency():
    samples = sample_exact_many(MIXED, 20, 100_000, seed=1)
    freq = sum(1 for s in samples if s == empty_covering(MIXED)) / len(samples)
    assert abs(freq - 0.8) < 0.005


def test_sample_exact_refuses_short_budget():
    with pytest.raises(EnsembleError, match="budget"):
        sample_exact(GEOMETRIC, 3, seed=0)


def test_mcmc_zero_steps():
    assert sample_mcmc(MIXED, 0, seed=3) == empty_covering(MIXED)


def test_detailed_balance_exact():
    spec = RailYardSpec.from_words("LRL", "+--", ["1/3", "1/4", "1/5"])
    budget = 4
    weights = {c: w for c, w in enumerate_coverings(spec, budget).entries}
    for cover in weights:
        moves = flip_moves(spec, cover, budget)
        for move in moves:
            new, accept = metropolis_accept(spec, cover, move, budget)
            back = [m for m in flip_moves(spec, new, budget) if metropolis_accept(spec, new, m, budget)[0] == cover]
            assert len(back) == 1
            _, accept_back = metropolis_accept(spec, new, back[0], budget)
            n_old, n_new = len(moves), len(flip_moves(spec, new, budget))
            assert weights[cover] * accept / n_old == weights[new] * accept_back / n_new


def test_mcmc_short_run_distribution():
    law = {c: float(p) for c, p in exact_law(GEOMETRIC, 40).items()}
    _, trace = sample_mcmc(GEOMETRIC, 100_000, seed=5, record_every=1)
    assert total_variation(empirical_distribution(trace), law) < 0.02


def test_heat_bath_matches_exact_law():
    spec = RailYardSpec.from_words("LRL", "+--", ["1/3", "1/2", "1/3"])
    law = {c: float(p) for c, p in exact_law(spec, 30).items()}
    chain = HeatBathChain(spec, rows=6, seed=2)
    chain.sweep(50)
    trace = []
    for _ in range(4000):
        chain.sweep(1)
        trace.append(chain.covering())
    assert total_variation(empirical_distribution(trace), law) < 0.025
    assert all(is_valid_covering(spec, c) for c in trace[:200])


def test_observables_examples():
    rows = estimate_observables(FORCED, [empty_covering(FORCED)] * 3, 0.5, [1, 2], [1])
    assert all(r.mean == 1 for r in rows)
    ens = enumerate_coverings(MIXED, 4)
    samples = sample_exact_many(MIXED, 20, 2000, seed=8)
    (row,) = estimate_observables(MIXED, samples, 0.7, [1], [1], ensemble=ens)
    expected = 0.8 + 0.2 * gamma_k((1,), 1, 0.7, 0.7)
    assert row.exact_if_available == pytest.approx(expected, abs=1e-14)
    assert abs(row.mean - expected) < 5 * row.stderr + 1e-12
    with pytest.raises(ValueError):
        estimate_observables(MIXED, samples, 1.5, [1], [1])


def test_exact_covariance_is_weighted_sum():
    spec = RailYardSpec.from_words("LRLL", "++--", ["1/3", "1/4", "1/5", "1/3"])
    ens = enumerate_coverings(spec, 10)
    f = lambda c: gamma_k(c.at(spec, 1), 1, 0.6, 0.6)
    g = lambda c: gamma_k(c.at(spec, 2), 1, 0.6, 0.6)
    total = sum(float(w) for _, w in ens.entries)
    probs = np.array([float(w) / total for _, w in ens.entries])
    fv = np.array([f(c) for c, _ in ens.entries])
    gv = np.array([g(c) for c, _ in ens.entries])
    direct = probs @ (fv * gv) - (probs @ fv) * (probs @ gv)
    assert exact_covariance(spec, ens, f, g) == pytest.approx(direct, abs=1e-12)
    assert exact_expectation(spec, ens, f) == pytest.approx(probs @ fv, abs=1e-14)


def test_gamma_oracle_settles_and_reports():
    spec = RailYardSpec.from_words("LRL", "+--", ["1/3", "1/4", "1/5"])
    oracle = gamma_oracle(spec, [0, 2], 0.3)
    assert oracle.last_change < 1e-11 and oracle.budget >= 22
    assert oracle.covariances[(0, 2)] == oracle.covariances[(2, 0)]
    with pytest.raises(EnsembleError, match="settle"):
        gamma_oracle(spec, [2], 0.3, start=2, step=1, max_budget=4)
    loose = gamma_oracle(spec, [2], 0.3, start=2, step=1, max_budget=4, strict=False)
    assert loose.budget == 4 and loose.last_change > 1e-11
