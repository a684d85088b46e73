from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import small_specs
from railyard.ensemble import enumerate_coverings
from railyard.fock import (
    apply_gamma,
    cauchy_truncated,
    partition_function_braket,
    partition_function_closed,
    tail_bound,
    vacuum,
    verify_commutation,
)
from railyard.graph import RailYardSpec

F = Fraction


def test_gamma_on_vacuum():
    x, N = F(1, 3), 6
    assert apply_gamma("L+", x, vacuum(), N) == {(): 1}
    assert apply_gamma("L-", x, vacuum(), N) == {((k,) if k else ()): x**k for k in range(N + 1)}
    assert apply_gamma("R-", x, vacuum(), N) == {(1,) * k: x**k for k in range(N + 1)}
    with pytest.raises(ValueError):
        apply_gamma("Q+", x, vacuum(), N)


def test_braket_examples():
    assert partition_function_braket(RailYardSpec.from_words("LL", "-+", ["1/2", "1/2"]), 10) == 1
    geo = RailYardSpec.from_words("LL", "+-", ["1/2", "1/2"])
    assert partition_function_braket(geo, 30) == F(4, 3) * (1 - F(1, 4) ** 31)
    mixed = RailYardSpec.from_words("LR", "+-", ["1/2", "1/2"])
    assert partition_function_braket(mixed, 1) == F(5, 4)
    assert partition_function_braket(mixed, 9) == F(5, 4)


def test_closed_examples():
    assert partition_function_closed(RailYardSpec.from_words("LR", "-+", ["1/2", "1/2"])) == 1
    assert partition_function_closed(RailYardSpec.from_words("LL", "+-", ["1/2", "1/2"])) == F(4, 3)
    assert partition_function_closed(RailYardSpec.from_words("LR", "+-", ["1/2", "1/2"])) == F(5, 4)
    with pytest.raises(Exception):
        partition_function_closed(RailYardSpec.from_words("LL", "+-", ["2", "1"]))


@settings(max_examples=40, deadline=None)
@given(small_specs())
def test_braket_sandwich_and_monotone(spec):
    closed = partition_function_closed(spec)
    previous = F(0)
    for N in (2, 5, 8):
        z = partition_function_braket(spec, N)
        assert previous <= z <= closed
        assert closed - z <= tail_bound(spec, N)
        previous = z


@settings(max_examples=25, deadline=None)
@given(small_specs())
def test_braket_equals_enumeration(spec):
    assert enumerate_coverings(spec, 6).total_weight == partition_function_braket(spec, 6)


@pytest.mark.parametrize("a1", "LR")
@pytest.mark.parametrize("a2", "LR")
def test_commutation_relations(a1, a2):
    report = verify_commutation(a1, a2, N=10, degree=5)
    assert report.ok and report.entries_checked > 0
    for sign in "+-":
        same = verify_commutation(a1, a2, N=10, degree=5, sign=sign)
        assert same.ok, same.failures[:3]


def test_commutation_guards():
    with pytest.raises(ValueError):
        verify_commutation("L", "L", F(2), F(1))
    with pytest.raises(ValueError):
        verify_commutation("L", "R", N=4, degree=5)


def test_cauchy_examples():
    report = cauchy_truncated(F(1, 2), F(1, 2), 12)
    assert report.ok
    assert report.series == sum(F(1, 4) ** k for k in range(13))
    assert report.dual_series == F(5, 4)
    zero = cauchy_truncated(F(0), F(1, 3), 8)
    assert zero.series == 1 and zero.dual_series == 1
