from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from railyard.partitions import (
    EMPTY,
    conjugate,
    f_lambda,
    format_rational,
    gamma_k,
    interlaces,
    length,
    make_partition,
    parse_rational,
    partitions_of,
    partitions_up_to,
    size,
    skew_schur_jacobi_trudi,
    skew_schur_single,
    strips_above,
    strips_below,
)

partitions = st.lists(st.integers(1, 8), max_size=7).map(lambda xs: tuple(sorted(xs, reverse=True)))
unit = st.floats(0.05, 0.95)


def test_make_partition_trims_and_checks():
    assert make_partition([3, 1, 0, 0]) == (3, 1)
    with pytest.raises(ValueError):
        make_partition([1, 2])
    assert size(EMPTY) == 0 and length(EMPTY) == 0


@pytest.mark.parametrize("lam, expected", [((), ()), ((2,), (1, 1)), ((3, 1, 1), (3, 1, 1)), ((4, 2), (2, 2, 1, 1))])
def test_conjugate_examples(lam, expected):
    assert conjugate(lam) == expected


def test_conjugate_involution_exhaustive():
    for lam in partitions_up_to(12):
        assert conjugate(conjugate(lam)) == lam


def test_partition_counts():
    # p(n) for n = 0..10
    assert [sum(1 for _ in partitions_of(n)) for n in range(11)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_interlacing_examples():
    assert interlaces((), (2,))
    assert not interlaces((2,), (3, 1, 1))
    assert interlaces((2,), (3, 1, 1), dual=True)


def test_interlacing_duality_exhaustive():
    parts = list(partitions_up_to(7))
    for mu in parts:
        for lam in parts:
            assert interlaces(mu, lam, dual=True) == interlaces(conjugate(mu), conjugate(lam))


@given(partitions)
def test_strip_generators_match_interlacing(lam):
    for dual in (False, True):
        below = set(strips_below(lam, dual))
        assert all(interlaces(mu, lam, dual) for mu in below)
        above = set(strips_above(lam, size(lam) + 3, dual))
        assert all(interlaces(lam, nu, dual) for nu in above)
    assert lam in set(strips_below(lam, False))


def test_skew_schur_examples():
    assert skew_schur_single((2,), (), Fraction(1, 2)) == Fraction(1, 4)
    assert skew_schur_single((3, 1, 1), (2,), Fraction(3, 7)) == 0
    assert skew_schur_single((), (), Fraction(5)) == 1


def test_skew_schur_matches_jacobi_trudi():
    x = Fraction(2, 5)
    parts = list(partitions_up_to(6))
    for lam in parts:
        for mu in parts:
            value = skew_schur_single(lam, mu, x)
            assert value == skew_schur_jacobi_trudi(lam, mu, x)
            assert value in (0, x ** (size(lam) - size(mu)))


def test_gamma_examples():
    assert gamma_k((), 3, 0.2, 0.6) == 1.0
    assert gamma_k((1,), 1, 0.5, 0.5) == pytest.approx(1.5, abs=1e-15)
    assert gamma_k((3, 1), 2, 0.4, 1.0) == 1.0
    with pytest.raises(ValueError):
        gamma_k((1,), 0, 0.5, 0.5)


@settings(max_examples=200)
@given(partitions, st.integers(1, 3), unit, unit)
def test_gamma_conjugation_identity(lam, k, q, t):
    lhs = gamma_k(conjugate(lam), k, t, q)
    rhs = gamma_k(lam, k, 1 / q, 1 / t)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_f_lambda_examples():
    assert f_lambda((), 0.3, 0.4) == 0
    assert f_lambda((1,), 0.3, 0.4) == pytest.approx((1 - 0.4) * (0.3 - 1))
    assert f_lambda((2, 1), 0.3, 0.8) == pytest.approx(f_lambda((2, 1), 0.8, 0.3), rel=1e-14)


@settings(max_examples=200)
@given(partitions, unit, unit)
def test_f_lambda_conjugation_identity(lam, q, t):
    assert f_lambda(lam, q, t) == pytest.approx(f_lambda(conjugate(lam), t, q), rel=1e-12, abs=1e-15)


def test_rational_text_round_trip():
    for text in ("1/3", "2", "7/12"):
        assert format_rational(parse_rational(text)) == text
