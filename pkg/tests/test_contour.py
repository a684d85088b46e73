import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import spec_corpus
from railyard.contour import (
    Circle,
    ContourError,
    ContourSpec,
    finite_covariance_11,
    finite_moment_k1,
    integrate_contour,
    kernel_values,
    moment_integrand,
)
from railyard.ensemble import enumerate_coverings, exact_covariance, exact_expectation
from railyard.graph import RailYardSpec
from railyard.partitions import gamma_k

UNIT = Circle(0, 1.0)


def test_residue_sanity():
    assert abs(integrate_contour(lambda z: 1 / z, UNIT).value - 1) < 1e-14
    assert abs(integrate_contour(lambda z: 1 / (z - 0.3 - 0.2j), UNIT).value - 1) < 1e-14
    assert abs(integrate_contour(lambda z: 1 / (z - 1.7), UNIT).value) < 1e-14
    for k in range(4):
        assert abs(integrate_contour(lambda z, k=k: z**k, UNIT).value) < 1e-14


@settings(max_examples=40)
@given(st.complex_numbers(max_magnitude=0.8), st.complex_numbers(max_magnitude=0.8))
def test_rational_residues(a, b):
    # residue of 1/((z - a)(z - b)) sums to 0 when both poles are inside
    if abs(a - b) < 1e-2:
        return
    res = integrate_contour(lambda z: 1 / ((z - a) * (z - b)), UNIT).value
    assert abs(res) < 1e-12 * max(1, 1 / abs(a - b) ** 2)
    res = integrate_contour(lambda z: z**2 / (z - a), UNIT).value
    assert abs(res - a**2) < 1e-12


def test_contour_spec_validation():
    with pytest.raises(ContourError):
        ContourSpec([Circle(0, 1), Circle(0.5, 1)]).validate()
    with pytest.raises(ContourError):
        integrate_contour(lambda z: z, ContourSpec([UNIT], inside=[2.0]))
    with pytest.raises(ContourError):
        integrate_contour(lambda z: z, ContourSpec([UNIT], outside=[0.5]))


def test_node_cap_reported():
    with pytest.raises(ContourError, match="no convergence"):
        integrate_contour(lambda z: 1 / (z - 0.999999999), UNIT, tol=1e-15, check=False)


def test_moment_examples():
    forced = RailYardSpec.from_words("LL", "-+", ["1/2", "1/2"])
    assert finite_moment_k1(forced, 1, 0.5) == pytest.approx(1, abs=1e-13)
    # the two-covering example with the L column placed second, so partition 1 is an L reference
    mixed = RailYardSpec.from_words("RL", "+-", ["1/2", "1/2"])
    expected = 0.8 + 0.2 * gamma_k((1,), 1, 0.7, 0.7)
    assert finite_moment_k1(mixed, 1, 0.7) == pytest.approx(expected, abs=1e-9)
    geo = RailYardSpec.from_words("LL", "+-", ["1/3", "1/3"])
    q = 1 / 9
    oracle = sum((1 - q) * q**k * gamma_k((k,) if k else (), 1, 0.5, 0.5) for k in range(60))
    assert finite_moment_k1(geo, 1, 0.5) == pytest.approx(oracle, abs=1e-9)


def test_moment_errors():
    spec = RailYardSpec.from_words("RL", "+-", ["2", "2"])
    with pytest.raises(ContourError, match="separating"):
        finite_moment_k1(spec, 1, 0.9)
    with pytest.raises(ValueError):
        finite_moment_k1(spec, 0, 0.5)
    with pytest.raises(ValueError):
        finite_moment_k1(spec, 1, 1.5)


def test_moment_radius_invariance():
    for spec in spec_corpus(15, seed=11):
        for i in spec.columns:
            if spec.a[i - spec.l] != "L":
                continue
            f = moment_integrand(spec, i, 0.6)
            lo = max([abs(p) for p in f.inside], default=0.0)
            hi = min([abs(p) for p in f.outside], default=10 * max(lo, 0.1))
            base = finite_moment_k1(spec, i, 0.6)
            for frac in (0.2, 0.5, 0.8):
                r = lo + frac * (hi - lo) if lo else frac * hi
                assert abs(finite_moment_k1(spec, i, 0.6, radius=r) - base) < 1e-10


def test_moments_and_covariances_match_enumeration():
    worst_m = worst_c = 0.0
    for spec in spec_corpus(12, seed=5):
        ens = enumerate_coverings(spec, 18)
        ls = [i for i in spec.columns if spec.a[i - spec.l] == "L"]
        for t in (0.4, 0.8):
            obs = {i: (lambda c, i=i: gamma_k(c.at(spec, i), 1, t, t)) for i in ls}
            for i in ls:
                worst_m = max(worst_m, abs(finite_moment_k1(spec, i, t) - exact_expectation(spec, ens, obs[i])))
                for j in ls:
                    cov = finite_covariance_11(spec, i, j, t)
                    worst_c = max(worst_c, abs(cov - exact_covariance(spec, ens, obs[i], obs[j])))
    assert worst_m < 1e-8
    assert worst_c < 1e-7


def test_covariance_methods_agree_and_deterministic_column():
    spec = RailYardSpec.from_words("LRLL", "++--", ["1/3", "1/4", "1/5", "1/3"])
    nested = finite_covariance_11(spec, 2, 3, 0.6, method="nested")
    residues = finite_covariance_11(spec, 2, 3, 0.6, method="residues")
    assert abs(nested - residues) < 1e-10
    assert abs(finite_covariance_11(spec, 0, 2, 0.6)) < 1e-12
    with pytest.raises(ValueError):
        finite_covariance_11(spec, 2, 3, 0.6, method="bogus")


def test_kernel_values():
    assert kernel_values(0.7 + 0.1j, 0, 0.4).T_LL == 1
    z, w = 1.3 + 0.4j, 0.2 - 0.5j
    for t in (0.3, 0.6, 0.9):
        assert cmath.isclose(kernel_values(z, w, t).T_LL, kernel_values(z, w, 1 / t).T_LL, rel_tol=1e-13)
    limit = z * w / (z - w) ** 2
    t = 1 - 1e-5
    scaled = (kernel_values(z, w, t).T_LL - 1) / ((1 - t) * (1 / t - 1))
    assert abs(scaled - limit) < 1e-4
    assert kernel_values(z, w, 0.5).D == pytest.approx(1 / (2j * np.pi * w))
    with pytest.raises(ContourError):
        kernel_values(1.0, 0.5, 0.5)
