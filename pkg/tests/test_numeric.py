import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from startail._numeric import (
    bisect,
    comb_table,
    golden_max,
    golden_min,
    log_comb,
    logsumexp,
    nearest_integer_gap,
    threshold_count,
    xlogy,
)


def test_log_comb_exact_and_lgamma_agree():
    assert log_comb(20, 7) == math.log(math.comb(20, 7))
    assert log_comb(40, 13) == pytest.approx(math.log(math.comb(40, 13)), rel=1e-13)
    assert log_comb(5, 6) == -math.inf


def test_comb_table():
    assert comb_table(5, 2).tolist() == [0, 0, 1, 3, 6, 10]


def test_xlogy_conventions():
    assert xlogy(0, 0) == 0.0
    assert xlogy(2, 0) == -math.inf
    assert xlogy(2, math.e) == pytest.approx(2.0)


def test_logsumexp_edge_cases():
    assert logsumexp([]) == -math.inf
    assert logsumexp([-math.inf, -math.inf]) == -math.inf
    assert logsumexp([0.0, 0.0]) == pytest.approx(math.log(2))
    assert logsumexp([-1000.0, -1000.0]) == pytest.approx(-1000 + math.log(2))


def test_golden_min_quadratic_and_endpoint():
    x, fx = golden_min(lambda t: (t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-8)
    x, fx = golden_min(lambda t: t, 0.0, 1.0)
    assert x == 0.0 and fx == 0.0
    x, fx = golden_max(lambda t: -(t - 2) ** 2, 0, 5)
    assert x == pytest.approx(2, abs=1e-8)


def test_bisect():
    assert bisect(lambda t: t * t - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        bisect(lambda t: t * t + 1, 0, 2)


@given(st.integers(0, 10**6))
def test_threshold_count_integers(k):
    assert threshold_count(float(k)) == k
    assert threshold_count(k + 0.5) == k + 1
    assert nearest_integer_gap(float(k)) == 0


def test_threshold_count_negative_is_zero():
    assert threshold_count(-3.5) == 0


def test_threshold_count_snaps_rounding_noise():
    # 1.5 * 5.4 is 8.100000000000001 in floating point
    assert threshold_count(1.5 * 5.4) == 9
    assert threshold_count(3 * 0.1 * 10) == 3
