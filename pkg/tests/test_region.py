import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ultraspherical import region
from ultraspherical.improve import gamma
from ultraspherical.region import Kind

S3 = math.sqrt(3)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.5, 3.7, 8.0])
def test_coefficient_columns(p):
    c1 = region.coeffs(p, 1.0)
    assert c1.a == pytest.approx(2 - p, abs=1e-15) and c1.b == pytest.approx((4 - p) / 3, abs=1e-15)
    assert region.coeffs(p, 2.0).a == pytest.approx((p * p - 18 * p + 33) / 16, abs=1e-14)


@pytest.mark.parametrize("d", [1.0, 2.0, 3.0, 7.5])
def test_p_equal_one_is_degenerate(d):
    c = region.coeffs(1.0, d)
    assert (c.a, c.b, c.disc) == (1.0, 1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1, 30), st.floats(1, 20))
def test_factored_discriminant(p, d):
    c = region.coeffs(p, d)
    assert c.disc == pytest.approx(c.b**2 - c.a, abs=1e-12 * max(1, c.b**2))


@pytest.mark.parametrize("d,expected", [(2.0, (9 - 4 * S3, 9 + 4 * S3)), (3.0, (2.25, 6.0)), (4.0, (3.0, 3.0))])
def test_p_thresholds_table(d, expected):
    assert region.p_thresholds(d) == pytest.approx(expected, abs=1e-12)


def test_p_thresholds_outside_range():
    assert region.p_thresholds(1.0) is None and region.p_thresholds(4.5) is None


@settings(max_examples=100, deadline=None)
@given(st.floats(1.01, 4.0))
def test_p_thresholds_are_zeros_of_a(d):
    for p in region.p_thresholds(d):
        assert abs(region.coeffs(p, d).a) < 1e-10 * max(1.0, p)


@pytest.mark.parametrize("d", [2.0, 5.0, 7.0, 10.0])
def test_roots_at_p_one(d):
    assert region.beta_roots(1.0, d) == pytest.approx((1.0, 1.0), abs=1e-12)


@pytest.mark.parametrize("d", [4, 5, 6, 7, 8])
def test_roots_at_critical_exponent(d):
    r = region.beta_roots(2 * d / (d - 2), d)
    assert r == pytest.approx(((d - 2) / (d - 3),) * 2, abs=1e-12)


def test_roots_exact_example():
    # a = 15/49, b = 5/7: roots 7 (5 -+ sqrt 10) / 15
    r = region.beta_roots(3.0, 5.0)
    s10 = math.sqrt(10)
    assert r == pytest.approx((7 * (5 - s10) / 15, 7 * (5 + s10) / 15), rel=1e-14)
    for beta in r:
        assert abs(gamma(beta, 3.0, 5.0)) < 1e-14


def test_roots_none_cases():
    assert region.beta_roots(3.0, 4.0) is None  # a = 0
    assert region.beta_roots(7.0, 3.0) is None  # complex roots beyond 2*
    assert max(region.beta_roots(16.5, 2.0)) < 0  # real roots, both negative


@pytest.mark.parametrize("p,d,lo", [(3.0, 4.0, 0.75), (2.25, 3.0, 2 / 3)])
def test_half_line_cases(p, d, lo):
    iv = region.classify(p, d)
    assert iv.kind is Kind.HALF_LINE_GE and iv.lo == pytest.approx(lo, abs=1e-12)


def test_bounded_and_empty_cases():
    iv = region.classify(2.5, 6.0)
    assert iv.kind is Kind.BOUNDED
    assert (iv.lo, iv.hi) == pytest.approx(region.beta_roots(2.5, 6.0))
    assert region.classify(7.0, 3.0).kind is Kind.EMPTY
    assert region.classify(3.0, 5.0).kind is Kind.BOUNDED
    # a < 0 gives two rays
    assert region.classify(3.0, 1.0).kind is Kind.TWO_RAYS


def test_gamma_special_values():
    for beta in (-2.0, 0.5, 1.0, 3.0):
        assert gamma(beta, 1.0, 4.0) == pytest.approx(-((beta - 1) ** 2), abs=1e-14)
        assert gamma(beta, 6.0, 3.0) == pytest.approx(-1.0, abs=1e-13)


@settings(max_examples=300, deadline=None)
@given(st.floats(1, 20), st.floats(1, 12), st.floats(-5, 10))
def test_classify_agrees_with_sign(p, d, beta):
    iv = region.classify(p, d)
    edges = [e for e in (iv.lo, iv.hi) if math.isfinite(e)]
    assume(all(abs(beta - e) > 1e-8 for e in edges))
    assert iv.contains(beta) == (gamma(beta, p, d) >= 0)


@pytest.mark.parametrize("p,d", [(1.0, 2.0), (1.5, 3.0), (2.0, 7.0)])
def test_admissible_singleton(p, d):
    B = region.admissible_set(p, d)
    assert B.is_singleton and B.lo == 1.0 and B.contains(1.0) and not B.contains(1.1)


def test_admissible_examples():
    assert not region.admissible_set(16.0, 2.0).nonempty
    B = region.admissible_set(2.5, 5.0)
    assert (B.lo, B.hi) == pytest.approx((1.0, 4 / 3))
    assert B.contains(4 / (6 - 2.5))
    assert (region.admissible_set(3.0, 3.0).lo, region.admissible_set(3.0, 3.0).hi) == pytest.approx((1.0, 2.0))
    assert region.admissible_set(4.0, 1.0).hi == math.inf


def test_nonemptiness_flip_at_d2():
    edge = 9 + 4 * S3
    assert region.admissible_set(edge - 1e-6, 2.0).nonempty
    assert not region.admissible_set(edge + 1e-6, 2.0).nonempty


@settings(max_examples=150, deadline=None)
@given(st.floats(2.05, 12.0), st.data())
def test_exponent_four_over_six_minus_p_membership(d, data):
    # gamma(4/(6-p)) >= 0 exactly when 18d/(17d-2) <= p <= 2*
    crit = 2 * d / (d - 2)
    p = data.draw(st.floats(1.0, min(crit, 5.9)))
    lower = 18 * d / (17 * d - 2)
    assume(abs(p - lower) > 1e-6 and abs(p - crit) > 1e-6)
    assert (gamma(4 / (6 - p), p, d) >= 0) == (lower <= p <= crit)


def test_admissible_set_is_subset_of_positive_gamma():
    rng = np.random.default_rng(1)
    for p, d in zip(rng.uniform(2.01, 12, 200), rng.uniform(1, 10, 200)):
        B = region.admissible_set(p, d)
        if not B.nonempty:
            continue
        hi = B.hi if math.isfinite(B.hi) else B.lo + 50
        for beta in np.linspace(B.lo, hi, 23)[1:-1]:
            assert gamma(beta, p, d) > 0
            assert beta <= (2 / (4 - p) if p < 4 else math.inf)
