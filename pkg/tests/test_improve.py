import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from ultraspherical import DomainError, MeasureParams, entropy
from ultraspherical import improve, region
from ultraspherical.improve import gamma, gamma1, varphi1, varphi_beta, varphi_sup


def ode_oracle(s, beta, p, d):
    """Integrate phi' = 1 + phi g/(2 b^2) (1 - (p-2) z)^(-delta), phi(0) = 0."""
    m = p - 2
    if math.isinf(beta):
        coef, dl = -region.coeffs(p, d).a / 2, -(4 - p) / (2 * m)
    elif beta == 1:
        coef, dl = gamma1(p, d) / 2, 1.0
    else:
        coef, dl = gamma(beta, p, d) / (2 * beta**2), improve.delta(beta, p)
    sol = solve_ivp(lambda z, y: 1 + y * coef * (1 - m * z) ** (-dl), (0, s), [0.0],
                    method="DOP853", rtol=1e-13, atol=1e-15)
    return float(sol.y[0, -1])


def test_gamma1_examples():
    assert gamma1(1.0, 4.0) == 0
    for d in range(1, 11):
        assert gamma1(2.0, d) == pytest.approx((4 * d - 1) / (d + 2) ** 2, abs=1e-15)
    exact = Fraction(2, 5) ** 2 * 2 * (Fraction(19, 4) - 3)
    assert gamma1(3.0, 3.0) == pytest.approx(float(exact), abs=1e-15) and float(exact) == 0.56


@settings(max_examples=200, deadline=None)
@given(st.floats(1, 12), st.floats(1, 15))
def test_gamma_at_one_is_gamma1(p, d):
    assert gamma(1.0, p, d) == pytest.approx(gamma1(p, d), abs=1e-12 * max(1, p * p))


def test_delta_values():
    assert improve.delta(1.0, 3.0) == pytest.approx(1.0)
    for p in (2.5, 3.0, 3.5):
        assert improve.delta(p / (4 - p), p) == pytest.approx(0.0, abs=1e-15)
        assert improve.delta(2 / (4 - p), p) == pytest.approx((4 - p) / 4)
    assert improve.delta(2.0, 3.0) == 0.25
    with pytest.raises(DomainError):
        improve.delta(1.0, 2.0)


def test_ineq_params_bundle():
    ip = improve.IneqParams(2.5, 5.0, 1.2)
    assert ip.gamma == gamma(1.2, 2.5, 5.0) and ip.kappa == pytest.approx(1.6) and ip.admissible.contains(1.2)


@pytest.mark.parametrize("p,d", [(1.5, 2.0), (1.2, 10.0), (2.5, 5.0), (3.0, 3.0), (4.0, 1.0), (1.9, 1.0)])
def test_varphi1_matches_ode(p, d):
    end = 1 / (p - 2) if p > 2 else 3.0
    for s in np.linspace(0, 0.9 * end, 7)[1:]:
        assert varphi1(float(s), p, d) == pytest.approx(ode_oracle(float(s), 1.0, p, d), rel=1e-10)


def test_varphi1_extended_precision():
    p, d, s = mpmath.mpf(3) / 2, 2, mpmath.mpf(1) / 5
    with mpmath.workdps(40):
        g1 = (mpmath.mpf(d - 1) / (d + 2)) ** 2 * (p - 1) * ((2 * d * d + 1) / mpmath.mpf(d - 1) ** 2 - p)
        m = p - 2
        h = 1 - m * s
        ref = 2 / (g1 + 2 * m) * (h ** (-g1 / (2 * m)) - h)
    v = varphi1(0.2, 1.5, 2.0)
    assert v == pytest.approx(float(ref), rel=1e-14) and v > 0.2


@pytest.mark.parametrize("d", [1.0, 2.0, 3.0])
def test_log_branch_continuity(d):
    p0 = improve.log_branch_exponent(d)
    assert gamma1(p0, d) == pytest.approx(2 * (2 - p0), abs=1e-14)
    for s in (0.1, 0.5, 0.9 / (2 - p0)):
        mid = varphi1(s, p0, d)
        for dp in (-1e-7, 1e-7):
            assert varphi1(s, p0 + dp, d) == pytest.approx(mid, abs=1e-5)
        assert mid == pytest.approx(ode_oracle(s, 1.0, p0, d), rel=1e-9)


def test_log_branch_exponent_values():
    assert improve.log_branch_exponent(1.0) == pytest.approx(13 / 7, abs=1e-13)


def test_varphi1_at_two():
    g = gamma1(2.0, 3.0)
    assert varphi1(0.7, 2.0, 3.0) == pytest.approx(2 / g * math.expm1(g * 0.35), rel=1e-15)


def test_domain_guards():
    assert varphi1(0.0, 2.5, 5.0) == 0 and varphi_beta(0.0, 1.2, 2.5, 5.0) == 0
    with pytest.raises(DomainError):
        varphi1(-0.1, 2.5, 5.0)
    with pytest.raises(DomainError):
        varphi1(2.0, 2.5, 5.0)
    with pytest.raises(DomainError):
        varphi_beta(0.5, 1.0, 2.5, 5.0)
    with pytest.raises(DomainError):
        varphi_beta(0.5, 1.8, 2.5, 5.0)  # beyond 2/(4-p) = 4/3
    with pytest.raises(DomainError):
        varphi_beta(0.5, 7.0, 2.5, 5.0, strict=False)  # gamma(7) < 0


def test_beta_limit_recovers_varphi1():
    for s in np.linspace(0, 0.95 * 2, 40)[1:]:
        assert abs(varphi_beta(float(s), 1 + 1e-5, 2.5, 5.0) - varphi1(float(s), 2.5, 5.0)) < 1e-4


@pytest.mark.parametrize("s,beta,p,d,strict", [
    (0.5, 1.8, 2.5, 5.0, False),
    (1.5, 1.2, 2.5, 5.0, True),
    (0.8, 1.7, 3.0, 3.0, True),
    (0.3, 1.5, 3.0, 3.0, True),
    (0.3, 3.0, 5.0, 1.0, True),
    (0.3, math.inf, 5.0, 1.0, True),
])
def test_varphi_beta_matches_ode(s, beta, p, d, strict):
    assert varphi_beta(s, beta, p, d, strict=strict) == pytest.approx(ode_oracle(s, beta, p, d), abs=1e-7, rel=1e-9)


def test_infinite_beta_closed_form():
    for s in (0.1, 0.3, 0.45):
        assert varphi_beta(s, math.inf, 4.0, 1.0) == pytest.approx(math.expm1(s), rel=1e-12)


@pytest.mark.parametrize("p,d", [(2.5, 5.0), (3.0, 3.0), (4.0, 1.0), (6.0, 2.0)])
def test_sup_dominates_members(p, d):
    B = region.admissible_set(p, d)
    hi = B.hi if math.isfinite(B.hi) else B.lo + 20
    end = 1 / (p - 2)
    for s in (0.05 * end, 0.4 * end, 0.9 * end):
        val, arg = varphi_sup(s, p, d)
        members = [varphi1(s, p, d)] + [varphi_beta(s, float(b), p, d) for b in np.linspace(B.lo, hi, 25)[1:-1]]
        assert val >= max(members) - 1e-12 * val
        assert val >= s


def test_sup_examples():
    s = 0.5
    assert varphi_sup(s, 2.5, 5.0)[0] >= varphi_beta(s, 4 / 3.5, 2.5, 5.0)
    assert varphi_sup(0.3, 1.5, 3.0) == (varphi1(0.3, 1.5, 3.0), 1.0)
    v, _ = varphi_sup(1e-7, 2.5, 5.0)
    assert v / 1e-7 == pytest.approx(1.0, abs=1e-6)


def test_Phi_improves_and_inverts():
    p, d = 2.5, 5.0
    for s in np.arange(0.1, 2.0, 0.1):
        s = float(s)
        val = improve.Phi(s, p, d)
        assert val > s
        assert improve.Psi(val, p, d) == pytest.approx(val - s, abs=1e-9)
    assert improve.Phi(0.0, p, d) == 0 and improve.Psi(0.0, p, d) == 0
    assert improve.Psi(0.4, p, d) > 0


def test_Phi_range_bounded_below_two():
    p, d = 1.5, 2.0
    top = 2 / (2 * (2 - p) - gamma1(p, d))
    assert improve.Phi(0.999 * 2, p, d) < top
    with pytest.raises(DomainError):
        improve.Phi_inverse(1.01 * top, p, d)
    assert improve.Phi_inverse(1.01 * top, p, d, clamp=True) == 2.0


def test_Phi_reparametrization_chain():
    p, d = 2.5, 5.0
    mp = MeasureParams(d)
    u = mp.rule(64).sample(lambda x: np.exp(0.4 * x - 0.3 * x**2), True)
    u = u.map(lambda v: v / u.norm(2))
    s = entropy(u, p, mp)
    npn2 = u.norm(p) ** 2
    assert npn2 == pytest.approx(1 + (p - 2) * s, rel=1e-13)
    assert improve.Phi(s, p, d) == pytest.approx(npn2 * varphi_sup(s / npn2, p, d)[0], rel=1e-13)


def test_improved_log_sobolev_rhs():
    g = 7 / 16
    assert improve.gamma1_star(2.0) == g
    assert improve.improved_log_sobolev_rhs(1.0, 2.0) == pytest.approx(4 / g * math.log1p(g / 4), rel=1e-15)
    assert improve.improved_log_sobolev_rhs(0.0, 3.0) == 0
    x = 1e-6
    assert improve.improved_log_sobolev_rhs(x, 3.0) == pytest.approx(2 * x / 3, rel=1e-6)


@pytest.mark.parametrize("p,d,fn", [(3.0, 4.0, lambda x: 1 + 0.2 * x), (1.5, 2.0, lambda x: (1 + x**2) / 2 + 0.01)])
def test_stability_gap_examples(p, d, fn):
    mp = MeasureParams(d)
    rep = improve.stability_gap(mp.rule(64).sample(fn, True), p, mp)
    assert rep.ok and rep.gap >= 0 and rep.psi_bound >= 0 and rep.psi_phi_bound >= 0


def test_stability_gap_constant_and_p2():
    mp = MeasureParams(3.0)
    c = mp.rule(32).sample(lambda x: 0 * x + 2.0, True)
    rep = improve.stability_gap(c, 3.0, mp)
    assert abs(rep.gap) < 1e-12 and 0 <= rep.psi_bound < 1e-20 and rep.ok
    with pytest.raises(DomainError):
        improve.stability_gap(c, 2.0, mp)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-0.6, 0.6), min_size=1, max_size=5),
       st.sampled_from([(1.2, 10.0), (1.5, 2.0), (2.5, 5.0), (3.0, 3.0), (4.0, 1.0), (2.0, 2.0)]))
def test_main_inequality_property(c, pd):
    p, d = pd
    mp = MeasureParams(d)
    rule = mp.rule(48)
    u = rule.grid(np.exp(rule.from_coeffs([0.0] + c)), True)
    assert improve.main_inequality_slack(u, p, mp) >= -1e-8


def test_fig5_1_ratio_exceeds_one():
    for xi in np.linspace(0.05, 0.95, 10):
        assert improve.fig5_1_ratio(float(xi), 1.5, 2.0) > 1
    for xi in np.linspace(1.1, 4.0, 10):
        assert improve.fig5_1_ratio(float(xi), 2.5, 2.0) > 1


def test_improvement_curve_shapes():
    cur = improve.improvement_curve(2.5, 5.0, [0.1, 0.5, 1.0])
    assert cur.phi_values.shape == (3,) and np.all(cur.phi_values > cur.s_grid)
    assert np.all((cur.beta_at_max >= 1) & (cur.beta_at_max <= 4 / 3))
