import math

import numpy as np
import pytest

from ultraspherical import figures, region, verify
from ultraspherical.verify import VerificationReport


def test_fig1_thresholds_and_exponents():
    header, rows = figures.fig1(n=20)
    assert header == ["d", "p_minus", "p_plus", "p_critical", "p_sharp"]
    assert rows[0][0] == pytest.approx(1.01) and rows[-1][0] == pytest.approx(4.0)
    last = rows[-1]
    assert last[1] == pytest.approx(3.0) and last[2] == pytest.approx(3.0) and last[3] == pytest.approx(4.0)
    for d, lo, hi, _, sharp in rows:
        assert lo <= hi and abs(region.coeffs(lo, d).a) < 1e-9


def test_fig2_and_fig3_2_columns():
    header, rows = figures.fig3_2(n=30)
    assert header[:5] == ["d", "p", "a", "beta_minus", "beta_plus"]
    near = [r for r in rows if abs(r[1] - 2.0) < 0.02]
    assert near and all(r[7] == 1.0 for r in near if r[1] <= 2)
    _, rows2 = figures.fig2(n=10)
    assert {r[0] for r in rows2} == set(figures.FIG2_DIMS)


def test_fig4_positive_and_reference_column():
    header, rows = figures.fig4(n=20)
    k = len(figures.FIG4_BETAS)
    assert len(header) == 1 + 2 * k
    data = np.array(rows)
    assert np.all(data[:, 1 : k + 1] > 0)
    assert data[-1, 0] == pytest.approx(2.0, abs=1e-8)


def test_fig5_tables():
    h1, r1 = figures.fig5_1(n=10)
    assert {r[0] for r in r1} == {1.5, 2.5} and all(r[2] > 1 for r in r1)
    h2, r2 = figures.fig5_2(n=10)
    assert [c for c in h2 if c.startswith("chi2")] == [f"chi2_over_chi1_gamma_{g:g}" for g in figures.FIG5_2_GAMMAS]
    for row in r2:
        assert max(row[1:8]) <= max(1.0, row[8]) + 1e-12


def test_table_dispatch():
    with pytest.raises(ValueError):
        figures.table("fig9")


def test_report_status_rule():
    assert VerificationReport("x", 1, -1e-9, 1e-8).status == "pass"
    assert VerificationReport("x", 1, -1e-7, 1e-8).status == "fail"
    assert VerificationReport("x", 1, -math.inf, 1.0).status == "fail"


def test_random_positive_functions_are_positive_and_varied():
    rng = np.random.default_rng(0)
    rule = verify.MeasureParams(3.0).rule(32)
    us = [verify.random_positive_function(rule, rng) for _ in range(50)]
    spreads = [np.ptp(np.log(u.values)) for u in us]
    assert all(np.min(u.values) > 0 for u in us)
    assert min(spreads) < 0.05 < 1.0 < max(spreads)


def test_seed_robustness():
    a = {r.suite: r.status for r in verify.verify_all(seed=7)}
    b = {r.suite: r.status for r in verify.verify_all(seed=42)}
    assert a == b and set(a) == set(verify.SUITES)
