"""Tabulated data behind the figures, as (header, rows) pairs.

Every table is a pure function of its parameters, so repeated emission gives
byte-identical CSV.
"""
from __future__ import annotations

import math

import numpy as np

from . import improve, region, spectral
from .core import MeasureParams

FIG4_BETAS = (2.383, 2.267, 2.15, 2.033, 1.917, 1.8, 1.683, 1.567, 1.45)
FIG2_DIMS = (1.0, 2.0, 3.0, 4.0, 5.0, 10.0)
FIG5_2_GAMMAS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75)
FIGURES = ("fig1", "fig2", "fig3_2", "fig4", "fig5_1", "fig5_2")


def _fmt_beta(b: float) -> str:
    return f"{b:g}"


def fig1(n: int = 300, d_min: float = 1.01, d_max: float = 4.0):
    """Thresholds p_-(d) <= p_+(d) where a(p, d) changes sign, with 2* and 2#."""
    header = ["d", "p_minus", "p_plus", "p_critical", "p_sharp"]
    rows = []
    for d in np.linspace(d_min, d_max, n):
        lo, hi = region.p_thresholds(float(d))
        mp = MeasureParams(float(d))
        rows.append([d, lo, hi, mp.critical_exponent(), mp.sharp_exponent()])
    return header, rows


def _beta_rows(d: float, ps):
    rows = []
    for p in ps:
        roots = region.beta_roots(p, d)
        bm, bp = roots if roots else (math.nan, math.nan)
        B = region.admissible_set(p, d)
        c = region.coeffs(p, d)
        upper = 2 / (4 - p) if p < 4 else math.inf
        rows.append([d, p, c.a, bm, bp, 4 / (6 - p) if p != 6 else math.nan, upper,
                     B.lo if B.nonempty else math.nan, B.hi if B.nonempty else math.nan])
    return rows


_BETA_HEADER = ["d", "p", "a", "beta_minus", "beta_plus", "beta_0", "beta_upper", "admissible_lo", "admissible_hi"]


def fig2(n: int = 200, dims=FIG2_DIMS):
    """Roots beta_-(p, d), beta_+(p, d) and the admissible-set endpoints."""
    rows = []
    for d in dims:
        pmax = MeasureParams(d).critical_exponent()
        pmax = 20.0 if math.isinf(pmax) else pmax
        rows += _beta_rows(d, np.linspace(1.0, pmax, n)[1:])
    return _BETA_HEADER, rows


def fig3_2(n: int = 400):
    """d = 2 in detail: full p-range and an enlargement near (p, beta) = (2, 1)."""
    ps = np.concatenate([np.linspace(1.0, 18.0, n), np.linspace(1.9, 2.3, n)])
    return _BETA_HEADER, _beta_rows(2.0, ps)


def fig4(n: int = 200, d: float = 5.0, p: float = 2.5, betas=FIG4_BETAS):
    """phi_beta(e) - e and phi_beta(e) - phi_beta0(e) for e in (0, 1/(p-2))."""
    b0 = 4 / (6 - p)
    end = 1 / (p - 2) - improve.ENDPOINT_MARGIN
    es = np.linspace(0.0, end, n + 1)[1:]
    header = ["e"]
    header += [f"phi_minus_e_beta_{_fmt_beta(b)}" for b in betas]
    header += [f"phi_minus_phi0_beta_{_fmt_beta(b)}" for b in betas]
    rows = []
    for e in es:
        e = float(e)
        ref = improve.varphi_beta(e, b0, p, d, strict=False)
        vals = [improve.varphi_beta(e, b, p, d, strict=False) for b in betas]
        rows.append([e] + [v - e for v in vals] + [v - ref for v in vals])
    return header, rows


def fig5_1(n: int = 200, d: float = 2.0):
    """Gain of the beta = 1 improvement: p = 3/2 for xi < 1 and p = 5/2 for xi > 1."""
    header = ["p", "xi", "ratio"]
    rows = []
    for p, xs in ((1.5, np.linspace(0, 1, n + 2)[1:-1]), (2.5, np.linspace(1, 4, n + 1)[1:])):
        rows += [[p, x, improve.fig5_1_ratio(float(x), p, d)] for x in xs]
    return header, rows


def fig5_2(n: int = 200, d: float = 2.0, p: float = 1.5, k: int = 1, gammas=FIG5_2_GAMMAS):
    """Ratios chi2/chi1 for several gamma and chi3/chi1 on x in (0, 1)."""
    alpha = spectral.eigen_data(k, d).alpha_k
    xs = np.linspace(0, 1, n + 2)[1:-1]
    header = ["x"] + [f"chi2_over_chi1_gamma_{g:g}" for g in gammas] + ["chi3_over_chi1", "linear_flow_ratio"]
    rows = []
    for x in xs:
        c1 = float(spectral.chi1(x, alpha, p))
        row = [x] + [float(spectral.chi2(x, alpha, p, g)) / c1 for g in gammas]
        row += [float(spectral.chi3(x, p)) / c1, improve.fig5_1_ratio(float(x), p, d)]
        rows.append(row)
    return header, rows


def phi_table(p: float, d: float, n: int = 50):
    """Phi, the envelope argmax and Psi on a grid of entropy values."""
    end = 1 / (2 - p) if p < 2 else 2.0
    header = ["s", "Phi", "beta_at_max", "Psi_of_Phi"]
    rows = []
    for s in np.linspace(0, 0.95 * end, n + 1)[1:]:
        s = float(s)
        scale = 1 + (p - 2) * s
        val, b = improve.varphi_sup(s / scale, p, d) if p != 2 else (improve.varphi1(s, p, d), 1.0)
        Phi = scale * val
        rows.append([s, Phi, b, Phi - s])
    return header, rows


def table(which: str, **kw):
    fns = {"fig1": fig1, "fig2": fig2, "fig3_2": fig3_2, "fig4": fig4, "fig5_1": fig5_1, "fig5_2": fig5_2}
    if which not in fns:
        raise ValueError(f"unknown figure {which!r}; choose from {', '.join(FIGURES)}")
    return fns[which](**kw)
