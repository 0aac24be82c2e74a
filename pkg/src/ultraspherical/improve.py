"""Improvement functions for the interpolation inequality d e <= i.

Naming: ``s`` is an entropy value, ``m = p - 2`` and ``h(s) = 1 - m s``.
``varphi_beta`` is the improvement obtained from the flow with exponent beta
under the normalization ||f||_p = 1; ``Phi`` is the same improvement rewritten
for the normalization ||u||_2 = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize

from .core import DomainError, GridFunction, MeasureParams, entropy, fisher, log_entropy
from .region import AdmissibleSet, admissible_set, coeffs

LOG_BRANCH_TOL = 1e-8
ENDPOINT_MARGIN = 1e-9
QUAD_TOL = 1e-11
BISECT_TOL = 1e-12
BISECT_MAXITER = 200
SCAN_POINTS = 64


def gamma1(p: float, d: float) -> float:
    if d == 1:
        return (p - 1) / 3
    sharp = (2 * d * d + 1) / (d - 1) ** 2
    return ((d - 1) / (d + 2)) ** 2 * (p - 1) * (sharp - p)


def gamma1_star(d: float) -> float:
    """Limit of gamma1 as p -> 2."""
    return (4 * d - 1) / (d + 2) ** 2


def kappa(beta: float, p: float) -> float:
    return beta * (p - 2) + 1


def gamma(beta: float, p: float, d: float) -> float:
    k = kappa(beta, p)
    t = k + beta - 1
    return -(((d - 1) * t / (d + 2)) ** 2) + k * (beta - 1) + d * t / (d + 2)


def delta(beta: float, p: float) -> float:
    if p == 2:
        raise DomainError("delta(beta) is undefined at p = 2")
    if beta == 0:
        raise DomainError("delta(beta) is undefined at beta = 0")
    return (p - (4 - p) * beta) / (2 * beta * (p - 2))


@dataclass(frozen=True)
class IneqParams:
    p: float
    d: float
    beta: float = 1.0

    @property
    def kappa(self) -> float:
        return kappa(self.beta, self.p)

    @property
    def gamma(self) -> float:
        return gamma(self.beta, self.p, self.d)

    @property
    def delta(self) -> float:
        return delta(self.beta, self.p)

    @property
    def gamma1(self) -> float:
        return gamma1(self.p, self.d)

    @cached_property
    def admissible(self) -> AdmissibleSet:
        return admissible_set(self.p, self.d)


def log_branch_exponent(d: float) -> float:
    """The p in (1, 2) where gamma1(p, d) + 2 (p - 2) = 0."""
    return optimize.brentq(lambda p: gamma1(p, d) + 2 * (p - 2), 1.0, 2.0, xtol=1e-15)


def _check_s(s: float, p: float):
    if s < 0:
        raise DomainError(f"entropy value s={s} must be >= 0")
    if p > 2 and s > 1 / (p - 2) - ENDPOINT_MARGIN:
        raise DomainError(f"s={s} not admissible: need s < 1/(p-2) = {1 / (p - 2)}")


def varphi1(s: float, p: float, d: float) -> float:
    """Improvement function of the linear flow (beta = 1)."""
    _check_s(s, p)
    if s == 0:
        return 0.0
    g1 = gamma1(p, d)
    if p == 2:
        return 2 / g1 * math.expm1(g1 * s / 2)
    m = p - 2
    h = 1 - m * s
    logh = math.log(h)
    eps = g1 + 2 * m
    if abs(eps) < LOG_BRANCH_TOL:
        return h * logh / (2 - p)
    # h^{-g1/(2m)} - h written as h * expm1(-eps log h / (2m))
    return 2 / eps * h * math.expm1(-eps * logh / (2 * m))


def _beta_integrand_params(beta: float, p: float, d: float) -> tuple[float, float]:
    """(C, omega) with exponent C * (h(z)^omega - h(s)^omega) / omega.

    C = gamma / (2 beta^2 m) and omega = 1 - delta; beta = inf gives the limit.
    """
    m = p - 2
    if math.isinf(beta):
        return -coeffs(p, d).a / (2 * m), p / (2 * m)
    return gamma(beta, p, d) / (2 * beta**2 * m), p * (beta - 1) / (2 * beta * m)


def _varphi_beta_raw(s: float, beta: float, p: float, d: float) -> float:
    if s == 0:
        return 0.0
    m = p - 2
    C, omega = _beta_integrand_params(beta, p, d)
    log_hs = math.log1p(-m * s)
    hs_omega = math.exp(omega * log_hs)

    def integrand(z):
        diff = math.log1p(-m * z) - log_hs
        return math.exp(C * hs_omega * math.expm1(omega * diff) / omega)

    val, err = integrate.quad(integrand, 0.0, s, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    if not err <= max(1e-9, 1e-9 * abs(val)):
        raise RuntimeError(
            f"varphi_beta quadrature did not converge (s={s}, beta={beta}, p={p}, d={d}, err={err})"
        )
    return val


def varphi_beta(s: float, beta: float, p: float, d: float, strict: bool = True) -> float:
    """Improvement function of the nonlinear flow with exponent beta > 1.

    With ``strict`` the exponent must lie in the admissible set; otherwise any
    beta > 1 with gamma(beta) > 0 is accepted.
    """
    if p <= 2:
        raise DomainError("varphi_beta requires p > 2")
    _check_s(s, p)
    if not math.isinf(beta) and not beta > 1:
        raise DomainError(f"varphi_beta requires beta > 1, got {beta}")
    if strict:
        if math.isinf(beta):
            B = admissible_set(p, d)
            if not (B.nonempty and math.isinf(B.hi)):
                raise DomainError("beta = inf is not a limit point of the admissible set")
        elif not admissible_set(p, d).contains(beta):
            raise DomainError(f"beta={beta} not admissible for p={p}, d={d}")
    elif not math.isinf(beta) and not gamma(beta, p, d) > 0:
        raise DomainError(f"gamma(beta) must be positive, beta={beta}, p={p}, d={d}")
    return _varphi_beta_raw(s, beta, p, d)


def _phi_at(s: float, beta: float, p: float, d: float) -> float:
    if beta == 1:
        return varphi1(s, p, d)
    return _varphi_beta_raw(s, beta, p, d)


def varphi_sup(s: float, p: float, d: float) -> tuple[float, float]:
    """sup of varphi_beta(s) over the closure of the admissible set, and the argmax.

    For p <= 2 the set is {1}.  An unbounded set is searched in u = 1/beta so
    that the beta -> inf limit is part of the closure.
    """
    B = admissible_set(p, d)
    if not B.nonempty:
        raise DomainError(f"admissible set is empty for p={p}, d={d}")
    if p <= 2 or B.is_singleton:
        return varphi1(s, p, d), 1.0
    _check_s(s, p)
    if s == 0:
        return 0.0, B.lo

    if math.isinf(B.hi):
        u_lo, u_hi = 0.0, 1.0 / B.lo

        def to_beta(u):
            return math.inf if u == 0 else 1.0 / u
    else:
        u_lo, u_hi = B.lo, B.hi

        def to_beta(u):
            return u

    def value(u):
        return _phi_at(s, to_beta(u), p, d)

    res = optimize.minimize_scalar(
        lambda u: -value(u), bounds=(u_lo, u_hi), method="bounded", options={"xatol": 1e-10}
    )
    best_u, best = float(res.x), -float(res.fun)
    for u in (u_lo, u_hi):
        v = value(u)
        if v > best:
            best_u, best = u, v
    # unimodality guard: a coarse probe beating the golden-section result
    # means the bracket was wrong, so scan the full grid and refine locally
    probes = np.linspace(u_lo, u_hi, 9)[1:-1]
    if any(value(u) > best * (1 + 1e-12) for u in probes):
        grid = np.linspace(u_lo, u_hi, SCAN_POINTS)
        vals = [value(u) for u in grid]
        i = int(np.argmax(vals))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, SCAN_POINTS - 1)]
        res = optimize.minimize_scalar(
            lambda u: -value(u), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
        )
        best_u, best = (float(res.x), -float(res.fun)) if -res.fun > vals[i] else (grid[i], vals[i])
    return best, to_beta(best_u)


def _phi_domain_end(p: float) -> float:
    """Supremum of the domain of Phi (inf for p >= 2)."""
    return 1 / (2 - p) if p < 2 else math.inf


def Phi(s: float, p: float, d: float) -> float:
    """Phi(s) = (1 + (p-2) s) varphi(s / (1 + (p-2) s))."""
    if s < 0:
        raise DomainError(f"Phi requires s >= 0, got {s}")
    if s >= _phi_domain_end(p):
        raise DomainError(f"Phi requires s < 1/(2-p) = {_phi_domain_end(p)}, got {s}")
    if s == 0:
        return 0.0
    scale = 1 + (p - 2) * s
    return scale * varphi_sup(s / scale, p, d)[0]


def _phi_upper_bracket(y: float, p: float, d: float) -> tuple[float, float] | None:
    """For p < 2 and y past the domain end: an s with Phi(s) >= y, or None."""
    hi = _phi_domain_end(p) * (1 - 1e-13)
    val = Phi(hi, p, d)
    return (hi, val) if val >= y else None


def Phi_inverse(y: float, p: float, d: float, clamp: bool = False) -> float:
    """Inverse of Phi by bisection (Phi is increasing).

    With ``clamp`` values beyond the range of Phi map to the end of its domain
    (generalized inverse sup{s : Phi(s) <= y}).
    """
    if y < 0:
        raise DomainError(f"Phi_inverse requires y >= 0, got {y}")
    if y == 0:
        return 0.0
    if y < _phi_domain_end(p):
        # Phi(s) >= s, so the inverse lies in [0, y]
        hi = y
    else:
        bracket = _phi_upper_bracket(y, p, d)
        if bracket is None:
            if clamp:
                return _phi_domain_end(p)
            raise DomainError(f"y={y} is outside the range of Phi for p={p}, d={d}")
        hi = bracket[0]
    lo = 0.0
    for _ in range(BISECT_MAXITER):
        mid = 0.5 * (lo + hi)
        if Phi(mid, p, d) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_TOL * hi:
            break
    return 0.5 * (lo + hi)


def Psi(s: float, p: float, d: float, clamp: bool = False) -> float:
    """Psi(s) = s - Phi^{-1}(s)."""
    return s - Phi_inverse(s, p, d, clamp=clamp)


def improved_log_sobolev_rhs(i_over_norm: float, d: float) -> float:
    """(4/g) log(1 + g x / (2d)) with g = (4d-1)/(d+2)^2 and x = ||u'||^2/||u||^2."""
    if i_over_norm < 0:
        raise DomainError("i_over_norm must be >= 0")
    g = gamma1_star(d)
    return 4 / g * math.log1p(g * i_over_norm / (2 * d))


@dataclass(frozen=True)
class ImprovementCurve:
    s_grid: np.ndarray
    phi_values: np.ndarray
    beta_at_max: np.ndarray


def improvement_curve(p: float, d: float, s_grid) -> ImprovementCurve:
    s_grid = np.asarray(s_grid, dtype=float)
    vals, betas = zip(*(varphi_sup(float(s), p, d) for s in s_grid))
    return ImprovementCurve(s_grid, np.array(vals), np.array(betas))


def fig5_1_ratio(xi: float, p: float, d: float) -> float:
    """Gain of the beta = 1 improvement over d e <= i, as a function of ||f||_p/||f||_2."""
    g1 = gamma1(p, d)
    lead = 2 * (2 - p) / (2 * (2 - p) - g1)
    return lead * (xi ** (2 + g1 / (p - 2)) - 1) / (xi**2 - 1)


@dataclass(frozen=True)
class StabilityReport:
    gap: float
    psi_bound: float
    psi_phi_bound: float
    ckp_term: float
    ok: bool

    @property
    def slack(self) -> float:
        return self.gap - max(self.psi_bound, self.psi_phi_bound)


def stability_gap(u: GridFunction, p: float, mp: MeasureParams, slack: float = 1e-9) -> StabilityReport:
    """i - d e against the two stability lower bounds built from Psi."""
    from .ckp import prop_ck_bound

    if p == 2:
        raise DomainError("stability bounds are stated for p != 2")
    d = mp.d
    n2 = u.norm(2) ** 2
    e = entropy(u, p, mp)
    i = fisher(u, mp)
    gap = i - d * e
    if n2 == 0 or i == 0:
        return StabilityReport(gap, 0.0, 0.0, 0.0, gap >= -slack)
    psi_bound = d * n2 * Psi(i / (d * n2), p, d, clamp=True)
    ck = prop_ck_bound(u, p, mp) / n2
    psi_phi_bound = d * n2 * Psi(Phi(ck, p, d), p, d, clamp=True) if ck > 0 else 0.0
    ok = gap >= psi_bound - slack and gap >= psi_phi_bound - slack
    return StabilityReport(gap, psi_bound, psi_phi_bound, ck, ok)


def main_inequality_slack(u: GridFunction, p: float, mp: MeasureParams) -> float:
    """i - d Phi(e) for u rescaled to ||u||_2 = 1 (log-Sobolev form at p = 2)."""
    v = u.map(lambda x: x / u.norm(2))
    i = fisher(v, mp)
    if p == 2:
        return improved_log_sobolev_rhs(i, mp.d) - log_entropy(v)
    return i - mp.d * Phi(entropy(v, p, mp), p, mp.d)
