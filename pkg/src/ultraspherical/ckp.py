"""Generalized Csiszar-Kullback-Pinsker inequalities.

``e_psi`` is the Bregman divergence of psi(s) = s^q (q > 1) or s log s (q = 1).
The regime table maps an interpolation exponent p to the exponents (q, r, s),
the constant and the average used to measure the distance of u to constants.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, GridFunction, MeasureParams, _check_measure, log_entropy

POSITIVITY_FLOOR = 1e-12


class UbarRule(enum.Enum):
    NORM_P = "norm_p"
    NORM_2 = "norm_2"
    NORM_P_MINUS_2 = "norm_p-2"


@dataclass(frozen=True)
class CkpRegime:
    p: float
    q: float
    r: float
    s: float
    kappa: float
    ubar_rule: UbarRule

    def ubar(self, u: GridFunction) -> float:
        if self.ubar_rule is UbarRule.NORM_P:
            return u.norm(self.p)
        if self.ubar_rule is UbarRule.NORM_2:
            return u.norm(2)
        return u.norm(self.p - 2)


@dataclass(frozen=True)
class RelEntropyReport:
    e_psi: float
    lower_bound: float
    q: float
    norms: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.e_psi - self.lower_bound


def ckp_regime(p: float) -> CkpRegime:
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if p < 2:
        return CkpRegime(p, 2 / p, p, 2.0, 2 ** (1 - p) * (2 - p) / p**2, UbarRule.NORM_P)
    if p == 2:
        return CkpRegime(p, 1.0, 2.0, 2.0, 1 / 8, UbarRule.NORM_2)
    if p < 4:
        return CkpRegime(p, p / 2, 2.0, p, 2 ** (-1 - 4 / p) * (p - 2), UbarRule.NORM_2)
    return CkpRegime(p, p / (p - 2), p - 2, p, 2 ** (4 / p) / (p - 2) ** 2, UbarRule.NORM_P_MINUS_2)


def _values(f) -> tuple[np.ndarray, object]:
    if isinstance(f, GridFunction):
        return np.asarray(f.values, dtype=float), f.rule
    raise TypeError("expected a GridFunction")


def e_psi(f: GridFunction, g: GridFunction, q: float) -> float:
    """int psi(f) - psi(g) - psi'(g)(f - g)."""
    if not 1 <= q <= 2:
        raise DomainError(f"q must lie in [1, 2], got {q}")
    fv, rule = _values(f)
    gv, _ = _values(g)
    if np.min(fv) < 0 or np.min(gv) < 0:
        raise DomainError("e_psi requires nonnegative functions")
    if q == 1:
        if not np.min(gv) > POSITIVITY_FLOOR:
            raise DomainError("e_psi with q = 1 requires g > 1e-12")
        with np.errstate(divide="ignore", invalid="ignore"):
            flogf = np.where(fv > 0, fv * np.log(fv / gv), 0.0)
        integrand = flogf - fv + gv
    else:
        integrand = fv**q - gv**q - q * gv ** (q - 1) * (fv - gv)
    return rule.integrate(integrand)


def ckgen_bound(f: GridFunction, g: GridFunction, q: float) -> RelEntropyReport:
    """e_psi[f|g] with the lower bound q(q-1) 2^{-2/q} min(|f|_q^{q-2}, |g|_q^{q-2}) |f-g|_q^2.

    For q = 1 the bound is |f-g|_1^2 / (2 (M_f + M_g)), which is 1/(4M) for equal masses.
    """
    fv, rule = _values(f)
    gv, _ = _values(g)
    e = e_psi(f, g, q)
    dist = rule.integrate(np.abs(fv - gv) ** q) ** (1 / q)
    if q == 1:
        mf, mg = rule.integrate(fv), rule.integrate(gv)
        lower = dist**2 / (2 * (mf + mg))
        return RelEntropyReport(e, lower, q, {"mass_f": mf, "mass_g": mg, "dist": dist})
    nf, ng = f.norm(q), g.norm(q)
    if q == 2:
        factor = 1.0
    else:
        cands = [n ** (q - 2) for n in (nf, ng) if n > 0]
        factor = min(cands) if cands else 0.0
    lower = q * (q - 1) / 2 ** (2 / q) * factor * dist**2
    return RelEntropyReport(e, lower, q, {"norm_f": nf, "norm_g": ng, "dist": dist})


def _check_u(u: GridFunction, mp: MeasureParams):
    _check_measure(u.rule, mp)
    if np.min(u.values) < 0:
        raise DomainError("CKP inequalities are stated for u >= 0")


def _power_distance(u: GridFunction, reg: CkpRegime) -> tuple[float, float]:
    ubar = reg.ubar(u)
    diff = u.values**reg.r - ubar**reg.r
    return ubar, u.rule.integrate(np.abs(diff) ** reg.q) ** (2 / reg.q)


def corollary_ck(u: GridFunction, p: float, mp: MeasureParams) -> RelEntropyReport:
    """Regime-wise distance-to-constants bound; ``e_psi`` holds the left-hand side."""
    _check_u(u, mp)
    reg = ckp_regime(p)
    n2 = u.norm(2)
    ubar, dist2 = _power_distance(u, reg)
    norms = {"norm_2": n2, "ubar": ubar}
    if p == 2:
        lhs = log_entropy(u)
        rhs = 2 * reg.kappa / n2**2 * dist2 if n2 > 0 else 0.0
        return RelEntropyReport(lhs, rhs, reg.q, norms)
    npn = u.norm(p)
    norms["norm_p"] = npn
    if p < 2:
        lhs = n2**2 - npn**2
        factor = n2 ** (2 * (1 - p))
    elif p < 4:
        lhs = npn**2 - n2**2
        factor = npn**-2
    else:
        lhs = npn**2 - n2**2
        factor = npn ** (2 * (3 - p))
    if dist2 == 0:
        return RelEntropyReport(lhs, 0.0, reg.q, norms)
    return RelEntropyReport(lhs, reg.kappa * factor * dist2, reg.q, norms)


def prop_ck_bound(u: GridFunction, p: float, mp: MeasureParams, tol: float = 1e-10) -> float:
    """C |u|_s^{2(1-r)} |u^r - ubar^r|_q^2 with C = kappa/|p-2| and ubar = |u|_r.

    Raises AssertionError if the entropy (|u|_p^2 - |u|_2^2)/(p-2) falls below it.
    """
    if p == 2:
        raise DomainError("p = 2 is the log-entropy case: use corollary_ck(u, 2, mp)")
    if not p >= 1:
        raise DomainError(f"prop_ck_bound requires p >= 1, got {p}")
    _check_u(u, mp)
    reg = ckp_regime(p)
    _, dist2 = _power_distance(u, reg)
    if dist2 == 0:
        return 0.0
    C = reg.kappa / abs(p - 2)
    rhs = C * u.norm(reg.s) ** (2 * (1 - reg.r)) * dist2
    lhs = (u.norm(p) ** 2 - u.norm(2) ** 2) / (p - 2)
    if lhs < rhs - tol * max(1.0, abs(rhs)):
        raise AssertionError(f"CKP bound violated: lhs={lhs} < rhs={rhs} at p={p}")
    return rhs


def convexity_lemma(t, p: float):
    """1 - t - (2/p)(1 - t^{p/2}), nonnegative on [0, 1] for p > 2."""
    t = np.asarray(t, dtype=float)
    return 1 - t - (2 / p) * (1 - t ** (p / 2))


def kappa_at(p: float) -> float:
    return ckp_regime(p).kappa


def ckp_constant(p: float) -> float:
    """The constant C of the packaged inequality (1 at p = 1)."""
    if p == 2:
        raise DomainError("no packaged constant at p = 2")
    return ckp_regime(p).kappa / abs(p - 2)


__all__ = [
    "CkpRegime",
    "RelEntropyReport",
    "UbarRule",
    "ckgen_bound",
    "ckp_constant",
    "ckp_regime",
    "convexity_lemma",
    "corollary_ck",
    "e_psi",
    "kappa_at",
    "prop_ck_bound",
]
