"""Sign structure of the decay coefficient gamma(beta) and the admissible set.

With ``a = 2 - p + ((d-1)(p-1)/(d+2))^2`` and ``b = (d+3-p)/(d+2)`` one has
``-gamma(beta) = a beta^2 - 2 b beta + 1``.  Everything here follows from the
sign of ``a``, of the discriminant ``b^2 - a`` and, when ``a = 0``, of ``b``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

GUARD = 1e-12

SQRT3 = math.sqrt(3.0)
# values of p where a(p, d) vanishes (d = 1, 2, 3, 4)
A_ZEROS = {
    1.0: (2.0,),
    2.0: (9 - 4 * SQRT3, 9 + 4 * SQRT3),
    3.0: (9 / 4, 6.0),
    4.0: (3.0,),
}


@dataclass(frozen=True)
class RegionCoeffs:
    a: float
    b: float
    disc: float


class Kind(enum.Enum):
    BOUNDED = "bounded"
    TWO_RAYS = "two_rays"
    HALF_LINE_GE = "half_line_ge"
    HALF_LINE_LE = "half_line_le"
    EMPTY = "empty"
    ALL = "all"


@dataclass(frozen=True)
class BetaInterval:
    """Closed set of beta where gamma(beta) >= 0.

    BOUNDED is [lo, hi]; TWO_RAYS is (-inf, lo] U [hi, inf); HALF_LINE_GE is
    [lo, inf); HALF_LINE_LE is (-inf, hi].
    """

    kind: Kind
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"unordered endpoints {self.lo} > {self.hi}")

    def contains(self, beta: float, tol: float = 0.0) -> bool:
        k = self.kind
        if k is Kind.EMPTY:
            return False
        if k is Kind.ALL:
            return True
        if k is Kind.BOUNDED:
            return self.lo - tol <= beta <= self.hi + tol
        if k is Kind.TWO_RAYS:
            return beta <= self.lo + tol or beta >= self.hi - tol
        if k is Kind.HALF_LINE_GE:
            return beta >= self.lo - tol
        return beta <= self.hi + tol


@dataclass(frozen=True)
class AdmissibleSet:
    """Admissible flow exponents: gamma(beta) > 0, beta >= 1, beta <= 2/(4-p) if p < 4.

    ``lo``/``hi`` are the endpoints of the closure; endpoints where gamma
    vanishes are excluded from the set itself.  For 1 <= p <= 2 the set is {1}.
    """

    p: float
    d: float
    lo: float
    hi: float
    nonempty: bool

    @property
    def is_singleton(self) -> bool:
        return self.nonempty and self.lo == self.hi

    def contains(self, beta: float) -> bool:
        if not self.nonempty:
            return False
        if self.is_singleton:
            return beta == self.lo
        from .improve import gamma

        return self.lo <= beta <= self.hi and gamma(beta, self.p, self.d) > 0


def coeffs(p: float, d: float) -> RegionCoeffs:
    a = 2 - p + ((d - 1) * (p - 1) / (d + 2)) ** 2
    b = (d + 3 - p) / (d + 2)
    return RegionCoeffs(a, b, disc_closed_form(p, d))


def disc_closed_form(p: float, d: float) -> float:
    """b^2 - a in factored form, exact zeros at p = 1 and p = 2d/(d-2)."""
    return d * (p - 1) * (2 * d - (d - 2) * p) / (d + 2) ** 2


def _a_is_zero(p: float, d: float, a: float) -> bool:
    for p0 in A_ZEROS.get(float(d), ()):
        if abs(p - p0) <= GUARD:
            return True
    return abs(a) <= GUARD


def p_thresholds(d: float) -> tuple[float, float] | None:
    """Roots p_-(d) <= p_+(d) of a(p, d) = 0, defined for 1 < d <= 4."""
    if not 1 < d <= 4:
        return None
    root = (d + 2) * math.sqrt(3 * d * (4 - d))
    den = 2 * (d - 1) ** 2
    return (3 * (d * d + 2) - root) / den, (3 * (d * d + 2) + root) / den


def beta_roots(p: float, d: float) -> tuple[float, float] | None:
    """Roots beta_- <= beta_+ of a beta^2 - 2 b beta + 1 = 0.

    Returns None when a = 0 (half-line regime) or when the roots are complex.
    """
    c = coeffs(p, d)
    if _a_is_zero(p, d, c.a) or c.disc < -GUARD:
        return None
    sq = math.sqrt(max(c.disc, 0.0))
    # cancellation-free pair: q/a and 1/q with q = b + sign(b) sqrt(b^2 - a)
    q = c.b + math.copysign(sq, c.b)
    if q == 0:
        return None
    r1, r2 = q / c.a, 1.0 / q
    return (min(r1, r2), max(r1, r2))


def classify(p: float, d: float) -> BetaInterval:
    """The closed set {beta : gamma(beta) >= 0}."""
    c = coeffs(p, d)
    if _a_is_zero(p, d, c.a):
        if abs(c.b) <= GUARD:
            return BetaInterval(Kind.EMPTY)
        edge = 1 / (2 * c.b)
        if c.b > 0:
            return BetaInterval(Kind.HALF_LINE_GE, lo=edge)
        return BetaInterval(Kind.HALF_LINE_LE, hi=edge)
    if c.a > 0:
        if c.disc < 0:
            return BetaInterval(Kind.EMPTY)
        lo, hi = beta_roots(p, d)
        return BetaInterval(Kind.BOUNDED, lo, hi)
    lo, hi = beta_roots(p, d)
    return BetaInterval(Kind.TWO_RAYS, lo, hi)


def admissible_set(p: float, d: float) -> AdmissibleSet:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p <= 2:
        return AdmissibleSet(p, d, 1.0, 1.0, True)
    upper = 2 / (4 - p) if p < 4 else math.inf
    iv = classify(p, d)
    k = iv.kind
    if k is Kind.EMPTY:
        return AdmissibleSet(p, d, math.nan, math.nan, False)
    if k is Kind.BOUNDED:
        lo, hi = max(1.0, iv.lo), min(upper, iv.hi)
    elif k is Kind.TWO_RAYS:
        # a < 0 forces beta_- < 0 < beta_+, so only the upper ray meets beta >= 1
        lo, hi = max(1.0, iv.hi), upper
    elif k is Kind.HALF_LINE_GE:
        lo, hi = max(1.0, iv.lo), upper
    elif k is Kind.HALF_LINE_LE:
        lo, hi = 1.0, min(upper, iv.hi)
    else:
        lo, hi = 1.0, upper
    from .improve import gamma

    # gamma must be strictly positive somewhere in [lo, hi]
    nonempty = lo < hi or (lo == hi and gamma(lo, p, d) > 0)
    if nonempty and lo < hi:
        mid = 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0
        nonempty = gamma(mid, p, d) > 0
    if not nonempty:
        return AdmissibleSet(p, d, math.nan, math.nan, False)
    return AdmissibleSet(p, d, lo, hi, True)
