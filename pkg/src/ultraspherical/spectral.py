"""Spectral improvements for p in (1, 2).

Everything lives in the axisymmetric reduction: the degree-j Gegenbauer mode
is the eigenfunction of -L with eigenvalue lambda_j = j (j + d - 1), and the
heat semigroup e^{tL} damps its coefficient by exp(-lambda_j t).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DomainError, GridFunction, MeasureParams, QuadratureRule, _check_measure, fisher

ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class EigenData:
    k: int
    lambda_k: float
    dim_k: int | None
    alpha_k: float


def eigenvalue(k: int, d: float) -> float:
    return k * (k + d - 1)


def eigenspace_dim(k: int, d: float) -> int:
    """Multiplicity of lambda_k on the d-sphere (integer d only)."""
    if float(d) != int(d) or d < 1:
        raise DomainError(f"eigenspace dimension is only defined for integer d >= 1, got {d}")
    d = int(d)
    if k == 0:
        return 1
    if d == 1:
        return 2
    return (2 * k + d - 1) * math.comb(k + d - 2, k) // (d - 1)


def eigen_data(k: int, d: float) -> EigenData:
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    k = int(k)
    dim = eigenspace_dim(k, d) if float(d) == int(d) else None
    return EigenData(k, eigenvalue(k, d), dim, eigenvalue(k + 1, d) / d)


def improved_coefficient(alpha: float, p: float) -> float:
    """alpha / (1 - (p-1)^alpha), increasing in alpha > 1 for p in (1, 2)."""
    return alpha / -math.expm1(alpha * math.log(p - 1))


@lru_cache(maxsize=64)
def _basis_norms(d: float, N: int) -> np.ndarray:
    from .core import _cached_rule

    rule = _cached_rule(d, N)
    V = rule.vandermonde
    norms = np.sqrt(rule.weights @ V**2)
    norms.setflags(write=False)
    return norms


def basis_norms(rule: QuadratureRule) -> np.ndarray:
    """||p_j||_2 for the basis of ``rule``, computed by quadrature once and cached."""
    return _basis_norms(rule.d, rule.order)


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Coefficients a_j of f = sum a_j p_j in the orthonormalized Gegenbauer basis."""

    coeffs: np.ndarray
    d: float
    rule: QuadratureRule

    @classmethod
    def from_grid(cls, u: GridFunction) -> "SpectralCoeffs":
        norms = basis_norms(u.rule)
        return cls(u.rule.to_coeffs(u.values) / norms**2, u.rule.d, u.rule)

    def to_grid(self, positive: bool = False) -> GridFunction:
        return self.rule.grid(self.rule.from_coeffs(self.coeffs), positive)

    def l2_norm_sq(self) -> float:
        return float(np.sum(self.coeffs**2 * basis_norms(self.rule) ** 2))

    def eigenvalues(self) -> np.ndarray:
        return eigenvalue(np.arange(self.coeffs.size), self.d)


def heat_semigroup(c: SpectralCoeffs, t: float) -> SpectralCoeffs:
    if t < 0:
        raise DomainError(f"heat semigroup time must be >= 0, got {t}")
    return SpectralCoeffs(c.coeffs * np.exp(-c.eigenvalues() * t), c.d, c.rule)


def heat_flow(u: GridFunction, t: float) -> GridFunction:
    return heat_semigroup(SpectralCoeffs.from_grid(u), t).to_grid()


def nelson_time(p: float, d: float) -> float:
    """t* with 1 + (p-1) e^{2 d t*} = 2."""
    if not 1 < p < 2:
        raise DomainError(f"Nelson time requires p in (1, 2), got {p}")
    return -math.log(p - 1) / (2 * d)


def project_orthogonal(u: GridFunction, k: int, mp: MeasureParams) -> GridFunction:
    """Remove the degree 1..k modes, keeping the mean."""
    _check_measure(u.rule, mp)
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    c = SpectralCoeffs.from_grid(u)
    a = c.coeffs.copy()
    a[1 : k + 1] = 0.0
    return SpectralCoeffs(a, c.d, c.rule).to_grid()


def orthogonality_defect(u: GridFunction, k: int) -> float:
    """max |<u, p_j>| / ||u||_2 over j = 1..k."""
    if k == 0:
        return 0.0
    proj = u.rule.to_coeffs(u.values)[1 : k + 1]
    n = u.norm(2)
    return float(np.max(np.abs(proj)) / n) if n > 0 else 0.0


class BoundKind(enum.Enum):
    BECKNER_EXTENDED = "beckner_extended"
    GAMMA_FAMILY = "gamma_family"
    LOG_FORM = "log_form"
    PHI_K = "phi_k"


@dataclass(frozen=True)
class SpectralBound:
    kind: BoundKind
    k: int
    p: float
    gamma_param: float | None = None

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise DomainError(f"spectral bounds require p in (1, 2), got {self.p}")
        if self.k < 1:
            raise DomainError(f"spectral bounds require k >= 1, got {self.k}")
        if self.kind is BoundKind.GAMMA_FAMILY:
            if self.gamma_param is None or not 0 < self.gamma_param < 2:
                raise DomainError("gamma_family needs gamma_param in (0, 2)")


def chi1(x, alpha: float, p: float):
    x = np.asarray(x, dtype=float)
    return improved_coefficient(alpha, p) * (1 - x**2)


def chi2(x, alpha: float, p: float, g: float):
    x = np.asarray(x, dtype=float)
    return alpha / -math.expm1(g * alpha / 2 * math.log(p - 1)) * (1 - x**g)


def chi3(x, p: float):
    x = np.asarray(x, dtype=float)
    return 2 * np.log(x) / math.log(p - 1)


def Phi_k(s, k: int, p: float, d: float):
    """max of the linear and logarithmic spectral improvements at s = ||u||_p^2."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("Phi_k requires s > 0")
    alpha = eigenvalue(k + 1, d) / d
    x = np.sqrt(s)
    return np.maximum(chi1(x, alpha, p), chi3(x, p))


def spectral_bound_rhs(u: GridFunction, bound: SpectralBound, mp: MeasureParams) -> float:
    """Right-hand side d ||u||_2^2 chi(||u||_p / ||u||_2) of the selected bound."""
    _check_measure(u.rule, mp)
    k, p, d = bound.k, bound.p, mp.d
    defect = orthogonality_defect(u, k)
    if defect > ORTHO_TOL:
        raise DomainError(f"u is not orthogonal to degrees 1..{k} (defect {defect:.2e})")
    n2 = u.norm(2)
    if n2 == 0:
        return 0.0
    x = min(u.norm(p) / n2, 1.0)
    alpha = eigenvalue(k + 1, d) / d
    kind = bound.kind
    if kind is BoundKind.BECKNER_EXTENDED:
        chi = chi1(x, alpha, p)
    elif kind is BoundKind.GAMMA_FAMILY:
        chi = chi2(x, alpha, p, bound.gamma_param)
    elif kind is BoundKind.LOG_FORM:
        limit = (p - 1) ** (alpha / 2)
        if x > limit:
            raise DomainError(
                f"log_form needs ||u||_p <= (p-1)^(alpha_k/2) ||u||_2: ratio {x:.6g} > {limit:.6g}"
            )
        chi = chi3(x, p)
    else:
        chi = Phi_k(x**2, k, p, d)
    return float(d * n2**2 * chi)


def hypercontractivity_check(u: GridFunction, p: float, mp: MeasureParams) -> tuple[float, float]:
    """(||e^{t* L} u||_2, ||u||_p)."""
    _check_measure(u.rule, mp)
    t = nelson_time(p, mp.d)
    return heat_flow(u, t).norm(2), u.norm(p)


def proof_chain(u: GridFunction, k: int, g: float, p: float, mp: MeasureParams) -> tuple[float, float, float]:
    """Members of the gamma-family estimate: deficit <= modal_sum <= gradient_bound."""
    t = nelson_time(p, mp.d)
    c = SpectralCoeffs.from_grid(u)
    lam = c.eigenvalues()
    a = c.coeffs**2 * basis_norms(u.rule) ** 2
    n2 = u.norm(2)
    deficit = n2**2 - u.norm(p) ** g * n2 ** (2 - g)
    modal = float(np.sum((a * -np.expm1(-g * lam * t))[k + 1 :]))
    lam_next = eigenvalue(k + 1, mp.d)
    gradient = -math.expm1(-g * lam_next * t) / lam_next * fisher(u, mp)
    return deficit, modal, gradient


def theorem_slack(u: GridFunction, k: int, p: float, mp: MeasureParams) -> float:
    """||u'||^2 - d Phi_k(||u||_p^2) after normalizing ||u||_2 = 1."""
    v = u.map(lambda x: x / u.norm(2))
    return fisher(v, mp) - mp.d * float(Phi_k(v.norm(p) ** 2, k, p, mp.d))
