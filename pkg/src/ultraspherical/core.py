"""Ultraspherical ground layer.

The probability measure ``dnu_d = Z_d^{-1} (1 - x^2)^{d/2 - 1} dx`` on (-1, 1),
its Gauss quadrature, grid functions sampled at the nodes, the operator
``L f = (1 - x^2) f'' - d x f'`` and the entropy / Fisher information
functionals built on top of them.

Derivatives are spectral: values at the N Gauss nodes are mapped to the
coefficients of the orthonormal Gegenbauer basis of degree < N, differentiated
exactly in that basis and mapped back.  Polynomials of degree < N are therefore
differentiated without error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

DEFAULT_ORDER = 64


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


@dataclass(frozen=True)
class MeasureParams:
    """Dimension parameter of the ultraspherical measure (real, d >= 1)."""

    d: float

    def __post_init__(self):
        if not self.d >= 1:
            raise DomainError(f"dimension must satisfy d >= 1, got {self.d!r}")

    @property
    def Z_d(self) -> float:
        d = self.d
        return math.sqrt(math.pi) * math.exp(gammaln(d / 2) - gammaln((d + 1) / 2))

    def critical_exponent(self) -> float:
        """2* = 2d/(d-2) for d > 2, +inf otherwise."""
        if self.d > 2:
            return 2 * self.d / (self.d - 2)
        return math.inf

    def sharp_exponent(self) -> float:
        """2# = (2d^2+1)/(d-1)^2 for d > 1, +inf at d = 1."""
        if self.d > 1:
            return (2 * self.d**2 + 1) / (self.d - 1) ** 2
        return math.inf

    def rule(self, N: int = DEFAULT_ORDER) -> "QuadratureRule":
        return build_quadrature(self, N)


def _recurrence(d: float, n: int) -> np.ndarray:
    """Off-diagonal b_1..b_n of the Jacobi matrix for weight (1-x^2)^{d/2-1}.

    The orthonormal polynomials satisfy x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}.
    """
    a = d / 2 - 1
    k = np.arange(1, n + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        b2 = k * (k + 2 * a) / ((2 * k + 2 * a - 1) * (2 * k + 2 * a + 1))
    # k = 1 is a removable 0/0 when a = -1/2 (d = 1)
    b2[0] = 1.0 / (2 * a + 3)
    return np.sqrt(b2)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """N-point Gauss rule for dnu_d together with the spectral machinery."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    d: float
    _offdiag: np.ndarray = field(repr=False)

    @cached_property
    def _basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.nodes
        N = self.order
        b = self._offdiag
        P = np.zeros((N, N))
        dP = np.zeros((N, N))
        d2P = np.zeros((N, N))
        P[:, 0] = 1.0
        if N > 1:
            P[:, 1] = x / b[0]
            dP[:, 1] = 1.0 / b[0]
        for k in range(1, N - 1):
            P[:, k + 1] = (x * P[:, k] - b[k - 1] * P[:, k - 1]) / b[k]
            dP[:, k + 1] = (P[:, k] + x * dP[:, k] - b[k - 1] * dP[:, k - 1]) / b[k]
            d2P[:, k + 1] = (2 * dP[:, k] + x * d2P[:, k] - b[k - 1] * d2P[:, k - 1]) / b[k]
        return P, dP, d2P

    @property
    def vandermonde(self) -> np.ndarray:
        """V[i, j] = p_j(x_i) for the orthonormal basis p_0 = 1, p_1, ..."""
        return self._basis[0]

    @cached_property
    def analysis(self) -> np.ndarray:
        """Matrix mapping nodal values to orthonormal-basis coefficients."""
        return self.vandermonde.T * self.weights

    @cached_property
    def D(self) -> np.ndarray:
        return self._basis[1] @ self.analysis

    @cached_property
    def D2(self) -> np.ndarray:
        return self._basis[2] @ self.analysis

    @cached_property
    def L(self) -> np.ndarray:
        x = self.nodes
        return (1 - x**2)[:, None] * self.D2 - self.d * x[:, None] * self.D

    @cached_property
    def nu(self) -> np.ndarray:
        return 1 - self.nodes**2

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def to_coeffs(self, values) -> np.ndarray:
        return self.analysis @ np.asarray(values, dtype=float)

    def from_coeffs(self, coeffs) -> np.ndarray:
        c = np.zeros(self.order)
        coeffs = np.asarray(coeffs, dtype=float)
        c[: len(coeffs)] = coeffs
        return self.vandermonde @ c

    def basis_at(self, x) -> np.ndarray:
        """Orthonormal basis p_0..p_{N-1} evaluated at arbitrary points."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        N, b = self.order, self._offdiag
        P = np.zeros((x.size, N))
        P[:, 0] = 1.0
        if N > 1:
            P[:, 1] = x / b[0]
        for k in range(1, N - 1):
            P[:, k + 1] = (x * P[:, k] - b[k - 1] * P[:, k - 1]) / b[k]
        return P

    def grid(self, values, positive: bool = False) -> "GridFunction":
        return GridFunction(np.asarray(values, dtype=float), self, positive)

    def sample(self, fn: Callable, positive: bool = False) -> "GridFunction":
        return self.grid(fn(self.nodes), positive)


@lru_cache(maxsize=64)
def _cached_rule(d: float, N: int) -> QuadratureRule:
    b = _recurrence(d, N - 1)
    try:
        nodes, vecs = eigh_tridiagonal(np.zeros(N), b)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"Gauss node solver failed for N={N}, d={d}") from exc
    weights = vecs[0, :] ** 2
    if not (np.all(np.abs(nodes) < 1) and np.all(weights > 0)):
        raise RuntimeError(f"Gauss node solver returned invalid rule for N={N}, d={d}")
    # symmetrize to kill the O(eps) asymmetry of the eigensolver
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    for arr in (nodes, weights):
        arr.setflags(write=False)
    return QuadratureRule(nodes, weights, N, float(d), b)


def build_quadrature(mp: MeasureParams, N: int = DEFAULT_ORDER) -> QuadratureRule:
    """Gauss rule for dnu_d via the Golub-Welsch eigenproblem (alpha = beta = d/2 - 1)."""
    if N < 2:
        raise DomainError(f"quadrature order must be >= 2, got {N}")
    return _cached_rule(float(mp.d), int(N))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function at the nodes of a quadrature rule."""

    values: np.ndarray
    rule: QuadratureRule
    positivity_flag: bool = False

    def __post_init__(self):
        if self.values.shape != self.rule.nodes.shape:
            raise ValueError(
                f"grid function has {self.values.size} values for {self.rule.order} nodes"
            )
        if self.positivity_flag and not np.min(self.values) > 0:
            raise DomainError("grid function flagged positive has nonpositive values")

    def derivative(self) -> np.ndarray:
        return self.rule.D @ self.values

    def second_derivative(self) -> np.ndarray:
        return self.rule.D2 @ self.values

    def norm(self, q: float) -> float:
        return lp_norm(self.values, q, self.rule)

    def integral(self) -> float:
        return self.rule.integrate(self.values)

    def map(self, fn: Callable, positive: bool | None = None) -> "GridFunction":
        flag = self.positivity_flag if positive is None else positive
        return GridFunction(np.asarray(fn(self.values), dtype=float), self.rule, flag)


def lp_norm(values, q: float, rule: QuadratureRule) -> float:
    """L^q(dnu_d) norm of |values|."""
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(q):
        return float(np.max(v))
    return rule.integrate(v**q) ** (1.0 / q)


@dataclass(frozen=True)
class Functionals:
    entropy_e: float
    fisher_i: float
    p: float

    def __post_init__(self):
        if self.fisher_i < 0:
            raise ValueError("Fisher information must be nonnegative")


def _check_measure(rule: QuadratureRule, mp: MeasureParams):
    if rule.d != float(mp.d):
        raise ValueError(f"grid built for d={rule.d} used with d={mp.d}")


def apply_L(f: GridFunction, mp: MeasureParams) -> GridFunction:
    """L f = (1 - x^2) f'' - d x f'."""
    _check_measure(f.rule, mp)
    return GridFunction(f.rule.L @ f.values, f.rule)


def log_entropy(f: GridFunction) -> float:
    """int f^2 log(f^2 / ||f||_2^2) dnu_d."""
    v = np.asarray(f.values, dtype=float)
    if np.min(v) < 0:
        raise DomainError("entropy requires a nonnegative function")
    n2 = f.rule.integrate(v**2)
    if n2 == 0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(v > 0, v**2 * np.log(v**2 / n2), 0.0)
    return f.rule.integrate(integrand)


def entropy(f: GridFunction, p: float, mp: MeasureParams) -> float:
    """Generalized entropy e = (||f||_p^2 - ||f||_2^2)/(p - 2).

    At p = 2 the continuous limit ``0.5 * log_entropy(f)`` is returned.
    """
    _check_measure(f.rule, mp)
    if p < 1 or p > mp.critical_exponent():
        raise DomainError(f"entropy exponent p={p} outside [1, 2*] for d={mp.d}")
    if np.min(f.values) < 0:
        raise DomainError("entropy requires a nonnegative function")
    if p == 2:
        return 0.5 * log_entropy(f)
    return (f.norm(p) ** 2 - f.norm(2) ** 2) / (p - 2)


def fisher(f: GridFunction, mp: MeasureParams) -> float:
    """i = int |f'|^2 (1 - x^2) dnu_d."""
    _check_measure(f.rule, mp)
    df = f.derivative()
    return f.rule.integrate(df**2 * f.rule.nu)


def functionals(f: GridFunction, p: float, mp: MeasureParams) -> Functionals:
    return Functionals(entropy(f, p, mp), fisher(f, mp), p)


def check_identities(w: GridFunction, mp: MeasureParams) -> tuple[float, float]:
    """Absolute residuals of the two integration-by-parts identities for w > 0.

    1. int (L w)^2 = int |w''|^2 nu^2 + d int |w'|^2 nu
    2. <(|w'|^2 / w) nu, L w> = d/(d+2) int |w'|^4/w^2 nu^2
                                 - 2 (d-1)/(d+2) int |w'|^2 w''/w nu^2
    """
    _check_measure(w.rule, mp)
    if not np.min(w.values) > 0:
        raise DomainError("identities require w > 0")
    rule, d = w.rule, mp.d
    v, w1, w2 = w.values, w.derivative(), w.second_derivative()
    nu = rule.nu
    Lw = rule.L @ v
    lhs1 = rule.integrate(Lw**2)
    rhs1 = rule.integrate(w2**2 * nu**2) + d * rule.integrate(w1**2 * nu)
    lhs2 = rule.integrate(w1**2 / v * nu * Lw)
    rhs2 = d / (d + 2) * rule.integrate(w1**4 / v**2 * nu**2) - 2 * (d - 1) / (
        d + 2
    ) * rule.integrate(w1**2 * w2 / v * nu**2)
    return abs(lhs1 - rhs1), abs(lhs2 - rhs2)
