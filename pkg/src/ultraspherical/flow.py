"""Entropy-dissipating flows on (-1, 1).

The flow with exponent beta >= 1 is

    w_t = w^{2 - 2 beta} (L w + kappa nu |w'|^2 / w),   kappa = beta (p - 2) + 1,

which keeps int w^{beta p} dnu_d fixed.  beta = 1 is the linear case in which
g = w^p solves the heat equation g_t = L g.  Along either flow the energy
E = i - d e of f = w^beta is nonincreasing.

Integration uses an embedded Dormand-Prince 5(4) pair.  Steps are rejected on
local error, on loss of positivity and on mass drift, never clamped.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .core import DomainError, GridFunction, MeasureParams, build_quadrature, entropy
from .improve import gamma, gamma1

POSITIVITY_FLOOR = 1e-13
DT_MIN = 1e-12
STEP_MASS_TOL = 1e-9
MONOTONE_TOL = 1e-10


class FlowError(RuntimeError):
    """A flow run could not be continued (stiffness, positivity, monotonicity)."""


class _PositivityLoss(ArithmeticError):
    pass


class Scheme(enum.Enum):
    EXPLICIT_ADAPTIVE = "explicit-adaptive"
    SEMI_IMPLICIT = "semi-implicit"


@dataclass(frozen=True)
class FlowConfig:
    p: float
    d: float
    beta: float = 1.0
    dt_initial: float = 1e-4
    t_end: float = 1.0
    N: int = 48
    scheme: Scheme = Scheme.EXPLICIT_ADAPTIVE
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.beta >= 1:
            raise DomainError(f"flow exponent beta must be >= 1, got {self.beta}")
        if not (self.dt_initial > 0 and self.t_end > 0):
            raise DomainError("dt_initial and t_end must be positive")
        if self.p < 1:
            raise DomainError(f"p must be >= 1, got {self.p}")
        MeasureParams(self.d)

    @property
    def kappa(self) -> float:
        return self.beta * (self.p - 2) + 1

    @property
    def linear(self) -> bool:
        return self.beta == 1

    @property
    def measure(self) -> MeasureParams:
        return MeasureParams(self.d)

    def decay_coefficient(self) -> float:
        return gamma1(self.p, self.d) if self.linear else gamma(self.beta, self.p, self.d)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FlowTrace:
    """Functionals recorded at every accepted step.

    ``decay_lhs`` is -(1/(2 beta^2)) dE/dt evaluated exactly along the
    discrete vector field; ``decay_rhs`` is gamma int |w'|^4/w^2 nu^2.
    """

    times: np.ndarray
    entropy_e: np.ndarray
    fisher_i: np.ndarray
    mass: np.ndarray
    decay_lhs: np.ndarray
    decay_rhs: np.ndarray
    energy: np.ndarray
    oscillation: np.ndarray
    p: float
    d: float
    beta: float
    final: GridFunction
    snapshots: dict = field(default_factory=dict)

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass / self.mass[0] - 1)))

    def energy_increments(self) -> np.ndarray:
        return np.diff(self.energy)

    def decay_residual(self) -> np.ndarray:
        return self.decay_lhs - self.decay_rhs

    def as_rows(self):
        cols = (self.times, self.entropy_e, self.fisher_i, self.mass, self.decay_lhs, self.decay_rhs)
        return [tuple(float(c[k]) for c in cols) for k in range(self.times.size)]


class _Field:
    """Discrete right-hand side and functionals for a fixed configuration."""

    def __init__(self, cfg: FlowConfig):
        self.cfg = cfg
        self.mp = cfg.measure
        self.rule = build_quadrature(self.mp, cfg.N)
        self.D, self.L, self.nu = self.rule.D, self.rule.L, self.rule.nu
        self.w8 = self.rule.weights
        self.beta, self.p, self.kappa = cfg.beta, cfg.p, cfg.kappa

    def _check(self, v):
        if not np.all(np.isfinite(v)) or np.min(v) < POSITIVITY_FLOOR:
            raise _PositivityLoss

    def rhs(self, v: np.ndarray) -> np.ndarray:
        self._check(v)
        dv = self.D @ v
        core = self.L @ v + self.kappa * self.nu * dv**2 / v
        if self.beta != 1:
            core = v ** (2 - 2 * self.beta) * core
        return core

    def mass(self, v) -> float:
        return float(self.w8 @ v ** (self.beta * self.p))

    def functionals(self, v):
        f = v**self.beta if self.beta != 1 else v
        df = self.D @ f
        i = float(self.w8 @ (df**2 * self.nu))
        e = entropy(self.rule.grid(f), self.p, self.mp)
        return e, i

    def energy_rate(self, v, vt) -> float:
        """Exact dE/dt = DE(v)[vt] for E = i - d e of f = v^beta."""
        b, p, d = self.beta, self.p, self.mp.d
        f = v**b
        ft = b * v ** (b - 1) * vt
        df, dft = self.D @ f, self.D @ ft
        di = 2 * float(self.w8 @ (self.nu * df * dft))
        n2dot = 2 * float(self.w8 @ (f * ft))
        if p == 2:
            n2 = float(self.w8 @ f**2)
            # e = 0.5 int f^2 log(f^2/n2)
            de = float(self.w8 @ (f * ft * (2 * np.log(f**2 / n2) + 2))) * 0.5 - 0.5 * n2dot
        else:
            npp = float(self.w8 @ f**p)
            npdot = 2 * npp ** (2 / p - 1) * float(self.w8 @ (f ** (p - 1) * ft))
            de = (npdot - n2dot) / (p - 2)
        return di - d * de

    def quartic(self, v) -> float:
        dv = self.D @ v
        return float(self.w8 @ (dv**4 / v**2 * self.nu**2))


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dp_step(fld: _Field, v: np.ndarray, dt: float, k0: np.ndarray | None = None):
    """One Dormand-Prince step: (5th-order solution, error estimate, last stage)."""
    ks = [fld.rhs(v) if k0 is None else k0]
    for s in range(1, 7):
        y = v + dt * sum(a * k for a, k in zip(_A[s], ks))
        ks.append(fld.rhs(y))
    K = np.array(ks)
    y5 = v + dt * (_B5 @ K)
    err = dt * ((_B5 - _B4) @ K)
    return y5, err, ks[-1]


def _imex_step(fld: _Field, v: np.ndarray, dt: float) -> np.ndarray:
    """Semi-implicit Euler: diffusion implicit with frozen coefficient, drift explicit."""
    fld._check(v)
    coef = v ** (2 - 2 * fld.beta) if fld.beta != 1 else np.ones_like(v)
    dv = fld.D @ v
    drift = coef * fld.kappa * fld.nu * dv**2 / v
    A = np.eye(v.size) - dt * coef[:, None] * fld.L
    y = np.linalg.solve(A, v + dt * drift)
    fld._check(y)
    return y


def _imex_pair(fld: _Field, v, dt):
    """Step doubling: returns (two half steps, error estimate)."""
    full = _imex_step(fld, v, dt)
    half = _imex_step(fld, _imex_step(fld, v, dt / 2), dt / 2)
    return half, half - full


def _attempt(fld: _Field, v, dt, scheme, k0):
    if scheme is Scheme.EXPLICIT_ADAPTIVE:
        return _dp_step(fld, v, dt, k0)
    y, err = _imex_pair(fld, v, dt)
    return y, err, None


def _err_norm(cfg: FlowConfig, v, y, err) -> float:
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(v), np.abs(y))
    return float(np.max(np.abs(err) / scale))


def _advance(fld: _Field, v: np.ndarray, dt: float) -> np.ndarray:
    """Advance exactly dt, halving substeps on positivity loss or mass drift."""
    cfg = fld.cfg
    m0 = fld.mass(v)
    t, h = 0.0, dt
    while t < dt * (1 - 1e-14):
        h = min(h, dt - t)
        if h < DT_MIN:
            raise FlowError(f"step size underflow (dt < {DT_MIN}) at p={cfg.p}, d={cfg.d}, beta={cfg.beta}")
        try:
            y = _attempt(fld, v, h, cfg.scheme, None)[0]
            fld._check(y)
            if abs(fld.mass(y) / fld.mass(v) - 1) > STEP_MASS_TOL:
                raise _PositivityLoss
        except _PositivityLoss:
            h /= 2
            continue
        v, t = y, t + h
    if abs(fld.mass(v) / m0 - 1) > STEP_MASS_TOL * max(1.0, dt / 1e-3):
        raise FlowError("mass drift over the step exceeds tolerance")
    return v


def _as_values(w: GridFunction, cfg: FlowConfig) -> np.ndarray:
    if w.rule.d != float(cfg.d):
        raise DomainError(f"grid built for d={w.rule.d} used with flow d={cfg.d}")
    v = np.array(w.values, dtype=float)
    if not np.min(v) > POSITIVITY_FLOOR:
        raise DomainError("flows require w > 0")
    return v


def _field_for(w: GridFunction, cfg: FlowConfig) -> _Field:
    if w.rule.order != cfg.N:
        cfg = FlowConfig(**{**cfg.__dict__, "N": w.rule.order})
    return _Field(cfg)


def step_linear(w: GridFunction, cfg: FlowConfig, dt: float) -> GridFunction:
    """Advance w_t = L w + (p-1) nu |w'|^2/w by dt."""
    if not cfg.linear:
        raise DomainError("step_linear needs beta = 1")
    fld = _field_for(w, cfg)
    return w.rule.grid(_advance(fld, _as_values(w, cfg), dt), True)


def step_nonlinear(w: GridFunction, cfg: FlowConfig, dt: float) -> GridFunction:
    """Advance w_t = w^{2-2beta}(L w + kappa nu |w'|^2/w) by dt."""
    fld = _field_for(w, cfg)
    return w.rule.grid(_advance(fld, _as_values(w, cfg), dt), True)


def run_flow(w0: GridFunction, cfg: FlowConfig, snapshot_times=(), monotone_tol: float = MONOTONE_TOL) -> FlowTrace:
    """Adaptive run over [0, t_end], recording every accepted step."""
    fld = _field_for(w0, cfg)
    v = _as_values(w0, cfg)
    b, p, d = cfg.beta, cfg.p, cfg.d
    g = cfg.decay_coefficient()
    bar = fld.mass(v) ** (1 / (b * p))
    stops = sorted(float(s) for s in snapshot_times if 0 < s <= cfg.t_end)
    snaps = {}
    rec = {k: [] for k in ("t", "e", "i", "m", "lhs", "rhs", "E", "osc")}

    def record(t, v, k):
        e, i = fld.functionals(v)
        rec["t"].append(t)
        rec["e"].append(e)
        rec["i"].append(i)
        rec["m"].append(fld.mass(v))
        rec["lhs"].append(-fld.energy_rate(v, k) / (2 * b * b))
        rec["rhs"].append(g * fld.quartic(v))
        rec["E"].append(i - d * e)
        rec["osc"].append(float(np.max(np.abs(v - bar))))

    k = fld.rhs(v)
    record(0.0, v, k)
    m0 = rec["m"][0]
    t, h = 0.0, cfg.dt_initial
    fsal = cfg.scheme is Scheme.EXPLICIT_ADAPTIVE
    expo = 0.2 if fsal else 0.5
    while t < cfg.t_end * (1 - 1e-14):
        target = min([s for s in stops if s > t * (1 + 1e-14)] + [cfg.t_end])
        h = min(h, target - t)
        if h < DT_MIN:
            raise FlowError(f"step size underflow (dt < {DT_MIN}) at t={t}: stiff or degenerate data")
        try:
            y, err, klast = _attempt(fld, v, h, cfg.scheme, k if fsal else None)
            fld._check(y)
        except _PositivityLoss:
            h /= 2
            continue
        en = _err_norm(cfg, v, y, err)
        drift = abs(fld.mass(y) / fld.mass(v) - 1)
        if en > 1 or drift > STEP_MASS_TOL:
            h *= max(0.2, 0.9 * en**-expo) if en > 1 else 0.5
            continue
        t += h
        v = y
        k = klast if fsal else fld.rhs(v)
        record(t, v, k)
        if rec["E"][-1] - rec["E"][-2] > monotone_tol:
            raise FlowError(
                f"energy i - d e increased by {rec['E'][-1] - rec['E'][-2]:.3e} at t={t:.6g}: discretization failure"
            )
        if abs(rec["m"][-1] / m0 - 1) > 1e-6:
            raise FlowError(f"mass drift {abs(rec['m'][-1] / m0 - 1):.3e} exceeds 1e-6 at t={t:.6g}")
        for s in stops:
            if abs(s - t) <= 1e-12 * max(1.0, s):
                snaps[s] = _frozen(v)
        h *= 5.0 if en == 0 else min(5.0, max(1.0, 0.9 * en**-expo))
    return FlowTrace(
        times=_frozen(rec["t"]),
        entropy_e=_frozen(rec["e"]),
        fisher_i=_frozen(rec["i"]),
        mass=_frozen(rec["m"]),
        decay_lhs=_frozen(rec["lhs"]),
        decay_rhs=_frozen(rec["rhs"]),
        energy=_frozen(rec["E"]),
        oscillation=_frozen(rec["osc"]),
        p=p,
        d=d,
        beta=b,
        final=fld.rule.grid(_frozen(v), True),
        snapshots=snaps,
    )


@dataclass(frozen=True)
class DiffInequalityReport:
    tau: np.ndarray
    residual: np.ndarray
    e_prime: np.ndarray
    fisher: np.ndarray
    warning: str | None

    @property
    def min_residual(self) -> float:
        return float(np.min(self.residual)) if self.residual.size else 0.0

    def rate_mismatch(self) -> float:
        """max |e_tau + i| against the scale of i, on the resampled grid."""
        if self.e_prime.size == 0:
            return 0.0
        return float(np.max(np.abs(self.e_prime + self.fisher)))


def check_diff_inequality(
    trace: FlowTrace, p: float, d: float, samples: int = 401, coefficient: float | None = None
) -> DiffInequalityReport:
    """Residual of e'' + d e' - c |e'|^2/(1 - (p-2) e) along a beta = 1 trace.

    Time is rescaled to tau = 2t, the clock in which e' = -i.  Entropy and
    Fisher information are divided by ||f||_p^2 so the residual does not depend
    on the normalization of the initial datum.  The default c is gamma1/2.
    """
    if trace.beta != 1:
        raise DomainError("the differential inequality is stated for beta = 1 runs")
    c = gamma1(p, d) / 2 if coefficient is None else coefficient
    t = np.asarray(trace.times)
    scale = trace.mass[0] ** (2 / p)
    warning = None
    if t.size < 8:
        return DiffInequalityReport(np.array([]), np.array([]), np.array([]), np.array([]), "trace too short")
    if trace.entropy_e[0] / scale < 1e-14:
        z = np.zeros(samples - 2)
        return DiffInequalityReport(np.linspace(0, 2 * t[-1], samples)[1:-1], z, z, z, None)
    tau = 2 * t
    e = CubicSpline(tau, trace.entropy_e / scale)
    i = CubicSpline(tau, trace.fisher_i / scale)
    grid = np.linspace(tau[0], tau[-1], samples)
    hstep = grid[1] - grid[0]
    if np.max(np.diff(tau)) > 4 * hstep:
        warning = f"adaptive trace coarser ({np.max(np.diff(tau)):.3g}) than FD spacing ({hstep:.3g})"
    ev = e(grid)
    e1 = (ev[2:] - ev[:-2]) / (2 * hstep)
    e2 = (ev[2:] - 2 * ev[1:-1] + ev[:-2]) / hstep**2
    mid = ev[1:-1]
    res = e2 + d * e1 - c * e1**2 / (1 - (p - 2) * mid)
    return DiffInequalityReport(grid[1:-1], res, e1, i(grid[1:-1]), warning)


def initial_corpus(n: int, rule, seed: int = 0) -> list[GridFunction]:
    """n seeded data 1 + a x + b x^2 + c sin(pi x/2) with |a| + |b| + |c| <= 0.5."""
    rng = np.random.default_rng(seed)
    out = []
    x = rule.nodes
    for _ in range(n):
        v = rng.uniform(-1, 1, 3)
        a, b, c = v / np.sum(np.abs(v)) * rng.uniform(0.05, 0.5)
        out.append(rule.grid(1 + a * x + b * x**2 + c * np.sin(math.pi * x / 2), True))
    return out


def polynomial_datum(rule, coeffs) -> GridFunction:
    """1 + a x + b x^2 + c sin(pi x/2) for coefficients (a, b, c)."""
    a, b, c = (list(coeffs) + [0.0, 0.0, 0.0])[:3]
    x = rule.nodes
    return rule.grid(1 + a * x + b * x**2 + c * np.sin(math.pi * x / 2), True)
