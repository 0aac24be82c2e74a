"""Property suites behind ``verify-all``.

Each suite returns a VerificationReport whose status is pass exactly when the
worst slack is at least minus the suite tolerance.  Slack is always oriented so
that a nonnegative value means the property holds.
"""
from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import ckp, figures, flow, improve, region, spectral
from .core import MeasureParams, log_entropy, fisher

MAIN_CASES = ((1.2, 10.0), (1.5, 2.0), (2.5, 5.0), (3.0, 3.0), (4.0, 1.0))
CKP_PROBES = (1.5, 2 - 1e-4, 2.0, 2 + 1e-4, 3.0, 4 - 1e-4, 4 + 1e-4, 5.0)
FLOW_CASES = ((1.0, 1.5, 2.0), (1.0, 2.5, 2.0), (4 / 3, 3.0, 3.0), (1.8, 2.5, 5.0))


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    cases_run: int
    worst_slack: float
    tolerance: float
    provenance: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.worst_slack >= -self.tolerance else "fail"


class _Worst:
    def __init__(self):
        self.value = math.inf
        self.cases = 0
        self.by_key: dict = {}

    def add(self, slack: float, key=None):
        self.cases += 1
        slack = float(slack)
        if math.isnan(slack):
            slack = -math.inf
        self.value = min(self.value, slack)
        if key is not None:
            self.by_key[key] = min(self.by_key.get(key, math.inf), slack)


def random_positive_function(rule, rng, max_degree: int = 6):
    """exp of a random polynomial with decaying Gegenbauer coefficients.

    The overall amplitude is log-uniform so that near-constant functions, where
    the inequalities are tightest, are well represented.
    """
    deg = int(rng.integers(1, max_degree + 1))
    c = rng.normal(size=deg) / np.arange(1, deg + 1) ** 1.5
    amp = 10 ** rng.uniform(-2.5, 0.2)
    log_u = rule.from_coeffs(np.r_[0.0, amp * c / max(np.max(np.abs(c)), 1e-300)])
    return rule.grid(np.exp(log_u), True)


def _normalized(u):
    return u.map(lambda v: v / u.norm(2))


def constants_suite(seed: int = 0) -> VerificationReport:
    w = _Worst()
    for d in range(1, 11):
        w.add(1e-12 - abs(improve.gamma1(2, d) - improve.gamma1_star(d)), ("gamma1_star", d))
    lo, hi = region.p_thresholds(2.0)
    s3 = math.sqrt(3)
    w.add(1e-10 - max(abs(lo - (9 - 4 * s3)), abs(hi - (9 + 4 * s3))), "p_thresholds_d2")
    w.add(0.5e-4 - max(abs(lo - 2.0718), abs(hi - 15.9282)), "caption_decimals")
    for d in range(4, 9):
        r1 = region.beta_roots(1.0, d)
        r2 = region.beta_roots(2 * d / (d - 2), d)
        w.add(1e-10 - max(abs(r1[0] - 1), abs(r1[1] - 1)), ("beta_at_1", d))
        w.add(1e-10 - max(abs(r - (d - 2) / (d - 3)) for r in r2), ("beta_at_crit", d))
    w.add(0.0 if ckp.kappa_at(1.0) == 1.0 else -1.0, "kappa_1")
    w.add(0.0 if ckp.kappa_at(2.0) == 1 / 8 else -1.0, "kappa_prime_2")
    return VerificationReport(
        "constants", w.cases, w.value, 0.0,
        {"gamma1(2,d)": "limit constant", "p_pm": "zeros of a(p,2)", "beta_pm": "roots at p=1, 2*",
         "kappa": "CKP regime table"},
    )


def region_suite(seed: int = 0) -> VerificationReport:
    rng = np.random.default_rng(seed)
    w = _Worst()
    disagreements = checked = 0
    for _ in range(500):
        d = float(rng.choice([rng.integers(1, 11), rng.uniform(1, 12)]))
        p = float(rng.uniform(1, 20))
        iv = region.classify(p, d)
        edges = [e for e in (iv.lo, iv.hi) if math.isfinite(e)]
        for beta in rng.uniform(-5, 10, 50):
            if any(abs(beta - e) <= 1e-10 for e in edges):
                continue
            checked += 1
            if iv.contains(beta) != (improve.gamma(beta, p, d) >= 0):
                disagreements += 1
    w.add(-disagreements, "sign_sampling")
    # nonemptiness of the admissible set at d = 2 flips once, at 9 + 4 sqrt 3
    edge = 9 + 4 * math.sqrt(3)
    ps = np.arange(15.0, 17.0, 1e-4)
    flags = np.array([region.admissible_set(float(p), 2.0).nonempty for p in ps])
    flips = np.flatnonzero(flags[1:] != flags[:-1])
    ok = flips.size == 1 and ps[flips[0]] < edge <= ps[flips[0] + 1] and flags[0]
    w.add(0.0 if ok else -1.0, "flip_at_9+4sqrt3")
    return VerificationReport(
        "region", checked + ps.size, w.value, 0.0, {"classify": "sign lemma", "admissible_set": "nonemptiness"},
        {"disagreements": disagreements, "flips": int(flips.size)},
    )


def main_inequality_suite(seed: int = 0, n_per_case: int = 50, n_lsi: int = 50) -> VerificationReport:
    rng = np.random.default_rng(seed)
    w = _Worst()
    for p, d in MAIN_CASES:
        mp = MeasureParams(d)
        rule = mp.rule(64)
        for _ in range(n_per_case):
            u = random_positive_function(rule, rng)
            w.add(improve.main_inequality_slack(u, p, mp), (p, d))
    for d in (2.0, 3.0):
        mp = MeasureParams(d)
        rule = mp.rule(64)
        for _ in range(n_lsi // 2):
            u = _normalized(random_positive_function(rule, rng))
            rhs = improve.improved_log_sobolev_rhs(fisher(u, mp), d)
            w.add(rhs - log_entropy(u), ("lsi", d))
    return VerificationReport(
        "main_inequality", w.cases, w.value, 1e-8,
        {"d Phi(e) <= i": "main theorem", "improved LSI": "p = 2 case"}, {"worst_by_case": w.by_key},
    )


def beta_limit_suite(seed: int = 0) -> VerificationReport:
    p, d = 2.5, 5.0
    s_grid = np.linspace(0, 0.95 / (p - 2), 101)[1:]
    err = max(abs(improve.varphi_beta(float(s), 1 + 1e-5, p, d) - improve.varphi1(float(s), p, d)) for s in s_grid)
    return VerificationReport(
        "beta_limit", s_grid.size, 1e-4 - err, 0.0, {"phi_beta -> phi_1": "beta -> 1+"}, {"max_error": err}
    )


def flow_suite(seed: int = 0, n_data: int = 10, N: int = 48) -> VerificationReport:
    w = _Worst()
    details = {}
    for b, p, d in FLOW_CASES:
        cfg = flow.FlowConfig(p=p, d=d, beta=b, t_end=1.0, N=N)
        rule = cfg.measure.rule(N)
        key = (b, p, d)
        for w0 in flow.initial_corpus(n_data, rule, seed=seed):
            try:
                tr = flow.run_flow(w0, cfg)
            except flow.FlowError as exc:
                details[str(key)] = str(exc)
                w.add(-math.inf, (key, "run"))
                continue
            w.add(1e-6 - tr.mass_drift(), (key, "mass"))
            w.add(1e-10 - float(np.max(tr.energy_increments(), initial=-np.inf)), (key, "lyapunov"))
            w.add(float(np.min(tr.decay_residual())) + 1e-6, (key, "decay"))
            if b == 1:
                rep = flow.check_diff_inequality(tr, p, d)
                w.add(rep.min_residual + 1e-4, (key, "diff_ineq_fd"))
    # each check has its own tolerance, folded into its slack
    return VerificationReport(
        "flow", w.cases, w.value, 0.0,
        {"mass": "invariance of int w^{beta p}", "lyapunov": "i - d e nonincreasing",
         "decay": "energy decay estimate", "diff_ineq_fd": "differential inequality, beta = 1"},
        {"worst_by_check": w.by_key, **details},
    )


def spectral_suite(seed: int = 0) -> VerificationReport:
    rng = np.random.default_rng(seed)
    w = _Worst()
    for d in (2.0, 3.0, 5.0):
        rule = MeasureParams(d).rule(64)
        V, A = rule.vandermonde[:, :11], rule.analysis[:11]
        ev = np.sort(np.linalg.eigvals(-(A @ rule.L @ V)).real)
        w.add(1e-8 - np.max(np.abs(ev - [k * (k + d - 1) for k in range(11)])), ("eigen", d))
    for p, d in ((1.5, 2.0), (1.2, 3.0)):
        mp = MeasureParams(d)
        rule = mp.rule(64)
        for _ in range(100):
            u = random_positive_function(rule, rng)
            lhs, rhs = spectral.hypercontractivity_check(u, p, mp)
            w.add(rhs - lhs + 1e-12, ("hyper", p, d))
    for p, d, k in ((1.5, 2.0, 1), (1.2, 3.0, 2)):
        mp = MeasureParams(d)
        rule = mp.rule(64)
        for _ in range(50):
            c = np.zeros(14)
            c[0] = 1.0
            c[k + 1 :] = rng.normal(size=14 - k - 1) * 10 ** rng.uniform(-2, 0) / np.arange(k + 1, 14)
            u = spectral.SpectralCoeffs(c, d, rule).to_grid()
            w.add(spectral.theorem_slack(u, k, p, mp) + 1e-8, ("theorem2", p, d, k))
    x = np.linspace(0, 1, 1001)[1:]
    alpha = spectral.eigen_data(1, 2).alpha_k
    top = np.maximum(spectral.chi1(x, alpha, 1.5), spectral.chi3(x, 1.5))
    for g in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75):
        w.add(float(np.min(top - spectral.chi2(x, alpha, 1.5, g))) + 1e-12, ("chi_dominance", g))
    return VerificationReport(
        "spectral", w.cases, w.value, 0.0,
        {"eigen": "lambda_k = k(k+d-1)", "hyper": "Nelson time", "theorem2": "orthogonality improvement",
         "chi_dominance": "gamma optimization"},
        {"worst_by_check": w.by_key},
    )


def ckp_suite(seed: int = 0, n: int = 500) -> VerificationReport:
    rng = np.random.default_rng(seed)
    w = _Worst()
    mp = MeasureParams(3.0)
    rule = mp.rule(64)
    for q in (1.0, 1.25, 1.5, 1.75, 2.0):
        for _ in range(n):
            f, g = random_positive_function(rule, rng), random_positive_function(rule, rng)
            rep = ckp.ckgen_bound(f, g, q)
            w.add(rep.slack, ("ckgen", q))
    for p in CKP_PROBES:
        for _ in range(n):
            u = random_positive_function(rule, rng)
            w.add(ckp.corollary_ck(u, p, mp).slack, ("corollary", p))
    for _ in range(50):
        # p = 1: equality, the Poincare form with constant 1
        u = random_positive_function(rule, rng)
        rep = ckp.corollary_ck(u, 1.0, mp)
        w.add(1e-12 * max(1.0, rep.e_psi) - abs(rep.e_psi - rep.lower_bound), ("poincare", 1.0))
        w.add(0.0 if ckp.ckp_regime(1.0).kappa == 1.0 else -1.0, ("poincare", "constant"))
    return VerificationReport(
        "ckp", w.cases, w.value, 1e-10,
        {"ckgen": "Bregman lower bound", "corollary": "four regimes", "poincare": "p = 1"},
        {"worst_by_check": w.by_key},
    )


def _csv_digest(header, rows) -> str:
    from .cli import write_csv

    buf = io.StringIO()
    write_csv(buf, header, rows)
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def figures_suite(seed: int = 0) -> VerificationReport:
    w = _Worst()
    digests = {}
    for name in figures.FIGURES:
        h1, r1 = figures.table(name)
        h2, r2 = figures.table(name)
        a, b = _csv_digest(h1, r1), _csv_digest(h2, r2)
        digests[name] = a
        w.add(0.0 if a == b else -1.0, (name, "deterministic"))
        if name == "fig4":
            cols = [k for k, c in enumerate(h1) if c.startswith("phi_minus_e_")]
            ok = len(cols) == len(figures.FIG4_BETAS) and all(r[k] > 0 for r in r1 for k in cols if r[0] > 0)
            w.add(0.0 if ok else -1.0, ("fig4", "positive"))
    return VerificationReport(
        "figures", w.cases, w.value, 0.0, {name: "figure data" for name in figures.FIGURES}, {"sha256": digests}
    )


SUITES = {
    "constants": constants_suite,
    "region": region_suite,
    "main_inequality": main_inequality_suite,
    "beta_limit": beta_limit_suite,
    "flow": flow_suite,
    "spectral": spectral_suite,
    "ckp": ckp_suite,
    "figures": figures_suite,
}


def verify_all(seed: int = 42, suites=None) -> list[VerificationReport]:
    names = list(SUITES) if suites is None else list(suites)
    return [SUITES[name](seed) for name in names]
