"""Command-line entry point: figure tables, single-case reports and verification runs.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import enum
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import figures, flow, improve, region, spectral, verify
from .core import DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COMMANDS = ("region", "improve", "flow", "spectral", "ckp", "verify-all")
FIGURE_COMMAND = {"fig1": "region", "fig2": "region", "fig3_2": "region", "fig4": "improve",
                  "fig5_1": "improve", "fig5_2": "spectral"}
PARAM_KEYS = ("p", "d", "beta", "k", "N", "seed", "t_end", "datum", "figure", "points", "out", "format")
INT_KEYS = {"k", "N", "seed", "datum", "points"}
FLOAT_KEYS = {"p", "d", "beta", "t_end"}
DEFAULTS = {"p": 2.5, "d": 5.0, "beta": 1.0, "k": 1, "N": 48, "seed": 42, "t_end": 1.0, "datum": 0,
            "points": 50, "format": "csv"}


class OutputFormat(enum.Enum):
    CSV = "csv"
    JSON = "json"


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output_format: OutputFormat = OutputFormat.CSV

    def get(self, key):
        return self.params.get(key, DEFAULTS.get(key))


class UsageError(Exception):
    pass


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"parameter {key!r} has invalid value {value!r}") from None
    return str(value)


def load_config(path: str | Path) -> dict:
    """Read a flat YAML mapping of parameter names to scalars."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a flat mapping")
    unknown = sorted(set(data) - set(PARAM_KEYS))
    if unknown:
        raise UsageError(f"config {path} has unknown keys: {', '.join(unknown)}")
    for k, v in data.items():
        if isinstance(v, (dict, list)):
            raise UsageError(f"config key {k!r} must be a scalar")
    return {k: _coerce(k, v) for k, v in data.items()}


def _validate(cfg: RunConfig):
    g = cfg.get
    fig = g("figure")
    if fig is not None:
        if fig not in FIGURE_COMMAND and fig != "phi_table":
            raise UsageError(f"unknown figure {fig!r}; choose from {', '.join(figures.FIGURES)}, phi_table")
        if fig in FIGURE_COMMAND and FIGURE_COMMAND[fig] != cfg.command:
            raise UsageError(f"figure {fig} belongs to the '{FIGURE_COMMAND[fig]}' command")
    if g("p") < 1:
        raise DomainError(f"p must be >= 1, got {g('p')}")
    if g("d") < 1:
        raise DomainError(f"d must be >= 1, got {g('d')}")
    if g("N") < 4:
        raise DomainError(f"N must be >= 4, got {g('N')}")
    if g("points") < 1:
        raise DomainError(f"points must be >= 1, got {g('points')}")
    if cfg.command == "flow":
        if not g("t_end") > 0:
            raise DomainError(f"t_end must be > 0, got {g('t_end')}")
        if g("datum") < 0:
            raise DomainError(f"datum must be >= 0, got {g('datum')}")
    if cfg.command == "spectral" and fig is None:
        if not 1 < g("p") < 2:
            raise DomainError(f"spectral bounds require p in (1, 2), got {g('p')}")
        if g("k") < 1:
            raise DomainError(f"k must be >= 1, got {g('k')}")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v) + 0.0)
    return str(v)


def write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def write_json(stream, header, rows):
    json.dump([{h: _json_value(v) for h, v in zip(header, r)} for r in rows], stream, indent=1)
    stream.write("\n")


def _emit(cfg: RunConfig, header, rows):
    writer = write_json if cfg.output_format is OutputFormat.JSON else write_csv
    out = cfg.get("out")
    if out is None:
        writer(sys.stdout, header, rows)
        return
    path = Path(out)
    try:
        with path.open("w", newline="") as fh:
            writer(fh, header, rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def emit_figure(which: str, cfg: RunConfig):
    """Write the data table of ``which`` to cfg's output (CSV unless JSON is requested)."""
    header, rows = figures.table(which)
    _emit(cfg, header, rows)
    return cfg.get("out")


def _run_region(cfg):
    p, d = cfg.get("p"), cfg.get("d")
    iv = region.classify(p, d)
    B = region.admissible_set(p, d)
    c = region.coeffs(p, d)
    roots = region.beta_roots(p, d) or (math.nan, math.nan)
    header = ["p", "d", "a", "b", "beta_minus", "beta_plus", "gamma_nonneg_kind", "admissible_nonempty",
              "admissible_lo", "admissible_hi"]
    row = [p, d, c.a, c.b, roots[0], roots[1], iv.kind.value, B.nonempty, B.lo, B.hi]
    return header, [row], EXIT_OK


def _run_improve(cfg):
    p, d = cfg.get("p"), cfg.get("d")
    header, rows = figures.phi_table(p, d, n=cfg.get("points"))
    return header, rows, EXIT_OK


def _run_flow(cfg):
    p, d, beta, N = cfg.get("p"), cfg.get("d"), cfg.get("beta"), cfg.get("N")
    if beta != 1 and not improve.gamma(beta, p, d) > 0:
        raise DomainError(f"the decay rate gamma(beta) must be positive, beta = {beta}, (p, d) = ({p}, {d})")
    if not region.admissible_set(p, d).contains(beta):
        print(f"warning: beta = {beta} lies outside the admissible set at (p, d) = ({p}, {d})", file=sys.stderr)
    fc = flow.FlowConfig(p=p, d=d, beta=beta, t_end=cfg.get("t_end"), N=N)
    rule = fc.measure.rule(N)
    k = cfg.get("datum")
    w0 = flow.initial_corpus(k + 1, rule, seed=cfg.get("seed"))[k]
    tr = flow.run_flow(w0, fc)
    return ["t", "e", "i", "mass", "decay_lhs", "decay_rhs"], tr.as_rows(), EXIT_OK


def _run_spectral(cfg):
    p, d, k = cfg.get("p"), cfg.get("d"), cfg.get("k")
    ed = spectral.eigen_data(k, d)
    xs = np.linspace(0, 1, cfg.get("points") + 1)[1:]
    header = ["x", "s", "chi1", "chi3", "Phi_k", "lambda_next", "alpha_k"]
    rows = []
    for x in xs:
        x = float(x)
        rows.append([x, x * x, float(spectral.chi1(x, ed.alpha_k, p)), float(spectral.chi3(x, p)),
                     float(spectral.Phi_k(x * x, k, p, d)), spectral.eigenvalue(k + 1, d), ed.alpha_k])
    return header, rows, EXIT_OK


def _run_ckp(cfg):
    rep = verify.ckp_suite(seed=cfg.get("seed"))
    header = ["check", "worst_slack", "status"]
    rows = []
    for key, v in rep.details["worst_by_check"].items():
        rows.append(["/".join(_cell(x) for x in key), v, "pass" if v >= -rep.tolerance else "fail"])
    return header, rows, EXIT_OK if rep.status == "pass" else EXIT_FAIL


def _run_verify_all(cfg):
    reports = verify.verify_all(seed=cfg.get("seed"))
    header = ["suite", "cases_run", "worst_slack", "tolerance", "status"]
    rows = [[r.suite, r.cases_run, r.worst_slack, r.tolerance, r.status] for r in reports]
    ok = all(r.status == "pass" for r in reports)
    return header, rows, EXIT_OK if ok else EXIT_FAIL


RUNNERS = {"region": _run_region, "improve": _run_improve, "flow": _run_flow, "spectral": _run_spectral,
           "ckp": _run_ckp, "verify-all": _run_verify_all}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="interpolation exponent")
    common.add_argument("--d", type=float, help="dimension parameter of the measure")
    common.add_argument("--beta", type=float, help="flow exponent")
    common.add_argument("--k", type=int, help="number of removed spherical-harmonic degrees")
    common.add_argument("--N", type=int, help="quadrature order")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--t-end", dest="t_end", type=float, help="flow horizon")
    common.add_argument("--datum", type=int, help="index into the flow initial-data corpus")
    common.add_argument("--points", type=int, help="grid size for single-case tables")
    common.add_argument("--figure", help="emit a figure table instead of the single-case report")
    common.add_argument("--config", help="flat YAML file of parameters; flags take precedence")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], help="output format")
    parser = argparse.ArgumentParser(prog="ultraspherical", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    params = load_config(args.config) if args.config else {}
    for key in PARAM_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            params[key] = _coerce(key, v)
    fmt = params.get("format", DEFAULTS["format"])
    try:
        out_fmt = OutputFormat(fmt)
    except ValueError:
        raise UsageError(f"format must be csv or json, got {fmt!r}") from None
    return RunConfig(args.command, params, out_fmt)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        _validate(cfg)
        fig = cfg.get("figure")
        if fig in FIGURE_COMMAND:
            emit_figure(fig, cfg)
            return EXIT_OK
        if fig == "phi_table":
            if cfg.command != "improve":
                raise UsageError("figure phi_table belongs to the 'improve' command")
            header, rows = figures.phi_table(cfg.get("p"), cfg.get("d"), n=cfg.get("points"))
            code = EXIT_OK
        else:
            header, rows, code = RUNNERS[cfg.command](cfg)
        _emit(cfg, header, rows)
        return code
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except flow.FlowError as exc:
        print(f"flow failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
