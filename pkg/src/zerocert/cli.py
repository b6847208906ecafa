"""Command-line interface: ``zerocert {delta,certify,search,example11,gap}``.

Exit codes: 0 success, 2 a sound negative outcome (no certificate, empty
search, a check that does not hold), 1 errors.
"""

import argparse
import configparser
import sys
from math import cos, sin

import numpy as np

from . import geometry as geo
from .certify import certify_near_zero, example11_table, search_small_delta
from .config import DEFAULTS, using
from .delta import delta_bounds
from .errors import NoCertificate, ZerocertError
from .minimax import convexity_mechanism_check, gap_inequality_check
from .operators import make_catalog_operator
from .problem import ProblemConfig, body_from_spec, parse_config
from .serialize import csv_text, fmt_float, make_certificate, write_atomic

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class Outcome:
    def __init__(self, status, result, lines, csv_header=None, csv_rows=(), code=EXIT_OK):
        self.status = status
        self.result = result
        self.lines = lines
        self.csv_header = csv_header
        self.csv_rows = list(csv_rows)
        self.code = code


def _operator(cfg: ProblemConfig):
    return make_catalog_operator(cfg.operator, cfg.params, jacobian_mode=cfg.jacobian,
                                 fd_step=cfg.fd_step)


def _target(cfg):
    spec = cfg.body or cfg.region
    if spec is None:
        raise ValueError("config needs a [body] or [region] section")
    return body_from_spec(spec)


def _rotation(d, seed):
    if d == 2:
        t = 0.7
        return np.array([[cos(t), -sin(t)], [sin(t), cos(t)]])
    Q, R = np.linalg.qr(np.random.default_rng(seed).standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def cmd_delta(cfg: ProblemConfig) -> Outcome:
    body = _target(cfg)
    b = delta_bounds(body, cfg.resolution)
    shift = np.linspace(1.5, -0.75, body.dim)
    checks = {}
    for label, moved in (("translation", body.translated(shift)),
                         ("rotation", body.transformed(_rotation(body.dim, cfg.seed)))):
        o = delta_bounds(moved, cfg.resolution)
        checks[label] = {"lower_diff": abs(o.lower - b.lower), "upper_diff": abs(o.upper - b.upper)}
    result = {"bounds": b, "self_checks": checks}
    lines = [
        f"delta bracket: [{fmt_float(b.lower)}, {fmt_float(b.upper)}]",
        f"upper bound method: {b.upper_method}; resolution {b.resolution}",
        f"LP witness: {len(b.lower_witness.points)} points, "
        f"interpolation violation {b.lower_witness.max_violation():.3e}",
    ]
    for label, c in checks.items():
        lines.append(f"{label} check: |dlower| = {c['lower_diff']:.3e}, |dupper| = {c['upper_diff']:.3e}")
    row = [b.lower, b.upper, b.upper_method, b.resolution]
    return Outcome("ok", result, lines, ["lower", "upper", "upper_method", "resolution"], [row])


def cmd_certify(cfg: ProblemConfig) -> Outcome:
    op = _operator(cfg)
    X = _target(cfg)
    try:
        c = certify_near_zero(op, X, cfg.resolution, cfg.tol, cfg.L)
    except NoCertificate as exc:
        result = {"reason": str(exc), "hull": exc.payload}
        return Outcome("no-certificate", result, [f"no certificate: {exc}"],
                       ["status", "claimed_bound"], [["no-certificate", ""]], EXIT_NEGATIVE)
    lines = [
        f"claimed bound: inf |Phi| <= {fmt_float(c.claimed_bound)}",
        f"L = {fmt_float(c.L)} ({c.L_provenance}); delta upper {fmt_float(c.delta_upper)}",
        f"membership residual {c.membership.residual:.3e}; grid min |Phi| {fmt_float(c.validation_grid_min)}",
        f"status: {c.status}" + (f" [{c.watermark}]" if c.watermark else ""),
    ]
    row = [c.status, c.claimed_bound, c.delta_upper, c.L, c.validation_grid_min]
    return Outcome(c.status, c, lines,
                   ["status", "claimed_bound", "delta_upper", "L", "grid_min"], [row])


def cmd_search(cfg: ProblemConfig) -> Outcome:
    op = _operator(cfg)
    if cfg.region is None:
        raise ValueError("search needs a [region] section")
    V = body_from_spec(cfg.region)
    r = search_small_delta(op, V, cfg.budget, cfg.tol)
    header = ["a", "b", "delta_upper", "residual"]
    rows = [[" ".join(fmt_float(x) for x in body.a), " ".join(fmt_float(x) for x in body.b), d, res]
            for body, d, res in r.trace]
    if r.status == "empty":
        return Outcome("empty", r, [f"no candidate found ({r.evaluations} evaluations)"],
                       header, rows, EXIT_NEGATIVE)
    lines = [
        f"best body: {r.best_body!r}",
        f"delta upper {fmt_float(r.delta_upper)}; membership residual {r.residual:.3e}",
        f"{len(r.trace)} candidates, {r.evaluations} evaluations",
    ]
    return Outcome("found", r, lines, header, rows)


EXAMPLE11_COLUMNS = ["n", "alpha", "beta", "phi_alpha_1", "phi_alpha_2", "phi_beta_1",
                     "phi_beta_2", "paper_bound", "delta_exact", "membership_residual"]


def cmd_example11(n_max: int) -> Outcome:
    t = example11_table(n_max)
    rows = [[r.n, r.alpha, r.beta, *r.phi_alpha, *r.phi_beta, r.paper_bound, r.delta_exact,
             r.membership_residual] for r in t.rows]
    lines = [f"{'n':>4} {'paper_bound':>12} {'delta_exact':>24} {'residual':>9}"]
    for r in t.rows:
        lines.append(f"{r.n:>4} {r.paper_bound:>12.6g} {fmt_float(r.delta_exact):>24} "
                     f"{r.membership_residual:>9.2e}")
    lines.append(f"max | |Phi| - 1 | over samples: {t.max_norm_deviation:.3e}; "
                 f"0 in image: {t.zero_in_image}")
    return Outcome("ok", t, lines, EXAMPLE11_COLUMNS, rows)


def cmd_gap(cfg: ProblemConfig) -> Outcome:
    op = _operator(cfg)
    X = _target(cfg)
    L = cfg.L if cfg.L is not None else op.known_grad_lipschitz
    if L is None:
        raise ValueError(f"{op.name} has no known L; set L in [run]")
    psi = delta_bounds(X, cfg.resolution).lower_witness
    g = gap_inequality_check(op, X, psi, geo.sample(X, cfg.resolution), L)
    conv = convexity_mechanism_check(op, X, L, cfg.trials, cfg.seed)
    good = g.holds and conv.violations == 0
    lines = [
        f"gap inequality: lhs {fmt_float(g.lhs)} <= rhs {fmt_float(g.rhs)} + slack "
        f"{fmt_float(g.slack)}: {g.holds}",
        f"convexity mechanism: {conv.violations} violations in {conv.trials} trials "
        f"(worst residual {conv.worst:.3e})",
    ]
    row = [g.holds, g.lhs, g.rhs, g.slack, conv.violations, conv.worst]
    return Outcome("holds" if good else "fails", {"gap": g, "convexity": conv, "L": L}, lines,
                   ["holds", "lhs", "rhs", "slack", "violations", "worst"], [row],
                   EXIT_OK if good else EXIT_NEGATIVE)


def _parse_tol(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--tol expects NAME=VALUE, got {item!r}")
        out[name.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zerocert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON certificate here ('-' for stdout)")
    common.add_argument("--csv", help="write the CSV table here")
    common.add_argument("--quiet", action="store_true", help="suppress the text report")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE",
                        help="override a tolerance (repeatable); 'hull' sets the hull tolerance")
    cfg_args = argparse.ArgumentParser(add_help=False)
    cfg_args.add_argument("--config", required=True, help="problem configuration file")
    cfg_args.add_argument("--resolution", type=int, help="override [run] resolution")
    cfg_args.add_argument("--seed", type=int, help="override [run] seed")
    for name, helptext in (("delta", "two-sided bounds on the convexity defect"),
                           ("certify", "near-zero certificate"),
                           ("search", "search for small-defect sets with 0 in the image hull"),
                           ("gap", "gap inequality and convexity mechanism checks")):
        sub.add_parser(name, parents=[common, cfg_args], help=helptext)
    ex = sub.add_parser("example11", parents=[common], help="table for the counterexample family")
    ex.add_argument("--n-max", type=int, default=10)
    return p


def _load_config(args, tol_over):
    with open(args.config, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    changes = {}
    if args.resolution is not None:
        changes["resolution"] = args.resolution
    if args.seed is not None:
        changes["seed"] = args.seed
    if "hull" in tol_over:
        changes["tol"] = float(tol_over["hull"])
    tolerances = dict(cfg.tolerances)
    tolerances.update(tol_over)
    if tolerances:
        typed = cfg.tolerance_record().override(**tolerances).as_dict()
        changes["tolerances"] = {k: typed[k] for k in tolerances}
    if changes:
        cfg = ProblemConfig(**{**cfg.as_dict(), **changes})
    if cfg.resolution < 1:
        raise ValueError("resolution must be at least 1")
    return cfg


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tol_over = _parse_tol(args.tol)
        if args.command == "example11":
            if args.n_max < 1:
                raise ValueError("--n-max must be positive")
            config = {"n_max": args.n_max, "tolerances": tol_over}
            record = DEFAULTS.override(**tol_over)
            with using(record):
                out = cmd_example11(args.n_max)
        else:
            cfg = _load_config(args, tol_over)
            config = cfg.as_dict()
            handler = {"delta": cmd_delta, "certify": cmd_certify, "search": cmd_search,
                       "gap": cmd_gap}[args.command]
            with using(cfg.tolerance_record()):
                out = handler(cfg)
        cert = make_certificate(args.command, config, out.status, out.result)
        if args.out == "-":
            sys.stdout.write(cert.dumps())
        elif args.out:
            write_atomic(args.out, cert.dumps())
        if args.csv and out.csv_header:
            write_atomic(args.csv, csv_text(out.csv_header, out.csv_rows))
        if not args.quiet:
            for line in out.lines:
                print(line)
        return out.code
    except (ZerocertError, ValueError, KeyError, TypeError, OSError, ArithmeticError,
            configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())

