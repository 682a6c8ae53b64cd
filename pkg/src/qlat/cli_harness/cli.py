"""Command-line driver: `qlat <command> [action] [options]`."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from ..arith import squarefree_part
from ..eisenstein_series import a_of_m, sigma_m
from ..errors import DomainError, QlatError
from ..green_archimedean import archimedean_report, classify_bad, count_region
from ..lattice_core import IntegralLattice, PeriodPoint
from ..local_density import count_brute, count_identity_deviation, mu_p, w_level
from ..reduction_chains import ChainModel, level_counts, level_window_counts, minima_profile
from .acceptance import CRITERIA, run_suite
from .config import ExperimentConfig, load_config
from .ledger import ROW_HEADER, run_ledger
from .output import fmt, render_csv


class UsageError(QlatError):
    pass


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _lattice(args, cfg):
    return IntegralLattice.load(args.lattice or cfg.lattice)


def _point(args, cfg, lat):
    return PeriodPoint.load(lat, args.point or cfg.point)


def cmd_density(args, cfg):
    lat = _lattice(args, cfg)
    if args.action == "verify":
        _need(args, "pmax", "mmax")
        from ..arith import primes_upto

        rows = []
        ok = True
        for p in primes_upto(args.pmax):
            for m in range(1, args.mmax + 1):
                try:
                    dev = float(p * count_identity_deviation(lat, p, m))
                except ZeroDivisionError:  # m not represented locally
                    dev = float("nan")
                for n in range(1, args.nmax + 1):
                    mu = mu_p(lat, p, m, n).value
                    match = mu == Fraction(count_brute(lat, p, n, m), p ** (n * (lat.rank - 1)))
                    ok &= match
                    rows.append([p, m, n, mu.numerator, mu.denominator, int(match), dev])
        header = ["p", "m", "n", "mu_num", "mu_den", "brute_match", "deviation"]
        return render_csv(header, rows, cfg.digest()), 0 if ok else 1
    _need(args, "p", "m", "n")
    dv = mu_p(lat, args.p, args.m, args.n, method=args.method)
    if args.parts:
        return (f"good={fmt(dv.good)} bad={fmt(dv.bad)} zero={fmt(dv.zero)} total={fmt(dv.value)}\n"), 0
    return fmt(dv.value) + "\n", 0


def cmd_count(args, cfg):
    _need(args, "m")
    lat = _lattice(args, cfg)
    pt = _point(args, cfg, lat)
    rows = [[args.m, args.T, count_region(lat, pt, args.m, args.T)]]
    return render_csv(["m", "T", "count"], rows, cfg.digest()), 0


def _eis_row(lat, D, m, P, kappa):
    est = a_of_m(lat, m, P)
    sig = sigma_m(lat, D, m)
    return [m, est.a_value, est.c_value, est.trunc_error, sig.value_at_k, sig.logderiv_at_k]


EIS_HEADER = ["m", "a", "c", "trunc_error", "sigma_k", "sigma_logderiv"]


def cmd_eisenstein(args, cfg):
    lat = _lattice(args, cfg)
    D = args.D or cfg.D
    P = args.ptrunc or cfg.P_trunc or None
    if args.action == "sweep":
        _need(args, "jmax")
        rows = [_eis_row(lat, D, D * j * j, P, args.kappa) for j in range(1, args.jmax + 1)]
    else:
        _need(args, "m")
        rows = [_eis_row(lat, D, args.m, P, args.kappa)]
    return render_csv(EIS_HEADER, rows, cfg.digest()), 0


GREEN_HEADER = ["m", "count", "A", "A_mt", "A_er", "phi_tilde", "R_x", "Phi", "uncertainty"]


def _green_row(lat, pt, D, m, kappa, cfg):
    rep = archimedean_report(lat, pt, D, m, kappa, cfg.shellmax, cfg.P_trunc or None)
    return [m, rep.vector_count, rep.A, rep.A_mt, rep.A_er, rep.phi_tilde, rep.R_x, rep.Phi, rep.uncertainty]


def cmd_green(args, cfg):
    lat = _lattice(args, cfg)
    pt = _point(args, cfg, lat)
    kappa = cfg.kappa if args.kappa is None else args.kappa
    if args.action == "badset":
        _need(args, "X")
        bad = classify_bad(lat, pt, args.X)
        return render_csv(["X", "m"], [[args.X, m] for m in bad], cfg.digest()), 0
    if args.action == "sweep":
        _need(args, "mmin", "mmax")
        D = args.D or cfg.D
        ms = [D * j * j for j in range(1, args.mmax + 1) if args.mmin <= D * j * j <= args.mmax]
        rows = [_green_row(lat, pt, D, m, kappa, cfg) for m in ms]
    else:
        _need(args, "m")
        D = args.D or squarefree_part(args.m)
        rows = [_green_row(lat, pt, D, args.m, kappa, cfg)]
    return render_csv(GREEN_HEADER, rows, cfg.digest()), 0


def _chain_header(model):
    return ["n"] + [f"mu_{i}" for i in range(1, model.rank + 1)] + [f"a_{model.rank}", "count"]


def cmd_chain(args, cfg):
    _need(args, "model")
    model = ChainModel.load(args.model, cfg.height)
    if args.action == "sweep":
        _need(args, "X")
        counts = level_window_counts(model, args.D or cfg.D, args.X)
    else:
        _need(args, "m")
        counts = level_counts(model, args.m)
    rows = []
    for n, c in counts:
        prof = minima_profile(model, n)
        rows.append([n, *prof.mu, prof.a[-1], c])
    return render_csv(_chain_header(model), rows, cfg.digest()), 0


def cmd_ledger(args, cfg):
    res = run_ledger(cfg)
    return render_csv(ROW_HEADER, res.csv_rows(), cfg.digest()), 0


def cmd_suite(args, cfg):
    numbers = [int(x) for x in args.criteria.split(",")] if args.criteria else None
    if numbers and any(k not in CRITERIA for k in numbers):
        raise UsageError(f"criteria must be among {sorted(CRITERIA)}")
    lines = []
    status = run_suite(cfg, numbers, include_slow=not args.skip_slow, report_path=args.report,
                       echo=lines.append)
    return "\n".join(lines) + "\n", status


COMMANDS = {
    "density": (cmd_density, ["verify"]),
    "count": (cmd_count, []),
    "eisenstein": (cmd_eisenstein, ["sweep"]),
    "green": (cmd_green, ["sweep", "badset"]),
    "chain": (cmd_chain, ["sweep"]),
    "ledger": (cmd_ledger, []),
    "suite": (cmd_suite, []),
}


def _global_flags(default):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=default, help="key = value configuration file")
    common.add_argument("--threads", type=int, default=default, help="worker processes for sweeps over m")
    common.add_argument("--seed", type=int, default=default, help="seed for Monte Carlo")
    common.add_argument("--out", default=default, help="write output here instead of stdout")
    return common


def build_parser() -> argparse.ArgumentParser:
    # flags may come before or after the command; the subcommand copy must not reset them
    common = _global_flags(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="qlat", parents=[_global_flags(None)],
                                     description="Lattice, density and Green-function experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, actions) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common])
        if actions:
            p.add_argument("action", nargs="?", choices=actions)
        else:
            p.set_defaults(action=None)
        if name in ("density", "count", "eisenstein", "green"):
            p.add_argument("--lattice")
        if name in ("count", "green"):
            p.add_argument("--point")
        if name in ("density", "count", "eisenstein", "green", "chain"):
            p.add_argument("--m", type=int)
        if name in ("eisenstein", "green", "chain"):
            p.add_argument("--D", type=int)
        if name in ("eisenstein", "green"):
            p.add_argument("--kappa", type=float)
        if name == "density":
            p.add_argument("--p", type=int)
            p.add_argument("--n", type=int)
            p.add_argument("--method", choices=["recursion", "brute"], default="recursion")
            p.add_argument("--parts", action="store_true")
            p.add_argument("--pmax", type=int)
            p.add_argument("--mmax", type=int)
            p.add_argument("--nmax", type=int, default=3)
        if name == "count":
            p.add_argument("--T", type=float, default=1.0)
        if name == "eisenstein":
            p.add_argument("--ptrunc", type=int)
            p.add_argument("--jmax", type=int)
        if name == "green":
            p.add_argument("--mmin", type=int)
            p.add_argument("--mmax", type=int)
        if name in ("green", "chain"):
            p.add_argument("--X", type=int)
        if name == "chain":
            p.add_argument("--model")
        if name == "suite":
            p.add_argument("--criteria", help="comma-separated criterion numbers")
            p.add_argument("--skip-slow", action="store_true")
            p.add_argument("--report", help="JSON pass/fail report path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        cfg.validate()
        handler = COMMANDS[args.command][0]
        text, status = handler(args, cfg)
    except QlatError as exc:
        print(f"qlat: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"qlat: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
