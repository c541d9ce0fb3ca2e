"""Command-line surface.

Exit codes: 0 success, 1 usage/configuration error, 2 computation
obstruction or failed property suite, 3 work budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .core import (
    CoefficientVector,
    PolygonalFamily,
    ProblemInstance,
    build_coset,
    eval_polygonal,
    level_of_form,
    make_instance,
)
from .densities import density_oracle, local_density
from .eisenstein import (
    assemble_eisenstein,
    beta_ratio,
    check_beta_bounds,
    decomposition_residual,
)
from .enumeration import (
    WitnessSpec,
    count_representations,
    witness_coverage,
    witness_search,
)
from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DispatchError,
    ObstructionError,
    PolyrepError,
)
from .reporting import ReportEnvelope, records_to_csv, records_to_jsonl
from .sieve import (
    SieveConfig,
    SieveWeightTable,
    beta_weighted_sums,
    capital_lambda_minus,
    main_term_W,
    rosser_lambda,
    theorem_driver,
    threshold_check,
    threshold_grid,
    weighted_sieve_sum,
)
from .suites import SUITES

USAGE_EXIT, OBSTRUCTION_EXIT, BUDGET_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _alpha(text: str):
    parts = tuple(int(x) for x in text.split(","))
    return CoefficientVector(parts)


def _vec4(text: str):
    parts = tuple(int(x) for x in text.split(","))
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("need four comma-separated integers")
    return parts


def _n_range(text: str):
    if ":" in text:
        lo, hi = text.split(":")
        return range(int(lo), int(hi) + 1)
    n = int(n_text) if (n_text := text) else 0
    return range(n, n + 1)


def _fraction(text: str) -> Fraction:
    return Fraction(text)


def _load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"config line without '=': {line!r}")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _common_flags(parser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
    parser.add_argument("--out", default=d(None), help="write output to this path")
    parser.add_argument("--digits", type=int, default=d(50))
    parser.add_argument("--seed", type=int, default=d(1))
    parser.add_argument(
        "--threads",
        type=int,
        default=d(int(os.environ.get("POLYREP_THREADS", "1"))),
    )
    parser.add_argument("--config", default=d(None), help="flat key=value defaults file")


def build_parser() -> _Parser:
    parser = _Parser(prog="polyrep", description=__doc__)
    parser.add_argument("--version", action="version", version=f"polyrep {__version__}")
    _common_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    poly = sub.add_parser("poly", help="polygonal-number arithmetic").add_subparsers(
        dest="sub", required=True
    )
    ev = poly.add_parser("eval", parents=[common])
    ev.add_argument("--m", type=int, required=True)
    ev.add_argument("--x", type=int, required=True)

    rep = sub.add_parser("repr", help="representation counts").add_subparsers(
        dest="sub", required=True
    )
    rc = rep.add_parser("count", parents=[common])
    _problem_args(rc)
    rc.add_argument("--list", action="store_true", help="emit the solutions")

    den = sub.add_parser("density", help="local density at one prime", parents=[common])
    _problem_args(den)
    den.add_argument("--p", type=int, required=True)
    den.add_argument(
        "--method",
        choices=("auto", "closed", "dyadic", "divisor", "explicit", "oracle"),
        default="auto",
    )
    den.add_argument("--depth", type=int, help="fixed oracle depth")

    eis = sub.add_parser("eisenstein", help="main-term coefficient", parents=[common])
    _problem_args(eis)
    eis.add_argument("--source", choices=("closed", "oracle"), default="closed")
    eis.add_argument("--extra-primes", type=lambda s: [int(x) for x in s.split(",")], default=[])

    bet = sub.add_parser("betas", help="scaling ratios and their bounds", parents=[common])
    _problem_args(bet)
    bet.add_argument("--p", type=int, required=True)
    bet.add_argument("--c", type=_vec4, help="exponent vector; omit for the bound report")

    sieve = sub.add_parser("sieve", help="divisor weights and sieve sums").add_subparsers(
        dest="sub", required=True
    )
    wt = sieve.add_parser("weights", parents=[common])
    wt.add_argument("--D", type=_fraction, required=True)
    wt.add_argument("--beta", type=_fraction, default=Fraction(1))
    wt.add_argument("--pool", type=lambda s: tuple(int(x) for x in s.split(",")), required=True)
    wt.add_argument("--sign", choices=("+", "-", "both"), default="both")

    sm = sieve.add_parser("sums", parents=[common])
    _problem_args(sm)
    sm.add_argument("--pool", type=lambda s: tuple(int(x) for x in s.split(",")), required=True)
    sm.add_argument("--D", type=_fraction, required=True)
    sm.add_argument("--beta", type=_fraction, default=Fraction(1))
    sm.add_argument("--z0", type=float, default=10.0)
    sm.add_argument("--cap", type=int, default=1, help="exponent cap at ramified primes")
    sm.add_argument("--mode", choices=("enum", "main"), default="enum")

    dr = sieve.add_parser("driver", parents=[common])
    dr.add_argument("--m", type=int, required=True)
    dr.add_argument("--alpha", type=_alpha, required=True)
    dr.add_argument("--n-range", type=_n_range, required=True)
    dr.add_argument("--theta", type=_fraction, default=Fraction(1, 1978))
    dr.add_argument("--s", type=int, default=38)
    dr.add_argument("--z0", type=float, default=10.0)
    dr.add_argument("--z", type=float, default=1000.0)
    dr.add_argument("--bound", type=int, default=3, help="factor bound for witnesses")

    wit = sub.add_parser("witness", help="almost-prime witness sweep", parents=[common])
    wit.add_argument("--m", type=int, required=True)
    wit.add_argument("--alpha", type=_alpha, required=True)
    wit.add_argument("--n-range", type=_n_range, required=True)
    wit.add_argument("--omega-bound", type=int, required=True)
    wit.add_argument("--exclude-below", type=int, default=0, help="forbid odd primes <= this")
    wit.add_argument("--strict-zero", action="store_true")
    wit.add_argument("--distinct", action="store_true", help="count distinct prime factors")

    res = sub.add_parser("residuals", help="count/main-term decomposition table", parents=[common])
    res.add_argument("--m", type=int, required=True)
    res.add_argument("--alpha", type=_alpha, required=True)
    res.add_argument("--n-range", type=_n_range, required=True)
    res.add_argument("--d", type=_vec4, default=(1, 1, 1, 1))

    th = sub.add_parser("threshold", help="exact nonvanishing threshold arithmetic", parents=[common])
    th.add_argument("--m", type=int)
    th.add_argument("--alpha", type=_alpha)
    th.add_argument("--n", type=int, default=0)
    th.add_argument("--epsilon", type=_fraction, default=Fraction(0))
    th.add_argument("--const", type=_fraction, default=Fraction(1))
    th.add_argument("--grid", action="store_true", help="3x3 report over (m, alpha)")

    su = sub.add_parser("suite", help="seeded property sweeps", parents=[common])
    su.add_argument("name", choices=sorted(SUITES))
    su.add_argument("--cases", type=int, default=100)
    su.add_argument("--theta", type=_fraction, default=None)

    lv = sub.add_parser("level", help="level of the scaled diagonal form", parents=[common])
    _problem_args(lv, need_n=False)
    return parser


def _problem_args(p, need_n=True):
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    if need_n:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_vec4, default=(1, 1, 1, 1))


def _emit(args, envelope: ReportEnvelope) -> None:
    if args.format == "csv":
        text = records_to_csv(envelope.records, args.digits)
    else:
        text = envelope.to_json(args.digits) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _instance(args) -> ProblemInstance:
    return ProblemInstance(PolygonalFamily(args.m), args.alpha, args.n)


def _run(args) -> ReportEnvelope:
    cmd = args.command
    if cmd == "poly":
        value = eval_polygonal(args.m, args.x)
        return ReportEnvelope("poly eval", _cfg(args), [{"value": value}])
    if cmd == "repr":
        inst = _instance(args)
        rep = count_representations(inst, args.d, threads=args.threads)
        rec = {"n": args.n, "h": inst.h, "count": rep.count}
        if args.list:
            rec["solutions"] = [list(s) for s in rep.solutions]
        return ReportEnvelope("repr count", _cfg(args), [rec])
    if cmd == "density":
        inst = _instance(args)
        if args.method == "oracle":
            dens = density_oracle(args.p, inst, args.d, k=args.depth)
        else:
            dens = local_density(inst, args.d, args.p, args.method)
        rec = {
            "p": args.p,
            "value": dens.value,
            "method": dens.method,
            "depth": dens.depth,
            "stable": dens.stable,
        }
        env = ReportEnvelope("density", _cfg(args), [rec])
        if dens.value == 0:
            env.summary = {"ok": True, "obstruction": args.p}
        return env
    if cmd == "eisenstein":
        inst = _instance(args)
        coeff = assemble_eisenstein(
            inst, args.d, args.source, args.digits, tuple(args.extra_primes)
        )
        rec = {
            "n": args.n,
            "h": coeff.h,
            "rational_part": coeff.rational_part,
            "value": coeff.value,
            "support": list(coeff.support),
            "obstruction": coeff.obstruction,
        }
        env = ReportEnvelope("eisenstein", _cfg(args), [rec])
        if coeff.obstruction is not None:
            raise ObstructionError(coeff.obstruction, "main-term coefficient vanishes")
        return env
    if cmd == "betas":
        inst = _instance(args)
        if args.c is not None:
            br = beta_ratio(args.p, args.c, inst)
            return ReportEnvelope(
                "betas", _cfg(args), [{"p": args.p, "c": list(args.c), "value": br.value}]
            )
        rep = check_beta_bounds(inst, args.p)
        recs = [
            {"label": e.label, "value": e.value, "bound": e.bound, "ok": e.ok}
            for e in rep.entries
        ]
        env = ReportEnvelope("betas", _cfg(args), recs, {"ok": rep.all_ok})
        return env
    if cmd == "sieve":
        return _run_sieve(args)
    if cmd == "witness":
        family = PolygonalFamily(args.m)
        excl = frozenset(
            p for p in range(3, args.exclude_below + 1) if _is_prime_small(p)
        )
        spec = WitnessSpec(
            args.omega_bound,
            excl,
            allow_zero=not args.strict_zero,
            mode="distinct" if args.distinct else "with-multiplicity",
        )
        flags = witness_coverage(family, args.alpha, args.n_range, [spec], args.threads)[0]
        ns = list(args.n_range)
        misses = [n for n, ok in zip(ns, flags) if not ok]
        frac = sum(flags) / len(flags) if flags else 1.0
        return ReportEnvelope(
            "witness",
            _cfg(args),
            [{"n": n, "witness": bool(okf)} for n, okf in zip(ns, flags)],
            {"coverage": frac, "misses": misses, "ok": frac == 1.0},
        )
    if cmd == "residuals":
        family = PolygonalFamily(args.m)
        ns = list(args.n_range)
        rows = decomposition_residual(
            family, args.alpha, min(ns), max(ns), args.d, args.digits
        )
        recs = [
            {"n": r.n, "h": r.h, "r": r.r, "a_e": r.a_e, "residual": r.residual}
            for r in rows
        ]
        return ReportEnvelope("residuals", _cfg(args), recs)
    if cmd == "threshold":
        if args.grid:
            ms = (5, 11, 15)
            alphas = ((1, 1, 1, 1), (1, 1, 1, 3), (1, 3, 5, 7))
            recs = threshold_grid(ms, alphas, args.epsilon, args.const)
        else:
            if args.m is None or args.alpha is None:
                raise ConfigurationError("threshold needs --m and --alpha (or --grid)")
            recs = [
                threshold_check(args.m, args.alpha.alpha, args.n, args.epsilon, args.const)
            ]
        return ReportEnvelope("threshold", _cfg(args), recs)
    if cmd == "suite":
        fn = SUITES[args.name]
        if args.name == "theorem-gate" and args.theta is not None:
            from .suites import theorem_gate_suite

            records, summary = theorem_gate_suite(args.theta)
        else:
            records, summary = fn(args.cases, args.seed)
        env = ReportEnvelope(f"suite {args.name}", _cfg(args), records, summary)
        return env
    if cmd == "level":
        family = PolygonalFamily(args.m)
        val = level_of_form(family, args.alpha, args.d)
        coset = build_coset(family, args.alpha, args.d)
        return ReportEnvelope(
            "level",
            _cfg(args),
            [{"level": val, "gram_diag": list(coset.gram_diag)}],
        )
    raise ConfigurationError(f"unknown command {cmd!r}")


def _run_sieve(args) -> ReportEnvelope:
    if args.sub == "weights":
        signs = ("+", "-") if args.sign == "both" else (args.sign,)
        recs = []
        for d in SieveWeightTable(args.D, args.beta, "+", args.pool).support():
            rec = {"d": d}
            for s in signs:
                rec[f"lambda{s}"] = rosser_lambda(d, args.D, args.beta, s)
            rec["Lambda-"] = capital_lambda_minus(d, args.D, args.beta)
            recs.append(rec)
        return ReportEnvelope("sieve weights", _cfg(args), recs)
    if args.sub == "sums":
        inst = _instance(args)
        caps = {p: args.cap for p in _ramified(inst)}
        m_minus = beta_weighted_sums(inst, args.pool, args.D, args.beta, -1)
        m_plus = beta_weighted_sums(inst, args.pool, args.D, args.beta, +1)
        w = main_term_W(inst, args.z0, caps)
        lower = weighted_sieve_sum(
            inst, caps=caps, pool=args.pool, D=args.D, beta=args.beta, mode=args.mode, sign=-1
        )
        upper = weighted_sieve_sum(
            inst, caps=caps, pool=args.pool, D=args.D, beta=args.beta, mode=args.mode, sign=+1
        )
        rec = {
            "M_minus": m_minus,
            "M_plus": m_plus,
            "W": w,
            "weighted_lower": lower,
            "weighted_upper": upper,
        }
        return ReportEnvelope("sieve sums", _cfg(args), [rec])
    if args.sub == "driver":
        family = PolygonalFamily(args.m)
        cfg = SieveConfig(
            theta=args.theta, s=args.s, z0=args.z0, z=args.z, factor_bound=args.bound
        )
        report = theorem_driver(family, args.alpha, args.n_range, cfg, args.threads)
        rec = {
            "theta": report.theta,
            "s_check": {k: v for k, v in report.s_check.items()},
            "kappa": report.kappa,
            "z0_policy": report.z0_policy,
            "positivity": {k: v for k, v in report.positivity.items()},
            "coverage_fraction": report.coverage_fraction,
            "misses": [n for n, okf in report.coverage if not okf],
        }
        env = ReportEnvelope(
            "sieve driver",
            _cfg(args),
            [rec],
            {"ok": report.gates_ok and report.coverage_fraction == 1.0},
        )
        return env
    raise ConfigurationError(f"unknown sieve subcommand {args.sub!r}")


def _ramified(inst: ProblemInstance):
    from .sieve import ramified_primes

    return ramified_primes(inst.alpha)


def _is_prime_small(p: int) -> bool:
    from .arith import is_prime

    return is_prime(p)


def _cfg(args) -> dict:
    skip = {"out", "format"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        if isinstance(v, CoefficientVector):
            v = list(v.alpha)
        elif isinstance(v, range):
            v = [v.start, v.stop - 1]
        elif isinstance(v, Fraction):
            pass
        elif not isinstance(v, (int, float, str, bool, list, tuple)):
            v = str(v)
        out[k] = v
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if "--config" in argv:
        # config files supply defaults; explicit flags win by coming later
        idx = argv.index("--config")
        path = argv[idx + 1]
        cfg = _load_config_file(path)
        extra = []
        for k, v in cfg.items():
            extra.extend([f"--{k.replace('_', '-')}", v])
        argv = argv[: idx + 2] + extra + argv[idx + 2 :]
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        t0 = time.time()
        env = _run(args).finish(t0)
        _emit(args, env)
        if args.command in ("suite", "witness") or (
            args.command == "sieve" and getattr(args, "sub", "") == "driver"
        ):
            return 0 if env.ok else OBSTRUCTION_EXIT
        return 0
    except ObstructionError as exc:
        print(f"polyrep: obstruction: {exc}", file=sys.stderr)
        return OBSTRUCTION_EXIT
    except BudgetExceededError as exc:
        print(f"polyrep: budget: {exc}", file=sys.stderr)
        return BUDGET_EXIT
    except (ConfigurationError, DispatchError, ValueError) as exc:
        print(f"polyrep: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except PolyrepError as exc:
        print(f"polyrep: error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
