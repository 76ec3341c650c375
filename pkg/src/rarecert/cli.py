"""Command-line interface: ``rarecert ci | coverage | reproduce``."""

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from . import ci_standard as cs
from . import ci_targeted as ct
from .errors import AssumptionError, PreconditionError, RarecertError
from .intervals import Method
from .mc import ExperimentGrid, coverage

ENV_BE_C = "RARECERT_BE_C"

EXPERIMENT_SETTINGS = (5, 10, 30, 50, 100)
EXPERIMENT_P = 1e-6

_TABLE_METHODS = {
    "standard": (Method.CLT, Method.WILSON, Method.EXACT, Method.CHERNOFF, Method.BE),
    "targeted": (Method.CLT, Method.WILSON, Method.EXACT, Method.CHERNOFF),
}

_TARGETS = {
    "table1": ("standard", "table"),
    "table2": ("targeted", "table"),
    "fig2": ("standard", "figure"),
    "fig3": ("targeted", "figure"),
}

COVERAGE_COLUMNS = ["regime", "method", "alpha", "p", "np_or_n0", "reps", "coverage", "se",
                    "avg_lower", "avg_upper", "status"]
FIGURE_COLUMNS = ["regime", "method", "alpha", "p", "np_or_n0", "reps", "avg_lower", "avg_upper"]


class NumericFailure(Exception):
    """Raised inside a command to request exit status 1."""


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    return str(x)


def _json_value(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def emit(rows, columns, fmt_name, out):
    if fmt_name == "json":
        json.dump([{c: _json_value(r.get(c)) for c in columns} for r in rows], out, indent=2)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in columns])


def be_constant(args=None):
    """``--be-c`` if given, else ``$RARECERT_BE_C``, else the default 0.4748."""
    if args is not None and getattr(args, "be_c", None) is not None:
        return args.be_c
    raw = os.environ.get(ENV_BE_C)
    if raw is None or raw.strip() == "":
        return cs.BE_C
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{ENV_BE_C} must be a decimal number, got {raw!r}")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"{ENV_BE_C} must be positive, got {raw!r}")
    return value


def parse_methods(text):
    if text.strip().lower() == "all":
        return list(Method)
    try:
        return [Method.from_name(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_alpha(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def parse_settings(text):
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"settings must be a comma list of numbers, got {text!r}")
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("settings must be positive")
    return [int(v) if v.is_integer() else v for v in values]


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


# ---------------------------------------------------------------------------
# ci
# ---------------------------------------------------------------------------


def _standard_interval(method, s, alpha, C):
    if method is Method.CLT:
        return cs.clt_interval(s, alpha)
    if method is Method.WILSON:
        return cs.wilson_interval(s, alpha)
    if method is Method.EXACT:
        return cs.exact_interval(s, alpha)
    if method is Method.CHERNOFF:
        return cs.chernoff_interval(s, alpha)
    cfg = cs.BEConfig.default(alpha, C)
    if method is Method.BE:
        return cs.be_region_interval(s, alpha, cfg)
    return cs.be_relaxed_upper(s, alpha, cfg)


def _targeted_interval(method, s, alpha, C):
    cfg = ct.BEConfigTargeted(16 * C)
    return {
        Method.CLT: lambda: ct.clt_interval_t(s, alpha),
        Method.WILSON: lambda: ct.wilson_interval_t(s, alpha),
        Method.EXACT: lambda: ct.exact_interval_t(s, alpha),
        Method.CHERNOFF: lambda: ct.chernoff_interval_t(s, alpha),
        Method.BE: lambda: ct.be_region_interval_t(s, alpha, cfg),
        Method.BE_RELAXED: lambda: ct.be_relaxed_interval_t(s, alpha, cfg),
    }[method]()


def cmd_ci(args, out):
    C = be_constant(args)
    rows = []
    if args.regime == "standard":
        if args.successes > args.n:
            raise argparse.ArgumentTypeError("--successes cannot exceed --n")
        summary = cs.TrialSummary(args.n, args.successes)
        compute, keys = _standard_interval, {"n": args.n, "k": args.successes}
        columns = ["regime", "method", "alpha", "n", "k"]
    else:
        if args.trials < args.n0:
            raise argparse.ArgumentTypeError("--trials cannot be smaller than --n0")
        summary = ct.StoppedSummary(args.n0, args.trials)
        compute, keys = _targeted_interval, {"n0": args.n0, "N": args.trials}
        columns = ["regime", "method", "alpha", "n0", "N"]
    columns += ["lower", "upper", "clamped", "disconnected", "status", "reason"]
    for method in args.method:
        row = {"regime": args.regime, "method": method.value, "alpha": args.alpha, **keys}
        try:
            iv = compute(method, summary, args.alpha, C)
        except (PreconditionError, AssumptionError) as exc:
            row.update(status="not-applicable", reason=str(exc))
        except (ArithmeticError, RarecertError) as exc:
            raise NumericFailure(f"{method.value} failed for {summary}: {exc}") from exc
        else:
            row.update(lower=iv.lower, upper=iv.upper, clamped=iv.clamped,
                       disconnected=iv.disconnected, status="ok", reason="")
        rows.append(row)
    emit(rows, columns, args.format, out)


# ---------------------------------------------------------------------------
# coverage / reproduce
# ---------------------------------------------------------------------------


def _run_grid(regime, p, settings, reps, alpha, seed, methods, workers, C):
    grid = ExperimentGrid(regime, p, tuple(settings), reps, alpha, seed)
    try:
        return coverage(grid, methods, workers=workers, be_c=C)
    except (ArithmeticError, ValueError) as exc:
        raise NumericFailure(str(exc)) from exc


def _report_row(r):
    return {
        "regime": r.regime, "method": r.method.value, "alpha": r.alpha, "p": r.p,
        "np_or_n0": r.setting, "reps": r.reps,
        "coverage": r.coverage if r.applicable else None,
        "se": r.se if r.applicable else None,
        "avg_lower": r.avg_lower if r.applicable else None,
        "avg_upper": r.avg_upper if r.applicable else None,
        "status": r.status if r.applicable else f"{r.status}: {r.reason}",
    }


def cmd_coverage(args, out):
    C = be_constant(args)
    reports = _run_grid(args.regime, args.p, args.settings, args.reps, args.alpha, args.seed,
                        args.methods, args.workers, C)
    emit([_report_row(r) for r in reports], COVERAGE_COLUMNS, args.format, out)


def run_target(target, reps, seed, alpha=0.05, workers=1, C=None):
    """Rows and column names for one reproduction target."""
    C = cs.BE_C if C is None else C
    regime, kind = _TARGETS[target]
    methods = _TABLE_METHODS[regime]
    reports = _run_grid(regime, EXPERIMENT_P, EXPERIMENT_SETTINGS, reps, alpha, seed, methods, workers, C)
    if kind == "figure":
        rows = [{k: v for k, v in _report_row(r).items() if k in FIGURE_COLUMNS} for r in reports]
        return rows, FIGURE_COLUMNS
    key = "np" if regime == "standard" else "n0"
    rows = []
    for setting in EXPERIMENT_SETTINGS:
        row = {key: setting}
        for r in reports:
            if r.setting == setting:
                row[r.method.value] = r.coverage
        rows.append(row)
    return rows, [key] + [m.value for m in methods]


def metadata(target, reps, seed, alpha, C):
    cfg = cs.BEConfig.default(alpha, C)
    regime, _ = _TARGETS[target]
    return {
        "target": target,
        "regime": regime,
        "p": EXPERIMENT_P,
        "settings": list(EXPERIMENT_SETTINGS),
        "methods": [m.value for m in _TABLE_METHODS[regime]],
        "alpha": alpha,
        "seed": seed,
        "reps": reps,
        "constants": {
            "C": C,
            "C_prime": 16 * C,
            "u": cfg.u,
            "one_minus_u": cfg.one_minus_u,
            "log_one_minus_u": cfg.log_one_minus_u,
            "z_star": cfg.z_star,
            "N0": cfg.n0,
            "be_c_env_override": os.environ.get(ENV_BE_C),
        },
        "version": __version__,
    }


def cmd_reproduce(args, out):
    C = be_constant(args)
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise NumericFailure(f"cannot create output directory {outdir}: {exc}") from exc
    rows, columns = run_target(args.target, args.reps, args.seed, args.alpha, args.workers, C)
    buf = io.StringIO()
    emit(rows, columns, "csv", buf)
    csv_path = outdir / f"{args.target}.csv"
    meta_path = outdir / f"{args.target}.meta.json"
    try:
        csv_path.write_text(buf.getvalue(), encoding="utf-8")
        meta_path.write_text(json.dumps(metadata(args.target, args.reps, args.seed, args.alpha, C),
                                        indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise NumericFailure(f"cannot write to {outdir}: {exc}") from exc
    print(f"wrote {csv_path} and {meta_path}", file=out)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rarecert", description="Confidence intervals for rare-event probabilities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--alpha", type=parse_alpha, default=0.05)
    shared.add_argument("--format", choices=("json", "csv"), default="json")

    ci = sub.add_parser("ci", help="intervals for observed data")
    ci_sub = ci.add_subparsers(dest="regime", required=True)
    ci_shared = argparse.ArgumentParser(add_help=False, parents=[shared])
    ci_shared.add_argument("--method", type=parse_methods, default=list(Method),
                           help="comma list of clt,wilson,exact,chernoff,be,be-relaxed or 'all'")
    ci_shared.add_argument("--be-c", type=float, default=None,
                           help=f"Berry-Esseen constant (default {cs.BE_C}, or ${ENV_BE_C})")
    std = ci_sub.add_parser("standard", parents=[ci_shared], help="fixed number of trials")
    std.add_argument("--n", type=_positive_int, required=True)
    std.add_argument("--successes", type=_nonnegative_int, required=True)
    tgt = ci_sub.add_parser("targeted", parents=[ci_shared], help="stop at n0 successes")
    tgt.add_argument("--n0", type=_positive_int, required=True)
    tgt.add_argument("--trials", type=_positive_int, required=True)

    cov = sub.add_parser("coverage", parents=[shared], help="Monte Carlo coverage")
    cov.add_argument("--regime", choices=("standard", "targeted"), required=True)
    cov.add_argument("--p", type=float, required=True)
    cov.add_argument("--settings", type=parse_settings, required=True,
                     help="n*p multiples (standard) or n0 values (targeted)")
    cov.add_argument("--reps", type=_positive_int, default=1000)
    cov.add_argument("--seed", type=_nonnegative_int, default=42)
    cov.add_argument("--methods", type=parse_methods, default=list(Method))
    cov.add_argument("--workers", type=_positive_int, default=1)
    cov.add_argument("--be-c", type=float, default=None)

    rep = sub.add_parser("reproduce", help="regenerate the experiment tables and figure data")
    rep.add_argument("target", choices=sorted(_TARGETS))
    rep.add_argument("--out", required=True)
    rep.add_argument("--reps", type=_positive_int, default=1000)
    rep.add_argument("--seed", type=_nonnegative_int, default=42)
    rep.add_argument("--alpha", type=parse_alpha, default=0.05)
    rep.add_argument("--workers", type=_positive_int, default=1)
    rep.add_argument("--be-c", type=float, default=None)
    return parser


_COMMANDS = {"ci": cmd_ci, "coverage": cmd_coverage, "reproduce": cmd_reproduce}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "coverage" and not 0.0 < args.p < 1.0:
        parser.error(f"--p must lie in (0, 1), got {args.p}")
    if getattr(args, "be_c", None) is not None and not args.be_c > 0:
        parser.error("--be-c must be positive")
    try:
        _COMMANDS[args.command](args, out)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except NumericFailure as exc:
        print(f"rarecert: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
