"""Command-line front end.

Subcommands: ``fit`` (one submodel), ``select`` (full cross-validated
subset search on a CSV), ``simulate`` (Monte Carlo experiments, preset or
free-form), ``estimate-tau`` and ``diagnose``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation failure.
Human-readable errors go to stderr as a single line; with ``--format
json`` a machine-readable error object is printed instead.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import dataio
from .estimators import ModelSubset, PenaltyConfig, SolverOptions
from .estimators import (
    fit_adaptive_lasso_expectile,
    fit_expectile,
    fit_least_squares,
    fit_quantile,
)
from .exceptions import ComputationError, DataError, ExpselError
from .selection import (
    EnumConfig,
    SelectConfig,
    make_split,
    select_model,
    select_model_penalized,
)
from .simulation import (
    PRESETS,
    ErrorDistribution,
    SimConfig,
    preset_config,
    run_experiment,
)
from .tau import tau_two_step

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3

_METHOD_ALIASES = {"expectile": "expectile", "ls": "least_squares",
                   "least_squares": "least_squares", "quantile": "quantile"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _parse_indices(text):
    if not text:
        return ()
    return tuple(int(tok) for tok in text.replace("+", ",").split(",") if tok.strip())


def _parse_tau(text):
    return "auto" if text == "auto" else float(text)


def _add_input_args(p):
    p.add_argument("--input", required=True, help="CSV file to read")
    p.add_argument("--response", required=True,
                   help="response column (name or 1-based position)")
    p.add_argument("--no-header", action="store_true",
                   help="file has no header row; columns are named x1..xk")
    p.add_argument("--delimiter", default=",", help="field delimiter (default ,)")
    p.add_argument("--columns", default=None,
                   help="comma-separated predictor columns to keep")
    p.add_argument("--subsample", type=int, default=None,
                   help="keep this many randomly chosen rows")


def _add_output_args(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, help="write the report here "
                   "instead of stdout")
    p.add_argument("--quiet", action="store_true", help="suppress progress logs")


def build_parser():
    parser = _Parser(prog="expsel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a single submodel and print coefficients")
    _add_input_args(p)
    p.add_argument("--subset", default=None,
                   help="1-based predictor indices, e.g. 1,3,4 (default: all)")
    p.add_argument("--tau", default="0.5", help="asymmetry level, or 'auto'")
    p.add_argument("--method", choices=sorted(_METHOD_ALIASES), default="expectile")
    p.add_argument("--penalized", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--no-intercept", action="store_true")
    _add_output_args(p)

    p = sub.add_parser("select", help="cross-validated best-subset search")
    _add_input_args(p)
    p.add_argument("--s", type=float, default=0.8, help="validation fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", default="auto", help="asymmetry level, or 'auto'")
    p.add_argument("--method", choices=sorted(_METHOD_ALIASES), default="expectile")
    p.add_argument("--penalized", action="store_true",
                   help="use adaptively weighted l1 fits and their scores")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--per-subset-pilot", action="store_true",
                   help="recompute adaptive weights from each subset's own pilot")
    p.add_argument("--max-p", type=int, default=20,
                   help="exhaustive enumeration cap")
    p.add_argument("--force-in", default="", help="columns every model must keep")
    p.add_argument("--force-out", default="", help="columns no model may use")
    p.add_argument("--candidates", default=None,
                   help="file with one candidate subset per line (e.g. 1,3,4)")
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--no-standardize", action="store_true",
                   help="penalize on the raw column scales")
    p.add_argument("--score-expectile", action="store_true",
                   help="score every method under the asymmetric squared loss")
    _add_output_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo benchmark of the pipeline")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--beta", default=None, help="comma-separated true coefficients")
    p.add_argument("--error", choices=[e.value for e in ErrorDistribution],
                   default="std_normal")
    p.add_argument("--s", type=float, default=None)
    p.add_argument("--methods", default="expectile",
                   help="comma-separated: expectile,ls,quantile")
    p.add_argument("--penalized", dest="penalized", action="store_true", default=None)
    p.add_argument("--unpenalized", dest="penalized", action="store_false")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", default="auto")
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--covariate-law", choices=("normal", "uniform"), default="normal")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--max-p", type=int, default=20)
    p.add_argument("--raw-csv", default=None,
                   help="also write per-replication records to this CSV")
    p.add_argument("--time", action="store_true",
                   help="report wall-clock time on stderr")
    _add_output_args(p)

    p = sub.add_parser("estimate-tau", help="two-step asymmetry-level estimate")
    _add_input_args(p)
    p.add_argument("--subset", default=None)
    p.add_argument("--no-intercept", action="store_true")
    _add_output_args(p)

    p = sub.add_parser("diagnose", help="design conditioning diagnostics")
    _add_input_args(p)
    p.add_argument("--s", type=float, default=0.9)
    _add_output_args(p)

    return parser


def _load(args):
    columns = None
    if args.columns:
        columns = [c.strip() for c in args.columns.split(",") if c.strip()]
    return dataio.load_csv(
        args.input, args.response, no_header=args.no_header,
        delimiter=args.delimiter, columns=columns,
        subsample=args.subsample, seed=getattr(args, "seed", 0),
    )


def _emit(args, report):
    text = dataio.render_report(report, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _resolve_tau(args, data, subset, intercept, quiet):
    tau = _parse_tau(args.tau)
    if tau == "auto":
        estimate = tau_two_step(data, subset, intercept=intercept)
        if not quiet:
            print(f"estimated asymmetry level: {estimate.tau:.4f} "
                  f"(initial {estimate.tau_initial:.4f})", file=sys.stderr)
        return estimate.tau, estimate
    return tau, None


def _cmd_fit(args):
    data = _load(args)
    indices = _parse_indices(args.subset) if args.subset else tuple(range(1, data.p + 1))
    subset = ModelSubset(tuple(sorted(set(indices))), data.p)
    intercept = not args.no_intercept
    tau, _ = _resolve_tau(args, data, subset, intercept, args.quiet)
    method = _METHOD_ALIASES[args.method]
    if args.penalized:
        penalty = PenaltyConfig(lam=args.lam, gamma=args.gamma)
        fit = fit_adaptive_lasso_expectile(
            data, subset, tau if method != "least_squares" else 0.5,
            penalty, intercept=intercept,
        )
    elif method == "expectile":
        fit = fit_expectile(data, subset, tau, intercept=intercept)
    elif method == "least_squares":
        fit = fit_least_squares(data, subset, intercept=intercept)
    else:
        fit = fit_quantile(data, subset, 0.5, intercept=intercept)

    names = data.column_names or tuple(f"x{i}" for i in range(1, data.p + 1))
    doc = {
        "schema_version": dataio.SCHEMA_VERSION,
        "kind": "fit",
        "method": fit.method,
        "tau": float(fit.tau),
        "converged": fit.converged,
        "iterations": fit.iterations,
        "objective": float(fit.objective),
        "intercept": None if fit.intercept is None else float(fit.intercept),
        "coefficients": {
            names[i - 1]: float(b) for i, b in zip(subset.indices, fit.beta)
        },
    }
    if args.format == "json":
        _emit(args, doc)
    else:
        if fit.intercept is not None and not args.quiet:
            print(f"intercept: {fit.intercept!r}", file=sys.stderr)
        rows = "\n".join(f"{k},{v!r}" for k, v in doc["coefficients"].items())
        text = "column,coefficient\n" + rows + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK


def _cmd_select(args):
    data = _load(args)
    intercept = not args.no_intercept
    tau, _ = _resolve_tau(args, data, None, intercept, args.quiet)
    candidates = None
    if args.candidates:
        with open(args.candidates, encoding="utf-8") as handle:
            candidates = tuple(
                _parse_indices(line) for line in handle if line.strip()
            )
    config = SelectConfig(
        enum=EnumConfig(
            max_exhaustive_p=args.max_p,
            force_in=_parse_indices(args.force_in),
            force_out=_parse_indices(args.force_out),
            candidates=candidates,
        ),
        intercept=intercept,
        score_loss="expectile" if args.score_expectile else "per-method",
    )
    split = make_split(data.n, args.s, args.seed)
    method = _METHOD_ALIASES[args.method]
    if args.penalized:
        penalty = PenaltyConfig(lam=args.lam, gamma=args.gamma, nu=args.nu,
                                standardize=not args.no_standardize)
        report = select_model_penalized(
            data, split, tau, method, penalty, config,
            shared_pilot=not args.per_subset_pilot,
        )
    else:
        report = select_model(data, split, tau, method, config)
    if not args.quiet:
        names = data.column_names or ()
        kept = ", ".join(names[i - 1] if names else str(i)
                         for i in report.chosen.indices) or "(intercept only)"
        print(f"chosen model: {kept}", file=sys.stderr)
    _emit(args, report)
    return EXIT_OK


def _cmd_simulate(args):
    overrides = {
        "error": args.error,
        "methods": tuple(_METHOD_ALIASES[m.strip()]
                         for m in args.methods.split(",") if m.strip()),
        "master_seed": args.seed,
        "tau": _parse_tau(args.tau),
        "covariate_law": args.covariate_law,
        "max_exhaustive_p": args.max_p,
    }
    if args.zero_noise:
        overrides["zero_noise"] = True
    if args.reps is not None:
        overrides["replications"] = args.reps
    if args.penalized is not None:
        overrides["penalized"] = args.penalized
    if args.lam is not None or args.gamma != 1.0:
        overrides["penalty"] = PenaltyConfig(lam=args.lam, gamma=args.gamma)

    if args.preset:
        config = preset_config(args.preset, s=args.s, **overrides)
    else:
        missing = [name for name in ("n", "p") if getattr(args, name) is None]
        if missing:
            raise _UsageError(
                f"simulate needs --preset or --n/--p/--beta (missing {missing})"
            )
        beta = (tuple(float(b) for b in args.beta.split(","))
                if args.beta else (2.0, 0.0) + (0.0,) * (args.p - 2))
        config = SimConfig(n=args.n, p=args.p, beta_star=beta,
                           s=args.s if args.s is not None else 0.9, **overrides)

    started = time.perf_counter()
    summary = run_experiment(config)
    elapsed = time.perf_counter() - started
    if args.time:
        print(f"wall clock: {elapsed:.2f} s", file=sys.stderr)
    if not args.quiet:
        for name, m in summary.methods.items():
            print(f"{name}: tpr={m.tpr:.3f} tnr={m.tnr:.3f} "
                  f"mse={m.mse:.4g} coef_mse={m.coef_mse:.4g} "
                  f"({m.n_ok} ok, {m.n_failed} failed)", file=sys.stderr)
    if args.raw_csv:
        dataio.write_report(summary, "csv", args.raw_csv)
    _emit(args, summary)
    return EXIT_OK


def _cmd_estimate_tau(args):
    data = _load(args)
    subset = None
    if args.subset:
        subset = ModelSubset(tuple(sorted(set(_parse_indices(args.subset)))), data.p)
    estimate = tau_two_step(data, subset, intercept=not args.no_intercept)
    _emit(args, estimate)
    return EXIT_OK


def _cmd_diagnose(args):
    data = _load(args)
    _emit(args, dataio.diagnose(data, args.s))
    return EXIT_OK


_COMMANDS = {
    "fit": _cmd_fit,
    "select": _cmd_select,
    "simulate": _cmd_simulate,
    "estimate-tau": _cmd_estimate_tau,
    "diagnose": _cmd_diagnose,
}


def _report_error(args, code, kind, message):
    if args is not None and getattr(args, "format", "json") == "json":
        print(json.dumps({"error": message, "kind": kind, "exit_code": code}),
              file=sys.stderr)
    else:
        print(f"expsel: error: {message}", file=sys.stderr)
    return code


def cli_main(argv=None):
    """Entry point returning an exit code (no sys.exit)."""
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        print(f"expsel: usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        return _report_error(args, EXIT_DATA, "data", str(exc))
    except ComputationError as exc:
        return _report_error(args, EXIT_COMPUTE, "computation", str(exc))
    except ExpselError as exc:
        return _report_error(args, EXIT_COMPUTE, "computation", str(exc))
    except ValueError as exc:
        print(f"expsel: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # keep the exit-code contract exhaustive
        return _report_error(args, EXIT_COMPUTE, "internal",
                             f"{type(exc).__name__}: {exc}")


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
