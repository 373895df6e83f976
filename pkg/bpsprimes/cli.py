"""
cli.py – Command-line driver: ``bpsprimes <subcommand> ...``.

Subcommands
-----------
count    prime counts in Beatty / Piatetski-Shapiro intersections
verify   identity suites (exit 4 when any identity fails)
expsum   exponential sums against their bound shapes
dioph    continued fractions, approximations, type estimates, independence
report   merge count report files into one CSV/JSON table
run      execute a job file (JSON or key = value)

Exit codes: 0 ok, 2 usage or parse error, 3 resource limit, 4 identity failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from bpsprimes.config import ExperimentConfig, Job, resolve_threads
from bpsprimes.errors import IdentityCheckError, PreconditionError, ResourceLimitError, SpecParseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_IDENTITY = 4


def _say(args: argparse.Namespace, message: str) -> None:
    # tables on stdout must stay machine-readable
    stream = sys.stderr if getattr(args, "output", "-") == "-" else sys.stdout
    print(message, file=stream)


def _job_from_args(kind: str, args: argparse.Namespace, keys: tuple[str, ...]) -> Job:
    params = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None or value is False:
            continue
        params[key] = "true" if value is True else value
    return Job(kind, params)


def _emit(args: argparse.Namespace, results) -> bool:
    from bpsprimes.emit import job_rows, write_rows  # noqa: PLC0415

    if len(results) == 1:
        rows = results[0].rows
        columns = None
        if results[0].kind == "count":
            from bpsprimes.counting import CSV_COLUMNS  # noqa: PLC0415

            columns = CSV_COLUMNS
    else:
        rows, columns = job_rows(results), ("job", "kind")
    write_rows(rows, args.output, args.format, columns)
    ok = True
    for res in results:
        for message in res.messages:
            _say(args, message)
        ok &= res.ok
    if args.output != "-":
        print(f"Done. {sum(len(r.rows) for r in results)} rows written to: {args.output}")
    return ok


def _run_jobs(args: argparse.Namespace, jobs: list[Job], seed: int = 0, timing: bool = True):
    from bpsprimes.pipeline import ExperimentPipeline  # noqa: PLC0415

    pipeline = ExperimentPipeline(threads=resolve_threads(args.threads), seed=seed, timing=timing)
    return pipeline.run(jobs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

COUNT_KEYS = ("alpha", "beta", "c", "x", "method", "strict")


def cmd_count(args: argparse.Namespace) -> int:
    if args.both_paths:
        args.method = "both"
    job = _job_from_args("count", args, COUNT_KEYS)
    _emit(args, _run_jobs(args, [job], timing=not args.no_timing))
    return EXIT_OK


VERIFY_KEYS = ("suite", "H", "z", "k", "nmax", "samples", "mmax", "x", "alpha", "beta", "c")


def cmd_verify(args: argparse.Namespace) -> int:
    job = _job_from_args("verify", args, VERIFY_KEYS)
    results = _run_jobs(args, [job], seed=args.seed)
    ok = _emit(args, results)
    _say(args, f"verify {args.suite}: {'all identities hold' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_IDENTITY


EXPSUM_KEYS = (
    "mode", "phase", "x", "lo", "order", "a", "C", "coef", "exponent",
    "kind", "K", "L", "a_coeffs", "b_coeffs", "alpha", "N", "h", "M", "tau", "gamma",
)


def cmd_expsum(args: argparse.Namespace) -> int:
    if args.vdc:
        args.mode = "vdc"
    _emit(args, _run_jobs(args, [_job_from_args("expsum", args, EXPSUM_KEYS)]))
    return EXIT_OK


DIOPH_KEYS = ("mode", "alpha", "terms", "Qmax", "N", "t", "omega", "B", "h")


def cmd_dioph(args: argparse.Namespace) -> int:
    _emit(args, _run_jobs(args, [_job_from_args("dioph", args, DIOPH_KEYS)]))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    from bpsprimes.emit import merge_reports  # noqa: PLC0415

    reports = merge_reports(args.inputs, args.output, args.format)
    for r in reports:
        _say(args, f"x={r.x} xi={r.xi} c={r.c or '-'} observed={r.observed} "
                   f"predicted={r.predicted:.1f} rel_err={r.relative_error:.4f}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    from bpsprimes.pipeline import ExperimentPipeline  # noqa: PLC0415

    config = ExperimentConfig.load(args.config)
    if args.threads is not None:
        config.threads = args.threads
    config.threads = resolve_threads(config.threads)
    if args.output is not None:
        config.output = args.output
    if args.format is not None:
        config.format = args.format
    args.output, args.format = config.output, config.format
    _say(args, f"Running {len(config.jobs)} job(s) from '{args.config}' with {config.threads} worker(s)")
    results = ExperimentPipeline.from_config(config).run(config.jobs)
    ok = _emit(args, results)
    return EXIT_OK if ok else EXIT_IDENTITY


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_output(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    p.add_argument("-o", "--output", default="-" if defaults else None, metavar="PATH",
                   help="Output file; '-' writes the table to stdout. Default: -.")
    p.add_argument("--format", choices=("csv", "json"), default="csv" if defaults else None,
                   help="Table format. Default: csv.")
    p.add_argument("--threads", type=int, default=None, metavar="N",
                   help="Worker processes (BPS_THREADS overrides). Default: 1.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bpsprimes",
        description="Primes in Beatty and Piatetski-Shapiro sequences: counts, identities and exponential sums.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="Log progress (-v INFO, -vv DEBUG).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="Count primes in sequence intersections.")
    p.add_argument("--alpha", action="append", metavar="SURD", help="Beatty modulus, e.g. 'sqrt(2)'. Repeatable.")
    p.add_argument("--beta", action="append", metavar="SURD", help="Beatty offset matching each --alpha. Default: 0.")
    p.add_argument("--c", metavar="EXP", help="Piatetski-Shapiro exponent, e.g. '13/12'.")
    p.add_argument("--x", action="append", required=True, metavar="LIMIT",
                   help="Count limit (e.g. 1e6); repeat or comma-separate for a series.")
    p.add_argument("--method", default="auto",
                   choices=("auto", "enumerate-ps", "enumerate-beatty", "sieve-filter", "both"))
    p.add_argument("--both-paths", action="store_true", help="Run enumeration and sieve paths and require equality.")
    p.add_argument("--strict", action="store_true", help="Reject c outside (1, 12/11) instead of warning.")
    p.add_argument("--no-timing", action="store_true", help="Write 0 in the ms column (reproducible output).")
    _add_output(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify", help="Run identity suites.")
    p.add_argument("--suite", default="all",
                   choices=("all", "psi", "heath-brown", "vaaler", "decomposition", "two-path"))
    p.add_argument("--H", metavar="LIST", help="Vaaler degrees, e.g. 4,16,64.")
    p.add_argument("--z", metavar="Z")
    p.add_argument("--k", metavar="K")
    p.add_argument("--nmax", metavar="N")
    p.add_argument("--samples", metavar="N", help="Random samples (psi, heath-brown).")
    p.add_argument("--mmax", metavar="M", help="Largest sampled m for the psi suite.")
    p.add_argument("--x", metavar="LIST", help="Limits for decomposition / two-path suites.")
    p.add_argument("--alpha", action="append", metavar="SURD")
    p.add_argument("--beta", action="append", metavar="SURD")
    p.add_argument("--c", metavar="EXP")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expsum", help="Exponential sums against bound envelopes.")
    p.add_argument("--mode", default="lambda",
                   choices=("lambda", "max", "vdc", "type", "davenport", "finite-type", "q-select"))
    p.add_argument("--vdc", action="store_true", help="Shortcut for --mode vdc.")
    p.add_argument("--phase", metavar="SPEC", help="e.g. 'h=1,gamma=12/13,m1=sqrt(2)'.")
    p.add_argument("--x", metavar="X")
    p.add_argument("--lo", metavar="LO")
    p.add_argument("--order", metavar="LIST", help="Derivative test order(s): 2, 3 or 2,3.")
    p.add_argument("--a", metavar="LIST", help="Dyadic start(s) a for --vdc.")
    p.add_argument("--C", metavar="BOUND", help="Ratio bound for --vdc. Default: 10.")
    p.add_argument("--coef", metavar="COEF", help="Monomial family coef*n^exponent for --vdc.")
    p.add_argument("--exponent", metavar="EXP")
    p.add_argument("--kind", choices=("I", "II"))
    p.add_argument("--K", metavar="K")
    p.add_argument("--L", metavar="L")
    p.add_argument("--a-coeffs", dest="a_coeffs", choices=("one", "log", "mu"))
    p.add_argument("--b-coeffs", dest="b_coeffs", choices=("one", "log", "mu"))
    p.add_argument("--alpha", metavar="SURD")
    p.add_argument("--N", metavar="N")
    p.add_argument("--h", metavar="H")
    p.add_argument("--M", metavar="M")
    p.add_argument("--tau", metavar="TAU")
    p.add_argument("--gamma", metavar="GAMMA")
    _add_output(p)
    p.set_defaults(func=cmd_expsum)

    p = sub.add_parser("dioph", help="Continued fractions and Diophantine probes.")
    p.add_argument("mode", choices=("cf", "approx", "type", "indep", "combined"))
    p.add_argument("--alpha", metavar="SURD")
    p.add_argument("--terms", metavar="K")
    p.add_argument("--Qmax", metavar="Q")
    p.add_argument("--N", metavar="N")
    p.add_argument("--t", metavar="LIST", help="Exponent grid, e.g. 1.0,1.5.")
    p.add_argument("--omega", action="append", metavar="SURD")
    p.add_argument("--B", metavar="B")
    p.add_argument("--h", metavar="LIST", help="Coefficients for 'combined', e.g. 1,1.")
    _add_output(p)
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("report", help="Merge count report files.")
    p.add_argument("inputs", nargs="+", metavar="FILE")
    _add_output(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run", help="Execute a job file.")
    p.add_argument("config", metavar="CONFIG")
    _add_output(p, defaults=False)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[list] = None) -> int:
    """CLI entry point: ``bpsprimes count --alpha 'sqrt(2)' --c 13/12 --x 1e6``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.func(args)
    except SpecParseError as exc:
        where = f" (at {exc.token!r})" if exc.token else ""
        print(f"bpsprimes: parse error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, FileNotFoundError) as exc:
        print(f"bpsprimes: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"bpsprimes: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except IdentityCheckError as exc:
        print(f"bpsprimes: identity check failed: {exc}", file=sys.stderr)
        return EXIT_IDENTITY


if __name__ == "__main__":
    sys.exit(main())
