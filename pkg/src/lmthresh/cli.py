"""Command-line front end.

Exit status: 0 when every requested method selected a threshold, 3 when at
least one selected nothing, 2 on input or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import LmomError
from .inference import METHODS, PotConfig, analyze
from .lmoments import l_statistics
from .report import (
    build_lmrd,
    read_observations,
    report_to_dict,
    write_diagnostics,
    write_lmrd,
    write_report,
)

log = logging.getLogger("lmthresh")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONE_SELECTED = 3


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lmthresh",
        description="Automatic peaks-over-threshold level selection with L-moments.",
    )
    ap.add_argument("--input", required=True, help="delimited text file with the observations")
    ap.add_argument("--column", default="0", help="0-based column index or header name (default 0)")
    ap.add_argument("--delimiter", default=",")
    hdr = ap.add_mutually_exclusive_group()
    hdr.add_argument("--header", dest="header", action="store_const", const=True, default=None)
    hdr.add_argument("--no-header", dest="header", action="store_const", const=False)
    ap.add_argument("--method", choices=(*METHODS, "both"), default="both")
    ap.add_argument("--candidates", type=int, default=10, help="number of candidate thresholds")
    ap.add_argument("--grid-start", type=float, help="first candidate probability")
    ap.add_argument("--grid-end", type=float, help="last candidate probability")
    ap.add_argument("--alpha", type=float, default=0.1, help="ForwardStop level for the GoF method")
    ap.add_argument("--alpha-cb", type=float, default=0.05, help="confidence-band level")
    ap.add_argument("--nsim", type=int, default=500, help="Kappa samples per candidate")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rl", type=_floats, default=(100.0, 10000.0), help="return periods in years")
    ap.add_argument("--obs-per-year", type=float, default=1.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-report", help="JSON report path (default: stdout)")
    ap.add_argument("--out-diagnostics", help="TSV per-candidate diagnostics path")
    ap.add_argument("--out-lmrd", help="CSV ratio-diagram export path")
    ap.add_argument("--timing", action="store_true", help="include wall time in the JSON report")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")

    methods = METHODS if args.method == "both" else (args.method,)
    column = int(args.column) if args.column.lstrip("-").isdigit() else args.column
    try:
        x = read_observations(args.input, column, args.delimiter, args.header)
        l_statistics(x)
        config = PotConfig(
            n_candidates=args.candidates,
            p_start=args.grid_start,
            p_end=args.grid_end,
            methods=methods,
            alpha_cb=args.alpha_cb,
            alpha_gof=args.alpha,
            n_sim=args.nsim,
            seed=args.seed,
            return_periods=args.rl,
            obs_per_year=args.obs_per_year,
            workers=args.workers,
        )
        report = analyze(x, config)
    except LmomError as exc:
        print(f"lmthresh: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        if args.out_report:
            write_report(report, args.out_report, include_timing=args.timing)
        else:
            json.dump(report_to_dict(report, args.timing), sys.stdout, indent=2, allow_nan=False)
            sys.stdout.write("\n")
        outcomes = [r.outcome for r in report.results.values()]
        if args.out_diagnostics:
            write_diagnostics(outcomes, args.out_diagnostics)
        if args.out_lmrd:
            source = report.results.get("alcbsm", next(iter(report.results.values())))
            write_lmrd(build_lmrd(source.outcome), args.out_lmrd)
    except OSError as exc:
        print(f"lmthresh: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    for name, res in report.results.items():
        o = res.outcome
        if o.selected:
            log.info("%s: u* = %.6g (candidate %d), n* = %d", name, o.u_star, o.selected_index + 1, o.n_star)
        else:
            log.warning("%s: no threshold selected", name)
    return EXIT_NONE_SELECTED if report.any_unselected else EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
