"""Command-line entry point: ``spinterval interval`` and ``spinterval bench``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
from typing import Optional, Sequence

import numpy as np

from . import distributions as dists
from .bench import BenchError, ExperimentCell, dump_raw, emit_csv, emit_plots, run_cell
from .empirical_intervals import empirical_central, empirical_shortest, gaussian_fit_interval
from .rng import DEFAULT_SEED
from .samples import MIN_DRAWS, Method, SortedSample
from .spin import COMPAT_FLAGS, SpinConfig, SpinError, augment_bounds, central_qp_interval, spin_interval

__all__ = ["main", "build_parser", "parse_draws", "InputError"]

log = logging.getLogger("spinterval")

JSON_SCHEMA = 1
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_METHODS = {
    "spin": Method.SPIN,
    "shortest": Method.EMPIRICAL_SHORTEST,
    "central": Method.EMPIRICAL_CENTRAL,
    "central-qp": Method.CENTRAL_QP,
    "gaussian": Method.GAUSSIAN_FIT,
}
_NEEDS_MIN_DRAWS = {Method.SPIN, Method.CENTRAL_QP}
_DISTS = {
    "normal": dists.normal,
    "t5": lambda: dists.student_t(5),
    "gamma3": lambda: dists.gamma(3),
    "exponential": dists.exponential,
    "gibbs": dists.GibbsSpec,
}


class InputError(ValueError):
    pass


def parse_draws(text: str) -> np.ndarray:
    """Parse one decimal real per line; a non-numeric first line is a header.

    Blank lines are skipped.  Anything else that is not a plain decimal
    number raises :class:`InputError` naming the offending line.
    """
    values = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line:
            continue
        if _NUMBER.fullmatch(line):
            values.append(float(line))
        elif lineno == 1:
            log.warning("treating first line %r as a header", line[:40])
            continue
        else:
            raise InputError(f"line {lineno}: not a number: {line[:40]!r}")
    x = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise InputError(f"value {bad[0] + 1}: overflows to infinity")
    return x


def _read_input(path: str) -> np.ndarray:
    if path == "-":
        return parse_draws(sys.stdin.read())
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path} is not UTF-8 text") from exc
    return parse_draws(text.removeprefix("\ufeff"))


def _bandwidth(value: str) -> Optional[int]:
    if value == "auto":
        return None
    try:
        b = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'auto'") from None
    if b < 2:
        raise argparse.ArgumentTypeError("bandwidth must be at least 2")
    return b


def _positive_int(value: str) -> int:
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _alpha(value: str) -> float:
    try:
        a = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0.0 < a < 1.0:
        raise argparse.ArgumentTypeError("alpha must be in (0, 1)")
    return a


def _compat(value: str) -> frozenset:
    flags = frozenset(f for f in value.split(",") if f)
    unknown = flags - COMPAT_FLAGS
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown compat flags: {','.join(sorted(unknown))}")
    return flags


def _list_of(conv):
    def parse(value: str):
        return [conv(v) for v in value.split(",") if v]

    return parse


def _method_name(value: str) -> Method:
    try:
        return _METHODS[value]
    except KeyError:
        raise argparse.ArgumentTypeError(
            f"unknown method {value!r}; choose from {', '.join(_METHODS)}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinterval", description="Shortest probability intervals from simulation draws."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interval", help="interval estimates for a file of draws")
    p.add_argument("--input", required=True, help="one draw per line; '-' reads stdin")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--method", type=_method_name, action="append", dest="methods",
                   help="spin, shortest, central, central-qp or gaussian (repeatable)")
    p.add_argument("--lower-bound", type=float)
    p.add_argument("--upper-bound", type=float)
    p.add_argument("--bootstrap", type=_positive_int, default=50)
    p.add_argument("--bandwidth", type=_bandwidth, default=None, help="integer or 'auto'")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--compat", type=_compat, default=frozenset())
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_interval)

    b = sub.add_parser("bench", help="run a replication grid")
    b.add_argument("--dist", choices=sorted(_DISTS), required=True)
    b.add_argument("--n", type=_list_of(_positive_int), default=[500])
    b.add_argument("--alpha", type=_list_of(_alpha), default=[0.05])
    b.add_argument("--reps", type=_positive_int, default=2000)
    b.add_argument("--methods", type=_list_of(_method_name),
                   default=[Method.EMPIRICAL_SHORTEST, Method.SPIN])
    b.add_argument("--lower-bound", type=float)
    b.add_argument("--upper-bound", type=float)
    b.add_argument("--bootstrap", type=_positive_int, default=50)
    b.add_argument("--bandwidth", type=_bandwidth, default=None)
    b.add_argument("--compat", type=_compat, default=frozenset())
    b.add_argument("--out", default="bench-out")
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--dump-raw", action="store_true", help="also write per-replicate errors")
    b.add_argument("--no-plots", action="store_true")
    b.add_argument("--workers", type=_positive_int, default=1)
    b.set_defaults(func=cmd_bench)
    return parser


def _finite(x):
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def cmd_interval(args) -> int:
    draws = _read_input(args.input)
    methods = args.methods or [Method.SPIN]
    if draws.size == 0:
        raise InputError("no draws in input")
    if draws.size < MIN_DRAWS and any(m in _NEEDS_MIN_DRAWS for m in methods):
        raise InputError(f"need at least {MIN_DRAWS} draws, got {draws.size}")
    sample = SortedSample(np.sort(draws))
    config = SpinConfig(
        alpha=args.alpha, bootstrap_B=args.bootstrap, bandwidth_b=args.bandwidth,
        lower_bound=args.lower_bound, upper_bound=args.upper_bound,
        seed=args.seed, compat=args.compat,
    )
    augmented = augment_bounds(sample, args.lower_bound, args.upper_bound)

    results = []
    for method in methods:
        log.info("computing %s interval", method.value)
        diagnostics: dict = {}
        if method is Method.SPIN:
            res = spin_interval(augmented, config)
            est, diagnostics = res.interval, res.diagnostics
        elif method is Method.CENTRAL_QP:
            res = central_qp_interval(augmented, config)
            est, diagnostics = res.interval, res.diagnostics
        elif method is Method.EMPIRICAL_SHORTEST:
            est, win = empirical_shortest(augmented, args.alpha)
            diagnostics = {"lower_index": win.lower_index, "upper_index": win.upper_index,
                           "window_count": win.window_count}
        elif method is Method.EMPIRICAL_CENTRAL:
            est = empirical_central(augmented, args.alpha)
        else:
            est = gaussian_fit_interval(sample, args.alpha)
        if est.notes:
            diagnostics = {**diagnostics, "notes": list(est.notes)}
        results.append({
            "method": method.value, "lower": est.lower, "upper": est.upper,
            "alpha": args.alpha, "n": int(draws.size), "diagnostics": diagnostics,
        })

    if args.json:
        doc = {"schema": JSON_SCHEMA, "results": _finite(results)}
        sys.stdout.write(json.dumps(doc, sort_keys=True, allow_nan=False) + "\n")
    else:
        for r in results:
            sys.stdout.write(f"{r['method']}\t{r['lower']:.10g}\t{r['upper']:.10g}\n")
    return 0


def cmd_bench(args) -> int:
    factory = _DISTS[args.dist]
    dist = factory()
    cells = [
        ExperimentCell(
            dist, n, alpha=a, replications=args.reps, methods=tuple(args.methods),
            seed=args.seed, lower_bound=args.lower_bound, upper_bound=args.upper_bound,
            bootstrap_B=args.bootstrap, bandwidth_b=args.bandwidth, compat=args.compat,
        )
        for n in args.n
        for a in args.alpha
    ]
    if args.reps < 100:
        log.warning("fewer than 100 replications: statistics are for smoke testing only")
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for cell in cells:
        log.info("running %s (%d replications)", cell.cell_id, cell.replications)
        reports.append(run_cell(cell, workers=args.workers))
    csv_path = os.path.join(args.out, "summary.csv")
    emit_csv(reports, csv_path)
    log.info("wrote %s", csv_path)
    if args.dump_raw:
        raw_path = os.path.join(args.out, "raw.csv")
        dump_raw(reports, raw_path)
        log.info("wrote %s", raw_path)
    if not args.no_plots:
        for path in emit_plots(reports, args.out):
            log.info("wrote %s", path)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s", stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InputError, ValueError, SpinError, BenchError, OSError) as exc:
        print(f"spinterval: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
