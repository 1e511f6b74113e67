"""Command-line front end.

    rankcorr estimate data.csv [--cols i,j] [--jitter]
    rankcorr theory --model pareto --t 10 [--n 1000]
    rankcorr table --reproduce 2.1 [--reps 1000] [--n 1000]
    rankcorr bench --n 16384,32768 [--algo fast]

Global flags (``--seed``, ``--json``, ``--out``, ``--threads``) may appear
before or after the subcommand. Exit codes: 0 success, 2 input parse,
3 data policy, 4 parameter, 5 convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import re
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, kernels, rankstats, tables
from .copulas import FAMILIES, BivariateNormal, make_model, theoretical_coefficients
from .errors import InputParseError, ParameterOutOfRange, RankCorrError, TiesPresent
from .montecarlo import resolve_threads

EXIT_OK = 0
DEFAULT_SEED = 0
_DECIMAL_COMMA = re.compile(r"^\s*[-+]?\d+,\d+\s*$")


# ---------------------------------------------------------------- CSV input


def _parse_cols(text: str | None) -> tuple[int, int]:
    if text is None:
        return 0, 1
    try:
        i, j = (int(p) for p in text.split(","))
    except ValueError:
        raise InputParseError(f"--cols expects two comma-separated integers, got {text!r}") from None
    if i < 0 or j < 0 or i == j:
        raise InputParseError(f"--cols needs two distinct non-negative indices, got {text!r}")
    return i, j


def _to_float(cell: str, line: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        if _DECIMAL_COMMA.match(cell):
            raise InputParseError(
                f"line {line}, column {col}: {cell!r} uses a decimal comma; only '.' is accepted"
            ) from None
        raise InputParseError(f"line {line}, column {col}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise InputParseError(f"line {line}, column {col}: non-finite value {cell!r}")
    return value


def read_pairs(stream, cols: tuple[int, int] = (0, 1)):
    """Two numeric columns from comma-separated text.

    A first row with any non-numeric cell in the selected columns is a
    header. Returns ``(xs, ys, lines)`` where ``lines`` holds the 1-based
    line number of each data row.
    """
    xs, ys, lines = [], [], []
    need = max(cols) + 1
    first = True
    for line, row in enumerate(csv.reader(stream), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < need:
            raise InputParseError(f"line {line}: expected at least {need} columns, found {len(row)}")
        cells = [row[c].strip() for c in cols]
        if first:
            first = False
            try:
                [float(c) for c in cells]
            except ValueError:
                continue  # header
        xs.append(_to_float(cells[0], line, cols[0]))
        ys.append(_to_float(cells[1], line, cols[1]))
        lines.append(line)
    if len(xs) < 2:
        raise InputParseError(f"need at least 2 data rows, found {len(xs)}")
    return np.array(xs), np.array(ys), lines


def _first_tie(values: np.ndarray, lines: list) -> tuple[int, int, float] | None:
    seen = {}
    for value, line in zip(values.tolist(), lines):
        if value in seen:
            return seen[value], line, value
        seen[value] = line
    return None


# ------------------------------------------------------------------- output


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def load_schema() -> dict:
    """The bundled JSON schema every ``--json`` report conforms to."""
    return json.loads(resources.files(__package__).joinpath("report.schema.json").read_text(encoding="utf-8"))


def checksum(results) -> str:
    return hashlib.sha256(_canonical(results).encode()).hexdigest()


def build_manifest(args: argparse.Namespace, argv: list, results) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    return {
        "command": args.command,
        "argv": list(argv),
        "args": params,
        "seed": args.seed,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "checksum": {"algorithm": "sha256", "value": checksum(results)},
    }


def _emit(args, argv, results, text: str) -> None:
    manifest = build_manifest(args, argv, results)
    if args.json:
        payload = json.dumps({"manifest": manifest, "results": results}, indent=2, allow_nan=False) + "\n"
        if args.out:
            Path(args.out).write_text(payload, encoding="utf-8")
        else:
            sys.stdout.write(payload)
        return
    if args.out:
        # the text file stays byte-identical across reruns; run metadata goes beside it
        Path(args.out).write_text(text, encoding="utf-8")
        Path(str(args.out) + ".manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
    else:
        sys.stdout.write(text)


def _kv_lines(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    out = []
    for key, value in pairs:
        if value is None:
            shown = "--"
        elif isinstance(value, float):
            shown = f"{value:.10g}"
        else:
            shown = str(value)
        out.append(f"{key.ljust(width)}  {shown}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- commands


def cmd_estimate(args) -> tuple[dict, str]:
    cols = _parse_cols(args.cols)
    if args.csv == "-":
        xs, ys, lines = read_pairs(sys.stdin, cols)
    else:
        try:
            with open(args.csv, newline="", encoding="utf-8") as fh:
                xs, ys, lines = read_pairs(fh, cols)
        except OSError as exc:
            raise InputParseError(f"cannot read {args.csv}: {exc.strerror}") from None
        except UnicodeDecodeError:
            raise InputParseError(f"{args.csv} is not UTF-8 text") from None
    if not args.jitter:
        for name, values in (("x", xs), ("y", ys)):
            tie = _first_tie(values, lines)
            if tie:
                a, b, value = tie
                raise TiesPresent(
                    f"tied {name} values {value:g} on lines {a} and {b}; rerun with --jitter to break ties"
                )
    sample = rankstats.PairedSample(xs, ys)
    est = rankstats.estimate_all(
        sample, ties="jitter" if args.jitter else "reject", seed=args.seed, method=args.method
    )
    results = est.as_dict()
    results["ties_broken"] = bool(args.jitter and sample.has_ties)
    order = ("n", "pearson", "spearman", "kendall", "r_new", "r_tilde")
    text = _kv_lines([(k, results[k]) for k in order])
    return results, text


def cmd_theory(args) -> tuple[dict, str]:
    model = make_model(args.model, args.t)
    coef = theoretical_coefficients(model, m=args.m)
    reports = [asymptotics.var_tau_leading(model), asymptotics.var_r_leading(model)]
    if isinstance(model, BivariateNormal):
        reports.insert(0, asymptotics.var_pearson_normal(model.t))
    results = {
        "family": model.family,
        "t": model.t,
        "coefficients": coef.as_dict(),
        "variances": [r.as_dict() for r in reports],
    }
    pairs = [("family", model.family), ("t", model.t)]
    pairs += [(k, coef.as_dict()[k]) for k in ("rho", "rho_s", "tau", "r")]
    for rep in reports:
        pairs.append((f"var_coeff[{rep.estimator}]", rep.leading_coeff))
    if args.n is not None:
        if args.n < 2:
            raise ParameterOutOfRange(f"--n must be >= 2, got {args.n}")
        results["n"] = args.n
        results["expected_r_n"] = asymptotics.expected_r_n(model, args.n)
        results["expected_r_tilde"] = asymptotics.expected_r_tilde(model, args.n)
        pairs += [("n", args.n), ("expected_r_n", results["expected_r_n"]),
                  ("expected_r_tilde", results["expected_r_tilde"])]
        for rep in reports:
            pairs.append((f"var[{rep.estimator}]", rep.variance(args.n)))
    return results, _kv_lines(pairs)


def cmd_table(args) -> tuple[dict, str]:
    if args.reproduce not in tables.TABLE_IDS:
        raise ParameterOutOfRange(
            f"unknown table {args.reproduce!r}; choose from {', '.join(tables.TABLE_IDS)}"
        )
    if args.reps < 2 or args.n < 2:
        raise ParameterOutOfRange("--reps and --n must be >= 2")
    seed = DEFAULT_SEED if args.seed is None else args.seed
    report = tables.reproduce(args.reproduce, seed=seed, reps=args.reps, n=args.n, threads=args.threads)
    return report.as_dict(), report.render()


def _parse_sizes(text: str) -> list[int]:
    try:
        sizes = [int(float(p)) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputParseError(f"--n expects comma-separated sizes, got {text!r}") from None
    if not sizes or min(sizes) < 2:
        raise ParameterOutOfRange("bench sizes must be >= 2")
    return sizes


# exhaustive naive cross-check is skipped above this size unless naive is timed anyway
BENCH_CHECK_LIMIT = 20_000


def cmd_bench(args) -> tuple[dict, str]:
    sizes = _parse_sizes(args.n)
    backend = args.backend or kernels.active_backend()
    if backend not in kernels.available_backends():
        raise ParameterOutOfRange(f"backend {backend!r} unavailable; have {kernels.available_backends()}")
    rng = np.random.default_rng(DEFAULT_SEED if args.seed is None else args.seed)
    algos = ("naive", "fast") if args.algo == "both" else (args.algo,)
    rows = []
    for n in sizes:
        ranks = rng.permutation(n).astype(np.int64) + 1
        fast_t = kernels.weighted_t(ranks, backend)
        fast_p = kernels.concordant_count(ranks, backend)
        checked = "naive" in algos or n <= BENCH_CHECK_LIMIT
        if checked:
            naive_t = kernels.weighted_t_naive(ranks, backend)
            naive_p = kernels.concordant_count_naive(ranks, backend)
            if (naive_t, naive_p) != (fast_t, fast_p):
                raise RankCorrError(f"fast and naive kernels disagree at n={n}")
        for algo in algos:
            f_t = kernels.weighted_t if algo == "fast" else kernels.weighted_t_naive
            f_p = kernels.concordant_count if algo == "fast" else kernels.concordant_count_naive
            rows.append({
                "n": n,
                "algo": algo,
                "backend": backend,
                "kendall_seconds": _best_time(f_p, ranks, backend, args.repeat),
                "weighted_t_seconds": _best_time(f_t, ranks, backend, args.repeat),
                "weighted_t": fast_t,
                "checked_against_naive": checked,
            })
    header = f"{'n':>10}  {'algo':>5}  {'backend':>8}  {'kendall_s':>10}  {'weighted_T_s':>12}  T_n"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r['n']:>10}  {r['algo']:>5}  {r['backend']:>8}  {r['kendall_seconds']:>10.3e}  "
            f"{r['weighted_t_seconds']:>12.3e}  {r['weighted_t']}"
        )
    return {"rows": rows}, "\n".join(lines) + "\n"


def _best_time(fn, ranks, backend, repeat: int) -> float:
    best = math.inf
    for _ in range(max(1, repeat)):
        start = time.perf_counter()
        fn(ranks, backend)
        best = min(best, time.perf_counter() - start)
    return best


# ------------------------------------------------------------------- parser


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # subparsers get SUPPRESS defaults so flags given before the subcommand survive
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(None), help="RNG seed (default 0 where randomness is used)")
    p.add_argument("--json", action="store_true", default=d(False), help="emit {manifest, results} JSON")
    p.add_argument("--out", default=d(None), help="write output to this path")
    p.add_argument("--threads", type=int, default=d(None),
                   help="worker threads for simulations (RANKCORR_THREADS overrides)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankcorr", description="Rank correlation estimates, theory and simulation tables.",
        parents=[_global_flags(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(False)]

    p = sub.add_parser("estimate", parents=common, help="coefficients of a two-column CSV")
    p.add_argument("csv", help="input CSV path, or - for stdin")
    p.add_argument("--cols", help="0-based column indices i,j (default 0,1)")
    p.add_argument("--jitter", action="store_true", help="break ties instead of rejecting them")
    p.add_argument("--method", choices=("auto", "naive", "fast"), default="auto")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("theory", parents=common, help="population coefficients and variance terms")
    p.add_argument("--model", required=True, choices=FAMILIES)
    p.add_argument("--t", type=float, required=True, help="family parameter")
    p.add_argument("--n", type=int, help="sample size for exact expectations")
    p.add_argument("--m", type=int, help="fixed quadrature size (default: refine until converged)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("table", parents=common, help="reproduce a published table")
    p.add_argument("--reproduce", required=True, metavar="ID", help="one of " + ", ".join(tables.TABLE_IDS))
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n", type=int, default=1000)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bench", parents=common, help="time the counting kernels")
    p.add_argument("--n", default="16384,32768", help="comma-separated sample sizes")
    p.add_argument("--algo", choices=("naive", "fast", "both"), default="fast")
    p.add_argument("--backend", choices=("python", "compiled"))
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        if args.threads is not None or args.command == "table":
            args.threads = resolve_threads(args.threads)
        results, text = args.func(args)
        _emit(args, argv, results, text)
    except RankCorrError as exc:
        print(f"rankcorr: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        # remaining validation errors are parameter problems
        print(f"rankcorr: error: {exc}", file=sys.stderr)
        return ParameterOutOfRange.exit_code
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
