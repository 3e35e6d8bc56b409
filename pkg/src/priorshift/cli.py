"""Command-line front end: ``adapt``, ``demo`` and ``validate``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench, core, validation
from .core import ConvergenceError, DimensionError, ProbabilityVector, SimplexError, SolverConfig

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_DIMENSION = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4


class InputError(Exception):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ShapeError(InputError):
    """Rows or priors disagree on the class count."""


@dataclass
class AdaptRequest:
    old_priors: ProbabilityVector | None
    new_priors: ProbabilityVector | None
    rows: np.ndarray
    row_lines: list


def _floats(fields, line):
    try:
        return [float(f) for f in fields]
    except ValueError:
        raise InputError(line, f"not a number in {','.join(fields)!r}") from None


def _priors(key, values, line):
    try:
        if key.endswith("counts"):
            return ProbabilityVector.from_counts(values)
        return ProbabilityVector(values)
    except SimplexError as exc:
        raise InputError(line, f"{key}: {exc}") from None


def read_csv_request(text):
    """Parse the directive-headed CSV format.

    ::

        #old_priors,0.5,0.5
        #new_priors,0.8,0.2
        0.5,0.5
        0.9,0.1

    ``#old_counts`` / ``#new_counts`` are accepted in place of the priors.
    Blank lines are skipped.
    """
    priors = {"old": None, "new": None}
    rows, row_lines = [], []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if line.startswith("#"):
            key = fields[0][1:]
            if key not in ("old_priors", "new_priors", "old_counts", "new_counts"):
                raise InputError(lineno, f"unknown directive {fields[0]!r}")
            if rows:
                raise InputError(lineno, "directives must precede the posterior rows")
            priors[key.split("_")[0]] = (_priors(key, _floats(fields[1:], lineno), lineno), lineno)
            continue
        values = _floats(fields, lineno)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ShapeError(lineno, f"row has {len(values)} columns, expected {width}")
        rows.append(values)
        row_lines.append(lineno)
    if priors["old"] is None:
        raise InputError(None, "missing #old_priors directive")
    return AdaptRequest(priors["old"][0], priors["new"][0] if priors["new"] else None,
                        np.array(rows, dtype=np.float64).reshape(len(rows), width or 0), row_lines)


def read_json_request(text):
    """Parse ``{"old_priors": [...], "new_priors": [...], "rows": [[...], ...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict):
        raise InputError(1, "top level must be an object")

    def prior(kind):
        for key in (f"{kind}_priors", f"{kind}_counts"):
            if key in doc:
                vals = doc[key]
                if not isinstance(vals, list) or not all(isinstance(v, (int, float)) for v in vals):
                    raise InputError(None, f"{key} must be a list of numbers")
                return _priors(key, vals, None)
        return None

    old = prior("old")
    if old is None:
        raise InputError(None, "missing old_priors")
    rows = doc.get("rows")
    if not isinstance(rows, list) or not all(
        isinstance(r, list) and all(isinstance(v, (int, float)) for v in r) for r in rows
    ):
        raise InputError(None, "rows must be a list of lists of numbers")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ShapeError(None, "rows have differing lengths")
    width = widths.pop() if widths else 0
    arr = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    return AdaptRequest(old, prior("new"), arr, [f"row {i}" for i in range(len(rows))])


def read_request(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(None, str(exc)) from None
    if path.suffix.lower() == ".json":
        return read_json_request(text)
    return read_csv_request(text)


def _fmt(x):
    return f"{x:.17g}"


def write_rows(path, posteriors, likelihoods=None):
    n = posteriors.shape[1]
    cols = [f"post_{i}" for i in range(n)]
    if likelihoods is not None:
        cols += [f"lik_{i}" for i in range(n)]
    with Path(path).open("w") as fh:
        fh.write("#columns," + ",".join(cols) + "\n")
        for i, row in enumerate(posteriors):
            vals = list(row) if likelihoods is None else list(row) + list(likelihoods[i])
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def _vector_arg(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _resolve_priors(priors_arg, counts_arg, fallback):
    if counts_arg is not None:
        return ProbabilityVector.from_counts(counts_arg)
    if priors_arg is not None:
        return ProbabilityVector(priors_arg)
    return fallback


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def cmd_adapt(args):
    try:
        req = read_request(args.input)
        old = _resolve_priors(args.old_priors, args.old_counts, req.old_priors)
        new = _resolve_priors(args.new_priors, args.new_counts, req.new_priors)
    except ShapeError as exc:
        _err(exc)
        return EXIT_DIMENSION
    except (InputError, SimplexError) as exc:
        _err(exc)
        return EXIT_PARSE
    if new is None:
        _err("no new priors: give #new_priors in the file or --new-priors/--new-counts")
        return EXIT_PARSE
    if (req.rows.shape[0] and req.rows.shape[1] != old.n) or old.n != new.n:
        _err(f"dimension mismatch: rows have {req.rows.shape[1]} classes, "
             f"old priors {old.n}, new priors {new.n}")
        return EXIT_DIMENSION

    for row, where in zip(req.rows, req.row_lines):
        try:
            ProbabilityVector(row)
        except SimplexError as exc:
            _err(f"line {where}: {exc}" if isinstance(where, int) else f"{where}: {exc}")
            return EXIT_PARSE

    cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter, method=args.method, solver=args.solver)
    try:
        out, liks = core.adapt_batch(req.rows, old, new, cfg, return_likelihoods=True)
    except ConvergenceError as exc:
        _err(exc)
        return EXIT_SOLVER
    write_rows(args.output, out, liks if args.emit_likelihoods else None)
    return EXIT_OK


def cmd_demo(args):
    try:
        old = _resolve_priors(args.old_priors, args.old_counts, ProbabilityVector((0.5, 0.5)))
        new = _resolve_priors(args.new_priors, args.new_counts, ProbabilityVector((0.8, 0.2)))
        if len(args.means) != 2 or old.n != 2 or new.n != 2:
            raise SimplexError("the demo takes exactly two classes")
        specs = tuple(bench.GaussianClassSpec(m, args.variance) for m in args.means)
        if specs[0].mean == specs[1].mean:
            raise ValueError("class means must differ")
    except ValueError as exc:
        _err(exc)
        return EXIT_PARSE
    cfg = SolverConfig(method=args.method, solver=args.solver)
    try:
        report = bench.run_demo(args.seed, args.n, old, new, specs, cfg)
    except ConvergenceError as exc:
        _err(exc)
        return EXIT_SOLVER
    sys.stdout.write(report.format())
    if args.plot_dir is not None:
        plot_dir = Path(args.plot_dir)
        plot_dir.mkdir(parents=True, exist_ok=True)
        old_data, new_data = bench.demo_datasets(args.seed, args.n, old, new, specs)
        bench.write_plot_data(plot_dir / "hist_old_priors.tsv", old_data, 2)
        bench.write_plot_data(plot_dir / "hist_new_priors.tsv", new_data, 2)
    return EXIT_OK


def cmd_validate(args):
    results = validation.run_all(args.instances, args.seed, args.perturb_column_sums)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all checks passed" if ok else "validation FAILED")
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="priorshift",
        description="Adapt classifier posteriors to new class priors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("adapt", help="adapt posterior rows from a file")
    p.add_argument("--input", required=True, help="CSV with #old_priors/#new_priors header, or .json")
    p.add_argument("--output", required=True)
    p.add_argument("--method", choices=("eigen", "ratio"), default="ratio")
    p.add_argument("--emit-likelihoods", action="store_true",
                   help="append the recovered L1-normalized likelihoods to each row")
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--solver", choices=("shifted", "plain"), default="shifted",
                   help="Perron-vector iteration used by --method eigen")
    for kind in ("old", "new"):
        p.add_argument(f"--{kind}-priors", type=_vector_arg, help=f"override {kind} priors")
        p.add_argument(f"--{kind}-counts", type=_vector_arg,
                       help=f"{kind} priors as raw class counts")
    p.set_defaults(func=cmd_adapt)

    d = sub.add_parser("demo", help="two-Gaussian prior-shift benchmark")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--n", type=int, default=10_000)
    for kind in ("old", "new"):
        d.add_argument(f"--{kind}-priors", type=_vector_arg)
        d.add_argument(f"--{kind}-counts", type=_vector_arg)
    d.add_argument("--means", type=_vector_arg, default=[-1.0, 1.0])
    d.add_argument("--variance", type=float, default=1.0)
    d.add_argument("--method", choices=("eigen", "ratio"), default="eigen")
    d.add_argument("--solver", choices=("shifted", "plain"), default="shifted")
    d.add_argument("--plot-dir", default=".", help="where histogram plot data is written")
    d.set_defaults(func=cmd_demo)

    v = sub.add_parser("validate", help="run the invariant sweeps")
    v.add_argument("--instances", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--perturb-column-sums", type=float, default=0.0,
                   help="add X to every column sum (negative control)")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # e.g. a malformed PRIORSHIFT_EPS
        _err(exc)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
