"""Command-line front end: factorize, apply, bench.

Exit codes: 0 success, 2 bad arguments, 3 parse/dimension errors reading
inputs, 4 numerical failures.  Every error path prints one line to stderr of
the form "error: <Kind>: <detail>".
"""

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import chains, gfactor, graphio, oracle, tfactor
from .core import DenseMatrix, SYMMETRIC, frobenius_norm_sq
from .errors import (
    DimensionMismatch,
    FastspecError,
    IndexOutOfRange,
    MissingSpectrum,
    NonInvertibleScale,
    NotSymmetric,
    ParseError,
    SingularNormalMatrix,
    ValidationError,
)

_PARSE_ERRORS = (ParseError, IndexOutOfRange, DimensionMismatch, ValidationError)
_NUMERIC_ERRORS = (NotSymmetric, MissingSpectrum, SingularNormalMatrix, NonInvertibleScale)


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
    return code


def _load_matrix(path: str) -> DenseMatrix:
    """MatrixMarket by extension; anything else is read as an edge list whose
    Laplacian becomes the input matrix."""
    if path.endswith((".mtx", ".mm")):
        return graphio.load_matrix_market(path)
    return graphio.laplacian(graphio.load_edge_list(path))


def _load_vector(path: str) -> np.ndarray:
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise ParseError(f"line {lineno}: not a number: {line!r}") from None
    return np.array(vals)


def _budget(alpha: float, n: int) -> int:
    return int(math.ceil(alpha * n * math.log2(n))) if n > 1 else 0


# ---------------------------------------------------------------------------
# factorize


def cmd_factorize(args) -> int:
    if args.sym == args.general:
        sys.stderr.write("error: BadArguments: exactly one of --sym/--general is required\n")
        return 2
    if args.sym and args.g is None:
        sys.stderr.write("error: BadArguments: --sym requires --g\n")
        return 2
    if args.sym and args.m is not None:
        sys.stderr.write("error: BadArguments: --m conflicts with --sym (use --g)\n")
        return 2
    if args.general and args.m is None:
        sys.stderr.write("error: BadArguments: --general requires --m\n")
        return 2
    if args.general and args.g is not None:
        sys.stderr.write("error: BadArguments: --g conflicts with --general (use --m)\n")
        return 2
    try:
        matrix = _load_matrix(args.input)
        supplied = _load_vector(args.eigenvalues) if args.eigenvalues else None
    except OSError as exc:
        return _fail(3, exc)
    except _PARSE_ERRORS as exc:
        return _fail(3, exc)
    try:
        if args.sym:
            if matrix.symmetry_tag != SYMMETRIC:
                matrix = DenseMatrix.symmetric(matrix.data)  # raises NotSymmetric if it is not
            chain, report = gfactor.factorize_symmetric(
                matrix, args.g, spectrum_rule=args.spectrum, eps=args.eps,
                mode=args.mode, spectrum=supplied, max_sweeps=args.max_sweeps)
        else:
            chain, report = tfactor.factorize_general(
                matrix, args.m, spectrum_rule=args.spectrum, eps=args.eps,
                mode=args.mode, spectrum=supplied, max_sweeps=args.max_sweeps)
    except _NUMERIC_ERRORS as exc:
        return _fail(4, exc)
    except (ValidationError, DimensionMismatch) as exc:
        return _fail(2, exc)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(chains.serialize(chain))
    report_path = args.report or (args.out + ".report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    print(f"wrote {args.out} and {report_path} "
          f"(final relative squared error {report.final_rel_error_sq:.6e})")
    return 0


# ---------------------------------------------------------------------------
# apply


def cmd_apply(args) -> int:
    try:
        with open(args.chain, "r", encoding="utf-8") as fh:
            chain = chains.deserialize(fh.read())
        vec = _load_vector(args.vector)
    except OSError as exc:
        return _fail(3, exc)
    except _PARSE_ERRORS as exc:
        return _fail(3, exc)
    try:
        if args.mode == "forward":
            out = chains.apply(chain, vec, chains.FORWARD)
        elif args.mode in ("transpose", "inverse"):
            # on a g_chain, "inverse" applies the transpose (they coincide)
            out = chains.apply(chain, vec, chains.TRANSPOSE_OR_INVERSE)
        else:  # reconstruct: U diag U^T x or T diag T^{-1} x
            tmp = chains.apply(chain, vec, chains.TRANSPOSE_OR_INVERSE)
            tmp = tmp * chain.spectrum
            out = chains.apply(chain, tmp, chains.FORWARD)
    except DimensionMismatch as exc:
        return _fail(3, exc)
    except _NUMERIC_ERRORS as exc:
        return _fail(4, exc)
    with open(args.out, "w", encoding="utf-8") as fh:
        for v in out:
            fh.write(f"{v:.17g}\n")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# bench


def _bench_cell(method, n, alpha, seed, args):
    if args.graph == "er":
        graph = graphio.erdos_renyi(n, args.p, seed, directed=args.directed)
        lap = graphio.laplacian(graph)
    else:
        lap = _load_matrix(args.input)
        n = lap.n_rows
    symmetric_input = lap.symmetry_tag == SYMMETRIC
    budget = _budget(alpha, n)
    norm_sq = frobenius_norm_sq(lap)
    dense_flops = 2 * n * n
    t0 = time.perf_counter()
    if method == "g":
        if not symmetric_input:
            raise NotSymmetric("method 'g' needs a symmetric input (undirected graph)")
        chain, report = gfactor.factorize_symmetric(
            lap, budget, spectrum_rule=args.spectrum, eps=args.eps, mode=args.mode,
            max_sweeps=args.max_sweeps)
        rel = report.final_rel_error_sq
        flops = report.flops
    elif method == "t":
        chain, report = tfactor.factorize_general(
            lap, budget, spectrum_rule=args.spectrum, eps=args.eps, mode=args.mode,
            max_sweeps=args.max_sweeps)
        rel = report.final_rel_error_sq
        flops = report.flops
    elif method == "jacobi":
        if not symmetric_input:
            raise NotSymmetric("method 'jacobi' needs a symmetric input")
        chain = oracle.jacobi_truncated(lap, budget)
        rel = frobenius_norm_sq(lap.data - chains.reconstruct(chain).data) / norm_sq
        flops = chains.flop_count(chain).multiply_adds
    elif method == "lowrank":
        factor = 3.0 if symmetric_input else 1.0
        r = max(1, min(n, int(math.ceil(factor * alpha * math.log2(n)))))
        approx = oracle.low_rank_baseline(lap, r)
        rel = frobenius_norm_sq(lap.data - approx.data) / norm_sq
        flops = 2 * r * n
        budget = r
        chain = None
    else:
        raise ValidationError(f"unknown method {method!r}")
    t1 = time.perf_counter()
    x = np.random.default_rng(seed).standard_normal(n)
    t2 = time.perf_counter()
    if chain is not None:
        chains.apply(chain, x, chains.FORWARD)
    else:
        _ = approx.data @ x
    t3 = time.perf_counter()
    return {
        "method": method, "n": n, "alpha": alpha, "seed": seed, "budget": budget,
        "rel_error_sq": rel, "flops": flops,
        "speedup_vs_dense": dense_flops / flops if flops else float("inf"),
        "wall_time_factorize": t1 - t0, "wall_time_apply": t3 - t2,
    }


_BENCH_COLUMNS = ["method", "n", "alpha", "seed", "budget", "rel_error_sq", "flops",
                  "speedup_vs_dense", "wall_time_factorize", "wall_time_apply"]


def _format_cell(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_bench(args) -> int:
    try:
        ns = [int(x) for x in args.n.split(",") if x]
        alphas = [float(x) for x in args.alphas.split(",") if x]
    except ValueError:
        sys.stderr.write("error: BadArguments: --n and --alphas must be comma-separated numbers\n")
        return 2
    if args.graph == "file" and not args.input:
        sys.stderr.write("error: BadArguments: --graph file requires --input\n")
        return 2
    if args.graph == "file":
        ns = [0]  # the file fixes the dimension; the cell fills it in
    if args.seeds < 1:
        sys.stderr.write("error: BadArguments: --seeds must be at least 1\n")
        return 2
    methods = [m for m in args.method.split(",") if m]
    for m in methods:
        if m not in ("g", "t", "jacobi", "lowrank"):
            sys.stderr.write(f"error: BadArguments: unknown method {m!r}\n")
            return 2
    cells = [(m, n, a, s) for m in methods for n in ns for a in alphas
             for s in range(args.seeds)]
    threads = max(1, int(os.environ.get("FASTSPEC_THREADS", "1")))
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(lambda c: _bench_cell(*c, args), cells))
        else:
            rows = [_bench_cell(*c, args) for c in cells]
    except OSError as exc:
        return _fail(3, exc)
    except _PARSE_ERRORS as exc:
        return _fail(3, exc)
    except _NUMERIC_ERRORS as exc:
        return _fail(4, exc)
    rows.sort(key=lambda r: (r["method"], r["n"], r["alpha"], r["seed"]))
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S")
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# fastspec bench, generated {stamp}\n")
        writer = csv.writer(fh)
        writer.writerow(_BENCH_COLUMNS)
        for r in rows:
            writer.writerow([_format_cell(r[c]) for c in _BENCH_COLUMNS])
    # companion summary: means and stds grouped by (method, n, alpha)
    groups = {}
    for r in rows:
        groups.setdefault((r["method"], r["n"], r["alpha"]), []).append(r)
    summary_path = args.summary or (args.out[:-4] + ".summary.csv"
                                    if args.out.endswith(".csv") else args.out + ".summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# fastspec bench summary, generated {stamp}\n")
        writer = csv.writer(fh)
        writer.writerow(["method", "n", "alpha", "runs", "mean_rel_error_sq",
                         "std_rel_error_sq", "mean_flops", "mean_speedup_vs_dense",
                         "mean_wall_time_factorize", "mean_wall_time_apply"])
        for (m, n, a), rs in sorted(groups.items()):
            err = np.array([r["rel_error_sq"] for r in rs])
            writer.writerow([
                m, n, _format_cell(a), len(rs),
                _format_cell(float(err.mean())), _format_cell(float(err.std())),
                _format_cell(float(np.mean([r["flops"] for r in rs]))),
                _format_cell(float(np.mean([r["speedup_vs_dense"] for r in rs]))),
                _format_cell(float(np.mean([r["wall_time_factorize"] for r in rs]))),
                _format_cell(float(np.mean([r["wall_time_apply"] for r in rs]))),
            ])
    print(f"wrote {args.out} and {summary_path} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fastspec",
                                description="Approximate eigendecompositions through butterfly chains")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factorize", help="factor a matrix or graph Laplacian")
    f.add_argument("--sym", action="store_true", help="symmetric branch (G-transforms)")
    f.add_argument("--general", action="store_true", help="general branch (T-transforms)")
    f.add_argument("--input", required=True, help=".mtx/.mm matrix or edge-list graph file")
    f.add_argument("--g", type=int, default=None, help="number of G-transforms (with --sym)")
    f.add_argument("--m", type=int, default=None, help="number of T-transforms (with --general)")
    f.add_argument("--spectrum", choices=["update", "original"], default="update")
    f.add_argument("--eigenvalues", default=None,
                   help="file of eigenvalue estimates (required for --spectrum original)")
    f.add_argument("--eps", type=float, default=1e-2, help="stopping threshold on the trace")
    f.add_argument("--mode", choices=["full", "polish"], default="polish")
    f.add_argument("--max-sweeps", type=int, default=100)
    f.add_argument("--out", required=True, help="chain output path")
    f.add_argument("--report", default=None, help="report path (default: <out>.report.json)")
    f.set_defaults(func=cmd_factorize)

    a = sub.add_parser("apply", help="apply a stored chain to a vector")
    a.add_argument("--chain", required=True)
    a.add_argument("--vector", required=True, help="one scalar per line")
    a.add_argument("--mode", choices=["forward", "transpose", "inverse", "reconstruct"],
                   default="forward")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_apply)

    b = sub.add_parser("bench", help="error-vs-budget sweeps and FLOP reports")
    b.add_argument("--method", required=True,
                   help="comma-separated subset of g,t,jacobi,lowrank")
    b.add_argument("--graph", choices=["er", "file"], default="er")
    b.add_argument("--input", default=None, help="graph file (with --graph file)")
    b.add_argument("--n", default="64", help="comma-separated sizes")
    b.add_argument("--alphas", default="0.5,1,2", help="comma-separated budget factors")
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--p", type=float, default=0.3, help="edge probability for ER graphs")
    b.add_argument("--directed", action="store_true")
    b.add_argument("--spectrum", choices=["update", "original"], default="update")
    b.add_argument("--mode", choices=["full", "polish"], default="polish")
    b.add_argument("--eps", type=float, default=1e-2)
    b.add_argument("--max-sweeps", type=int, default=100)
    b.add_argument("--out", required=True, help="CSV output path")
    b.add_argument("--summary", default=None, help="summary CSV path")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FastspecError as exc:  # anything not mapped above is a numerical failure
        return _fail(4, exc)


if __name__ == "__main__":
    sys.exit(main())
