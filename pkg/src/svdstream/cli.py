"""Command-line entry point: ``svdstream {gen|update|bench|verify}``.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage or IO.
"""
import argparse
import os
import sys

import numpy as np

from .bench import CSV_HEADER, record_from_report, run_bench
from .cauchy import BACKENDS, BackendChoice
from .errors import ParseError, SvdStreamError
from .jacobi import jacobi_svd
from .matfile import format_matrix, read_matrix, read_vector, write_matrix
from .update import update_svd
from .verify import run_verify

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
SEED_ENV = "SVDSTREAM_SEED"


class UsageError(Exception):
    pass


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _int_list(text):
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _backend_list(text):
    vals = [tok.strip() for tok in text.split(",") if tok.strip()]
    bad = [v for v in vals if v not in BACKENDS]
    if bad or not vals:
        raise argparse.ArgumentTypeError(f"backends must be among {','.join(BACKENDS)}")
    return vals


def _backend(kind, epsilon):
    try:
        return BackendChoice(kind, epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args):
    if args.rows < 1 or args.cols < 1:
        raise UsageError("rows and cols must be at least 1")
    if not args.lo < args.hi:
        raise UsageError("need lo < hi")
    rng = np.random.default_rng(_seed(args))
    M = args.lo + (args.hi - args.lo) * rng.random((args.rows, args.cols))
    text = format_matrix(M)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_update(args):
    backend = _backend(args.backend, args.epsilon)
    A = read_matrix(args.matrix)
    a = read_vector(args.a)
    b = read_vector(args.b)
    m, n = A.shape
    if a.size != m or b.size != n:
        raise UsageError(f"update vectors have lengths ({a.size}, {b.size}); "
                         f"matrix is {m} x {n}")
    phase = "initial svd"
    try:
        svd = jacobi_svd(A)
        phase = "update"
        new, report = update_svd(svd, a, b, backend, A=A)
    except SvdStreamError as exc:
        print(f"svdstream: {phase} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_matrix(f"{args.out}_U.txt", new.U)
    write_matrix(f"{args.out}_S.txt", new.S.to_dense())
    write_matrix(f"{args.out}_V.txt", new.V)
    print(CSV_HEADER)
    print(record_from_report(m, n, backend, report).csv_row())
    return EXIT_OK


def cmd_bench(args):
    if any(n < 2 for n in args.sizes):
        raise UsageError("sizes must be at least 2")
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    backends = [_backend(k, args.epsilon) for k in args.backends]
    seed = _seed(args)
    print(CSV_HEADER, flush=True)
    try:
        for rec in run_bench(args.sizes, backends, args.repeat, seed,
                             args.max_update_n, args.max_error_n):
            if rec.t_matvec_ns is None:
                print(f"svdstream: backend {rec.backend} does not support n={rec.n}",
                      file=sys.stderr)
            print(rec.csv_row(), flush=True)
    except SvdStreamError as exc:
        print(f"svdstream: bench failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(args):
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.trials < 0:
        raise UsageError("--trials must be nonnegative")
    backend = _backend(args.backend, args.epsilon)
    checks = run_verify(args.n, args.trials, backend, _seed(args))
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        line = f"{c.name:<18} max_defect={c.worst:.3e} tol={c.tol:.1e} {status}"
        print(line + (f"  ({c.note})" if c.note else ""))
    failed = [c for c in checks if not c.ok]
    if failed:
        print(f"verify: FAILED at {failed[0].name}")
        return EXIT_NUMERIC
    print(f"verify: all {len(checks)} invariants passed over {args.trials} trials")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="svdstream",
                                     description="Rank-one SVD updates and their benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def seed_opt(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"PRNG seed (falls back to ${SEED_ENV}, then 0)")

    def backend_opts(p):
        p.add_argument("--backend", choices=BACKENDS, default="naive")
        p.add_argument("--epsilon", type=float, default=5.0 ** -20,
                       help="fmm accuracy; order p = ceil(log5(1/epsilon)), default p=20")

    g = sub.add_parser("gen", help="write a random matrix with uniform entries")
    g.add_argument("rows", type=int)
    g.add_argument("cols", type=int)
    g.add_argument("lo", type=float, nargs="?", default=1.0)
    g.add_argument("hi", type=float, nargs="?", default=9.0)
    g.add_argument("--out", default=None, help="output path (default stdout)")
    seed_opt(g)
    g.set_defaults(func=cmd_gen)

    u = sub.add_parser("update", help="update the SVD of MATRIX by A B^T")
    u.add_argument("matrix")
    u.add_argument("a")
    u.add_argument("b")
    u.add_argument("out", help="prefix for OUT_U.txt, OUT_S.txt, OUT_V.txt")
    backend_opts(u)
    u.set_defaults(func=cmd_update)

    b = sub.add_parser("bench", help="CSV timings over sizes and backends")
    b.add_argument("--sizes", type=_int_list, default=[256, 512, 1024])
    b.add_argument("--backends", type=_backend_list, default=["naive", "fmm"])
    b.add_argument("--repeat", type=int, default=5)
    b.add_argument("--epsilon", type=float, default=5.0 ** -20)
    b.add_argument("--max-update-n", type=int, default=1024,
                   help="largest n for which the full update is run (default 1024)")
    b.add_argument("--max-error-n", type=int, default=512,
                   help="largest n for which error and orthogonality are measured")
    seed_opt(b)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run the randomized invariant suite")
    v.add_argument("--n", type=int, default=8)
    v.add_argument("--trials", type=int, default=20)
    backend_opts(v)
    seed_opt(v)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # the reader went away (e.g. piped into head); stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except UsageError as exc:
        print(f"svdstream {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as exc:
        print(f"svdstream {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
