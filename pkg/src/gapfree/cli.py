"""Command line entry point: ``gapfree {gen,run,trace,sweep}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 every trial failed.
"""

import argparse
import sys

from .dense import ContractError, format_matrix, read_matrix
from .harness import (build_matrix, format_records, format_summary, parse_spectrum,
                      trial_on_matrix, sweep)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ALL_FAILED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _spectrum(text):
    try:
        return parse_spectrum(text)
    except (ContractError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_matrix_args(p):
    p.add_argument("--n", type=_positive_int, default=200, help="rows of A")
    p.add_argument("--m", type=_positive_int, default=None, help="columns of A (default n)")
    p.add_argument("--matrix-seed", type=_u64, default=0,
                   help="seed of the synthetic matrix (independent of the sketch seed)")


def _add_trial_args(p):
    _add_matrix_args(p)
    p.add_argument("--k", type=_positive_int, default=10, help="target rank")
    p.add_argument("--c", type=float, default=1.0, help="schedule constant")
    p.add_argument("--stream", type=_u64, default=0, help="sketch substream index")
    p.add_argument("--reorth", type=_positive_int, default=1,
                   help="QR re-orthonormalisation period")
    p.add_argument("--exact-residual", action="store_true",
                   help="measure the residual with the Jacobi SVD instead of power iteration")
    p.add_argument("--out", default="-", help="CSV output file (default stdout)")


def _add_single_args(p):
    _add_trial_args(p)
    p.add_argument("--eps", type=float, default=0.25, help="accuracy parameter")
    p.add_argument("--t", type=_positive_int, default=None,
                   help="explicit iteration count (default from the schedule)")
    p.add_argument("--seed", type=_u64, default=0, help="sketch seed")
    p.add_argument("--spectrum", type=_spectrum, default=parse_spectrum("geometric"),
                   help="kind[:key=value,...], e.g. geometric:ratio=0.9 or custom:3,2,1")
    p.add_argument("--matrix", default=None, help="read A from a matrix text file")


def build_parser():
    parser = _Parser(prog="gapfree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a synthetic matrix with a prescribed spectrum")
    _add_matrix_args(gen)
    gen.add_argument("--k", type=_positive_int, default=10,
                     help="rank used by k-dependent spectrum defaults")
    gen.add_argument("--spectrum", type=_spectrum, default=parse_spectrum("geometric"))
    gen.add_argument("--out", default="-", help="matrix file (default stdout)")

    run = sub.add_parser("run", help="run one trial and print its CSV row")
    _add_single_args(run)
    run.add_argument("--trace", action="store_true", help="fill the proof-trace columns")

    tr = sub.add_parser("trace", help="run one traced trial with a verbose inequality report")
    _add_single_args(tr)
    tr.add_argument("--report", default=None, help="write the report here instead of stderr")

    sw = sub.add_parser("sweep", help="grid over spectra x epsilon x t-multiplier x seeds")
    _add_trial_args(sw)
    sw.add_argument("--spectrum", type=_spectrum, action="append", default=None,
                    help="repeatable; default: flat, geometric, step, zero-gap-at-k")
    sw.add_argument("--eps", type=float, nargs="+", default=[0.25])
    sw.add_argument("--t-mult", type=float, nargs="+", default=[1.0],
                    help="multipliers of the scheduled t (0 forces t = 1)")
    sw.add_argument("--seeds", type=_positive_int, default=100, help="number of seeds")
    sw.add_argument("--seed-start", type=_u64, default=0)
    sw.add_argument("--trace", action="store_true")
    sw.add_argument("--summary", default=None, help="write per-cell summary CSV here")
    sw.add_argument("--no-block-condition", action="store_true",
                    help="skip the oracle SVD used for block-condition medians")
    return parser


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


def _single(args, traced):
    matrix = read_matrix(args.matrix) if args.matrix else None
    m = args.m or args.n
    a, sigma, label = build_matrix(args.spectrum, args.n, m, args.k, args.matrix_seed, matrix)
    reports = []
    record = trial_on_matrix(a, sigma, label, args.k, args.eps, args.c, args.seed,
                             args.stream, args.t, traced, args.reorth, args.exact_residual,
                             reports=reports)
    _emit(args.out, format_records([record]))
    if args.command == "trace":
        text = reports[0].render() + "\n" if reports else f"trace failed: {record.status}\n"
        if args.report:
            _emit(args.report, text)
        else:
            sys.stderr.write(text)
    return EXIT_OK if record.bound_ok else EXIT_ALL_FAILED


def _dispatch(args):
    if args.command == "gen":
        a, _, _ = build_matrix(args.spectrum, args.n, args.m or args.n, args.k,
                               args.matrix_seed)
        _emit(args.out, format_matrix(a))
        return EXIT_OK
    if args.command in ("run", "trace"):
        return _single(args, traced=args.command == "trace" or args.trace)
    spectra = args.spectrum or [parse_spectrum(s) for s in
                                ("flat", "geometric", "step", "zero-gap-at-k")]
    result = sweep(spectra, range(args.seed_start, args.seed_start + args.seeds),
                   args.eps, args.t_mult, n=args.n, m=args.m or args.n, k=args.k,
                   c=args.c, stream=args.stream, matrix_seed=args.matrix_seed,
                   with_trace=args.trace, reorth_period=args.reorth,
                   exact_residual=args.exact_residual,
                   block_condition=not args.no_block_condition)
    _emit(args.out, format_records(result.records))
    if args.summary:
        _emit(args.summary, format_summary(result.summary))
    return EXIT_ALL_FAILED if result.all_failed else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except OSError as exc:
        print(f"gapfree: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContractError as exc:
        print(f"gapfree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
