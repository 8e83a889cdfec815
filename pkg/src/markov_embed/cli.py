"""Command-line front end.

Exit codes: 0 pass or embeddable, 2 proven not embeddable, 3 undecided,
1 input, usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .circulant import region_circ3, region_circ4
from .classes3 import region_sym3
from .config import DEFAULT, Tolerances
from .diagnostics import necessary_conditions
from .dispatch import embed
from .errors import EmbeddingError
from .io import dumps, fmt_float, read_matrix
from .matcore import MAX_DIM, MIN_DIM, expm, validate_stochastic
from .verdict import Verdict

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE, EXIT_UNDECIDED = 0, 1, 2, 3
GRID_MAX = {"circ3": 2000, "sym3": 2000, "circ4": 200}
_EXIT = {Verdict.EMBEDDABLE: EXIT_OK, Verdict.NOT_EMBEDDABLE: EXIT_NEGATIVE,
         Verdict.UNDECIDED: EXIT_UNDECIDED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the "proven negative" exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _tolerances(args) -> Tolerances:
    return Tolerances(validation=args.tol)


def _load(args):
    return validate_stochastic(read_matrix(args.path, args.format), args.tol)


def cmd_check(args, out) -> int:
    rep = necessary_conditions(_load(args), _tolerances(args))
    out.write(dumps(rep.to_dict()))
    return EXIT_OK if rep.overall else EXIT_NEGATIVE


def cmd_embed(args, out) -> int:
    rep = embed(_load(args), k_max=args.branch_window, tol=_tolerances(args))
    out.write(dumps(rep.to_dict()))
    return _EXIT[rep.verdict.status]


def _axis(grid: int) -> np.ndarray:
    return np.arange(grid) / grid


def _region_rows(kind: str, grid: int, slice_c: float, tol: Tolerances):
    t = _axis(grid)
    if kind == "circ3":
        x, y = np.meshgrid(t, t, indexing="ij")
        lab = region_circ3(x, y, tol)
        yield from zip(x.ravel(), y.ravel(), lab.ravel())
    elif kind == "sym3":
        a, b = np.meshgrid(t, t, indexing="ij")
        lab = region_sym3(a, b, slice_c, tol)
        for p, q, s in zip(a.ravel(), b.ravel(), lab.ravel()):
            yield p, q, slice_c, s
    else:
        y, z = np.meshgrid(t, t, indexing="ij")
        for x in t:
            # one x-slice at a time keeps memory flat at the largest grid
            lab = region_circ4(x, y, z, tol)
            for q, r, s in zip(y.ravel(), z.ravel(), lab.ravel()):
                yield x, q, r, s


def cmd_region(args, out) -> int:
    if not 1 <= args.grid <= GRID_MAX[args.kind]:
        raise UsageError(f"--grid must lie in [1, {GRID_MAX[args.kind]}] for {args.kind}")
    header = {"circ3": ("x", "y"), "circ4": ("x", "y", "z"), "sym3": ("a", "b", "c")}[args.kind]
    rows = _region_rows(args.kind, args.grid, args.slice_c, _tolerances(args))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((*header, "verdict"))
        for row in rows:
            w.writerow((*(fmt_float(v) for v in row[:-1]), row[-1]))
    return EXIT_OK


def random_generator(rng: np.random.Generator, d: int) -> np.ndarray:
    """Rate matrix with exponential off-diagonal rates, about half of them zero."""
    Q = rng.exponential(1.0 / d, size=(d, d)) * (rng.random((d, d)) < 0.5)
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return Q


def cmd_sample(args, out) -> int:
    if not MIN_DIM <= args.d <= MAX_DIM:
        raise UsageError(f"d must lie in [{MIN_DIM}, {MAX_DIM}]")
    if args.n < 0:
        raise UsageError("n must be non-negative")
    rng = np.random.default_rng(args.seed)
    for i in range(args.n):
        Q = random_generator(rng, args.d)
        M = expm(Q)
        rec = {"index": i, "seed": args.seed, "Q": Q.tolist(), "M": M.tolist()}
        out.write(json.dumps(rec, separators=(",", ":")) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="markov-embed", description="Embeddability of Markov matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def matrix_cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("path", help="matrix file (JSON or CSV)")
        s.add_argument("--tol", type=float, default=DEFAULT.validation)
        s.add_argument("--format", choices=("json", "csv"), default=None,
                       help="input format (default: from suffix or content)")
        return s

    matrix_cmd("check", "run the necessary conditions").set_defaults(func=cmd_check)
    e = matrix_cmd("embed", "decide embeddability and list generators")
    e.add_argument("--branch-window", type=int, default=8, metavar="K")
    e.set_defaults(func=cmd_embed)

    r = sub.add_parser("region", help="rasterise an embeddability region to CSV")
    r.add_argument("kind", choices=("circ3", "circ4", "sym3"))
    r.add_argument("--grid", type=int, default=100)
    r.add_argument("--out", required=True)
    r.add_argument("--slice-c", type=float, default=0.1,
                   help="fixed entry c for the sym3 slice")
    r.add_argument("--tol", type=float, default=DEFAULT.validation)
    r.set_defaults(func=cmd_region)

    s = sub.add_parser("sample", help="emit random (Q, e^Q) pairs as JSON lines")
    s.add_argument("n", type=int)
    s.add_argument("d", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"markov-embed: error: {exc}", file=sys.stderr)
    except (EmbeddingError, OSError) as exc:
        print(f"markov-embed: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
