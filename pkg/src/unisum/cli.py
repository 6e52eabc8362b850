"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 usage, data or budget error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checkpoint import Checkpoint, CheckpointError
from .constants import CONSTANTS
from .identities import (
    DEFAULT_BUDGET,
    FAILED,
    DependencyError,
    evaluate,
    extract_constant,
    lookup,
    verify,
)
from .numerics import least_squares_fit
from .primes import MAX_LIMIT, RangeError, prime_blocks
from .sequences import SequenceSpec
from .stream import BudgetError, PrimeRun
from .tables import COLUMNS, TABLE_IDS, TableReport, row_values, table
from .zeta_zeros import DATA_ENV, ZeroDataError, get_zeros, load_zeros, zero_density_check

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


class UsageError(Exception):
    pass


def parse_scale(text: str) -> int:
    """Integers written as 10000000, 1e7, 10^7 or 2**24."""
    t = text.strip().replace("_", "")
    for op in ("**", "^"):
        if op in t:
            base, _, exp = t.partition(op)
            try:
                return int(base) ** int(exp)
            except ValueError:
                break
    try:
        value = Decimal(t)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not an integer scale: {text!r}") from None
    if value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"scale must be an integer: {text!r}")
    return int(value)


def _param(text: str) -> tuple[str, float]:
    key, eq, value = text.partition("=")
    if not eq:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key!r} needs a number") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seq", default="lcg", help="sequence spec, e.g. lcg:A=1203248318,C=2147483647,seed=1")
    common.add_argument("--seed", type=int, help="override the LCG seed")
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--out", type=Path, help="write output here instead of stdout")
    common.add_argument("--budget", type=parse_scale, help=f"largest x or n allowed (default {DEFAULT_BUDGET})")
    common.add_argument("--unlock-large", action="store_true", help="allow budgets above the default")
    common.add_argument("--threads", type=int, default=1, help="parallel identity verifications")
    common.add_argument("--data-dir", type=Path, help=f"directory holding zero tables (or set ${DATA_ENV})")

    p = argparse.ArgumentParser(prog="unisum", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("primes", parents=[common], help="prime statistics at x")
    s.add_argument("--x", type=parse_scale, nargs="+", required=True)

    s = sub.add_parser("table", parents=[common], help="reproduce one of the tables I..V")
    s.add_argument("table_id", type=str.upper, choices=TABLE_IDS)
    s.add_argument("--x", type=parse_scale, nargs="+", required=True)
    s.add_argument("--index-mode", action="store_true", help="table V rows are prime indices, not bounds")
    s.add_argument("--checkpoint", type=Path)
    s.add_argument("--checkpoint-every", type=parse_scale)
    s.add_argument("--halt-at", type=parse_scale, help="stop after checkpointing at this x (resumability drills)")

    s = sub.add_parser("verify", parents=[common], help="verify identities")
    s.add_argument("ids", nargs="+", metavar="id")
    scale = s.add_mutually_exclusive_group()
    scale.add_argument("--n", type=parse_scale, dest="scale")
    scale.add_argument("--x", type=parse_scale, dest="scale")
    s.add_argument("--param", type=_param, action="append", default=[], help="identity parameter key=value")
    zeros = s.add_mutually_exclusive_group()
    zeros.add_argument("--zeros", type=Path, help="zero ordinate file for E8")
    zeros.add_argument("--synthetic-zeros", action="store_true")

    s = sub.add_parser("extract", parents=[common], help="estimate an identity's limiting constant")
    s.add_argument("id")
    scale = s.add_mutually_exclusive_group(required=True)
    scale.add_argument("--n", type=parse_scale, nargs="+", dest="scales")
    scale.add_argument("--x", type=parse_scale, nargs="+", dest="scales")
    s.add_argument("--window", type=int, default=2)

    s = sub.add_parser("fit", parents=[common], help="(R, L) points for the product/sum identity and their line fit")
    s.add_argument("--x", type=parse_scale, nargs="+", default=[10**6, 10**7, 10**8])

    sub.add_parser("constants", parents=[common], help="print the constants table")

    s = sub.add_parser("zeros", parents=[common], help="zero table utilities")
    s.add_argument("action", choices=("check",))
    s.add_argument("--zeros", type=Path)
    s.add_argument("--max-count", type=parse_scale)

    s = sub.add_parser("resume", parents=[common], help="continue a checkpointed table run")
    s.add_argument("checkpoint", type=Path)
    s.add_argument("--table", dest="table_id", type=str.upper, choices=TABLE_IDS)
    s.add_argument("--checkpoint-every", type=parse_scale)
    return p


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------


def _budget(args) -> int:
    if args.budget is None:
        return MAX_LIMIT if args.unlock_large else DEFAULT_BUDGET
    if args.budget > DEFAULT_BUDGET and not args.unlock_large:
        raise UsageError(f"budget above {DEFAULT_BUDGET} needs --unlock-large")
    return args.budget


def _seq(args) -> SequenceSpec:
    spec = SequenceSpec.parse(args.seq)
    if args.seed is not None:
        if spec.kind != "lcg":
            raise UsageError("--seed applies to lcg sequences only")
        spec = spec.with_seed(args.seed)
    return spec


def _emit(args, text: str) -> None:
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _records(args, columns: Sequence[str], rows: list[list], title: str = "") -> str:
    if args.format == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    if args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        return buf.getvalue()
    cells = [list(columns)] + [[_cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    if title:
        buf.write(title + "\n")
    for r in cells:
        buf.write("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n")
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.13f}"
    return str(v)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_primes(args) -> int:
    budget = _budget(args)
    xs = sorted(set(args.x))
    if xs[-1] > budget:
        raise BudgetError(f"x = {xs[-1]} exceeds the budget {budget}")
    rows = []
    want = set(xs)
    for blk in prime_blocks(xs[-1], stops=xs):
        st = blk.state
        if st.x in want:
            rows.append([st.x, st.pi_x, st.last_prime, st.theta_x, st.psi_x, st.mertens_q])
    cols = ("x", "pi_x", "last_prime", "theta_x", "psi_x", "mertens_q")
    _emit(args, _records(args, cols, rows))
    return EXIT_OK


def cmd_table(args) -> int:
    report = table(
        args.table_id,
        args.x,
        _seq(args),
        budget=_budget(args),
        index_mode=args.index_mode,
        checkpoint=args.checkpoint,
        checkpoint_every=args.checkpoint_every,
        halt_at=args.halt_at,
    )
    if args.format == "csv":
        text = report.to_csv()
    elif args.format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        text = report.to_text()
    _emit(args, text)
    if report.partial:
        print(f"unisum: {report.message}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_verify(args) -> int:
    for identity in args.ids:
        lookup(identity)  # reject unknown ids before any compute
    seq = _seq(args)
    budget = _budget(args)
    params = dict(args.param)
    zeros = "synthetic" if args.synthetic_zeros else args.zeros

    def one(identity: str):
        return verify(identity, args.scale, seq, params=params or None, zeros=zeros, budget=budget)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        reports = list(pool.map(one, args.ids))
    if args.format == "json":
        payload = [r.to_dict() for r in reports]
        _emit(args, json.dumps(payload[0] if len(payload) == 1 else payload, indent=2) + "\n")
    else:
        cols = ("id", "scale", "lhs", "rhs", "diff", "verdict")
        rows = [[r.id, r.scale, r.lhs, r.rhs, r.diff, r.verdict] for r in reports]
        text = _records(args, cols, rows)
        if args.format == "text":
            for r in reports:
                trend = ", ".join(f"{s}: {d:.6g}" for s, d in r.trend)
                text += f"{r.id} trend  {trend}\n"
        _emit(args, text)
    return EXIT_FAILED if any(r.verdict == FAILED for r in reports) else EXIT_OK


def cmd_extract(args) -> int:
    est = extract_constant(args.id, args.scales, _seq(args), window=args.window, budget=_budget(args))
    cols = ("id", "estimate", "uncertainty", "window")
    _emit(args, _records(args, cols, [[args.id, est.estimate, est.uncertainty, est.window]]))
    return EXIT_OK


def cmd_fit(args) -> int:
    points = evaluate("E7.6", args.x, _seq(args), budget=_budget(args))
    fit = least_squares_fit([(p.extras["R"], p.extras["L"]) for p in points])
    rows = [[p.scale, p.extras["R"], p.extras["L"]] for p in points]
    if args.format == "json":
        text = json.dumps(
            {
                "points": [dict(zip(("x", "R", "L"), r)) for r in rows],
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual_rms": fit.residual_rms,
                "exp_gamma_minus_m": CONSTANTS.exp_gamma_minus_m,
            },
            indent=2,
        ) + "\n"
    else:
        text = _records(args, ("x", "R", "L"), rows)
        if args.format == "text":
            text += (
                f"L = {fit.slope:.10f} R + {fit.intercept:.10f}  (rms {fit.residual_rms:.3g}; "
                f"e^(gamma-M) = {CONSTANTS.exp_gamma_minus_m:.10f})\n"
            )
    _emit(args, text)
    return EXIT_OK


def cmd_constants(args) -> int:
    rows = [[k, float(v)] for k, v in CONSTANTS.as_dict().items()]
    _emit(args, _records(args, ("name", "value"), rows))
    return EXIT_OK


def cmd_zeros(args) -> int:
    if args.zeros is not None:
        tbl = load_zeros(args.zeros, args.max_count)
    else:
        tbl = get_zeros(args.max_count or 10**4, allow_synthetic=False)
    dev = zero_density_check(tbl)
    row = [tbl.source, tbl.count, float(tbl.ordinates[0]), float(tbl.ordinates[-1]), dev]
    _emit(args, _records(args, ("source", "count", "first", "last", "max_density_deviation"), [row]))
    return EXIT_OK


def cmd_resume(args) -> int:
    ck = Checkpoint.load(args.checkpoint)
    label = ck.label
    if not label.startswith("table:"):
        raise CheckpointError(f"checkpoint label {label!r} is not a table run")
    table_id = label.split(":", 1)[1]
    if args.table_id is not None and args.table_id != table_id:
        raise UsageError(f"checkpoint belongs to table {table_id}, not {args.table_id}")
    if ck.target > _budget(args):
        raise BudgetError(f"checkpoint target {ck.target} exceeds the budget")
    run = PrimeRun.from_checkpoint(ck)
    if not run.done:
        run.run([], checkpoint_path=args.checkpoint, checkpoint_every=args.checkpoint_every)
    snap = run.snapshot()
    report = TableReport(table_id, COLUMNS[table_id], [row_values(table_id, snap)])
    if args.format == "csv":
        text = report.to_csv()
    elif args.format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        text = report.to_text()
    _emit(args, text)
    return EXIT_OK


COMMANDS = {
    "primes": cmd_primes,
    "table": cmd_table,
    "verify": cmd_verify,
    "extract": cmd_extract,
    "fit": cmd_fit,
    "constants": cmd_constants,
    "zeros": cmd_zeros,
    "resume": cmd_resume,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    if args.data_dir is not None:
        os.environ[DATA_ENV] = str(args.data_dir)
    try:
        return COMMANDS[args.command](args)
    except (
        UsageError,
        KeyError,
        ValueError,
        BudgetError,
        CheckpointError,
        DependencyError,
        ZeroDataError,
        RangeError,
    ) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"unisum: error: {msg}", file=sys.stderr)
        return EXIT_ERROR
