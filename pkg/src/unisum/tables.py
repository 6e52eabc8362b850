"""Reproduction of the five computation tables from one prime pass."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .constants import CONSTANTS
from .primes import prime_blocks
from .sequences import DEFAULT_SEQUENCE, SequenceSpec
from .stream import PrimeRun, Snapshot

TABLE_IDS = ("I", "II", "III", "IV", "V")
DECIMALS = 13
OVER_BUDGET = "exceeds budget"
HALTED = "halted"

COLUMNS = {
    "I": ("x", "sum_{p<=x} ln p/theta(p)", "difference"),
    "II": ("x", "sum_{p<x} ln p/psi(p)", "difference"),
    "III": ("x", "sum_{p^v<=x} ln p/psi(p)", "difference"),
    "IV": ("x", "sum_{r<=m} e^{M+H_r}/r", "sum_{r<=n} e^{gamma+Q_r}/p_r", "difference"),
    "V": ("p_n", "(1/p_n) sum (1/r+1/p_r) e^{G_r}/(1+a_r^2)", "difference"),
}


@dataclass
class TableReport:
    table_id: str
    columns: tuple[str, ...]
    rows: list[list] = field(default_factory=list)
    partial: bool = False
    message: str = ""

    def formatted_rows(self) -> list[list[str]]:
        return [[_fmt(v) for v in row] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.formatted_rows())
        return buf.getvalue()

    def to_text(self) -> str:
        body = [list(self.columns)] + self.formatted_rows()
        widths = [max(len(r[i]) for r in body if i < len(r)) for i in range(len(self.columns))]
        lines = [f"TABLE {self.table_id}"]
        for r in body:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
        if self.message:
            lines.append(self.message)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "table": self.table_id,
            "columns": list(self.columns),
            "rows": self.rows,
            "partial": self.partial,
            "message": self.message,
        }


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return f"{v:.{DECIMALS}f}"


def row_values(table_id: str, snap: Snapshot) -> list:
    if table_id == "I":
        return [snap.x, *snap.table1()]
    if table_id == "II":
        return [snap.x, *snap.table2()]
    if table_id == "III":
        return [snap.x, *snap.table3()]
    if table_id == "IV":
        _, first, second, diff = snap.table4()
        return [snap.x, first, second, diff]
    if table_id == "V":
        v = snap.table5()
        return [snap.last_prime, v, v - CONSTANTS.pi_exp_gamma_plus_m_over_4]
    raise KeyError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")


def nth_prime(n: int) -> int:
    """p_n by streaming, without keeping the primes."""
    if n < 1:
        raise ValueError("prime index must be >= 1")
    bound = 15 if n < 6 else int(n * (math.log(n) + math.log(math.log(n)))) + 10
    for blk in prime_blocks(bound):
        first = int(blk.index[0]) if len(blk) else 0
        if len(blk) and int(blk.index[-1]) >= n:
            return int(blk.primes[n - first])
    raise AssertionError("prime bound too small")


def table(
    table_id: str,
    rows: Sequence[int],
    seq: SequenceSpec = DEFAULT_SEQUENCE,
    *,
    budget: Optional[int] = None,
    index_mode: bool = False,
    checkpoint: Optional[str | Path] = None,
    checkpoint_every: Optional[int] = None,
    halt_at: Optional[int] = None,
) -> TableReport:
    """Evaluate the requested rows of one table.

    Rows are prime bounds x; with ``index_mode`` (Table V only) they are
    prime indices n and the bound is p_n. Rows above ``budget`` are
    reported with a marker instead of values. ``halt_at`` stops the pass
    early (after checkpointing), leaving later rows marked as halted.
    """
    table_id = table_id.upper()
    if table_id not in TABLE_IDS:
        raise KeyError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")
    if index_mode and table_id != "V":
        raise ValueError("index mode applies to table V only")
    rows = [int(r) for r in rows]
    if not rows or min(rows) < 2:
        raise ValueError("table rows must be integers >= 2")
    report = TableReport(table_id, COLUMNS[table_id])
    over = [r for r in rows if budget is not None and r > budget]
    inside = sorted({r for r in rows if r not in over})
    bounds = {r: (nth_prime(r) if index_mode else r) for r in inside}
    if inside:
        run = PrimeRun(max(bounds.values()), seq, label=f"table:{table_id}")
        snaps = {
            s.x: s
            for s in run.run(
                bounds.values(), checkpoint_path=checkpoint, checkpoint_every=checkpoint_every, halt_at=halt_at
            )
        }
        for r in inside:
            if bounds[r] in snaps:
                report.rows.append(row_values(table_id, snaps[bounds[r]]))
            else:
                report.rows.append([r] + [HALTED] * (len(report.columns) - 1))
                report.partial = True
                report.message = f"run halted at x = {run.primes.x}"
    for r in sorted(over):
        report.rows.append([r] + [OVER_BUDGET] * (len(report.columns) - 1))
    if over:
        report.partial = True
        note = f"{len(over)} row(s) above the budget of {budget} were not computed"
        report.message = f"{report.message}; {note}" if report.message else note
    return report
