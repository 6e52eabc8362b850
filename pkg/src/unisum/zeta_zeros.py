"""Loading and sanity-checking tables of zeta zero ordinates."""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

DATA_ENV = "UNISUM_DATA_DIR"
DEFAULT_FILE = "zeros_10000.txt"
FIRST_ZERO_RANGE = (14.0, 14.2)


class ZeroParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ZeroDataError(ValueError):
    pass


class LowCountWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ZeroTable:
    ordinates: np.ndarray
    source: str
    synthetic: bool = False

    @property
    def count(self) -> int:
        return len(self.ordinates)

    def __len__(self) -> int:
        return len(self.ordinates)


def load_zeros(path: str | Path, max_count: Optional[int] = None) -> ZeroTable:
    """Read one ordinate per line, optionally preceded by an index column.

    Blank lines and ``#`` comments are skipped. The first ordinate must be
    gamma_1 and the values must increase strictly.
    """
    values: list[float] = []
    path = Path(path)
    try:
        fh = path.open()
    except OSError as exc:
        raise ZeroDataError(f"cannot open zero table {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            if len(tokens) not in (1, 2):
                raise ZeroParseError(lineno, f"expected 1 or 2 columns, got {len(tokens)}")
            try:
                g = float(tokens[-1])
            except ValueError:
                raise ZeroParseError(lineno, f"not a number: {tokens[-1]!r}") from None
            if len(tokens) == 2:
                try:
                    idx = int(tokens[0])
                except ValueError:
                    raise ZeroParseError(lineno, f"bad index column: {tokens[0]!r}") from None
                if idx != len(values) + 1:
                    raise ZeroParseError(lineno, f"index {idx} out of sequence")
            if not math.isfinite(g) or g <= 0:
                raise ZeroParseError(lineno, f"ordinate must be positive and finite, got {g}")
            if not values and not FIRST_ZERO_RANGE[0] < g < FIRST_ZERO_RANGE[1]:
                raise ZeroParseError(lineno, f"first ordinate {g} is not the first zero")
            if values and g <= values[-1]:
                raise ZeroParseError(lineno, "ordinates must increase strictly")
            values.append(g)
            if max_count is not None and len(values) >= max_count:
                break
    if not values:
        raise ZeroDataError(f"zero table {path} is empty")
    return ZeroTable(np.array(values), str(path))


def synthetic_zeros(count: int, crude: bool = False) -> ZeroTable:
    """Stand-in ordinates for offline runs.

    The default solves N0(T) = n - 1/2 for the smooth counting function N0
    by Newton's method, so it has the right density. ``crude=True`` gives
    2 pi n / ln(n + 2), which only has the leading-order growth.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    n = np.arange(1, count + 1, dtype=np.float64)
    if crude:
        return ZeroTable(2 * math.pi * n / np.log(n + 2), "synthetic:crude", True)
    target = n - 0.5
    t = 2 * math.pi * np.maximum(target, 1.0) / np.log(np.maximum(target, 2.0)) + 15.0
    for _ in range(50):
        f = smooth_count(t) - target
        t = t - f / (np.log(t / (2 * math.pi)) / (2 * math.pi))
        if np.max(np.abs(f)) < 1e-12 * count:
            break
    return ZeroTable(t, "synthetic", True)


def smooth_count(t):
    """(T / 2pi) ln(T / 2pi e) + 7/8."""
    t = np.asarray(t, dtype=np.float64)
    return t / (2 * math.pi) * np.log(t / (2 * math.pi * math.e)) + 0.875


def zero_density_check(table: ZeroTable, start: int = 100) -> float:
    """max over n >= start of |N0(gamma_n) - (n - 1/2)| / n.

    At T = gamma_n the counting function steps from n - 1 to n, so the
    midpoint n - 1/2 is the fair comparison. Tables shorter than ``start``
    are checked on every entry, with a warning.
    """
    g = table.ordinates
    n = np.arange(1, len(g) + 1, dtype=np.float64)
    if len(g) < start:
        warnings.warn(f"only {len(g)} ordinates; density check is not meaningful", LowCountWarning)
        if len(g) == 1:
            return 0.0
        mask = np.ones(len(g), dtype=bool)
    else:
        mask = n >= start
    dev = np.abs(smooth_count(g[mask]) - (n[mask] - 0.5)) / n[mask]
    return float(np.max(dev))


def default_zero_path() -> Optional[Path]:
    """Bundled or $UNISUM_DATA_DIR zero table, if present."""
    candidates = []
    env = os.environ.get(DATA_ENV)
    if env:
        candidates.append(Path(env) / DEFAULT_FILE)
    candidates.append(Path(__file__).parent / "data" / DEFAULT_FILE)
    for c in candidates:
        if c.is_file():
            return c
    return None


def get_zeros(count: int, path: Optional[str | Path] = None, allow_synthetic: bool = True) -> ZeroTable:
    """Genuine zeros when available, else the synthetic stand-in."""
    path = Path(path) if path is not None else default_zero_path()
    if path is not None:
        table = load_zeros(path, max_count=count)
        if table.count >= count:
            return table
        if not allow_synthetic:
            raise ZeroDataError(f"{path} holds {table.count} zeros, need {count}")
    elif not allow_synthetic:
        raise ZeroDataError(f"no zero table found; set {DATA_ENV}")
    warnings.warn("using synthetic zero ordinates", LowCountWarning)
    return synthetic_zeros(count)
