"""Generate a zero-ordinate table with mpmath (one ordinate per line).

Used once to produce tests/data/zeros_10000.txt for offline test runs.

    python scripts/gen_zeros.py 10000 tests/data/zeros_10000.txt

``--method zetazero`` calls mpmath.zetazero for every index; it is exact
but takes seconds per zero above n = 5000. ``--method scan`` (the default)
locates sign changes of the Riemann-Siegel Z function with a cheap numpy
approximation and refines each with mpmath.siegelz. The range is bounded
by mpmath.zetazero ordinates, so the count and the last ordinate are
checked. ``--first`` starts at a later index so a partial table can be
extended with ``--append``.
"""
from __future__ import annotations

import argparse
import sys

import mpmath
import numpy as np


def approx_z(t: np.ndarray) -> np.ndarray:
    """Riemann-Siegel Z(t) with the leading remainder term (error ~ t**-0.75)."""
    a = np.sqrt(t / (2 * np.pi))
    big_n = np.floor(a).astype(np.int64)
    p = a - big_n
    theta = t / 2 * np.log(t / (2 * np.pi)) - t / 2 - np.pi / 8 + 1 / (48 * t) + 7 / (5760 * t**3)
    n = np.arange(1, big_n.max() + 1, dtype=np.float64)
    terms = np.cos(theta[:, None] - t[:, None] * np.log(n)[None, :]) / np.sqrt(n)[None, :]
    terms[n[None, :] > big_n[:, None]] = 0.0
    c0 = np.cos(2 * np.pi * (p * p - p - 1 / 16)) / np.cos(2 * np.pi * p)
    sign = np.where(big_n % 2 == 1, 1.0, -1.0)
    return 2 * terms.sum(axis=1) + sign * a**-0.5 * c0


def sign_changes(lo: float, hi: float, step: float) -> list[tuple[float, float, float]]:
    """(a, b, linear root estimate) for every sign change of approx_z on [lo, hi]."""
    out = []
    grid = np.arange(lo, hi + step, step)
    for start in range(0, len(grid), 4096):
        t = grid[start : start + 4097]
        z = approx_z(t)
        idx = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
        for i in idx:
            a, b = t[i], t[i + 1]
            out.append((a, b, a - z[i] * (b - a) / (z[i + 1] - z[i])))
    return out


def refine(a: float, b: float, guess: float) -> mpmath.mpf:
    root = mpmath.findroot(mpmath.siegelz, (mpmath.mpf(guess), mpmath.mpf(guess) + mpmath.mpf("1e-4")))
    if not a - 1e-6 <= root <= b + 1e-6:
        root = mpmath.findroot(mpmath.siegelz, (mpmath.mpf(a), mpmath.mpf(b)), solver="illinois")
    return root


def scan(first: int, count: int) -> list[mpmath.mpf]:
    lo = float(mpmath.zetazero(first - 1).imag) + 1e-6 if first > 1 else 10.0
    last = mpmath.zetazero(count).imag
    hi = float(last) + 1e-6
    want = count - first + 1
    step = 0.05
    while True:
        brackets = []
        for a, b, guess in sign_changes(lo - 0.1, hi + 0.1, step):
            # the approximation is coarse, so settle the two ends on refined roots
            if min(abs(guess - lo), abs(guess - hi)) < 0.1:
                guess = float(refine(a, b, guess))
            if lo < guess <= hi:
                brackets.append((a, b, guess))
        if len(brackets) == want:
            break
        print(f"step {step}: found {len(brackets)} sign changes, need {want}; halving", file=sys.stderr)
        step /= 2
        if step < 1e-4:
            raise SystemExit("could not separate the zeros")
    roots = []
    for k, (a, b, guess) in enumerate(brackets):
        roots.append(refine(a, b, guess))
        if (k + 1) % 500 == 0:
            print(f"{first + k}: {mpmath.nstr(roots[-1], 15)}", file=sys.stderr)
    if abs(roots[-1] - last) > mpmath.mpf("1e-9"):
        raise SystemExit(f"last root {roots[-1]} disagrees with zetazero({count}) = {last}")
    if any(b <= a for a, b in zip(roots, roots[1:])):
        raise SystemExit("roots are not strictly increasing")
    return roots


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("count", type=int)
    ap.add_argument("path")
    ap.add_argument("--first", type=int, default=1)
    ap.add_argument("--method", choices=("scan", "zetazero"), default="scan")
    ap.add_argument("--append", action="store_true")
    args = ap.parse_args()
    mpmath.mp.dps = 20
    if args.method == "scan":
        roots = scan(args.first, args.count)
    else:
        roots = [mpmath.zetazero(n).imag for n in range(args.first, args.count + 1)]
    with open(args.path, "a" if args.append else "w", encoding="utf-8") as fh:
        for t in roots:
            fh.write(f"{mpmath.nstr(t, 15, strip_zeros=False)}\n")


if __name__ == "__main__":
    main()
