"""Floating-point infrastructure: compensated sums, quadrature, special
functions, line fits and tail-constant extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


class AccuracyError(ArithmeticError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate is kept on ``partial``.
    """

    def __init__(self, message: str, partial: float, achieved: float):
        super().__init__(message)
        self.partial = partial
        self.achieved = achieved


class RankError(ValueError):
    pass


# --------------------------------------------------------------------------
# Compensated summation
# --------------------------------------------------------------------------


@dataclass
class CompensatedAccumulator:
    """Neumaier running sum. ``value`` is the corrected total."""

    sum: float = 0.0
    compensation: float = 0.0

    def add(self, x: float) -> "CompensatedAccumulator":
        s = self.sum
        t = s + x
        if abs(s) >= abs(x):
            self.compensation += (s - t) + x
        else:
            self.compensation += (x - t) + s
        self.sum = t
        return self

    def add_many(self, values: Iterable[float]) -> "CompensatedAccumulator":
        for v in values:
            self.add(v)
        return self

    def add_array(self, values: np.ndarray) -> "CompensatedAccumulator":
        # fsum of a block is correctly rounded; one compensated add per block
        if len(values):
            self.add(math.fsum(values))
        return self

    def merge(self, other: "CompensatedAccumulator") -> "CompensatedAccumulator":
        self.add(other.sum)
        self.add(other.compensation)
        return self

    @property
    def value(self) -> float:
        return self.sum + self.compensation

    def copy(self) -> "CompensatedAccumulator":
        return CompensatedAccumulator(self.sum, self.compensation)

    def __float__(self) -> float:
        return self.value


def comp_add(acc: CompensatedAccumulator, x: float) -> CompensatedAccumulator:
    """Functional form of :meth:`CompensatedAccumulator.add` (returns a new value)."""
    return acc.copy().add(x)


def compensated_cumsum(values: np.ndarray, carry: CompensatedAccumulator) -> np.ndarray:
    """Running totals ``carry + values[:i+1]`` for every i; advances ``carry``.

    The block is summed with np.cumsum relative to the carried total, so the
    rounding error of a block is bounded by its own (small) magnitude rather
    than by the size of the carry.
    """
    if len(values) == 0:
        return np.empty(0, dtype=np.float64)
    local = np.cumsum(values, dtype=np.float64)
    out = (local + carry.compensation) + carry.sum
    carry.add_array(values)
    return out


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

_GK_NODES = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_GK_WEIGHTS = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_G_WEIGHTS = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _safe_eval(f: Callable[[float], float], x: float, a: float, b: float) -> float:
    # removable singularities at an endpoint are patched by a one-sided limit
    try:
        y = float(f(x))
    except (ZeroDivisionError, ValueError, OverflowError):
        y = math.nan
    if math.isfinite(y):
        return y
    h = 1e-9 * max(1.0, abs(b - a))
    x2 = x + h if abs(x - a) <= abs(b - x) else x - h
    return float(f(x2))


def _simpson_segment(f, a, fa, m, fm, b, fb):
    h = b - a
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = h / 12.0 * (fa + 4.0 * flm + fm)
    right = h / 12.0 * (fm + 4.0 * frm + fb)
    return lm, flm, rm, frm, left, right


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> float:
    """Classic adaptive Simpson with Richardson correction.

    Raises AccuracyError (carrying the partial result) if some interval
    hits ``max_depth`` before meeting its share of the tolerance.
    """
    if a == b:
        return 0.0

    def fe(x):
        return _safe_eval(f, x, a, b)

    fa, fb = fe(a), fe(b)
    m = 0.5 * (a + b)
    fm = fe(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = CompensatedAccumulator()
    failed = False
    stack = [(a, fa, m, fm, b, fb, whole, tol, 0)]
    while stack:
        a0, fa0, m0, fm0, b0, fb0, s0, tol0, depth = stack.pop()
        lm, flm, rm, frm, left, right = _simpson_segment(fe, a0, fa0, m0, fm0, b0, fb0)
        delta = left + right - s0
        if abs(delta) <= 15.0 * tol0 or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * tol0:
                failed = True
            total.add(left + right + delta / 15.0)
            continue
        stack.append((m0, fm0, rm, frm, b0, fb0, right, 0.5 * tol0, depth + 1))
        stack.append((a0, fa0, lm, flm, m0, fm0, left, 0.5 * tol0, depth + 1))
    if failed:
        raise AccuracyError("adaptive Simpson hit max depth", total.value, math.nan)
    return total.value


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fc = f(c)
    kron = _GK_WEIGHTS[7] * fc
    gauss = _G_WEIGHTS[3] * fc
    resabs = abs(kron)
    fv1, fv2 = [], []
    for j in range(7):
        dx = h * _GK_NODES[j]
        y1, y2 = f(c - dx), f(c + dx)
        fv1.append(y1)
        fv2.append(y2)
        kron += _GK_WEIGHTS[j] * (y1 + y2)
        resabs += _GK_WEIGHTS[j] * (abs(y1) + abs(y2))
        if j % 2 == 1:
            gauss += _G_WEIGHTS[j // 2] * (y1 + y2)
    mean = 0.5 * kron
    resasc = _GK_WEIGHTS[7] * abs(fc - mean)
    for j in range(7):
        resasc += _GK_WEIGHTS[j] * (abs(fv1[j] - mean) + abs(fv2[j] - mean))
    resasc *= abs(h)
    err = abs((kron - gauss) * h)
    # QUADPACK error scaling; pessimistic for non-smooth integrands
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    eps_floor = 50.0 * 2.2e-16 * resabs * abs(h)
    if eps_floor > err:
        err = eps_floor
    return kron * h, err


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_intervals: int = 2000,
    rel_tol: float = 0.0,
) -> float:
    """Adaptive quadrature of ``f`` over [a, b].

    Stops once the error estimate is below ``max(tol, rel_tol * |result|)``.

    Globally adaptive Gauss-Kronrod (7/15) bisection; the interior nodes
    never touch the endpoints, so integrable endpoint singularities such as
    1/sqrt(1-x) or removable ones such as atan(x)**2/x are handled without
    special casing. Infinite limits are mapped onto a finite interval.
    """
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, tol, max_intervals, rel_tol)
    if math.isinf(a) or math.isinf(b):
        return _integrate_infinite(f, a, b, tol, max_intervals, rel_tol)

    def fe(x):
        return _safe_eval(f, x, a, b)

    est, err = _gk15(fe, a, b)
    intervals = [(err, a, b, est)]
    total_err = err

    def target() -> float:
        return max(tol, rel_tol * abs(math.fsum(iv[3] for iv in intervals)))

    while total_err > target():
        if len(intervals) >= max_intervals:
            total = math.fsum(iv[3] for iv in intervals)
            raise AccuracyError(
                f"quadrature did not converge: error {total_err:.3g} > tol {tol:.3g}",
                total,
                total_err,
            )
        # bisect the worst interval
        k = max(range(len(intervals)), key=lambda i: intervals[i][0])
        e0, a0, b0, _ = intervals.pop(k)
        m0 = 0.5 * (a0 + b0)
        if m0 <= a0 or m0 >= b0:
            intervals.append((0.0, a0, b0, _))
            total_err = math.fsum(iv[0] for iv in intervals)
            continue
        left, el = _gk15(fe, a0, m0)
        right, er = _gk15(fe, m0, b0)
        intervals.append((el, a0, m0, left))
        intervals.append((er, m0, b0, right))
        total_err = math.fsum(iv[0] for iv in intervals)
    return math.fsum(iv[3] for iv in intervals)


def _integrate_infinite(f, a, b, tol, max_intervals, rel_tol):
    # x = t / (1 - t^2) maps (-1, 1) onto the real line
    def h(t):
        d = 1.0 - t * t
        return f(t / d) * (1.0 + t * t) / (d * d)

    lo = -1.0 if math.isinf(a) else _inverse_map(a)
    hi = 1.0 if math.isinf(b) else _inverse_map(b)
    return integrate(h, lo, hi, tol, max_intervals, rel_tol)


def _inverse_map(x: float) -> float:
    if x == 0.0:
        return 0.0
    return (-1.0 + math.sqrt(1.0 + 4.0 * x * x)) / (2.0 * x)


# --------------------------------------------------------------------------
# Special functions
# --------------------------------------------------------------------------


def upper_incomplete_gamma(b: float, z: float) -> float:
    """Gamma(b, z) = integral from z to infinity of t**(b-1) e**-t dt.

    Series for the lower function when z < b + 1, Lentz continued fraction
    otherwise. Relative error is around 1e-14 for moderate arguments.
    """
    if b <= 0:
        raise ValueError("upper_incomplete_gamma requires b > 0")
    if z < 0:
        raise ValueError("upper_incomplete_gamma requires z >= 0")
    if z == 0:
        return math.gamma(b)
    if z < b + 1.0:
        # lower gamma by series: z^b e^-z sum z^k / (b (b+1) ... (b+k))
        term = 1.0 / b
        total = term
        k = 0
        while abs(term) > abs(total) * 1e-17 and k < 10_000:
            k += 1
            term *= z / (b + k)
            total += term
        lower = total * math.exp(b * math.log(z) - z)
        return math.gamma(b) - lower
    # continued fraction (modified Lentz)
    tiny = 1e-300
    bb = z + 1.0 - b
    c = 1.0 / tiny
    d = 1.0 / bb
    h = d
    for i in range(1, 10_000):
        an = -i * (i - b)
        bb += 2.0
        d = an * d + bb
        if abs(d) < tiny:
            d = tiny
        c = bb + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(b * math.log(z) - z) * h


# --------------------------------------------------------------------------
# Fitting and extrapolation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual_rms: float


def least_squares_fit(points: Sequence[tuple[float, float]]) -> FitResult:
    """Ordinary least-squares line y = slope * x + intercept."""
    if len(points) < 2:
        raise RankError("need at least two points")
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    xm, ym = xs.mean(), ys.mean()
    dx = xs - xm
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0 or np.all(xs == xs[0]):
        raise RankError("all x values are equal")
    slope = float(np.dot(dx, ys - ym)) / sxx
    intercept = float(ym - slope * xm)
    resid = ys - (slope * xs + intercept)
    rms = float(math.sqrt(np.mean(resid * resid)))
    return FitResult(slope, intercept, rms)


@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    uncertainty: float
    window: int

    @property
    def converged(self) -> bool:
        return self.uncertainty <= 1e-3 * max(1.0, abs(self.estimate))


def tail_constant(diffs: Sequence[tuple[float, float]], window: int) -> TailEstimate:
    """Windowed mean of the last ``window`` values; spread is max - min."""
    if window < 1:
        raise ValueError("window must be positive")
    if len(diffs) < window:
        raise ValueError(f"need at least {window} points, got {len(diffs)}")
    xs = [d[0] for d in diffs]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x values must be strictly increasing")
    tail = [d[1] for d in diffs[-window:]]
    return TailEstimate(math.fsum(tail) / window, max(tail) - min(tail), window)
