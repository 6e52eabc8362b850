"""Streaming evaluation of weighted sums of the form sum d_r g(S_r) f(a_r).

All long sums go through compensated accumulators and are evaluated in
numpy blocks; the functions ``g`` and ``f`` must therefore accept numpy
arrays (plain numpy ufunc expressions do) as well as scalars, since the
same callables are handed to the quadrature routine.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .numerics import (
    CompensatedAccumulator,
    TailEstimate,
    compensated_cumsum,
    integrate,
    tail_constant,
)
from .primes import HarmonicState, PrimeAccumulators, PrimeBlock, prime_blocks
from .sequences import DEFAULT_SEQUENCE, SequenceSpec

Fn = Callable[[np.ndarray], np.ndarray]

BLOCK = 1 << 20
MATERIALIZE_LIMIT = 1 << 24


class DivergenceWarning(RuntimeWarning):
    pass


class BoundaryWarning(RuntimeWarning):
    pass


def one(x):
    return np.ones_like(np.asarray(x, dtype=np.float64)) if np.ndim(x) else 1.0


# --------------------------------------------------------------------------
# Weights
# --------------------------------------------------------------------------


@dataclass
class WeightBlock:
    r: np.ndarray
    d: np.ndarray
    s: np.ndarray


class WeightStream:
    """Weights d_r (vectorised in r) with their running partial sums S_r."""

    def __init__(self, weight: Fn, name: str = "custom", positive: bool = True):
        self.weight = weight
        self.name = name
        self.positive = positive

    @classmethod
    def ones(cls) -> "WeightStream":
        return cls(lambda r: np.ones(len(r)), "1")

    @classmethod
    def harmonic(cls) -> "WeightStream":
        return cls(lambda r: 1.0 / r, "1/r")

    @classmethod
    def power(cls, exponent: float) -> "WeightStream":
        return cls(lambda r: r**exponent, f"r^{exponent:g}")

    def blocks(self, n: int, block: int = BLOCK, checkpoints: Sequence[int] = ()) -> Iterator[WeightBlock]:
        """Blocks covering r = 1..n; every checkpoint ends a block."""
        carry = CompensatedAccumulator()
        cuts = sorted({c for c in checkpoints if 0 < c < n} | {n})
        start = 1
        for cut in cuts:
            while start <= cut:
                stop = min(start + block - 1, cut)
                r = np.arange(start, stop + 1, dtype=np.float64)
                d = np.asarray(self.weight(r), dtype=np.float64)
                if self.positive and np.any(d <= 0):
                    raise ValueError(f"weights {self.name} are not positive")
                s = compensated_cumsum(d, carry)
                yield WeightBlock(r, d, s)
                start = stop + 1

    def partial_sums(self, n: int) -> np.ndarray:
        return np.concatenate([b.s for b in self.blocks(n)]) if n > 0 else np.empty(0)

    def check_growth(self, s_half: float, s_n: float) -> None:
        if s_n <= s_half * (1.0 + 1e-9):
            warnings.warn(f"partial sums of {self.name} appear to stall", DivergenceWarning, stacklevel=3)


# --------------------------------------------------------------------------
# Master theorem sums
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MasterSumResult:
    n: int
    lhs: float
    rhs: float
    ratio: float
    n_terms_used: int
    s_first: float = math.nan
    s_last: float = math.nan

    @property
    def ratio_defined(self) -> bool:
        return self.rhs != 0 and math.isfinite(self.ratio)


def _ratio(lhs: float, rhs: float) -> float:
    return lhs / rhs if rhs != 0 else math.nan


def master_sum(
    d: WeightStream,
    g: Fn,
    f: Optional[Fn],
    a: Optional[SequenceSpec],
    n: int,
    *,
    lower: Optional[float] = None,
    upper: Optional[float] = None,
    tol: float = 1e-11,
) -> MasterSumResult:
    """sum_{r<=n} d_r g(S_r) f(a_r) against int_{S_1}^{S_n} g * int_0^1 f.

    ``f=None`` means f = 1 (no sequence is drawn). ``lower``/``upper``
    override the integration limits.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    src = (a or DEFAULT_SEQUENCE).source() if f is not None else None
    lhs = CompensatedAccumulator()
    s_first = math.nan
    s_last = math.nan
    s_half = math.nan
    half = max(n // 2, 1)
    for blk in d.blocks(n, checkpoints=[half]):
        terms = blk.d * g(blk.s)
        if src is not None:
            terms = terms * f(src.take(len(blk.r)))
        lhs.add_array(terms)
        if blk.r[0] == 1:
            s_first = float(blk.s[0])
        if blk.r[-1] == half:
            s_half = float(blk.s[-1])
        s_last = float(blk.s[-1])
    if n > 1:
        d.check_growth(s_half, s_last)
    lo = s_first if lower is None else lower
    hi = s_last if upper is None else upper
    rhs = integrate(g, lo, hi, tol=tol, rel_tol=tol)
    if f is not None:
        rhs *= integrate(f, 0.0, 1.0, tol=tol)
    return MasterSumResult(n, lhs.value, rhs, _ratio(lhs.value, rhs), n, s_first, s_last)


# --------------------------------------------------------------------------
# Equivalence theorem sums
# --------------------------------------------------------------------------


def equivalence_sum(d: WeightStream, f: Fn, n: int, *, include_last: bool = True) -> float:
    """(1/S_n) sum_r d_r f(S_r / S_n), over r <= n (or r < n).

    Prefix sums are materialised up to 2**24 terms; beyond that a first pass
    finds S_n and a second pass evaluates the sum.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    with np.errstate(divide="ignore", invalid="ignore"):
        f_at_one = float(np.asarray(f(np.array([1.0])))[0])
    if include_last and not math.isfinite(f_at_one):
        warnings.warn("f is unbounded at 1; the last term dominates", BoundaryWarning, stacklevel=2)
    acc = CompensatedAccumulator()
    if n <= MATERIALIZE_LIMIT:
        r = np.arange(1, n + 1, dtype=np.float64)
        dr = np.asarray(d.weight(r), dtype=np.float64)
        s = compensated_cumsum(dr, CompensatedAccumulator())
        s_n = float(s[-1])
        m = n if include_last else n - 1
        with np.errstate(divide="ignore"):
            acc.add_array(dr[:m] * f(s[:m] / s_n))
    else:
        s_n = 0.0
        for blk in d.blocks(n):
            s_n = float(blk.s[-1])
        for blk in d.blocks(n):
            keep = blk.r <= (n if include_last else n - 1)
            with np.errstate(divide="ignore"):
                acc.add_array(blk.d[keep] * f(blk.s[keep] / s_n))
    if n > 1:
        d_n = float(np.asarray(d.weight(np.array([float(n)])))[0])
        if (s_n - d_n) / s_n < 0.99:
            warnings.warn("S_{n-1}/S_n is far from 1", BoundaryWarning, stacklevel=2)
    return acc.value / s_n


def riemann_sum(f: Fn, n: int) -> float:
    """(1/n) sum_{r<=n} f(r/n); the unit-weight case of :func:`equivalence_sum`."""
    return equivalence_sum(WeightStream.ones(), f, n)


# --------------------------------------------------------------------------
# Sums restricted to primes
# --------------------------------------------------------------------------


@dataclass
class PrimeContext:
    """Per-block extras requested by prime weights: H_r and a_r by prime index."""

    harmonic: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None


PrimeWeight = Callable[[PrimeBlock, PrimeContext], np.ndarray]


def log_weight(block: PrimeBlock, ctx: PrimeContext) -> np.ndarray:
    return block.logs()


def reciprocal_weight(block: PrimeBlock, ctx: PrimeContext) -> np.ndarray:
    return 1.0 / block.primes.astype(np.float64)


def index_plus_reciprocal_weight(block: PrimeBlock, ctx: PrimeContext) -> np.ndarray:
    return 1.0 / block.index.astype(np.float64) + 1.0 / block.primes.astype(np.float64)


def prime_restricted_sum(
    weight: PrimeWeight,
    g: Fn,
    f: Optional[Fn],
    a: Optional[SequenceSpec],
    x_limit: int,
    *,
    lower: Optional[float] = None,
    tol: float = 1e-11,
) -> MasterSumResult:
    """sum_{p_r <= x} d(p_r) g(S_{p_r}) f(a_r) with S the running sum of d over primes.

    The integral of g starts at S evaluated at the first prime unless
    ``lower`` is given.
    """
    src = (a or DEFAULT_SEQUENCE).source() if f is not None else None
    carry = CompensatedAccumulator()
    lhs = CompensatedAccumulator()
    s_first = math.nan
    count = 0
    for blk in prime_blocks(x_limit):
        if not len(blk):
            continue
        d = weight(blk, PrimeContext())
        s = compensated_cumsum(d, carry)
        if count == 0:
            s_first = float(s[0])
        terms = d * g(s)
        if src is not None:
            terms = terms * f(src.take(len(blk)))
        lhs.add_array(terms)
        count += len(blk)
    if count == 0:
        return MasterSumResult(0, 0.0, 0.0, math.nan, 0)
    s_last = carry.value
    lo = s_first if lower is None else lower
    rhs = integrate(g, lo, s_last, tol=tol, rel_tol=tol)
    if f is not None:
        rhs *= integrate(f, 0.0, 1.0, tol=tol)
    return MasterSumResult(count, lhs.value, rhs, _ratio(lhs.value, rhs), count, s_first, s_last)


# --------------------------------------------------------------------------
# Weighted zeta and generalised Euler constants
# --------------------------------------------------------------------------


def weighted_zeta(d: WeightStream, s: float, n: int) -> float:
    """Partial sum sum_{k<=n} d_k / S_k**s."""
    if n < 1:
        raise ValueError("n must be >= 1")
    acc = CompensatedAccumulator()
    for blk in d.blocks(n):
        acc.add_array(blk.d / blk.s**s)
    return acc.value


@dataclass
class EulerConstantSpec:
    """Ingredients of lim (sum d_r f(a_r) g(S_r) - int f * int_{lower}^{S_n} g).

    ``lower=None`` integrates g from S_1; a number fixes the lower limit.
    ``grid`` defaults to decades up to ``n_max``.
    """

    d: WeightStream
    g: Fn
    n_max: int
    f: Optional[Fn] = None
    seq: SequenceSpec = field(default_factory=lambda: DEFAULT_SEQUENCE)
    lower: Optional[float] = None
    grid: Optional[Sequence[int]] = None
    window: int = 2
    g_antiderivative: Optional[Callable[[float], float]] = None

    def scales(self) -> list[int]:
        if self.grid is not None:
            return sorted(int(v) for v in self.grid)
        out = []
        k = 10
        while k < self.n_max:
            out.append(k)
            k *= 10
        out.append(self.n_max)
        return out


def euler_differences(spec: EulerConstantSpec) -> list[tuple[int, float]]:
    """(n, sum - integral product) at each grid scale, in one streaming pass."""
    scales = spec.scales()
    src = spec.seq.source() if spec.f is not None else None
    f_int = integrate(spec.f, 0.0, 1.0) if spec.f is not None else 1.0
    lhs = CompensatedAccumulator()
    s_first = math.nan
    out = []
    wanted = set(scales)
    for blk in spec.d.blocks(scales[-1], checkpoints=scales):
        terms = blk.d * spec.g(blk.s)
        if src is not None:
            terms = terms * spec.f(src.take(len(blk.r)))
        lhs.add_array(terms)
        if blk.r[0] == 1:
            s_first = float(blk.s[0])
        n = int(blk.r[-1])
        if n in wanted:
            lo = s_first if spec.lower is None else spec.lower
            hi = float(blk.s[-1])
            if spec.g_antiderivative is not None:
                g_int = spec.g_antiderivative(hi) - spec.g_antiderivative(lo)
            else:
                g_int = integrate(spec.g, lo, hi, tol=1e-13, rel_tol=1e-13)
            out.append((n, lhs.value - f_int * g_int))
    return out


def generalized_euler(spec: EulerConstantSpec) -> TailEstimate:
    diffs = euler_differences(spec)
    return tail_constant(diffs, min(spec.window, len(diffs)))


def euler_gamma_spec(n_max: int = 10**7) -> EulerConstantSpec:
    """d = f = 1, g = 1/x: the Euler-Mascheroni constant."""
    return EulerConstantSpec(
        WeightStream.ones(), lambda x: 1.0 / x, n_max, g_antiderivative=math.log
    )


def harmonic_power_spec(a: float, n_max: int = 10**6) -> EulerConstantSpec:
    """d = 1/r, f = 1, g = x**a integrated from 0, so the differences are
    sum_{r<=n} H_r**a / r - H_n**(a+1) / (a+1)."""
    return EulerConstantSpec(
        WeightStream.harmonic(),
        lambda x: x**a,
        n_max,
        lower=0.0,
        g_antiderivative=lambda x: x ** (a + 1) / (a + 1),
    )
