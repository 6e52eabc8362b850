"""Segmented prime generation and streaming prime-indexed accumulators.

The hot path is :func:`prime_blocks`, which sieves ``[lo, hi)`` windows with
numpy and hands out per-prime arrays of the running Chebyshev sums so that
callers can evaluate their sums vectorised. :func:`iterate_primes` is the
per-prime callback driver built on top of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .numerics import CompensatedAccumulator, compensated_cumsum

DEFAULT_SEGMENT_SIZE = 1 << 22
MAX_LIMIT = 1 << 63


class RangeError(ValueError):
    pass


@dataclass(frozen=True)
class PrimeSegment:
    lo: int
    hi: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)


@dataclass
class PrimeAccumulators:
    """Running prime statistics for all primes <= ``x``.

    ``theta_x`` and ``mertens_q`` are kept as compensated sums; ``psi_x`` is
    derived from ``theta_x`` plus the exact prime-power correction.
    """

    x: int = 1
    pi_x: int = 0
    theta: CompensatedAccumulator = field(default_factory=CompensatedAccumulator)
    q: CompensatedAccumulator = field(default_factory=CompensatedAccumulator)
    psi_extra: float = 0.0
    last_prime: int = 0

    @property
    def theta_x(self) -> float:
        return self.theta.value

    @property
    def psi_x(self) -> float:
        return self.theta.value + self.psi_extra

    @property
    def mertens_q(self) -> float:
        return self.q.value

    def copy(self) -> "PrimeAccumulators":
        return PrimeAccumulators(
            self.x, self.pi_x, self.theta.copy(), self.q.copy(), self.psi_extra, self.last_prime
        )

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "pi_x": self.pi_x,
            "theta_x": self.theta_x,
            "psi_x": self.psi_x,
            "mertens_q": self.mertens_q,
            "last_prime": self.last_prime,
        }


@dataclass
class HarmonicState:
    n: int = 0
    acc: CompensatedAccumulator = field(default_factory=CompensatedAccumulator)

    @property
    def h_n(self) -> float:
        return self.acc.value

    def advance(self, count: int) -> np.ndarray:
        """Return H_{n+1}..H_{n+count} and move the state forward."""
        r = np.arange(self.n + 1, self.n + count + 1, dtype=np.float64)
        out = compensated_cumsum(1.0 / r, self.acc)
        self.n += count
        return out


@dataclass(frozen=True)
class CompositeCursor:
    n: int
    c_n: int


# --------------------------------------------------------------------------
# Sieving
# --------------------------------------------------------------------------


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit by a one-shot odd-only sieve."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_p = np.ones(limit // 2 + 1, dtype=bool)  # index i <-> 2i+1
    is_p[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if is_p[i]:
            p = 2 * i + 1
            is_p[p * p // 2 :: p] = False
    odd = 2 * np.flatnonzero(is_p).astype(np.int64) + 1
    odd = odd[odd <= limit]
    return np.concatenate(([2], odd)).astype(np.int64)


def sieve_segment(
    lo: int,
    hi: int,
    base_primes: Optional[np.ndarray] = None,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
) -> PrimeSegment:
    """Primes in ``[lo, hi)``.

    ``base_primes`` must contain every prime up to sqrt(hi - 1); it is
    computed when omitted.
    """
    if lo >= hi:
        raise RangeError(f"empty range [{lo}, {hi})")
    if lo < 2:
        lo = 2
        if lo >= hi:
            return PrimeSegment(lo, hi, np.empty(0, dtype=np.int64))
    if hi - lo > segment_size:
        raise RangeError(f"segment length {hi - lo} exceeds segment size {segment_size}")
    if hi > MAX_LIMIT:
        raise RangeError("sieving beyond 2**63 is not supported")
    root = math.isqrt(hi - 1)
    if base_primes is None:
        base_primes = small_primes(root)
    mark = np.ones(hi - lo, dtype=bool)
    for p in base_primes:
        p = int(p)
        if p > root:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start >= hi:
            continue
        mark[start - lo :: p] = False
    primes = np.flatnonzero(mark).astype(np.int64) + lo
    return PrimeSegment(lo, hi, primes)


def segments(lo: int, hi: int, segment_size: int = DEFAULT_SEGMENT_SIZE) -> Iterator[PrimeSegment]:
    """Consecutive prime segments covering ``[lo, hi)`` in ascending order."""
    if hi <= lo:
        return
    base = small_primes(math.isqrt(max(hi - 1, 1)))
    start = max(lo, 2)
    while start < hi:
        stop = min(start + segment_size, hi)
        yield sieve_segment(start, stop, base, segment_size)
        start = stop


def prime_pi(x: int) -> int:
    return sum(len(s) for s in segments(2, x + 1))


def primes_up_to(limit: int) -> np.ndarray:
    parts = [s.primes for s in segments(2, limit + 1)]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def first_primes(count: int) -> np.ndarray:
    """p_1..p_count."""
    if count < 1:
        return np.empty(0, dtype=np.int64)
    n = max(count, 6)
    bound = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    ps = primes_up_to(bound)
    return ps[:count]


# --------------------------------------------------------------------------
# Prime powers and psi
# --------------------------------------------------------------------------


def higher_prime_powers(limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Sorted prime powers q**k <= limit with k >= 2, and ln q for each.

    Exponents are found with exact integer arithmetic.
    """
    values: list[int] = []
    logs: list[float] = []
    for q in small_primes(math.isqrt(max(limit, 1))):
        q = int(q)
        lq = math.log(q)
        v = q * q
        while v <= limit:
            values.append(v)
            logs.append(lq)
            v *= q
    order = np.argsort(np.array(values, dtype=np.int64), kind="stable")
    return np.array(values, dtype=np.int64)[order], np.array(logs)[order]


def _prefix_compensated(values: np.ndarray) -> np.ndarray:
    """out[i] = sum(values[:i]) with compensation; out has len(values)+1 entries."""
    out = np.empty(len(values) + 1)
    acc = CompensatedAccumulator()
    out[0] = 0.0
    for i, v in enumerate(values):
        acc.add(float(v))
        out[i + 1] = acc.value
    return out


def chebyshev_theta(x: int) -> float:
    acc = CompensatedAccumulator()
    for seg in segments(2, x + 1):
        acc.add_array(np.log(seg.primes.astype(np.float64)))
    return acc.value


def chebyshev_psi(x: int) -> float:
    """psi(x) = sum over prime powers p**k <= x of ln p.

    Uses floor(log_p x) copies of ln p per prime, with the exponent
    determined by integer powering rather than a float ratio of logs.
    """
    if x < 2:
        return 0.0
    acc = CompensatedAccumulator()
    root = math.isqrt(x)
    for seg in segments(2, x + 1):
        logs = np.log(seg.primes.astype(np.float64))
        acc.add_array(logs)
        small = seg.primes[seg.primes <= root]
        for p in small:
            p = int(p)
            k, v = 0, p * p
            while v <= x:
                k += 1
                v *= p
            if k:
                acc.add(k * math.log(p))
    return acc.value


def prime_power_multiplicity(primes: np.ndarray, x: int) -> np.ndarray:
    """floor(log_p x) for each prime p <= x, computed exactly."""
    mult = np.ones(len(primes), dtype=np.int64)
    root = math.isqrt(x)
    idx = np.flatnonzero(primes <= root)
    for i in idx:
        p = int(primes[i])
        k, v = 1, p * p
        while v <= x:
            k += 1
            v *= p
        mult[i] = k
    return mult


# --------------------------------------------------------------------------
# Streaming blocks
# --------------------------------------------------------------------------


@dataclass
class PrimeBlock:
    """Per-prime running values for one sieved window.

    ``index`` is the 1-based prime index r with ``primes[i] = p_r``;
    ``theta``, ``psi`` and ``q`` are theta(p), psi(p) and sum_{p' <= p} 1/p'.
    ``state`` holds the accumulators after the last prime in the window,
    with ``state.x`` the window's upper bound (inclusive).
    """

    primes: np.ndarray
    index: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    q: np.ndarray
    state: PrimeAccumulators

    def __len__(self) -> int:
        return len(self.primes)

    def logs(self) -> np.ndarray:
        return np.log(self.primes.astype(np.float64))


def prime_blocks(
    limit: int,
    start: Optional[PrimeAccumulators] = None,
    segment_size: int = DEFAULT_SEGMENT_SIZE,
    stops: Optional[list[int]] = None,
) -> Iterator[PrimeBlock]:
    """Stream primes in (start.x, limit] as :class:`PrimeBlock` windows.

    ``stops`` are extra window boundaries: a block always ends exactly at
    each stop value, so ``block.state`` gives the accumulators at x = stop.
    Merging is sequential in ascending order, so results do not depend on
    how the range is cut.
    """
    state = start.copy() if start is not None else PrimeAccumulators()
    if limit < 2 or limit <= state.x:
        return
    pw_vals, pw_logs = higher_prime_powers(limit)
    pw_prefix = _prefix_compensated(pw_logs)
    base = small_primes(math.isqrt(limit))
    cuts = sorted({s for s in (stops or []) if state.x < s < limit} | {limit})
    lo = max(state.x + 1, 2)
    for cut in cuts:
        while lo <= cut:
            hi = min(lo + segment_size, cut + 1)
            seg = sieve_segment(lo, hi, base, segment_size)
            ps = seg.primes
            n = len(ps)
            logs = np.log(ps.astype(np.float64))
            theta = compensated_cumsum(logs, state.theta)
            q = compensated_cumsum(1.0 / ps.astype(np.float64), state.q)
            extra = pw_prefix[np.searchsorted(pw_vals, ps, side="right")]
            psi = theta + extra
            index = np.arange(state.pi_x + 1, state.pi_x + n + 1, dtype=np.int64)
            state.pi_x += n
            state.x = hi - 1
            if n:
                state.last_prime = int(ps[-1])
            state.psi_extra = float(pw_prefix[np.searchsorted(pw_vals, state.x, side="right")])
            yield PrimeBlock(ps, index, theta, psi, q, state.copy())
            lo = hi


def iterate_primes(
    limit: int,
    callback: Optional[Callable[[int, int, PrimeAccumulators], None]] = None,
    start: Optional[PrimeAccumulators] = None,
) -> PrimeAccumulators:
    """Call ``callback(r, p_r, acc)`` once per prime <= limit, in order.

    ``acc`` reflects all primes up to and including p_r (with ``acc.x = p_r``).
    Returns the accumulators at x = limit.
    """
    final = start.copy() if start is not None else PrimeAccumulators()
    for block in prime_blocks(limit, start):
        if callback is not None:
            for i in range(len(block)):
                p = int(block.primes[i])
                theta = float(block.theta[i])
                q = float(block.q[i])
                acc = PrimeAccumulators(
                    x=p,
                    pi_x=int(block.index[i]),
                    theta=CompensatedAccumulator(theta),
                    q=CompensatedAccumulator(q),
                    psi_extra=float(block.psi[i]) - theta,
                    last_prime=p,
                )
                callback(int(block.index[i]), p, acc)
        final = block.state
    if limit > final.x:
        final.x = limit
    return final


# --------------------------------------------------------------------------
# Composites
# --------------------------------------------------------------------------


def composites(count: int) -> np.ndarray:
    """c_1..c_count with c_1 = 4."""
    if count < 1:
        return np.empty(0, dtype=np.int64)
    bound = 2 * count + 10
    while True:
        is_c = np.ones(bound + 1, dtype=bool)
        is_c[:4] = False
        is_c[primes_up_to(bound)] = False
        cs = np.flatnonzero(is_c).astype(np.int64)
        if len(cs) >= count:
            return cs[:count]
        bound *= 2


def nth_composite(n: int) -> int:
    if n < 1:
        raise ValueError("composite index must be >= 1")
    return int(composites(n)[-1])
