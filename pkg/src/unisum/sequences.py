"""Equidistributed sequence sources and equidistribution tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

LCG_MULTIPLIER = 1203248318
LCG_MODULUS = 2**31 - 1
DEFAULT_SEED = 1
GOLDEN_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))

KINDS = ("lcg", "weyl", "ratio_partial_sums", "ratio_to_last", "zero_ordinates")


class StateError(ValueError):
    pass


# --------------------------------------------------------------------------
# Lehmer generator
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LcgState:
    z: int
    multiplier: int = LCG_MULTIPLIER
    modulus: int = LCG_MODULUS

    def __post_init__(self):
        if not 1 <= self.z <= self.modulus - 1:
            raise StateError(f"LCG state {self.z} outside [1, {self.modulus - 1}]")


def lcg_next(state: LcgState) -> tuple[float, LcgState]:
    """Emit a = z / C for the current state and step z -> A z mod C."""
    a = state.z / state.modulus
    return a, LcgState((state.multiplier * state.z) % state.modulus, state.multiplier, state.modulus)


def lcg_period(multiplier: int, modulus: int, seed: int = 1) -> int:
    """Cycle length from ``seed`` by brute force (small moduli only)."""
    z = seed
    for k in range(1, modulus + 1):
        z = (multiplier * z) % modulus
        if z == seed:
            return k
    raise StateError("no cycle found")


class LcgSource:
    """Vectorised Lehmer stream a_r = Z_r / C with Z_{r+1} = A Z_r mod C.

    Blocks are produced by jump-ahead: Z_{k+j} = (A^j mod C) Z_k mod C,
    exact in uint64 because both factors are below 2**31.
    """

    def __init__(
        self,
        seed: int = DEFAULT_SEED,
        multiplier: int = LCG_MULTIPLIER,
        modulus: int = LCG_MODULUS,
        block: int = 1 << 16,
    ):
        if modulus >= 2**32:
            raise StateError("modulus must fit in 32 bits for exact uint64 products")
        self.state = LcgState(seed, multiplier, modulus)
        self._block = block
        pw = np.empty(block, dtype=np.uint64)
        v = 1
        for j in range(block):
            pw[j] = v
            v = (v * multiplier) % modulus
        self._powers = pw
        self._jump = v  # A**block mod C

    @property
    def z(self) -> int:
        return self.state.z

    def take_states(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint64)
        st = self.state
        c = np.uint64(st.modulus)
        pos = 0
        z = st.z
        while pos < count:
            k = min(self._block, count - pos)
            out[pos : pos + k] = (self._powers[:k] * np.uint64(z)) % c
            if k == self._block:
                z = (self._jump * z) % st.modulus
            else:
                z = (int(self._powers[k - 1]) * z * st.multiplier) % st.modulus
            pos += k
        self.state = LcgState(z, st.multiplier, st.modulus)
        return out

    def take(self, count: int) -> np.ndarray:
        return self.take_states(count).astype(np.float64) / float(self.state.modulus)

    def __iter__(self) -> Iterator[float]:
        while True:
            a, self.state = lcg_next(self.state)
            yield a


class WeylSource:
    """a_r = frac(r * alpha), r = 1, 2, ..."""

    def __init__(self, alpha: float = GOLDEN_CONJUGATE, start: int = 0):
        self.alpha = alpha
        self.r = start

    def take(self, count: int) -> np.ndarray:
        r = np.arange(self.r + 1, self.r + count + 1, dtype=np.float64)
        self.r += count
        vals = np.mod(r * self.alpha, 1.0)
        return vals


class ArraySource:
    """Fixed values (e.g. ratios b_r / b_n) handed out in order."""

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=np.float64)
        self.pos = 0

    def take(self, count: int) -> np.ndarray:
        if self.pos + count > len(self.values):
            raise StateError("sequence exhausted")
        out = self.values[self.pos : self.pos + count]
        self.pos += count
        return out


# --------------------------------------------------------------------------
# Spec strings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    kind: str = "lcg"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}; expected one of {KINDS}")

    @classmethod
    def lcg(cls, seed: int = DEFAULT_SEED, multiplier: int = LCG_MULTIPLIER, modulus: int = LCG_MODULUS):
        return cls("lcg", {"A": multiplier, "C": modulus, "seed": seed})

    @classmethod
    def weyl(cls, alpha: float = GOLDEN_CONJUGATE):
        return cls("weyl", {"alpha": alpha})

    @classmethod
    def parse(cls, text: str) -> "SequenceSpec":
        """Parse ``kind[:key=value,...]``, e.g. ``lcg:A=1203248318,C=2147483647,seed=1``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower()
        params: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed sequence parameter {item!r}")
            params[key.strip()] = _parse_value(value.strip())
        spec = cls(kind, params)
        if kind == "lcg":
            spec = cls.lcg(
                seed=int(params.get("seed", DEFAULT_SEED)),
                multiplier=int(params.get("A", LCG_MULTIPLIER)),
                modulus=int(params.get("C", LCG_MODULUS)),
            )
        return spec

    def to_string(self) -> str:
        if not self.params:
            return self.kind
        body = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}:{body}"

    def with_seed(self, seed: int) -> "SequenceSpec":
        if self.kind != "lcg":
            return self
        return SequenceSpec.lcg(seed, int(self.params["A"]), int(self.params["C"]))

    def source(self, values: Optional[np.ndarray] = None):
        """Instantiate a stream. Ratio and zero kinds need their values."""
        if self.kind == "lcg":
            p = self.params
            return LcgSource(int(p.get("seed", DEFAULT_SEED)), int(p.get("A", LCG_MULTIPLIER)), int(p.get("C", LCG_MODULUS)))
        if self.kind == "weyl":
            return WeylSource(float(self.params.get("alpha", GOLDEN_CONJUGATE)))
        if values is None:
            raise ValueError(f"sequence kind {self.kind!r} needs explicit values")
        return ArraySource(values)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


DEFAULT_SEQUENCE = SequenceSpec.lcg()


# --------------------------------------------------------------------------
# Tests for equidistribution
# --------------------------------------------------------------------------


def star_discrepancy(samples: Sequence[float]) -> float:
    """Exact D*_n of a one-dimensional point set via the sorted-sample formula."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise ValueError("star discrepancy of an empty sample")
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


BSeq = Union[Sequence[float], np.ndarray, Callable[[int], float]]


def _materialize(b: BSeq, n: int) -> np.ndarray:
    if callable(b):
        return np.array([b(r) for r in range(1, n + 1)], dtype=np.float64)
    arr = np.asarray(b, dtype=np.float64)
    if len(arr) < n:
        raise ValueError(f"sequence has {len(arr)} terms, need {n}")
    return arr[:n]


def asymptotic_equidistribution_test(b: BSeq, n: int, grid: Sequence[float] = DEFAULT_GRID) -> float:
    """max over t in ``grid`` of |b_floor(n t) / b_n - t|.

    ``b`` is either a callable r -> b_r or an array holding b_1..b_n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    t = np.asarray(grid, dtype=np.float64)
    if np.any((t <= 0) | (t >= 1)):
        raise ValueError("grid values must lie strictly inside (0, 1)")
    vals = _materialize(b, n)
    if np.any(vals <= 0) or np.any(np.diff(vals) < 0):
        raise ValueError("b must be positive and nondecreasing")
    idx = np.floor(n * t).astype(np.int64)
    idx = np.maximum(idx, 1)
    return float(np.max(np.abs(vals[idx - 1] / vals[-1] - t)))


def ratio_stream(partial_sums: BSeq, n: int) -> np.ndarray:
    """S_r / S_n for r = 1..n (the last entry is exactly 1)."""
    s = _materialize(partial_sums, n)
    if s[-1] == 0:
        raise ValueError("S_n is zero")
    return s / s[-1]


def linear_combination(alpha: float, beta: float, gamma: float, n: int) -> np.ndarray:
    """alpha p_r + beta c_r + gamma r for r = 1..n."""
    from .primes import composites, first_primes

    r = np.arange(1, n + 1, dtype=np.float64)
    return alpha * first_primes(n).astype(np.float64) + beta * composites(n).astype(np.float64) + gamma * r
