"""One-pass evaluation of every prime-indexed sum used by the tables.

A :class:`PrimeRun` walks the primes once and keeps a compensated running
total for each sum below. At each requested stop it records a
:class:`Snapshot`; between stops it can write a :class:`Checkpoint` and be
resumed later with bit-identical accumulator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .checkpoint import Checkpoint, CheckpointError
from .constants import EULER_GAMMA, MEISSEL_MERTENS
from .numerics import CompensatedAccumulator
from .primes import (
    HarmonicState,
    PrimeAccumulators,
    higher_prime_powers,
    prime_blocks,
    prime_power_multiplicity,
)
from .sequences import DEFAULT_SEQUENCE, LcgSource, SequenceSpec

# Names are stored in checkpoints; keep them <= 16 ASCII bytes.
SUM_NAMES = (
    "ln_over_theta",  # sum ln p / theta(p)
    "ln_over_psi",  # sum ln p / psi(p)
    "exp_q_over_p",  # sum e^{Q(p)} / p
    "log_euler",  # sum -ln(1 - 1/p)
    "mixed_weight",  # sum (1/r + 1/p_r) e^{H_r + Q_r} / (1 + a_r^2)
)


class BudgetError(RuntimeError):
    pass


@dataclass
class Snapshot:
    """Everything known about the primes <= x at one stop."""

    x: int
    pi_x: int
    last_prime: int
    theta: float
    psi: float
    q: float
    h: float  # H_{pi(x)}
    sums: dict[str, float]
    last_psi_term: float = 0.0  # ln p / psi(p) for p = last_prime

    def table1(self) -> tuple[float, float]:
        s = self.sums["ln_over_theta"]
        return s, s - math.log(self.x)

    def table2(self) -> tuple[float, float]:
        """Sum over p < x (strict), so the term at p = x is dropped."""
        s = self.sums["ln_over_psi"]
        if self.last_prime == self.x:
            s -= self.last_psi_term
        return s, s - math.log(self.x)

    def table3(self) -> tuple[float, float]:
        s = self.sums["ln_over_psi"] + prime_power_correction(self.x)
        return s, s - math.log(self.x)

    def table4(self) -> tuple[int, float, float, float]:
        m = int(math.floor(math.log(self.last_prime)))
        r = np.arange(1, m + 1, dtype=np.float64)
        h = np.cumsum(1.0 / r)
        first = math.fsum(np.exp(MEISSEL_MERTENS + h) / r)
        second = math.exp(EULER_GAMMA) * self.sums["exp_q_over_p"]
        return m, first, second, first - second

    def table5(self) -> float:
        return self.sums["mixed_weight"] / self.last_prime

    def euler_product(self) -> float:
        """L(n) = prod p/(p-1) over the primes so far."""
        return math.exp(self.sums["log_euler"])

    def exp_q_sum(self) -> float:
        return self.sums["exp_q_over_p"]


def prime_power_correction(x: int) -> float:
    """sum over p <= sqrt(x) of (floor(log_p x) - 1) ln p / psi(p)."""
    root = math.isqrt(x)
    if root < 2:
        return 0.0
    total = CompensatedAccumulator()
    for blk in prime_blocks(root):
        extra = prime_power_multiplicity(blk.primes, x) - 1
        total.add_array(extra * blk.logs() / blk.psi)
    return total.value


def _prime_power_extra(x: int) -> float:
    """psi(x) - theta(x): ln q summed over prime powers q^k <= x with k >= 2."""
    _, logs = higher_prime_powers(x)
    return math.fsum(logs)


def _lcg_from(seq: SequenceSpec) -> tuple[int, int, int]:
    if seq.kind != "lcg":
        raise ValueError("prime-stream runs need an lcg sequence (they must be resumable)")
    p = seq.params
    return int(p["A"]), int(p["C"]), int(p["seed"])


class PrimeRun:
    def __init__(
        self,
        target: int,
        seq: SequenceSpec = DEFAULT_SEQUENCE,
        label: str = "run",
        budget: Optional[int] = None,
    ):
        if target < 2:
            raise ValueError("target must be >= 2")
        if budget is not None and target > budget:
            raise BudgetError(f"x = {target} exceeds the budget {budget}")
        self.target = int(target)
        self.label = label
        a, c, seed = _lcg_from(seq)
        self.lcg_params = (a, c, seed)
        self.lcg = LcgSource(seed, a, c)
        self.primes = PrimeAccumulators()
        self.harmonic = HarmonicState()
        self.sums = {name: CompensatedAccumulator() for name in SUM_NAMES}
        self.last_psi_term = 0.0

    @classmethod
    def from_checkpoint(cls, ck: Checkpoint) -> "PrimeRun":
        a, c, seed, z = ck.lcg
        run = cls(ck.target, SequenceSpec.lcg(seed, a, c), ck.label)
        run.lcg = LcgSource(z, a, c)
        run.primes = ck.primes.copy()
        run.harmonic = HarmonicState(ck.harmonic.n, ck.harmonic.acc.copy())
        missing = set(SUM_NAMES) - set(ck.sums)
        if missing:
            raise CheckpointError(f"checkpoint lacks sums {sorted(missing)}")
        run.sums = {k: ck.sums[k].copy() for k in SUM_NAMES}
        if ck.term_index != ck.primes.pi_x or ck.harmonic.n != ck.primes.pi_x:
            raise CheckpointError("checkpoint counters are inconsistent")
        return run

    @property
    def done(self) -> bool:
        return self.primes.x >= self.target

    def checkpoint(self) -> Checkpoint:
        a, c, seed = self.lcg_params
        return Checkpoint(
            label=self.label,
            target=self.target,
            primes=self.primes.copy(),
            harmonic=HarmonicState(self.harmonic.n, self.harmonic.acc.copy()),
            lcg=(a, c, seed, self.lcg.z),
            term_index=self.primes.pi_x,
            sums={k: v.copy() for k, v in self.sums.items()},
        )

    def snapshot(self) -> Snapshot:
        p = self.primes
        return Snapshot(
            x=p.x,
            pi_x=p.pi_x,
            last_prime=p.last_prime,
            theta=p.theta_x,
            psi=p.psi_x,
            q=p.mertens_q,
            h=self.harmonic.h_n,
            sums={k: v.value for k, v in self.sums.items()},
            last_psi_term=self.last_psi_term,
        )

    def run(
        self,
        stops: Iterable[int] = (),
        checkpoint_path: Optional[str | Path] = None,
        checkpoint_every: Optional[int] = None,
        halt_at: Optional[int] = None,
        on_stop: Optional[Callable[[Snapshot], None]] = None,
    ) -> list[Snapshot]:
        """Advance to ``target``, returning snapshots at ``stops``.

        Sieve windows sit on a fixed grid independent of the stops, and a
        stop inside a window is read off the window's prefix sums. Together
        with checkpoints that are only taken at window ends, this makes the
        results bit-identical however a run is split or resumed.

        With ``checkpoint_path`` a checkpoint is written whenever x passes
        a multiple of ``checkpoint_every`` and when the run halts or
        finishes. ``halt_at`` simulates an interruption: the run stops at
        the first window end at or beyond it.
        """
        wanted = sorted({int(s) for s in stops if self.primes.x < s <= self.target})
        out: list[Snapshot] = []
        pending = list(wanted)
        for blk in prime_blocks(self.target, self.primes):
            prev_x = self.primes.x
            terms = self._consume(blk)
            while pending and pending[0] <= blk.state.x:
                snap = self._snapshot_within(blk, terms, pending.pop(0))
                out.append(snap)
                if on_stop is not None:
                    on_stop(snap)
            self._commit(terms)
            if checkpoint_path is not None and checkpoint_every:
                if blk.state.x // checkpoint_every > prev_x // checkpoint_every:
                    self.checkpoint().save(checkpoint_path)
            if halt_at is not None and blk.state.x >= halt_at and not self.done:
                break
        if checkpoint_path is not None:
            self.checkpoint().save(checkpoint_path)
        return out

    def _consume(self, blk) -> dict[str, np.ndarray]:
        """Per-prime terms of every sum for one window; advances the
        prime, harmonic and sequence state but not the sums."""
        n = len(blk)
        self._before = (self.primes, self.harmonic.h_n)
        self.primes = blk.state
        if n == 0:
            self._h = np.empty(0)
            return {name: np.empty(0) for name in SUM_NAMES}
        p = blk.primes.astype(np.float64)
        logs = blk.logs()
        inv_p = 1.0 / p
        h = self.harmonic.advance(n)
        a = self.lcg.take(n)
        r = blk.index.astype(np.float64)
        self._h = h
        return {
            "ln_over_theta": logs / blk.theta,
            "ln_over_psi": logs / blk.psi,
            "exp_q_over_p": np.exp(blk.q) * inv_p,
            "log_euler": -np.log1p(-inv_p),
            "mixed_weight": (1.0 / r + inv_p) * np.exp(h + blk.q) / (1.0 + a * a),
        }

    def _commit(self, terms: dict[str, np.ndarray]) -> None:
        for name, t in terms.items():
            self.sums[name].add_array(t)
        if len(terms["ln_over_psi"]):
            self.last_psi_term = float(terms["ln_over_psi"][-1])

    def _snapshot_within(self, blk, terms: dict[str, np.ndarray], x: int) -> Snapshot:
        """State at ``x`` inside the window just consumed (sums not yet committed)."""
        k = int(np.searchsorted(blk.primes, x, side="right"))
        sums = {name: self.sums[name].copy().add_array(t[:k]).value for name, t in terms.items()}
        if k:
            pi_x = int(blk.index[k - 1])
            last = int(blk.primes[k - 1])
            theta = float(blk.theta[k - 1])
            q = float(blk.q[k - 1])
            h = float(self._h[k - 1])
            last_psi = float(terms["ln_over_psi"][k - 1])
        else:
            prev, h = self._before
            pi_x, last = prev.pi_x, prev.last_prime
            theta, q = prev.theta_x, prev.mertens_q
            last_psi = self.last_psi_term
        return Snapshot(
            x=x,
            pi_x=pi_x,
            last_prime=last,
            theta=theta,
            psi=theta + _prime_power_extra(x),
            q=q,
            h=h,
            sums=sums,
            last_psi_term=last_psi,
        )
