"""Binary checkpoint records for long prime-stream runs.

Layout (little-endian, version 1)::

    magic      8s   b"UNISUMCK"
    version    u16
    n_sums     u16
    label      24s  identity/table id, NUL padded ASCII
    target     u64  bound the run is heading for
    x          u64  all primes <= x have been consumed
    pi_x       u64
    last_prime u64
    theta      f64, f64   (sum, compensation)
    psi        f64
    q          f64, f64
    h_n        u64
    h          f64, f64
    lcg_a      u64
    lcg_c      u64
    lcg_seed   u64
    lcg_z      u64
    term_index u64
    sums       n_sums * (name 16s, f64, f64)
    crc32      u32  over everything before it

A JSON mirror with the same fields is written next to it for debugging.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .numerics import CompensatedAccumulator
from .primes import HarmonicState, PrimeAccumulators

MAGIC = b"UNISUMCK"
VERSION = 1
_HEAD = struct.Struct("<8sHH24sQQQQddddd" "Q" "dd" "QQQQQ")
_SUM = struct.Struct("<16sdd")
_CRC = struct.Struct("<I")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    label: str
    target: int
    primes: PrimeAccumulators
    harmonic: HarmonicState
    lcg: tuple[int, int, int, int]  # (A, C, seed, z)
    term_index: int
    sums: dict[str, CompensatedAccumulator] = field(default_factory=dict)

    def to_bytes(self) -> bytes:
        p = self.primes
        a, c, seed, z = self.lcg
        head = _HEAD.pack(
            MAGIC,
            VERSION,
            len(self.sums),
            self.label.encode("ascii")[:24],
            self.target,
            p.x,
            p.pi_x,
            p.last_prime,
            p.theta.sum,
            p.theta.compensation,
            p.psi_x,
            p.q.sum,
            p.q.compensation,
            self.harmonic.n,
            self.harmonic.acc.sum,
            self.harmonic.acc.compensation,
            a,
            c,
            seed,
            z,
            self.term_index,
        )
        body = b"".join(
            _SUM.pack(name.encode("ascii")[:16], acc.sum, acc.compensation)
            for name, acc in self.sums.items()
        )
        data = head + body
        return data + _CRC.pack(zlib.crc32(data))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if len(data) < _HEAD.size + _CRC.size:
            raise CheckpointError("checkpoint truncated")
        payload, crc = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])[0]
        if zlib.crc32(payload) != crc:
            raise CheckpointError("checkpoint checksum mismatch")
        fields = _HEAD.unpack(payload[: _HEAD.size])
        magic, version, n_sums, label = fields[:4]
        if magic != MAGIC:
            raise CheckpointError("not a checkpoint file")
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (target, x, pi_x, last_prime, th_s, th_c, psi, q_s, q_c, h_n, h_s, h_c, a, c, seed, z, term) = fields[4:]
        if len(payload) != _HEAD.size + n_sums * _SUM.size:
            raise CheckpointError("checkpoint length does not match its header")
        sums = {}
        off = _HEAD.size
        for _ in range(n_sums):
            name, s, comp = _SUM.unpack(payload[off : off + _SUM.size])
            sums[name.rstrip(b"\0").decode("ascii")] = CompensatedAccumulator(s, comp)
            off += _SUM.size
        theta = CompensatedAccumulator(th_s, th_c)
        primes = PrimeAccumulators(
            x=x,
            pi_x=pi_x,
            theta=theta,
            q=CompensatedAccumulator(q_s, q_c),
            psi_extra=psi - theta.value,
            last_prime=last_prime,
        )
        return cls(
            label=label.rstrip(b"\0").decode("ascii"),
            target=target,
            primes=primes,
            harmonic=HarmonicState(h_n, CompensatedAccumulator(h_s, h_c)),
            lcg=(a, c, seed, z),
            term_index=term,
            sums=sums,
        )

    def as_dict(self) -> dict:
        a, c, seed, z = self.lcg
        return {
            "version": VERSION,
            "label": self.label,
            "target": self.target,
            **self.primes.as_dict(),
            "h_n": self.harmonic.n,
            "h": self.harmonic.h_n,
            "lcg": {"A": a, "C": c, "seed": seed, "z": z},
            "term_index": self.term_index,
            "sums": {k: v.value for k, v in self.sums.items()},
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(self.as_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
        return cls.from_bytes(data)
