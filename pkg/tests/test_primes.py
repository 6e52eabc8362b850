from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unisum.constants import MEISSEL_MERTENS
from unisum.primes import (
    HarmonicState,
    RangeError,
    chebyshev_psi,
    chebyshev_theta,
    composites,
    first_primes,
    iterate_primes,
    nth_composite,
    prime_blocks,
    prime_pi,
    primes_up_to,
    segments,
    sieve_segment,
)

# oracles -----------------------------------------------------------------------


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def naive_primes(limit: int) -> list[int]:
    flags = [True] * (limit + 1)
    flags[0:2] = [False, False]
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            for j in range(i * i, limit + 1, i):
                flags[j] = False
    return [i for i, f in enumerate(flags) if f]


def numpy_full_sieve_count(limit: int) -> int:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return int(flags.sum())


def mangoldt_psi(x: int) -> float:
    total = 0.0
    for n in range(2, x + 1):
        m, p = n, 2
        while m % p:
            p += 1
        while m % p == 0:
            m //= p
        if m == 1:
            total += math.log(p)
    return total


# sieve ---------------------------------------------------------------------------


def test_sieve_segment_small_range():
    assert sieve_segment(10, 30).primes.tolist() == [11, 13, 17, 19, 23, 29]


def test_pi_100_from_segment():
    assert len(sieve_segment(3, 101).primes) + 1 == 25
    assert len([n for n in range(2, 101) if is_prime(n)]) == 25


@pytest.mark.parametrize("lo, hi", [(5, 5), (9, 3)])
def test_sieve_segment_rejects_empty_range(lo, hi):
    with pytest.raises(RangeError):
        sieve_segment(lo, hi)


def test_sieve_segment_respects_segment_size():
    with pytest.raises(RangeError):
        sieve_segment(2, 1000, segment_size=100)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=2, max_value=20000), st.integers(min_value=1, max_value=3000))
def test_segment_invariants(lo, width):
    seg = sieve_segment(lo, lo + width)
    ps = seg.primes.tolist()
    assert ps == [n for n in range(lo, lo + width) if is_prime(n)]
    assert all(a < b for a, b in zip(ps, ps[1:]))
    assert all(seg.lo <= p < seg.hi for p in ps)


def test_segments_cover_range_for_any_segment_size():
    expected = naive_primes(50000)
    for size in (97, 1000, 1 << 14):
        got = np.concatenate([s.primes for s in segments(2, 50001, size)]).tolist()
        assert got == expected


def test_prime_counts_against_full_sieve():
    assert prime_pi(10**6) == 78498 == numpy_full_sieve_count(10**6)
    assert prime_pi(10**7) == 664579 == numpy_full_sieve_count(10**7)


def test_first_primes():
    assert first_primes(10).tolist() == naive_primes(29)
    assert first_primes(5000).tolist() == naive_primes(48611)


# chebyshev functions -------------------------------------------------------------------


def test_iterate_primes_examples():
    acc = iterate_primes(10)
    assert acc.theta_x == pytest.approx(math.log(210), rel=1e-15)
    assert acc.psi_x == pytest.approx(math.log(2520), rel=1e-15)
    acc = iterate_primes(2)
    assert (acc.pi_x, acc.last_prime) == (1, 2)
    assert acc.theta_x == acc.psi_x == math.log(2)
    assert acc.mertens_q == 0.5


def test_iterate_primes_below_two_is_empty():
    calls = []
    acc = iterate_primes(1, lambda *a: calls.append(a))
    assert calls == [] and acc.pi_x == 0


def test_iterate_primes_callback_order_and_state():
    seen = []
    iterate_primes(100, lambda r, p, acc: seen.append((r, p, acc.pi_x, acc.theta_x, acc.mertens_q)))
    ps = naive_primes(100)
    assert [s[1] for s in seen] == ps
    assert [s[0] for s in seen] == list(range(1, len(ps) + 1))
    for r, p, pi_x, theta, q in seen:
        assert pi_x == r
        assert theta == pytest.approx(math.fsum(math.log(v) for v in ps[:r]), rel=1e-15)
        assert q == pytest.approx(math.fsum(1 / v for v in ps[:r]), rel=1e-15)
    qs = [s[4] for s in seen]
    assert all(a < b for a, b in zip(qs, qs[1:]))


def test_chebyshev_psi_examples():
    assert chebyshev_psi(2) == math.log(2)
    assert chebyshev_psi(10) == pytest.approx(math.log(2520), rel=1e-15)
    assert chebyshev_psi(1000) == pytest.approx(mangoldt_psi(1000), rel=1e-13)
    assert chebyshev_psi(1) == 0.0


@pytest.mark.parametrize("x", [4, 8, 9, 25, 27, 32, 49, 243, 1024, 3125, 2**20, 3**12])
def test_chebyshev_psi_exact_prime_powers(x):
    # exact powers are where a float floor(ln x / ln p) would misfire
    assert chebyshev_psi(x) - chebyshev_psi(x - 1) == pytest.approx(
        math.log(min(p for p in range(2, x + 1) if x % p == 0)), rel=1e-9
    )


def test_chebyshev_theta_small():
    assert chebyshev_theta(30) == pytest.approx(math.log(2 * 3 * 5 * 7 * 11 * 13 * 17 * 19 * 23 * 29), rel=1e-15)


def test_streaming_matches_naive_oracle_up_to_1e5():
    ps = naive_primes(10**5)
    stops = [2, 3, 10, 97, 100, 1000, 4096, 9973, 10**4, 65536, 99991, 10**5]
    checks = {}
    for blk in prime_blocks(10**5, stops=stops, segment_size=5000):
        checks[blk.state.x] = blk.state
    for x in stops:
        st_x = checks[x]
        upto = [p for p in ps if p <= x]
        assert st_x.pi_x == len(upto)
        assert st_x.last_prime == upto[-1]
        theta = math.fsum(math.log(p) for p in upto)
        assert st_x.theta_x == pytest.approx(theta, rel=1e-12)
        assert st_x.psi_x == pytest.approx(mangoldt_psi(x) if x <= 2000 else chebyshev_psi(x), rel=1e-12)
        assert st_x.mertens_q == pytest.approx(math.fsum(1 / p for p in upto), rel=1e-12)
        assert st_x.theta_x <= st_x.psi_x <= st_x.theta_x + 2 * math.sqrt(x) * math.log(x)


def test_block_arrays_match_oracle():
    ps = naive_primes(20000)
    for blk in prime_blocks(20000, segment_size=3000):
        for i in range(0, len(blk), 97):
            r = int(blk.index[i])
            p = int(blk.primes[i])
            assert ps[r - 1] == p
            assert blk.psi[i] == pytest.approx(chebyshev_psi(p), rel=1e-12)


def test_prime_blocks_independent_of_stops_and_segment_size():
    a = list(prime_blocks(300000))[-1].state
    b = list(prime_blocks(300000, stops=[7, 1000, 123457], segment_size=10007))[-1].state
    assert (a.pi_x, a.last_prime) == (b.pi_x, b.last_prime)
    assert a.theta_x == pytest.approx(b.theta_x, rel=1e-15)
    assert a.mertens_q == pytest.approx(b.mertens_q, rel=1e-15)


def test_prime_blocks_resume_from_state():
    first = list(prime_blocks(50000))[-1].state
    rest = list(prime_blocks(120000, first))[-1].state
    whole = list(prime_blocks(120000))[-1].state
    assert rest.pi_x == whole.pi_x
    assert rest.theta_x == pytest.approx(whole.theta_x, rel=1e-15)


def test_mertens_accumulator_tracks_log_log():
    stops = [10**k for k in range(3, 9)]
    seen = {}
    for blk in prime_blocks(10**8, stops=stops):
        if blk.state.x in stops:
            seen[blk.state.x] = blk.state.mertens_q
    for x in stops:
        assert abs(seen[x] - math.log(math.log(x)) - MEISSEL_MERTENS) < 3 / math.log(x)


# harmonic numbers and composites ------------------------------------------------------


def test_harmonic_state():
    hs = HarmonicState()
    h = hs.advance(1000)
    assert h[0] == 1.0
    assert np.allclose(np.diff(h), 1.0 / np.arange(2, 1001), rtol=0, atol=1e-15)
    more = hs.advance(5)
    assert more[-1] == pytest.approx(math.fsum(1 / r for r in range(1, 1006)), rel=1e-15)
    assert hs.n == 1005


def test_nth_composite():
    assert nth_composite(1) == 4
    assert nth_composite(5) == 10
    oracle = [n for n in range(4, 200) if not is_prime(n)]
    assert nth_composite(100) == oracle[99]
    with pytest.raises(ValueError):
        nth_composite(0)


def test_composites_invariants():
    cs = composites(5000).tolist()
    assert all(c > 1 and not is_prime(c) for c in cs)
    assert all(a < b for a, b in zip(cs, cs[1:]))
    assert set(cs) | set(naive_primes(cs[-1])) | {1} == set(range(1, cs[-1] + 1))


def test_primes_up_to_edge_cases():
    assert primes_up_to(1).tolist() == []
    assert primes_up_to(2).tolist() == [2]
