"""Prime generation and gap statistics.

Primality is always deterministic here: a sieve for bulk enumeration,
trial division for 32-bit scalars, and the fixed Miller-Rabin witness set
that is exact below 3.3 * 10^24 for everything else.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SEGMENT = 1 << 20
DEFAULT_SPAN_LIMIT = 1 << 28

# exact for all n < 3317044064679887385961981 (beyond 64-bit range)
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class RangeTooLarge(ValueError):
    """Requested span exceeds the configured sieve budget."""


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def is_prime(n: int) -> bool:
    """Deterministic primality test for 64-bit integers."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True
    if n < 1 << 32:
        i = 41
        while i * i <= n:
            if n % i == 0:
                return False
            i += 2
        return True
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeRange:
    """Complete ascending list of the primes in [lo, hi]."""

    lo: int
    hi: int
    primes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def count_in(self, lo: int, hi: int, left_open: bool = True) -> int:
        """Primes q with lo < q <= hi (or lo <= q <= hi if not left_open)."""
        first = lo + 1 if left_open else lo
        if first > hi:
            return 0
        if not self.covers(first, hi):
            raise ValueError(f"oracle [{self.lo},{self.hi}] misses [{lo},{hi}]")
        side = bisect.bisect_right if left_open else bisect.bisect_left
        return bisect.bisect_right(self.primes, hi) - side(self.primes, lo)


def primes_in(
    lo: int,
    hi: int,
    segment: int = DEFAULT_SEGMENT,
    span_limit: int = DEFAULT_SPAN_LIMIT,
) -> PrimeRange:
    """Segmented sieve over [lo, hi], exact and complete."""
    if not 2 <= lo <= hi:
        raise ValueError(f"need 2 <= lo <= hi, got [{lo}, {hi}]")
    if hi - lo > span_limit:
        raise RangeTooLarge(f"span {hi - lo} exceeds budget {span_limit}")
    if hi >= 1 << 62:
        raise RangeTooLarge("upper bound must stay in 64-bit range")
    base = simple_sieve(math.isqrt(hi))
    out: list[np.ndarray] = []
    start = lo
    while start <= hi:
        stop = min(start + segment, hi + 1)  # exclusive
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, (start + p - 1) // p * p)
            if first >= stop:
                continue
            flags[first - start :: p] = False
        out.append(np.flatnonzero(flags) + start)
        start = stop
    merged = np.concatenate(out) if out else np.array([], dtype=np.int64)
    return PrimeRange(lo, hi, tuple(int(p) for p in merged))


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    k = max(n + 1, 2)
    while not is_prime(k):
        k += 1
    return k


def pi(y: int) -> int:
    """Exact count of primes <= y."""
    if y < 2:
        return 0
    return len(simple_sieve(y))


@dataclass(frozen=True)
class GapTable:
    """Consecutive prime gaps (p_k, p_{k+1} - p_k) for all p_k <= y."""

    y: int
    pairs: tuple[tuple[int, int], ...]

    @property
    def gap_sum(self) -> int:
        return sum(g for _, g in self.pairs)

    @property
    def end_prime(self) -> int:
        """p_{pi(y)+1}, the first prime past the table."""
        p, g = self.pairs[-1]
        return p + g


def gap_table(y: int) -> GapTable:
    if y < 2:
        raise ValueError("need y >= 2")
    ps = simple_sieve(y)
    seq = [int(p) for p in ps] + [next_prime(int(ps[-1]))]
    pairs = tuple((seq[i], seq[i + 1] - seq[i]) for i in range(len(seq) - 1))
    return GapTable(y, pairs)


@dataclass(frozen=True)
class GapSquareSum:
    y: int
    total: int
    ratio_23_18: float  # total / y^(23/18 + 0.001), report-only


def gap_square_sum(y: int) -> GapSquareSum:
    """Sum of squared prime gaps over p_k <= y (p_{k+1} may exceed y)."""
    table = gap_table(y)
    total = sum(g * g for _, g in table.pairs)
    return GapSquareSum(y, total, total / y ** (23 / 18 + 0.001))


@dataclass(frozen=True)
class PrimeSum:
    y: int
    total: int
    ratio_half_square: float  # total / (y^2 / (2 log y)), report-only


def sum_primes(y: int) -> PrimeSum:
    """Exact sum of all primes <= y."""
    if y < 2:
        raise ValueError("need y >= 2")
    total = int(simple_sieve(y).astype(object).sum())
    return PrimeSum(y, total, total / (y**2 / (2 * math.log(y))))
