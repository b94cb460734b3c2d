"""Factorial-residue sieve: for each prime p, find every n < p in a window
with p | n! + f(n), by one incremental scan of n! mod p.

The throughput kernel runs the scan "sideways": one pass over n keeps a
vector of running factorials for a whole block of primes and multiplies
them all by n in a single numpy step. Each prime still costs O(p) modular
multiplications; blocks of contiguous primes are balanced by their total
scan cost (sum of p) and can be fanned out to worker processes. Output is
sorted at finalization, so results are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import Poly, ValueIsZero, eval_poly_mod, ord_fact_plus_poly
from .primes import primes_in

# p^3 must stay below 2^63 for the int64 valuation track
KERNEL_PRIME_LIMIT = 2_000_000

THREADS_ENV = "FACTSIEVE_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.isdigit() and int(raw) > 0:
        return int(raw)
    return 1


@dataclass(frozen=True)
class HitRecord:
    """One certified divisibility p^ord | n! + f(n) with n < p.

    `ord` is the exact valuation when `ord_exact` is set, otherwise a
    certified lower bound (lifting disabled, capped, or the rare n with
    n! + f(n) = 0 where every power divides).
    """

    p: int
    n: int
    ord: int
    f_id: str
    ord_exact: bool = True

    def sort_key(self) -> tuple[int, int]:
        return (self.p, self.n)


@dataclass(frozen=True)
class SieveConfig:
    f: Poly
    prime_lo: int
    prime_hi: int
    window: tuple[int, int] | None = None  # half-open [lo, hi); None = all n < p
    compute_ord: bool = True
    threads: int = 1
    ord_cap: int = 64
    f_id: str = "f0"

    def __post_init__(self) -> None:
        if self.prime_lo < 2 or self.prime_hi < self.prime_lo:
            raise ValueError("need 2 <= prime_lo <= prime_hi")
        if self.window is not None:
            lo, hi = self.window
            if lo < 0 or hi < lo:
                raise ValueError(f"bad window {self.window}")
        if self.threads < 1:
            raise ValueError("threads must be positive")


@dataclass
class HitStore:
    """Finalized, (p, n)-sorted, duplicate-free set of hits plus scan stats."""

    records: tuple[HitRecord, ...]
    prime_lo: int
    prime_hi: int
    primes_scanned: int
    f_id: str = "f0"

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @classmethod
    def build(
        cls,
        records: list[HitRecord],
        prime_lo: int,
        prime_hi: int,
        primes_scanned: int,
        f_id: str = "f0",
    ) -> "HitStore":
        uniq = {r.sort_key(): r for r in records}
        ordered = tuple(uniq[k] for k in sorted(uniq))
        return cls(ordered, prime_lo, prime_hi, primes_scanned, f_id)

    def by_prime(self) -> dict[int, list[HitRecord]]:
        out: dict[int, list[HitRecord]] = {}
        for r in self.records:
            out.setdefault(r.p, []).append(r)
        return out

    def max_hits_single_prime(self) -> int:
        counts = self.by_prime()
        return max((len(v) for v in counts.values()), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "n", "ord", "f_id"])
        for r in self.records:
            writer.writerow([r.p, r.n, r.ord, r.f_id])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "HitStore":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["p", "n", "ord", "f_id"]:
            raise ValueError(f"unexpected hits header {header}")
        records = [
            HitRecord(int(p), int(n), int(o), f_id) for p, n, o, f_id in reader
        ]
        p_vals = [r.p for r in records]
        lo = min(p_vals, default=2)
        hi = max(p_vals, default=2)
        f_id = records[0].f_id if records else "f0"
        return cls.build(records, lo, hi, len(set(p_vals)), f_id)


def scan_prime(
    p: int, window: tuple[int, int] | None, f: Poly
) -> list[int]:
    """Reference scan: all n in the window with p | n! + f(n).

    Pure-Python recurrence over n! mod p; the numpy kernel must agree with
    this exactly.
    """
    lo, hi = (1, p) if window is None else window
    lo, hi = max(lo, 1), min(hi, p)
    hits = []
    fact = 1 % p
    for n in range(1, hi):
        fact = fact * n % p
        if n >= lo and (fact + eval_poly_mod(f, n, p)) % p == 0:
            hits.append(n)
    return hits


def _lift_ord(p: int, n: int, f: Poly, cap: int) -> tuple[int, bool]:
    try:
        v = ord_fact_plus_poly(n, p, f, cap=cap)
        return v.value, v.exact
    except ValueIsZero:
        # every power of p divides 0; report the cap as a lower bound
        return cap, False


def _scan_block(
    primes: np.ndarray,
    coeffs: tuple[int, ...],
    window: tuple[int, int] | None,
    compute_ord: bool,
    ord_cap: int,
    f_id: str,
) -> list[HitRecord]:
    """Sideways scan of one contiguous block of primes (the numpy kernel)."""
    if len(primes) == 0:
        return []
    f = Poly(coeffs)
    pmax = int(primes[-1])
    if pmax > KERNEL_PRIME_LIMIT:
        raise ValueError(f"kernel limited to p <= {KERNEL_PRIME_LIMIT}")
    win_lo, win_hi = (1, pmax) if window is None else window
    n_stop = min(pmax, win_hi)  # scan n in [1, n_stop)

    P = primes.astype(np.int64)
    F = np.ones(len(P), dtype=np.int64)
    track_sq = compute_ord
    if track_sq:
        P2 = P * P
        F2 = np.ones(len(P), dtype=np.int64)
    const_target = None
    if f.degree == 0:
        const_target = (-f.coeffs[0]) % P

    hits: list[HitRecord] = []
    escalate: list[tuple[int, int]] = []
    lo = 0
    for n in range(1, n_stop):
        while lo < len(P) and P[lo] <= n:
            lo += 1
        if lo >= len(P):
            break
        Pv = P[lo:]
        Fv = F[lo:]
        Fv *= n
        Fv %= Pv
        if track_sq:
            F2v = F2[lo:]
            F2v *= n
            F2v %= P2[lo:]
        if n < win_lo:
            continue
        if const_target is not None:
            target = const_target[lo:]
        else:
            target = np.zeros(len(Pv), dtype=np.int64)
            for c in reversed(f.coeffs):
                target *= n
                target += -c
                target %= Pv
        for i in np.flatnonzero(Fv == target):
            p = int(Pv[i])
            if not compute_ord:
                hits.append(HitRecord(p, n, 1, f_id, ord_exact=False))
                continue
            p_sq = p * p
            val_sq = (int(F2v[i]) + eval_poly_mod(f, n, p_sq)) % p_sq
            if val_sq:
                hits.append(HitRecord(p, n, 1, f_id, ord_exact=True))
            else:
                escalate.append((p, n))
    for p, n in escalate:
        v, exact = _lift_ord(p, n, f, ord_cap)
        hits.append(HitRecord(p, n, v, f_id, ord_exact=exact))
    hits.sort(key=HitRecord.sort_key)
    return hits


def _block_slices(primes: np.ndarray, pieces: int) -> list[np.ndarray]:
    """Split ascending primes into contiguous blocks of roughly equal
    total scan cost (cost of prime p is p)."""
    if len(primes) == 0:
        return []
    weights = np.cumsum(primes.astype(np.float64))
    total = float(weights[-1])
    blocks = []
    start = 0
    for i in range(1, pieces + 1):
        cut = np.searchsorted(weights, total * i / pieces, side="right")
        cut = int(min(max(cut, start), len(primes)))
        if i == pieces:
            cut = len(primes)
        if cut > start:
            blocks.append(primes[start:cut])
            start = cut
    return blocks


def run_sieve(cfg: SieveConfig) -> HitStore:
    """Scan every prime in the configured range and collect hits.

    Deterministic for any thread count: blocks are merged and sorted at
    finalization, never streamed to the store out of order.
    """
    prange = primes_in(cfg.prime_lo, cfg.prime_hi)
    primes = np.array(prange.primes, dtype=np.int64)
    if cfg.window is not None and cfg.window[1] <= cfg.window[0]:
        return HitStore.build([], cfg.prime_lo, cfg.prime_hi, len(primes), cfg.f_id)
    blocks = _block_slices(primes, max(cfg.threads * 4, 1))
    args = [
        (b, cfg.f.coeffs, cfg.window, cfg.compute_ord, cfg.ord_cap, cfg.f_id)
        for b in blocks
    ]
    records: list[HitRecord] = []
    if cfg.threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for part in pool.map(_scan_block_star, args):
                records.extend(part)
    else:
        for a in args:
            records.extend(_scan_block_star(a))
    return HitStore.build(records, cfg.prime_lo, cfg.prime_hi, len(primes), cfg.f_id)


def _scan_block_star(args) -> list[HitRecord]:
    return _scan_block(*args)


@dataclass(frozen=True)
class WindowRatioRow:
    p: int
    count: int
    window_len_pow: float  # |J|^(2/3)
    ratio: float


def window_hit_ratios(
    store: HitStore, j_lo: float, j_hi: float
) -> list[WindowRatioRow]:
    """Per-prime count of hits inside [j_lo, j_hi) against |J|^(2/3).

    Report-only: the constant this ratio estimates is not pinned down, so
    nothing is asserted about its size.
    """
    length = j_hi - j_lo
    if length < 1:
        raise ValueError("window length must be >= 1")
    pow_len = length ** (2 / 3)
    rows = []
    for p, recs in sorted(store.by_prime().items()):
        count = sum(1 for r in recs if j_lo <= r.n < j_hi)
        rows.append(WindowRatioRow(p, count, pow_len, count / pow_len))
    return rows


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of the hit-set symmetry checks (n <-> p-1-n)."""

    primes_checked: int
    odd_instances: int
    odd_violations: tuple[tuple[int, int], ...]
    even_instances: int
    even_violations: tuple[tuple[int, int], ...]

    @property
    def holds(self) -> bool:
        return not self.odd_violations and not self.even_violations


def check_symmetry(store: HitStore) -> SymmetryReport:
    """Verify the classical reflection of hit sets for f = 1.

    For p >= 5: every odd hit n in [3, p-2] must have a companion hit at
    p-1-n, and every even hit n in [2, p-2] must map to a hit of f = -1 at
    p-1-n. Assumes the store covers full windows [1, p).
    """
    minus_one = Poly((-1,))
    primes_checked = 0
    odd_inst = even_inst = 0
    odd_bad: list[tuple[int, int]] = []
    even_bad: list[tuple[int, int]] = []
    for p, recs in store.by_prime().items():
        if p < 5:
            continue
        primes_checked += 1
        ns = {r.n for r in recs}
        evens = [n for n in ns if n % 2 == 0 and 2 <= n <= p - 2]
        neg_hits = set(scan_prime(p, None, minus_one)) if evens else set()
        for n in sorted(ns):
            if n % 2 == 1 and 3 <= n <= p - 2:
                odd_inst += 1
                if p - 1 - n not in ns:
                    odd_bad.append((p, n))
        for n in evens:
            even_inst += 1
            if p - 1 - n not in neg_hits:
                even_bad.append((p, n))
    return SymmetryReport(
        primes_checked, odd_inst, tuple(odd_bad), even_inst, tuple(even_bad)
    )
