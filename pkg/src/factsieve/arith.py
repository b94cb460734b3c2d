"""Exact arithmetic kernels: integer polynomials, factorials modulo m,
and p-adic valuations of n! + f(n).

Everything here is pure and stateless; results are bit-exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

# Chunk length for the batched factorial products. Products of 64 numbers
# below 2^20 stay near 1280 bits, small enough that one big modulo per
# chunk beats one small modulo per factor.
_FACT_CHUNK = 64


class ValueIsZero(ArithmeticError):
    """n! + f(n) is exactly zero, so its valuation is undefined."""


@dataclass(frozen=True)
class Poly:
    """Nonzero integer polynomial, constant coefficient first."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        trimmed = tuple(self.coeffs)
        while trimmed and trimmed[-1] == 0:
            trimmed = trimmed[:-1]
        if not trimmed:
            raise ValueError("the zero polynomial is not allowed")
        object.__setattr__(self, "coeffs", trimmed)

    @classmethod
    def parse(cls, text: str) -> "Poly":
        """Parse a comma-separated coefficient list, constant term first."""
        try:
            coeffs = tuple(int(part.strip()) for part in text.split(","))
        except ValueError as exc:
            raise ValueError(f"bad polynomial spec {text!r}") from exc
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, n: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}x" if c != 1 else "x")
            else:
                terms.append(f"{c}x^{i}" if c != 1 else f"x^{i}")
        return " + ".join(terms).replace("+ -", "- ")


@dataclass(frozen=True)
class PrimePowerModulus:
    """A modulus p^e for a prime p. Primality is the caller's contract;
    use `checked` to have it certified."""

    p: int
    e: int

    def __post_init__(self) -> None:
        if self.p < 2 or self.e < 1:
            raise ValueError(f"bad prime power {self.p}^{self.e}")

    @property
    def m(self) -> int:
        return self.p**self.e

    @classmethod
    def checked(cls, p: int, e: int) -> "PrimePowerModulus":
        from .primes import is_prime

        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return cls(p, e)


@dataclass(frozen=True)
class Valuation:
    """Outcome of a p-adic valuation: exact, or a certified lower bound."""

    value: int
    exact: bool = True

    def __str__(self) -> str:
        return str(self.value) if self.exact else f"at_least {self.value}"


def growth_exponent(f: Poly) -> int:
    """Smallest convenient c with |f(n)| <= n^c for all n >= 2.

    Uses c = deg f + ceil(log2 sum|coeffs|): for n >= 2,
    |f(n)| <= (sum|a_i|) n^deg <= 2^ceil(log2 sum) n^deg <= n^c.
    """
    total = sum(abs(c) for c in f.coeffs)
    return f.degree + max(0, (total - 1).bit_length())


def eval_poly_mod(f: Poly, n: int, m: int) -> int:
    """f(n) mod m by Horner's rule, reducing after every step."""
    if m < 2:
        raise ValueError("modulus must be >= 2")
    acc = 0
    for c in reversed(f.coeffs):
        acc = (acc * n + c) % m
    return acc


def factorial_mod(n: int, m: int) -> int:
    """n! mod m, batching factors into small exact products before reducing."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return 0
    r = 1
    k = 2
    while k <= n:
        hi = min(k + _FACT_CHUNK, n + 1)
        r = r * math.prod(range(k, hi)) % m
        k = hi
    return r


def factorials_mod(n: int, m: int) -> Iterator[tuple[int, int]]:
    """Yield (k, k! mod m) for k = 1..n, reusing the running product."""
    if m < 1:
        raise ValueError("modulus must be positive")
    r = 1 % m
    for k in range(1, n + 1):
        r = r * k % m
        yield k, r


def ord_p_factorial(n: int, p: int) -> int:
    """Valuation of n! at p (Legendre): sum of floor(n / p^i)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def _int_valuation(value: int, p: int) -> int:
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


def _fact_plus_poly_cmp(n: int, f: Poly, threshold: int) -> int:
    """Sign of (n! + f(n)) - threshold without always building n!.

    Beyond a crossover n! dwarfs any fixed polynomial, so the exact
    comparison is only computed where it could matter.
    """
    fn = f(n)
    if fn >= threshold:
        return 1
    if n > 200:
        # lgamma slack of 2 bits is far more than its rounding error
        fact_bits = math.lgamma(n + 1) / math.log(2)
        if (abs(fn) + abs(threshold)).bit_length() < fact_bits - 2:
            return 1
    diff = math.factorial(n) + fn - threshold
    return (diff > 0) - (diff < 0)


def ord_fact_plus_poly(n: int, p: int, f: Poly, cap: int = 64) -> Valuation:
    """Valuation of n! + f(n) at p, exact up to `cap`.

    Doubles the lifting exponent e until (n! + f(n)) mod p^e is nonzero;
    a zero residue at e >= cap yields an `at_least` result rather than a
    false claim of exactness. For n >= p the factorial valuation from
    Legendre's formula settles most cases without any lifting.
    """
    if n < 1 or p < 2 or cap < 1:
        raise ValueError("need n >= 1, p >= 2, cap >= 1")
    if _fact_plus_poly_cmp(n, f, 0) == 0:
        raise ValueIsZero(f"{n}! + f({n}) = 0")
    if n >= p:
        a = ord_p_factorial(n, p)
        fn = f(n)
        if fn == 0:
            return Valuation(a, exact=True)
        b = _int_valuation(abs(fn), p)
        if a != b:
            return Valuation(min(a, b), exact=True)
    e = 1
    while True:
        m = p**e
        r = (factorial_mod(n, m) + eval_poly_mod(f, n, m)) % m
        if r:
            return Valuation(_int_valuation(r, p), exact=True)
        if e >= cap:
            return Valuation(e, exact=False)
        e = min(2 * e, cap)


def default_n0(f: Poly) -> int | None:
    """Safe start-of-range for f = +/-1; other polynomials need a
    user-supplied value (see validate_n0)."""
    if f.coeffs in ((1,), (-1,)):
        return 2
    return None


def validate_n0(
    f: Poly,
    n0: int,
    n_check: int = 10**4,
    k_check: int = 10**3,
) -> bool:
    """Exhaustively test that f(n) * (n+1)...(n+k) - f(n+k) never vanishes
    for n0 <= n <= n_check, 1 <= k <= k_check, and that n! + f(n) > 1 and
    f(n) != 0 hold on the same range.

    The product side grows factorially, so the k loop exits after a few
    steps; the whole search is effectively linear in n_check.
    """
    if n0 < 2:
        return False
    c1 = growth_exponent(f)
    # largest |f| can get anywhere in the searched window
    f_bound = (n_check + k_check) ** c1 + 1
    for n in range(n0, n_check + 1):
        fn = f(n)
        if fn == 0:
            return False
        if _fact_plus_poly_cmp(n, f, 1) <= 0:
            return False
        prod = 1
        for k in range(1, k_check + 1):
            prod *= n + k
            if fn * prod == f(n + k):
                return False
            if abs(fn) * prod > f_bound:
                break
    return True
