"""Factorial multisets, factorial-product decomposition and smoothness filters."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .intervals import DEFAULT_PRECISION, Undecided, decide, less
from .sequence import values
from .valuations import ZeroTermError, max_factorial_for_nu2, nu, nu_factorial

SIEVE_LIMIT = 10_000


@lru_cache(maxsize=4)
def _sieve(limit: int) -> tuple[int, ...]:
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, limit + 1, p)))
    return tuple(i for i, f in enumerate(flags) if f)


def primes_up_to(n: int) -> tuple[int, ...]:
    """All primes <= n (the shared sieve is grown if n exceeds it)."""
    limit = SIEVE_LIMIT
    while limit < n:
        limit *= 4
    table = _sieve(limit)
    return table[: bisect.bisect_right(table, n)]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    table = primes_up_to(max(n, 2))
    return table[-1] == n


def next_prime(p: int) -> int:
    """Smallest prime strictly greater than ``p``."""
    q = p + 1
    while not is_prime(q):
        q += 1
    return q


@dataclass(frozen=True)
class FactorialMultiset:
    """m_1 <= ... <= m_k with every m_i >= 2, plus the product and its 2-adic valuation."""

    parts: tuple[int, ...]
    product: int = field(compare=False)
    nu2: int = field(compare=False)

    @classmethod
    def of(cls, parts) -> "FactorialMultiset":
        parts = tuple(sorted(parts))
        if parts and parts[0] < 2:
            raise ValueError("parts must be >= 2")
        product = 1
        for m in parts:
            product *= math.factorial(m)
        return cls(parts, product, sum(nu_factorial(2, m) for m in parts))

    def __str__(self) -> str:
        if not self.parts:
            return "1"
        chunks = []
        for m in sorted(set(self.parts), reverse=True):
            e = self.parts.count(m)
            chunks.append(f"({m}!)^{e}" if e > 1 else f"{m}!")
        return "·".join(reversed(chunks))


@lru_cache(maxsize=4096)
def _legendre_vector(m: int, width: int) -> tuple[int, ...]:
    ps = primes_up_to(m)
    vec = [nu_factorial(p, m) for p in ps]
    return tuple(vec + [0] * (width - len(vec)))


def decompose(n: int, max_solutions: int = 16) -> list[FactorialMultiset]:
    """All ways (up to ``max_solutions``) to write ``n`` as m_1!...m_k! with m_i >= 2.

    The largest part of any representation lies in [P, nextprime(P)) where
    P is the largest prime factor; parts are bounded up front by the 2-adic
    valuation, so only primes below that bound are ever tried.  The result is
    ordered by descending part list, largest first.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if max_solutions < 1:
        raise ValueError("max_solutions must be >= 1")
    if n == 1:
        return [FactorialMultiset.of(())]
    x = nu(2, n)
    if x == 0:
        return []
    top = max_factorial_for_nu2(x)
    ps = primes_up_to(top)
    exps = []
    rest = n
    for p in ps:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        exps.append(e)
    if rest != 1:
        return []
    width = len(ps)
    found: list[list[int]] = []
    dead: set = set()

    def descend(vec: tuple[int, ...], top: int, acc: list[int]) -> bool:
        # returns True iff at least one representation was found below this node
        if not any(vec):
            found.append(list(acc))
            return True
        key = (vec, top)
        if key in dead:
            return False
        big = max(i for i, e in enumerate(vec) if e)
        p = ps[big]
        hi = min(top, next_prime(p) - 1)
        hit = False
        for m in range(hi, p - 1, -1):
            lv = _legendre_vector(m, width)
            if all(a >= b for a, b in zip(vec, lv)):
                acc.append(m)
                if descend(tuple(a - b for a, b in zip(vec, lv)), m, acc):
                    hit = True
                acc.pop()
                if len(found) >= max_solutions:
                    return True
        if not hit:
            dead.add(key)
        return hit

    descend(tuple(exps), top, [])
    # recursion yields descending part lists in lexicographically descending order
    return [FactorialMultiset.of(parts) for parts in found[:max_solutions]]


def is_factorial_product(n: int) -> bool:
    return bool(decompose(n, 1))


def brute_force_decompositions(limit: int, max_part: int | None = None) -> dict[int, set[tuple[int, ...]]]:
    """Every multiset of parts >= 2 with product <= limit, keyed by product.

    Independent of :func:`decompose`; used as its test oracle.
    """
    if max_part is None:
        max_part = 2
        while math.factorial(max_part + 1) <= limit:
            max_part += 1
    facts = {m: math.factorial(m) for m in range(2, max_part + 1)}
    table: dict[int, set[tuple[int, ...]]] = {1: {()}}

    def grow(prod: int, low: int, parts: tuple[int, ...]):
        for m in range(low, max_part + 1):
            nxt = prod * facts[m]
            if nxt > limit:
                break
            key = parts + (m,)
            table.setdefault(nxt, set()).add(key)
            grow(nxt, m, key)

    grow(1, 2, ())
    return table


@dataclass(frozen=True)
class SmoothnessReport:
    index: int | None
    value_abs: int
    bound: int
    smooth: bool
    largest_found_factor: int | None
    cofactor_nontrivial: bool


def smoothness(value: int, bound: int, index: int | None = None) -> SmoothnessReport:
    """Trial-divide |value| by every prime <= bound."""
    if value == 0:
        raise ValueError("smoothness of 0 is undefined")
    v = abs(value)
    rest = v
    largest = None
    for p in primes_up_to(bound):
        if rest == 1:
            break
        if rest % p == 0:
            largest = p
            rest //= p
            while rest % p == 0:
                rest //= p
    return SmoothnessReport(index, v, bound, rest == 1, largest, rest != 1)


def smooth_index_scan_pos(n_max: int, bound: int) -> list[int]:
    """Indices 2 <= i <= n_max whose term is ``bound``-smooth."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    table = values(2, n_max)
    return [i for i, t in enumerate(table, start=2) if smoothness(t, bound).smooth]


def smooth_index_scan_neg(m_min: int, m_max: int, bound: int) -> list[int]:
    """m in [m_min, m_max] with T_{-m} nonzero and ``bound``-smooth."""
    if not 18 <= m_min <= m_max:
        raise ValueError("require 18 <= m_min <= m_max")
    table = values(-m_max, -m_min)
    out = []
    for m in range(m_min, m_max + 1):
        t = table[m_max - m]
        if t != 0 and smoothness(t, bound).smooth:
            out.append(m)
    return out


@dataclass(frozen=True)
class ProbeResult:
    """Whether p**k divides each listed term and the absolute product."""

    p: int
    k: int
    per_index: dict
    product: bool


def divisibility_probe(indices, p: int, k: int = 1) -> ProbeResult:
    indices = list(indices)
    if not indices:
        raise ValueError("indices must be nonempty")
    table = values(min(indices), max(indices))
    base = min(indices)
    q = p**k
    per = {}
    prod = 1
    for i in indices:
        t = table[i - base]
        if t == 0:
            raise ZeroTermError(i)
        per[i] = t % q == 0
        prod *= t
    return ProbeResult(p, k, per, prod % q == 0)


def factorial_ratio(m: int, ctx):
    """Enclosure of log(m!) / (nu_2(m!) log 2) for m >= 2."""
    return ctx.log(ctx.mpf(math.factorial(m))) / (nu_factorial(2, m) * ctx.log(2))


def factorial_ratio_max(m_max: int, precision_bits: int = DEFAULT_PRECISION):
    """(enclosure of the max ratio over 2 <= m <= m_max, maximizing m)."""
    if m_max < 2:
        raise ValueError("m_max must be >= 2")

    def run(ctx):
        best_m, best = 2, factorial_ratio(2, ctx)
        for m in range(3, m_max + 1):
            cur = factorial_ratio(m, ctx)
            if less(best, cur):
                best_m, best = m, cur
            elif not less(cur, best):
                raise Undecided(f"ratio tie at m={m}")
        return best, best_m

    return decide(run, precision_bits, what="factorial ratio maximum")


__all__ = [
    "FactorialMultiset",
    "ProbeResult",
    "SIEVE_LIMIT",
    "SmoothnessReport",
    "brute_force_decompositions",
    "decompose",
    "divisibility_probe",
    "factorial_ratio",
    "factorial_ratio_max",
    "is_factorial_product",
    "is_prime",
    "next_prime",
    "primes_up_to",
    "smooth_index_scan_neg",
    "smooth_index_scan_pos",
    "smoothness",
]
