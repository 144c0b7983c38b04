"""p-adic valuations of integers, factorials and Tribonacci numbers."""

from __future__ import annotations

from dataclasses import dataclass

from .intervals import DEFAULT_PRECISION, context, log2_floor, upper
from .sequence import values


class UndefinedValuation(ValueError):
    """The valuation of zero is not a finite integer."""


class ZeroTermError(ValueError):
    def __init__(self, index: int):
        super().__init__(f"T_{index} = 0 lies in the window")
        self.index = index


def nu(p: int, n: int) -> int:
    """Exponent of the prime ``p`` in ``n`` (sign ignored)."""
    if n == 0:
        raise UndefinedValuation("nu(p, 0) is undefined")
    n = abs(n)
    if p == 2:
        return (n & -n).bit_length() - 1
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def nu_factorial(p: int, m: int) -> int:
    """Legendre's formula: sum of floor(m / p^i)."""
    total = 0
    q = p
    while q <= m:
        total += m // q
        q *= p
    return total


def max_factorial_for_nu2(x: int) -> int:
    """Largest m with nu_2(m!) <= x."""
    if x < 0:
        raise ValueError("x must be >= 0")
    m = 1
    while nu_factorial(2, m + 1) <= x:
        m += 1
    return m


# Branch label -> (predicate, closed form).  The order is the table's order.
_BRANCHES = (
    ("n≡1,2 (mod 4)", lambda n: n % 4 in (1, 2), lambda n: 0),
    ("n≡3,11 (mod 16)", lambda n: n % 16 in (3, 11), lambda n: 1),
    ("n≡4,8 (mod 16)", lambda n: n % 16 in (4, 8), lambda n: 2),
    ("n≡7 (mod 16)", lambda n: n % 16 == 7, lambda n: 3),
    ("n≡0 (mod 16)", lambda n: n % 16 == 0, lambda n: nu(2, n) - 1),
    ("n≡12 (mod 16)", lambda n: n % 16 == 12, lambda n: nu(2, n + 4) - 1),
    ("n≡15 (mod 32)", lambda n: n % 32 == 15, lambda n: nu(2, n + 17) + 1),
    ("n≡31 (mod 32)", lambda n: n % 32 == 31, lambda n: nu(2, n + 1) + 1),
)
BRANCH_LABELS = tuple(label for label, _, _ in _BRANCHES)


@dataclass(frozen=True)
class ValuationCase:
    index: int
    residue_branch: str
    valuation: int


def matching_branches(n: int) -> list[str]:
    """Every branch whose residue condition holds for ``n`` (one, if the table partitions)."""
    return [label for label, test, _ in _BRANCHES if test(n)]


def nu2_tribo_closed(n: int) -> ValuationCase:
    """nu_2(T_n) for n >= 1 from the residue-class table, without computing T_n."""
    if n < 1:
        raise ValueError("closed form needs n >= 1")
    for label, test, value in _BRANCHES:
        if test(n):
            return ValuationCase(n, label, value(n))
    raise AssertionError(f"no branch for n={n}")  # unreachable: branches cover Z/32


def branch_cap(label: str, limit: int) -> int:
    """Largest valuation a branch can produce for indices m with m + 17 <= limit."""
    lg = log2_floor(limit)
    return {
        BRANCH_LABELS[0]: 0,
        BRANCH_LABELS[1]: 1,
        BRANCH_LABELS[2]: 2,
        BRANCH_LABELS[3]: 3,
        BRANCH_LABELS[4]: lg - 1,
        BRANCH_LABELS[5]: lg - 1,
        BRANCH_LABELS[6]: lg + 1,
        BRANCH_LABELS[7]: lg + 1,
    }[label]


def per_term_cap(limit: int) -> int:
    """Uniform cap floor(log2(limit)) + 1 on nu_2(T_m) whenever m + 17 <= limit."""
    return log2_floor(limit) + 1


def window_cap(length: int, limit: int) -> int:
    """Max of sum nu_2(T_m) over ``length`` consecutive m under per-branch caps.

    Every start residue mod 32 is tried, so the result does not depend on
    where the window sits.
    """
    caps = [branch_cap(nu2_tribo_closed(k).residue_branch, limit) for k in range(1, 33)]
    best = 0
    for s in range(32):
        total = sum(caps[(s + j) % 32] for j in range(length))
        best = max(best, total)
    return best


def ceiling_form_bound(r: int, big_n: int, precision_bits: int = DEFAULT_PRECISION):
    """Interval for 15⌈(r+1)/16⌉ + 3(r+1)/16 + 12⌈(r+1)/32⌉ + 4 log2(big_n) - 18."""
    ctx = context(precision_bits)
    k = r + 1
    exact = 15 * -(-k // 16) + 12 * -(-k // 32) - 18
    return exact + ctx.mpf(3 * k) / 16 + 4 * ctx.log(big_n) / ctx.log(2)


def ceiling_form_holds(total: int, r: int, big_n: int) -> bool:
    """Exact test of total <= ceiling-form bound, with no rounding.

    Multiplying through by 16 leaves K <= 64 log2(big_n) for an integer K,
    i.e. 2^K <= big_n^64.
    """
    k = r + 1
    slack = 16 * (total - 15 * -(-k // 16) - 12 * -(-k // 32) + 18) - 3 * k
    return slack <= 0 or (1 << slack) <= big_n**64


def simplified_bound(r: int, big_n: int, precision_bits: int = DEFAULT_PRECISION):
    """Interval for 3(r+1)/2 + 9 + 4 log2(big_n)."""
    ctx = context(precision_bits)
    return ctx.mpf(3 * (r + 1)) / 2 + 9 + 4 * ctx.log(big_n) / ctx.log(2)


@dataclass(frozen=True)
class ValuationSumBound:
    """Exact sum of nu_2 over a window next to its two closed-form ceilings.

    Bounds are upper endpoints of the enclosures, i.e. rounded up.
    """

    n: int
    r: int
    side: str
    exact_sum: int
    bound_value: object
    simplified_value: object

    @property
    def holds(self) -> bool:
        return self.exact_sum <= self.bound_value and self.exact_sum <= self.simplified_value


def valuation_sum_bound_pos(n: int, r: int, precision_bits: int = DEFAULT_PRECISION) -> ValuationSumBound:
    """Sum of nu_2(T_{n+i}) for 0 <= i <= r against the bounds with log2(n+r+17)."""
    if n < 3 or r < 1:
        raise ValueError("require n >= 3 and r >= 1")
    exact = sum(nu2_tribo_closed(n + i).valuation for i in range(r + 1))
    big_n = n + r + 17
    out = ValuationSumBound(
        n, r, "positive", exact,
        upper(ceiling_form_bound(r, big_n, precision_bits)),
        upper(simplified_bound(r, big_n, precision_bits)),
    )
    if not out.holds:
        raise AssertionError(f"valuation sum bound fails at n={n}, r={r}")
    return out


def valuation_sum_bound_neg(n: int, r: int, precision_bits: int = DEFAULT_PRECISION) -> ValuationSumBound:
    """Sum of nu_2(|T_{-n-i}|) computed directly, against the bounds with log2(n+r).

    There is no closed form at negative indices, so the bound is checked
    rather than assumed; a failure raises AssertionError.
    """
    if n < 18 or r < 1:
        raise ValueError("require n >= 18 and r >= 1")
    block = values(-(n + r), -n)
    exact = 0
    for i in range(r + 1):
        t = block[r - i]
        if t == 0:
            raise ZeroTermError(-(n + i))
        exact += nu(2, t)
    big_n = n + r
    out = ValuationSumBound(
        n, r, "negative", exact,
        upper(ceiling_form_bound(r, big_n, precision_bits)),
        upper(simplified_bound(r, big_n, precision_bits)),
    )
    if not out.holds:
        raise AssertionError(f"valuation sum bound fails at n={n}, r={r}")
    return out


def pos_valuation_scan(n_min: int, n_max: int, r_max: int) -> list[tuple[int, int]]:
    """(n, r) windows on the positive side where the ceiling-form bound fails."""
    if n_min < 3:
        raise ValueError("n_min must be >= 3")
    vals = [0] + [nu2_tribo_closed(m).valuation for m in range(1, n_max + r_max + 1)]
    bad = []
    for n in range(n_min, n_max + 1):
        total = vals[n]
        for r in range(1, r_max + 1):
            total += vals[n + r]
            if not ceiling_form_holds(total, r, n + r + 17):
                bad.append((n, r))
    return bad


def neg_valuation_scan(n_min: int, n_max: int, r_max: int) -> dict:
    """Check the positive-side valuation bounds on negative-index windows.

    For every 18 <= n_min <= n <= n_max and 1 <= r <= r_max the direct sum of
    nu_2(|T_{-n-i}|) is compared with the ceiling-form bound at log2(n+r),
    and for windows shorter than 16 with :func:`window_cap`.  Returns the
    violating (n, r) pairs of each kind.
    """
    if n_min < 18:
        raise ValueError("n_min must be >= 18")
    top = n_max + r_max
    block = values(-top, -n_min)
    vals = {}
    for m in range(n_min, top + 1):
        t = block[top - m]
        if t == 0:
            raise ZeroTermError(-m)
        vals[m] = nu(2, t)
    ceiling_bad, cap_bad = [], []
    caps = {}
    for n in range(n_min, n_max + 1):
        total = vals[n]
        for r in range(1, r_max + 1):
            total += vals[n + r]
            if not ceiling_form_holds(total, r, n + r):
                ceiling_bad.append((n, r))
            if r + 1 < 16:
                key = (r + 1, log2_floor(n + r + 17))
                if key not in caps:
                    caps[key] = window_cap(r + 1, n + r + 17)
                if total > caps[key]:
                    cap_bad.append((n, r))
    return {"ceiling_form": ceiling_bad, "window_cap": cap_bad}


__all__ = [
    "BRANCH_LABELS",
    "UndefinedValuation",
    "ValuationCase",
    "ValuationSumBound",
    "ZeroTermError",
    "branch_cap",
    "ceiling_form_bound",
    "ceiling_form_holds",
    "matching_branches",
    "pos_valuation_scan",
    "neg_valuation_scan",
    "max_factorial_for_nu2",
    "nu",
    "nu2_tribo_closed",
    "nu_factorial",
    "per_term_cap",
    "simplified_bound",
    "valuation_sum_bound_neg",
    "valuation_sum_bound_pos",
    "window_cap",
]
