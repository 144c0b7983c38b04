"""Outward-rounded real arithmetic used to decide strict inequalities.

Every transcendental quantity is carried as an mpmath interval that is
guaranteed to contain the true value.  A comparison is *decided* only when
the two enclosures are disjoint; otherwise :class:`Undecided` is raised and
the caller retries at a higher precision (see :func:`decide`).
"""

from __future__ import annotations

import functools

import mpmath
from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import mpf_ceil, mpf_floor, to_int

DEFAULT_PRECISION = 128
MAX_PRECISION = 1024


class Undecided(ArithmeticError):
    """Two enclosures overlap, so the comparison cannot be settled."""


class CertificationError(ArithmeticError):
    """A comparison stayed undecided up to :data:`MAX_PRECISION` bits."""


@functools.lru_cache(maxsize=None)
def context(precision_bits: int = DEFAULT_PRECISION) -> MPIntervalContext:
    # One context per precision; contexts are never mutated after creation.
    ctx = MPIntervalContext()
    ctx.prec = precision_bits
    return ctx


def endpoints(value):
    """Return ``(lo, hi)`` of an interval as plain mpmath reals."""
    lo, hi = value._mpi_
    # make_mpf wraps the raw endpoints without rounding to the global precision.
    return mpmath.mp.make_mpf(lo), mpmath.mp.make_mpf(hi)


def lower(value) -> mpmath.mpf:
    return endpoints(value)[0]


def upper(value) -> mpmath.mpf:
    return endpoints(value)[1]


def less(a, b) -> bool:
    """Decide ``a < b`` for intervals (or exact numbers)."""
    result = a < b
    if result is None:
        raise Undecided(f"cannot decide {a} < {b}")
    return bool(result)


def less_equal(a, b) -> bool:
    result = a <= b
    if result is None:
        raise Undecided(f"cannot decide {a} <= {b}")
    return bool(result)


def int_below(value) -> int:
    """Largest integer ``k`` with ``k < v`` for every ``v`` in the enclosure."""
    lo, hi = value._mpi_
    k_lo = int(to_int(mpf_ceil(lo))) - 1
    k_hi = int(to_int(mpf_ceil(hi))) - 1
    if k_lo != k_hi:
        raise Undecided(f"strict integer bound of {value} is ambiguous")
    return k_lo


def int_at_most(value) -> int:
    """Largest integer ``k`` with ``k <= v`` for every ``v`` in the enclosure."""
    lo, hi = value._mpi_
    k_lo = int(to_int(mpf_floor(lo)))
    if k_lo != int(to_int(mpf_floor(hi))):
        raise Undecided(f"integer bound of {value} is ambiguous")
    return k_lo


def decide(fn, precision_bits: int = DEFAULT_PRECISION, *, what: str = "comparison"):
    """Call ``fn(ctx)`` at increasing precision until it stops raising Undecided.

    Precision doubles on every failure, capped at :data:`MAX_PRECISION`.
    """
    bits = precision_bits
    while True:
        try:
            return fn(context(bits))
        except Undecided as exc:
            if bits >= MAX_PRECISION:
                raise CertificationError(f"{what} undecided at {bits} bits: {exc}") from exc
            bits = min(2 * bits, MAX_PRECISION)


def log2_floor(n: int) -> int:
    """Exact ``floor(log2 n)`` for a positive integer."""
    return n.bit_length() - 1


def to_float(value) -> float:
    lo, hi = endpoints(value)
    return float((lo + hi) / 2)


def fmt(value, digits: int = 12) -> str:
    """Midpoint of an enclosure as a short decimal string (reporting only)."""
    lo, hi = endpoints(value)
    mid = (lo + hi) / 2
    if mpmath.isinf(mid) or mpmath.isnan(mid):
        return str(mid)
    return mpmath.nstr(mid, digits)


__all__ = [
    "CertificationError",
    "DEFAULT_PRECISION",
    "MAX_PRECISION",
    "Undecided",
    "context",
    "decide",
    "endpoints",
    "fmt",
    "int_at_most",
    "int_below",
    "less",
    "less_equal",
    "log2_floor",
    "lower",
    "to_float",
    "upper",
]
