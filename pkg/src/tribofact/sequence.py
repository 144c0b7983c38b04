"""Exact Tribonacci numbers at signed indices and the root data of x^3 - x^2 - x - 1."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .intervals import DEFAULT_PRECISION, CertificationError, Undecided, context, decide, less

# Companion matrix of the forward recurrence and its integer inverse (det = 1).
_FORWARD = ((1, 1, 1), (1, 0, 0), (0, 1, 0))
_BACKWARD = ((0, 1, 0), (0, 0, 1), (1, -1, -1))


@dataclass(frozen=True)
class TriTerm:
    index: int
    value: int

    @property
    def abs(self) -> int:
        return abs(self.value)


def _iterate(index: int) -> int:
    if index >= 0:
        a, b, c = 0, 1, 1  # T_n, T_{n+1}, T_{n+2}
        for _ in range(index):
            a, b, c = b, c, a + b + c
        return a
    # walk down: T_{k} = T_{k+3} - T_{k+2} - T_{k+1}
    a, b, c = 0, 1, 1  # T_k, T_{k+1}, T_{k+2} with k = 0
    for _ in range(-index):
        a, b, c = c - b - a, a, b
    return a


def _matmul(x, y):
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def _matpow(m, e: int):
    result = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    while e:
        if e & 1:
            result = _matmul(result, m)
        m = _matmul(m, m)
        e >>= 1
    return result


def _matrix(index: int) -> int:
    # M^n applied to (T_2, T_1, T_0) gives (T_{n+2}, T_{n+1}, T_n).
    m = _matpow(_FORWARD, index) if index >= 0 else _matpow(_BACKWARD, -index)
    return m[2][0] + m[2][1]


def term(index: int, method: str = "iterate") -> TriTerm:
    """Exact Tribonacci term at any signed index.

    ``method`` is ``"iterate"`` (linear recurrence walk) or ``"matrix"``
    (companion-matrix power); both yield identical integers.
    """
    if method == "iterate":
        return TriTerm(index, _iterate(index))
    if method == "matrix":
        return TriTerm(index, _matrix(index))
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=8)
def _block(lo: int, hi: int) -> tuple[int, ...]:
    """Values T_lo .. T_hi (inclusive) in index order."""
    if lo >= 0:
        out = []
        a, b, c = 0, 1, 1
        for k in range(hi + 1):
            if k >= lo:
                out.append(a)
            a, b, c = b, c, a + b + c
        return tuple(out)
    if hi <= 0:
        down = []
        a, b, c = 0, 1, 1
        for k in range(0, lo - 1, -1):
            if k <= hi:
                down.append(a)
            a, b, c = c - b - a, a, b
        return tuple(reversed(down))
    return _block(lo, -1) + _block(0, hi)


def values(lo: int, hi: int) -> tuple[int, ...]:
    """Exact values ``T_lo, ..., T_hi``; cached for repeated scans."""
    if hi < lo:
        return ()
    return _block(lo, hi)


def term_range(start: int, count: int, step: int = 1, direction: int = 1) -> list[TriTerm]:
    """Terms at ``start, start + d*step, ..., start + d*(count-1)*step``.

    ``direction`` is +1 (toward larger indices) or -1 (toward more negative
    indices, the natural order for products of negative-index terms).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if step < 1:
        raise ValueError("step must be >= 1")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    idx = [start + direction * i * step for i in range(count)]
    table = values(min(idx), max(idx))
    base = min(idx)
    return [TriTerm(i, table[i - base]) for i in idx]


@dataclass(frozen=True)
class RootData:
    """Enclosures of the characteristic roots and Binet coefficients.

    ``a_coeff``, ``b_abs`` and ``b_arg`` are the coefficients built from
    1/((alpha-beta)(alpha-gamma)) and 1/((beta-alpha)(beta-gamma)).  With
    those, a*alpha**m + 2 Re(b*beta**m) equals T_{m-1}, not T_m.  The
    ``*_term`` fields absorb one extra root factor so that
    T_m = a_term*alpha**m + 2 Re(b_term*beta**m) exactly.
    """

    precision_bits: int
    alpha: object
    beta_abs: object
    beta_arg: object
    a_coeff: object
    b_abs: object
    b_arg: object
    a_term: object
    b_term_abs: object
    b_term_arg: object
    facts: dict = field(default_factory=dict, compare=False)


def _root_intervals(ctx):
    sqrt33 = ctx.sqrt(ctx.mpf(33))
    r1 = ctx.exp(ctx.log(19 + 3 * sqrt33) / 3)
    r2 = ctx.exp(ctx.log(19 - 3 * sqrt33) / 3)
    alpha = (1 + r1 + r2) / 3
    re_beta = (2 - r1 - r2) / 6
    im_beta = ctx.sqrt(ctx.mpf(3)) * (r1 - r2) / 6
    if not (less(re_beta, 0) and less(0, im_beta)):
        raise Undecided("quadrant of beta")
    beta_abs = ctx.sqrt(re_beta**2 + im_beta**2)
    # beta lies in the second quadrant
    beta_arg = ctx.pi - ctx.atan2(im_beta, -re_beta)
    u = re_beta - alpha  # real part of beta - alpha (negative)
    w = im_beta
    a_coeff = 1 / (u**2 + w**2)
    # (beta - alpha)(beta - gamma) = 2w(-w + iu), which lies in the third quadrant
    b_abs = 1 / (2 * w * ctx.sqrt(u**2 + w**2))
    b_arg = ctx.pi - ctx.atan2(-u, w)
    return alpha, beta_abs, beta_arg, a_coeff, b_abs, b_arg


def _interval_checks(ctx, alpha, beta_abs, beta_arg):
    """(name, smaller, larger) triples; each claims ``smaller < larger``."""
    one_side = ctx.pi - beta_arg
    other = 3 * ctx.pi / 2 - beta_arg
    c = ctx.mpf
    return [
        ("1.83 < alpha", c("1.83"), alpha),
        ("alpha < 1.84", alpha, c("1.84")),
        ("0.73 < |beta|", c("0.73"), beta_abs),
        ("|beta| < 0.74", beta_abs, c("0.74")),
        ("0.96 < pi - arg(beta)", c("0.96"), one_side),
        ("pi - arg(beta) < 0.97", one_side, c("0.97")),
        ("2.53 < 3pi/2 - arg(beta)", c("2.53"), other),
        ("3pi/2 - arg(beta) < 2.54", other, c("2.54")),
    ]


@lru_cache(maxsize=16)
def root_data(precision_bits: int = DEFAULT_PRECISION) -> RootData:
    """Root data enclosed at ``precision_bits`` working precision.

    Raises :class:`CertificationError` naming the first interval fact that
    cannot be confirmed.
    """
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    ctx = context(precision_bits)
    try:
        alpha, beta_abs, beta_arg, a_coeff, b_abs, b_arg = _root_intervals(ctx)
    except Undecided as exc:
        raise CertificationError(f"root data undecided: {exc}") from exc
    facts = {}
    for name, small, big in _interval_checks(ctx, alpha, beta_abs, beta_arg):
        try:
            ok = less(small, big)
        except Undecided:
            raise CertificationError(f"cannot certify {name} at {precision_bits} bits") from None
        if not ok:
            raise CertificationError(f"interval fact violated: {name}")
        facts[name] = True
    return RootData(
        precision_bits, alpha, beta_abs, beta_arg, a_coeff, b_abs, b_arg,
        a_coeff * alpha, b_abs * beta_abs, b_arg + beta_arg, facts,
    )


def growth_bound_holds(n: int, precision_bits: int = DEFAULT_PRECISION) -> bool:
    """Decide ``alpha**(n-2) <= T_n`` for ``n >= 1`` with outward rounding."""
    if n < 1:
        raise ValueError("n must be >= 1")
    t = term(n).value

    def check(ctx):
        alpha = _root_intervals(ctx)[0]
        power = alpha ** (n - 2)
        result = power <= t
        if result is None:
            raise Undecided(f"alpha^{n - 2} vs T_{n}")
        return bool(result)

    return decide(check, precision_bits, what=f"growth bound at n={n}")


def binet_value(m: int, ctx):
    """Enclosure of a_term*alpha**m + 2 Re(b_term*beta**m); contains T_m."""
    alpha, beta_abs, beta_arg, a_coeff, b_abs, b_arg = _root_intervals(ctx)
    phase = b_arg + beta_arg + m * beta_arg
    return a_coeff * alpha ** (m + 1) + 2 * b_abs * beta_abs ** (m + 1) * ctx.cos(phase)


def binet_envelope_holds(m: int, precision_bits: int = DEFAULT_PRECISION) -> bool:
    """Decide ``|T_{-m}| <= 2|b_term||beta|^{-m} + a_term*alpha^{-m}``."""
    t = abs(term(-m).value)

    def check(ctx):
        alpha, beta_abs, _, a_coeff, b_abs, _ = _root_intervals(ctx)
        env = 2 * b_abs * beta_abs ** (1 - m) + a_coeff * alpha ** (1 - m)
        result = t <= env
        if result is None:
            raise Undecided(f"envelope at m={m}")
        return bool(result)

    return decide(check, precision_bits, what=f"Binet envelope at m={m}")


@dataclass
class WindowReport:
    """Outcome of the two-of-three lower-bound scan over negative indices."""

    m_start: int
    m_end: int
    windows_checked: int
    weak_terms: list[int]
    zero_terms: list[int]
    violations: list[tuple[int, int, int]]
    precision_bits: int

    @property
    def ok(self) -> bool:
        return not self.violations and not self.zero_terms


def neg_lower_bound_window(
    m_start: int, m_end: int, precision_bits: int = DEFAULT_PRECISION
) -> WindowReport:
    """Check that every window {m, m+1, m+2} has two terms with |T_{-m}| > 0.31*0.74^{-m}.

    Terms failing the inequality are listed in ``weak_terms``; any zero term is
    a violation of the accompanying ``|T_{-m}| >= 1`` claim.
    """
    if not 18 <= m_start <= m_end:
        raise ValueError("require 18 <= m_start <= m_end")
    table = values(-m_end, -m_start)  # T_{-m_end} .. T_{-m_start}

    def strong(m: int) -> bool:
        t = abs(table[m_end - m])

        def check(ctx):
            return less(ctx.mpf("0.31") * (1 / ctx.mpf("0.74")) ** m, t)

        return decide(check, precision_bits, what=f"lower bound at m={m}")

    flags = {m: strong(m) for m in range(m_start, m_end + 1)}
    zeros = [m for m in range(m_start, m_end + 1) if table[m_end - m] == 0]
    violations = []
    windows = 0
    for m in range(m_start, m_end - 1):
        windows += 1
        count = flags[m] + flags[m + 1] + flags[m + 2]
        if count < 2:
            violations.append((m, m + 1, m + 2))
    weak = [m for m, ok in flags.items() if not ok]
    return WindowReport(m_start, m_end, windows, weak, zeros, violations, precision_bits)


def window_tail_certificate(m0: int, precision_bits: int = DEFAULT_PRECISION) -> dict:
    """Certify the two-of-three property for every window starting at m >= m0.

    With the normalized Binet form, |T_{-m}| > 0.31*0.74^{-m} whenever
    |cos(phi_m)| > tau, where phi_m steps by arg(beta) and tau bounds the
    ratio (0.31*0.74^{-m} + a_term*alpha^{-m}) / (2|b_term||beta|^{-m})
    for all m >= m0 (it decreases in m).  Two weak terms at lag 1 or 2 would
    put lag*arg(beta) within 2*asin(tau) of a multiple of pi, so it suffices
    that tau < sin(d/2) for both lag distances d.
    """
    if m0 < 18:
        raise ValueError("m0 must be >= 18")

    def check(ctx):
        alpha, beta_abs, beta_arg, a_coeff, b_abs, _ = _root_intervals(ctx)
        a_t, b_t = a_coeff * alpha, b_abs * beta_abs
        tau = (ctx.mpf("0.31") * (beta_abs / ctx.mpf("0.74")) ** m0
               + a_t * (beta_abs / alpha) ** m0) / (2 * b_t)
        lag1 = ctx.pi - beta_arg
        lag2 = 2 * beta_arg - ctx.pi  # 2 arg(beta) lies in (pi, 3pi/2)
        if not (less(ctx.pi, 2 * beta_arg) and less(lag2, ctx.pi / 2)):
            raise Undecided("lag-2 phase position")
        ok1 = less(tau, ctx.sin(lag1 / 2))
        ok2 = less(tau, ctx.sin(lag2 / 2))
        return {"m0": m0, "tau": tau, "lag1_ok": ok1, "lag2_ok": ok2, "ok": ok1 and ok2}

    return decide(check, precision_bits, what=f"window tail from m={m0}")


__all__ = [
    "RootData",
    "TriTerm",
    "WindowReport",
    "binet_envelope_holds",
    "binet_value",
    "growth_bound_holds",
    "neg_lower_bound_window",
    "root_data",
    "term",
    "term_range",
    "values",
    "window_tail_certificate",
]

