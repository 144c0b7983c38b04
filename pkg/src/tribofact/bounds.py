"""Certified inequality cascades bounding x, r, n (and rd), plus the case refinements.

Each cascade certifies a *stated* bound on x.  Three sweeps are run:

* the combined single-variable display, in its sound form, swept over integer x;
* the same display exactly as printed, when it differs from the sound form;
* the joint system in integer (x, r, n) that the display relaxes.

The stated bound is certified when no x above it is feasible: beyond the
sound display's maximum nothing is feasible at all, and between the claim
and that maximum the joint system is checked x by x.  The r, n and rd bounds
are then derived from the certified x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .intervals import (
    DEFAULT_PRECISION,
    Undecided,
    context,
    decide,
    fmt,
    int_at_most,
    int_below,
    less,
    less_equal,
    lower,
)
from .valuations import ceiling_form_bound, max_factorial_for_nu2, per_term_cap, window_cap

DIVERGENCE_LIMIT = 10**6
MAX_REFINEMENT_STEPS = 50

# Stated bounds carried by the three theorems.
STATED_X = {"T1": 246, "T2": 609, "T3": 25769}


class CascadeDivergence(ArithmeticError):
    """The x-sweep ran past the divergence guard without closing."""


@dataclass(frozen=True)
class TraceStep:
    id: str
    values: dict
    bound: str

    def to_json(self) -> dict:
        return {"id": self.id, "values": {k: str(v) for k, v in self.values.items()}, "bound": self.bound}


@dataclass
class BoundCertificate:
    theorem: str
    d: int
    x_max: int
    r_max: int
    n_max: int
    rd_max: int | None
    trace: list[TraceStep]
    precision_bits: int
    claim: int | None = None
    certified: bool = True
    x_display: int | None = None
    x_display_printed: int | None = None
    x_joint: int | None = None
    n_argmax_r: int | None = None
    discrepancies: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        opt = lambda v: None if v is None else str(v)  # noqa: E731
        return {
            "theorem": self.theorem,
            "d": str(self.d),
            "x_max": str(self.x_max),
            "r_max": str(self.r_max),
            "n_max": str(self.n_max),
            "rd_max": opt(self.rd_max),
            "trace": [s.to_json() for s in self.trace],
            "claim": opt(self.claim),
            "certified": self.certified,
            "x_display": opt(self.x_display),
            "x_display_printed": opt(self.x_display_printed),
            "x_joint": opt(self.x_joint),
            "n_argmax_r": opt(self.n_argmax_r),
            "discrepancies": list(self.discrepancies),
            "precision_bits": str(self.precision_bits),
        }


# ---------------------------------------------------------------- formula pieces


@lru_cache(maxsize=None)
def _consts(prec: int):
    ctx = context(prec)
    return {
        "log2": ctx.log(2),
        "log183": ctx.log(ctx.mpf("1.83")),
        "log074": ctx.log(ctx.mpf("0.74")),
        "log031": ctx.log(ctx.mpf("0.31")),
    }


def _pow2(ctx, e):
    return ctx.exp(e * _consts(ctx.prec)["log2"])


@lru_cache(maxsize=65536)
def _xlog(prec: int, x: int):
    """x log(3x) as an enclosure."""
    ctx = context(prec)
    return x * ctx.log(ctx.mpf(3 * x))


def _big_a(ctx, x):
    """3x log(3x) / log(1.83)."""
    return 3 * _xlog(ctx.prec, x) / _consts(ctx.prec)["log183"]


def _big_r(ctx, x, d=1):
    """sqrt(6x log(3x) / (d log 1.83)), the r bound from the size lemma."""
    return ctx.sqrt(6 * _xlog(ctx.prec, x) / (d * _consts(ctx.prec)["log183"]))


def _big_s(ctx, x):
    """sqrt(30x log(3x) + 234), used for the negative-side r bound."""
    return ctx.sqrt(30 * _xlog(ctx.prec, x) + 234)


def _n_upper_pos(ctx, x, r, d=1):
    """2 - rd/2 + 3x log(3x) / ((r+1) log 1.83): strict upper bound on n."""
    return 2 - ctx.mpf(r * d) / 2 + _big_a(ctx, x) / (r + 1)


def _n_upper_neg(ctx, x, r):
    """Strict upper bound on n from the product lower bound on the negative side."""
    c = _consts(ctx.prec)
    k = 2 * r - 1
    return -9 * _xlog(ctx.prec, x) / (k * c["log074"]) + 6 * c["log031"] / c["log074"] - ctx.mpf(r * r - 1) / k


def lemma_size_bound(n: int, r: int, d: int, x: int, precision_bits: int = DEFAULT_PRECISION) -> bool:
    """(n - 2 + rd/2)(r + 1) < 3x log(3x)/log(1.83), decided with outward rounding."""
    if n < 3 or r < 1 or d < 1 or x < 1:
        raise ValueError("require n >= 3 and positive r, d, x")
    twice_lhs = (2 * n - 4 + r * d) * (r + 1)  # exact integer

    def check(ctx):
        return less(twice_lhs, 2 * _big_a(ctx, x))

    return decide(check, precision_bits, what="size lemma")


# ---------------------------------------------------------------- per-theorem systems


def _exists_n(ctx, lo, hi, n_floor):
    """Is there an integer n >= n_floor with lo <= n < hi?  None once hi itself is too small."""
    k = int_below(hi)
    if k < n_floor:
        return None
    return less_equal(lo, k)


class _System:
    """Display and joint feasibility tests for one cascade."""

    theorem = ""
    n_floor = 3

    def __init__(self, d: int = 1):
        self.d = d

    def display(self, ctx, x) -> bool:
        raise NotImplementedError

    def display_printed(self, ctx, x) -> bool | None:
        return None  # same as the sound form

    def joint(self, ctx, x) -> bool:
        r = 1
        while True:
            hit = _exists_n(ctx, self.n_low(ctx, x, r), self.n_high(ctx, x, r), self.n_floor)
            if hit is None:
                return False
            if hit:
                return True
            r += 1


class _PositiveSystem(_System):
    theorem = "T1"

    def display(self, ctx, x):
        big_r = _big_r(ctx, x)
        lhs = _pow2(ctx, ctx.mpf(x) / 4 - ctx.mpf(9) / 4 - 3 * (big_r + 1) / 8) - 17
        return less(lhs, big_r / 2 + 2 + _big_a(ctx, x) / 2)

    def n_low(self, ctx, x, r):
        return _pow2(ctx, ctx.mpf(x) / 4 - ctx.mpf(3 * (r + 1)) / 8 - ctx.mpf(9) / 4) - r - 17

    def n_high(self, ctx, x, r):
        return _n_upper_pos(ctx, x, r)


class _NegativeSystem(_System):
    theorem = "T2"
    n_floor = 18

    def _display(self, ctx, x, shift):
        s = _big_s(ctx, x)
        lhs = _pow2(ctx, ctx.mpf(x) / 4 - 3 * (s - 13) / 8 - shift)
        c = _consts(ctx.prec)
        l74, l31 = c["log074"], c["log031"]
        rhs = -9 * _xlog(ctx.prec, x) / l74 + 6 * l31 / l74 + (s - 14) / 2 + ctx.mpf(1) / 2
        return less(lhs, rhs)

    def display(self, ctx, x):
        # rearranging x <= 3(r+1)/2 + 9 + 4 log2(n+r) gives the constant 9/4
        return self._display(ctx, x, ctx.mpf(9) / 4)

    def display_printed(self, ctx, x):
        return self._display(ctx, x, ctx.mpf(9) / 8)

    def n_low(self, ctx, x, r):
        return _pow2(ctx, ctx.mpf(x) / 4 - ctx.mpf(3 * (r + 1)) / 8 - ctx.mpf(9) / 4) - r

    def n_high(self, ctx, x, r):
        return _n_upper_neg(ctx, x, r)


class _GapSystem(_System):
    theorem = "T3"

    def _display(self, ctx, x, middle):
        big_r = _big_r(ctx, x, self.d)
        lhs = _pow2(ctx, x / (big_r + 1) - 1)
        return less(lhs, 19 + middle + _big_a(ctx, x) / 2)

    def display(self, ctx, x):
        # rd < 3x log(3x)/log 1.83, so rd/2 is below half of that
        return self._display(ctx, x, _big_a(ctx, x) / 2)

    def display_printed(self, ctx, x):
        return self._display(ctx, x, _xlog(ctx.prec, x) / (2 * _consts(ctx.prec)["log183"]))

    def n_low(self, ctx, x, r):
        e = ctx.mpf(x) / (r + 1) - 1
        return _pow2(ctx, e) - r * self.d - 17

    def n_high(self, ctx, x, r):
        return _n_upper_pos(ctx, x, r, self.d)


# ---------------------------------------------------------------- sweeps


def _decided(pred, x, bits, what):
    return decide(lambda ctx: pred(ctx, x), bits, what=f"{what} at x={x}")


def sweep_max(pred, precision_bits: int = DEFAULT_PRECISION, what: str = "display") -> int:
    """Largest integer x >= 1 satisfying ``pred``.

    The sweep runs until no x in (last, last + max(64, last // 4)] is
    feasible; the exponential left side dominates the right side beyond that.
    """
    last = 0
    x = 1
    horizon = 64
    while x <= horizon:
        if x > DIVERGENCE_LIMIT:
            raise CascadeDivergence(f"{what}: still feasible past x={DIVERGENCE_LIMIT}")
        if _decided(pred, x, precision_bits, what):
            last = x
            horizon = last + max(64, last // 4)
        x += 1
    return last


def _bisect_joint(system, hi, bits):
    # informational only: assumes the joint feasible set is an initial segment
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _decided(system.joint, mid, bits, "joint system"):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _first_joint_above(system, claim, top, bits):
    for x in range(claim + 1, top + 1):
        if _decided(system.joint, x, bits, "joint system"):
            return x
    return None


def _cascade(system: _System, claim: int | None, precision_bits: int, exact_joint: bool) -> BoundCertificate:
    bits = precision_bits
    tag = system.theorem.lower()
    trace: list[TraceStep] = []
    discrepancies: list[str] = []
    x_disp = sweep_max(system.display, bits, "display")
    trace.append(TraceStep(f"{tag}.x.display", {"x": x_disp, "d": system.d}, f"x <= {x_disp}"))
    x_printed = None
    if system.display_printed(context(bits), 1) is not None:
        x_printed = sweep_max(system.display_printed, bits, "printed display")
        trace.append(TraceStep(f"{tag}.x.display_printed", {"x": x_printed}, f"x <= {x_printed}"))
        if x_printed != x_disp:
            discrepancies.append(
                f"printed display gives x <= {x_printed}, sound display gives x <= {x_disp}"
            )
    if exact_joint:
        x_joint = 0
        for x in range(x_disp, 0, -1):
            if _decided(system.joint, x, bits, "joint system"):
                x_joint = x
                break
        joint_note = "exact scan"
    else:
        x_joint = _bisect_joint(system, x_disp, bits)
        joint_note = "bisection"
    trace.append(TraceStep(f"{tag}.x.joint", {"x": x_joint, "method": joint_note}, f"x <= {x_joint}"))

    certified = True
    if claim is None:
        x_max = x_joint if exact_joint else x_disp
    else:
        x_max = claim
        if claim < x_disp:
            bad = _first_joint_above(system, claim, x_disp, bits)
            certified = bad is None
            trace.append(
                TraceStep(
                    f"{tag}.x.claim",
                    {"claim": claim, "checked_up_to": x_disp, "first_feasible": bad},
                    f"no feasible x in ({claim}, {x_disp}]" if certified else f"x = {bad} is feasible",
                )
            )
        else:
            trace.append(TraceStep(f"{tag}.x.claim", {"claim": claim}, f"x <= {x_disp} <= {claim}"))
        if claim != x_disp:
            discrepancies.append(f"stated x <= {claim}, sound display sweep gives x <= {x_disp}")
    return _finish(system, x_max, bits, trace, discrepancies, claim, certified, x_disp, x_printed, x_joint)


def _r_bound(system, ctx, x):
    if isinstance(system, _NegativeSystem):
        return int_below(_big_s(ctx, x) - 14)
    return int_below(_big_r(ctx, x, system.d))


def _finish(system, x_max, bits, trace, discrepancies, claim, certified, x_disp, x_printed, x_joint):
    tag = system.theorem.lower()

    def derive(ctx):
        r_max = _r_bound(system, ctx, x_max)
        best_n, best_r = None, None
        for r in range(1, max(r_max, 1) + 1):
            k = int_below(system.n_high(ctx, x_max, r))
            if best_n is None or k > best_n:
                best_n, best_r = k, r
        rd = int_below(_big_a(ctx, x_max)) if system.theorem == "T3" else None
        return r_max, best_n, best_r, rd

    r_max, n_max, n_r, rd_max = decide(derive, bits, what="derived bounds")
    ctx = context(bits)
    trace.append(TraceStep(f"{tag}.r", {"x": x_max, "bound_value": fmt(
        _big_s(ctx, x_max) - 14 if system.theorem == "T2" else _big_r(ctx, x_max, system.d))}, f"r <= {r_max}"))
    if rd_max is not None:
        trace.append(TraceStep(f"{tag}.rd", {"x": x_max, "bound_value": fmt(_big_a(ctx, x_max))}, f"rd <= {rd_max}"))
    trace.append(TraceStep(f"{tag}.n", {"x": x_max, "r": n_r, "bound_value": fmt(system.n_high(ctx, x_max, n_r))},
                           f"n <= {n_max}"))
    return BoundCertificate(
        theorem=system.theorem,
        d=system.d,
        x_max=x_max,
        r_max=r_max,
        n_max=n_max,
        rd_max=rd_max,
        trace=trace,
        precision_bits=bits,
        claim=claim,
        certified=certified,
        x_display=x_disp,
        x_display_printed=x_printed,
        x_joint=x_joint,
        n_argmax_r=n_r,
        discrepancies=discrepancies,
    )


def cascade_theorem1(claim: int | None = STATED_X["T1"], precision_bits: int = DEFAULT_PRECISION) -> BoundCertificate:
    return _cascade(_PositiveSystem(), claim, precision_bits, exact_joint=True)


def cascade_theorem2(claim: int | None = STATED_X["T2"], precision_bits: int = DEFAULT_PRECISION) -> BoundCertificate:
    return _cascade(_NegativeSystem(), claim, precision_bits, exact_joint=True)


def cascade_theorem3(d_min: int = 2, claim: int | None = STATED_X["T3"],
                     precision_bits: int = DEFAULT_PRECISION) -> BoundCertificate:
    """Gap d >= d_min.  Larger d only shrinks the display's feasible set, so d_min is the worst case."""
    if d_min < 2:
        raise ValueError("d_min must be >= 2")
    return _cascade(_GapSystem(d_min), claim, precision_bits, exact_joint=False)


def derived_bounds(theorem: str, x: int, d: int = 1, precision_bits: int = DEFAULT_PRECISION) -> dict:
    """r, n (and rd) bounds implied by a given x, without any sweep."""
    system = {"T1": _PositiveSystem, "T2": _NegativeSystem, "T3": _GapSystem}[theorem](d)
    cert = _finish(system, x, precision_bits, [], [], None, True, None, None, None)
    return {"r_max": cert.r_max, "n_max": cert.n_max, "rd_max": cert.rd_max}


def replay(cert: BoundCertificate, precision_bits: int | None = None) -> bool:
    """Recompute the certificate at (by default) doubled precision and compare integer bounds."""
    bits = precision_bits or 2 * cert.precision_bits
    if cert.theorem == "T1":
        again = cascade_theorem1(cert.claim, bits)
    elif cert.theorem == "T2":
        again = cascade_theorem2(cert.claim, bits)
    else:
        again = cascade_theorem3(cert.d, cert.claim, bits)
    fields = ("x_max", "r_max", "n_max", "rd_max", "x_display", "x_display_printed", "x_joint", "certified")
    if any(getattr(again, f) != getattr(cert, f) for f in fields):
        return False
    return [s.bound for s in again.trace] == [s.bound for s in cert.trace]


# ---------------------------------------------------------------- refinements


@dataclass(frozen=True)
class RefinementState:
    n_threshold: int
    x_bound: int
    r_bound: int
    n_bound: int
    step: int


@dataclass
class Refinement:
    theorem: str
    n_threshold: int
    states: list[RefinementState]
    eliminated: bool
    reason: str
    details: dict = field(default_factory=dict)

    @property
    def r_trace(self) -> tuple[int, ...]:
        return tuple(s.r_bound for s in self.states if s.r_bound >= 1)

    @property
    def x_trace(self) -> tuple[int, ...]:
        return tuple(s.x_bound for s in self.states)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "n_threshold": str(self.n_threshold),
            "eliminated": self.eliminated,
            "reason": self.reason,
            "states": [
                {k: str(getattr(s, k)) for k in ("step", "x_bound", "r_bound", "n_bound")} for s in self.states
            ],
            "details": {k: str(v) for k, v in self.details.items()},
        }


def _largest_r(ctx, thr, upper_fn, r_min):
    """Largest r >= r_min with thr < upper_fn(r) (upper_fn decreasing in r); r_min - 1 if none."""
    r = r_min - 1
    while less(thr, upper_fn(r + 1)):
        r += 1
        if r > DIVERGENCE_LIMIT:
            raise CascadeDivergence("r bound does not close")
    return r


def refine_case_theorem1(n_threshold: int, x_start: int = STATED_X["T1"], n_bound: int | None = None,
                         precision_bits: int = DEFAULT_PRECISION) -> Refinement:
    """Eliminate n >= n_threshold on the positive side by alternating r- and x-bounds."""
    if n_threshold < 3:
        raise ValueError("n_threshold must be >= 3")
    if n_bound is None:
        n_bound = derived_bounds("T1", x_start, precision_bits=precision_bits)["n_max"]

    def run(ctx):
        states = []
        x = x_start
        prev = None
        for step in range(1, MAX_REFINEMENT_STEPS + 1):
            xx = x
            r = _largest_r(ctx, n_threshold, lambda rr: _n_upper_pos(ctx, xx, rr), 0)
            if r < 1:
                states.append(RefinementState(n_threshold, x, max(r, 0), n_bound, step))
                return Refinement("T1", n_threshold, states, True, "r < 1")
            limit = n_bound + r + 17
            ceil_form = int_at_most(ceiling_form_bound(r, limit, ctx.prec))
            x_new = min(x, ceil_form, per_term_cap(limit) * (r + 1))
            if prev == (x_new, r):
                return Refinement("T1", n_threshold, states, False, "fixed point")
            states.append(RefinementState(n_threshold, x_new, r, n_bound, step))
            prev = (x_new, r)
            x = x_new
        return Refinement("T1", n_threshold, states, False, "step limit")

    return decide(run, precision_bits, what="positive refinement")


def neg_product_lower_bound(n: int, r: int, ctx):
    """Floor-form lower bound on |T_{-n}...T_{-n-r}| when two of every three terms are large.

    0.31^(r+1-K) * 0.74^(-rn - r(r+1)/2 + K(n-1) + 3K(K+1)/2) with K = floor((r+1)/3).
    Every weak term is bounded below by 1 instead of 0.31*0.74^(-m), and one
    further factor 0.74^n is given away.
    """
    k = (r + 1) // 3
    e74 = ctx.mpf(-2 * r * n - r * (r + 1) + 2 * k * (n - 1) + 3 * k * (k + 1)) / 2
    return ctx.mpf("0.31") ** (r + 1 - k) * ctx.exp(e74 * _consts(ctx.prec)["log074"])


def refine_case_theorem2(n_threshold: int, x_start: int = STATED_X["T2"], n_bound: int | None = None,
                         precision_bits: int = DEFAULT_PRECISION) -> Refinement:
    """Eliminate n >= n_threshold on the negative side.

    Alternates r from the n-inequality, x from the valuation-sum bound (or,
    for windows shorter than 16, the per-residue caps), and n from the
    n-inequality at r = 1.  At a fixed point the product lower bound at the
    threshold is compared with the largest log(m!)/(nu_2(m!) log 2) that a
    part m_i can reach.
    """
    if n_threshold < 18:
        raise ValueError("n_threshold must be >= 18")
    if n_bound is None:
        n_bound = derived_bounds("T2", x_start, precision_bits=precision_bits)["n_max"]
    from .factorials import factorial_ratio_max

    def run(ctx):
        states = []
        x, n_b = x_start, n_bound
        prev = None
        for step in range(1, MAX_REFINEMENT_STEPS + 1):
            xx = x
            r = _largest_r(ctx, n_threshold, lambda rr: _n_upper_neg(ctx, xx, rr), 1)
            if r < 1:
                states.append(RefinementState(n_threshold, x, 0, n_b, step))
                return Refinement("T2", n_threshold, states, True, "r < 1")
            x_new = min(x, int_at_most(ceiling_form_bound(r, n_b + r, ctx.prec)))
            if r + 1 < 16:
                x_new = min(x_new, window_cap(r + 1, n_b + r + 17))
            n_new = min(n_b, int_below(_n_upper_neg(ctx, x_new, 1)))
            if prev == (x_new, r, n_new):
                break
            states.append(RefinementState(n_threshold, x_new, r, n_new, step))
            if n_new < n_threshold:
                return Refinement("T2", n_threshold, states, True, "n bound below threshold")
            prev = (x_new, r, n_new)
            x, n_b = x_new, n_new
        else:
            return Refinement("T2", n_threshold, states, False, "step limit")
        # fixed point: size contradiction
        m_top = max_factorial_for_nu2(x)
        # several r share the same bound, so take the smallest lower endpoint
        low = ctx.mpf(min(lower(neg_product_lower_bound(n_threshold, rr, ctx)) for rr in range(1, r + 1)))
        needed = ctx.log(low) / (x * ctx.log(2))
        ratio, arg = factorial_ratio_max(m_top, ctx.prec)
        ok = less(ratio, needed)
        details = {
            "x_final": x,
            "r_final": r,
            "m_max": m_top,
            "lower_bound_min": fmt(low, 8),
            "lower_bound_exceeds_3e64": less(ctx.mpf("3e64"), low),
            "ratio_needed": fmt(needed, 8),
            "ratio_needed_exceeds_6_11": less(ctx.mpf("6.11"), needed),
            "ratio_max": fmt(ratio, 8),
            "ratio_argmax": arg,
        }
        return Refinement("T2", n_threshold, states, ok,
                          "size contradiction" if ok else "fixed point not contradicted", details)

    return decide(run, precision_bits, what="negative refinement")


def product_lower_bound_direct(n_min: int, n_max: int, r_max: int,
                               precision_bits: int = DEFAULT_PRECISION) -> list[tuple[int, int]]:
    """Windows (n, r) with n_min <= n <= n_max, 1 <= r <= r_max where the floor-form
    lower bound fails against the exact product.  Empty means it holds throughout."""
    from .sequence import values

    if n_min < 18:
        raise ValueError("n_min must be >= 18")
    table = values(-(n_max + r_max), -n_min)
    top = n_max + r_max

    def run(ctx):
        logs = {}
        for m in range(n_min, top + 1):
            t = abs(table[top - m])
            if t == 0:
                raise ValueError(f"T_{-m} = 0")
            logs[m] = ctx.log(ctx.mpf(t))
        bad = []
        for n in range(n_min, n_max + 1):
            acc = logs[n]
            for r in range(1, r_max + 1):
                acc = acc + logs[n + r]
                if not less(ctx.log(neg_product_lower_bound(n, r, ctx)), acc):
                    bad.append((n, r))
        return bad

    return decide(run, precision_bits, what="direct product lower bound")


__all__ = [
    "BoundCertificate",
    "CascadeDivergence",
    "DIVERGENCE_LIMIT",
    "Refinement",
    "RefinementState",
    "STATED_X",
    "TraceStep",
    "cascade_theorem1",
    "cascade_theorem2",
    "cascade_theorem3",
    "derived_bounds",
    "lemma_size_bound",
    "neg_product_lower_bound",
    "product_lower_bound_direct",
    "refine_case_theorem1",
    "refine_case_theorem2",
    "replay",
    "sweep_max",
]
