"""Exhaustive window searches, claimed-solution checks and the end-to-end pipelines."""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import bounds
from .factorials import (
    FactorialMultiset,
    brute_force_decompositions,
    decompose,
    divisibility_probe,
    factorial_ratio_max,
    primes_up_to,
    smooth_index_scan_neg,
    smooth_index_scan_pos,
    smoothness,
)
from .intervals import DEFAULT_PRECISION, context, fmt, less
from .sequence import (
    growth_bound_holds,
    neg_lower_bound_window,
    root_data,
    values,
    window_tail_certificate,
)
from .valuations import (
    ZeroTermError,
    max_factorial_for_nu2,
    neg_valuation_scan,
    nu,
    nu2_tribo_closed,
    pos_valuation_scan,
)

POSITIVE, NEGATIVE = "positive", "negative"


class ZeroWindowError(ZeroTermError):
    """A window product is zero, so it cannot be a factorial product."""


@dataclass(frozen=True)
class SolutionRecord:
    """Window [n, n+r] (negative side: T_{-n} .. T_{-n-r}) and its factorial representations."""

    n: int
    r: int
    side: str
    product_abs: int
    representations: tuple[FactorialMultiset, ...] = field(default=())

    def indices(self) -> list[int]:
        return window_indices(self.side, self.n, self.r)

    @property
    def key(self) -> tuple[int, int]:
        return (self.n, self.r)

    def to_json(self) -> dict:
        return {
            "n": str(self.n),
            "r": str(self.r),
            "side": self.side,
            "product_abs": str(self.product_abs),
            "representations": [[str(m) for m in rep.parts] for rep in self.representations],
            "pretty": [str(rep) for rep in self.representations],
        }


def window_indices(side: str, n: int, r: int) -> list[int]:
    if side not in (POSITIVE, NEGATIVE):
        raise ValueError(f"unknown side {side!r}")
    if r < 0:
        raise ValueError("r must be >= 0")
    sign = 1 if side == POSITIVE else -1
    return [sign * (n + i) for i in range(r + 1)]


def window_product(side: str, n: int, r: int) -> int:
    """|prod T_i| over the window; raises ZeroWindowError on a zero term."""
    idx = window_indices(side, n, r)
    table = values(min(idx), max(idx))
    base = min(idx)
    prod = 1
    for i in idx:
        t = table[i - base]
        if t == 0:
            raise ZeroWindowError(i)
        prod *= t
    return abs(prod)


def verify_claimed(record: SolutionRecord) -> bool:
    """Recompute the window product and check every claimed multiset against it."""
    if not record.representations:
        raise ValueError("record carries no representation")
    prod = window_product(record.side, record.n, record.r)
    return prod == record.product_abs and all(rep.product == prod for rep in record.representations)


def claimed(side: str, n: int, r: int, *parts_lists) -> SolutionRecord:
    """Build a record from claimed part lists; the product is taken from the first one."""
    reps = tuple(FactorialMultiset.of(p) for p in parts_lists)
    return SolutionRecord(n, r, side, reps[0].product, reps)


# Solution lists as stated by the two theorems, with the duplicated line
# collapsed and the doubled-dot typo read as 2!*5!*7!.
STATED_T1 = {(3, 1): [(2, 2, 2)]}
STATED_T2 = {
    (5, 1): [(3,)],
    (5, 2): [(3,)],
    (5, 3): [(4,)],
    (5, 4): [(2, 2, 2, 4)],
    (5, 5): [(2, 2, 2, 5)],
    (5, 8): [(2, 2, 5, 7)],
    (5, 9): [(3, 6, 7)],
    (6, 2): [(2, 3)],
    (6, 3): [(2, 2, 4)],
    (6, 4): [(2, 2, 5)],
    (6, 7): [(2, 5, 7)],
    (7, 1): [(2, 2)],
    (7, 2): [(2, 2, 2, 2, 2)],
    (8, 1): [(2, 2, 2, 2, 2)],
    (7, 7): [(6, 7)],
    (8, 6): [(6, 7)],
}


def stated_records(theorem: str) -> list[SolutionRecord]:
    table, side = (STATED_T1, POSITIVE) if theorem == "T1" else (STATED_T2, NEGATIVE)
    return [claimed(side, n, r, *reps) for (n, r), reps in sorted(table.items())]


# ---------------------------------------------------------------- searches


def _decompose_rows(args):
    """Worker: all hits in rows n of one side, for r in [r_min, r_max]."""
    side, rows, r_min, r_max, max_solutions = args
    hits = []
    for n in rows:
        for r in range(r_min, r_max + 1):
            try:
                prod = window_product(side, n, r)
            except ZeroWindowError:
                continue
            reps = decompose(prod, max_solutions)
            if reps:
                hits.append(SolutionRecord(n, r, side, prod, tuple(reps)))
    return hits


def _run_rows(side, rows, r_min, r_max, max_solutions, parallelism):
    rows = list(rows)
    if parallelism <= 1 or len(rows) < 2:
        return _decompose_rows((side, rows, r_min, r_max, max_solutions))
    chunks = [rows[i::parallelism] for i in range(parallelism)]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        parts = pool.map(_decompose_rows, [(side, c, r_min, r_max, max_solutions) for c in chunks if c])
    hits = [h for part in parts for h in part]
    return sorted(hits, key=lambda h: h.key)


def _smooth_flags(lo: int, hi: int, bound: int) -> dict[int, bool]:
    table = values(lo, hi)
    return {i: t != 0 and smoothness(t, bound).smooth for i, t in enumerate(table, start=lo)}


def search_positive(n_min: int, n_max: int, r_min: int, r_max: int, smooth_bound: int,
                    prefilter: bool = True, parallelism: int = 1,
                    max_solutions: int = 16) -> list[SolutionRecord]:
    """Every window T_n..T_{n+r} in the box whose product is a factorial product.

    With ``prefilter`` a window is decomposed only when each of its terms is
    ``smooth_bound``-smooth; without it every product is decomposed directly,
    which is the independent path for small boxes.
    """
    if n_min < 3 or r_min < 1:
        raise ValueError("require n_min >= 3 and r_min >= 1")
    if n_max < n_min or r_max < r_min:
        return []
    if not prefilter:
        return _run_rows(POSITIVE, range(n_min, n_max + 1), r_min, r_max, max_solutions, parallelism)
    flags = _smooth_flags(n_min, n_max + r_max, smooth_bound)
    hits = []
    for n in range(n_min, n_max + 1):
        if not flags[n]:
            continue
        for r in range(1, r_max + 1):
            if not flags[n + r]:
                break
            if r < r_min:
                continue
            prod = window_product(POSITIVE, n, r)
            reps = decompose(prod, max_solutions)
            if reps:
                hits.append(SolutionRecord(n, r, POSITIVE, prod, tuple(reps)))
    return hits


def search_negative(n_min: int, n_max: int, r_min: int, r_max: int, smooth_bound: int | None = None,
                    parallelism: int = 1, max_solutions: int = 16) -> list[SolutionRecord]:
    """Every window |T_{-n}..T_{-n-r}| in the box whose product is a factorial product.

    Windows through the zero T_{-17} are skipped.  If ``smooth_bound`` is
    given, windows with a non-smooth term are skipped before decomposition.
    """
    if n_min < 5 or r_min < 1:
        raise ValueError("require n_min >= 5 and r_min >= 1")
    if n_max < n_min or r_max < r_min:
        return []
    if smooth_bound is None:
        return _run_rows(NEGATIVE, range(n_min, n_max + 1), r_min, r_max, max_solutions, parallelism)
    flags = _smooth_flags(-(n_max + r_max), -n_min, smooth_bound)
    hits = []
    for n in range(n_min, n_max + 1):
        if not flags[-n]:
            continue
        for r in range(1, r_max + 1):
            if not flags[-(n + r)]:
                break
            if r < r_min:
                continue
            prod = window_product(NEGATIVE, n, r)
            reps = decompose(prod, max_solutions)
            if reps:
                hits.append(SolutionRecord(n, r, NEGATIVE, prod, tuple(reps)))
    return hits


def gap_sample(d_min: int, d_max: int, n_max: int, r_max: int, n_min: int = 1,
               max_solutions: int = 4) -> list[dict]:
    """Hits of T_n T_{n+d} ... T_{n+rd} = factorial product over a small box (d >= 2)."""
    if d_min < 2:
        raise ValueError("d_min must be >= 2")
    table = values(0, n_max + r_max * d_max)
    out = []
    for d in range(d_min, d_max + 1):
        for n in range(max(n_min, 1), n_max + 1):
            prod = table[n]
            for r in range(1, r_max + 1):
                prod *= table[n + r * d]
                reps = decompose(prod, max_solutions)
                if reps:
                    out.append({"d": d, "n": n, "r": r, "product": prod, "representations": reps})
    return out


# ---------------------------------------------------------------- eliminations


def smooth_runs(indices) -> list[tuple[int, int]]:
    """Maximal runs of consecutive integers, as (first, last)."""
    runs = []
    for m in sorted(indices):
        if runs and m == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], m)
        else:
            runs.append((m, m))
    return runs


def prime_gap_rule(ms, q: int) -> dict:
    """q does not divide the window product, yet some prime >= q does.

    That kills any factorial product: a part >= q forces q into the product.
    The check is per window, on the exact product.
    """
    ms = list(ms)
    prod = window_product(NEGATIVE, ms[0], len(ms) - 1)
    if prod % q == 0:
        return {"applies": False, "q_divides": True, "witness": None}
    rest = prod
    for p in primes_up_to(q - 1):
        while rest % p == 0:
            rest //= p
    return {"applies": rest > 1, "q_divides": False, "witness": None if rest == 1 else "prime >= %d" % q}


def five_squared_rule(ms) -> dict:
    """25 divides the product but 9 does not.

    Two parts >= 5 or one part >= 10 would put 3^2 into the product, and a
    single part in [5, 9] gives only one factor 5.
    """
    ms = list(ms)
    prod = window_product(NEGATIVE, ms[0], len(ms) - 1)
    return {"applies": prod % 25 == 0 and prod % 9 != 0, "nu5": nu(5, prod), "nu3": nu(3, prod)}


# id, description, index groups it covers, (rule, prime q, scope of the quoted facts).
# The rule is always applied to the exact window product.
ELIMINATIONS = (
    ("t2.elim.E1", "5 divides no term of 18..28, 49..52, 55..57, each has a prime >= 7",
     [(18, 28), (49, 52), (55, 57)], ("prime", 5, "terms")),
    ("t2.elim.E2", "11 divides no term of 32..36, each of 34..36 has a prime >= 13",
     [(34, 36)], ("prime", 11, "terms")),
    ("t2.elim.E3", "25 | |T_-32 T_-33| but 9 does not", [(32, 33)], ("five", None, "window")),
    ("t2.elim.E4", "7 does not divide |T_-40 T_-41| but 23 does", [(40, 41)], ("prime", 7, "window")),
    ("t2.elim.E5", "11 does not divide |T_-65 T_-66| but 19 does", [(65, 66)], ("prime", 11, "window")),
    ("t2.elim.E6", "5 does not divide |T_-68 T_-69| but 7 does", [(68, 69)], ("prime", 5, "window")),
)


def _probe_facts(elim_id: str) -> dict:
    """The literal divisibility facts each elimination quotes."""
    if elim_id == "t2.elim.E1":
        ms = [m for a, b in ((18, 28), (49, 52), (55, 57)) for m in range(a, b + 1)]
        probe = divisibility_probe([-m for m in ms], 5)
        big = all(prime_gap_rule([m], 5)["applies"] for m in ms)
        return {"no_term_divisible_by_5": not any(probe.per_index.values()), "each_term_has_prime_ge_7": big}
    if elim_id == "t2.elim.E2":
        probe = divisibility_probe([-m for m in range(32, 37)], 11)
        big = all(prime_gap_rule([m], 13)["applies"] for m in range(34, 37))
        return {"no_term_divisible_by_11": not any(probe.per_index.values()), "34_to_36_have_prime_ge_13": big}
    if elim_id == "t2.elim.E3":
        return {"25_divides": divisibility_probe([-32, -33], 5, 2).product,
                "9_divides": divisibility_probe([-32, -33], 3, 2).product}
    pairs = {"t2.elim.E4": (40, 7, 23), "t2.elim.E5": (65, 11, 19), "t2.elim.E6": (68, 5, 7)}
    m, q, p = pairs[elim_id]
    return {f"{q}_divides": divisibility_probe([-m, -m - 1], q).product,
            f"{p}_divides": divisibility_probe([-m, -m - 1], p).product}


def _facts_hold(elim_id: str, facts: dict) -> bool:
    expected = {
        "t2.elim.E1": {"no_term_divisible_by_5": True, "each_term_has_prime_ge_7": True},
        "t2.elim.E2": {"no_term_divisible_by_11": True, "34_to_36_have_prime_ge_13": True},
        "t2.elim.E3": {"25_divides": True, "9_divides": False},
        "t2.elim.E4": {"7_divides": False, "23_divides": True},
        "t2.elim.E5": {"11_divides": False, "19_divides": True},
        "t2.elim.E6": {"5_divides": False, "7_divides": True},
    }[elim_id]
    return facts == expected


def eliminate_window(n: int, r: int) -> str | None:
    """Id of the first listed elimination that disposes of the negative window, if any."""
    ms = list(range(n, n + r + 1))
    for elim_id, _, runs, (kind, q, scope) in ELIMINATIONS:
        if not any(a <= m <= b for a, b in runs for m in ms):
            continue
        if kind == "prime" and prime_gap_rule(ms, q)["applies"]:
            return elim_id
        if kind == "five" and five_squared_rule(ms)["applies"]:
            return elim_id
    return None


def elimination_coverage(smooth: list[int]) -> dict:
    """Every window of length >= 2 inside a smooth run must be eliminated."""
    uncovered, used = [], {}
    for a, b in smooth_runs(smooth):
        for n in range(a, b):
            for r in range(1, b - n + 1):
                got = eliminate_window(n, r)
                if got is None:
                    uncovered.append((n, r))
                else:
                    used[got] = used.get(got, 0) + 1
    return {"uncovered": uncovered, "windows_by_rule": dict(sorted(used.items()))}


# ---------------------------------------------------------------- reports


@dataclass
class Check:
    id: str
    description: str
    paper_anchor: str
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "paper_anchor": self.paper_anchor,
            "pass": self.passed,
            "details": _jsonable(self.details),
        }


def _jsonable(v):
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (int, float)):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else v
        return [_jsonable(x) for x in items]
    if hasattr(v, "to_json"):
        return v.to_json()
    return str(v)


@dataclass
class PipelineReport:
    theorem: str
    checks: list[Check]
    solutions: list[SolutionRecord]
    certificate: bounds.BoundCertificate | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def first_failure(self) -> str | None:
        return next((c.id for c in self.checks if not c.passed), None)

    def check(self, check_id: str) -> Check:
        for c in self.checks:
            if c.id == check_id:
                return c
        raise KeyError(check_id)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "pass": self.passed,
            "first_failure": self.first_failure,
            "checks": [c.to_json() for c in self.checks],
            "solutions": [s.to_json() for s in self.solutions],
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


class _Recorder:
    def __init__(self, progress):
        self.checks: list[Check] = []
        self.progress = progress

    def add(self, check_id, description, anchor, passed, **details):
        self.checks.append(Check(check_id, description, anchor, bool(passed), details))
        if self.progress:
            print(f"[{'ok' if passed else 'FAIL'}] {check_id}", file=sys.stderr, flush=True)
        return bool(passed)


OVERRIDABLE = ("x_max", "r_max", "n_max")


def _in_use(cert, overrides):
    overrides = dict(overrides or {})
    bad = set(overrides) - set(OVERRIDABLE)
    if bad:
        raise ValueError(f"unknown override(s): {sorted(bad)}")
    return {k: int(overrides.get(k, getattr(cert, k))) for k in OVERRIDABLE}


def _largest_prime_at_most(m: int) -> int:
    ps = primes_up_to(m)
    return ps[-1] if ps else 1


def _cascade_checks(rec, prefix, cert, stated, bits, anchor):
    """x, r, n (and rd) against the stated values, with a +-1 tolerance recorded as a discrepancy."""
    ok_all = True
    for name in ("x_max", "r_max", "n_max", "rd_max"):
        want = stated.get(name)
        if want is None:
            continue
        got = getattr(cert, name)
        diff = got - want
        extra = {"certified": cert.certified} if name == "x_max" else {}
        if name == "x_max":
            extra.update(x_display=cert.x_display, x_display_as_printed=cert.x_display_printed,
                         x_joint=cert.x_joint)
        if name == "n_max":
            extra["maximizing_r"] = cert.n_argmax_r
        ok = abs(diff) <= 1 and (name != "x_max" or cert.certified)
        ok_all &= rec.add(f"{prefix}.cascade.{name.split('_')[0]}",
                          f"certified {name} matches the stated {want}",
                          anchor[name], ok, computed=got, stated=want, discrepancy=diff != 0, **extra)
    rec.add(f"{prefix}.cascade.replay", "certificate replays at doubled precision",
            "bounds are re-derived at twice the working precision", bounds.replay(cert, 2 * bits))
    return ok_all


def _t1(rec, bits, overrides):
    roots = root_data(bits)
    rec.add("t1.roots", "root enclosures of x^3-x^2-x-1 satisfy every numerical fact used",
            "preliminaries on the dominant root and its conjugates", all(roots.facts.values()),
            **{k: v for k, v in roots.facts.items()})
    growth_bad = [n for n in range(1, 1001) if not growth_bound_holds(n, bits)]
    rec.add("t1.growth", "alpha^(n-2) <= T_n for 1 <= n <= 1000",
            "growth bound for positive indices", not growth_bad, failures=growth_bad)

    cert = bounds.cascade_theorem1(precision_bits=bits)
    use = _in_use(cert, overrides)
    top = cert.n_max + cert.r_max + 17
    vals = values(1, top)
    mism = [m for m in range(1, top + 1) if nu2_tribo_closed(m).valuation != nu(2, vals[m - 1])]
    rec.add("t1.valuation_table", f"closed-form nu_2(T_n) equals direct nu_2 for 1 <= n <= {top}",
            "residue-class table for the 2-adic valuation", not mism, range_top=top, mismatches=mism[:10])
    bad = pos_valuation_scan(3, cert.n_max, cert.r_max)
    rec.add("t1.valuation_sum", "ceiling-form bound on sum of nu_2 over every window in the certified box",
            "valuation-sum estimate for a positive window", not bad, violations=bad[:10],
            box={"n": f"3..{cert.n_max}", "r": f"1..{cert.r_max}"})

    _cascade_checks(rec, "t1", cert, {"x_max": 246, "r_max": 127, "n_max": 4033}, bits, {
        "x_max": "sweep of the combined x inequality: x <= 246",
        "r_max": "r bound from the certified x: r <= 127",
        "n_max": "n bound from the certified x: n <= 4033",
    })

    # the refinement re-derives x itself, so only its n range is an input
    rec.add("t1.refine.completeness", "refinement covers n up to the certified n bound",
            "refinement of the case n >= 300 runs up to the global n bound",
            use["n_max"] >= cert.n_max, n_in_use=use["n_max"], n_certified=cert.n_max)
    ref = bounds.refine_case_theorem1(300, cert.x_max, use["n_max"], bits)
    rec.add("t1.refine.r_trace", "r bounds in the n >= 300 case run 24, 5, 3, 2, 1",
            "successive r bounds while refining n >= 300", ref.r_trace == (24, 5, 3, 2, 1),
            computed=ref.r_trace)
    rec.add("t1.refine.x_trace", "x bounds in the n >= 300 case run 76, 58, 48, 36, 24",
            "successive x bounds while refining n >= 300", ref.x_trace[:5] == (76, 58, 48, 36, 24),
            computed=ref.x_trace)
    rec.add("t1.refine.eliminated", "the case n >= 300 ends with r < 1",
            "elimination of n >= 300", ref.eliminated, reason=ref.reason, refinement=ref)

    mk = max_factorial_for_nu2(use["x_max"])
    big_p = _largest_prime_at_most(mk)
    mk_cert = max_factorial_for_nu2(cert.x_max)
    p_cert = _largest_prime_at_most(mk_cert)
    rec.add("t1.mk_bound", "nu_2(m_k!) <= x gives m_k <= 253", "largest factorial part from x <= 246",
            mk <= 253, computed=mk)
    rec.add("t1.prime_bound", "largest prime factor of the product is <= 251",
            "largest prime of the product", big_p <= 251, computed=big_p)

    n_hi = 299
    rec.add("t1.smooth_scan.completeness", "scan bound comes from an x and prime bound no smaller than certified",
            "scan for 251-smooth terms up to index 299", use["x_max"] >= cert.x_max and big_p >= p_cert,
            x_in_use=use["x_max"], x_certified=cert.x_max, bound_in_use=big_p, bound_certified=p_cert,
            range_top=n_hi)
    smooth = smooth_index_scan_pos(n_hi, big_p)
    want = list(range(2, 20)) + [28, 31, 34, 35]
    rec.add("t1.smooth_scan.list", "indices in 2..299 whose term is 251-smooth are 2..19, 28, 31, 34, 35",
            "list of smooth positive terms", smooth == want, computed=smooth)
    closure = not smoothness(values(n_hi, n_hi)[0], big_p).smooth
    rec.add("t1.smooth_scan.closure", "T_299 is not smooth, so no smooth window runs past 298",
            "windows with n <= 299 stay inside the scanned range", closure)
    runs = smooth_runs([m for m in smooth if m >= 3])
    long_runs = [(a, b) for a, b in runs if b > a]
    rec.add("t1.windows", "smooth windows lie in 3..19 or equal (34, 1)",
            "smooth windows confined to the first run or the pair at 34", long_runs == [(3, 19), (34, 35)], runs=long_runs)

    t34 = values(34, 35)
    fac = {}
    rest = t34[0] * t34[1]
    for p in primes_up_to(251):
        while rest % p == 0:
            fac[p] = fac.get(p, 0) + 1
            rest //= p
    printed = {2: 1, 3: 5, 11: 1, 41: 1, 53: 2, 103: 2, 139: 1, 227: 1}
    rec.add("t1.t34t35", "T_34 T_35 = 2 * 3^5 * 11 * 41 * 53^2 * 103^2 * 139 * 227, not a factorial product",
            "factorization that discards (34, 1)",
            rest == 1 and fac == printed and not decompose(t34[0] * t34[1], 1), factorization=fac)
    small = values(2, 19)
    rec.add("t1.no17", "17 divides no T_n for 2 <= n <= 19", "small terms are free of the prime 17",
            all(t % 17 for t in small), residues=[t % 17 for t in small])
    smooth13 = [i for i, t in enumerate(small, start=2) if smoothness(t, 13).smooth]
    runs13 = [(a, b) for a, b in smooth_runs([m for m in smooth13 if m >= 3]) if b > a]
    rec.add("t1.smooth13", "13-smooth terms among 3..19 form one run 3..9 plus the isolated T_12, T_15",
            "n + r <= 9", runs13 == [(3, 9)], computed=smooth13, runs=runs13)
    x_small = sum(nu(2, t) for t in values(3, 9))
    rec.add("t1.x_small", "sum of nu_2(T_3..T_9) is 8", "x <= 8 when n + r <= 9", x_small == 8, computed=x_small)
    upper = [(n, r) for n in (7, 8) for r in range(1, 10 - n) if decompose(window_product(POSITIVE, n, r), 1)]
    rec.add("t1.small.thirteen", "13 | T_6, and no window inside 7..9 is a factorial product",
            "n + r <= 5 (the windows inside 7..9 are settled by direct decomposition)",
            small[4] % 13 == 0 and not upper, t6=small[4], upper_hits=upper)
    rec.add("t1.small.three", "3 divides none of T_3, T_4, T_5",
            "only powers of 2 remain", all(t % 3 for t in values(3, 5)))

    rec.add("t1.search.completeness", "final search box covers the certified r range and smoothness bound",
            "final enumeration", use["r_max"] >= cert.r_max and big_p >= p_cert,
            r_in_use=use["r_max"], r_certified=cert.r_max, bound_in_use=big_p, bound_certified=p_cert)
    sols = search_positive(3, n_hi, 1, use["r_max"], big_p)
    rec.add("t1.search.final", "T_3 T_4 = (2!)^3 is the unique hit", "conclusion of the positive case",
            [s.key for s in sols] == [(3, 1)] and [str(r) for r in sols[0].representations] == ["(2!)^3"],
            found=[s.key for s in sols])
    stated = stated_records("T1")
    rec.add("t1.stated", "stated solution T_3 T_4 = 2!*2!*2! multiplies out",
            "solution in the statement", all(verify_claimed(s) for s in stated),
            proof_closing_line_product=FactorialMultiset.of((2, 2)).product, window_product=8)
    return sols, cert


def _t2(rec, bits, overrides):
    zeros = [m for m, t in zip(range(2000, -1, -1), values(-2000, 0)) if t == 0]
    rec.add("t2.zero", "T_-17 = 0, and the zeros among T_0 .. T_-2000 are at 0, -1, -4, -17",
            "vanishing term at -17", values(-17, -17)[0] == 0 and sorted(zeros) == [0, 1, 4, 17],
            zeros=sorted(-m for m in zeros))

    small = search_negative(5, 16, 1, 11)
    table = {s.key: s for s in small}
    prods = {m: abs(math.prod(values(-m, -m))) for m in range(5, 17)}
    limit = max(math.prod(prods[n + i] for i in range(r + 1)) for n in range(5, 17) for r in range(1, 17 - n))
    brute = brute_force_decompositions(limit)
    oracle = {}
    for n in range(5, 17):
        for r in range(1, 17 - n):
            p = math.prod(prods[n + i] for i in range(r + 1))
            if p in brute and p > 1:
                oracle[(n, r)] = brute[p]
    agree = set(oracle) == set(table) and all(
        oracle[k] == {rep.parts for rep in table[k].representations} for k in table)
    rec.add("t2.small.oracle", "decomposition search agrees with brute-force enumeration for 5 <= n <= n+r <= 16",
            "windows with n <= 16 must end by 16", agree, brute_force_limit=limit)
    rec.add("t2.small.search", "windows with 5 <= n <= n+r <= 16 are exactly the stated list",
            "solutions listed in the statement", sorted(table) == sorted(STATED_T2),
            found=sorted(table), distinct_windows=len(table))
    stated = stated_records("T2")
    rec.add("t2.stated", "every stated solution line multiplies out", "solutions listed in the statement",
            all(verify_claimed(s) for s in stated), products=[s.product_abs for s in stated])

    win = neg_lower_bound_window(18, 2000, bits)
    rec.add("t2.window.two_of_three", "every three consecutive T_-m, m >= 18, hold two with |T_-m| > 0.31*0.74^-m",
            "two of every three terms exceed the lower bound", win.ok,
            violations=win.violations, weak_terms=len(win.weak_terms), first_weak=win.weak_terms[:8])
    win37 = neg_lower_bound_window(37, 2000, bits)
    tail = window_tail_certificate(2000, bits)
    rec.add("t2.window.repair", "two-of-three holds for m in 37..2000 and analytically beyond 2000",
            "supplementary check replacing the two-of-three claim", win37.ok and tail["ok"],
            violations_from_37=win37.violations, tail_tau=fmt(tail["tau"], 6))

    cert = bounds.cascade_theorem2(precision_bits=bits)
    use = _in_use(cert, overrides)
    direct = bounds.product_lower_bound_direct(18, 36, cert.r_max, bits)
    rec.add("t2.window.direct", "product lower bound holds directly for 18 <= n <= 36, r <= r_max",
            "supplementary check for windows starting before 37", not direct, failures=direct[:10])
    scan = neg_valuation_scan(18, 1000, 64)
    rec.add("t2.valuation_neg", "positive-side valuation bounds hold on negative windows (n <= 1000, r <= 64)",
            "valuation-sum estimate applied to negative indices",
            not scan["ceiling_form"] and not scan["window_cap"], **scan)

    _cascade_checks(rec, "t2", cert, {"x_max": 609, "r_max": 356, "n_max": 136735}, bits, {
        "x_max": "sweep of the combined x inequality: x <= 609",
        "r_max": "r bound from the certified x: r <= 356",
        "n_max": "n bound from the certified x: n <= 136735",
    })

    # the refinement re-derives x itself, so only its n range is an input
    rec.add("t2.refine.completeness", "refinement covers n up to the certified n bound",
            "refinement of the case n >= 500 runs up to the global n bound",
            use["n_max"] >= cert.n_max, n_in_use=use["n_max"], n_certified=cert.n_max)
    ref = bounds.refine_case_theorem2(500, cert.x_max, use["n_max"], bits)
    rt, xt = ref.r_trace, ref.x_trace
    rec.add("t2.refine.r_first", "first r bound is 126", "r <= 126 from x <= 609", rt[:1] == (126,),
            computed=rt[:1])
    rec.add("t2.refine.x_first", "first refined x bound is below 216", "x < 216",
            bool(xt) and xt[0] < 216, computed=xt[:1])
    rec.add("t2.refine.r_trace", "r bounds run 126, 42, 22, 15, 11, 7, 5",
            "successive r bounds while refining n >= 500", rt == (126, 42, 22, 15, 11, 7, 5), computed=rt)
    rec.add("t2.refine.x44", "x <= 44 is reached", "valuation table gives x <= 44", 44 in xt, computed=xt)
    rec.add("t2.refine.x36", "x <= 36 is reached", "valuation table gives x <= 36", 36 in xt, computed=xt)
    rec.add("t2.refine.x35", "final x bound is at most 35", "x <= 35", bool(xt) and xt[-1] <= 35,
            computed=xt[-1:])
    d = ref.details
    rec.add("t2.refine.mk", "m_k <= 39", "from x <= 35", d.get("m_max", 10**9) <= 39, computed=d.get("m_max"))
    rec.add("t2.refine.lower_bound", "product lower bound at n = 500, 1 <= r <= 5, exceeds 3e64",
            "size of the product", d.get("lower_bound_exceeds_3e64", False), computed=d.get("lower_bound_min"))
    rec.add("t2.refine.ratio_needed", "log(product) / (x log 2) exceeds 6.11",
            "required ratio for some part", d.get("ratio_needed_exceeds_6_11", False),
            computed=d.get("ratio_needed"))
    ratio, arg = factorial_ratio_max(39, bits)
    rec.add("t2.refine.ratio_max", "max of log m! / (nu_2(m!) log 2) over 2 <= m <= 39 is below 6.11",
            "no part reaches the ratio", less(ratio, context(bits).mpf("6.11")), computed=fmt(ratio, 8), argmax=arg)
    rec.add("t2.refine.eliminated", "the case n >= 500 is eliminated", "elimination of n >= 500",
            ref.eliminated, reason=ref.reason, refinement=ref)

    mk = max_factorial_for_nu2(use["x_max"])
    big_p = _largest_prime_at_most(mk)
    p_cert = _largest_prime_at_most(max_factorial_for_nu2(cert.x_max))
    rec.add("t2.mk_bound", "nu_2(m_k!) <= x gives m_k <= 615", "largest factorial part from x <= 609",
            mk <= 615, computed=mk)
    rec.add("t2.prime_bound", "largest prime factor of the product is <= 613", "largest prime of the product",
            big_p <= 613, computed=big_p)
    n_hi = 499
    rec.add("t2.smooth_scan.completeness", "scan bound comes from an x and prime bound no smaller than certified",
            "scan for 613-smooth terms for 18 <= m <= 499", use["x_max"] >= cert.x_max and big_p >= p_cert,
            x_in_use=use["x_max"], x_certified=cert.x_max, bound_in_use=big_p, bound_certified=p_cert,
            range_top=n_hi)
    smooth = smooth_index_scan_neg(18, n_hi, big_p)
    want = (list(range(18, 29)) + [30] + list(range(32, 37)) + [38, 40, 41, 43, 46] + list(range(49, 53))
            + [55, 56, 57, 63, 65, 66, 68, 69])
    rec.add("t2.smooth_scan.list", "m in 18..499 with T_-m 613-smooth match the printed list",
            "list of smooth negative terms", smooth == want, computed=smooth)
    rec.add("t2.smooth_scan.closure", "T_-499 is not smooth, so no smooth window runs past 498",
            "windows with n <= 499 stay inside the scanned range",
            not smoothness(values(-n_hi, -n_hi)[0], big_p).smooth)
    for elim_id, desc, _, _ in ELIMINATIONS:
        facts = _probe_facts(elim_id)
        rec.add(elim_id, desc, "divisibility elimination of a smooth run", _facts_hold(elim_id, facts), **facts)
    cov = elimination_coverage(smooth)
    rec.add("t2.elim.coverage", "every window inside a smooth run is eliminated by one of the rules",
            "all windows with 18 <= n <= 499 are eliminated", not cov["uncovered"], **cov)
    rec.add("t2.search.completeness", "large-n search box covers the certified r range and smoothness bound",
            "final enumeration", use["r_max"] >= cert.r_max and big_p >= p_cert,
            r_in_use=use["r_max"], r_certified=cert.r_max, bound_in_use=big_p, bound_certified=p_cert)
    large = search_negative(18, n_hi, 1, use["r_max"], big_p)
    rec.add("t2.search.large", "no window with 18 <= n <= 499 is a factorial product (direct decomposition)",
            "independent confirmation of the eliminations", not large, found=[s.key for s in large])
    final = sorted(small + large, key=lambda s: s.key)
    rec.add("t2.search.final", "final solution set equals the stated windows", "complete list for the negative case",
            sorted(s.key for s in final) == sorted(STATED_T2), found=[s.key for s in final])
    return final, cert


def _t3(rec, bits, overrides):
    cert = bounds.cascade_theorem3(2, precision_bits=bits)
    use = _in_use(cert, overrides)
    _cascade_checks(rec, "t3", cert, {"x_max": 25769, "r_max": 1199, "n_max": 719932, "rd_max": 1439862},
                    bits, {
                        "x_max": "sweep of the combined x inequality with gap d: x <= 25769",
                        "r_max": "r bound at the smallest gap: r <= 1199",
                        "n_max": "n bound: n < 719933",
                        "rd_max": "rd bound: rd <= 1439862",
                    })
    low = {k: v for k, v in use.items() if v < getattr(cert, k)}
    rec.add("t3.box.completeness", "exposed box is no smaller than the certified one",
            "the certified box for the gap equation", not low, in_use=use, below_certified=low)
    sample = gap_sample(2, 10, 40, 6)
    hits = [(h["d"], h["n"], h["r"]) for h in sample]
    rec.add("t3.sample", "bounded sampler over 2 <= d <= 10, n <= 40, r <= 6 (no completeness claim)",
            "finiteness only; the box is exposed, not exhausted", all(
                h["representations"][0].product == h["product"] for h in sample),
            hits=hits, pretty=[str(h["representations"][0]) for h in sample])
    return [], cert


def run_pipeline(theorem: str, overrides: dict | None = None, precision_bits: int = DEFAULT_PRECISION,
                 progress: bool = False) -> PipelineReport:
    """Run every step of a theorem's argument and return the named checks.

    ``overrides`` replaces certified constants (x_max, r_max, n_max) for the
    downstream steps only, which is how fault injection is exercised; each
    consumer of a constant has a completeness check against the certificate.
    """
    theorem = {"1": "T1", "2": "T2", "3": "T3"}.get(str(theorem), str(theorem))
    runner = {"T1": _t1, "T2": _t2, "T3": _t3}.get(theorem)
    if runner is None:
        raise ValueError(f"unknown theorem {theorem!r}")
    rec = _Recorder(progress)
    sols, cert = runner(rec, precision_bits, overrides)
    return PipelineReport(theorem, rec.checks, sols, cert)


__all__ = [
    "Check",
    "ELIMINATIONS",
    "NEGATIVE",
    "OVERRIDABLE",
    "POSITIVE",
    "PipelineReport",
    "STATED_T1",
    "STATED_T2",
    "SolutionRecord",
    "ZeroWindowError",
    "claimed",
    "elimination_coverage",
    "eliminate_window",
    "five_squared_rule",
    "gap_sample",
    "prime_gap_rule",
    "run_pipeline",
    "search_negative",
    "search_positive",
    "smooth_runs",
    "stated_records",
    "verify_claimed",
    "window_indices",
    "window_product",
]
