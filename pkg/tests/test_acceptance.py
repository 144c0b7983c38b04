"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in the
terminal summary (see conftest.py) and by running this file directly.
"""

import json
import time

import pytest

from tribofact import bounds
from tribofact.cli import EXIT_OK, main
from tribofact.factorials import brute_force_decompositions, decompose
from tribofact.search import claimed, verify_claimed
from tribofact.sequence import growth_bound_holds, neg_lower_bound_window, term, values
from tribofact.valuations import nu, nu2_tribo_closed, nu_factorial

RESULTS: dict[int, tuple[bool, str]] = {}


def record(num: int, ok: bool, detail: str) -> None:
    RESULTS[num] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}")


def _reproduce(theorem: int, *extra: str) -> tuple[int, dict]:
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(["reproduce", "--theorem", str(theorem), "--format", "json", *extra])
    return code, json.loads(buf.getvalue())


def _check(report: dict, check_id: str) -> dict:
    return next(c for c in report["checks"] if c["id"] == check_id)


def test_criterion_1_closed_form_valuation():
    start = time.perf_counter()
    a, b, c = 0, 1, 1
    mismatches = []
    for n in range(1, 65537):
        a, b, c = b, c, a + b + c
        if nu2_tribo_closed(n).valuation != nu(2, a):
            mismatches.append(n)
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 30
    record(1, ok, f"{len(mismatches)} mismatches for 1 <= n <= 65536 in {elapsed:.1f}s")
    assert ok


def test_criterion_2_theorem1():
    start = time.perf_counter()
    code, rep = _reproduce(1)
    cert = rep["certificate"]
    problems = []
    for key, want in (("x_max", 246), ("r_max", 127), ("n_max", 4033)):
        got = int(cert[key])
        if abs(got - want) > 1 or (got != want and not cert["discrepancies"]):
            problems.append(f"{key}={got}")
    r_trace = [int(v) for v in _check(rep, "t1.refine.r_trace")["details"]["computed"]]
    if r_trace != [24, 5, 3, 2, 1]:
        problems.append(f"r trace {r_trace}")
    smooth = [int(v) for v in _check(rep, "t1.smooth_scan.list")["details"]["computed"]]
    if smooth != list(range(2, 20)) + [28, 31, 34, 35]:
        problems.append("smooth list")
    if not _check(rep, "t1.no17")["pass"]:
        problems.append("17 check")
    sols = [(s["n"], s["r"], s["pretty"]) for s in rep["solutions"]]
    if sols != [("3", "1", ["(2!)^3"])]:
        problems.append(f"solutions {sols}")
    if code != EXIT_OK or not rep["pass"]:
        problems.append(f"report failed at {rep['first_failure']}")
    elapsed = time.perf_counter() - start
    if elapsed > 300:
        problems.append(f"runtime {elapsed:.0f}s")
    ok = not problems
    record(2, ok, f"reproduce --theorem 1 in {elapsed:.1f}s" + ("" if ok else "; " + ", ".join(problems)))
    assert ok, problems


STATED_T2_PRODUCTS = [6, 6, 24, 192, 960, 2419200, 21772800, 12, 96, 480, 1209600, 4, 32, 32, 3628800]


def test_criterion_3_theorem2():
    start = time.perf_counter()
    code, rep = _reproduce(2)
    cert = rep["certificate"]
    problems = []
    for key, want in (("x_max", 609), ("r_max", 356), ("n_max", 136735)):
        got = int(cert[key])
        if abs(got - want) > 1 or (got != want and not cert["discrepancies"]):
            problems.append(f"{key}={got}")
    r_trace = [int(v) for v in _check(rep, "t2.refine.r_trace")["details"]["computed"]]
    if r_trace != [126, 42, 22, 15, 11, 7, 5]:
        problems.append(f"r trace {r_trace}")
    if not _check(rep, "t2.refine.ratio_max")["pass"]:
        problems.append("ratio max")
    if not _check(rep, "t2.smooth_scan.list")["pass"]:
        problems.append("smooth list")
    elim = [f"t2.elim.E{i}" for i in range(1, 7)] + ["t2.elim.coverage"]
    if not all(_check(rep, e)["pass"] for e in elim):
        problems.append("eliminations")
    prods = sorted(int(s["product_abs"]) for s in rep["solutions"])
    recs_ok = all(verify_claimed(claimed("negative", int(s["n"]), int(s["r"]),
                                         [int(m) for m in s["representations"][0]])) for s in rep["solutions"])
    if prods != sorted(STATED_T2_PRODUCTS):
        problems.append(f"{len(prods)} windows found, 15 expected")
    if not recs_ok:
        problems.append("solution re-verification")
    if code != EXIT_OK or not rep["pass"]:
        failed = [c["id"] for c in rep["checks"] if not c["pass"]]
        problems.append("failed checks " + " ".join(failed))
    elapsed = time.perf_counter() - start
    if elapsed > 600:
        problems.append(f"runtime {elapsed:.0f}s")
    ok = not problems
    record(3, ok, f"reproduce --theorem 2 in {elapsed:.1f}s" + ("" if ok else "; " + "; ".join(problems)))
    assert ok, problems


def test_criterion_4_theorem3():
    start = time.perf_counter()
    cert = bounds.cascade_theorem3(2)
    problems = []
    for key, want in (("x_max", 25769), ("r_max", 1199), ("rd_max", 1439862), ("n_max", 719932)):
        got = getattr(cert, key)
        if abs(got - want) > 1 or (got != want and not cert.discrepancies):
            problems.append(f"{key}={got}")
    if not cert.certified:
        problems.append("claim not certified")
    if not bounds.replay(cert):
        problems.append("replay")
    elapsed = time.perf_counter() - start
    if elapsed > 60:
        problems.append(f"runtime {elapsed:.0f}s")
    ok = not problems
    record(4, ok, f"x 25769, r 1199, rd 1439862, n 719932, replayed, {elapsed:.1f}s"
           if ok else "; ".join(problems))
    assert ok, problems


def test_criterion_5_decomposition_oracle():
    start = time.perf_counter()
    table = brute_force_decompositions(10**6)
    bad = [n for n in range(1, 10**6 + 1)
           if {r.parts for r in decompose(n, 10**6)} != table.get(n, set())]
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    record(5, ok, f"{len(bad)} disagreements for N <= 10^6 ({len(table)} representable) in {elapsed:.1f}s")
    assert ok


def test_criterion_6_window_property():
    start = time.perf_counter()
    rep = neg_lower_bound_window(18, 2000)
    elapsed = time.perf_counter() - start
    ok = rep.ok and elapsed < 10
    record(6, ok, f"{len(rep.violations)} violations {rep.violations} in {elapsed:.1f}s")
    assert ok, rep.violations


def test_criterion_7_property_suites():
    problems = []
    block = values(-3000, 3003)
    if any(block[i + 3] != block[i + 2] + block[i + 1] + block[i] for i in range(6001)):
        problems.append("recurrence")
    import random

    rng = random.Random(7)
    if any(term(n, "matrix") != term(n) for n in (rng.randint(-5000, 5000) for _ in range(500))):
        problems.append("matrix")
    f = 1
    for m in range(1, 2001):
        f *= m
        if m >= 2 and nu_factorial(2, m) != nu(2, f):
            problems.append("legendre")
            break
    if not all(m <= 3 * nu_factorial(2, m) for m in range(2, 2001)):
        problems.append("m <= 3 nu2(m!)")
    if not all(growth_bound_holds(n) for n in range(1, 1001)):
        problems.append("growth")
    ok = not problems
    record(7, ok, "recurrence, matrix, Legendre, m <= 3nu2(m!), growth" if ok else ", ".join(problems))
    assert ok, problems


SABOTAGE = [
    (1, "x_max", 246), (1, "r_max", 127), (1, "n_max", 4033),
    (2, "x_max", 609), (2, "r_max", 356), (2, "n_max", 136735),
    (3, "x_max", 25769), (3, "r_max", 1199), (3, "n_max", 719932),
]


def test_criterion_8_fault_injection():
    clean = {th: _reproduce(th)[1] for th in (1, 2)}
    silent = []
    for th, key, value in SABOTAGE:
        for bad in (value - 1, 10):
            code, rep = _reproduce(th, "--override", f"{key}={bad}")
            newly = [c["id"] for c in rep["checks"] if not c["pass"]
                     and (th == 3 or _check(clean[th], c["id"])["pass"])]
            if code == EXIT_OK or not newly:
                silent.append(f"T{th} {key}={bad}")
    ok = not silent
    record(8, ok, f"{2 * len(SABOTAGE)} downward sabotages all caught at named checks"
           if ok else "silent: " + ", ".join(silent))
    assert ok, silent


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
