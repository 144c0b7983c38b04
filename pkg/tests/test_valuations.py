import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tribofact.intervals import lower, upper
from tribofact.sequence import term, values
from tribofact.valuations import (
    BRANCH_LABELS,
    UndefinedValuation,
    ZeroTermError,
    branch_cap,
    ceiling_form_bound,
    ceiling_form_holds,
    matching_branches,
    max_factorial_for_nu2,
    neg_valuation_scan,
    nu,
    nu2_tribo_closed,
    nu_factorial,
    per_term_cap,
    pos_valuation_scan,
    simplified_bound,
    valuation_sum_bound_neg,
    valuation_sum_bound_pos,
    window_cap,
)


def test_nu_examples():
    assert nu(2, 24) == 3
    assert nu(2, 5768) == 3
    assert nu(3, -8) == 0
    assert nu(5, 250) == 3


def test_nu_zero():
    with pytest.raises(UndefinedValuation):
        nu(2, 0)


@given(st.integers(1, 10**40), st.sampled_from([2, 3, 5, 7, 13]))
def test_nu_definition(n, p):
    k = nu(p, n)
    assert n % p**k == 0 and n % p ** (k + 1) != 0


def test_nu_factorial_examples():
    assert nu_factorial(2, 4) == 3
    assert nu_factorial(2, 3) == 1
    assert nu_factorial(2, 39) == 35
    assert nu_factorial(2, 0) == 0


def test_legendre_against_direct_product():
    f = 1
    for m in range(0, 2001):
        if m:
            f *= m
        assert nu_factorial(2, m) == (nu(2, f) if f > 1 else 0)


def test_m_at_most_three_nu2():
    assert all(m <= 3 * nu_factorial(2, m) for m in range(2, 2001))


@given(st.integers(0, 3000))
def test_max_factorial_for_nu2(x):
    m = max_factorial_for_nu2(x)
    assert nu_factorial(2, m) <= x < nu_factorial(2, m + 1)


def test_max_factorial_frozen():
    assert [max_factorial_for_nu2(x) for x in (8, 35, 246, 609)] == [11, 39, 253, 615]


@pytest.mark.parametrize("n, label, value", [
    (7, "n≡7 (mod 16)", 3),
    (16, "n≡0 (mod 16)", 3),
    (1, "n≡1,2 (mod 4)", 0),
    (15, "n≡15 (mod 32)", 6),
])
def test_closed_form_examples(n, label, value):
    case = nu2_tribo_closed(n)
    assert case.residue_branch == label and case.valuation == value


def test_closed_form_rejects_zero():
    with pytest.raises(ValueError):
        nu2_tribo_closed(0)


def test_branches_partition():
    for n in range(1, 65537):
        assert len(matching_branches(n)) == 1


def test_closed_form_against_exact_terms():
    a, b, c = 0, 1, 1
    for n in range(1, 65537):
        a, b, c = b, c, a + b + c
        assert nu2_tribo_closed(n).valuation == nu(2, a)


def test_branch_caps():
    assert [branch_cap(label, 1024) for label in BRANCH_LABELS] == [0, 1, 2, 3, 9, 9, 11, 11]
    assert per_term_cap(1024) == 11


def test_window_cap_dominates_actual_sums():
    for length in range(2, 16):
        for n in range(3, 3000, 37):
            limit = n + length + 16
            actual = sum(nu2_tribo_closed(n + i).valuation for i in range(length))
            assert actual <= window_cap(length, limit)


def test_pos_sum_example():
    b = valuation_sum_bound_pos(3, 1)
    assert b.exact_sum == 3
    assert 29.5 < b.simplified_value < 29.6
    assert b.holds


def test_pos_sum_larger():
    b = valuation_sum_bound_pos(100, 31)
    assert b.exact_sum == sum(nu(2, t) for t in values(100, 131))
    assert b.holds


def test_pos_sum_preconditions():
    with pytest.raises(ValueError):
        valuation_sum_bound_pos(16, 0)
    with pytest.raises(ValueError):
        valuation_sum_bound_pos(2, 1)


def test_neg_sum_examples():
    assert term(-18).value == -103
    b = valuation_sum_bound_neg(18, 1)
    assert b.exact_sum == nu(2, term(-19).value)
    b2 = valuation_sum_bound_neg(18, 2)
    assert b2.exact_sum == sum(nu(2, t) for t in values(-20, -18))
    assert valuation_sum_bound_neg(18, 31).holds


def test_neg_sum_preconditions():
    with pytest.raises(ValueError):
        valuation_sum_bound_neg(17, 1)


def test_random_sum_bounds():
    rng = random.Random(20261014)
    for _ in range(200):
        n, r = rng.randint(3, 5000), rng.randint(1, 200)
        assert valuation_sum_bound_pos(n, r).holds


@given(st.integers(0, 400), st.integers(1, 300), st.integers(2, 10**7))
def test_exact_test_matches_intervals(total, r, big_n):
    bound = ceiling_form_bound(r, big_n)
    got = ceiling_form_holds(total, r, big_n)
    if total <= lower(bound):
        assert got
    elif total > upper(bound):
        assert not got


def test_simplified_dominates_ceiling_form():
    for r in range(1, 300):
        assert upper(ceiling_form_bound(r, 1000)) <= lower(simplified_bound(r, 1000)) + 1e-9


def test_scans_clean():
    assert pos_valuation_scan(3, 600, 60) == []
    assert neg_valuation_scan(18, 300, 40) == {"ceiling_form": [], "window_cap": []}


def test_zero_term_error_carries_index():
    e = ZeroTermError(-17)
    assert e.index == -17 and isinstance(e, ValueError)


def test_window_cap_uses_all_residues():
    # a length-32 window sees every residue exactly once
    lg = math.floor(math.log2(5000))
    assert window_cap(32, 5000) == sum(
        branch_cap(nu2_tribo_closed(k).residue_branch, 5000) for k in range(1, 33))
    assert window_cap(1, 5000) == lg + 1
