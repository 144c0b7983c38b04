import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import tribonacci_naive
from tribofact.intervals import CertificationError, context, less
from tribofact.sequence import (
    binet_envelope_holds,
    binet_value,
    growth_bound_holds,
    neg_lower_bound_window,
    root_data,
    term,
    term_range,
    values,
    window_tail_certificate,
)


@pytest.mark.parametrize("index, value", [(7, 24), (0, 0), (-17, 0), (-9, -8), (-18, -103)])
def test_stated_terms(index, value):
    assert term(index).value == value
    assert term(index, "matrix").value == value


def test_printed_lists():
    assert list(values(0, 7)) == [0, 1, 1, 2, 4, 7, 13, 24]
    assert values(-10, -1) == (5, -8, 4, 1, -3, 2, 0, -1, 1, 0)
    assert values(-18, -15) == (-103, 0, 56, -47)


def test_initial_data():
    assert [term(i).value for i in (0, 1, 2, -1, -2, -3)] == [0, 1, 1, 0, 1, -1]


def test_frozen_derived_terms():
    # frozen from the naive oracle
    assert term(19).value == 35890
    assert term(20).value == 66012
    assert term(16).value == 5768
    assert term(100).value == tribonacci_naive(100)


def test_naive_oracle_agreement():
    for n in range(-400, 401):
        assert term(n).value == tribonacci_naive(n)


def test_recurrence_closure():
    block = values(-3000, 3003)
    off = 3000
    for n in range(-3000, 3001):
        assert block[n + 3 + off] == block[n + 2 + off] + block[n + 1 + off] + block[n + off]


@given(st.integers(-5000, 5000))
def test_matrix_matches_iteration(n):
    assert term(n, "matrix") == term(n, "iterate")


def test_unknown_method():
    with pytest.raises(ValueError):
        term(3, "closed")


def test_term_range_examples():
    assert [t.value for t in term_range(-5, 4, 1, direction=-1)] == [2, -3, 1, 4]
    assert [t.value for t in term_range(3, 2, 1)] == [2, 4]
    assert [t.value for t in term_range(5, 1, 7)] == [7]
    assert [t.index for t in term_range(2, 3, 5)] == [2, 7, 12]


@pytest.mark.parametrize("args", [(1, 0, 1), (1, 2, 0), (1, 2, 1, 0)])
def test_term_range_rejects(args):
    with pytest.raises(ValueError):
        term_range(*args)


def test_zero_set():
    zeros = [i for i, t in zip(range(-2000, 1), values(-2000, 0)) if t == 0]
    assert zeros == [-17, -4, -1, 0]


class TestRootData:
    def test_enclosures(self):
        rd = root_data(128)
        ctx = context(128)
        assert less(ctx.mpf("1.83"), rd.alpha) and less(rd.alpha, ctx.mpf("1.84"))
        assert less(ctx.mpf("0.73"), rd.beta_abs) and less(rd.beta_abs, ctx.mpf("0.74"))
        resid = rd.alpha**3 - (rd.alpha**2 + rd.alpha + 1)
        assert less(abs(resid), ctx.mpf(2) ** -100)
        assert less(abs(rd.alpha * rd.beta_abs**2 - 1), ctx.mpf(2) ** -100)
        assert all(rd.facts.values()) and len(rd.facts) == 8

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            root_data(32)

    def test_stated_coefficients_are_shifted(self):
        # a, b as printed reproduce T_{m-1}; the *_term versions reproduce T_m
        ctx = context(256)
        rd = root_data(256)
        for m in (5, 10, 25):
            printed = rd.a_coeff * rd.alpha**m + 2 * rd.b_abs * rd.beta_abs**m * ctx.cos(rd.b_arg + m * rd.beta_arg)
            assert less(abs(printed - term(m - 1).value), ctx.mpf(10) ** -20)
            assert less(abs(binet_value(m, ctx) - term(m).value), ctx.mpf(10) ** -20)

    def test_certification_error_type(self):
        assert issubclass(CertificationError, ArithmeticError)


def test_growth_bound():
    assert all(growth_bound_holds(n) for n in range(1, 1001))


def test_growth_bound_rejects_nonpositive():
    with pytest.raises(ValueError):
        growth_bound_holds(0)


def test_normalized_envelope():
    assert all(binet_envelope_holds(m) for m in range(18, 2001, 7))


@pytest.mark.xfail(strict=True, reason="0.71*0.74^-m is below |T_-m| for large m since |beta| < 0.74")
def test_literal_decay_ceiling():
    ctx = context(128)
    for m in range(18, 2001):
        t = abs(term(-m).value)
        assert less(t, ctx.mpf("0.71") * ctx.mpf("0.74") ** -m * ctx.mpf("1.001"))


class TestWindow:
    def test_short_range(self):
        rep = neg_lower_bound_window(18, 20)
        assert rep.ok and rep.windows_checked == 1

    def test_from_37(self):
        assert neg_lower_bound_window(37, 2000).ok

    def test_early_violations(self):
        # frozen from the direct scan
        rep = neg_lower_bound_window(18, 2000)
        assert rep.violations == [(22, 23, 24), (23, 24, 25), (35, 36, 37), (36, 37, 38)]
        assert rep.weak_terms[:4] == [20, 23, 24, 27]
        assert len(rep.weak_terms) == 105

    def test_precondition(self):
        with pytest.raises(ValueError):
            neg_lower_bound_window(17, 30)

    def test_tail_certificate(self):
        assert window_tail_certificate(2000)["ok"]
        assert window_tail_certificate(70)["ok"]
        assert not window_tail_certificate(69)["ok"]
