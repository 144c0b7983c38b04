import mpmath
import pytest

from tribofact.intervals import (
    CertificationError,
    Undecided,
    context,
    decide,
    int_at_most,
    int_below,
    less,
    less_equal,
    log2_floor,
    lower,
    upper,
)


def test_endpoints_bracket_value():
    ctx = context(128)
    v = ctx.log(3)
    assert lower(v) < upper(v)
    with mpmath.workprec(400):
        ref = mpmath.log(3)
        assert lower(v) <= ref <= upper(v)


def test_less_raises_on_overlap():
    ctx = context(64)
    with pytest.raises(Undecided):
        less(ctx.mpf([1, 2]), ctx.mpf([1.5, 3]))
    assert less(ctx.mpf(1), ctx.mpf(2))
    assert not less(ctx.mpf(2), ctx.mpf(1))
    assert less_equal(ctx.mpf(2), ctx.mpf(2))


def test_decide_escalates():
    seen = []

    def fn(ctx):
        seen.append(ctx.prec)
        if ctx.prec < 512:
            raise Undecided("need more bits")
        return ctx.prec

    assert decide(fn, 128) == 512
    assert seen == [128, 256, 512]


def test_decide_gives_up():
    def fn(ctx):
        raise Undecided("never")

    with pytest.raises(CertificationError, match="1024 bits"):
        decide(fn, 128)


def test_integer_rounding():
    ctx = context(128)
    assert int_at_most(ctx.mpf(5)) == 5
    assert int_below(ctx.mpf(5)) == 4
    assert int_at_most(ctx.log(100)) == 4
    assert type(int_at_most(ctx.log(100))) is int


def test_log2_floor():
    assert [log2_floor(n) for n in (1, 2, 3, 4, 1023, 1024)] == [0, 1, 1, 2, 9, 10]
