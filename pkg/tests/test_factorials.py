import math

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from oracles import factorial_product, largest_prime_factor
from tribofact.factorials import (
    SIEVE_LIMIT,
    FactorialMultiset,
    brute_force_decompositions,
    decompose,
    divisibility_probe,
    factorial_ratio,
    factorial_ratio_max,
    is_factorial_product,
    is_prime,
    next_prime,
    primes_up_to,
    smooth_index_scan_neg,
    smooth_index_scan_pos,
    smoothness,
)
from tribofact.intervals import context, less, lower, upper
from tribofact.sequence import term, values
from tribofact.valuations import ZeroTermError, nu


def parts(reps):
    return {r.parts for r in reps}


class TestMultiset:
    def test_empty(self):
        e = FactorialMultiset.of(())
        assert e.product == 1 and e.nu2 == 0 and str(e) == "1"

    def test_sorted_and_consistent(self):
        m = FactorialMultiset.of((7, 2, 5, 2))
        assert m.parts == (2, 2, 5, 7)
        assert m.product == factorial_product((2, 2, 5, 7))
        assert m.nu2 == nu(2, m.product)
        assert str(m) == "(2!)^2·5!·7!"

    def test_rejects_small_parts(self):
        with pytest.raises(ValueError):
            FactorialMultiset.of((1, 3))

    @given(st.lists(st.integers(2, 30), max_size=6))
    def test_invariants(self, ps):
        m = FactorialMultiset.of(ps)
        assert m.product == factorial_product(ps)
        assert m.nu2 == (nu(2, m.product) if m.product > 1 else 0)


class TestDecompose:
    def test_examples(self):
        assert parts(decompose(24, 10)) == {(4,), (2, 2, 3)}
        assert parts(decompose(1, 10)) == {()}
        assert parts(decompose(8, 10)) == {(2, 2, 2)}
        assert (2, 2, 5, 7) in parts(decompose(2419200, 10))
        assert decompose(7, 10) == []

    def test_order_is_descending(self):
        reps = [r.parts for r in decompose(3628800, 16)]
        keys = [tuple(sorted(p, reverse=True)) for p in reps]
        assert keys == sorted(keys, reverse=True)
        assert reps[0] == (10,)

    def test_cap(self):
        assert len(decompose(21772800, 1)) == 1
        assert len(decompose(21772800, 16)) == 3

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            decompose(0)
        with pytest.raises(ValueError):
            decompose(5, 0)

    def test_is_factorial_product(self):
        assert is_factorial_product(3628800)
        assert not is_factorial_product(5)
        assert is_factorial_product(960)

    def test_brute_force_oracle_to_million(self):
        table = brute_force_decompositions(10**6)
        for n in range(1, 10**6 + 1, 1):
            got = decompose(n, 10**6)
            want = table.get(n, set())
            assert parts(got) == want, n

    @given(st.lists(st.integers(2, 40), min_size=1, max_size=5))
    def test_soundness_and_largest_part_window(self, ps):
        n = factorial_product(ps)
        reps = decompose(n, 64)
        assert tuple(sorted(ps)) in parts(reps) or len(reps) == 64
        big = largest_prime_factor(n)
        for r in reps:
            assert r.product == n
            if n > 1:
                assert big <= r.parts[-1] < sympy.nextprime(big)

    def test_large_smooth_non_product(self):
        # T_34 T_35 is 251-smooth but not a factorial product
        t = values(34, 35)
        assert not is_factorial_product(t[0] * t[1])


class TestPrimes:
    def test_sieve(self):
        assert list(primes_up_to(30)) == list(sympy.primerange(2, 31))
        assert len(primes_up_to(SIEVE_LIMIT)) == sympy.primepi(SIEVE_LIMIT)
        assert primes_up_to(SIEVE_LIMIT * 3)[-1] == sympy.prevprime(SIEVE_LIMIT * 3 + 1)

    def test_is_prime_next_prime(self):
        assert [n for n in range(50) if is_prime(n)] == list(sympy.primerange(0, 50))
        assert next_prime(251) == 257 and next_prime(613) == 617


class TestSmoothness:
    def test_examples(self):
        t = values(34, 35)
        rep = smoothness(t[0] * t[1], 251)
        assert rep.smooth and rep.largest_found_factor == 227  # all primes listed are <= 251
        assert smoothness(24, 3).smooth
        t19 = smoothness(term(19).value, 251)
        assert t19.smooth and term(19).value == 35890 == 2 * 5 * 37 * 97
        t20 = smoothness(term(20).value, 251)
        assert not t20.smooth and t20.cofactor_nontrivial  # 66012 = 2^2 * 3 * 5501

    def test_zero(self):
        with pytest.raises(ValueError):
            smoothness(0, 7)

    @given(st.integers(1, 10**12), st.sampled_from([2, 3, 13, 97, 251, 613]))
    def test_against_factorization(self, v, bound):
        assert smoothness(v, bound).smooth == (largest_prime_factor(v) <= bound)

    def test_scans(self):
        assert smooth_index_scan_pos(299, 251) == list(range(2, 20)) + [28, 31, 34, 35]
        assert smooth_index_scan_pos(7, 13) == [2, 3, 4, 5, 6, 7]
        assert smooth_index_scan_pos(2, 2) == [2]
        assert smooth_index_scan_neg(18, 20, 613) == [18, 19, 20]
        assert smooth_index_scan_neg(18, 18, 2) == []

    def test_negative_scan_printed_list(self):
        want = (list(range(18, 29)) + [30] + list(range(32, 37)) + [38, 40, 41, 43, 46]
                + list(range(49, 53)) + [55, 56, 57, 63, 65, 66, 68, 69])
        assert smooth_index_scan_neg(18, 499, 613) == want

    def test_scan_oracle(self):
        for i, t in enumerate(values(2, 120), start=2):
            assert (i in smooth_index_scan_pos(120, 251)) == (largest_prime_factor(t) <= 251)

    def test_scan_preconditions(self):
        with pytest.raises(ValueError):
            smooth_index_scan_pos(1, 5)
        with pytest.raises(ValueError):
            smooth_index_scan_neg(17, 20, 5)


class TestProbe:
    def test_examples(self):
        assert not any(divisibility_probe(range(2, 20), 17).per_index.values())
        assert not divisibility_probe([-40, -41], 7).product
        assert divisibility_probe([-40, -41], 23).product
        assert not divisibility_probe([-68, -69], 5).product
        assert divisibility_probe([-68, -69], 7).product
        assert divisibility_probe([-32, -33], 5, 2).product

    def test_zero_term(self):
        with pytest.raises(ZeroTermError) as info:
            divisibility_probe([-16, -17], 3)
        assert info.value.index == -17

    def test_empty(self):
        with pytest.raises(ValueError):
            divisibility_probe([], 3)


class TestRatio:
    def test_small_values(self):
        ctx = context(128)
        r2 = factorial_ratio(2, ctx)
        assert lower(r2) <= 1 <= upper(r2)
        r3 = factorial_ratio(3, ctx)
        assert less(abs(r3 - ctx.log(6) / ctx.log(2)), ctx.mpf(10) ** -30)

    def test_max_at_39(self):
        ratio, arg = factorial_ratio_max(39)
        assert less(ratio, context(128).mpf("6.11"))
        assert arg == 39 and 4.39 < float(ratio.mid) < 4.40

    def test_running_max_nondecreasing(self):
        prev = 0
        for m in range(2, 80):
            ratio, _ = factorial_ratio_max(m)
            assert float(ratio.mid) >= prev
            prev = float(ratio.mid)

    def test_precondition(self):
        with pytest.raises(ValueError):
            factorial_ratio_max(1)


def test_exponent_matches_legendre():
    for m in range(2, 60):
        assert nu(3, math.factorial(m)) == sum(m // 3**i for i in range(1, 6))
