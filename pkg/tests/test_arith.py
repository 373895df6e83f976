"""
Tests for bpsprimes.arith: segmented sieve, Λ/μ tables and primality.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from bpsprimes import arith
from bpsprimes.arith import (
    MR_LIMIT,
    chebyshev_psi,
    is_prime_array,
    is_prime_u64,
    iter_segments,
    mobius,
    prime_mask,
    prime_pi,
    prime_power,
    primes_between,
    sieve_segment,
    small_primes,
    von_mangoldt,
)
from bpsprimes.errors import PreconditionError, ResourceLimitError


# ---------------------------------------------------------------------------
# Sieve
# ---------------------------------------------------------------------------

class TestSieve:
    def test_prime_pi_small(self):
        assert prime_pi(100) == 25
        assert prime_pi(1) == 0
        assert prime_pi(2) == 1

    def test_prime_pi_million(self):
        assert prime_pi(10 ** 6) == 78498

    def test_segment_size_does_not_change_count(self):
        assert prime_pi(10 ** 5, segment_size=997) == prime_pi(10 ** 5) == 9592

    def test_small_primes(self):
        assert small_primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        assert small_primes(1).size == 0

    def test_base_sieve_sized_to_limit(self, monkeypatch):
        monkeypatch.setattr(arith, "_BASE", (1, np.array([], dtype=np.int64)))
        assert small_primes(1030).size == 172
        assert arith._BASE[0] == 1030
        assert small_primes(30).tolist()[-1] == 29
        assert arith._BASE[0] == 1030
        assert small_primes(10 ** 5).size == 9592
        assert arith._BASE[0] == 10 ** 5

    def test_primes_between(self):
        assert primes_between(90, 110).tolist() == [97, 101, 103, 107, 109]

    def test_prime_mask_offset(self):
        mask = prime_mask(1, 12)
        assert np.flatnonzero(mask).tolist() == [1, 2, 4, 6, 10]

    def test_iter_segments_cover_range(self):
        segs = list(iter_segments(1, 25, 10))
        assert segs == [(1, 11), (11, 21), (21, 25)]

    def test_bad_ranges(self):
        with pytest.raises(PreconditionError):
            sieve_segment(0, 10)
        with pytest.raises(ResourceLimitError):
            sieve_segment(1, 100, segment_size=10)
        with pytest.raises(ResourceLimitError):
            prime_mask(2 ** 63, 2 ** 63 + 10)


class TestArithTables:
    def test_mu_first_values(self):
        tables = sieve_segment(1, 13)
        assert [tables.mu_at(n) for n in range(1, 13)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]

    def test_mu_matches_trial_division(self):
        tables = sieve_segment(10 ** 6, 10 ** 6 + 2000)
        for n in range(10 ** 6, 10 ** 6 + 2000, 7):
            assert tables.mu_at(n) == mobius(n)

    def test_lambda_values(self):
        tables = sieve_segment(1, 33)
        assert tables.lambda_at(8) == pytest.approx(math.log(2))
        assert tables.lambda_at(9) == pytest.approx(math.log(3))
        assert tables.lambda_at(12) == 0.0
        assert tables.lambda_at(31) == pytest.approx(math.log(31))
        assert tables.lambda_at(1) == 0.0

    def test_lambda_structural(self):
        tables = sieve_segment(20, 40)
        assert int(tables.lambda_prime[27 - 20]) == 3
        assert int(tables.lambda_exp[27 - 20]) == 3
        assert int(tables.lambda_prime[32 - 20]) == 2
        assert int(tables.lambda_exp[32 - 20]) == 5

    def test_tables_read_only(self):
        tables = sieve_segment(1, 10)
        with pytest.raises(ValueError):
            tables.mu[0] = 5

    def test_index_outside_raises(self):
        with pytest.raises(IndexError):
            sieve_segment(10, 20).mu_at(5)

    def test_chebyshev_psi(self):
        direct = sum(von_mangoldt(n) for n in range(1, 1001))
        assert chebyshev_psi(1000) == pytest.approx(direct, rel=1e-12)
        assert chebyshev_psi(1000, lo=500) == pytest.approx(
            sum(von_mangoldt(n) for n in range(501, 1001)), rel=1e-12
        )


# ---------------------------------------------------------------------------
# Single values
# ---------------------------------------------------------------------------

class TestPrimality:
    @pytest.mark.parametrize("n", [2, 3, 97, 7919, 2 ** 31 - 1, 2 ** 61 - 1, 10 ** 18 + 9, 2 ** 64 - 59])
    def test_primes(self, n):
        assert is_prime_u64(n)

    @pytest.mark.parametrize("n", [0, 1, 4, 561, 2047, 3215031751, 2 ** 32 + 1, 10 ** 18 + 1, 2 ** 64 - 1])
    def test_composites(self, n):
        assert not is_prime_u64(n)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            is_prime_u64(2 ** 64)

    def test_prime_power(self):
        assert prime_power(2 ** 10) == (2, 10)
        assert prime_power(343) == (7, 3)
        assert prime_power(13) == (13, 1)
        assert prime_power(12) is None
        assert prime_power(1) is None

    def test_von_mangoldt_rejects_zero(self):
        with pytest.raises(PreconditionError):
            von_mangoldt(0)


class TestIsPrimeArray:
    def test_matches_sieve(self):
        ns = np.arange(0, 20000, dtype=np.int64)
        expected = np.zeros(ns.size, dtype=bool)
        expected[2:] = prime_mask(2, 20000)
        np.testing.assert_array_equal(is_prime_array(ns), expected)

    def test_strong_pseudoprimes_rejected(self):
        ns = np.array([2047, 1373653, 25326001, 3215031751], dtype=np.int64)
        assert not is_prime_array(ns).any()

    def test_near_mr_limit(self):
        ns = np.array([MR_LIMIT - 5, MR_LIMIT + 1, MR_LIMIT + 15, 2 ** 61 - 1], dtype=np.int64)
        assert is_prime_array(ns).tolist() == [True, False, True, True]

    def test_matches_scalar(self):
        rng = np.random.default_rng(3)
        ns = rng.integers(10 ** 8, 4 * 10 ** 9, size=300)
        assert is_prime_array(ns).tolist() == [is_prime_u64(int(n)) for n in ns]
