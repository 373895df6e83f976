"""
Tests for bpsprimes.counting – intersection counts, the two-path oracle,
the decomposition audit and the prime/Λ transfer check.
"""

from __future__ import annotations

from fractions import Fraction
from unittest import mock

import numpy as np
import pytest

from bpsprimes.arith import prime_pi, primes_between
from bpsprimes.counting import (
    CountQuery,
    CountReport,
    additive_character,
    count_intersection_primes,
    count_ps_primes,
    count_series,
    decomposition_audit,
    predicted_li_term,
    predicted_main_term,
    prime_to_lambda_transfer_check,
    trend_ok,
)
from bpsprimes.errors import IdentityCheckError, PreconditionError, ResourceLimitError
from bpsprimes.exactnum import RationalExponent, floor_rational_power, parse_surd
from bpsprimes.sequences import BeattySpec, PSSpec, beatty_char

C_13_12 = RationalExponent(13, 12)
PS = PSSpec(C_13_12)
CANONICAL = (
    BeattySpec(parse_surd("sqrt(2)"), parse_surd("3/10")),
    BeattySpec(parse_surd("sqrt(3)"), parse_surd("7/10")),
)
UNSHIFTED = (
    BeattySpec(parse_surd("sqrt(2)")),
    BeattySpec(parse_surd("sqrt(3)")),
)


def _brute_force(specs, ps, x):
    terms = {floor_rational_power(n, ps.c) for n in range(1, x + 1)} if ps else None
    return sum(
        1
        for p in primes_between(2, x + 1)
        if (terms is None or int(p) in terms) and all(beatty_char(s, int(p)) for s in specs)
    )


# ---------------------------------------------------------------------------
# Queries and reports
# ---------------------------------------------------------------------------

class TestCountQuery:
    def test_xi(self):
        assert CountQuery(CANONICAL, PS, 100).xi == 2
        assert CountQuery((), None, 100).xi == 0

    def test_limit_too_small(self):
        with pytest.raises(PreconditionError):
            CountQuery((), PS, 1)

    def test_too_many_sequences(self):
        with pytest.raises(PreconditionError):
            CountQuery(CANONICAL * 5, PS, 100)

    def test_with_x(self):
        q = CountQuery(CANONICAL, PS, 100).with_x(500)
        assert q.x == 500 and q.beatty_specs == CANONICAL

    def test_predictions(self):
        q = CountQuery((), None, 1000)
        assert predicted_main_term(q) == pytest.approx(1000 / np.log(1000))
        assert predicted_li_term(q) == pytest.approx(176.56, abs=0.01)
        with_ps = CountQuery(CANONICAL, PS, 10 ** 4)
        assert predicted_li_term(with_ps) > predicted_main_term(with_ps)


class TestCountReport:
    def test_row_round_trip(self):
        report = count_intersection_primes(CountQuery(CANONICAL, PS, 1000))
        back = CountReport.from_dict(report.to_row())
        assert back.observed == report.observed
        assert back.x == 1000
        assert back.alphas == "sqrt(2);sqrt(3)"
        assert back.method == "enumerate-ps"

    def test_no_timing(self):
        report = count_intersection_primes(CountQuery((), None, 1000))
        assert report.to_row(timing=False)["ms"] == 0


# ---------------------------------------------------------------------------
# Counts
# ---------------------------------------------------------------------------

class TestCounts:
    def test_ps_primes_to_ten(self):
        assert count_ps_primes(PS, 10).observed == 3

    def test_ps_primes_brute_force(self):
        assert count_ps_primes(PS, 100).observed == _brute_force((), PS, 100)

    def test_intersection_brute_force(self):
        q = CountQuery(CANONICAL, PS, 2000)
        assert count_intersection_primes(q).observed == _brute_force(CANONICAL, PS, 2000)

    def test_no_sequences_is_prime_pi(self):
        report = count_intersection_primes(CountQuery((), None, 1000))
        assert report.observed == 168
        assert report.method == "sieve-filter"

    def test_ps_only_paths_agree(self):
        enum = count_ps_primes(PS, 10 ** 5, "enumerate-ps").observed
        sieve = count_ps_primes(PS, 10 ** 5, "sieve-filter").observed
        assert enum == sieve

    def test_both_paths_canonical(self):
        q = CountQuery(CANONICAL, PS, 10 ** 5)
        both = count_intersection_primes(q, "both")
        assert both.observed == count_intersection_primes(q, "sieve-filter").observed
        assert both.observed == count_intersection_primes(q, "enumerate-beatty").observed

    def test_beatty_enumeration_without_ps(self):
        q = CountQuery(UNSHIFTED[:1], None, 10 ** 5)
        assert count_intersection_primes(q, "enumerate-ps").method == "enumerate-beatty"
        assert count_intersection_primes(q, "enumerate-beatty").observed == count_intersection_primes(q).observed

    def test_sqrt2_prediction(self):
        report = count_intersection_primes(CountQuery(UNSHIFTED[:1], None, 10 ** 5))
        li_err = abs(report.observed - report.predicted_li) / report.predicted_li
        assert li_err < 0.05
        assert report.relative_error < 0.12

    def test_threads_do_not_change_counts(self):
        q = CountQuery(CANONICAL, PS, 3 * 10 ** 5)
        single = count_intersection_primes(q, "sieve-filter", threads=1)
        double = count_intersection_primes(q, "sieve-filter", threads=2)
        assert single.observed == double.observed

    def test_series_is_cumulative(self):
        q = CountQuery(CANONICAL, PS, 10 ** 4)
        reports = count_series(q, [10 ** 4, 10 ** 3, 5 * 10 ** 3])
        assert [r.x for r in reports] == [1000, 5000, 10 ** 4]
        assert reports[-1].observed == count_intersection_primes(q).observed
        assert reports[0].observed <= reports[1].observed <= reports[2].observed

    def test_independence_note(self):
        report = count_intersection_primes(CountQuery(UNSHIFTED, PS, 1000))
        assert report.independence.startswith("no relation")

    def test_path_mismatch_raises(self):
        q = CountQuery(CANONICAL, PS, 10 ** 4)
        with mock.patch("bpsprimes.counting._sieve_range", return_value=0):
            with pytest.raises(IdentityCheckError):
                count_intersection_primes(q, "both")

    def test_limits(self):
        with pytest.raises(ResourceLimitError):
            count_intersection_primes(CountQuery((), None, 10 ** 10), "sieve-filter")
        with pytest.raises(ResourceLimitError):
            count_intersection_primes(CountQuery((), PS, 2 ** 63))

    def test_bad_methods(self):
        with pytest.raises(PreconditionError):
            count_intersection_primes(CountQuery((), PS, 100), "guess")
        with pytest.raises(PreconditionError):
            count_intersection_primes(CountQuery((), PS, 100), "enumerate-beatty")

    @pytest.mark.slow
    def test_both_paths_large(self):
        q = CountQuery(CANONICAL, PS, 10 ** 7)
        assert count_intersection_primes(q, "both", threads=2).observed > 0


class TestTrend:
    def test_decreasing(self):
        assert trend_ok([0.3, 0.2, 0.25, 0.1])

    def test_too_many_rises(self):
        assert not trend_ok([0.1, 0.2, 0.3])
        assert trend_ok([0.1, 0.2, 0.3], allowed_inversions=2)


# ---------------------------------------------------------------------------
# Decomposition audit
# ---------------------------------------------------------------------------

class TestDecompositionAudit:
    def test_two_sequences(self):
        audit = decomposition_audit(CountQuery(UNSHIFTED, PS, 10 ** 4))
        assert audit.ok
        assert audit.labels == ("S1", "S2", "S3", "S4", "S5", "S6", "S7")
        assert audit.identity_count == audit.observed
        assert audit.total == pytest.approx(audit.identity_count, abs=1e-6 * audit.identity_count)

    def test_main_sum(self):
        audit = decomposition_audit(CountQuery(UNSHIFTED, PS, 10 ** 4))
        ps_count = count_ps_primes(PS, 10 ** 4).observed
        omega_prod = 1 / (np.sqrt(2) * np.sqrt(3))
        assert audit.sums[0] == pytest.approx(omega_prod * ps_count, rel=1e-9)

    def test_one_sequence(self):
        audit = decomposition_audit(CountQuery(UNSHIFTED[:1], PS, 10 ** 4))
        assert audit.ok
        assert audit.labels == ("S1", "S2", "S3")

    def test_three_sequences(self):
        specs = UNSHIFTED + (BeattySpec(parse_surd("sqrt(5)")),)
        audit = decomposition_audit(CountQuery(specs, PS, 10 ** 4))
        assert audit.ok
        assert audit.labels == ("main", "remainder")
        assert len(audit.values()) == 3

    def test_shifted_sequences(self):
        audit = decomposition_audit(CountQuery(CANONICAL, PS, 10 ** 4))
        assert audit.ok
        assert audit.identity_count == audit.observed

    def test_large_shift_checks_raw_identity(self):
        # floor(sqrt(2)*n + 5) hits the primes 2, 3 and 5 at n = -2, -1 and 0
        shifted = (BeattySpec(parse_surd("sqrt(2)"), parse_surd("5")),)
        audit = decomposition_audit(CountQuery(shifted, PS, 1000))
        assert audit.ok
        assert audit.identity_count == audit.observed + 3
        assert audit.total == pytest.approx(audit.identity_count, abs=1e-6 * audit.identity_count)

    def test_to_dict(self):
        d = decomposition_audit(CountQuery(UNSHIFTED[:1], PS, 1000)).to_dict()
        assert set(d) == {"x", "S1", "S2", "S3", "total", "identity_count", "observed", "ok"}

    def test_errors(self):
        with pytest.raises(PreconditionError):
            decomposition_audit(CountQuery(UNSHIFTED, None, 1000))
        with pytest.raises(ResourceLimitError):
            decomposition_audit(CountQuery(UNSHIFTED, PS, 10 ** 8))


# ---------------------------------------------------------------------------
# Transfer from Λ-weighted sums
# ---------------------------------------------------------------------------

class TestTransfer:
    def test_constant_weight(self):
        report = prime_to_lambda_transfer_check(lambda n: np.ones(n.shape), 10 ** 4)
        assert report.lhs == pytest.approx(prime_pi(2 * 10 ** 4) - prime_pi(10 ** 4))
        assert report.lhs == pytest.approx(1033)
        assert report.ok

    def test_empty_range(self):
        report = prime_to_lambda_transfer_check(lambda n: np.ones(n.shape), 1000, 1000)
        assert report.lhs == 0.0
        assert report.ok

    def test_additive_character(self):
        g = additive_character(parse_surd("sqrt(2)"))
        values = g(np.arange(1, 100))
        assert np.allclose(np.abs(values), 1.0)
        report = prime_to_lambda_transfer_check(g, 10 ** 4)
        assert report.ok
        assert report.to_row()["lemma"] == "prime-to-lambda"

    def test_weight_must_be_bounded(self):
        with pytest.raises(PreconditionError):
            prime_to_lambda_transfer_check(lambda n: 2 * np.ones(n.shape), 1000)

    def test_range_errors(self):
        with pytest.raises(PreconditionError):
            prime_to_lambda_transfer_check(lambda n: np.ones(n.shape), 1)
        with pytest.raises(PreconditionError):
            prime_to_lambda_transfer_check(lambda n: np.ones(n.shape), 1000, 999)


class TestAuditMagnitudes:
    def test_remainder_sums_below_main_sum(self):
        audit = decomposition_audit(CountQuery(CANONICAL, PS, 10 ** 5))
        main = audit.sums[0]
        assert all(abs(s) < main for s in audit.sums[1:])

    @pytest.mark.slow
    def test_remainder_sums_below_main_sum_large(self):
        audit = decomposition_audit(CountQuery(CANONICAL, PS, 10 ** 6))
        assert audit.ok
        assert all(abs(s) < audit.sums[0] for s in audit.sums[1:])


# ---------------------------------------------------------------------------
# Two-path agreement on random queries
# ---------------------------------------------------------------------------

ALPHA_POOL = ("sqrt(2)", "sqrt(3)", "sqrt(5)", "(1 + sqrt(5)) / 2", "1 + sqrt(2)", "sqrt(7)")
C_POOL = (Fraction(13, 12), Fraction(21, 20), Fraction(25, 24), Fraction(31, 30))


def _random_query(rng, x_max):
    alphas = rng.choice(ALPHA_POOL, size=int(rng.integers(1, 4)), replace=False)
    specs = tuple(BeattySpec(parse_surd(str(a)), Fraction(int(rng.integers(0, 10)), 10)) for a in alphas)
    ps = PSSpec(RationalExponent.from_fraction(C_POOL[int(rng.integers(len(C_POOL)))])) if rng.random() < 0.5 else None
    return CountQuery(specs, ps, int(rng.integers(x_max // 10, x_max + 1)))


class TestRandomQueries:
    @pytest.mark.parametrize("seed", range(20))
    def test_paths_agree(self, seed):
        q = _random_query(np.random.default_rng(seed), 10 ** 5)
        both = count_intersection_primes(q, "both")
        assert both.observed == count_intersection_primes(q, "sieve-filter").observed

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_paths_agree_large(self, seed):
        q = _random_query(np.random.default_rng(1000 + seed), 10 ** 7)
        report = count_intersection_primes(q, "both", threads=2)
        assert report.method == "both"


# ---------------------------------------------------------------------------
# Desk-scale asymptotics
# ---------------------------------------------------------------------------

def _li_error(report):
    return abs(report.observed - report.predicted_li) / report.predicted_li


class TestAsymptotics:
    @pytest.mark.slow
    @pytest.mark.parametrize("x", [10 ** 8, 10 ** 9])
    def test_ps_primes(self, x):
        report = count_ps_primes(PS, x)
        assert report.relative_error < 0.15
        assert _li_error(report) < 0.05

    @pytest.mark.slow
    def test_canonical_intersection_series(self):
        reports = count_series(CountQuery(CANONICAL, PS, 10 ** 9), [10 ** 7, 10 ** 8, 10 ** 9])
        errors = [r.relative_error for r in reports]
        assert errors[-1] < 0.20
        assert trend_ok(errors)

    @pytest.mark.slow
    def test_single_beatty(self):
        report = count_intersection_primes(CountQuery(UNSHIFTED[:1], None, 10 ** 8))
        assert report.relative_error < 0.10

    @pytest.mark.slow
    def test_three_beatty_sequences(self):
        specs = UNSHIFTED + (BeattySpec(parse_surd("(1 + sqrt(5)) / 2")),)
        report = count_intersection_primes(CountQuery(specs, None, 10 ** 8))
        assert report.relative_error < 0.25
        assert report.independence.startswith("no relation")
