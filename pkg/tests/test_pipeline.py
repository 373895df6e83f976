"""
Tests for bpsprimes.pipeline – job runners and the identity suites.

Parameters are kept small; only the default-size suites run at full scale.
"""

from __future__ import annotations

from types import SimpleNamespace
from unittest.mock import patch

import pytest

from bpsprimes.arith import chebyshev_psi
from bpsprimes.config import ExperimentConfig, Job
from bpsprimes.errors import SpecParseError
from bpsprimes.pipeline import (
    HB_SAMPLES,
    PSI_SAMPLES,
    ExperimentPipeline,
    JobResult,
    build_query,
    map_ordered,
    run_job,
)


# ---------------------------------------------------------------------------
# map_ordered / ExperimentPipeline
# ---------------------------------------------------------------------------

class TestMapOrdered:
    def test_serial(self):
        assert map_ordered(pow, [(2, 3), (3, 2)]) == [8, 9]

    def test_pool_keeps_order(self):
        args = [(n, 2) for n in range(10)]
        assert map_ordered(pow, args, threads=2) == [n * n for n in range(10)]

    def test_empty(self):
        assert map_ordered(pow, [], threads=4) == []


class TestExperimentPipeline:
    def test_from_config(self):
        cfg = ExperimentConfig(threads=3, seed=9, timing=False)
        p = ExperimentPipeline.from_config(cfg)
        assert (p.threads, p.seed, p.timing) == (3, 9, False)

    def test_threads_at_least_one(self):
        assert ExperimentPipeline(threads=0).threads == 1

    def test_results_in_job_order(self):
        jobs = [
            Job("dioph", {"mode": "cf", "alpha": "sqrt(3)", "terms": "4"}),
            Job("count", {"x": "100"}),
        ]
        results = ExperimentPipeline().run(jobs)
        assert [(r.index, r.kind) for r in results] == [(0, "dioph"), (1, "count")]
        assert results[1].rows[0]["observed"] == 25

    def test_single_job_gets_all_workers(self):
        job = Job("count", {"x": "100"})
        with patch("bpsprimes.pipeline.run_job", wraps=run_job) as spy:
            ExperimentPipeline(threads=4).run([job])
        assert spy.call_args[0][4] == 4


# ---------------------------------------------------------------------------
# count jobs
# ---------------------------------------------------------------------------

class TestCountJobs:
    def test_build_query_pads_betas(self):
        q = build_query(Job("count", {"alpha": ["sqrt(2)", "sqrt(3)"], "beta": "3/10", "c": "13/12", "x": "1e3"}))
        assert q.x == 1000
        assert [str(s.beta) for s in q.beatty_specs] == ["3/10", "0"]
        assert str(q.ps_spec.c) == "13/12"

    def test_build_query_extra_beta(self):
        with pytest.raises(SpecParseError):
            build_query(Job("count", {"alpha": "sqrt(2)", "beta": ["0", "1/2"]}))

    def test_series_rows(self):
        job = Job("count", {"alpha": "sqrt(2)", "c": "13/12", "x": "1000,10000"})
        result = run_job(0, job)
        assert [row["x"] for row in result.rows] == [1000, 10000]
        assert result.ok

    def test_timing_off(self):
        result = run_job(0, Job("count", {"x": "1000"}), timing=False)
        assert result.rows[0]["ms"] == 0

    def test_independence_message(self):
        job = Job("count", {"alpha": ["sqrt(2)", "sqrt(3)"], "c": "13/12", "x": "1000"})
        result = run_job(0, job)
        assert any(m.startswith("no relation") for m in result.messages)


# ---------------------------------------------------------------------------
# expsum jobs
# ---------------------------------------------------------------------------

class TestExpsumJobs:
    def test_lambda_trivial_phase(self):
        result = run_job(0, Job("expsum", {"mode": "lambda", "x": "1000"}))
        row = result.rows[0]
        assert float(row["re"]) == pytest.approx(chebyshev_psi(1000), rel=1e-9)
        assert "ratio" not in row

    def test_lambda_with_envelope(self):
        result = run_job(0, Job("expsum", {"mode": "lambda", "phase": "h=1,gamma=12/13", "x": "1e4"}))
        assert "ratio" in result.rows[0]

    def test_vdc_default_orders(self):
        result = run_job(0, Job("expsum", {"mode": "vdc", "a": "1e4"}))
        assert [row["lemma"] for row in result.rows] == ["vdc-2", "vdc-3"]
        assert result.ok

    def test_vdc_monomial_family(self):
        result = run_job(0, Job("expsum", {"mode": "vdc", "coef": "0.5", "exponent": "2", "order": "2", "a": "1000"}))
        assert len(result.rows) == 1
        assert result.ok

    def test_type_sum(self):
        result = run_job(0, Job("expsum", {"mode": "type", "kind": "I", "K": "50", "L": "2000"}))
        assert result.rows[0]["lemma"] == "type-I"

    def test_davenport(self):
        result = run_job(0, Job("expsum", {"mode": "davenport", "N": "1e4"}))
        assert "q=70" in result.rows[0]["params"]

    def test_q_select(self):
        result = run_job(0, Job("expsum", {"mode": "q-select"}))
        row = result.rows[0]
        assert 1.0 <= float(row["Q"]) <= 1000.0
        assert float(row["envelope"]) > 0

    def test_unknown_mode(self):
        with pytest.raises(SpecParseError):
            run_job(0, Job("expsum", {"mode": "exotic"}))


# ---------------------------------------------------------------------------
# dioph jobs
# ---------------------------------------------------------------------------

class TestDiophJobs:
    def test_cf(self):
        result = run_job(0, Job("dioph", {"mode": "cf", "alpha": "sqrt(2)", "terms": "3"}))
        assert result.rows == [{"alpha": "sqrt(2)", "cf": "[1; 2, 2, ...]", "period": "1,1"}]

    def test_cf_rational(self):
        result = run_job(0, Job("dioph", {"mode": "cf", "alpha": "13/12"}))
        assert result.rows[0]["cf"] == "[1; 12]"
        assert result.rows[0]["period"] == ""

    def test_approx(self):
        result = run_job(0, Job("dioph", {"mode": "approx", "alpha": "sqrt(2)", "Qmax": "10"}))
        assert (result.rows[0]["a"], result.rows[0]["q"]) == (7, 5)

    def test_type_rational_note(self):
        result = run_job(0, Job("dioph", {"mode": "type", "alpha": "3/2", "N": "100"}))
        assert "rational/infinite type" in result.messages

    def test_indep(self):
        job = Job("dioph", {"mode": "indep", "omega": ["1/sqrt(2)", "sqrt(2)/2"], "B": "2"})
        result = run_job(0, job)
        assert result.rows[0]["relation"] == "0 1 -1"

    def test_combined(self):
        job = Job("dioph", {"mode": "combined", "omega": ["1/sqrt(2)", "1/sqrt(3)"], "N": "1e4"})
        row = run_job(0, job).rows[0]
        assert row["analytic_tau_bound"] == 2.0
        assert row["truncated"] is False

    def test_unknown_mode(self):
        with pytest.raises(SpecParseError):
            run_job(0, Job("dioph", {"mode": "guess"}))


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

class TestVerifySuites:
    def test_vaaler(self):
        result = run_job(0, Job("verify", {"suite": "vaaler", "H": "1,4,16"}))
        assert len(result.rows) == 3
        assert result.ok

    def test_heath_brown(self):
        result = run_job(0, Job("verify", {"suite": "heath-brown", "nmax": "200", "samples": "5"}))
        assert len(result.rows) == 2
        assert result.ok

    def test_heath_brown_out_of_range_fails(self):
        result = run_job(0, Job("verify", {"suite": "heath-brown", "z": "2", "k": "2", "nmax": "20"}))
        assert not result.ok
        assert result.messages

    def test_heath_brown_default_sample_at_z30(self):
        result = run_job(0, Job("verify", {"suite": "heath-brown", "nmax": "50"}), seed=1)
        assert [row["case"] for row in result.rows] == [
            "n<=50,z=10,k=3",
            f"{HB_SAMPLES} random n<=54000,z=30,k=3",
        ]
        assert result.ok

    def test_heath_brown_explicit_params_sample_in_range(self):
        result = run_job(0, Job("verify", {"suite": "heath-brown", "z": "5", "k": "2", "nmax": "50", "samples": "10"}))
        assert result.rows[1]["case"] == "10 random n<=50,z=5,k=2"
        assert result.ok

    def test_psi_default_sample_count(self):
        with patch("bpsprimes.sequences.char_psi_identity_residual", return_value=0.0) as residual:
            result = run_job(0, Job("verify", {"suite": "psi"}))
        assert residual.call_count == 3 * PSI_SAMPLES == 300_000
        assert result.ok

    def test_decomposition_default_limits(self):
        audit = SimpleNamespace(total=10.0, identity_count=10, ok=True)
        with patch("bpsprimes.counting.decomposition_audit", return_value=audit) as run:
            result = run_job(0, Job("verify", {"suite": "decomposition"}))
        assert [call.args[0].x for call in run.call_args_list] == [10 ** 4, 10 ** 5, 10 ** 6]
        assert result.ok

    def test_psi(self):
        result = run_job(0, Job("verify", {"suite": "psi", "samples": "20", "mmax": "1e6"}), seed=3)
        assert [row["suite"] for row in result.rows] == ["psi"] * 3
        assert result.ok

    def test_decomposition(self):
        result = run_job(0, Job("verify", {"suite": "decomposition", "x": "1000"}))
        assert result.ok

    def test_two_path(self):
        result = run_job(0, Job("verify", {"suite": "two-path", "x": "1e3,1e4"}))
        assert len(result.rows) == 2
        assert result.ok

    def test_two_path_mismatch(self):
        with patch("bpsprimes.counting._sieve_range", return_value=0):
            result = run_job(0, Job("verify", {"suite": "two-path", "x": "1e4"}))
        assert not result.ok

    def test_unknown_suite(self):
        with pytest.raises(SpecParseError):
            run_job(0, Job("verify", {"suite": "everything"}))


def test_job_result_defaults():
    res = JobResult(2, "count")
    assert res.rows == [] and res.ok and res.messages == []
