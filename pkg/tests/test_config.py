"""
Tests for bpsprimes.config – job descriptors, config formats and the
worker-count override.
"""

import json

import pytest

from bpsprimes.config import THREADS_ENV, ExperimentConfig, Job, resolve_threads
from bpsprimes.errors import SpecParseError


def _sample_config() -> ExperimentConfig:
    return ExperimentConfig(
        jobs=[
            Job("count", {"alpha": ["sqrt(2)", "sqrt(3)"], "beta": ["3/10", "7/10"], "c": "13/12", "x": "1e6"}),
            Job("dioph", {"mode": "cf", "alpha": "sqrt(2)", "terms": 10}),
        ],
        output="counts.csv",
        threads=4,
        seed=7,
        timing=False,
    )


# ---------------------------------------------------------------------------
# Job
# ---------------------------------------------------------------------------

class TestJob:
    def test_params_become_strings(self):
        job = Job("dioph", {"terms": 10, "omega": (1, 2)})
        assert job.params == {"terms": "10", "omega": ["1", "2"]}

    def test_unknown_kind(self):
        with pytest.raises(SpecParseError):
            Job("render")

    def test_get_returns_last_of_list(self):
        job = Job("count", {"alpha": ["sqrt(2)", "sqrt(3)"]})
        assert job.get("alpha") == "sqrt(3)"
        assert job.get("c", "13/12") == "13/12"
        assert job.get_list("alpha") == ["sqrt(2)", "sqrt(3)"]
        assert job.get_list("beta") == []

    def test_from_line_collects_repeats(self):
        job = Job.from_line("count alpha=sqrt(2) alpha=sqrt(3) c=13/12")
        assert job.kind == "count"
        assert job.params == {"alpha": ["sqrt(2)", "sqrt(3)"], "c": "13/12"}

    def test_line_round_trip(self):
        job = Job("count", {"alpha": ["sqrt(2)", "sqrt(3)"], "x": "100"})
        assert Job.from_line(job.to_line()) == job

    def test_bad_line_item(self):
        with pytest.raises(SpecParseError) as excinfo:
            Job.from_line("count x")
        assert excinfo.value.token == "x"

    def test_from_dict_needs_kind(self):
        with pytest.raises(SpecParseError):
            Job.from_dict({"x": "100"})


# ---------------------------------------------------------------------------
# ExperimentConfig
# ---------------------------------------------------------------------------

class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.output == "-"
        assert cfg.format == "csv"
        assert cfg.threads == 1

    def test_json_round_trip(self):
        cfg = _sample_config()
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg

    def test_keyvalue_round_trip(self):
        cfg = _sample_config()
        assert ExperimentConfig.from_keyvalue(cfg.to_keyvalue()) == cfg

    def test_json_job_list(self):
        cfg = ExperimentConfig.from_json(json.dumps([{"kind": "verify", "suite": "vaaler"}]))
        assert cfg.jobs == [Job("verify", {"suite": "vaaler"})]

    def test_keyvalue_comments_and_blank_lines(self):
        text = "# experiment\n\nthreads = 2  # workers\njob = count x=100\n"
        cfg = ExperimentConfig.from_keyvalue(text)
        assert cfg.threads == 2
        assert cfg.jobs == [Job("count", {"x": "100"})]

    def test_unknown_keys(self):
        with pytest.raises(SpecParseError):
            ExperimentConfig.from_json('{"workers": 2}')
        with pytest.raises(SpecParseError):
            ExperimentConfig.from_keyvalue("workers = 2\n")

    def test_bad_values(self):
        with pytest.raises(SpecParseError):
            ExperimentConfig(format="xml")
        with pytest.raises(SpecParseError):
            ExperimentConfig(threads=0)
        with pytest.raises(SpecParseError):
            ExperimentConfig.from_keyvalue("threads = many\n")
        with pytest.raises(SpecParseError):
            ExperimentConfig.from_json("{not json")

    def test_load_detects_format(self, tmp_path):
        cfg = _sample_config()
        json_path = tmp_path / "exp.json"
        json_path.write_text(cfg.to_json())
        kv_path = tmp_path / "exp.cfg"
        kv_path.write_text(cfg.to_keyvalue())
        assert ExperimentConfig.load(json_path) == cfg
        assert ExperimentConfig.load(kv_path) == cfg

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ExperimentConfig.load(tmp_path / "missing.cfg")


# ---------------------------------------------------------------------------
# Worker count
# ---------------------------------------------------------------------------

class TestResolveThreads:
    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_threads() == 1
        assert resolve_threads(3) == 3

    def test_environment_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "5")
        assert resolve_threads(3) == 5

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "lots")
        with pytest.raises(SpecParseError):
            resolve_threads()
