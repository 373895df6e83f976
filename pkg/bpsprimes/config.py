"""
config.py – Experiment configuration and job descriptors.

A configuration is a list of jobs plus output settings.  It is read from
either a JSON document or a flat ``key = value`` file::

    output = counts.csv
    format = csv
    threads = 4
    seed = 7
    job = count alpha=sqrt(2) beta=3/10 alpha=sqrt(3) beta=7/10 c=13/12 x=1e6
    job = dioph mode=cf alpha=sqrt(2) terms=10

Repeated keys inside a job line collect into a list.  Both formats
round-trip: ``from_json(cfg.to_json()) == cfg`` and the same for
``key = value`` text.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from bpsprimes.errors import SpecParseError

logger = logging.getLogger(__name__)

JOB_KINDS = ("count", "expsum", "dioph", "verify")
FORMATS = ("csv", "json")
THREADS_ENV = "BPS_THREADS"

ParamValue = Union[str, list]


@dataclass(frozen=True)
class Job:
    """One unit of work: a subcommand name and its string parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in JOB_KINDS:
            raise SpecParseError(f"unknown job kind {self.kind!r}", token=self.kind)
        clean: dict = {}
        for key, value in self.params.items():
            if isinstance(value, (list, tuple)):
                clean[str(key)] = [str(v) for v in value]
            else:
                clean[str(key)] = str(value)
        object.__setattr__(self, "params", clean)

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        value = self.params.get(key, default)
        if isinstance(value, list):
            return value[-1] if value else default
        return value

    def get_list(self, key: str) -> list[str]:
        value = self.params.get(key)
        if value is None:
            return []
        return list(value) if isinstance(value, list) else [value]

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, data: dict) -> "Job":
        if "kind" not in data:
            raise SpecParseError(f"job entry without 'kind': {data!r}")
        params = {k: v for k, v in data.items() if k != "kind"}
        return cls(data["kind"], params)

    def to_line(self) -> str:
        parts = [self.kind]
        for key, value in self.params.items():
            for v in value if isinstance(value, list) else [value]:
                parts.append(f"{key}={v}")
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Job":
        kind, *items = line.split()
        params: dict = {}
        for item in items:
            key, sep, value = item.partition("=")
            if not sep or not key:
                raise SpecParseError(f"bad job parameter {item!r}", token=item)
            if key in params:
                prev = params[key]
                params[key] = (prev if isinstance(prev, list) else [prev]) + [value]
            else:
                params[key] = value
        return cls(kind, params)


@dataclass
class ExperimentConfig:
    """Jobs plus output path/format, worker count and sampling seed.

    Parameters
    ----------
    jobs:
        Job descriptors, executed in order.
    output:
        Output path, ``"-"`` for stdout.
    format:
        ``"csv"`` or ``"json"``.
    threads:
        Worker processes for job-level parallelism.
    seed:
        Seed for every randomised sampling grid.
    timing:
        When false the ``ms`` column is written as 0 so outputs compare
        byte for byte.
    """

    DEFAULT_OUTPUT = "-"
    DEFAULT_FORMAT = "csv"

    jobs: list = field(default_factory=list)
    output: str = DEFAULT_OUTPUT
    format: str = DEFAULT_FORMAT
    threads: int = 1
    seed: int = 0
    timing: bool = True

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise SpecParseError(f"unknown output format {self.format!r}", token=self.format)
        if self.threads < 1:
            raise SpecParseError(f"threads must be >= 1, got {self.threads}", token=str(self.threads))

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------

    def to_json(self) -> str:
        data = {
            "jobs": [job.to_dict() for job in self.jobs],
            "output": self.output,
            "format": self.format,
            "threads": self.threads,
            "seed": self.seed,
            "timing": self.timing,
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"invalid JSON config: {exc}") from exc
        if isinstance(data, list):
            data = {"jobs": data}
        if not isinstance(data, dict):
            raise SpecParseError("config must be a JSON object or a job list")
        unknown = set(data) - {"jobs", "output", "format", "threads", "seed", "timing"}
        if unknown:
            raise SpecParseError(f"unknown config keys: {sorted(unknown)}", token=sorted(unknown)[0])
        return cls(
            jobs=[Job.from_dict(j) for j in data.get("jobs", [])],
            output=data.get("output", cls.DEFAULT_OUTPUT),
            format=data.get("format", cls.DEFAULT_FORMAT),
            threads=int(data.get("threads", 1)),
            seed=int(data.get("seed", 0)),
            timing=bool(data.get("timing", True)),
        )

    # ------------------------------------------------------------------
    # key = value
    # ------------------------------------------------------------------

    def to_keyvalue(self) -> str:
        lines = [
            f"output = {self.output}",
            f"format = {self.format}",
            f"threads = {self.threads}",
            f"seed = {self.seed}",
            f"timing = {'true' if self.timing else 'false'}",
        ]
        lines += [f"job = {job.to_line()}" for job in self.jobs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_keyvalue(cls, text: str) -> "ExperimentConfig":
        values: dict = {}
        jobs: list[Job] = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise SpecParseError(f"line {lineno}: expected key = value, got {raw!r}", token=raw.strip())
            if key == "job":
                jobs.append(Job.from_line(value))
            elif key in ("output", "format"):
                values[key] = value
            elif key in ("threads", "seed"):
                try:
                    values[key] = int(value)
                except ValueError as exc:
                    raise SpecParseError(f"line {lineno}: {key} must be an integer", token=value) from exc
            elif key == "timing":
                values[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                raise SpecParseError(f"line {lineno}: unknown key {key!r}", token=key)
        return cls(jobs=jobs, **values)

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "ExperimentConfig":
        """Read a JSON (``.json`` or leading ``{``/``[``) or ``key = value`` file."""
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json" or text.lstrip()[:1] in ("{", "["):
            return cls.from_json(text)
        return cls.from_keyvalue(text)


def resolve_threads(cli_value: Optional[int] = None) -> int:
    """Worker count: ``BPS_THREADS`` wins over the command line, default 1."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise SpecParseError(f"{THREADS_ENV} must be an integer, got {env!r}", token=env) from exc
        logger.debug("%s=%d overrides --threads=%s", THREADS_ENV, value, cli_value)
        return max(1, value)
    return max(1, cli_value or 1)
