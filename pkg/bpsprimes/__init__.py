"""
bpsprimes – primes in intersections of Beatty and Piatetski-Shapiro sequences.

Package exports:
    QuadraticSurd, parse_surd     – exact numbers of the form (p + q*sqrt(d)) / r
    BeattySpec, PSSpec            – sequence descriptions with exact membership tests
    CountQuery, CountReport       – prime counts against the predicted density
    count_intersection_primes     – count one query
    decomposition_audit           – split the prime count into its bounded sums
    cf_expand, best_approx        – continued fractions of surds and rationals
    ExperimentConfig, Job         – batch job files
    ExperimentPipeline            – run jobs, optionally in a process pool
"""

from bpsprimes.exactnum import QuadraticSurd, parse_surd
from bpsprimes.sequences import BeattySpec, PSSpec
from bpsprimes.counting import CountQuery, CountReport, count_intersection_primes, decomposition_audit
from bpsprimes.diophantine import best_approx, cf_expand
from bpsprimes.config import ExperimentConfig, Job
from bpsprimes.pipeline import ExperimentPipeline

__all__ = [
    "QuadraticSurd",
    "parse_surd",
    "BeattySpec",
    "PSSpec",
    "CountQuery",
    "CountReport",
    "count_intersection_primes",
    "decomposition_audit",
    "cf_expand",
    "best_approx",
    "ExperimentConfig",
    "Job",
    "ExperimentPipeline",
]
__version__ = "0.1.0"
