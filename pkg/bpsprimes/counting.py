"""
counting.py – Prime counts in Beatty ∩ Piatetski-Shapiro intersections.

Two independent paths produce every count:

* ``enumerate-ps`` / ``enumerate-beatty`` walk the sequence terms, filter
  them through the other characteristic functions and test primality;
* ``sieve-filter`` sieves all primes and filters them.

Their exact agreement is the main correctness oracle.  Counts are
range-partitioned and reduced in partition order, so results do not
depend on the worker count.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from bpsprimes.arith import MAX_RANGE, is_prime_array, iter_prime_blocks, sieve_segment
from bpsprimes.errors import IdentityCheckError, PreconditionError, ResourceLimitError
from bpsprimes.exactnum import QuadraticSurd
from bpsprimes.pipeline import map_ordered
from bpsprimes.sequences import (
    BeattySpec,
    PSSpec,
    beatty_chars,
    beatty_floor_pair,
    beatty_index_range,
    beatty_values_block,
    ps_ceil_pair,
    ps_chars,
    ps_index_range,
    ps_values_block,
)

logger = logging.getLogger(__name__)

MAX_XI = 8
ENUM_LIMIT = 10 ** 12
SIEVE_LIMIT = 10 ** 9
AUDIT_LIMIT = 10 ** 7
TRANSFER_LIMIT = 10 ** 6
ENUM_BLOCK = 2 ** 20
MIN_PARTITION = 2 ** 16
AUDIT_TOL = 1e-6
TRANSFER_BOUND = 3.0
INDEPENDENCE_B = 10
INDEPENDENCE_CANDIDATES = 10 ** 6

METHODS = ("auto", "enumerate-ps", "enumerate-beatty", "sieve-filter", "both")
CSV_COLUMNS = (
    "x", "xi", "alphas", "betas", "c", "observed", "predicted",
    "predicted_li", "rel_err", "method", "ms",
)


@dataclass(frozen=True)
class CountQuery:
    """Count primes ``p <= x`` in every Beatty sequence and (optionally) N^(c)."""

    beatty_specs: tuple[BeattySpec, ...] = ()
    ps_spec: Optional[PSSpec] = None
    x: int = 100

    def __post_init__(self) -> None:
        object.__setattr__(self, "beatty_specs", tuple(self.beatty_specs))
        if self.x < 2:
            raise PreconditionError(f"count limit must be >= 2, got x={self.x}")
        if self.xi > MAX_XI:
            raise PreconditionError(f"at most {MAX_XI} Beatty sequences supported, got {self.xi}")

    @property
    def xi(self) -> int:
        return len(self.beatty_specs)

    @property
    def alpha_product(self) -> QuadraticSurd:
        prod = QuadraticSurd(1)
        for spec in self.beatty_specs:
            prod = prod * spec.alpha
        return prod

    def alpha_product_float(self) -> float:
        # mixed fields leave the quadratic field, so multiply the floats
        return math.prod(float(spec.alpha) for spec in self.beatty_specs)

    def with_x(self, x: int) -> "CountQuery":
        return CountQuery(self.beatty_specs, self.ps_spec, x)


@dataclass
class CountReport:
    """Observed count next to the predicted main term."""

    x: int
    xi: int
    alphas: str
    betas: str
    c: str
    observed: int
    predicted: float
    predicted_li: float
    relative_error: float
    runtime_ms: int
    method: str
    independence: Optional[str] = None

    def to_row(self, timing: bool = True) -> dict:
        return {
            "x": self.x,
            "xi": self.xi,
            "alphas": self.alphas,
            "betas": self.betas,
            "c": self.c,
            "observed": self.observed,
            "predicted": f"{self.predicted:.10g}",
            "predicted_li": f"{self.predicted_li:.10g}",
            "rel_err": f"{self.relative_error:.6g}",
            "method": self.method,
            "ms": self.runtime_ms if timing else 0,
        }

    def to_dict(self) -> dict:
        out = {
            "x": self.x,
            "xi": self.xi,
            "alphas": self.alphas,
            "betas": self.betas,
            "c": self.c,
            "observed": self.observed,
            "predicted": self.predicted,
            "predicted_li": self.predicted_li,
            "relative_error": self.relative_error,
            "runtime_ms": self.runtime_ms,
            "method": self.method,
        }
        if self.independence is not None:
            out["independence"] = self.independence
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CountReport":
        """Accept both :meth:`to_dict` output and CSV rows (string values)."""
        return cls(
            x=int(data["x"]),
            xi=int(data["xi"]),
            alphas=data.get("alphas") or "",
            betas=data.get("betas") or "",
            c=data.get("c") or "",
            observed=int(data["observed"]),
            predicted=float(data["predicted"]),
            predicted_li=float(data["predicted_li"]),
            relative_error=float(data.get("relative_error", data.get("rel_err"))),
            runtime_ms=int(data.get("runtime_ms", data.get("ms", 0))),
            method=data["method"],
            independence=data.get("independence"),
        )


# ---------------------------------------------------------------------------
# Predictions
# ---------------------------------------------------------------------------

def predicted_main_term(q: CountQuery, x: Optional[int] = None) -> float:
    """x^γ / (α_1⋯α_ξ log x), or x / (α_1⋯α_ξ log x) without a PS spec."""
    x = q.x if x is None else x
    top = x ** float(q.ps_spec.gamma) if q.ps_spec else float(x)
    return top / (q.alpha_product_float() * math.log(x))


def predicted_li_term(q: CountQuery, x: Optional[int] = None) -> float:
    """(1/(α_1⋯α_ξ)) ∫_2^x γ t^{γ−1} / log t dt, or Li(x)/(α_1⋯α_ξ) without PS.

    With ``u = t^γ`` the integral becomes ``γ (li(x^γ) − li(2^γ))``.
    """
    x = q.x if x is None else x
    if q.ps_spec:
        g = mpmath.mpf(q.ps_spec.gamma.num) / q.ps_spec.gamma.den
        value = g * (mpmath.li(mpmath.power(x, g)) - mpmath.li(mpmath.power(2, g)))
    else:
        value = mpmath.li(x, offset=True)
    return float(value) / q.alpha_product_float()


# ---------------------------------------------------------------------------
# Partition workers
# ---------------------------------------------------------------------------

def _filter_beatty(values: np.ndarray, specs: Sequence[BeattySpec]) -> np.ndarray:
    for spec in specs:
        if not values.size:
            break
        values = values[beatty_chars(spec, values).astype(bool)]
    return values


def _enumerate_range(q: CountQuery, lo: int, hi: int, driver: str) -> int:
    """Count by walking the driving sequence's terms in ``[lo, hi)``."""
    total = 0
    if driver == "ps":
        n_lo, n_hi = ps_index_range(q.ps_spec, lo, hi)
        block, rest = (lambda a, b: ps_values_block(q.ps_spec, a, b)), q.beatty_specs
    elif driver == "beatty":
        head, *rest = q.beatty_specs
        n_lo, n_hi = beatty_index_range(head, lo, hi)
        block = lambda a, b: beatty_values_block(head, a, b)  # noqa: E731
    else:
        n_lo, n_hi, rest = lo, hi, ()
        block = lambda a, b: np.arange(a, b, dtype=np.int64)  # noqa: E731
    for a in range(n_lo, n_hi, ENUM_BLOCK):
        values = block(a, min(a + ENUM_BLOCK, n_hi))
        values = _filter_beatty(values, rest)
        if driver != "ps" and q.ps_spec is not None and values.size:
            values = values[ps_chars(q.ps_spec, values).astype(bool)]
        total += int(is_prime_array(values).sum())
    return total


def _sieve_range(q: CountQuery, lo: int, hi: int) -> int:
    total = 0
    for primes in iter_prime_blocks(lo, hi):
        if q.ps_spec is not None and primes.size:
            primes = primes[ps_chars(q.ps_spec, primes).astype(bool)]
        total += int(_filter_beatty(primes, q.beatty_specs).size)
    return total


def _count_range(q: CountQuery, lo: int, hi: int, method: str) -> tuple[int, float]:
    """Count for ``[lo, hi)``; returns ``(count, elapsed_ms)``."""
    start = time.perf_counter()
    if method == "sieve-filter":
        count = _sieve_range(q, lo, hi)
    elif method == "enumerate-ps":
        count = _enumerate_range(q, lo, hi, "ps")
    elif method == "enumerate-beatty":
        count = _enumerate_range(q, lo, hi, "beatty")
    else:
        count = _enumerate_range(q, lo, hi, "all")
    elapsed = (time.perf_counter() - start) * 1000.0
    logger.debug("counted [%d, %d) by %s: %d", lo, hi, method, count)
    return count, elapsed


def _partition(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    size = max(MIN_PARTITION, -(-(hi - lo) // max(parts, 1)))
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def _resolve_method(q: CountQuery, method: str) -> str:
    if method not in METHODS:
        raise PreconditionError(f"unknown count method {method!r}; choose from {', '.join(METHODS)}")
    if method == "auto":
        return "enumerate-ps" if q.ps_spec is not None else "sieve-filter"
    if method == "enumerate-ps" and q.ps_spec is None:
        return "enumerate-beatty" if q.beatty_specs else "enumerate-integers"
    if method == "enumerate-beatty" and not q.beatty_specs:
        raise PreconditionError("enumerate-beatty needs at least one Beatty spec")
    return method


def _check_limit(x: int, method: str) -> None:
    if x >= MAX_RANGE:
        raise ResourceLimitError(f"x={x} is beyond 2^63")
    limit = SIEVE_LIMIT if method in ("sieve-filter", "both") else ENUM_LIMIT
    if x > limit:
        raise ResourceLimitError(f"x={x} exceeds the {method} limit {limit:.0e}")


def _enumeration_method(q: CountQuery) -> str:
    return _resolve_method(q, "enumerate-ps")


def _counts_over(
    q: CountQuery,
    bounds: Sequence[int],
    method: str,
    threads: int,
) -> list[tuple[int, float]]:
    """Counts for ``[2, b_0 + 1), [b_0 + 1, b_1 + 1), ...`` (each possibly split further)."""
    pieces: list[tuple[int, int, int]] = []
    prev = 2
    for i, b in enumerate(bounds):
        for lo, hi in _partition(prev, b + 1, threads * 4 if threads > 1 else 1):
            pieces.append((i, lo, hi))
        prev = b + 1
    results = map_ordered(_count_range, [(q, lo, hi, method) for _, lo, hi in pieces], threads)
    out = [(0, 0.0)] * len(bounds)
    for (i, _, _), (count, ms) in zip(pieces, results):
        c, t = out[i]
        out[i] = (c + count, t + ms)
    return out


def _independence_note(q: CountQuery) -> Optional[str]:
    if q.xi < 2 or (2 * INDEPENDENCE_B + 1) ** q.xi > INDEPENDENCE_CANDIDATES:
        return None
    from bpsprimes.diophantine import independence_probe  # noqa: PLC0415

    omegas = [spec.omega for spec in q.beatty_specs]
    return independence_probe(omegas, INDEPENDENCE_B).summary()


def _label(q: CountQuery) -> dict:
    return {
        "xi": q.xi,
        "alphas": ";".join(str(s.alpha) for s in q.beatty_specs),
        "betas": ";".join(str(s.beta) for s in q.beatty_specs),
        "c": str(q.ps_spec.c) if q.ps_spec else "",
    }


def _make_report(q: CountQuery, x: int, observed: int, ms: float, method: str) -> CountReport:
    predicted = predicted_main_term(q, x)
    return CountReport(
        x=x,
        observed=observed,
        predicted=predicted,
        predicted_li=predicted_li_term(q, x),
        relative_error=abs(observed - predicted) / predicted if predicted > 0 else math.inf,
        runtime_ms=int(round(ms)),
        method=method,
        **_label(q),
    )


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def count_series(
    q: CountQuery,
    xs: Sequence[int],
    method: str = "auto",
    threads: int = 1,
) -> list[CountReport]:
    """Reports at every limit in *xs* from a single pass up to ``max(xs)``.

    ``method="both"`` runs the enumeration and sieve paths and raises
    :class:`IdentityCheckError` if any cumulative count differs.
    """
    xs = sorted(set(int(v) for v in xs))
    if not xs or xs[0] < 2:
        raise PreconditionError("count limits must all be >= 2")
    method = _resolve_method(q, method)
    _check_limit(xs[-1], method)

    if method == "both":
        first = _counts_over(q, xs, _enumeration_method(q), threads)
        second = _counts_over(q, xs, "sieve-filter", threads)
        if [c for c, _ in first] != [c for c, _ in second]:
            raise IdentityCheckError(
                f"enumeration and sieve counts differ: {[c for c, _ in first]} != {[c for c, _ in second]}"
            )
        pieces = [(c, t1 + t2) for (c, t1), (_, t2) in zip(first, second)]
    else:
        pieces = _counts_over(q, xs, method, threads)

    reports = []
    observed, elapsed = 0, 0.0
    note = _independence_note(q)
    for x, (count, ms) in zip(xs, pieces):
        observed += count
        elapsed += ms
        report = _make_report(q, x, observed, elapsed, method)
        report.independence = note
        reports.append(report)
    return reports


def count_intersection_primes(q: CountQuery, method: str = "auto", threads: int = 1) -> CountReport:
    """#{p <= x prime : every beatty_char(p) = 1 and ps_char(p) = 1 if a PS spec is set}.

    The prediction is ``x^γ/(α_1⋯α_ξ log x)`` (``x/(α_1⋯α_ξ log x)``
    without a PS spec; ``x/log x`` with no spec at all).
    """
    report = count_series(q, [q.x], method, threads)[0]
    logger.info("x=%d observed=%d predicted=%.1f rel_err=%.4f", q.x, report.observed, report.predicted, report.relative_error)
    return report


def count_ps_primes(ps: PSSpec, x: int, method: str = "enumerate-ps", threads: int = 1) -> CountReport:
    """π^{(c)}(x), the number of primes ``p <= x`` in N^(c), against x^γ/log x."""
    return count_intersection_primes(CountQuery((), ps, x), method, threads)


def trend_ok(errors: Sequence[float], allowed_inversions: int = 1) -> bool:
    """True iff *errors* is non-increasing apart from at most *allowed_inversions* rises."""
    rises = sum(1 for a, b in zip(errors, errors[1:]) if b > a)
    return rises <= allowed_inversions


# ---------------------------------------------------------------------------
# Decomposition audit
# ---------------------------------------------------------------------------

@dataclass
class AuditResult:
    """Sums of the sawtooth decomposition of the intersection count.

    ``identity_count`` is Σ over primes of the product of the raw
    floor-difference characteristic functions, which is what the sums
    add up to. ``ok`` compares ``total`` with ``identity_count``, not with
    ``observed``: with some β ≥ 1 the raw formula also counts the Beatty
    indices n ≤ 0 that ``beatty_char`` excludes, so the two counts can
    differ. They are equal whenever every β < 1.
    """

    x: int
    labels: tuple[str, ...]
    sums: tuple[float, ...]
    total: float
    identity_count: int
    observed: int
    ok: bool

    def values(self) -> list[float]:
        return list(self.sums) + [self.total]

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            **{label: value for label, value in zip(self.labels, self.sums)},
            "total": self.total,
            "identity_count": self.identity_count,
            "observed": self.observed,
            "ok": self.ok,
        }


def _psi_parts(p: np.ndarray, spec: BeattySpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(B(p), raw X(p), exact char(p))`` for one Beatty spec."""
    fl_low, fl_high = beatty_floor_pair(spec, p)
    omega = np.longdouble(float(spec.omega))
    beta = np.longdouble(float(spec.beta))
    pl = p.astype(np.longdouble)
    t_low = -omega * (pl - beta)
    t_high = -omega * (pl + 1 - beta)
    # ψ(t) = t − ⌊t⌋ − 1/2 with the floors taken exactly
    b = (t_high - fl_high) - (t_low - fl_low)
    raw = fl_low - fl_high
    return b, raw, beatty_chars(spec, p).astype(np.int64)


def decomposition_audit(q: CountQuery) -> AuditResult:
    """Split the count into the sums of its sawtooth expansion.

    With Δ(p) = (p+1)^γ − p^γ, P(p) = ψ(−(p+1)^γ) − ψ(−p^γ) and
    B_i(p) = ψ(−ω_i(p+1−β_i)) − ψ(−ω_i(p−β_i)):

    * ξ = 1: S1 = ω ΣX^{(c)}, S2 = ΣΔB, S3 = ΣPB;
    * ξ = 2: S1 = ω1ω2 ΣX^{(c)}, S2 = ω1 ΣΔB2, S3 = ω2 ΣΔB1, S4 = ΣΔB1B2,
      S5 = ω1 ΣPB2, S6 = ω2 ΣPB1, S7 = ΣPB1B2;
    * otherwise: main = ω1⋯ωξ ΣX^{(c)} and the remainder.

    All sums run over every prime ``p <= x``.
    """
    if q.ps_spec is None:
        raise PreconditionError("decomposition_audit needs a Piatetski-Shapiro spec")
    if q.x > AUDIT_LIMIT:
        raise ResourceLimitError(f"decomposition audit is limited to x <= {AUDIT_LIMIT}, got {q.x}")
    xi = q.xi
    if xi == 1:
        labels = ("S1", "S2", "S3")
    elif xi == 2:
        labels = tuple(f"S{i}" for i in range(1, 8))
    else:
        labels = ("main", "remainder")
    omegas = [np.longdouble(float(s.omega)) for s in q.beatty_specs]
    omega_prod = np.prod(omegas) if omegas else np.longdouble(1)
    gamma = np.longdouble(q.ps_spec.gamma.num) / np.longdouble(q.ps_spec.gamma.den)

    sums = np.zeros(len(labels), dtype=np.longdouble)
    identity_count = 0
    observed = 0
    for p in iter_prime_blocks(2, q.x + 1):
        if not p.size:
            continue
        lo_ceil, hi_ceil = ps_ceil_pair(q.ps_spec, p)
        pl = p.astype(np.longdouble)
        delta = np.power(pl + 1, gamma) - np.power(pl, gamma)
        xc = (hi_ceil - lo_ceil).astype(np.longdouble)
        pp = xc - delta
        parts = [_psi_parts(p, s) for s in q.beatty_specs]
        raw = np.prod([r for _, r, _ in parts], axis=0) if parts else np.ones(p.size, dtype=np.int64)
        exact = np.prod([c for _, _, c in parts], axis=0) if parts else np.ones(p.size, dtype=np.int64)
        identity_count += int(np.sum(raw * (hi_ceil - lo_ceil)))
        observed += int(np.sum(exact * (hi_ceil - lo_ceil)))

        if xi == 1:
            (b1, _, _), = parts
            block = [omegas[0] * xc, delta * b1, pp * b1]
        elif xi == 2:
            (b1, _, _), (b2, _, _) = parts
            w1, w2 = omegas
            block = [
                w1 * w2 * xc,
                w1 * delta * b2,
                w2 * delta * b1,
                delta * b1 * b2,
                w1 * pp * b2,
                w2 * pp * b1,
                pp * b1 * b2,
            ]
        else:
            expanded = np.ones(p.size, dtype=np.longdouble)
            for w, (b, _, _) in zip(omegas, parts):
                expanded = expanded * (w + b)
            block = [omega_prod * xc, xc * (expanded - omega_prod)]
        sums += np.array([np.sum(v) for v in block], dtype=np.longdouble)

    total = float(np.sum(sums))
    ok = abs(total - identity_count) <= AUDIT_TOL * max(1, identity_count)
    if not ok:
        logger.warning("decomposition audit mismatch at x=%d: %.9f vs %d", q.x, total, identity_count)
    return AuditResult(q.x, labels, tuple(float(s) for s in sums), total, identity_count, observed, ok)


# ---------------------------------------------------------------------------
# Prime sums from Λ-weighted sums
# ---------------------------------------------------------------------------

@dataclass
class TransferReport:
    """|Σ_{N<p≤N'} g(p)| against (1/log N) max_v |Σ_{N<n≤v} Λ(n)g(n)| + N^{1/2}."""

    N: int
    N_end: int
    lhs: float
    lambda_max: float
    rhs_shape: float
    ratio: float
    ok: bool
    notes: list = field(default_factory=list)

    def to_row(self) -> dict:
        return {
            "lemma": "prime-to-lambda",
            "params": f"N={self.N};N_end={self.N_end}",
            "direct_value": f"{self.lhs:.12g}",
            "envelope": f"{self.rhs_shape:.12g}",
            "ratio": f"{self.ratio:.6g}",
        }


def additive_character(theta) -> Callable[[np.ndarray], np.ndarray]:
    """``g(n) = e(theta * n)`` evaluated in extended precision."""
    from bpsprimes.expsum import PhaseSpec  # noqa: PLC0415

    phase = PhaseSpec(m1=theta)
    return lambda n: np.exp(2j * np.pi * phase.frac_values(np.asarray(n, dtype=np.int64)).astype(np.float64))


def prime_to_lambda_transfer_check(
    g: Callable[[np.ndarray], np.ndarray],
    N: int,
    N_end: Optional[int] = None,
) -> TransferReport:
    """Compare a prime sum with the Λ-weighted partial sums that control it.

    *g* takes an int64 array and returns values with ``|g| <= 1``.
    ``N_end`` defaults to ``2N``.
    """
    N_end = 2 * N if N_end is None else N_end
    if not 2 <= N <= TRANSFER_LIMIT or N_end < N or N_end > 2 * TRANSFER_LIMIT:
        raise PreconditionError(f"need 2 <= N <= {TRANSFER_LIMIT} and N <= N_end <= {2 * TRANSFER_LIMIT}")
    rhs_floor = math.sqrt(N)
    if N_end == N:
        return TransferReport(N, N_end, 0.0, 0.0, rhs_floor, 0.0, True, ["empty range"])

    tables = sieve_segment(N + 1, N_end + 1)
    n = np.arange(N + 1, N_end + 1, dtype=np.int64)
    values = np.asarray(g(n), dtype=np.complex128)
    if np.max(np.abs(values)) > 1 + 1e-12:
        raise PreconditionError("g must satisfy |g| <= 1")
    lhs = float(abs(np.sum(values[tables.is_prime])))
    weighted = tables.lambda_values().astype(np.float64) * values
    lambda_max = float(np.max(np.abs(np.cumsum(weighted))))
    rhs = lambda_max / math.log(N) + rhs_floor
    ratio = lhs / rhs
    return TransferReport(N, N_end, lhs, lambda_max, rhs, ratio, ratio <= TRANSFER_BOUND)
