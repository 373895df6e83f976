"""
diophantine.py – Continued fractions, rational approximation and type estimates.

Quadratic surds are expanded exactly through the ``(P + sqrt(D)) / Q``
recurrence, which also exposes the periodic tail.  Irrationality types
cannot be computed, only observed: :func:`estimate_type` reports
``E(N, t) = min_{n<=N} n^t ||alpha n||`` and whether it is shrinking.
Linear independence over Q is only ever certified up to a coefficient
bound.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import mpmath
import numpy as np

from bpsprimes.errors import IncompatibleFieldError, PreconditionError, ResourceLimitError
from bpsprimes.exactnum import DEFAULT_PREC, QuadraticSurd

logger = logging.getLogger(__name__)

TYPE_SEARCH_LIMIT = 10 ** 7
PROBE_MAX_OMEGAS = 8
PROBE_MAX_B = 10 ** 3
PROBE_CANDIDATE_LIMIT = 10 ** 8
MAX_PERIOD_SEARCH = 10 ** 5
INDEPENDENCE_CAVEAT = (
    "linear independence is certified only up to the coefficient bound; "
    "the hypothesis is consistent with, not proven by, this search"
)

Number = Union[int, Fraction, QuadraticSurd]


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    """``[a0; a1, a2, ...]`` with an optional periodic tail ``(start, length)``.

    For a rational number the quotient list is complete and ``terminating``
    is set.  For a quadratic irrational with a detected period, quotient
    ``k >= start`` equals ``quotients[start + (k - start) % length]``.
    """

    partial_quotients: tuple[int, ...]
    periodic_tail: Optional[tuple[int, int]] = None
    terminating: bool = False

    def quotient(self, k: int) -> int:
        if k < len(self.partial_quotients):
            return self.partial_quotients[k]
        if self.periodic_tail is None:
            raise IndexError(f"quotient {k} not available")
        start, length = self.periodic_tail
        return self.partial_quotients[start + (k - start) % length]

    def convergents(self, count: Optional[int] = None) -> Iterator[tuple[int, int]]:
        """Yield ``(p_k, q_k)``; *count* may run past the stored quotients on a periodic tail."""
        if count is None:
            count = len(self.partial_quotients)
        p_prev, p = 1, self.partial_quotients[0]
        q_prev, q = 0, 1
        if count < 1:
            return
        yield p, q
        for k in range(1, count):
            try:
                a = self.quotient(k)
            except IndexError:
                return
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
            yield p, q

    def value_bounds(self, k: int) -> tuple[Fraction, Fraction]:
        """The value lies between consecutive convergents ``k`` and ``k + 1`` (ordered)."""
        pairs = list(self.convergents(k + 2))
        if len(pairs) < k + 2:
            if not self.terminating:
                raise IndexError(f"need {k + 2} convergents, have {len(pairs)}")
            exact = Fraction(*pairs[-1])
            return exact, exact
        lo, hi = Fraction(*pairs[k]), Fraction(*pairs[k + 1])
        return (lo, hi) if lo <= hi else (hi, lo)

    def __str__(self) -> str:
        head, *rest = self.partial_quotients
        body = ", ".join(str(a) for a in rest)
        tail = "" if self.terminating else ", ..."
        return f"[{head}; {body}{tail}]" if rest else f"[{head}{'' if self.terminating else '; ...'}]"

    def to_dict(self) -> dict:
        return {
            "partial_quotients": list(self.partial_quotients),
            "periodic_tail": list(self.periodic_tail) if self.periodic_tail else None,
            "terminating": self.terminating,
        }


def _surd_state(alpha: QuadraticSurd) -> tuple[int, int, int]:
    """``(P, D, Q)`` with ``alpha = (P + sqrt(D)) / Q`` and ``Q | D - P*P``."""
    D = alpha.q * alpha.q * alpha.d
    if alpha.q > 0:
        P, Q = alpha.p, alpha.r
    else:
        P, Q = -alpha.p, -alpha.r
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    return P, D, Q


def _iter_surd_quotients(alpha: QuadraticSurd) -> Iterator[tuple[int, tuple[int, int]]]:
    P, D, Q = _surd_state(alpha)
    while True:
        a = QuadraticSurd(P, 1, D, Q).floor()
        yield a, (P, Q)
        P = a * Q - P
        Q = (D - P * P) // Q


def _iter_rational_quotients(value: Fraction) -> Iterator[int]:
    num, den = value.numerator, value.denominator
    while den:
        a = num // den
        yield a
        num, den = den, num - a * den


def iter_partial_quotients(alpha: Number) -> Iterator[int]:
    """Exact partial quotients, infinite for irrational *alpha*."""
    alpha = QuadraticSurd.coerce(alpha)
    if alpha.is_rational:
        yield from _iter_rational_quotients(alpha.as_fraction())
        return
    for a, _ in _iter_surd_quotients(alpha):
        yield a


def cf_expand(alpha: Number, k: int) -> ContinuedFraction:
    """First *k* partial quotients of *alpha*, with its period when irrational.

    The expansion keeps going past *k* terms, up to ``MAX_PERIOD_SEARCH``
    quotients, until the ``(P, Q)`` state repeats.
    """
    if k < 1:
        raise PreconditionError(f"cf_expand needs k >= 1, got {k}")
    alpha = QuadraticSurd.coerce(alpha)
    if alpha.is_rational:
        quotients = tuple(_iter_rational_quotients(alpha.as_fraction()))
        return ContinuedFraction(quotients[:k], None, len(quotients) <= k)

    quotients: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    tail = None
    for i, (a, state) in enumerate(_iter_surd_quotients(alpha)):
        if state in seen:
            tail = (seen[state], i - seen[state])
            break
        if i >= max(k, MAX_PERIOD_SEARCH):
            logger.warning("no period found for %s within %d quotients", alpha, i)
            break
        seen[state] = i
        quotients.append(a)

    if tail is None:
        return ContinuedFraction(tuple(quotients[:k]))
    # keep at least one full period so quotient() can extend the expansion
    cf = ContinuedFraction(tuple(quotients), tail)
    return ContinuedFraction(tuple(cf.quotient(i) for i in range(max(k, sum(tail)))), tail)


def norm_dist(alpha: Number, n: int) -> QuadraticSurd:
    """``||alpha n||``, the exact distance from ``alpha*n`` to the nearest integer."""
    x = QuadraticSurd.coerce(alpha) * n
    frac = x - x.floor()
    other = 1 - frac
    return frac if frac <= other else other


def best_approx(alpha: Number, Qmax: int) -> tuple[int, int, QuadraticSurd]:
    """The convergent ``a/q`` with the largest ``q <= Qmax``.

    Returns ``(a, q, theta)`` where ``alpha = a/q + theta/q**2`` exactly and
    ``|theta| <= 1``.
    """
    if Qmax < 1:
        raise PreconditionError(f"best_approx needs Qmax >= 1, got {Qmax}")
    alpha = QuadraticSurd.coerce(alpha)
    p_prev, q_prev = 1, 0
    best: Optional[tuple[int, int]] = None
    p, q = 0, 1
    for i, a in enumerate(iter_partial_quotients(alpha)):
        if i == 0:
            p, q = a, 1
            p_prev, q_prev = 1, 0
        else:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
        if q > Qmax:
            break
        best = (p, q)
    assert best is not None
    a, q = best
    theta = (alpha - Fraction(a, q)) * (q * q)
    return a, q, theta


# ---------------------------------------------------------------------------
# Type estimates
# ---------------------------------------------------------------------------

@dataclass
class TypeEstimate:
    """``E(N, t) = min_{n<=N} n^t ||alpha n||`` over a grid of exponents.

    ``trending[i]`` is set when ``E(N, t_i)`` fell below half of
    ``E(sqrt(N), t_i)``.  ``analytic_tau_bound`` is the triangle-inequality
    bound for combinations (``None`` for a single number).
    """

    alpha: str
    N: int
    t_grid: tuple[float, ...]
    E_values: tuple[float, ...]
    minimisers: tuple[int, ...] = ()
    E_sqrt_values: tuple[float, ...] = ()
    trending: tuple[bool, ...] = ()
    rational: bool = False
    truncated: bool = False
    analytic_tau_bound: Optional[float] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "N": self.N,
            "t": list(self.t_grid),
            "E": list(self.E_values),
            "argmin": list(self.minimisers),
            "E_sqrtN": list(self.E_sqrt_values),
            "trending_to_zero": list(self.trending),
            "rational": self.rational,
            "truncated": self.truncated,
            "analytic_tau_bound": self.analytic_tau_bound,
            "notes": list(self.notes),
        }

    def to_rows(self) -> list[dict]:
        return [
            {"alpha": self.alpha, "N": self.N, "t": t, "E": f"{E:.12g}", "argmin": n, "trending": tr}
            for t, E, n, tr in zip(self.t_grid, self.E_values, self.minimisers, self.trending)
        ]


def _convergent_dists(alpha: QuadraticSurd, N: int) -> list[tuple[int, float]]:
    """``(q_k, ||alpha q_k||)`` for every convergent denominator ``q_k <= N``."""
    out: list[tuple[int, float]] = []
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for i, a in enumerate(iter_partial_quotients(alpha)):
        if i == 0:
            p, q = a, 1
        else:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
        if q > N:
            break
        out.append((q, float(norm_dist(alpha, q).to_mpf(DEFAULT_PREC))))
    return out


def _minimise(candidates: Sequence[tuple[int, float]], N: int, t: float) -> tuple[float, int]:
    best, arg = math.inf, 0
    for q, dist in candidates:
        if q > N:
            break
        value = q ** t * dist
        if value < best:
            best, arg = value, q
    return best, arg


def _build_estimate(
    label: str,
    candidates: Sequence[tuple[int, float]],
    N: int,
    t_grid: Sequence[float],
    rational: bool,
) -> TypeEstimate:
    root = max(1, math.isqrt(N))
    E, args, E_sqrt, trend = [], [], [], []
    for t in t_grid:
        e_n, n_arg = _minimise(candidates, N, t)
        e_r, _ = _minimise(candidates, root, t)
        E.append(e_n)
        args.append(n_arg)
        E_sqrt.append(e_r)
        trend.append(e_n == 0 or e_n < 0.5 * e_r)
    est = TypeEstimate(label, N, tuple(t_grid), tuple(E), tuple(args), tuple(E_sqrt), tuple(trend), rational)
    if rational:
        est.notes.append("rational/infinite type")
    return est


def estimate_type(alpha: Number, N: int, t_grid: Sequence[float] = (1.0,)) -> TypeEstimate:
    """E(N, t) for each *t*, minimised over convergent denominators only.

    For ``q_{k-1} < n < q_k`` one has ``||n alpha|| >= ||q_{k-1} alpha||``,
    so with ``t >= 0`` the minimum over all ``n <= N`` sits on a
    convergent denominator.
    """
    if not 1 <= N <= TYPE_SEARCH_LIMIT:
        raise PreconditionError(f"estimate_type needs 1 <= N <= {TYPE_SEARCH_LIMIT}, got {N}")
    if any(t < 0 for t in t_grid):
        raise PreconditionError("exponents t must be non-negative")
    alpha = QuadraticSurd.coerce(alpha)
    return _build_estimate(str(alpha), _convergent_dists(alpha, N), N, t_grid, alpha.is_rational)


def _certified_convergent_dists(value: mpmath.mpf, err: mpmath.mpf, N: int) -> tuple[list[tuple[int, float]], bool]:
    """Convergent distances of a real known to within *err*.

    A partial quotient is accepted only while the floor of every point in
    ``[x - err, x + err]`` agrees; the error is carried through each
    ``x -> 1/(x - a)`` step.  Returns the candidates and a truncation flag.
    """
    out: list[tuple[int, float]] = []
    x, delta = value, err
    p_prev, q_prev, p, q = 1, 0, 0, 1
    first = True
    while True:
        a = int(mpmath.floor(x))
        f = x - a
        if f - delta <= 0 or f + delta >= 1:
            return out, True
        if first:
            p, q = a, 1
            first = False
        else:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
        if q > N:
            return out, False
        out.append((q, float(min(mpmath.frac(value * q), 1 - mpmath.frac(value * q)))))
        x = 1 / f
        delta = delta / (f * (f - delta)) + mpmath.eps * abs(x)


def combined_type_check(
    omegas: Sequence[Number],
    h_vec: Sequence[int],
    N: int,
    t_grid: Sequence[float] = (1.0,),
    prec: int = DEFAULT_PREC,
) -> TypeEstimate:
    """Type estimate for ``sum h_i * omega_i``.

    The combination stays exact when every term shares one quadratic
    field; otherwise it is evaluated at *prec* bits with certified partial
    quotients, and ``truncated`` is set if the precision runs out before
    the denominators pass *N*.  The analytic bound reported alongside is
    ``tau(sum h_i w_i) <= sum tau(h_i w_i)`` with ``tau = 1`` for quadratic
    irrationals and infinity for rationals.
    """
    if len(omegas) != len(h_vec):
        raise PreconditionError("omegas and h_vec must have equal length")
    if any(h < 0 for h in h_vec):
        raise PreconditionError("h_vec entries must be non-negative")
    if not 1 <= N <= TYPE_SEARCH_LIMIT:
        raise PreconditionError(f"combined_type_check needs 1 <= N <= {TYPE_SEARCH_LIMIT}, got {N}")
    surds = [QuadraticSurd.coerce(w) for w in omegas]
    used = [(h, w) for h, w in zip(h_vec, surds) if h]
    if not used:
        raise PreconditionError("combination is identically zero")
    tau_bound = math.inf if any(w.is_rational for _, w in used) else float(len(used))
    label = " + ".join(f"{h}*({w})" for h, w in used)

    try:
        beta = QuadraticSurd.rational(0)
        for h, w in used:
            beta = beta + w * h
    except IncompatibleFieldError:
        beta = None

    if beta is not None:
        est = estimate_type(beta, N, t_grid)
        est.alpha = label
    else:
        with mpmath.workprec(prec):
            value = mpmath.fsum(h * w.to_mpf(prec) for h, w in used)
            err = mpmath.mpf(2) ** (8 - prec) * (1 + sum(abs(h * float(w)) for h, w in used))
            candidates, truncated = _certified_convergent_dists(value, err, N)
        est = _build_estimate(label, candidates, N, t_grid, False)
        est.truncated = truncated
        if truncated:
            est.notes.append(f"expansion truncated at {prec}-bit precision before q > N")
    est.analytic_tau_bound = tau_bound
    return est


# ---------------------------------------------------------------------------
# Linear independence
# ---------------------------------------------------------------------------

@dataclass
class IndependenceReport:
    """Outcome of :func:`independence_probe`.

    ``relation`` is ``(c0, c1, ..., cn)`` with ``c0 + sum c_i omega_i == 0``,
    the smallest by max-norm, then L1 norm, then lexicographically, with
    the first non-zero ``c_i`` (i >= 1) positive.
    """

    omegas: tuple[str, ...]
    B: int
    relation: Optional[tuple[int, ...]]
    candidates: int

    @property
    def independent(self) -> bool:
        return self.relation is None

    def summary(self) -> str:
        if self.relation is None:
            return f"no relation up to B={self.B} ({INDEPENDENCE_CAVEAT})"
        return f"relation found: {list(self.relation)}"

    def to_dict(self) -> dict:
        return {
            "omegas": list(self.omegas),
            "B": self.B,
            "relation": list(self.relation) if self.relation else None,
            "candidates": self.candidates,
            "summary": self.summary(),
        }


def _lcm(values: Sequence[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _relation_rows(surds: Sequence[QuadraticSurd]) -> tuple[np.ndarray, int, np.ndarray]:
    """Integer constraint rows for ``c0 + sum c_i w_i == 0``.

    1 and the square roots of distinct square-free ``d > 1`` are linearly
    independent over Q, so a relation holds iff the rational parts cancel
    (``sum c_i R_i == -c0 * L``) and each radicand's coefficients cancel.
    """
    L = _lcm([w.r for w in surds])
    rational = np.array([w.p * (L // w.r) for w in surds], dtype=object)
    rows = []
    for d in sorted({w.d for w in surds if w.d}):
        lcm_d = _lcm([w.r for w in surds if w.d == d])
        rows.append([w.q * (lcm_d // w.r) if w.d == d else 0 for w in surds])
    field_rows = np.array(rows, dtype=object).reshape(len(rows), len(surds))
    return rational, L, field_rows


def _relation_key(c: tuple[int, ...]) -> tuple:
    return (max(abs(v) for v in c), sum(abs(v) for v in c), c)


def independence_probe(omegas: Sequence[Number], B: int) -> IndependenceReport:
    """Exhaustive search for ``c0 + sum c_i omega_i == 0`` with ``|c_i| <= B``.

    Surds from different quadratic fields are handled exactly by splitting
    every number into its rational part and its ``sqrt(d)`` parts.

    Raises
    ------
    ResourceLimitError
        If ``(2B+1)**n`` candidates exceed ``PROBE_CANDIDATE_LIMIT`` or the
        scaled coefficients overflow 64-bit arithmetic.
    """
    if not 1 <= len(omegas) <= PROBE_MAX_OMEGAS:
        raise PreconditionError(f"independence_probe takes 1..{PROBE_MAX_OMEGAS} numbers, got {len(omegas)}")
    if not 1 <= B <= PROBE_MAX_B:
        raise PreconditionError(f"independence_probe needs 1 <= B <= {PROBE_MAX_B}, got {B}")
    surds = [QuadraticSurd.coerce(w) for w in omegas]
    n = len(surds)
    total = (2 * B + 1) ** n
    if total > PROBE_CANDIDATE_LIMIT:
        raise ResourceLimitError(f"{total} candidate vectors exceed {PROBE_CANDIDATE_LIMIT}")

    rational, L, field_rows = _relation_rows(surds)
    biggest = max([abs(int(v)) for v in rational] + [abs(int(v)) for v in field_rows.flat] + [L])
    if biggest * B * n >= 1 << 62:
        raise ResourceLimitError("scaled coefficients overflow int64 for this bound")
    rational = rational.astype(np.int64)
    field_rows = field_rows.astype(np.int64)

    # vectorise over the last coordinate (or two), loop over the rest
    inner = min(n, 2)
    span = np.arange(-B, B + 1, dtype=np.int64)
    grid = np.stack([g.ravel() for g in np.meshgrid(*([span] * inner), indexing="ij")], axis=1)
    grid_rat = grid @ rational[n - inner:]
    grid_fields = grid @ field_rows[:, n - inner:].T if len(field_rows) else np.zeros((len(grid), 0), dtype=np.int64)

    best: Optional[tuple[int, ...]] = None
    for head in itertools.product(range(-B, B + 1), repeat=n - inner):
        head_arr = np.array(head, dtype=np.int64)
        rat = grid_rat + int(head_arr @ rational[: n - inner]) if head else grid_rat
        ok = (rat % L == 0) & (np.abs(rat // L) <= B)
        if len(field_rows):
            fields = grid_fields + (field_rows[:, : n - inner] @ head_arr if head else 0)
            ok &= np.all(fields == 0, axis=1)
        for idx in np.flatnonzero(ok):
            tail = tuple(int(v) for v in grid[idx])
            coeffs = head + tail
            if not any(coeffs):
                continue
            first = next(v for v in coeffs if v)
            if first < 0:
                continue
            c = (-int(rat[idx]) // L,) + coeffs
            if best is None or _relation_key(c) < _relation_key(best):
                best = c
    logger.debug("independence probe over %d candidates: %s", total, best)
    return IndependenceReport(tuple(str(w) for w in surds), B, best, total)
