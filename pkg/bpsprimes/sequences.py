"""
sequences.py – Beatty and Piatetski-Shapiro sequences.

Membership is decided through the floor-difference characteristic
functions

    X_{α,β}(m) = ⌊−ω(m−β)⌋ − ⌊−ω(m+1−β)⌋          (ω = 1/α)
    X^{(c)}(m) = ⌊−m^γ⌋ − ⌊−(m+1)^γ⌋             (γ = 1/c)

evaluated exactly.  The enumerators walk ``n = 1, 2, ...`` instead, which is
the cheap direction; each side serves as the other's oracle.

Terms are indexed from ``n = 1``.  For β ≥ 1 the raw Beatty formula would
also count ``n <= 0``; :func:`beatty_char` excludes those indices.
"""

from __future__ import annotations

import functools
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

import mpmath
import numpy as np

from bpsprimes.errors import IncompatibleFieldError, PreconditionError
from bpsprimes.exactnum import (
    DEFAULT_PREC,
    QuadraticSurd,
    RationalExponent,
    SurdLine,
    ceil_rational_power,
    floor_certified,
    floor_rational_power,
)
from bpsprimes.expsum import sawtooth

logger = logging.getLogger(__name__)

PS_C_MAX = Fraction(12, 11)
PS_C_WARN_MAX = Fraction(2817, 2426)

# float64 evaluation error is far below this relative bound for values < 2^52
_REL_ERR = 2.0 ** -40
_FLOAT_EXACT_LIMIT = 2 ** 52


@dataclass(frozen=True)
class BeattySpec:
    """Beatty sequence ``floor(alpha*n + beta)``, ``n >= 1``, with ``alpha > 1``."""

    alpha: QuadraticSurd
    beta: QuadraticSurd = field(default_factory=lambda: QuadraticSurd(0))
    omega: QuadraticSurd = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        alpha = QuadraticSurd.coerce(self.alpha)
        beta = QuadraticSurd.coerce(self.beta)
        if alpha <= 1:
            raise PreconditionError(f"Beatty alpha must exceed 1, got {alpha}")
        try:
            alpha + beta
        except IncompatibleFieldError as exc:
            raise PreconditionError(f"alpha={alpha} and beta={beta} lie in different fields") from exc
        if alpha.is_rational:
            warnings.warn(
                f"rational alpha={alpha}: the prime-counting theorems need irrational alpha",
                stacklevel=2,
            )
        omega = alpha.inverse()
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "omega", omega)

    # lines in m: ω(β − m) and ω(β − m − 1)
    @functools.cached_property
    def _lower(self) -> SurdLine:
        return SurdLine(-self.omega, self.omega * self.beta)

    @functools.cached_property
    def _upper(self) -> SurdLine:
        return SurdLine(-self.omega, self.omega * (self.beta - 1))

    @functools.cached_property
    def _terms(self) -> SurdLine:
        return SurdLine(self.alpha, self.beta)

    def __str__(self) -> str:
        return f"B({self.alpha}, {self.beta})"


@dataclass(frozen=True)
class PSSpec:
    """Piatetski-Shapiro sequence ``floor(n**c)`` with rational ``c`` in (1, 2).

    ``c`` in ``(1, 12/11)`` is the range the intersection theorems cover.
    Larger ``c`` below 2 is accepted with a warning unless *strict* is set.
    """

    c: RationalExponent
    strict: bool = False
    gamma: RationalExponent = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        c = self.c
        if not isinstance(c, RationalExponent):
            c = RationalExponent.from_fraction(Fraction(c))
        value = c.value
        if not 1 < value < 2:
            raise PreconditionError(f"PS exponent must lie in (1, 2), got c={c}")
        if value >= PS_C_MAX:
            if self.strict:
                raise PreconditionError(f"c={c} outside (1, 12/11)")
            where = "below" if value < PS_C_WARN_MAX else "beyond"
            warnings.warn(
                f"c={c} outside (1, 12/11) ({where} 2817/2426); predictions are heuristic",
                stacklevel=2,
            )
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", c.reciprocal())

    def __str__(self) -> str:
        return f"N^({self.c})"


SequenceSpec = Union[BeattySpec, PSSpec]


# ---------------------------------------------------------------------------
# Beatty sequences
# ---------------------------------------------------------------------------

def beatty_char(spec: BeattySpec, m: int) -> int:
    """1 iff ``m == floor(alpha*n + beta)`` for some ``n >= 1``."""
    if m < 1:
        raise PreconditionError(f"beatty_char needs m >= 1, got {m}")
    first = max(-spec._lower.floor_at(m), 1)
    stop = -spec._upper.floor_at(m)
    return max(0, stop - first)


def beatty_index_range(spec: BeattySpec, lo: int, hi: int) -> tuple[int, int]:
    """Indices ``[n_lo, n_hi)`` whose terms fall in ``[lo, hi)``."""
    n_lo = max(1, -spec._lower.floor_at(lo))
    n_hi = max(n_lo, -spec._lower.floor_at(hi))
    return n_lo, n_hi


def beatty_enumerate(spec: BeattySpec, limit: int, start: int = 1) -> Iterator[int]:
    """Yield ``floor(alpha*n + beta) <= limit`` for ``n = start, start+1, ...``.

    Terms below 1 (possible for negative beta) are skipped.
    """
    if limit < 1:
        raise PreconditionError(f"beatty_enumerate needs limit >= 1, got {limit}")
    line = spec._terms
    n = max(start, 1)
    while True:
        v = line.floor_at(n)
        if v > limit:
            return
        if v >= 1:
            yield v
        n += 1


def beatty_values_block(spec: BeattySpec, n_lo: int, n_hi: int) -> np.ndarray:
    """``floor(alpha*n + beta)`` for ``n`` in ``[n_lo, n_hi)`` as int64."""
    n = np.arange(n_lo, n_hi, dtype=np.int64)
    alpha_f, beta_f = float(spec.alpha), float(spec.beta)
    approx = alpha_f * n.astype(np.float64) + beta_f
    if approx.size and approx[-1] >= _FLOAT_EXACT_LIMIT:
        raise PreconditionError("Beatty block values exceed the float-exact range")
    err = (np.abs(approx) + abs(beta_f) + 1.0) * _REL_ERR
    line = spec._terms
    return floor_certified(approx, err, lambda i: line.floor_at(n_lo + i))


def beatty_floor_pair(spec: BeattySpec, ms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``floor(-omega(m - beta))`` and ``floor(-omega(m + 1 - beta))`` for an int64 array."""
    ms = np.asarray(ms, dtype=np.int64)
    omega_f, beta_f = float(spec.omega), float(spec.beta)
    mf = ms.astype(np.float64)
    slack = abs(beta_f) * omega_f + 1.0
    low = omega_f * (beta_f - mf)
    high = omega_f * (beta_f - mf - 1.0)
    lower, upper = spec._lower, spec._upper
    fl_low = floor_certified(low, (np.abs(low) + slack) * _REL_ERR, lambda i: lower.floor_at(int(ms[i])))
    fl_high = floor_certified(high, (np.abs(high) + slack) * _REL_ERR, lambda i: upper.floor_at(int(ms[i])))
    return fl_low, fl_high


def beatty_chars(spec: BeattySpec, ms: np.ndarray) -> np.ndarray:
    """Vectorised :func:`beatty_char` for an int64 array of ``m >= 1``."""
    fl_low, fl_high = beatty_floor_pair(spec, ms)
    # first index is ceil(omega(m - beta)) = -floor(-omega(m - beta))
    return np.maximum(0, -fl_high - np.maximum(-fl_low, 1)).astype(np.int8)


# ---------------------------------------------------------------------------
# Piatetski-Shapiro sequences
# ---------------------------------------------------------------------------

def ps_char(spec: PSSpec, m: int) -> int:
    """1 iff ``m == floor(n**c)`` for some ``n >= 1``."""
    if m < 1:
        raise PreconditionError(f"ps_char needs m >= 1, got {m}")
    return ceil_rational_power(m + 1, spec.gamma) - ceil_rational_power(m, spec.gamma)


def ps_index_range(spec: PSSpec, lo: int, hi: int) -> tuple[int, int]:
    """Indices ``[n_lo, n_hi)`` with ``lo <= floor(n**c) < hi``."""
    n_lo = max(1, ceil_rational_power(max(lo, 0), spec.gamma))
    n_hi = max(n_lo, ceil_rational_power(max(hi, 0), spec.gamma))
    return n_lo, n_hi


def ps_enumerate(spec: PSSpec, limit: int, start: int = 1) -> Iterator[int]:
    """Yield ``floor(n**c) <= limit`` for ``n = start, start+1, ...``.

    The output is strictly increasing because ``(n+1)**c - n**c > 1``.
    """
    if limit < 1:
        raise PreconditionError(f"ps_enumerate needs limit >= 1, got {limit}")
    n = max(start, 1)
    while True:
        v = floor_rational_power(n, spec.c)
        if v > limit:
            return
        yield v
        n += 1


def ps_values_block(spec: PSSpec, n_lo: int, n_hi: int) -> np.ndarray:
    """``floor(n**c)`` for ``n`` in ``[n_lo, n_hi)`` as int64."""
    n = np.arange(n_lo, n_hi, dtype=np.int64)
    approx = np.power(n.astype(np.float64), float(spec.c))
    if approx.size and approx[-1] >= _FLOAT_EXACT_LIMIT:
        raise PreconditionError("PS block values exceed the float-exact range")
    return floor_certified(approx, approx * _REL_ERR + _REL_ERR, lambda i: floor_rational_power(n_lo + i, spec.c))


def ps_ceil_pair(spec: PSSpec, ms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``ceil(m**gamma)`` and ``ceil((m + 1)**gamma)`` for an int64 array."""
    ms = np.asarray(ms, dtype=np.int64)
    g = float(spec.gamma)
    lo_pow = np.power(ms.astype(np.float64), g)
    hi_pow = np.power(ms.astype(np.float64) + 1.0, g)
    lo_ceil = -floor_certified(-lo_pow, lo_pow * _REL_ERR + _REL_ERR,
                               lambda i: -ceil_rational_power(int(ms[i]), spec.gamma))
    hi_ceil = -floor_certified(-hi_pow, hi_pow * _REL_ERR + _REL_ERR,
                               lambda i: -ceil_rational_power(int(ms[i]) + 1, spec.gamma))
    return lo_ceil, hi_ceil


def ps_chars(spec: PSSpec, ms: np.ndarray) -> np.ndarray:
    """Vectorised :func:`ps_char` for an int64 array of ``m >= 1``."""
    lo_ceil, hi_ceil = ps_ceil_pair(spec, ms)
    return (hi_ceil - lo_ceil).astype(np.int8)


# ---------------------------------------------------------------------------
# Sawtooth expansions of the characteristic functions
# ---------------------------------------------------------------------------

def _raw_beatty_char(spec: BeattySpec, m: int) -> int:
    return spec._lower.floor_at(m) - spec._upper.floor_at(m)


def char_psi_identity_residual(spec: SequenceSpec, m: int, prec: int = DEFAULT_PREC) -> float:
    """``X(m)`` minus its exact sawtooth expansion.

    Beatty:  X − (ω + ψ(−ω(m+1−β)) − ψ(−ω(m−β)))
    PS:      X − ((m+1)^γ − m^γ + ψ(−(m+1)^γ) − ψ(−m^γ))

    Both expansions are identities, so the result is rounding noise.
    """
    if m < 1:
        raise PreconditionError(f"char_psi_identity_residual needs m >= 1, got {m}")
    with mpmath.workprec(prec):
        if isinstance(spec, BeattySpec):
            omega = spec.omega.to_mpf(prec)
            beta = spec.beta.to_mpf(prec)
            expansion = omega + sawtooth(-omega * (m + 1 - beta)) - sawtooth(-omega * (m - beta))
            return float(_raw_beatty_char(spec, m) - expansion)
        lo, hi = _ps_powers(spec, m)
        expansion = hi - lo + sawtooth(-hi) - sawtooth(-lo)
        return float(ps_char(spec, m) - expansion)


def ps_taylor_residual(spec: PSSpec, m: int, prec: int = DEFAULT_PREC) -> float:
    """``X^{(c)}(m) − (γ m^{γ−1} + ψ(−(m+1)^γ) − ψ(−m^γ))``, which is O(m^{γ−2})."""
    if m < 1:
        raise PreconditionError(f"ps_taylor_residual needs m >= 1, got {m}")
    with mpmath.workprec(prec):
        g = mpmath.mpf(spec.gamma.num) / spec.gamma.den
        lo, hi = _ps_powers(spec, m)
        expansion = g * mpmath.power(m, g - 1) + sawtooth(-hi) - sawtooth(-lo)
        return float(ps_char(spec, m) - expansion)


def _ps_powers(spec: PSSpec, m: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    g = mpmath.mpf(spec.gamma.num) / spec.gamma.den
    return mpmath.power(m, g), mpmath.power(m + 1, g)
