"""
exactnum.py – Exact arithmetic for quadratic surds and rational powers.

Every floor or membership decision made elsewhere in the package goes
through this module, so none of them depends on floating-point rounding.

* :class:`QuadraticSurd` holds ``(p + q*sqrt(d)) / r`` with integer fields.
  Rationals are stored with ``q == 0`` and ``d == 0``.
* :class:`RationalExponent` holds ``num/den`` for Piatetski-Shapiro
  exponents ``c`` and their reciprocals ``gamma``.
* :func:`floor_certified` lets vectorised callers use a float estimate
  only where a proven error bound keeps it away from every integer, and
  falls back to the exact routine otherwise.

Text syntax accepted by :func:`parse_surd`::

    "sqrt(2)"   "(1+sqrt(5))/2"   "1/sqrt(2)"   "3/2"   "1.25"   "(p+q*sqrt(d))/r"
"""

from __future__ import annotations

import enum
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import mpmath
import numpy as np

from bpsprimes.errors import IncompatibleFieldError, PreconditionError, SpecParseError

logger = logging.getLogger(__name__)

DEFAULT_PREC = 256

Number = Union[int, Fraction, "QuadraticSurd"]


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return ``(s, core)`` with ``d == s*s*core`` and ``core`` square-free."""
    s = 1
    f = 2
    while f * f <= d:
        ff = f * f
        while d % ff == 0:
            d //= ff
            s *= f
        f += 1
    return s, d


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def _sign_pq(p: int, q: int, d: int) -> int:
    """Exact sign of ``p + q*sqrt(d)`` for square-free ``d``."""
    if q == 0 or d == 0:
        return _sign(p)
    if p == 0:
        return _sign(q)
    if (p > 0) == (q > 0):
        return _sign(p)
    # opposite signs: compare p^2 with q^2 d (never equal for square-free d > 1)
    if p > 0:
        return 1 if p * p > q * q * d else -1
    return 1 if q * q * d > p * p else -1


@dataclass(frozen=True)
class QuadraticSurd:
    """Exact real ``(p + q*sqrt(d)) / r``.

    Construction normalises the fields: ``d`` is made square-free, ``r`` is
    made positive and ``gcd(p, q, r) == 1``.  Two surds are equal iff their
    normalised fields are equal.
    """

    p: int
    q: int = 0
    d: int = 0
    r: int = 1

    def __post_init__(self) -> None:
        p, q, d, r = int(self.p), int(self.q), int(self.d), int(self.r)
        if r == 0:
            raise ZeroDivisionError("surd denominator must be non-zero")
        if d < 0:
            raise ValueError(f"radicand must be non-negative, got {d}")
        if r < 0:
            p, q, r = -p, -q, -r
        if d > 1:
            s, d = _squarefree_split(d)
            q *= s
        if d == 1:
            p, q = p + q, 0
        if q == 0:
            d = 0
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "r", r)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def rational(cls, value: Union[int, Fraction]) -> "QuadraticSurd":
        value = Fraction(value)
        return cls(value.numerator, 0, 0, value.denominator)

    @classmethod
    def sqrt(cls, d: Union[int, Fraction]) -> "QuadraticSurd":
        """Exact ``sqrt(d)`` for a non-negative rational ``d``."""
        d = Fraction(d)
        if d < 0:
            raise ValueError(f"sqrt of a negative number: {d}")
        # sqrt(a/b) = sqrt(a*b)/b
        return cls(0, 1, d.numerator * d.denominator, d.denominator)

    @classmethod
    def coerce(cls, value: Number) -> "QuadraticSurd":
        if isinstance(value, QuadraticSurd):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.rational(value)
        raise TypeError(f"cannot convert {type(value).__name__} to QuadraticSurd")

    # ------------------------------------------------------------------
    # Predicates and conversions
    # ------------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    @property
    def is_integer(self) -> bool:
        return self.q == 0 and self.r == 1

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.p, self.r)

    def sign(self) -> int:
        return _sign_pq(self.p, self.q, self.d)

    def floor(self) -> int:
        if self.q == 0:
            return self.p // self.r
        # q*sqrt(d) is irrational, so isqrt brackets it strictly
        root = math.isqrt(self.q * self.q * self.d)
        whole = self.p + (root if self.q > 0 else -root - 1)
        return whole // self.r

    def ceil(self) -> int:
        return -((-self).floor())

    def to_mpf(self, prec: int = DEFAULT_PREC) -> mpmath.mpf:
        with mpmath.workprec(prec):
            value = mpmath.mpf(self.p)
            if self.q:
                value += self.q * mpmath.sqrt(self.d)
            return value / self.r

    def __float__(self) -> float:
        return float(self.to_mpf(80))

    def __bool__(self) -> bool:
        return self.p != 0 or self.q != 0

    def __str__(self) -> str:
        if self.q == 0:
            return str(self.p) if self.r == 1 else f"{self.p}/{self.r}"
        if abs(self.q) == 1:
            rad = f"sqrt({self.d})"
        else:
            rad = f"{abs(self.q)}*sqrt({self.d})"
        if self.p == 0:
            num = rad if self.q > 0 else f"-{rad}"
        else:
            num = f"{self.p}{'+' if self.q > 0 else '-'}{rad}"
        if self.r == 1:
            return num
        if self.p == 0 and self.q > 0:
            return f"{num}/{self.r}"
        return f"({num})/{self.r}"

    # ------------------------------------------------------------------
    # Field arithmetic
    # ------------------------------------------------------------------

    def _field(self, other: "QuadraticSurd") -> int:
        if self.d == 0:
            return other.d
        if other.d == 0 or other.d == self.d:
            return self.d
        raise IncompatibleFieldError(
            f"cannot combine sqrt({self.d}) and sqrt({other.d}) exactly"
        )

    def __neg__(self) -> "QuadraticSurd":
        return QuadraticSurd(-self.p, -self.q, self.d, self.r)

    def __add__(self, other: Number) -> "QuadraticSurd":
        try:
            other = QuadraticSurd.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return QuadraticSurd(
            self.p * other.r + other.p * self.r,
            self.q * other.r + other.q * self.r,
            d,
            self.r * other.r,
        )

    __radd__ = __add__

    def __sub__(self, other: Number) -> "QuadraticSurd":
        try:
            other = QuadraticSurd.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Number) -> "QuadraticSurd":
        return (-self) + other

    def __mul__(self, other: Number) -> "QuadraticSurd":
        try:
            other = QuadraticSurd.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(other)
        return QuadraticSurd(
            self.p * other.p + self.q * other.q * d,
            self.p * other.q + self.q * other.p,
            d,
            self.r * other.r,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticSurd":
        if self.p == 0 and self.q == 0:
            raise ZeroDivisionError("inverse of zero surd")
        norm = self.p * self.p - self.q * self.q * self.d
        return QuadraticSurd(self.r * self.p, -self.r * self.q, self.d, norm)

    def __truediv__(self, other: Number) -> "QuadraticSurd":
        try:
            other = QuadraticSurd.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other: Number) -> "QuadraticSurd":
        return QuadraticSurd.coerce(other) * self.inverse()

    # ------------------------------------------------------------------
    # Ordering
    # ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QuadraticSurd.rational(other)
        if not isinstance(other, QuadraticSurd):
            return NotImplemented
        return (self.p, self.q, self.d, self.r) == (other.p, other.q, other.d, other.r)

    def __hash__(self) -> int:
        return hash((self.p, self.q, self.d, self.r))

    def __lt__(self, other: Number) -> bool:
        return compare_surd(self, QuadraticSurd.coerce(other)) is Ordering.LESS

    def __le__(self, other: Number) -> bool:
        return compare_surd(self, QuadraticSurd.coerce(other)) is not Ordering.GREATER

    def __gt__(self, other: Number) -> bool:
        return compare_surd(self, QuadraticSurd.coerce(other)) is Ordering.GREATER

    def __ge__(self, other: Number) -> bool:
        return compare_surd(self, QuadraticSurd.coerce(other)) is not Ordering.LESS


@dataclass(frozen=True)
class RationalExponent:
    """Positive rational exponent ``num/den`` in lowest terms."""

    num: int
    den: int

    def __post_init__(self) -> None:
        num, den = int(self.num), int(self.den)
        if num <= 0 or den <= 0:
            raise ValueError(f"exponent parts must be positive, got {num}/{den}")
        g = math.gcd(num, den)
        object.__setattr__(self, "num", num // g)
        object.__setattr__(self, "den", den // g)

    @classmethod
    def from_fraction(cls, value: Union[int, Fraction]) -> "RationalExponent":
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def reciprocal(self) -> "RationalExponent":
        return RationalExponent(self.den, self.num)

    def __float__(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


# ---------------------------------------------------------------------------
# Exact integer roots and powers
# ---------------------------------------------------------------------------

def iroot(y: int, k: int) -> int:
    """Return ``floor(y ** (1/k))`` for integers ``y >= 0``, ``k >= 1``.

    Newton's iteration from an upper starting point decreases monotonically
    to the floor root; a final bracketing check guarantees
    ``x**k <= y < (x+1)**k``.
    """
    if k < 1:
        raise ValueError(f"root index must be >= 1, got {k}")
    if y < 0:
        raise ValueError(f"cannot take integer root of negative {y}")
    if y < 2 or k == 1:
        return y
    if k == 2:
        return math.isqrt(y)
    x = 1 << -(-y.bit_length() // k)
    while True:
        t = ((k - 1) * x + y // x ** (k - 1)) // k
        if t >= x:
            break
        x = t
    while x ** k > y:
        x -= 1
    while (x + 1) ** k <= y:
        x += 1
    return x


def floor_rational_power(m: int, e: RationalExponent) -> int:
    """Exact ``floor(m ** (num/den))``."""
    if m < 0:
        raise PreconditionError(f"floor_rational_power needs m >= 0, got {m}")
    return iroot(m ** e.num, e.den)


def ceil_rational_power(m: int, e: RationalExponent) -> int:
    """Exact ``ceil(m ** (num/den))``."""
    if m < 0:
        raise PreconditionError(f"ceil_rational_power needs m >= 0, got {m}")
    y = m ** e.num
    k = iroot(y, e.den)
    return k if k ** e.den == y else k + 1


class SurdLine:
    """The map ``n -> s*n + t`` with an exact integer ``floor_at(n)``.

    The fields are expanded once into ``(P(n) + Q(n)*sqrt(d)) / R`` so each
    evaluation costs one ``isqrt`` and no normalisation.
    """

    def __init__(self, s: Number, t: Number) -> None:
        s = QuadraticSurd.coerce(s)
        t = QuadraticSurd.coerce(t)
        self.d = s._field(t)
        self.slope = s
        self.intercept = t
        self._p1, self._p0 = s.p * t.r, t.p * s.r
        self._q1, self._q0 = s.q * t.r, t.q * s.r
        self._r = s.r * t.r

    def value_at(self, n: int) -> QuadraticSurd:
        return QuadraticSurd(self._p1 * n + self._p0, self._q1 * n + self._q0, self.d, self._r)

    def floor_at(self, n: int) -> int:
        whole = self._p1 * n + self._p0
        q = self._q1 * n + self._q0
        if q:
            root = math.isqrt(q * q * self.d)
            whole += root if q > 0 else -root - 1
        return whole // self._r

    def ceil_at(self, n: int) -> int:
        if self._q1 * n + self._q0:
            # irrational values are never integers
            return self.floor_at(n) + 1
        return -(-(self._p1 * n + self._p0) // self._r)


def floor_surd_linear(s: Number, n: int, t: Number) -> int:
    """Exact ``floor(s*n + t)`` for surds over a common field."""
    if n < 0:
        raise PreconditionError(f"floor_surd_linear needs n >= 0, got {n}")
    return SurdLine(s, t).floor_at(n)


def compare_surd(a: Number, b: Number) -> Ordering:
    """Exact trichotomy of two surds that are rational or share ``sqrt(d)``."""
    diff = QuadraticSurd.coerce(a) - QuadraticSurd.coerce(b)
    return Ordering(diff.sign())


def floor_certified(
    approx: np.ndarray,
    err: Union[float, np.ndarray],
    exact: Callable[[int], int],
) -> np.ndarray:
    """Vectorised floor with exact fallback.

    ``approx[i]`` is trusted only when its distance to the nearest integer
    exceeds ``err`` (a proven bound on ``|approx[i] - true value|``);
    every other index ``i`` is resolved by ``exact(i)``.
    """
    approx = np.asarray(approx, dtype=np.float64)
    fl = np.floor(approx)
    frac = approx - fl
    unsure = (frac <= err) | (1.0 - frac <= err)
    out = fl.astype(np.int64)
    idx = np.flatnonzero(unsure)
    for i in idx:
        out[i] = exact(int(i))
    if idx.size:
        logger.debug("floor_certified: %d of %d values resolved exactly", idx.size, approx.size)
    return out


# ---------------------------------------------------------------------------
# Text syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<sqrt>sqrt|√)|(?P<op>[-+*/()]))"
)


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = text[pos:].split()[0] if text[pos:].split() else text[pos:]
            raise SpecParseError(f"unexpected token {bad!r} in {text!r}", token=bad)
        tokens.append(m.group("num") or ("sqrt" if m.group("sqrt") else m.group("op")))
        pos = m.end()
    return tokens


class _SurdParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _take(self, expected: str | None = None) -> str:
        tok = self._peek()
        if tok is None:
            raise SpecParseError(f"unexpected end of {self.text!r}", token="")
        if expected is not None and tok != expected:
            raise SpecParseError(f"expected {expected!r}, got {tok!r} in {self.text!r}", token=tok)
        self.pos += 1
        return tok

    def parse(self) -> QuadraticSurd:
        if not self.tokens:
            raise SpecParseError("empty number text", token="")
        value = self._expr()
        if self._peek() is not None:
            tok = self._peek()
            raise SpecParseError(f"unexpected token {tok!r} in {self.text!r}", token=tok)
        return value

    def _expr(self) -> QuadraticSurd:
        value = self._term()
        while self._peek() in ("+", "-"):
            op = self._take()
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self) -> QuadraticSurd:
        value = self._unary()
        while self._peek() in ("*", "/"):
            op = self._take()
            rhs = self._unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.sign() == 0:
                    raise SpecParseError(f"division by zero in {self.text!r}", token="/")
                value = value / rhs
        return value

    def _unary(self) -> QuadraticSurd:
        if self._peek() == "-":
            self._take()
            return -self._unary()
        if self._peek() == "+":
            self._take()
            return self._unary()
        return self._atom()

    def _atom(self) -> QuadraticSurd:
        tok = self._take()
        if tok == "(":
            value = self._expr()
            self._take(")")
            return value
        if tok == "sqrt":
            self._take("(")
            arg = self._expr()
            self._take(")")
            if not arg.is_rational or arg.sign() < 0:
                raise SpecParseError(
                    f"sqrt argument must be a non-negative rational in {self.text!r}",
                    token=str(arg),
                )
            return QuadraticSurd.sqrt(arg.as_fraction())
        if tok[0].isdigit() or tok[0] == ".":
            return QuadraticSurd.rational(Fraction(tok))
        raise SpecParseError(f"unexpected token {tok!r} in {self.text!r}", token=tok)


def parse_surd(text: str) -> QuadraticSurd:
    """Parse the surd text syntax; decimals are read as exact rationals."""
    try:
        return _SurdParser(text).parse()
    except IncompatibleFieldError as exc:
        raise SpecParseError(f"{exc} in {text!r}", token=text) from exc


def parse_exponent(text: str) -> RationalExponent:
    """Parse ``"13/12"`` or ``"1.08"`` into a :class:`RationalExponent`."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad exponent {text!r}", token=text) from exc
    if value <= 0:
        raise SpecParseError(f"exponent must be positive, got {text!r}", token=text)
    return RationalExponent.from_fraction(value)


def parse_int(text: str) -> int:
    """Parse an integer limit such as ``"100"``, ``"1e8"`` or ``"2.5e6"``."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(f"bad integer {text!r}", token=text) from exc
    if value.denominator != 1:
        raise SpecParseError(f"not an integer: {text!r}", token=text)
    return int(value)
