"""
expsum.py – Sawtooth approximation and exponential-sum machinery.

Contents
--------
* :func:`sawtooth` and Vaaler's trigonometric approximation of it
  (:func:`vaaler_build`), validated on a grid rather than trusted.
* Direct evaluation of Σ Λ(n) e(h n^γ + m1 n + m2) in extended precision.
* The Heath-Brown decomposition of Λ(n), checked exhaustively.
* Empirical checkers that compare direct sums with the shapes of the
  classical bounds (second/third derivative tests, Type I/II sums, prime
  sums with a rational approximation, finite-type phases).  Implied
  constants are unknown, so every checker reports a ratio
  ``|direct| / envelope`` instead of asserting an inequality.
* :func:`optimal_q_select` picks the splitting parameter that minimises a
  sum of powers, next to the analytic bound for that choice.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

import mpmath
import numpy as np

from bpsprimes.arith import iter_segments, mobius, prime_power, sieve_segment
from bpsprimes.errors import IdentityCheckError, PreconditionError, ResourceLimitError, SpecParseError
from bpsprimes.exactnum import QuadraticSurd, parse_surd

logger = logging.getLogger(__name__)

DIRECT_SUM_LIMIT = 10 ** 8
TYPE_SUM_LIMIT = 10 ** 7
DEFAULT_C_BOUND = 10.0
GRID_POINTS = 10 ** 4
GRID_TOL = 1e-12
RANGE_SLACK = 4.0

Real = Union[int, float, Fraction, QuadraticSurd]

_TWO_PI_LD = np.longdouble(2) * np.arccos(np.longdouble(-1))


def sawtooth(t):
    """ψ(t) = t − ⌊t⌋ − 1/2 for floats, ``mpmath.mpf`` values or numpy arrays."""
    if isinstance(t, mpmath.mpf):
        return t - mpmath.floor(t) - mpmath.mpf(0.5)
    if isinstance(t, np.ndarray):
        frac = t - np.floor(t)
        return np.where(frac >= 1.0, frac - 1.0, frac) - 0.5
    if isinstance(t, (Fraction, QuadraticSurd)):
        t = QuadraticSurd.coerce(t)
        return float(t - t.floor()) - 0.5
    frac = t - math.floor(t)
    if frac >= 1.0:
        frac -= 1.0
    return frac - 0.5


def e(t):
    """e(t) = exp(2πit)."""
    return np.exp(2j * np.pi * np.asarray(t, dtype=np.float64))


def _to_longdouble(value: Real) -> np.longdouble:
    """Convert through mpmath as a double-double so no bits are lost to float64."""
    if isinstance(value, QuadraticSurd):
        v = value.to_mpf(128)
    else:
        with mpmath.workprec(128):
            v = mpmath.mpf(value.numerator) / value.denominator if isinstance(value, Fraction) else mpmath.mpf(value)
    hi = float(v)
    lo = float(v - hi)
    return np.longdouble(hi) + np.longdouble(lo)


def _frac_longdouble(value: Real) -> np.longdouble:
    if isinstance(value, (int, Fraction, QuadraticSurd)):
        v = QuadraticSurd.coerce(value) if not isinstance(value, QuadraticSurd) else value
        return _to_longdouble(v - v.floor())
    return _to_longdouble(value - math.floor(value))


# ---------------------------------------------------------------------------
# Vaaler's approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VaalerApprox:
    """Coefficients of Vaaler's approximation of degree ``H``.

    ``|ψ(t) − Σ_{0<|h|≤H} a_h e(th)| ≤ Σ_{|h|≤H} b_h e(th)`` with
    ``a_{−h} = conj(a_h)`` and ``b_{−h} = b_h``, so both sides are real.
    """

    H: int
    a: dict
    b: dict

    def approx(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        for h in range(1, self.H + 1):
            out += 2.0 * np.real(self.a[h] * e(h * t))
        return out

    def majorant(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.full_like(t, self.b[0])
        for h in range(1, self.H + 1):
            out += 2.0 * self.b[h] * np.cos(2 * np.pi * h * t)
        return out

    def grid_slack(self, points: int = GRID_POINTS) -> float:
        """min over ``t = k/points`` of majorant − |ψ − approx| (≥ 0 when valid)."""
        t = np.arange(points, dtype=np.float64) / points
        return float(np.min(self.majorant(t) - np.abs(sawtooth(t) - self.approx(t))))


def _vaaler_weight(u: np.ndarray) -> np.ndarray:
    # φ(u) = πu(1−u)cot(πu) + u on 0 < u < 1
    return np.pi * u * (1.0 - u) / np.tan(np.pi * u) + u


def vaaler_build(H: int, validate: bool = __debug__) -> VaalerApprox:
    """Vaaler's explicit coefficients of degree *H*.

    ``a_h = i φ(h/(H+1)) / (2πh)`` and ``b_h = (1 − |h|/(H+1)) / (2H+2)``.
    With *validate* (default: on unless Python runs with ``-O``) the
    majorant inequality is checked on a 10^4-point grid.

    Raises
    ------
    IdentityCheckError
        If the grid check fails.
    """
    if H < 1:
        raise PreconditionError(f"Vaaler degree must be >= 1, got {H}")
    hs = np.arange(1, H + 1, dtype=np.float64)
    phi = _vaaler_weight(hs / (H + 1))
    a: dict = {}
    b: dict = {0: 1.0 / (2 * H + 2)}
    for h, w in zip(range(1, H + 1), phi):
        a[h] = 1j * w / (2 * np.pi * h)
        a[-h] = np.conj(a[h])
        b[h] = b[-h] = (1.0 - h / (H + 1)) / (2 * H + 2)
    approx = VaalerApprox(H, a, b)
    if validate:
        slack = approx.grid_slack()
        if slack < -GRID_TOL:
            raise IdentityCheckError(f"Vaaler majorant fails on grid for H={H}: slack {slack:.3e}")
        logger.debug("vaaler H=%d grid slack %.3e", H, slack)
    return approx


# ---------------------------------------------------------------------------
# Phases and direct sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseSpec:
    """Phase ``f(n) = h*n**gamma + m1*n + m2``."""

    h: int = 0
    gamma: Fraction = Fraction(12, 13)
    m1: Real = 0
    m2: float = 0.0

    def __post_init__(self) -> None:
        gamma = Fraction(self.gamma) if not isinstance(self.gamma, float) else Fraction(self.gamma).limit_denominator(10 ** 9)
        if self.h and not 0 < gamma < 1:
            raise PreconditionError(f"phase gamma must lie in (0, 1), got {gamma}")
        object.__setattr__(self, "gamma", gamma)

    def negated(self) -> "PhaseSpec":
        return PhaseSpec(-self.h, self.gamma, -QuadraticSurd.coerce(self.m1) if not isinstance(self.m1, float) else -self.m1, -self.m2)

    def frac_values(self, n: np.ndarray) -> np.ndarray:
        """``{f(n)}`` as ``np.longdouble`` for an int64 array ``n``."""
        nl = n.astype(np.longdouble)
        out = np.zeros(n.shape, dtype=np.longdouble)
        if self.h:
            g = np.longdouble(self.gamma.numerator) / np.longdouble(self.gamma.denominator)
            out += np.mod(np.longdouble(self.h) * np.power(nl, g), 1)
        if self.m1:
            out += np.mod(_frac_longdouble(self.m1) * nl, 1)
        if self.m2:
            out += _frac_longdouble(self.m2)
        return np.mod(out, 1)

    def __str__(self) -> str:
        return f"h={self.h},gamma={self.gamma},m1={self.m1},m2={self.m2}"


def parse_phase(text: str) -> PhaseSpec:
    """Parse ``"h=1,gamma=12/13,m1=sqrt(2),m2=0.25"`` (any subset of keys)."""
    values: dict = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, raw = part.partition("=")
        key = key.strip()
        if not sep or key not in ("h", "gamma", "m1", "m2"):
            raise SpecParseError(f"bad phase entry {part!r}", token=part)
        value = parse_surd(raw)
        if key == "h":
            if not value.is_integer:
                raise SpecParseError(f"h must be an integer, got {raw!r}", token=raw)
            values[key] = value.p
        elif key == "gamma":
            values[key] = value.as_fraction()
        elif key == "m1":
            values[key] = value.as_fraction() if value.is_rational else value
        else:
            values[key] = float(value)
    return PhaseSpec(**values)


def _lambda_terms(lo: int, hi: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(n, Λ(n))`` for prime powers ``lo < n <= hi`` segment by segment."""
    for a, b in iter_segments(lo + 1, hi + 1):
        tables = sieve_segment(a, b)
        nz = np.flatnonzero(tables.lambda_prime > 0)
        lam = np.log(tables.lambda_prime[nz].astype(np.longdouble))
        yield nz.astype(np.int64) + a, lam


def lambda_expsum(phase: PhaseSpec, lo: int, hi: int) -> complex:
    """Σ_{lo < n <= hi} Λ(n) e(f(n)) by direct summation.

    Segments are reduced in order, so the value does not depend on how the
    range is split.
    """
    if hi > DIRECT_SUM_LIMIT:
        raise ResourceLimitError(f"direct sum limit is {DIRECT_SUM_LIMIT}, got hi={hi}")
    if hi <= lo:
        return 0j
    re = np.longdouble(0)
    im = np.longdouble(0)
    for n, lam in _lambda_terms(max(lo, 0), hi):
        angle = _TWO_PI_LD * phase.frac_values(n)
        re += np.sum(lam * np.cos(angle))
        im += np.sum(lam * np.sin(angle))
    return complex(float(re), float(im))


def lambda_sum_envelope(h: int, x: float, gamma: float) -> float:
    """Combined Type I/II shape for max_v |Σ_{x/2<n≤v} Λ(n)e(hn^γ + m1 n + m2)| (ε dropped)."""
    if h == 0:
        raise PreconditionError("envelope needs h != 0")
    ah = abs(h)
    return (
        ah ** (1 / 6) * x ** (gamma / 6 + 3 / 4)
        + ah ** (-1 / 3) * x ** (1 - gamma / 3)
        + ah ** (1 / 4) * x ** (gamma / 4 + 5 / 8)
        + ah ** (-1 / 4) * x ** (1 - gamma / 4)
        + x ** (22 / 25)
    )


@dataclass
class ExpsumReport:
    """One row comparing a direct sum with a bound shape."""

    lemma: str
    params: dict = field(default_factory=dict)
    direct_value: float = 0.0
    envelope: float = 0.0
    ratio: float = 0.0
    ok: Optional[bool] = None

    def to_row(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": ";".join(f"{k}={v}" for k, v in self.params.items()),
            "direct_value": f"{self.direct_value:.12g}",
            "envelope": f"{self.envelope:.12g}",
            "ratio": f"{self.ratio:.6g}",
        }


def lambda_expsum_max(phase: PhaseSpec, x: int) -> ExpsumReport:
    """max over x/2 < v ≤ x of |Σ_{x/2<n≤v} Λ(n) e(f(n))| against the combined envelope."""
    if x > DIRECT_SUM_LIMIT:
        raise ResourceLimitError(f"direct sum limit is {DIRECT_SUM_LIMIT}, got x={x}")
    best = 0.0
    re0 = np.longdouble(0)
    im0 = np.longdouble(0)
    for n, lam in _lambda_terms(x // 2, x):
        angle = _TWO_PI_LD * phase.frac_values(n)
        re = re0 + np.cumsum(lam * np.cos(angle))
        im = im0 + np.cumsum(lam * np.sin(angle))
        if re.size:
            best = max(best, float(np.max(np.hypot(re, im))))
            re0, im0 = re[-1], im[-1]
    env = lambda_sum_envelope(phase.h, x, float(phase.gamma))
    return ExpsumReport("lambda-max", {"phase": str(phase), "x": x}, best, env, best / env)


# ---------------------------------------------------------------------------
# Heath-Brown identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HBParams:
    """Parameters of the Heath-Brown identity, valid for ``n <= 2*z**k``."""

    z: float
    k: int

    def __post_init__(self) -> None:
        if self.z < 1 or self.k < 1:
            raise PreconditionError(f"need z >= 1 and k >= 1, got z={self.z}, k={self.k}")


@functools.lru_cache(maxsize=None)
def _divisors(n: int) -> tuple[int, ...]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return tuple(small + large[::-1])


@functools.lru_cache(maxsize=None)
def _mu_power(d: int, j: int, z: float) -> int:
    """Σ_{m_1⋯m_j = d, all m_i ≤ z} μ(m_1)⋯μ(m_j)."""
    if j == 0:
        return 1 if d == 1 else 0
    return sum(mobius(m) * _mu_power(d // m, j - 1, z) for m in _divisors(d) if m <= z)


@functools.lru_cache(maxsize=None)
def _tau(e: int, j: int) -> int:
    """Number of ordered factorisations of ``e`` into ``j`` factors."""
    if j == 0:
        return 1 if e == 1 else 0
    if j == 1:
        return 1
    return sum(_tau(e // m, j - 1) for m in _divisors(e))


def heath_brown_coefficients(n: int, params: HBParams) -> dict[int, int]:
    """Integer weights ``c(n1)`` with RHS = Σ c(n1) log n1."""
    if n < 1:
        raise PreconditionError(f"heath_brown_check needs n >= 1, got {n}")
    if n > 2 * params.z ** params.k:
        raise PreconditionError(f"n={n} exceeds 2*z^k={2 * params.z ** params.k}")
    coef: dict[int, int] = {}
    for j in range(1, params.k + 1):
        sign = (-1) ** (j - 1) * math.comb(params.k, j)
        for d in _divisors(n):
            md = _mu_power(d, j, params.z)
            if not md:
                continue
            rest = n // d
            for n1 in _divisors(rest):
                t = _tau(rest // n1, j - 1)
                if t and n1 > 1:
                    coef[n1] = coef.get(n1, 0) + sign * md * t
    return {k: v for k, v in coef.items() if v}


def heath_brown_check(n: int, params: HBParams) -> float:
    """|Σ_j (−1)^{j−1} C(k,j) Σ (log n_1) μ(n_{j+1})⋯μ(n_{2j}) − Λ(n)|.

    The inner sum runs over ``n_1⋯n_{2j} = n`` with ``n_{j+1}, …, n_{2j} <= z``
    and is enumerated exhaustively through memoised divisor lists.
    """
    coef = heath_brown_coefficients(n, params)
    with mpmath.workprec(128):
        rhs = mpmath.fsum(c * mpmath.log(n1) for n1, c in coef.items())
        pk = prime_power(n)
        lam = mpmath.log(pk[0]) if pk else mpmath.mpf(0)
        return float(abs(rhs - lam))


# ---------------------------------------------------------------------------
# Derivative tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonomialPhase:
    """The family ``f(n) = coef * n**exponent`` (λ_j known in closed form)."""

    coef: float
    exponent: Union[Fraction, float]

    @classmethod
    def from_phase(cls, phase: PhaseSpec) -> "MonomialPhase":
        # the linear part of a phase does not change f'' or f'''
        return cls(float(phase.h), phase.gamma)

    def derivative_scale(self, j: int) -> float:
        """|coef * g(g-1)...(g-j+1)|, so that |f^(j)(n)| = scale * n**(g-j)."""
        out = abs(self.coef)
        g = float(self.exponent)
        for i in range(j):
            out *= abs(g - i)
        return out

    def frac_values(self, n: np.ndarray) -> np.ndarray:
        nl = n.astype(np.longdouble)
        if isinstance(self.exponent, Fraction) and self.exponent.denominator == 1 and self.exponent >= 0:
            # integer powers reduce exactly before the multiply
            power = np.power(nl, int(self.exponent))
        else:
            power = np.power(nl, np.longdouble(float(self.exponent)))
        return np.mod(np.longdouble(self.coef) * power, 1)

    def __str__(self) -> str:
        return f"{self.coef:g}*n^{self.exponent}"


def vdc_bound_check(
    family: Union[MonomialPhase, PhaseSpec],
    a: int,
    order: int,
    bound: float = DEFAULT_C_BOUND,
) -> ExpsumReport:
    """|Σ_{a<n≤2a} e(f(n))| against the second or third derivative test.

    Envelopes are ``a λ_2^{1/2} + λ_2^{-1/2}`` and
    ``a λ_3^{1/6} + λ_3^{-1/3}`` with λ_j the geometric mean of
    ``|f^(j)|`` over the endpoints.  ``ok`` is ``ratio <= bound``.

    Raises
    ------
    PreconditionError
        If λ_order vanishes, or |f^(order)| leaves [λ/4, 4λ] somewhere on [a, 2a].
    """
    if order not in (2, 3):
        raise PreconditionError(f"order must be 2 or 3, got {order}")
    if a < 1:
        raise PreconditionError(f"need a >= 1, got {a}")
    if isinstance(family, PhaseSpec):
        family = MonomialPhase.from_phase(family)
    scale = family.derivative_scale(order)
    if scale == 0:
        raise PreconditionError(f"lambda_{order} vanishes for {family}; family rejected")
    g = float(family.exponent)
    lam_a = scale * a ** (g - order)
    lam_b = scale * (2 * a) ** (g - order)
    lam = math.sqrt(lam_a * lam_b)
    if max(lam_a, lam_b) / lam > 4:
        raise PreconditionError(f"|f^({order})| is not within a factor 4 of lambda on [a, 2a] for {family}; family rejected")

    angle = _TWO_PI_LD * family.frac_values(np.arange(a + 1, 2 * a + 1, dtype=np.int64))
    direct = float(np.hypot(np.sum(np.cos(angle)), np.sum(np.sin(angle))))
    if order == 2:
        env = a * lam ** 0.5 + lam ** -0.5
    else:
        env = a * lam ** (1 / 6) + lam ** (-1 / 3)
    ratio = direct / env
    return ExpsumReport(f"vdc-{order}", {"f": str(family), "a": a}, direct, env, ratio, ratio <= bound)


# ---------------------------------------------------------------------------
# Type I / Type II sums
# ---------------------------------------------------------------------------

def _coeff_vector(spec: Union[str, Callable[[int], float], None], lo: int, hi: int, default: str) -> np.ndarray:
    spec = default if spec is None else spec
    ks = range(lo, hi)
    if callable(spec):
        return np.array([spec(k) for k in ks], dtype=np.float64)
    if spec == "one":
        return np.ones(hi - lo)
    if spec == "log":
        return np.log(np.arange(lo, hi, dtype=np.float64))
    if spec == "mu":
        tables = sieve_segment(lo, hi)
        return tables.mu.astype(np.float64)
    raise PreconditionError(f"unknown coefficient kind {spec!r}")


def type_i_envelope(h: int, x: float, gamma: float) -> float:
    ah = abs(h)
    return ah ** (1 / 6) * x ** (gamma / 6 + 3 / 4) + ah ** (-1 / 3) * x ** (1 - gamma / 3)


def type_ii_envelope(h: int, x: float, gamma: float) -> float:
    ah = abs(h)
    return (
        ah ** (1 / 4) * x ** (gamma / 4 + 5 / 8)
        + ah ** (-1 / 4) * x ** (1 - gamma / 4)
        + x ** (22 / 25)
        + ah ** (1 / 6) * x ** (gamma / 6 + 3 / 4)
    )


def type_sum_eval(
    kind: str,
    K: int,
    L: int,
    phase: PhaseSpec,
    a_coeffs: Union[str, Callable[[int], float], None] = None,
    b_coeffs: Union[str, Callable[[int], float], None] = None,
    x: Optional[float] = None,
) -> ExpsumReport:
    """Σ_{k∼K} Σ_{ℓ∼L} a_k b_ℓ e(h(kℓ)^γ + m1 kℓ + m2) against its envelope.

    ``k ∼ K`` means ``K < k <= 2K``.  Coefficients are ``"one"``, ``"log"``,
    ``"mu"`` or a callable; defaults are ``a=one, b=one`` for Type I and
    ``a=mu, b=mu`` for Type II.

    Raises
    ------
    PreconditionError
        If the K-range condition of the requested type fails, or h == 0.
    ResourceLimitError
        If K*L exceeds 10^7.
    """
    kind = kind.upper()
    if kind not in ("I", "II"):
        raise PreconditionError(f"kind must be 'I' or 'II', got {kind!r}")
    if phase.h == 0:
        raise PreconditionError("type sums need h != 0")
    if K * L > TYPE_SUM_LIMIT:
        raise ResourceLimitError(f"K*L={K * L} exceeds {TYPE_SUM_LIMIT}")
    x = float(K * L if x is None else x)
    if kind == "I" and K > RANGE_SLACK * x ** 0.5:
        raise PreconditionError(f"Type I needs K << x^(1/2); K={K}, x={x:g}")
    if kind == "II" and not (x ** 0.5 / RANGE_SLACK <= K <= RANGE_SLACK * x ** (19 / 25)):
        raise PreconditionError(f"Type II needs x^(1/2) << K << x^(19/25); K={K}, x={x:g}")

    default = "one" if kind == "I" else "mu"
    a = _coeff_vector(a_coeffs, K + 1, 2 * K + 1, default)
    b = _coeff_vector(b_coeffs, L + 1, 2 * L + 1, default)
    ells = np.arange(L + 1, 2 * L + 1, dtype=np.int64)
    re = np.longdouble(0)
    im = np.longdouble(0)
    for i, k in enumerate(range(K + 1, 2 * K + 1)):
        if a[i] == 0:
            continue
        angle = _TWO_PI_LD * phase.frac_values(k * ells)
        re += a[i] * np.sum(b * np.cos(angle))
        im += a[i] * np.sum(b * np.sin(angle))
    direct = float(np.hypot(re, im))
    g = float(phase.gamma)
    env = type_i_envelope(phase.h, x, g) if kind == "I" else type_ii_envelope(phase.h, x, g)
    return ExpsumReport(
        f"type-{kind}",
        {"K": K, "L": L, "x": int(x), "phase": str(phase)},
        direct, env, direct / env,
    )


# ---------------------------------------------------------------------------
# Prime sums with rational approximations / finite type
# ---------------------------------------------------------------------------

def davenport_bound_check(alpha: QuadraticSurd, N: int) -> ExpsumReport:
    """|Σ_{m≤N} Λ(m)e(mα)| against (N q^{−1/2} + N^{4/5} + N^{1/2} q^{1/2})(log N)^4.

    ``a/q`` is the best convergent of α with ``q <= sqrt(N)``.
    """
    from bpsprimes.diophantine import best_approx  # noqa: PLC0415

    _, q, _ = best_approx(alpha, max(1, math.isqrt(N)))
    direct = abs(lambda_expsum(PhaseSpec(m1=alpha), 0, N))
    env = (N * q ** -0.5 + N ** 0.8 + N ** 0.5 * q ** 0.5) * math.log(N) ** 4
    return ExpsumReport("davenport", {"alpha": str(alpha), "N": N, "q": q}, direct, env, direct / env)


def finite_type_bound_check(alpha: QuadraticSurd, h: int, M: int, tau: float = 1.0) -> ExpsumReport:
    """|Σ_{m≤M} Λ(m)e(αhm)| against h^{1/2} M^{1−1/(2τ)} (ε dropped)."""
    if h < 1:
        raise PreconditionError(f"need h >= 1, got {h}")
    direct = abs(lambda_expsum(PhaseSpec(m1=QuadraticSurd.coerce(alpha) * h), 0, M))
    env = h ** 0.5 * M ** (1 - 1 / (2 * tau))
    return ExpsumReport("finite-type", {"alpha": str(alpha), "h": h, "M": M, "tau": tau}, direct, env, direct / env)


# ---------------------------------------------------------------------------
# Parameter choice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeTerm:
    """``coef * Q**power`` with ``coef > 0`` and ``power != 0``."""

    coef: float
    power: float


def envelope_value(terms: Sequence[EnvelopeTerm], Q: float) -> float:
    return sum(t.coef * Q ** t.power for t in terms)


def _check_terms(terms: Sequence[EnvelopeTerm], Q1: float, Q2: float) -> None:
    if not terms:
        raise PreconditionError("envelope has no terms")
    for t in terms:
        if t.coef <= 0 or t.power == 0:
            raise PreconditionError(f"envelope terms need coef > 0 and power != 0, got {t}")
    if not 0 < Q1 <= Q2:
        raise PreconditionError(f"need 0 < Q1 <= Q2, got {Q1}, {Q2}")


def optimal_q_select(terms: Sequence[EnvelopeTerm], Q1: float, Q2: float = math.inf) -> float:
    """Q in [Q1, Q2] minimising Σ coef·Q^power.

    The envelope is convex in ``log Q``; golden-section search runs on
    ``log Q`` and the endpoints are compared at the end.
    """
    _check_terms(terms, Q1, Q2)
    u_lo = math.log(Q1)
    if math.isinf(Q2):
        if not any(t.power > 0 for t in terms):
            raise PreconditionError("envelope decreases without bound on [Q1, inf)")
        step = 1.0
        # grow the bracket until the log-derivative turns positive
        while sum(t.coef * t.power * math.exp(t.power * (u_lo + step)) for t in terms) <= 0:
            step *= 2
        u_hi = u_lo + step
    else:
        u_hi = math.log(Q2)

    f = lambda u: envelope_value(terms, math.exp(u))  # noqa: E731
    ratio = (math.sqrt(5) - 1) / 2
    a, b = u_lo, u_hi
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a < 1e-13:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = f(d)
    candidates = [math.exp((a + b) / 2), Q1]
    if not math.isinf(Q2):
        candidates.append(Q2)
    return min(candidates, key=lambda q: envelope_value(terms, q))


def srinivasan_bound(terms: Sequence[EnvelopeTerm], Q1: float, Q2: float = math.inf) -> float:
    """Σ A_i Q1^{a_i} + Σ B_j Q2^{−b_j} + Σ_{i,j} (A_i^{b_j} B_j^{a_i})^{1/(a_i+b_j)}."""
    _check_terms(terms, Q1, Q2)
    grow = [t for t in terms if t.power > 0]
    decay = [t for t in terms if t.power < 0]
    total = sum(t.coef * Q1 ** t.power for t in grow)
    if not math.isinf(Q2):
        total += sum(t.coef * Q2 ** t.power for t in decay)
    for A in grow:
        for B in decay:
            ai, bj = A.power, -B.power
            total += (A.coef ** bj * B.coef ** ai) ** (1 / (ai + bj))
    return total


def weyl_split_terms(h: int, K: float, L: float, gamma: float) -> list[EnvelopeTerm]:
    """The three-term bound in Q from the Weyl-van der Corput step of the Type II estimate."""
    ah = abs(h)
    return [
        EnvelopeTerm(K ** 2 * L ** 2, -1.0),
        EnvelopeTerm(ah ** 0.5 * K ** (1 + gamma / 2) * L ** (gamma / 2 + 1.5), 0.5),
        EnvelopeTerm(ah ** -0.5 * K ** (2 - gamma / 2) * L ** (2.5 - gamma / 2), -0.5),
    ]
