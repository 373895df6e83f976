"""
arith.py – Segmented sieve and multiplicative-function tables.

Supplies primes, the von Mangoldt function Λ(n), the Möbius function μ(n)
and deterministic 64-bit primality.  Tables are produced one segment
``[lo, hi)`` at a time; Λ is kept structurally as ``(p, k)`` with
``n = p**k`` and its logarithm is only taken when a caller asks for it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from bpsprimes.errors import PreconditionError, ResourceLimitError
from bpsprimes.exactnum import iroot

logger = logging.getLogger(__name__)

SEGMENT_SIZE = 2 ** 22
MAX_RANGE = 1 << 63
U64_LIMIT = 1 << 64

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# bases 2..37 are deterministic below 3.3e24; 2, 3, 5, 7 suffice below 3215031751
_MR_BASES = _SMALL_PRIMES
_MR_SMALL_BASES = (2, 3, 5, 7)
_MR_SMALL_LIMIT = 3_215_031_751
# bases 2..11 are deterministic below 2152302898747, which covers MR_LIMIT
_MR_ARRAY_BASES = (2, 3, 5, 7, 11)
MR_LIMIT = 1 << 32


@dataclass(frozen=True, eq=False)
class ArithTables:
    """Sieve products for the half-open range ``[lo, hi)``.

    ``lambda_prime[i]`` is ``p`` when ``lo + i == p**k`` (else 0) and
    ``lambda_exp[i]`` is the matching ``k``.  All arrays are read-only.
    """

    lo: int
    hi: int
    is_prime: np.ndarray
    lambda_prime: np.ndarray
    lambda_exp: np.ndarray
    mu: np.ndarray

    def __len__(self) -> int:
        return self.hi - self.lo

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime).astype(np.int64) + self.lo

    def lambda_values(self) -> np.ndarray:
        """Λ(n) for the whole segment as ``np.longdouble``."""
        out = np.zeros(len(self), dtype=np.longdouble)
        nz = self.lambda_prime > 0
        out[nz] = np.log(self.lambda_prime[nz].astype(np.longdouble))
        return out

    def _index(self, n: int) -> int:
        if not self.lo <= n < self.hi:
            raise IndexError(f"{n} outside table range [{self.lo}, {self.hi})")
        return n - self.lo

    def mu_at(self, n: int) -> int:
        return int(self.mu[self._index(n)])

    def lambda_at(self, n: int) -> float:
        p = int(self.lambda_prime[self._index(n)])
        return math.log(p) if p else 0.0


# ---------------------------------------------------------------------------
# Sieving
# ---------------------------------------------------------------------------

# (limit, primes <= limit) of the largest base sieve built so far
_BASE: tuple[int, np.ndarray] = (1, np.array([], dtype=np.int64))


def _odd_sieve(limit: int) -> np.ndarray:
    """Primes ``<= limit`` from an odd-only sieve of ``(limit + 1) // 2`` flags."""
    # flag i stands for 2i + 1
    is_prime = np.ones((limit + 1) // 2, dtype=bool)
    is_prime[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if is_prime[i]:
            p = 2 * i + 1
            is_prime[p * p // 2 :: p] = False
    odd = 2 * np.flatnonzero(is_prime).astype(np.int64) + 1
    return np.concatenate((np.array([2], dtype=np.int64), odd))


def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit``; the base table grows to exactly the largest limit requested."""
    global _BASE
    if limit < 2:
        return np.array([], dtype=np.int64)
    if limit > _BASE[0]:
        logger.debug("base sieve grows to %d", limit)
        _BASE = (limit, _odd_sieve(limit))
    base = _BASE[1]
    return base[: np.searchsorted(base, limit, side="right")]


def _check_range(lo: int, hi: int, segment_size: int) -> None:
    if lo < 1 or hi <= lo:
        raise PreconditionError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi > MAX_RANGE:
        raise ResourceLimitError(f"range end {hi} exceeds 2^63")
    if hi - lo > segment_size:
        raise ResourceLimitError(f"segment too large: {hi - lo} > {segment_size}")


def _prime_mask(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    mask = np.ones(hi - lo, dtype=bool)
    for n in range(lo, min(hi, 2)):
        mask[n - lo] = False
    for p in base.tolist():
        pp = p * p
        if pp >= hi:
            break
        start = max(pp, -(-lo // p) * p)
        mask[start - lo :: p] = False
    return mask


def prime_mask(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> np.ndarray:
    """Boolean primality mask for ``[lo, hi)`` (bitset only, no Λ/μ)."""
    _check_range(lo, hi, segment_size)
    return _prime_mask(lo, hi, small_primes(math.isqrt(hi - 1)))


def sieve_segment(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> ArithTables:
    """Sieve ``[lo, hi)`` into primality, Λ and μ tables.

    ``lo`` may be 1 so that μ(1) = 1 is available to divisor-sum checks.

    Raises
    ------
    ResourceLimitError
        If ``hi - lo`` exceeds *segment_size* or ``hi > 2**63``.
    """
    _check_range(lo, hi, segment_size)
    size = hi - lo
    base = small_primes(math.isqrt(hi - 1))
    is_prime = _prime_mask(lo, hi, base)

    numbers = np.arange(lo, hi, dtype=np.int64)
    rem = numbers.copy()
    mu = np.ones(size, dtype=np.int8)
    lam_p = np.zeros(size, dtype=np.int64)
    lam_k = np.zeros(size, dtype=np.int8)

    for p in base.tolist():
        start = -(-lo // p) * p
        if start < hi:
            sl = slice(start - lo, None, p)
            mu[sl] *= -1
            rem[sl] //= p
        pp = p * p
        start = -(-lo // pp) * pp
        if start < hi:
            mu[start - lo :: pp] = 0
        k, pk = 2, pp
        while pk < hi:
            if pk >= lo:
                lam_p[pk - lo] = p
                lam_k[pk - lo] = k
            k += 1
            pk *= p

    # a square-free n keeps at most one prime factor above sqrt(hi)
    mu[rem > 1] *= -1
    lam_p[is_prime] = numbers[is_prime]
    lam_k[is_prime] = 1

    for arr in (is_prime, lam_p, lam_k, mu):
        arr.flags.writeable = False
    logger.debug("sieved segment [%d, %d)", lo, hi)
    return ArithTables(lo, hi, is_prime, lam_p, lam_k, mu)


def iter_segments(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> Iterator[tuple[int, int]]:
    """Split ``[lo, hi)`` into consecutive segments of at most *segment_size*."""
    start = lo
    while start < hi:
        end = min(start + segment_size, hi)
        yield start, end
        start = end


def iter_prime_blocks(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> Iterator[np.ndarray]:
    """Yield the primes of ``[lo, hi)`` one segment at a time."""
    lo = max(lo, 2)
    for a, b in iter_segments(lo, hi, segment_size):
        mask = prime_mask(a, b, segment_size)
        yield np.flatnonzero(mask).astype(np.int64) + a


def primes_between(lo: int, hi: int, segment_size: int = SEGMENT_SIZE) -> np.ndarray:
    blocks = list(iter_prime_blocks(lo, hi, segment_size))
    return np.concatenate(blocks) if blocks else np.array([], dtype=np.int64)


def prime_pi(x: int, segment_size: int = SEGMENT_SIZE) -> int:
    """π(x) by summing sieve segments."""
    if x < 2:
        return 0
    return sum(int(prime_mask(a, b, segment_size).sum()) for a, b in iter_segments(2, x + 1, segment_size))


def chebyshev_psi(x: int, lo: int = 0, segment_size: int = SEGMENT_SIZE) -> float:
    """Σ_{lo < n <= x} Λ(n), accumulated in extended precision."""
    total = np.longdouble(0)
    for a, b in iter_segments(max(lo + 1, 1), x + 1, segment_size):
        total += sieve_segment(a, b, segment_size).lambda_values().sum()
    return float(total)


# ---------------------------------------------------------------------------
# Single-value routines
# ---------------------------------------------------------------------------

def is_prime_u64(n: int) -> bool:
    """Deterministic Miller-Rabin primality for ``0 <= n < 2**64``."""
    if n < 0 or n >= U64_LIMIT:
        raise ValueError(f"is_prime_u64 needs 0 <= n < 2^64, got {n}")
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_SMALL_BASES if n < _MR_SMALL_LIMIT else _MR_BASES
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_power(n: int) -> Optional[tuple[int, int]]:
    """Return ``(p, k)`` with ``n == p**k`` for prime ``p``, else ``None``."""
    if n < 2:
        return None
    for k in range(n.bit_length(), 0, -1):
        r = iroot(n, k)
        if r >= 2 and r ** k == n and is_prime_u64(r):
            return r, k
    return None


def von_mangoldt(n: int) -> float:
    """Λ(n): ``log p`` if ``n == p**k``, else 0."""
    if n < 1:
        raise PreconditionError(f"von_mangoldt needs n >= 1, got {n}")
    pk = prime_power(n)
    return math.log(pk[0]) if pk else 0.0


def mobius(n: int) -> int:
    """μ(n) by trial division."""
    if n < 1:
        raise PreconditionError(f"mobius needs n >= 1, got {n}")
    result = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def _powmod_array(base: np.ndarray, exp: np.ndarray, mod: np.ndarray) -> np.ndarray:
    # operands stay below 2^32, so products fit in uint64
    result = np.ones_like(mod)
    b = base % mod
    e = exp.copy()
    while np.any(e):
        odd = (e & np.uint64(1)).astype(bool)
        result = np.where(odd, result * b % mod, result)
        b = b * b % mod
        e >>= np.uint64(1)
    return result


def is_prime_array(ns: np.ndarray) -> np.ndarray:
    """Vectorised deterministic primality for an int64 array.

    Values below ``MR_LIMIT`` (2^32) go through a numpy Miller-Rabin with
    bases 2, 3, 5, 7, 11; larger values fall back to :func:`is_prime_u64`.
    """
    ns = np.asarray(ns, dtype=np.int64)
    out = np.zeros(ns.shape, dtype=bool)
    small = (ns >= 2) & (ns < MR_LIMIT)
    for i in np.flatnonzero(ns >= MR_LIMIT):
        out[i] = is_prime_u64(int(ns[i]))

    idx = np.flatnonzero(small)
    n = ns[idx].astype(np.uint64)
    alive = np.ones(n.shape, dtype=bool)
    for p in _SMALL_PRIMES:
        hit = n % np.uint64(p) == 0
        out[idx[hit & (n == p)]] = True
        alive &= ~hit
    # survivors of trial division below 41^2 are prime
    done = alive & (n < 41 * 41)
    out[idx[done]] = True
    alive &= ~done
    if not alive.any():
        return out

    idx, n = idx[alive], n[alive]
    d = n - np.uint64(1)
    s = np.zeros(n.shape, dtype=np.uint64)
    while True:
        even = (d & np.uint64(1)) == 0
        if not even.any():
            break
        d = np.where(even, d >> np.uint64(1), d)
        s += even.astype(np.uint64)

    prime = np.ones(n.shape, dtype=bool)
    n_minus = n - np.uint64(1)
    for a in _MR_ARRAY_BASES:
        x = _powmod_array(np.full(n.shape, a, dtype=np.uint64), d, n)
        passed = (x == 1) | (x == n_minus)
        for r in range(1, int(s.max())):
            x = x * x % n
            passed |= (x == n_minus) & (s > r)
        prime &= passed
    out[idx] = prime
    return out
