"""Prime sieve and the modified von Mangoldt weights.

``Lambda'(n) = log n`` on primes and 0 elsewhere (prime powers get no
weight).  The W-trick weight is ``Lambda'_{w,r}(n) = phi(W)/W * Lambda'(W n + r)``
where ``W`` is the product of the primes below ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

#: Largest limit accepted by :func:`primes_up_to` unless overridden.
SIEVE_CAP = 2 * 10**9
#: Limits above this are sieved segment by segment.
SEGMENT_THRESHOLD = 10**8
SEGMENT_SIZE = 1 << 24


class SieveTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SieveTable:
    limit: int
    is_prime: np.ndarray = field(repr=False)  # bool array indexed 0..limit
    primes: np.ndarray = field(repr=False)

    @property
    def pi(self) -> int:
        return int(self.primes.size)

    def pi_of(self, n) -> np.ndarray | int:
        """Prime-counting function for ``n <= limit`` (scalar or array)."""
        res = np.searchsorted(self.primes, n, side="right")
        return int(res) if np.ndim(res) == 0 else res

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.limit and bool(self.is_prime[n])


def _small_sieve(N: int) -> np.ndarray:
    flags = np.ones(N + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(N) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags


def _segmented_sieve(N: int) -> np.ndarray:
    root = math.isqrt(N)
    base = np.flatnonzero(_small_sieve(root))
    flags = np.empty(N + 1, dtype=bool)
    flags[: root + 1] = _small_sieve(root)
    lo = root + 1
    while lo <= N:
        hi = min(lo + SEGMENT_SIZE, N + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = max(p * p, -(-lo // p) * p)
            if start >= hi:
                continue
            seg[start - lo::p] = False
        flags[lo:hi] = seg
        lo = hi
    return flags


def primes_up_to(N: int, cap: int = SIEVE_CAP) -> SieveTable:
    """Sieve of Eratosthenes on ``[0, N]``."""
    if N < 2:
        raise ValueError("sieve limit must be at least 2")
    if N > cap:
        raise SieveTooLarge(f"limit {N} exceeds the sieve cap {cap}")
    flags = _segmented_sieve(N) if N > SEGMENT_THRESHOLD else _small_sieve(N)
    flags.setflags(write=False)
    primes = np.flatnonzero(flags).astype(np.int64)
    primes.setflags(write=False)
    return SieveTable(N, flags, primes)


@lru_cache(maxsize=4)
def _cached_sieve(N: int) -> SieveTable:
    return primes_up_to(N)


def sieve_covering(n: int) -> SieveTable:
    """A shared sieve with limit at least ``n`` (grown geometrically)."""
    limit = 1 << max(10, int(n).bit_length())
    return _cached_sieve(max(limit, 2))


def _is_prime_scalar(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    if n in small:
        return True
    if any(n % p == 0 for p in small):
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic Miller-Rabin for n < 3.3e24
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    return _is_prime_scalar(int(n))


def lambda_prime(n, table: SieveTable | None = None):
    """``Lambda'(n)``: ``log n`` for prime ``n``, else 0.

    Accepts an integer or an integer array; arrays are looked up in a sieve.
    """
    if np.ndim(n) == 0:
        n = int(n)
        if n < 1:
            raise ValueError("n must be positive")
        return math.log(n) if is_prime(n) else 0.0
    arr = np.asarray(n, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(arr.shape)
    if arr.min() < 1:
        raise ValueError("n must be positive")
    top = int(arr.max())
    if table is None or table.limit < top:
        table = sieve_covering(top)
    return np.where(table.is_prime[arr], np.log(arr.astype(float)), 0.0)


def W_of(w: int) -> tuple[int, int]:
    """``(W, phi(W))`` with ``W`` the product of the primes ``p <= w - 1``."""
    if w <= 2:
        raise ValueError("w must exceed 2")
    W = phi = 1
    for p in range(2, w):
        if is_prime(p):
            W *= p
            phi *= p - 1
    return W, phi


def modified_lambda(w: int, r: int, n, table: SieveTable | None = None):
    """``Lambda'_{w,r}(n) = phi(W)/W * Lambda'(W n + r)``."""
    W, phi = W_of(w)
    if not 1 <= r <= W:
        raise ValueError(f"r must lie in [1, {W}]")
    scale = phi / W
    if np.ndim(n) == 0:
        return scale * lambda_prime(W * int(n) + r)
    arr = np.asarray(n, dtype=np.int64)
    return scale * lambda_prime(W * arr + r, table)
