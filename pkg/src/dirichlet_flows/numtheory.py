"""Small multiplicative number theory helpers: primes, factorization, divisor counts."""

from __future__ import annotations

import numpy as np


def primes_upto(n: int) -> np.ndarray:
    """Sieve of Eratosthenes. Returns the primes ``<= n`` in increasing order."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def factorize(n: int) -> dict[int, int]:
    """Trial division; returns ``{prime: exponent}``."""
    if n < 1:
        raise ValueError(f"factorize expects a positive integer, got {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_index(p: int) -> int:
    """1-based position of the prime ``p`` in the sequence 2, 3, 5, ..."""
    return int(np.searchsorted(primes_upto(p), p)) + 1


def divisor_counts(n: int) -> np.ndarray:
    """``d(k)`` for ``k = 1..n`` (index ``k-1``)."""
    d = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        d[k - 1 :: k] += 1
    return d


def divisor_count(n: int) -> int:
    c = 1
    for e in factorize(n).values():
        c *= e + 1
    return c


def exponent_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Prime-exponent table for ``1..n``.

    Returns ``(primes, K)`` with ``K[k-1, j]`` the exponent of ``primes[j]`` in ``k``.
    """
    primes = primes_upto(n)
    K = np.zeros((n, len(primes)), dtype=np.int64)
    for j, p in enumerate(primes):
        pk = int(p)
        while pk <= n:
            K[pk - 1 :: pk, j] += 1
            pk *= int(p)
    return primes, K
