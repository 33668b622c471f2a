"""Exact integer utilities: primality, factorization, totients, k-th roots.

Everything here is deterministic. Miller-Rabin uses a base set that is
proven complete below 3.3 * 10^24, far beyond the 2^40 modulus cap and the
2^62 sieve ceiling enforced elsewhere.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import PreconditionError

# Moduli handled by the exact local-arithmetic routines.  Python integers
# are unbounded, but factorization below is trial division, so keep the
# supported range where that stays fast.
MAX_MODULUS = 1 << 40

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def sieve_upto(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (simple Eratosthenes)."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    return tuple(int(p) for p in sieve_upto(100_000))


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; requires 1 <= n < 2^40."""
    n = int(n)
    if n < 1:
        raise PreconditionError("MODULUS", f"cannot factor {n}")
    if n >= MAX_MODULUS:
        raise PreconditionError("MODULUS", f"{n} exceeds the 2^40 modulus cap")
    factors: dict[int, int] = {}
    for p in _small_primes():
        if p * p > n:
            break
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    if n > 1:
        # leftover cofactor is prime: no factor <= 1e5 and n < 2^40 < (1e5)^2 * 1e2
        if not is_prime(n):  # pragma: no cover - unreachable below 1e10
            raise PreconditionError("MODULUS", f"residual cofactor {n} not prime")
        factors[n] = factors.get(n, 0) + 1
    return factors


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in factorize(n).items():
        phi *= (p - 1) * p ** (e - 1)
    return phi


def mobius(n: int) -> int:
    mu = 1
    for _, e in factorize(n).items():
        if e > 1:
            return 0
        mu = -mu
    return mu


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def integer_kth_root(n: int, k: int) -> int:
    """Largest r with r^k <= n, exact (Newton iteration plus fix-up)."""
    n = int(n)
    if n < 0 or k < 1:
        raise PreconditionError("ROOT_DOMAIN", f"kth root undefined for n={n}, k={k}")
    if n == 0:
        return 0
    if k == 1:
        return n
    r = int(round(n ** (1.0 / k)))
    if r < 1:
        r = 1
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def is_perfect_kth_power(n: int, k: int) -> tuple[bool, int]:
    """(True, r) when n == r^k for an integer r >= 0, else (False, root)."""
    r = integer_kth_root(n, k)
    return r**k == n, r


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    """Solve x = r1 (mod m1), x = r2 (mod m2); returns (x, lcm).

    Raises PreconditionError(UNSOLVABLE) when the congruences conflict.
    """
    g = math.gcd(m1, m2)
    if (r1 - r2) % g != 0:
        raise PreconditionError("UNSOLVABLE", f"no x with x={r1} mod {m1}, x={r2} mod {m2}")
    l = m1 // g * m2
    t = ((r2 - r1) // g * pow(m1 // g, -1, m2 // g)) % (m2 // g) if m2 != g else 0
    return (r1 + m1 * t) % l, l
