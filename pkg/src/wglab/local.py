"""Exact arithmetic of the local congruence obstructions.

Computes the congruence skeleton of the Waring-Goldbach problem for a
fixed power k: the modulus R_k built from primes p with (p-1) | k, the
counts of k-th power roots mod W, and the number of ways to write a
residue as a sum of s k-th powers of units, with prime-power lifting and
CRT recombination.  All counts are exact integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .convolve import cyclic_self_power
from .errors import PreconditionError
from .intmath import MAX_MODULUS, crt_pair, factorize, is_prime

_MAX_ENUMERATED_MODULUS = 1 << 22  # direct unit enumeration cap


@dataclass(frozen=True)
class LocalEntry:
    p: int
    tau: int
    gamma: int


@dataclass(frozen=True)
class LocalConstants:
    """Congruence constants for one power k: all primes with (p-1) | k."""

    k: int
    entries: tuple[LocalEntry, ...]
    modulus: int  # the product of p^gamma over the entries


@dataclass(frozen=True)
class CongruenceCount:
    h: int
    m: int
    k: int
    s: int
    count: int


def tau(k: int, p: int) -> int:
    """Exact exponent of the prime p in k."""
    if k < 2:
        raise PreconditionError("K_RANGE", f"k={k} must be >= 2")
    if not is_prime(p):
        raise PreconditionError("NOT_PRIME", f"p={p} is not prime")
    t = 0
    while k % p == 0:
        k //= p
        t += 1
    return t


def gamma(k: int, p: int) -> int:
    """Congruence exponent: tau+2 when p=2 divides k, else tau+1."""
    t = tau(k, p)
    if p == 2 and t > 0:
        return t + 2
    return t + 1


def waring_goldbach_modulus(k: int) -> LocalConstants:
    """All primes p with (p-1) | k, their exponents, and the product."""
    if k < 2:
        raise PreconditionError("K_RANGE", f"k={k} must be >= 2")
    entries = []
    modulus = 1
    for d in sorted(d for d in range(1, k + 1) if k % d == 0):
        p = d + 1
        if is_prime(p):
            g = gamma(k, p)
            entries.append(LocalEntry(p=p, tau=tau(k, p), gamma=g))
            modulus *= p**g
    return LocalConstants(k=k, entries=tuple(entries), modulus=modulus)


def _check_modulus(h: int) -> int:
    h = int(h)
    if h == 0:
        raise PreconditionError("MODULUS", "modulus 0")
    if h < 0 or h >= MAX_MODULUS:
        raise PreconditionError("MODULUS", f"modulus {h} outside [1, 2^40)")
    return h


def sigma_w(b: int, k: int, modulus: int) -> int:
    """Number of z in [1, modulus] with z^k = b (mod modulus), by enumeration."""
    modulus = _check_modulus(modulus)
    if not 1 <= b <= modulus:
        raise PreconditionError("RESIDUE", f"b={b} outside [1, {modulus}]")
    if modulus > _MAX_ENUMERATED_MODULUS:
        raise PreconditionError("MODULUS", f"enumeration cap is {_MAX_ENUMERATED_MODULUS}")
    target = b % modulus
    return sum(1 for z in range(1, modulus + 1) if pow(z, k, modulus) == target)


def kth_power_unit_residues(modulus: int, k: int) -> list[int]:
    """Sorted distinct values of y^k mod `modulus` over units y."""
    modulus = _check_modulus(modulus)
    if modulus > _MAX_ENUMERATED_MODULUS:
        raise PreconditionError("MODULUS", f"enumeration cap is {_MAX_ENUMERATED_MODULUS}")
    if modulus == 1:
        return [0]
    vals = {pow(y, k, modulus) for y in range(1, modulus) if math.gcd(y, modulus) == 1}
    return sorted(vals)


@lru_cache(maxsize=4096)
def _unit_power_histogram(modulus: int, k: int) -> tuple[int, ...]:
    """hist[r] = number of units y mod `modulus` with y^k = r."""
    if modulus == 1:
        return (1,)
    hist = [0] * modulus
    for y in range(1, modulus):
        if math.gcd(y, modulus) == 1:
            hist[pow(y, k, modulus)] += 1
    return tuple(hist)


@lru_cache(maxsize=4096)
def _count_vector(modulus: int, k: int, s: int) -> tuple[int, ...]:
    """vector[m] = #{(y_1..y_s) units mod `modulus` : sum y_i^k = m}."""
    hist = _unit_power_histogram(modulus, k)
    if modulus == 1:
        return (1,)
    return tuple(cyclic_self_power(list(hist), s, modulus))


def count_unit_solutions_direct(h: int, m: int, k: int, s: int) -> int:
    """Solution count at modulus h by direct enumeration of the k-th power
    map over units followed by exact s-fold convolution.  No CRT, no
    prime-power lifting: this is the oracle route."""
    h = _check_modulus(h)
    if h > _MAX_ENUMERATED_MODULUS:
        raise PreconditionError("MODULUS", f"enumeration cap is {_MAX_ENUMERATED_MODULUS}")
    if s < 1:
        raise PreconditionError("S_RANGE", f"s={s} must be >= 1")
    return _count_vector(h, k, s)[m % h]


def lift_prime_power(p: int, t: int, m: int, k: int, s: int) -> int:
    """Unit solution count at modulus p^t.

    For t <= gamma(k, p) the count is taken from direct enumeration at
    p^t.  For larger t each solution mod p^gamma lifts in exactly
    p^((t-gamma)(s-1)) ways, so the count is that multiple of the count
    at p^gamma.
    """
    if t < 1:
        raise PreconditionError("T_RANGE", f"t={t} must be >= 1")
    if s < 1:
        raise PreconditionError("S_RANGE", f"s={s} must be >= 1")
    g = gamma(k, p)
    if t <= g:
        return count_unit_solutions_direct(p**t, m % (p**t), k, s)
    base = _count_vector(p**g, k, s)[m % (p**g)]
    return p ** ((t - g) * (s - 1)) * base


def count_unit_solutions(h: int, m: int, k: int, s: int) -> CongruenceCount:
    """Ordered count of unit s-tuples with sum of k-th powers = m (mod h).

    Computed as a CRT product over the prime powers of h, each obtained by
    ``lift_prime_power``.
    """
    h = _check_modulus(h)
    if s < 1:
        raise PreconditionError("S_RANGE", f"s={s} must be >= 1")
    m = m % h
    count = 1
    for p, e in factorize(h).items():
        count *= lift_prime_power(p, e, m % p**e, k, s)
        if count == 0:
            break
    return CongruenceCount(h=h, m=m, k=k, s=s, count=count)


def _rotate_mask(mask: int, shift: int, modulus: int) -> int:
    """Cyclic left rotation of a `modulus`-bit reachability mask."""
    shift %= modulus
    full = (1 << modulus) - 1
    return ((mask << shift) | (mask >> (modulus - shift))) & full if shift else mask


def _reachable_sums(values: list[int], s: int, modulus: int) -> list[int]:
    """masks[j] has bit r set when r is a sum of j values (with repeats)."""
    masks = [1]
    for _ in range(s):
        prev = masks[-1]
        cur = 0
        for v in values:
            cur |= _rotate_mask(prev, v, modulus)
        masks.append(cur)
    return masks


def decompose_residue(n: int, w_mod: int, k: int, s: int) -> tuple[int, ...]:
    """Lexicographically smallest (b_1..b_s), each a k-th power of a unit
    mod `w_mod`, with b_1 + ... + b_s = n (mod `w_mod`).

    Raises PreconditionError(UNSOLVABLE) when no decomposition exists.
    """
    w_mod = _check_modulus(w_mod)
    if s < 1:
        raise PreconditionError("S_RANGE", f"s={s} must be >= 1")
    if w_mod == 1:
        return (1,) * s
    residues = kth_power_unit_residues(w_mod, k)
    masks = _reachable_sums(residues, s, w_mod)
    target = n % w_mod
    if not (masks[s] >> target) & 1:
        raise PreconditionError("UNSOLVABLE", f"no unit k-th power decomposition of {n} mod {w_mod}")
    out = []
    for remaining in range(s, 0, -1):
        for b in residues:
            rest = (target - b) % w_mod
            if (masks[remaining - 1] >> rest) & 1:
                out.append(b if b != 0 else w_mod)
                target = rest
                break
    return tuple(out)


def cauchy_davenport_check(p: int) -> bool:
    """True when the 4-fold sumset of nonzero squares covers Z_p (p >= 5)."""
    if p < 5 or not is_prime(p):
        raise PreconditionError("NOT_PRIME", f"p={p} must be a prime >= 5")
    squares = sorted({pow(y, 2, p) for y in range(1, p)})
    masks = _reachable_sums(squares, 4, p)
    return masks[4] == (1 << p) - 1
