"""Segmented prime generation in intervals and residue classes.

Intervals are half-open [lo, hi) throughout.  The density checker renders
the short-interval prime-density hypothesis: it sieves the window
[x, x + x^(theta-eps)), counts primes in one reduced residue class, and
compares the normalized count against a supplied lower-bound constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ResourceBudgetError
from .intmath import euler_phi, sieve_upto

_SEGMENT_SPAN = 1 << 22
_DEFAULT_BUDGET = 1 << 28  # bytes


@dataclass(frozen=True)
class PrimeInterval:
    """Complete sorted list of primes in [lo, hi)."""

    lo: int
    hi: int
    primes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.primes.size)


@dataclass(frozen=True)
class DensityCheck:
    x: float
    theta: float
    epsilon: float
    d: int
    c: int
    alpha_minus: float
    interval: PrimeInterval
    observed_ratio: float
    passed: bool


def primes_in_interval(lo: int, hi: int, memory_budget: int = _DEFAULT_BUDGET) -> PrimeInterval:
    """All primes in [lo, hi) via a segmented sieve with base primes <= sqrt(hi)."""
    lo, hi = int(lo), int(hi)
    if hi > 1 << 62:
        raise PreconditionError("RANGE", f"hi={hi} exceeds 2^62")
    start = max(lo, 2)
    if start >= hi:
        return PrimeInterval(lo, hi, np.array([], dtype=np.int64))
    root = math.isqrt(hi - 1)
    if root + 1 > memory_budget:
        raise ResourceBudgetError(f"base sieve up to {root} exceeds budget of {memory_budget} bytes")
    est_out = int((hi - start) / max(math.log(start), 1.0) * 1.3) + 64
    if 8 * est_out > memory_budget:
        raise ResourceBudgetError(f"~{est_out} primes would exceed budget of {memory_budget} bytes")
    base = sieve_upto(root)
    chunks = []
    seg_lo = start
    while seg_lo < hi:
        seg_hi = min(seg_lo + _SEGMENT_SPAN, hi)
        mask = np.ones(seg_hi - seg_lo, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, (seg_lo + p - 1) // p * p)
            if first >= seg_hi:
                continue
            mask[first - seg_lo :: p] = False
        if seg_lo <= 1:
            mask[: 2 - seg_lo] = False
        found = np.flatnonzero(mask)
        if found.size:
            chunks.append(found.astype(np.int64) + seg_lo)
        seg_lo = seg_hi
    primes = np.concatenate(chunks) if chunks else np.array([], dtype=np.int64)
    return PrimeInterval(lo, hi, primes)


def count_primes_in_ap(interval: PrimeInterval, d: int, c: int) -> int:
    """Exact count of listed primes congruent to c mod d."""
    d, c = int(d), int(c)
    if d < 1:
        raise PreconditionError("MODULUS", f"d={d} must be >= 1")
    if math.gcd(c, d) != 1:
        raise PreconditionError("COPRIMALITY", f"gcd({c}, {d}) != 1")
    return int(np.count_nonzero(interval.primes % d == c % d))


def check_density_lower_bound(
    x: float,
    theta: float,
    epsilon: float,
    d: int,
    c: int,
    alpha_minus: float,
    memory_budget: int = _DEFAULT_BUDGET,
) -> DensityCheck:
    """Sieve I = [x, x + x^(theta-eps)) and test the density lower bound.

    observed_ratio is count * phi(d) * log(x) / |I|; the check passes when
    it is at least alpha_minus.
    """
    if not 0.5 < theta < 1.0:
        raise PreconditionError("THETA_RANGE", f"theta={theta} outside (1/2, 1)")
    if not 0 < epsilon < theta:
        raise PreconditionError("EPSILON_RANGE", f"epsilon={epsilon} invalid")
    if math.gcd(int(c), int(d)) != 1:
        raise PreconditionError("COPRIMALITY", f"gcd({c}, {d}) != 1")
    if d > math.log(x):
        raise PreconditionError("MODULUS_BOUND", f"d={d} exceeds log x = {math.log(x):.3f}")
    length = float(x) ** (theta - epsilon)
    lo = math.ceil(x)
    hi = math.ceil(x + length)
    interval = primes_in_interval(lo, hi, memory_budget=memory_budget)
    cnt = count_primes_in_ap(interval, d, c)
    ratio = cnt * euler_phi(int(d)) * math.log(x) / length
    return DensityCheck(
        x=float(x),
        theta=theta,
        epsilon=epsilon,
        d=int(d),
        c=int(c),
        alpha_minus=alpha_minus,
        interval=interval,
        observed_ratio=ratio,
        passed=ratio >= alpha_minus,
    )
