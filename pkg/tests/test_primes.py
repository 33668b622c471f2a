import math

import numpy as np
import pytest

from wglab.errors import PreconditionError, ResourceBudgetError
from wglab.intmath import euler_phi, sieve_upto
from wglab.primes import check_density_lower_bound, count_primes_in_ap, primes_in_interval


def trial_division_primes(lo, hi):
    """Independent oracle: every survivor is tested against all primes up
    to sqrt(hi); composites are discarded at their first witness."""
    alive = np.arange(max(lo, 2), hi, dtype=np.int64)
    for p in sieve_upto(math.isqrt(max(hi - 1, 1))):
        p = int(p)
        keep = (alive % p != 0) | (alive == p)
        alive = alive[keep]
    return alive


def test_examples():
    assert list(primes_in_interval(10, 21).primes) == [11, 13, 17, 19]
    assert primes_in_interval(1, 2).count == 0
    assert primes_in_interval(2, 3).count == 1


def test_pi_of_one_million():
    interval = primes_in_interval(2, 10**6 + 1)
    assert interval.count == 78498
    # independent one-shot sieve
    flags = bytearray([1]) * (10**6 + 1)
    flags[0] = flags[1] = 0
    for p in range(2, 1001):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
    assert sum(flags) == 78498


def test_segmented_equals_trial_division_on_random_windows():
    rng = np.random.default_rng(20260809)
    for _ in range(200):
        lo = int(rng.integers(100, 10**10 - 10**4))
        hi = lo + 10**4
        ours = primes_in_interval(lo, hi).primes
        oracle = trial_division_primes(lo, hi)
        assert np.array_equal(ours, oracle), (lo, hi)


def test_interval_is_complete_and_sorted():
    interval = primes_in_interval(10**6, 10**6 + 10**4)
    arr = interval.primes
    assert np.all(arr[1:] > arr[:-1])
    assert np.array_equal(arr, trial_division_primes(10**6, 10**6 + 10**4))


def test_count_in_ap_examples():
    iv = primes_in_interval(10, 21)
    assert count_primes_in_ap(iv, 4, 1) == 2
    assert count_primes_in_ap(iv, 1, 1) == 4


def test_count_in_ap_oracle_recount():
    iv = primes_in_interval(10**6, 10**6 + 10**4)
    oracle = sum(1 for p in trial_division_primes(10**6, 10**6 + 10**4) if p % 3 == 1)
    assert count_primes_in_ap(iv, 3, 1) == oracle


def test_count_in_ap_coprimality_error():
    iv = primes_in_interval(10, 30)
    with pytest.raises(PreconditionError) as err:
        count_primes_in_ap(iv, 4, 2)
    assert "COPRIMALITY" in str(err.value)


def test_ap_partition():
    iv = primes_in_interval(5000, 20000)
    for d in (3, 4, 8, 12):
        total = sum(count_primes_in_ap(iv, d, c) for c in range(1, d + 1) if math.gcd(c, d) == 1)
        coprime = sum(1 for p in iv.primes if math.gcd(int(p) % d, d) == 1)
        assert total == coprime


@pytest.mark.parametrize("d,c", [(1, 1), (3, 2)])
def test_density_check(d, c):
    x = 10**8
    check = check_density_lower_bound(x, 0.7, 0.01, d, c, 0.99)
    # oracle: recount through trial division and re-evaluate the formula
    length = x ** (0.7 - 0.01)
    lo = math.ceil(x)
    hi = math.ceil(x + length)
    oracle_primes = trial_division_primes(lo, hi)
    cnt = sum(1 for p in oracle_primes if p % d == c % d)
    ratio = cnt * euler_phi(d) * math.log(x) / length
    assert check.interval.count == len(oracle_primes)
    assert check.observed_ratio == pytest.approx(ratio, rel=1e-12)
    assert check.passed == (check.observed_ratio >= 0.99)
    assert check.passed  # primes are dense enough at 1e8


def test_density_check_precondition_errors():
    with pytest.raises(PreconditionError) as err:
        check_density_lower_bound(10**8, 0.7, 0.01, 4, 2, 0.9)
    assert "COPRIMALITY" in str(err.value)
    with pytest.raises(PreconditionError):
        check_density_lower_bound(10**8, 0.4, 0.01, 1, 1, 0.9)
    with pytest.raises(PreconditionError):
        check_density_lower_bound(10**8, 0.7, 0.01, 100, 1, 0.9)  # d > log x


def test_memory_budget():
    with pytest.raises(ResourceBudgetError):
        primes_in_interval(2, 10**9, memory_budget=1 << 16)
