"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines immediately.  Criteria 3 and 7 assert statements that the desk-scale
experiments refute (see the repository README for the analysis); they are
implemented faithfully and left to fail rather than weakened.
"""

import math
import time

import numpy as np
import pytest

from wglab.fourier import pseudorandomness_report, restriction_norm, dft_at, factored_majorant_transform
from wglab.intmath import is_prime
from wglab.local import (
    count_unit_solutions,
    count_unit_solutions_direct,
    lift_prime_power,
    waring_goldbach_modulus,
)
from wglab.represent import RepresentationQuery, count_convolution, count_exact, scan_exceptional
from wglab.sieve import build_context, build_f_b, build_v_b, diagonalization_identity, selberg_weights
from conftest import context_for_target_N


def _line(num: int, ok: bool, detail: str) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
    return ok


@pytest.fixture(scope="module")
def desk():
    """k=2, s=4, theta=0.75, X near 1e8, W=24, delta=0.3."""
    ctx = build_context(2, 4, 0.75, 4 * 10**8, delta=0.3, W_override=24)
    weights = selberg_weights(ctx.z, ctx.W, ctx)
    f = build_f_b(ctx, weights)
    v = build_v_b(ctx, weights)
    return ctx, weights, f, v


@pytest.fixture(scope="module")
def trend_builds():
    """Three builds with identical k, theta, delta, W and N near 1e4/1e5/1e6."""
    out = []
    for target in (10**4, 10**5, 10**6):
        ctx = context_for_target_N(target, k=2, s=4, theta=0.75, delta=0.3, W=24)
        weights = selberg_weights(ctx.z, ctx.W, ctx)
        out.append((ctx, weights))
    return out


def test_criterion_01_local_constants():
    start = time.perf_counter()
    expected = {2: 24, 3: 2, 4: 240, 5: 2, 6: 504}
    ok = True
    for k in range(2, 7):
        rk = waring_goldbach_modulus(k).modulus
        ok &= rk == expected[k]
        seen, p = 0, 2
        while seen < 1000:
            if is_prime(p) and math.gcd(p, rk) == 1:
                ok &= pow(p, k, rk) == 1
                seen += 1
            p += 1
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    assert _line(1, ok, f"R_k table and 1000-prime necessity, {elapsed:.2f}s (< 1 s)")


def test_criterion_02_lifting_oracle():
    start = time.perf_counter()
    checked = 0
    ok = True
    for p in (3, 5, 7, 11, 13):
        for k in (2, 3):
            for s in (4, 5):
                t = 1
                while p**t <= 3000:
                    h = p**t
                    for m in range(h):
                        ok &= lift_prime_power(p, t, m, k, s) == count_unit_solutions_direct(
                            h, m, k, s
                        )
                        checked += 1
                    t += 1
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60.0
    assert _line(2, ok, f"lifting == enumeration at {checked} points, {elapsed:.1f}s (< 60 s)")


def test_criterion_03_unit_sum_positivity():
    start = time.perf_counter()
    violations = []
    for k in (2, 3, 4):
        s = k * (k + 1) // 2 + 1
        rk = waring_goldbach_modulus(k).modulus
        for h in range(1, 501):
            g = math.gcd(h, rk)
            for m in range(s % g, h, g):
                if count_unit_solutions(h, m, k, s).count == 0:
                    violations.append((k, h, m))
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 60.0
    detail = f"zero violations for h <= 500, {elapsed:.1f}s (< 60 s)"
    if violations:
        detail = (
            f"{len(violations)} violations, all at k=3 (cubes of units mod 9 are only +-1); "
            f"first: {violations[:3]}, {elapsed:.1f}s"
        )
    assert _line(3, ok, detail)


def test_criterion_04_selberg_identity():
    start = time.perf_counter()
    ok = True
    for z, W in ((50, 2), (100, 6), (200, 30)):
        weights = selberg_weights(z, W)
        lhs, rhs = diagonalization_identity(weights)
        ok &= abs(float(lhs) - float(rhs)) <= 1e-12 * abs(float(rhs))
        ok &= weights.rho_exact[1] == 1
        ok &= all(abs(r) <= 1 for r in weights.rho_exact.values())
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    assert _line(4, ok, f"quadratic form == 1/J at three (z, W), {elapsed:.1f}s (< 10 s)")


def test_criterion_05_majorization(desk):
    start = time.perf_counter()
    ctx, _, f, v = desk
    bad = int(np.count_nonzero(v.values < f.values))
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 120.0
    assert _line(5, ok, f"v >= f at all {ctx.N} points (X={ctx.X}), {bad} violations, {elapsed:.1f}s (< 2 min)")


def test_criterion_06_transform_consistency(desk):
    start = time.perf_counter()
    ctx, weights, _, v = desk
    rng = np.random.default_rng(20260809)
    worst = 0.0
    for a in rng.random(50):
        lhs = dft_at(v, float(a))
        rhs = factored_majorant_transform(ctx, weights, float(a))
        worst = max(worst, abs(lhs - rhs) / ctx.N)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 120.0
    assert _line(6, ok, f"|table transform - factored form|/N <= {worst:.2e} at 50 alpha, {elapsed:.1f}s (< 2 min)")


def test_criterion_07_pseudorandomness_trend(trend_builds):
    start = time.perf_counter()
    sups = []
    minors = []
    ns = []
    for ctx, weights in trend_builds:
        g = 1 << (16 * ctx.N - 1).bit_length()
        rep = pseudorandomness_report(ctx, weights, g, q_exponent=2.0)
        sups.append(rep["sup_all"])
        minors.append(rep["sup_minor"])
        ns.append(ctx.N)
    elapsed = time.perf_counter() - start
    decreasing = sups[0] > sups[1] > sups[2]
    small = sups[2] < 0.2
    ok = decreasing and small and elapsed < 900.0
    detail = (
        f"sup-grid at N={ns}: {[f'{x:.4f}' for x in sups]} "
        f"(minor-arc sups {[f'{x:.4f}' for x in minors]}), "
        f"strictly decreasing: {decreasing}, <0.2 at N~1e6: {small}, {elapsed:.0f}s (< 15 min)"
    )
    assert _line(7, ok, detail)


def test_criterion_08_restriction_boundedness(trend_builds):
    start = time.perf_counter()
    q = 2 * 4 - 0.5
    ratios = []
    for ctx, weights in trend_builds:
        table = build_f_b(ctx, weights)
        g = 1 << (16 * ctx.N - 1).bit_length()
        ratios.append(restriction_norm(table, q, g)["ratio"])
    spread = (max(ratios) - min(ratios)) / min(ratios)
    elapsed = time.perf_counter() - start
    ok = spread < 0.5 and elapsed < 900.0
    assert _line(
        8, ok,
        f"L^{q} ratio across N: {[f'{r:.4f}' for r in ratios]}, spread {spread:.1%} (< 50%), {elapsed:.0f}s (< 15 min)",
    )


def test_criterion_09_counter_equivalence():
    start = time.perf_counter()
    n0 = 10**8
    x = (n0 / 4) ** 0.5
    hw = n0**0.375
    interval = (math.floor(x - hw), math.floor(x + hw))
    cc = count_convolution(2, 4, interval, (n0, n0 + 10**5))
    mismatches = 0
    for i, n in enumerate(range(n0, n0 + 10**5)):
        if count_exact(RepresentationQuery(n, 2, 4, interval)) != int(cc.counts[i]):
            mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 600.0
    assert _line(
        9, ok,
        f"convolution == exact on 1e5 consecutive n near 1e8, {mismatches} mismatches, {elapsed:.0f}s (< 10 min)",
    )


def test_criterion_10_theorem1_rendering():
    start = time.perf_counter()
    rep = scan_exceptional(10**8, 2, 7, 0.7, admissible_count=10**4)
    elapsed = time.perf_counter() - start
    surviving = rep.oracle_confirmed == len(rep.exceptional) and not rep.oracle_mismatches
    ok = rep.tested == 10**4 and not rep.exceptional and surviving and elapsed < 1800.0
    assert _line(
        10, ok,
        f"s=7 theta=0.7 scan of {rep.tested} admissible n = 7 (mod 24): "
        f"{len(rep.exceptional)} exceptions, oracle mismatches {rep.oracle_mismatches}, {elapsed:.0f}s (< 30 min)",
    )


def test_criterion_11_theorem2_rendering():
    start = time.perf_counter()
    rep = scan_exceptional(10**8, 2, 4, 0.75, admissible_count=10**4)
    elapsed = time.perf_counter() - start
    agreement = rep.oracle_confirmed == len(rep.exceptional) and not rep.oracle_mismatches
    ok = rep.tested == 10**4 and agreement and elapsed < 1800.0
    assert _line(
        11, ok,
        f"s=4 theta=0.75 scan: density {rep.density} (informational), "
        f"oracle agreement on {len(rep.exceptional)} exceptions: {agreement}, {elapsed:.0f}s (< 30 min)",
    )
