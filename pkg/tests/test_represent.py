import itertools
import math
from math import factorial

import numpy as np
import pytest

from wglab.errors import PreconditionError
from wglab.local import count_unit_solutions
from wglab.primes import primes_in_interval
from wglab.represent import (
    RepresentationQuery,
    ScanReport,
    convolution_at,
    count_convolution,
    count_exact,
    representation_witnesses,
    residue_setup,
    scan_exceptional,
    subdivide_range,
    subdivision_bound,
    transfer_index,
)
from wglab.sieve import build_context, indicator_table


def brute_ordered_count(n, k, s, lo, hi):
    primes = [int(p) for p in primes_in_interval(lo + 1, hi + 1).primes]
    return sum(
        1 for t in itertools.product(primes, repeat=s) if sum(p**k for p in t) == n
    )


def test_count_exact_examples():
    assert count_exact(RepresentationQuery(100, 2, 4, (1, 7))) == 1
    assert brute_ordered_count(100, 2, 4, 1, 7) == 1
    assert count_exact(RepresentationQuery(13, 2, 2, (1, 3))) == 2
    assert count_exact(RepresentationQuery(11, 2, 2, (1, 3))) == 0


def test_count_exact_random_vs_bruteforce():
    rng = np.random.default_rng(17)
    for _ in range(60):
        k = int(rng.integers(2, 4))
        s = int(rng.integers(2, 5))
        lo = int(rng.integers(1, 20))
        hi = lo + int(rng.integers(3, 25))
        n = int(rng.integers(s * lo**k, s * hi**k + 2))
        assert count_exact(RepresentationQuery(n, k, s, (lo, hi))) == brute_ordered_count(
            n, k, s, lo, hi
        ), (n, k, s, lo, hi)


def test_witnesses_and_multinomial_symmetry():
    q = RepresentationQuery(38, 2, 3, (1, 7))
    wit = representation_witnesses(q)
    assert wit == [(2, 3, 5)]
    for t in wit:
        assert sum(p**2 for p in t) == 38
        assert all(1 < p <= 7 for p in t)
    # ordered count equals the multiset count times the permutation factor
    ordered = 0
    for t in wit:
        mults = [len(list(g)) for _, g in itertools.groupby(t)]
        ordered += factorial(q.s) // math.prod(factorial(m) for m in mults)
    assert ordered == count_exact(q) == 6


def test_witnesses_cover_larger_instance():
    q = RepresentationQuery(4 * 10**6 + 12, 2, 4, (900, 1100))  # = 4 mod 24
    wit = representation_witnesses(q, limit=10**6)
    ordered = 0
    for t in wit:
        assert sum(p**2 for p in t) == q.n
        assert all(900 < p <= 1100 for p in t)
        assert all(a <= b for a, b in zip(t, t[1:]))
        mults = [len(list(g)) for _, g in itertools.groupby(t)]
        ordered += factorial(q.s) // math.prod(factorial(m) for m in mults)
    assert ordered == count_exact(q) > 0


def test_witnesses_require_exact_mode():
    with pytest.raises(PreconditionError):
        representation_witnesses(RepresentationQuery(100, 2, 4, (1, 7), mode="CONVOLUTION"))


def test_count_convolution_agrees_on_random_targets():
    rng = np.random.default_rng(23)
    lo, hi = 950, 1150
    window = (3_900_000, 4_300_000)
    cc = count_convolution(2, 4, (lo, hi), window)
    for n in rng.integers(window[0], window[1], 100):
        assert cc.at(int(n)) == count_exact(RepresentationQuery(int(n), 2, 4, (lo, hi)))


def test_count_convolution_exact_path_matches_float_path():
    lo, hi = 950, 1150
    window = (3_900_000, 3_960_000)
    auto = count_convolution(2, 4, (lo, hi), window, method="auto")
    exact = count_convolution(2, 4, (lo, hi), window, method="exact")
    assert not auto.used_exact and exact.used_exact
    assert np.array_equal(auto.counts, exact.counts)


def test_count_convolution_singletons():
    single = count_convolution(2, 3, (4, 5), (0, 80))
    assert [n for n in range(80) if single.at(n)] == [75]
    empty = count_convolution(2, 3, (24, 28), (0, 100))
    assert empty.prime_count == 0 and not empty.counts.any()
    indicator = count_convolution(2, 1, (1, 7), (0, 50))
    assert [n for n in range(50) if indicator.at(n)] == [4, 9, 25, 49]


def test_congruence_filter_against_local_counts():
    # four odd prime squares sum to 4 mod 8; anything else is locally blocked
    for n in range(3_900_000, 3_900_048):
        have = count_exact(RepresentationQuery(n, 2, 4, (950, 1150)))
        local = count_unit_solutions(8, n % 8, 2, 4).count
        if local == 0:
            assert have == 0
    cc = count_convolution(2, 4, (950, 1150), (3_900_000, 3_900_048))
    for n in range(3_900_000, 3_900_048):
        if count_unit_solutions(8, n % 8, 2, 4).count == 0:
            assert cc.at(n) == 0


def test_convolution_at_indicator_lattice_counts():
    N = 500
    tables = [indicator_table(N), indicator_table(N)]
    at_n = convolution_at(tables, N)
    assert at_n.value == pytest.approx(N - 1, rel=1e-9)
    assert at_n.fft_value == pytest.approx(N - 1, rel=1e-6)
    assert convolution_at(tables, 2).value == pytest.approx(1.0, abs=1e-6)
    assert at_n.normalized == pytest.approx((N - 1) / N, rel=1e-9)


def test_convolution_at_matches_direct_convolution(small_tables):
    f, _ = small_tables
    # reduced-size direct oracle
    values = f.values[:900]
    from wglab.sieve import WeightTable

    t = WeightTable(N=900, kind=f.kind, values=values.copy())
    direct = np.convolve(np.concatenate([[0.0], values]), np.concatenate([[0.0], values]))
    direct = np.convolve(direct, np.concatenate([[0.0], values]))
    for n0 in (901, 1350, 2700):
        got = convolution_at([t, t, t], n0)
        assert got.value == pytest.approx(float(direct[n0]), rel=1e-9, abs=1e-6)
        assert got.residual < 1e-6


def test_subdivide_example():
    seq = subdivide_range(10**8, 2, 4, 0.75)
    assert seq[0] == 10**8
    assert seq[1] == 10**8 - math.ceil((10**8 / 4) ** ((2 - 1 + 0.75) / 2))
    assert seq[1] == 97026982
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert seq[-1] <= 10**8 // 2 < seq[-2]
    assert len(seq) <= subdivision_bound(10**8, 2, 4, 0.75)


def test_subdivide_rejects_tiny_M():
    with pytest.raises(PreconditionError):
        subdivide_range(3, 2, 4, 0.75)


def test_residue_setup_examples():
    ctx = build_context(2, 7, 0.7, 10**8, W_override=24)
    setup = residue_setup(10**8, 2, 7, 0.7, ctx)
    assert set(setup.assignments) == {7}
    assert setup.assignments[7].bs == (1,) * 7
    assert not setup.skipped
    ctx4 = build_context(2, 4, 0.75, 10**8, W_override=120, delta=0.3)
    setup4 = residue_setup(10**8, 2, 4, 0.75, ctx4)
    assert sorted(setup4.assignments) == [4, 28, 52, 76, 100]
    for l, a in setup4.assignments.items():
        assert a.n_l % 120 == l and a.n_l % 24 == 4
        assert setup4.window_lo < a.n_l <= 10**8
        assert sum(a.bs) % 120 == a.n_l % 120


def test_transfer_index_examples():
    ctx = build_context(2, 4, 0.75, 10**8, W_override=24, delta=0.3)
    setup = residue_setup(10**8, 2, 4, 0.75, ctx)
    (l, a), = setup.assignments.items()
    # near the top anchor the index lands inside (0, N]
    n = 10**8 - (10**8 - a.n_l) % 24
    assert n % 24 == l % 24
    n0 = transfer_index(n, a.bs, ctx)
    assert 0 < n0 <= ctx.N
    with pytest.raises(PreconditionError):
        transfer_index(n + 1, a.bs, ctx)  # wrong residue class


def test_scan_small_end_to_end():
    rep = scan_exceptional(3 * 10**6, 2, 4, 0.75, admissible_count=250)
    assert isinstance(rep, ScanReport)
    assert rep.tested == 250
    assert rep.exceptional == []
    assert rep.density == 0.0
    assert rep.oracle_confirmed == 0 and not rep.oracle_mismatches
    assert 0 < rep.coverage < 1
    assert rep.window[0] >= rep.M // 2 and rep.window[1] <= rep.M
    assert rep.transfer_checked > 0
    assert not rep.warnings


def test_scan_finds_and_verifies_exceptions():
    # theta = 0.55 leaves so few primes that some admissible targets have
    # no representation; each reported exception must survive the exact
    # counter (and nothing may disagree)
    rep = scan_exceptional(2 * 10**5, 2, 4, 0.55, admissible_count=400)
    assert rep.tested == 400
    assert rep.exceptional, "expected genuine finite-scale exceptions"
    assert rep.oracle_mismatches == []
    assert rep.oracle_confirmed == len(rep.exceptional)
    assert rep.density == pytest.approx(len(rep.exceptional) / rep.tested)
    for n in rep.exceptional:
        assert n % rep.R_k == rep.s % rep.R_k


def test_transfer_check_reports_bottom_edge_slack():
    # the floor formulas carry a second-order excess of about x^(2 theta)/(4s),
    # so targets hugging a subinterval's bottom produce nonpositive transfer
    # indices; the scan reports them instead of failing
    m2 = subdivide_range(10**8, 2, 4, 0.75)[1]
    bottom = scan_exceptional(10**8, 2, 4, 0.75, window=(m2, m2 + 24 * 200))
    assert bottom.transfer_checked == bottom.tested == 200
    assert bottom.transfer_violations == 200
    top = scan_exceptional(10**8, 2, 4, 0.75, window=(10**8 - 24 * 200, 10**8))
    assert top.transfer_checked == 200 and top.transfer_violations == 0


def test_scan_empty_window():
    rep = scan_exceptional(3 * 10**6, 2, 4, 0.75, window=(2_999_998, 2_999_999))
    assert rep.tested in (0, 1)
    if rep.tested == 0:
        assert rep.density is None


def test_scan_workers_match_serial():
    serial = scan_exceptional(2 * 10**5, 2, 4, 0.55, admissible_count=300, workers=1)
    parallel = scan_exceptional(2 * 10**5, 2, 4, 0.55, admissible_count=300, workers=2)
    assert serial.exceptional == parallel.exceptional
    assert serial.tested == parallel.tested


def test_scan_sampled_window_is_seeded():
    a = scan_exceptional(3 * 10**6, 2, 4, 0.75, admissible_count=100, sample_seed=7)
    b = scan_exceptional(3 * 10**6, 2, 4, 0.75, admissible_count=100, sample_seed=7)
    c = scan_exceptional(3 * 10**6, 2, 4, 0.75, admissible_count=100, sample_seed=8)
    assert a.window == b.window
    assert a.window != c.window


def test_scan_warns_below_regime():
    rep = scan_exceptional(3 * 10**6, 2, 3, 0.75, admissible_count=50)
    assert any("positivity" in w for w in rep.warnings)


def test_scan_subinterval_records():
    rep = scan_exceptional(3 * 10**6, 2, 4, 0.75, admissible_count=3000)
    assert rep.subintervals
    for rec in rep.subintervals:
        assert rec.x_i == pytest.approx((rec.M_i / 4) ** 0.5)
        if rec.flag is None:
            assert rec.N_i > 0 and rec.m_i > 0
