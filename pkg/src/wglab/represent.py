"""Counting representations n = p_1^k + ... + p_s^k with primes confined
to a short interval, plus the window bookkeeping for exceptional-set scans.

Two independent counting routes:

* ``count_exact`` - meet-in-the-middle on raw integer values: sorted
  multiset tables of half-sums merged by binary search.  No FFT, no
  residue compression.
* ``count_convolution`` - s-fold self-convolution of the k-th power
  indicator on a residue-compressed domain (all p^k share one class mod
  the gcd of their differences), FFT fast path with per-stage rounding
  checks and an exact Kronecker/GMP fallback.

Scans batch consecutive targets that share the same integer prime
interval, count the whole batch with one convolution, and re-verify every
exceptional target through the exact counter.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from .errors import PreconditionError, ResourceBudgetError
from .intmath import crt_pair, integer_kth_root
from .local import decompose_residue, waring_goldbach_modulus
from .primes import primes_in_interval
from .convolve import self_power
from .sieve import WTrickContext, WeightTable, build_context

EXACT = "EXACT"
CONVOLUTION = "CONVOLUTION"

_TABLE_CAP = 4_000_000  # entries per half-sum table
_PAIR_CHUNK = 4_000_000
_CONV_MAX_LEN = 1 << 25
_NRANGE_CAP = 10**9


@dataclass(frozen=True)
class RepresentationQuery:
    """Count tuples of primes in (lo, hi] whose k-th powers sum to n."""

    n: int
    k: int
    s: int
    interval: tuple[int, int]  # prime bounds, (lo, hi]
    mode: str = EXACT


@dataclass
class ConvolutionCounts:
    """Exact counts for every n in [n_start, n_start + len(counts))."""

    n_start: int
    counts: np.ndarray
    prime_count: int
    residual: float
    used_exact: bool

    def at(self, n: int) -> int:
        i = n - self.n_start
        if not 0 <= i < len(self.counts):
            raise PreconditionError("INDEX", f"n={n} outside the computed range")
        return int(self.counts[i])


@dataclass
class ConvolutionValue:
    value: float
    fft_value: float
    normalized: float
    residual: float


@dataclass(frozen=True)
class ResidueAssignment:
    n_l: int
    bs: tuple[int, ...]


@dataclass
class ResidueSetup:
    M_i: int
    window_lo: float
    assignments: dict[int, ResidueAssignment]
    skipped: list[tuple[int, str]]


@dataclass
class SubintervalRecord:
    M_i: int
    x_i: float
    N_i: int | None
    m_i: int | None
    flag: str | None = None


@dataclass
class ScanReport:
    M: int
    k: int
    s: int
    theta: float
    W: int
    R_k: int
    window: tuple[int, int]
    subintervals: list[SubintervalRecord]
    tested: int
    exceptional: list[int]
    density: float | None
    coverage: float
    oracle_confirmed: int
    oracle_mismatches: list[int]
    transfer_checked: int
    transfer_violations: int
    max_residual: float
    used_exact_fallback: bool
    warnings: list[str] = field(default_factory=list)
    wall_time: float = 0.0


def _interval_primes(k: int, s: int, lo: int, hi: int) -> np.ndarray:
    """k-th powers of the primes in (lo, hi], as sorted int64 values."""
    primes = primes_in_interval(lo + 1, hi + 1).primes
    if primes.size:
        top = int(primes[-1])
        if s * top**k >= 1 << 62:
            raise ResourceBudgetError(f"s * hi^k = {s * top ** k} overflows the int64 counting range")
    return primes.astype(np.int64) ** k


def _aggregate(vals: np.ndarray, cnts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, inv = np.unique(vals, return_inverse=True)
    c = np.zeros(u.size, dtype=np.int64)
    np.add.at(c, inv, cnts)
    return u, c


def _extend_table(
    vals: np.ndarray, cnts: np.ndarray, pk: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Aggregated sums of (table value + one more k-th power)."""
    acc_v: np.ndarray | None = None
    acc_c: np.ndarray | None = None
    rows = max(1, _PAIR_CHUNK // max(1, pk.size))
    for start in range(0, vals.size, rows):
        stop = min(start + rows, vals.size)
        chunk_v = (vals[start:stop, None] + pk[None, :]).ravel()
        chunk_c = np.repeat(cnts[start:stop], pk.size)
        u, c = _aggregate(chunk_v, chunk_c)
        if acc_v is None:
            acc_v, acc_c = u, c
        else:
            acc_v, acc_c = _aggregate(np.concatenate([acc_v, u]), np.concatenate([acc_c, c]))
    if acc_v is None:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    return acc_v, acc_c


def _distinct_bound(pk: np.ndarray, j: int) -> int:
    if pk.size == 0:
        return 0
    multiset = math.comb(pk.size + j - 1, j)
    if pk.size == 1:
        return 1
    g = int(np.gcd.reduce(np.diff(pk)))
    span = j * int(pk[-1] - pk[0]) // g + 1
    return min(multiset, span)


class _HalfSumTables:
    """Cached sorted multiset tables of j-fold sums of k-th powers."""

    def __init__(self, k: int, s: int, lo: int, hi: int):
        self.pk = _interval_primes(k, s, lo, hi)
        if self.pk.size and self.pk.size ** s >= 1 << 62:
            raise ResourceBudgetError(f"{self.pk.size}^{s} tuples overflow the counting range")
        self.tables: dict[int, tuple[np.ndarray, np.ndarray]] = {
            1: (self.pk, np.ones(self.pk.size, dtype=np.int64))
        }

    def materialized(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        if j not in self.tables:
            if _distinct_bound(self.pk, j) > _TABLE_CAP:
                raise ResourceBudgetError(f"{j}-fold sum table exceeds {_TABLE_CAP} entries")
            prev_v, prev_c = self.materialized(j - 1)
            self.tables[j] = _extend_table(prev_v, prev_c, self.pk)
        return self.tables[j]

    def can_materialize(self, j: int) -> bool:
        return _distinct_bound(self.pk, j) <= _TABLE_CAP

    def count(self, n: int, s: int) -> int:
        if self.pk.size == 0:
            return 0
        if n < s * int(self.pk[0]) or n > s * int(self.pk[-1]):
            return 0
        if s == 1:
            i = int(np.searchsorted(self.pk, n))
            return int(i < self.pk.size and self.pk[i] == n)
        s1 = s // 2
        s2 = s - s1
        v1, c1 = self.materialized(s1)
        if self.can_materialize(s2):
            v2, c2 = self.materialized(s2)
            comp = n - v1
            pos = np.searchsorted(v2, comp)
            ok = (pos < v2.size) & (v2[np.minimum(pos, v2.size - 1)] == comp)
            return int(np.dot(c1[ok], c2[pos[ok]]))
        # stream the larger side in chunks of (s2-1)-sums extended by one prime
        vp, cp = self.materialized(s2 - 1)
        total = 0
        rows = max(1, _PAIR_CHUNK // max(1, self.pk.size))
        for start in range(0, vp.size, rows):
            stop = min(start + rows, vp.size)
            chunk_v = (vp[start:stop, None] + self.pk[None, :]).ravel()
            chunk_c = np.repeat(cp[start:stop], self.pk.size)
            comp = n - chunk_v
            pos = np.searchsorted(v1, comp)
            ok = (pos < v1.size) & (v1[np.minimum(pos, v1.size - 1)] == comp)
            total += int(np.dot(chunk_c[ok], c1[pos[ok]]))
        return total


_TABLE_CACHE: dict[tuple[int, int, int, int], _HalfSumTables] = {}


def _tables_for(k: int, s: int, lo: int, hi: int) -> _HalfSumTables:
    key = (k, s, lo, hi)
    if key not in _TABLE_CACHE:
        if len(_TABLE_CACHE) >= 8:
            _TABLE_CACHE.pop(next(iter(_TABLE_CACHE)))
        _TABLE_CACHE[key] = _HalfSumTables(k, s, lo, hi)
    return _TABLE_CACHE[key]


def count_exact(query: RepresentationQuery) -> int:
    """Ordered representation count by meet-in-the-middle."""
    if not 1 <= query.s <= 10:
        raise PreconditionError("S_RANGE", f"s={query.s} outside [1, 10]")
    lo, hi = query.interval
    if lo >= hi:
        return 0
    tables = _tables_for(query.k, query.s, lo, hi)
    if tables.pk.size > 10**7:
        raise ResourceBudgetError(f"{tables.pk.size} primes exceed the exact-counter cap")
    return tables.count(int(query.n), query.s)


def representation_witnesses(query: RepresentationQuery, limit: int = 1000) -> list[tuple[int, ...]]:
    """Non-decreasing prime tuples realizing the representation (exact
    mode only); each contributes s!/(multiplicities!) ordered solutions."""
    if query.mode != EXACT:
        raise PreconditionError("MODE", "witness extraction requires EXACT mode")
    lo, hi = query.interval
    primes = [int(p) for p in primes_in_interval(lo + 1, hi + 1).primes]
    pk = [p**query.k for p in primes]
    out: list[tuple[int, ...]] = []

    def dfs(i_min: int, remaining: int, target: int, prefix: list[int]) -> bool:
        if remaining == 0:
            if target == 0:
                out.append(tuple(prefix))
                return len(out) >= limit
            return False
        if not primes or target < remaining * pk[i_min] or target > remaining * pk[-1]:
            return False
        for i in range(i_min, len(primes)):
            if remaining * pk[i] > target:
                break
            prefix.append(primes[i])
            if dfs(i, remaining - 1, target - pk[i], prefix):
                prefix.pop()
                return True
            prefix.pop()
        return False

    dfs(0, query.s, int(query.n), [])
    return out


def count_convolution(
    k: int,
    s: int,
    interval: tuple[int, int],
    n_range: tuple[int, int],
    method: str = "auto",
) -> ConvolutionCounts:
    """Representation counts for every n in [n_range[0], n_range[1]).

    The k-th power values are residue-compressed before the s-fold
    convolution: with g the gcd of their pairwise differences, only
    targets congruent to s*p0^k modulo g can have solutions at all.
    """
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if n_hi < n_lo:
        raise PreconditionError("RANGE", f"empty n_range {n_range}")
    if (n_hi - n_lo) * s > _NRANGE_CAP:
        raise ResourceBudgetError(f"n_range of {n_hi - n_lo} exceeds the {_NRANGE_CAP}/s cap")
    if method not in ("auto", "exact", "float"):
        raise PreconditionError("MODE", f"unknown convolution method {method}")
    lo, hi = interval
    counts = np.zeros(max(n_hi - n_lo, 0), dtype=np.int64)
    pk = _interval_primes(k, s, lo, hi) if lo < hi else np.array([], dtype=np.int64)
    if pk.size == 0:
        return ConvolutionCounts(n_lo, counts, 0, 0.0, False)
    base = int(pk[0])
    if pk.size == 1:
        target = s * base
        if n_lo <= target < n_hi:
            counts[target - n_lo] = 1
        return ConvolutionCounts(n_lo, counts, 1, 0.0, False)
    g = int(np.gcd.reduce(np.diff(pk)))
    u = (pk - base) // g
    length = int(u[-1]) + 1
    indicator = np.zeros(length, dtype=np.int64)
    indicator[u] = 1
    conv, residual, used_exact = self_power(
        indicator, s, exact=(method == "exact"), max_len=_CONV_MAX_LEN
    )
    conv = np.asarray(conv, dtype=np.int64) if not isinstance(conv, np.ndarray) else conv
    ns = np.arange(n_lo, n_hi, dtype=np.int64)
    delta = ns - s * base
    idx = delta // g
    ok = (delta % g == 0) & (idx >= 0) & (idx < len(conv))
    counts[ok] = conv[idx[ok]]
    return ConvolutionCounts(n_lo, counts, int(pk.size), residual, used_exact)


def convolution_at(tables: list[WeightTable], n0: int) -> ConvolutionValue:
    """Value of the s-fold convolution of the tables at n0, by spectral
    multiplication, cross-validated by a split-half direct dot product."""
    if not tables:
        raise PreconditionError("EMPTY", "need at least one table")
    N = tables[0].N
    if any(t.N != N for t in tables):
        raise PreconditionError("LENGTH_MISMATCH", "tables must share one length")
    s = len(tables)
    if not 0 < n0 <= s * N:
        raise PreconditionError("INDEX", f"n0={n0} outside (0, {s * N}]")
    if s == 1:
        v = float(tables[0].values[n0 - 1])
        return ConvolutionValue(value=v, fft_value=v, normalized=v, residual=0.0)
    size = 1 << (s * N + 1).bit_length()
    if size > 1 << 26:
        raise ResourceBudgetError(f"spectral size {size} exceeds budget")

    def padded(t: WeightTable) -> np.ndarray:
        buf = np.zeros(size, dtype=np.float64)
        buf[1 : N + 1] = t.values
        return buf

    specs = [np.fft.rfft(padded(t)) for t in tables]
    prod = specs[0].copy()
    for sp in specs[1:]:
        prod *= sp
    fft_value = float(np.fft.irfft(prod, size)[n0])
    s1 = (s + 1) // 2
    h1_spec = specs[0].copy()
    for sp in specs[1:s1]:
        h1_spec *= sp
    h2_spec = specs[s1].copy()
    for sp in specs[s1 + 1 :]:
        h2_spec *= sp
    h1 = np.fft.irfft(h1_spec, size)[: s1 * N + 1]
    h2 = np.fft.irfft(h2_spec, size)[: (s - s1) * N + 1]
    m_lo = max(0, n0 - (len(h2) - 1))
    m_hi = min(len(h1) - 1, n0)
    if m_lo > m_hi:
        dot = 0.0
    else:
        dot = float(np.dot(h1[m_lo : m_hi + 1], h2[n0 - m_hi : n0 - m_lo + 1][::-1]))
    residual = abs(fft_value - dot) / max(1.0, abs(dot))
    return ConvolutionValue(
        value=dot, fft_value=fft_value, normalized=dot / float(N) ** (s - 1), residual=residual
    )


def subdivide_range(M: int, k: int, s: int, theta: float) -> list[int]:
    """Descending anchors M_1 = M, M_{i+1} = M_i - ceil((M_i/s)^((k-1+theta)/k)),
    continued until the first anchor at or below M/2 (included)."""
    exponent = (k - 1 + theta) / k
    if (M / s) ** exponent < 1.0:
        raise PreconditionError("M_TOO_SMALL", f"subdivision step below 1 for M={M}")
    out = [int(M)]
    while out[-1] > M // 2:
        step = math.ceil((out[-1] / s) ** exponent)
        out.append(out[-1] - step)
    return out


def subdivision_bound(M: int, k: int, s: int, theta: float) -> float:
    """Crude anchor-count bound s * log(M) * M^((1-theta)/k)."""
    return s * math.log(M) * float(M) ** ((1 - theta) / k)


def residue_setup(M_i: int, k: int, s: int, theta: float, ctx: WTrickContext) -> ResidueSetup:
    """Minimal admissible representative and unit-power decomposition for
    each residue class mod W meeting the subinterval window."""
    W = ctx.W
    rk = waring_goldbach_modulus(k).modulus
    g = math.gcd(W, rk)
    lo = M_i - (M_i / s) ** ((k - 1 + theta) / k)
    base = math.floor(lo) + 1
    assignments: dict[int, ResidueAssignment] = {}
    skipped: list[tuple[int, str]] = []
    for l in range(1, W + 1):
        if (l - s) % g != 0:
            continue
        r, lcm = crt_pair(l % W, W, s % rk, rk)
        n_l = base + (r - base) % lcm
        if n_l > M_i:
            skipped.append((l, "NO_ADMISSIBLE_N"))
            continue
        try:
            bs = decompose_residue(n_l, W, k, s)
        except PreconditionError:
            skipped.append((l, "UNSOLVABLE"))
            continue
        assignments[l] = ResidueAssignment(n_l=n_l, bs=bs)
    return ResidueSetup(M_i=M_i, window_lo=lo, assignments=assignments, skipped=skipped)


def transfer_index(n: int, bs: tuple[int, ...], ctx: WTrickContext) -> int:
    """n_0 = (n - sum(bs) - s m W) / W; exact division is asserted."""
    num = n - sum(bs) - ctx.s * ctx.m * ctx.W
    if num % ctx.W != 0:
        raise PreconditionError("DIVISIBILITY", f"transfer index of {n} is not integral")
    return num // ctx.W


def _prime_bounds(ns: np.ndarray, k: int, s: int, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer prime-interval bounds (lo, hi] per target.

    Float evaluation with an mpmath fallback for values suspiciously close
    to an integer boundary.
    """
    xs = (ns / s) ** (1.0 / k)
    hw = ns ** (theta / k)
    lo_f = xs - hw
    hi_f = xs + hw
    lo_i = np.floor(lo_f).astype(np.int64)
    hi_i = np.floor(hi_f).astype(np.int64)
    risky = np.flatnonzero(
        (np.abs(lo_f - np.rint(lo_f)) < 1e-7) | (np.abs(hi_f - np.rint(hi_f)) < 1e-7)
    )
    for i in risky:
        with mp.workdps(50):
            x = (mp.mpf(int(ns[i])) / s) ** (mp.mpf(1) / k)
            h = mp.mpf(int(ns[i])) ** (mp.mpf(theta) / k)
            lo_i[i] = int(mp.floor(x - h))
            hi_i[i] = int(mp.floor(x + h))
    return lo_i, hi_i


def _scan_batch(args: tuple) -> tuple[int, list[int], float, bool]:
    idx, k, s, lo, hi, n_first, n_last, rk, method = args
    cc = count_convolution(k, s, (int(lo), int(hi)), (int(n_first), int(n_last) + 1), method)
    ns = np.arange(n_first, n_last + 1, rk, dtype=np.int64)
    vals = cc.counts[(ns - cc.n_start).astype(np.int64)]
    exceptional = [int(n) for n in ns[vals == 0]]
    return idx, exceptional, cc.residual, cc.used_exact


def scan_exceptional(
    M: int,
    k: int,
    s: int,
    theta: float,
    *,
    window: tuple[int, int] | None = None,
    admissible_count: int | None = None,
    W_override: int | None = None,
    delta: float | None = None,
    workers: int = 1,
    method: str = "auto",
    check_transfer: bool = True,
    sample_seed: int | None = None,
) -> ScanReport:
    """Scan admissible targets for missing representations.

    Targets are the n = s (mod R_k) inside the window, default the topmost
    block of (M/2, M] holding ``admissible_count`` of them (or a seeded
    random block when ``sample_seed`` is given).  Counts come from the
    convolution route batched over runs of constant prime interval; every
    exceptional target is re-verified by the exact counter.
    """
    started = time.perf_counter()
    warnings: list[str] = []
    rk = waring_goldbach_modulus(k).modulus
    if s <= k * (k + 1) // 2:
        warnings.append(f"s={s} is at or below k(k+1)/2={k * (k + 1) // 2}; positivity is not guaranteed")
    W = W_override if W_override is not None else math.lcm(2 * k * k, rk)
    count_target = admissible_count if admissible_count is not None else 10_000
    if window is None:
        span = count_target * rk
        if sample_seed is not None:
            rng = np.random.default_rng(sample_seed)
            hi = int(rng.integers(M // 2 + span, M + 1))
        else:
            hi = M
        lo = hi - span
    else:
        lo, hi = int(window[0]), int(window[1])
    if lo < M // 2:
        warnings.append(f"window clipped to (M/2, M]: lo {lo} -> {M // 2}")
        lo = M // 2
    if hi > M:
        warnings.append(f"window clipped to (M/2, M]: hi {hi} -> {M}")
        hi = M

    first = lo + 1 + (s - (lo + 1)) % rk
    ns = np.arange(first, hi + 1, rk, dtype=np.int64) if first <= hi else np.array([], dtype=np.int64)
    first_all = M // 2 + 1 + (s - (M // 2 + 1)) % rk
    total_admissible = (M - first_all) // rk + 1 if first_all <= M else 1
    anchors = subdivide_range(M, k, s, theta)

    subintervals: list[SubintervalRecord] = []
    contexts: dict[int, WTrickContext] = {}
    setups: dict[int, ResidueSetup] = {}
    sub_of_n = np.zeros(ns.size, dtype=np.int64)
    for i in range(len(anchors) - 1):
        hi_a, lo_a = anchors[i], anchors[i + 1]
        if lo_a >= hi or hi_a <= lo:
            continue
        x_i = (hi_a / s) ** (1.0 / k)
        record = SubintervalRecord(M_i=hi_a, x_i=x_i, N_i=None, m_i=None)
        try:
            ctx = build_context(k, s, theta, hi_a, delta=delta, W_override=W)
            record.N_i, record.m_i = ctx.N, ctx.m
            contexts[hi_a] = ctx
            if check_transfer:
                setups[hi_a] = residue_setup(hi_a, k, s, theta, ctx)
        except (PreconditionError, ResourceBudgetError) as exc:
            record.flag = str(exc)
        subintervals.append(record)
        if ns.size:
            in_sub = (ns > lo_a) & (ns <= hi_a)
            sub_of_n[in_sub] = hi_a

    exceptional: list[int] = []
    max_residual = 0.0
    used_exact = False
    batches: list[tuple] = []
    if ns.size:
        lo_i, hi_i = _prime_bounds(ns, k, s, theta)
        keys = np.stack([lo_i, hi_i, sub_of_n])
        change = np.flatnonzero(np.any(keys[:, 1:] != keys[:, :-1], axis=0)) + 1
        starts = np.concatenate([[0], change])
        stops = np.concatenate([change, [ns.size]])
        for bi, (a, b) in enumerate(zip(starts, stops)):
            batches.append(
                (bi, k, s, int(lo_i[a]), int(hi_i[a]), int(ns[a]), int(ns[b - 1]), rk, method)
            )
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_scan_batch, batches))
        else:
            results = [_scan_batch(b) for b in batches]
        for _, exc_ns, residual, ex in sorted(results):
            exceptional.extend(exc_ns)
            max_residual = max(max_residual, residual)
            used_exact = used_exact or ex

    confirmed = 0
    mismatches: list[int] = []
    if exceptional:
        lo_e, hi_e = _prime_bounds(np.array(exceptional, dtype=np.int64), k, s, theta)
        for n, a, b in zip(exceptional, lo_e, hi_e):
            if count_exact(RepresentationQuery(n=int(n), k=k, s=s, interval=(int(a), int(b)))) == 0:
                confirmed += 1
            else:
                mismatches.append(int(n))

    transfer_checked = 0
    transfer_violations = 0
    if check_transfer and ns.size:
        for hi_a, setup in setups.items():
            ctx = contexts[hi_a]
            members = ns[sub_of_n == hi_a]
            for n in members:
                l = int(n) % W or W
                assignment = setup.assignments.get(l)
                if assignment is None:
                    continue
                transfer_checked += 1
                n0 = transfer_index(int(n), assignment.bs, ctx)
                if not 0 < n0 <= ctx.N:
                    transfer_violations += 1

    density = len(exceptional) / ns.size if ns.size else None
    return ScanReport(
        M=int(M),
        k=k,
        s=s,
        theta=theta,
        W=W,
        R_k=rk,
        window=(int(lo), int(hi)),
        subintervals=subintervals,
        tested=int(ns.size),
        exceptional=sorted(exceptional),
        density=density,
        coverage=ns.size / total_admissible,
        oracle_confirmed=confirmed,
        oracle_mismatches=mismatches,
        transfer_checked=transfer_checked,
        transfer_violations=transfer_violations,
        max_residual=max_residual,
        used_exact_fallback=used_exact,
        warnings=warnings,
        wall_time=time.perf_counter() - started,
    )
