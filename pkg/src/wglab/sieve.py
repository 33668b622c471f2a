"""W-trick contexts, Selberg sieve weights, and the weight tables.

The context fixes every scale parameter of one experiment: the power k,
the number of summands s, the short-interval exponent theta, the sieve
exponent delta, the wheel modulus W with its residue b, and the derived
window [X, X+Y] = [Wm+b, W(m+N)+b].

The sieve weights rho_d live on squarefree d < z coprime to W.  They are
computed in closed form from the choice that makes the transformed
variables constant on the support:

    rho_d = mu(d) * (d/phi(d)) * (1/J) * sum over e < z/d, e squarefree,
            gcd(e, d W) = 1 of 1/phi(e),

with J the sum of 1/phi(d) over the support.  All weight arithmetic is
exact (fractions); floats only appear in the exported tables.

Weight tables realize, on [1, N], the normalized indicator of prime k-th
powers in the window (kind PRIME_POWER_F), its sieve majorant (kind
MAJORANT_V), and the plain indicator (kind INDICATOR).
"""

from __future__ import annotations

import csv
import dataclasses
import math
import struct
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import mp

from .errors import PreconditionError, ResourceBudgetError
from .intmath import euler_phi, integer_kth_root, is_prime, is_squarefree, mobius, sieve_upto

PRIME_POWER_F = "PRIME_POWER_F"
MAJORANT_V = "MAJORANT_V"
INDICATOR = "INDICATOR"

_RLE_MAGIC = b"WGLT"
_KIND_CODES = {PRIME_POWER_F: 0, MAJORANT_V: 1, INDICATOR: 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}

_MAX_SUPPORT = 100_000  # largest materializable z


@dataclass(frozen=True)
class WTrickContext:
    k: int
    s: int
    theta: float
    delta: float
    varrho: float
    w: float
    W: int
    b: int
    m: int
    N: int
    X: int
    Y: int
    z: float
    D: float
    x: float


@dataclass(frozen=True)
class SieveWeights:
    z: float
    W: int
    support: tuple[int, ...]
    rho: dict[int, float]
    rho_exact: dict[int, Fraction]
    J: float
    J_exact: Fraction
    alpha_plus: float | None = None


@dataclass
class WeightTable:
    """Nonnegative weights indexed by n in [1, N] (values[n-1])."""

    N: int
    kind: str
    values: np.ndarray

    def value_at(self, n: int) -> float:
        if not 1 <= n <= self.N:
            raise PreconditionError("INDEX", f"n={n} outside [1, {self.N}]")
        return float(self.values[n - 1])

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        """(n indices, values) over the nonzero entries."""
        idx = np.flatnonzero(self.values)
        return idx + 1, self.values[idx]

    def total(self) -> float:
        return float(self.values.sum())


def _stable_floor(make_expr, start_dps: int = 40) -> int:
    """Floor of a high-precision expression, escalating precision until the
    value is provably not within rounding distance of an integer."""
    for dps in (start_dps, start_dps * 2, start_dps * 4):
        with mp.workdps(dps):
            v = make_expr()
            f = mp.floor(v)
            guard = mp.mpf(10) ** (-dps // 2)
            if v - f > guard and f + 1 - v > guard:
                return int(f)
    raise PreconditionError("PRECISION", "floor did not stabilize at 160 digits")


def default_wheel_modulus(k: int, w: float) -> int:
    """2 k^2 times the product of primes up to w (the factorial factor of
    the full construction is dropped at desk scale)."""
    prod = 1
    for p in sieve_upto(int(w)):
        prod *= int(p)
    return 2 * k * k * prod


def build_context(
    k: int,
    s: int,
    theta: float,
    M_i: int,
    *,
    delta: float | None = None,
    varrho: float = 0.05,
    w: float = 2.0,
    W_override: int | None = None,
    b: int = 1,
) -> WTrickContext:
    """Scale parameters for the subinterval anchored at M_i.

    x = (M_i/s)^(1/k); m and N come from the floor formulas
    m = floor((x - x^theta/(s k))^k / W) and
    N = floor(((x + x^theta - W)^k - (x - x^theta/s)^k) / W),
    evaluated at escalating precision so the floors are exact.
    """
    if not 0.5 < theta < 1.0:
        raise PreconditionError("THETA_RANGE", f"theta={theta} outside (1/2, 1)")
    if k < 2:
        raise PreconditionError("K_RANGE", f"k={k} must be >= 2")
    if s <= k:
        raise PreconditionError("S_RANGE", f"s={s} must exceed k={k}")
    if delta is None:
        delta = 0.9 * theta / k
    if delta >= theta / k:
        raise PreconditionError("DELTA_TOO_LARGE", f"delta={delta} >= theta/k = {theta / k}")
    if delta <= 0:
        raise PreconditionError("DELTA_RANGE", f"delta={delta} must be positive")
    W = int(W_override) if W_override is not None else default_wheel_modulus(k, w)
    if not 1 <= b <= W or math.gcd(b, W) != 1:
        raise PreconditionError("COPRIMALITY", f"b={b} not a unit in [1, {W}]")

    def m_expr():
        x = (mp.mpf(M_i) / s) ** (mp.mpf(1) / k)
        return (x - x**theta / (s * k)) ** k / W

    def n_expr():
        x = (mp.mpf(M_i) / s) ** (mp.mpf(1) / k)
        xt = x**theta
        return ((x + xt - W) ** k - (x - xt / s) ** k) / W

    m = _stable_floor(m_expr)
    N = _stable_floor(n_expr)
    if N <= 0:
        raise PreconditionError("NONPOSITIVE_N", f"window empty: N={N} for M_i={M_i}, W={W}")
    X = W * m + b
    Y = W * N
    x_center = float((M_i / s) ** (1.0 / k))
    z = float((W * m + 1) ** (delta / 2))  # shared across residues b
    ratio = Y / (((k * s + k) / s) * X ** (1 - 1 / k + theta / k))
    if not 0.8 <= ratio <= 1.25:
        raise PreconditionError("XY_RATIO", f"Y/X-scaling ratio {ratio:.4f} outside [0.8, 1.25]")
    return WTrickContext(
        k=k, s=s, theta=theta, delta=delta, varrho=varrho, w=w,
        W=W, b=b, m=m, N=N, X=X, Y=Y, z=z, D=z * z, x=x_center,
    )


def with_residue(ctx: WTrickContext, b: int) -> WTrickContext:
    """Same scales, different admissible residue b; z and D are shared."""
    if not 1 <= b <= ctx.W or math.gcd(b, ctx.W) != 1:
        raise PreconditionError("COPRIMALITY", f"b={b} not a unit in [1, {ctx.W}]")
    return dataclasses.replace(ctx, b=b, X=ctx.W * ctx.m + b)


@lru_cache(maxsize=256)
def _support_tuple(z_ceil: int, z_num: float, W: int) -> tuple[int, ...]:
    return tuple(
        d for d in range(1, z_ceil) if d < z_num and math.gcd(d, W) == 1 and is_squarefree(d)
    )


def sieve_support(z: float, W: int) -> tuple[int, ...]:
    """Squarefree d < z with gcd(d, W) = 1 (every prime factor is < z)."""
    if z > _MAX_SUPPORT:
        raise ResourceBudgetError(f"support for z={z} exceeds cap {_MAX_SUPPORT}")
    return _support_tuple(math.ceil(z), float(z), W)


def compute_J_exact(z: float, W: int) -> Fraction:
    return sum((Fraction(1, euler_phi(d)) for d in sieve_support(z, W)), Fraction(0))


def compute_J(z: float, W: int) -> float:
    """Sum of 1/phi(d) over the sieve support."""
    return float(compute_J_exact(z, W))


def selberg_weights(z: float, W: int, ctx: WTrickContext | None = None) -> SieveWeights:
    """Closed-form sieve weights on the support of (z, W).

    When a context is attached, alpha_plus = phi(W) log X / (k W J) is
    filled in as well.
    """
    support = sieve_support(z, W)
    if not support:
        raise PreconditionError("EMPTY_SUPPORT", f"no admissible d < z={z}")
    J_exact = compute_J_exact(z, W)
    phis = {d: euler_phi(d) for d in support}
    inv_phi = [Fraction(1, phis[d]) for d in support]
    rho_exact: dict[int, Fraction] = {}
    J_inv = 1 / J_exact
    for d in support:
        cut = bisect_left(support, math.ceil(z / d) + 1)
        acc = Fraction(0)
        for i in range(cut):
            e = support[i]
            if e * d < z and math.gcd(e, d) == 1:
                acc += inv_phi[i]
        rho_exact[d] = mobius(d) * Fraction(d, phis[d]) * J_inv * acc
    alpha = None
    if ctx is not None:
        if ctx.W != W:
            raise PreconditionError("CONTEXT_MISMATCH", f"context W={ctx.W} != {W}")
        alpha = euler_phi(W) * math.log(ctx.X) / (ctx.k * W * float(J_exact))
    return SieveWeights(
        z=float(z),
        W=W,
        support=support,
        rho={d: float(v) for d, v in rho_exact.items()},
        rho_exact=rho_exact,
        J=float(J_exact),
        J_exact=J_exact,
        alpha_plus=alpha,
    )


def alpha_plus(ctx: WTrickContext, weights: SieveWeights) -> float:
    """Majorant normalization phi(W) log X / (k W J)."""
    if weights.W != ctx.W:
        raise PreconditionError("CONTEXT_MISMATCH", f"weights W={weights.W} != context W={ctx.W}")
    return euler_phi(ctx.W) * math.log(ctx.X) / (ctx.k * ctx.W * weights.J)


def alpha_plus_report(ctx: WTrickContext, weights: SieveWeights) -> dict:
    """alpha_plus next to its large-X reference value 2/(k delta)."""
    value = alpha_plus(ctx, weights)
    reference = 2.0 / (ctx.k * ctx.delta)
    return {
        "alpha_plus": value,
        "reference_2_over_k_delta": reference,
        "ratio": value / reference,
    }


def rho_plus(t: int, weights: SieveWeights) -> float:
    """Squared sum of rho_d over support divisors d of t; always >= 0."""
    if t < 1:
        raise PreconditionError("T_RANGE", f"t={t} must be >= 1")
    acc = 0.0
    for d in weights.support:
        if t % d == 0:
            acc += weights.rho[d]
    return acc * acc


def diagonalization_identity(weights: SieveWeights) -> tuple[Fraction, Fraction]:
    """Exact (sum of rho_d1 rho_d2 / lcm, 1/J); the two must be equal."""
    lhs = Fraction(0)
    supp = weights.support
    for d1 in supp:
        r1 = weights.rho_exact[d1]
        for d2 in supp:
            lhs += r1 * weights.rho_exact[d2] / math.lcm(d1, d2)
    return lhs, 1 / weights.J_exact


def indicator_table(N: int) -> WeightTable:
    return WeightTable(N=N, kind=INDICATOR, values=np.ones(N, dtype=np.float64))


def root_progressions(ctx: WTrickContext) -> list[int]:
    """All t with X < t^k <= X+Y and t^k = b (mod W), found by stepping the
    admissible residue classes mod W; never scans [1, N]."""
    t_min = integer_kth_root(ctx.X, ctx.k) + 1
    t_max = integer_kth_root(ctx.X + ctx.Y, ctx.k)
    target = ctx.b % ctx.W
    out: list[int] = []
    for r in range(1, ctx.W + 1):
        if pow(r, ctx.k, ctx.W) != target:
            continue
        t0 = t_min + (r - t_min) % ctx.W
        out.extend(range(t0, t_max + 1, ctx.W))
    return sorted(out)


def table_constant(ctx: WTrickContext, weights: SieveWeights) -> float:
    """The single nonzero value phi(W) X^(1-1/k) log X / (alpha_plus W sigma_W(b))."""
    from .local import sigma_w

    a_plus = weights.alpha_plus or alpha_plus(ctx, weights)
    sigma = sigma_w(ctx.b, ctx.k, ctx.W)
    if sigma == 0:
        raise PreconditionError("UNSOLVABLE", f"b={ctx.b} is not a k-th power residue mod {ctx.W}")
    phi_w = euler_phi(ctx.W)
    return phi_w * ctx.X ** (1 - 1 / ctx.k) * math.log(ctx.X) / (a_plus * ctx.W * sigma)


def build_f_b(ctx: WTrickContext, weights: SieveWeights | None = None) -> WeightTable:
    """Prime k-th power table: the constant at every n with W(m+n)+b = p^k."""
    if weights is None:
        weights = selberg_weights(ctx.z, ctx.W, ctx)
    c = table_constant(ctx, weights)
    values = np.zeros(ctx.N, dtype=np.float64)
    for t in root_progressions(ctx):
        if is_prime(t):
            n = (t**ctx.k - ctx.b) // ctx.W - ctx.m
            values[n - 1] = c
    return WeightTable(N=ctx.N, kind=PRIME_POWER_F, values=values)


def build_v_b(ctx: WTrickContext, weights: SieveWeights) -> WeightTable:
    """Majorant table: constant times rho_plus(t) at every k-th power root."""
    c = table_constant(ctx, weights)
    values = np.zeros(ctx.N, dtype=np.float64)
    for t in root_progressions(ctx):
        n = (t**ctx.k - ctx.b) // ctx.W - ctx.m
        values[n - 1] = c * rho_plus(t, weights)
    return WeightTable(N=ctx.N, kind=MAJORANT_V, values=values)


def mean_condition_probe(
    table: WeightTable, s: int, varrho: float, epsilon: float, max_modulus: int = 20
) -> list[dict]:
    """Average of the table over every arithmetic progression of modulus
    <= max_modulus covering at least varrho * N points, with the
    transference mean threshold 1/s + epsilon flagged, not assumed."""
    out = []
    threshold = 1.0 / s + epsilon
    for q in range(1, max_modulus + 1):
        for offset in range(1, q + 1):
            sl = table.values[offset - 1 :: q]
            if sl.size < varrho * table.N:
                continue
            mean = float(sl.mean())
            out.append(
                {
                    "modulus": q,
                    "offset": offset,
                    "size": int(sl.size),
                    "mean": mean,
                    "meets_threshold": mean >= threshold,
                }
            )
    return out


def table_to_csv(table: WeightTable, path: str) -> None:
    """Full (n, value) rows; lossless but wide."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "value"])
        for n in range(1, table.N + 1):
            writer.writerow([n, repr(float(table.values[n - 1]))])


def table_from_csv(path: str, kind: str = INDICATOR) -> WeightTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["n", "value"]:
            raise PreconditionError("FORMAT", f"unexpected CSV header {header}")
        rows = [(int(r[0]), float(r[1])) for r in reader]
    if not rows:
        raise PreconditionError("FORMAT", "empty table CSV")
    N = max(r[0] for r in rows)
    values = np.zeros(N, dtype=np.float64)
    for n, v in rows:
        values[n - 1] = v
    return WeightTable(N=N, kind=kind, values=values)


def table_to_rle(table: WeightTable) -> bytes:
    """Compact run-length encoding of the nonzero constant runs."""
    values = table.values
    runs: list[tuple[int, int, float]] = []
    n = 0
    while n < table.N:
        v = values[n]
        if v == 0.0:
            n += 1
            continue
        start = n
        while n < table.N and values[n] == v:
            n += 1
        runs.append((start + 1, n - start, float(v)))
    head = _RLE_MAGIC + struct.pack("<BBQQ", 1, _KIND_CODES[table.kind], table.N, len(runs))
    body = b"".join(struct.pack("<QQd", a, l, v) for a, l, v in runs)
    return head + body


def table_from_rle(blob: bytes) -> WeightTable:
    if blob[:4] != _RLE_MAGIC:
        raise PreconditionError("FORMAT", "not a weight-table RLE blob")
    version, kind_code, N, nruns = struct.unpack("<BBQQ", blob[4:22])
    if version != 1:
        raise PreconditionError("FORMAT", f"unsupported RLE version {version}")
    values = np.zeros(N, dtype=np.float64)
    off = 22
    for _ in range(nruns):
        start, length, v = struct.unpack("<QQd", blob[off : off + 24])
        values[start - 1 : start - 1 + length] = v
        off += 24
    return WeightTable(N=int(N), kind=_KIND_NAMES[kind_code], values=values)


def table_to_rle_file(table: WeightTable, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(table_to_rle(table))


def table_from_rle_file(path: str) -> WeightTable:
    with open(path, "rb") as fh:
        return table_from_rle(fh.read())
