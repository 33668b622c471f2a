"""Fourier diagnostics: transforms, exponential sums, arcs, norms.

The transform convention is f_hat(alpha) = sum_n f(n) e(n alpha) with
e(x) = exp(2 pi i x).  Grid spectra are computed by FFT on G >= 2N points;
the grid value at j is f_hat(j/G).

The exponential sum over k-th power roots is evaluated with exact dyadic
phase reduction: a float alpha is a dyadic rational, so t^k * alpha / W
can be reduced mod 1 in integer arithmetic before any rounding happens.
Phase error then stays at machine epsilon even for t^k ~ 10^12.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, ResourceBudgetError
from .sieve import SieveWeights, WTrickContext, WeightTable, build_v_b, indicator_table, root_progressions, rho_plus, table_constant

_MAX_GRID = 1 << 26
_MAX_ARC_COUNT = 5_000_000


def dft_at(table: WeightTable, alpha: float) -> complex:
    """Direct-formula transform value (pairwise-compensated summation)."""
    idx = np.flatnonzero(table.values)
    if idx.size == 0:
        return 0j
    ns = (idx + 1).astype(np.float64)
    terms = table.values[idx] * np.exp((2j * np.pi * alpha) * ns)
    return complex(np.add.reduce(terms))


@dataclass
class Spectrum:
    """Grid spectrum of a real table; stores the nonnegative half only."""

    grid_size: int
    N: int
    table_sum: float
    half: np.ndarray  # f_hat(j/G) for j = 0 .. G//2

    def value(self, j: int) -> complex:
        j %= self.grid_size
        if j <= self.grid_size // 2:
            return complex(self.half[j])
        return complex(np.conj(self.half[self.grid_size - j]))

    def abs_half(self) -> np.ndarray:
        return np.abs(self.half)

    def half_weights(self) -> np.ndarray:
        """Multiplicity of each stored bin when summing over the full grid."""
        w = np.full(self.half.shape, 2.0)
        w[0] = 1.0
        if self.grid_size % 2 == 0:
            w[-1] = 1.0
        return w

    def to_csv(self, path: str, stride: int = 1, max_rows: int = 5_000_000) -> None:
        import csv

        rows = range(0, self.grid_size, stride)
        if len(rows) > max_rows:
            raise ResourceBudgetError(f"{len(rows)} spectrum rows exceed cap {max_rows}")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j", "real", "imag"])
            for j in rows:
                v = self.value(j)
                writer.writerow([j, repr(v.real), repr(v.imag)])


def spectrum(table: WeightTable, G: int) -> Spectrum:
    """FFT rendering of the transform on the G-point grid (G >= 2N)."""
    if G < 2 * table.N:
        raise PreconditionError("GRID_TOO_SMALL", f"G={G} < 2N = {2 * table.N}")
    if G > _MAX_GRID:
        raise ResourceBudgetError(f"grid {G} exceeds cap {_MAX_GRID}")
    buf = np.zeros(G, dtype=np.float64)
    buf[1 : table.N + 1] = table.values
    half = np.conj(np.fft.rfft(buf))
    return Spectrum(grid_size=G, N=table.N, table_sum=float(table.values.sum()), half=half)


def default_grid(N: int) -> int:
    """Smallest power of two at least 16N."""
    return 1 << max(1, (16 * N - 1).bit_length())


def dirichlet_hat(N: int, alpha: float) -> complex:
    """Closed form of the indicator transform sum_{n<=N} e(n alpha)."""
    frac = alpha % 1.0
    s = math.sin(math.pi * frac)
    if s == 0.0:
        return complex(N)
    return cmath.exp(1j * math.pi * (N + 1) * frac) * math.sin(math.pi * N * frac) / s


def _dyadic_phase_parts(alpha: float) -> tuple[int, int]:
    """alpha as an exact fraction num/den with den a power of two."""
    f = Fraction(float(alpha) % 1.0)
    return f.numerator, f.denominator


def exponential_sum(ctx: WTrickContext, weights: SieveWeights, alpha: float) -> complex:
    """Sum of rho_plus(t) e(t^k alpha / W) over admissible roots t."""
    num, den = _dyadic_phase_parts(alpha)
    den_w = den * ctx.W
    re: list[float] = []
    im: list[float] = []
    for t in root_progressions(ctx):
        weight = rho_plus(t, weights)
        r = (t**ctx.k * num) % den_w
        ph = cmath.exp(2j * math.pi * (r / den_w))
        re.append(weight * ph.real)
        im.append(weight * ph.imag)
    return complex(math.fsum(re), math.fsum(im))


def factored_majorant_transform(ctx: WTrickContext, weights: SieveWeights, alpha: float) -> complex:
    """The majorant transform assembled from the root exponential sum:
    e(-(X/W) alpha) times the table constant times that sum.  Must match
    dft_at on the majorant table at every alpha."""
    num, den = _dyadic_phase_parts(alpha)
    den_w = den * ctx.W
    r = (ctx.X * num) % den_w
    prefactor = cmath.exp(-2j * math.pi * (r / den_w))
    return prefactor * table_constant(ctx, weights) * exponential_sum(ctx, weights, alpha)


@dataclass(frozen=True)
class ArcLabel:
    kind: str  # "MAJOR" or "MINOR"
    q: int | None
    a: int | None
    distance: float


@dataclass(frozen=True)
class ArcDissection:
    """Rational arcs of height Q = (log X)^q_exponent and width 1/(qT)."""

    X: int
    Y: int
    A: float = 10.0
    q_exponent: float | None = None

    @property
    def exponent(self) -> float:
        return self.A if self.q_exponent is None else self.q_exponent

    @property
    def Q(self) -> float:
        return math.log(self.X) ** self.exponent

    @property
    def T(self) -> float:
        return self.Y / self.Q

    @property
    def measure_bound(self) -> float:
        return 2.0 * self.Q**2 / self.T

    def arcs(self) -> list[tuple[int, int, float, float]]:
        """(q, a, center, halfwidth) for all arcs; guarded by a size cap."""
        q_max = int(self.Q)
        if q_max * q_max > 2 * _MAX_ARC_COUNT:
            raise ResourceBudgetError(f"about {q_max * q_max // 3} arcs exceed cap {_MAX_ARC_COUNT}")
        out = []
        for q in range(1, q_max + 1):
            hw = 1.0 / (q * self.T)
            for a in range(1, q + 1):
                if math.gcd(a, q) == 1:
                    out.append((q, a, a / q, hw))
        return out


def _convergents(value: Fraction):
    num, den = value.numerator, value.denominator
    p0, q0 = 0, 1
    p1, q1 = 1, 0
    while den:
        a = num // den
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield p1, q1
        num, den = den, num - a * den


def classify(alpha: float, dissection: ArcDissection) -> ArcLabel:
    """Locate alpha in the arc dissection.

    Containing arcs are found through continued-fraction convergents: any
    rational a/q with q <= Q and |alpha - a/q| <= 1/(qT) <= 1/(2 q^2) is a
    convergent of alpha, so scanning convergents is exhaustive whenever
    the dissection is disjoint.  Small q are also brute-forced so the
    reported distance for minor alpha is meaningful.
    """
    alpha = float(alpha) % 1.0
    exact = Fraction(alpha)
    q_cap = int(dissection.Q)
    T = dissection.T
    candidates: set[tuple[int, int]] = set()
    for p, q in _convergents(exact):
        if q > q_cap:
            break
        candidates.add((p, q))
    for q in range(1, min(q_cap, 512) + 1):
        a = round(alpha * q)
        g = math.gcd(a, q) or 1  # gcd(0, q) = q reduces to the arc at 0/1
        candidates.add((a // g, q // g))
    best_gap = math.inf
    hits = []
    for p, q in candidates:
        if q < 1 or q > q_cap:
            continue
        dist = abs(alpha - p / q)
        gap = dist - 1.0 / (q * T)
        if gap <= 0:
            hits.append((q, p, dist))
        best_gap = min(best_gap, gap)
    if hits:
        q, p, dist = min(hits)
        a = p % q
        if a == 0:
            a = q  # the arc centered at the integer point
        return ArcLabel(kind="MAJOR", q=q, a=a, distance=dist)
    return ArcLabel(kind="MINOR", q=None, a=None, distance=max(best_gap, 0.0))


def _minor_mask_half(G: int, dissection: ArcDissection) -> np.ndarray:
    """Boolean minor-arc mask for grid points j/G, j = 0 .. G//2.

    The dissection is symmetric under alpha -> 1 - alpha, so the half mask
    determines the full circle.
    """
    q_max = int(dissection.Q)
    if q_max * (q_max + 1) // 2 > _MAX_ARC_COUNT:
        raise ResourceBudgetError(f"minor mask for Q={dissection.Q:.3g} exceeds arc cap")
    half_len = G // 2 + 1
    minor = np.ones(half_len, dtype=bool)
    T = dissection.T
    for q in range(1, q_max + 1):
        hw = 1.0 / (q * T)
        for a in range(0, q + 1):
            if math.gcd(a, q) != 1 and not (a == 0 and q == 1):
                continue
            center = a / q
            lo = math.ceil((center - hw) * G)
            hi = math.floor((center + hw) * G)
            if lo > hi:
                continue
            lo_c = max(lo, 0)
            hi_c = min(hi, half_len - 1)
            if lo_c <= hi_c:
                minor[lo_c : hi_c + 1] = False
    return minor


def golden_section_max(fn, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    """Deterministic golden-section maximization on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    x = (a + b) / 2.0
    return x, fn(x)


def pseudorandomness_report(
    ctx: WTrickContext,
    weights: SieveWeights,
    G: int,
    *,
    q_exponent: float = 2.0,
    table: WeightTable | None = None,
    refine_top: int = 10,
    golden_iters: int = 60,
) -> dict:
    """Sup distance between the majorant transform and the indicator
    transform, normalized by N, over the grid and refined locally.

    q_exponent controls the arc height for the minor-arc restriction; the
    production-size default exponent would make every point major at desk
    scale, so a small desk default is used here.
    """
    v = table if table is not None else build_v_b(ctx, weights)
    N = v.N
    sv = spectrum(v, G)
    s1 = spectrum(indicator_table(N), G)
    diff = np.abs(sv.half - s1.half) / N
    grid_sup_idx = int(np.argmax(diff))
    grid_sup = float(diff[grid_sup_idx])

    def objective(alpha: float) -> float:
        return abs(dft_at(v, alpha) - dirichlet_hat(N, alpha)) / N

    top = min(refine_top, diff.size)
    top_idx = np.argpartition(diff, -top)[-top:]
    sup_all = grid_sup
    argmax_alpha = grid_sup_idx / G
    for j in top_idx:
        lo = max((int(j) - 1) / G, 0.0)
        hi = min((int(j) + 1) / G, 0.5)
        x, fx = golden_section_max(objective, lo, hi, iters=golden_iters)
        if fx > sup_all:
            sup_all, argmax_alpha = fx, x
    dissection = ArcDissection(X=ctx.X, Y=ctx.Y, q_exponent=q_exponent)
    minor = _minor_mask_half(G, dissection)
    if minor.any():
        sup_minor = float(diff[minor].max())
    else:
        sup_minor = 0.0
    return {
        "N": N,
        "G": G,
        "q_exponent": q_exponent,
        "Q": dissection.Q,
        "T": dissection.T,
        "grid_sup": grid_sup,
        "sup_all": float(sup_all),
        "sup_minor": sup_minor,
        "minor_fraction": float(minor.mean()),
        "argmax_alpha": float(argmax_alpha),
    }


def restriction_norm(table: WeightTable, q_exp: float, G: int) -> dict:
    """Quadrature L^q norm of the transform and its ratio to N^(1-1/q)."""
    if q_exp <= 1.0:
        raise PreconditionError("Q_RANGE", f"q={q_exp} must exceed 1")
    spec = spectrum(table, G)
    mags = spec.abs_half()
    weights = spec.half_weights()
    mean_pow = float(np.dot(weights, mags**q_exp) / G)
    norm = mean_pow ** (1.0 / q_exp)
    scale = table.N ** (1.0 - 1.0 / q_exp)
    return {
        "q": q_exp,
        "G": G,
        "N": table.N,
        "norm": norm,
        "scale": scale,
        "ratio": norm / scale,
    }
