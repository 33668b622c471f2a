"""Convolution kernels shared by the counting modules.

Two routes are provided and kept strictly separate so callers can use one
as an oracle for the other:

* ``convolve_exact`` - exact integer linear convolution.  Small products go
  through ``np.convolve`` on int64; anything larger (or with coefficients
  beyond int64) is done by Kronecker substitution: pack each sequence into
  one huge integer, multiply with GMP, unpack.  Always exact.
* ``convolve_float`` - real FFT convolution with the result rounded to
  integers and the worst rounding residual reported, so callers can reject
  the fast path when it is not trustworthy.
"""

from __future__ import annotations

import numpy as np
import gmpy2

from .errors import ResourceBudgetError

# Above this many int64 multiply-adds np.convolve loses to GMP.
_NP_CONVOLVE_CELLS = 30_000_000
_INT64_SAFE = 1 << 62
_FLOAT_EXACT = 1 << 53


def _seq_sum(a) -> int:
    if isinstance(a, np.ndarray):
        return int(a.sum(dtype=object))
    return sum(int(v) for v in a)


def _coefficient_bound(a, b) -> int:
    """Upper bound on any coefficient of a*b (nonnegative sequences)."""
    if len(a) == 0 or len(b) == 0:
        return 0
    amax, bmax = int(max(a)), int(max(b))
    return max(min(amax * _seq_sum(b), bmax * _seq_sum(a)), 0)


def _pack_int64(arr: np.ndarray, width: int) -> int:
    """Pack nonnegative int64 values as width-byte little-endian limbs."""
    if width > 8:
        raise ValueError("int64 packing supports width <= 8")
    raw = np.ascontiguousarray(arr.astype("<u8")).view(np.uint8).reshape(-1, 8)
    return int.from_bytes(raw[:, :width].tobytes(), "little")


def _unpack_int64(value: int, width: int, count: int) -> np.ndarray:
    buf = value.to_bytes(count * width, "little")
    raw = np.frombuffer(buf, dtype=np.uint8).reshape(count, width)
    out = np.zeros((count, 8), dtype=np.uint8)
    out[:, :width] = raw
    return out.view("<u8").reshape(count).astype(np.int64)


def _kronecker_int64(a: np.ndarray, b: np.ndarray, bound: int) -> np.ndarray:
    width = max(1, (bound.bit_length() + 7) // 8)
    prod = gmpy2.mpz(_pack_int64(a, width)) * gmpy2.mpz(_pack_int64(b, width))
    return _unpack_int64(int(prod), width, len(a) + len(b) - 1)


def _kronecker_bigint(a, b, bound: int) -> list[int]:
    width = max(1, (bound.bit_length() + 7) // 8)
    pa = int.from_bytes(b"".join(int(v).to_bytes(width, "little") for v in a), "little")
    pb = int.from_bytes(b"".join(int(v).to_bytes(width, "little") for v in b), "little")
    buf = int(gmpy2.mpz(pa) * gmpy2.mpz(pb)).to_bytes((len(a) + len(b) - 1) * width, "little")
    return [int.from_bytes(buf[i * width : (i + 1) * width], "little") for i in range(len(a) + len(b) - 1)]


def convolve_exact(a, b):
    """Exact linear convolution of nonnegative integer sequences.

    Returns an int64 array when every coefficient fits, else a list of
    Python ints.
    """
    if len(a) == 0 or len(b) == 0:
        return np.array([], dtype=np.int64)
    bound = _coefficient_bound(a, b)
    if bound >= _INT64_SAFE or not isinstance(a, np.ndarray) or not isinstance(b, np.ndarray):
        return _kronecker_bigint(list(a), list(b), bound)
    if len(a) * len(b) <= _NP_CONVOLVE_CELLS:
        return np.convolve(a.astype(np.int64), b.astype(np.int64))
    return _kronecker_int64(a.astype(np.int64), b.astype(np.int64), bound)


def convolve_float(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """FFT convolution rounded to int64 plus the max rounding residual."""
    out_len = len(a) + len(b) - 1
    size = 1 << (out_len - 1).bit_length()
    raw = np.fft.irfft(np.fft.rfft(a, size) * np.fft.rfft(b, size), size)[:out_len]
    rounded = np.rint(raw)
    residual = float(np.max(np.abs(raw - rounded))) if out_len else 0.0
    return rounded.astype(np.int64), residual


def _final_coefficient_bound(vec, s: int) -> int:
    """Bound on any coefficient of the s-fold self-convolution."""
    if len(vec) == 0:
        return 0
    return int(max(vec)) * _seq_sum(vec) ** (s - 1)


def self_power(
    vec,
    s: int,
    *,
    exact: bool = False,
    residual_cap: float = 0.25,
    max_len: int = 1 << 28,
):
    """s-fold self-convolution of a nonnegative integer sequence.

    Binary exponentiation with per-stage rounding on the float path; any
    stage whose rounding residual reaches ``residual_cap`` restarts the
    whole computation on the exact path.  Returns (coefficients,
    max_residual, used_exact).
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if (len(vec) - 1) * s + 1 > max_len:
        raise ResourceBudgetError(f"convolution output of {(len(vec) - 1) * s + 1} exceeds budget")
    if s == 1:
        out = vec.copy() if isinstance(vec, np.ndarray) else list(vec)
        return out, 0.0, False

    def run(exact_mode: bool):
        worst = 0.0
        result = None
        base = vec if exact_mode else np.asarray(vec, dtype=np.int64)
        e = s
        while True:
            if e & 1:
                if result is None:
                    result = base
                elif exact_mode:
                    result = convolve_exact(result, base)
                else:
                    result, r = convolve_float(result, base)
                    worst = max(worst, r)
                    if worst >= residual_cap:
                        return None, worst
            e >>= 1
            if not e:
                return result, worst
            if exact_mode:
                base = convolve_exact(base, base)
            else:
                base, r = convolve_float(base, base)
                worst = max(worst, r)
                if worst >= residual_cap:
                    return None, worst

    # The float path needs every intermediate count exactly representable.
    if not exact and _final_coefficient_bound(vec, s) < _FLOAT_EXACT:
        result, worst = run(False)
        if result is not None:
            return result, worst, False
    result, _ = run(True)
    return result, 0.0, True


def cyclic_self_power(vec, s: int, modulus: int, **kw):
    """Cyclic (mod ``modulus``) variant of ``self_power``; always exact."""
    full, _, _ = self_power(list(vec), s, exact=True, **kw)
    out = [0] * modulus
    for i, v in enumerate(full):
        out[i % modulus] += int(v)
    return out
