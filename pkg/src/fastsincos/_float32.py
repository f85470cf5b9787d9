"""Single-precision arithmetic primitives shared by the scalar and batch paths.

Python has no float32 scalar type or fused multiply-add, so both are emulated
on top of IEEE doubles.  Products of two float32 values are exact in double,
and the only extra rounding in ``a*b + c`` is repaired by converting the
double result with round-to-odd before the final narrowing.  Round-to-odd at
53 bits followed by round-to-nearest at 24 bits is equivalent to a single
correct rounding, so ``fma32`` matches a hardware float32 FMA bit for bit.
"""

from __future__ import annotations

import math
import struct

import numpy as np

_F32 = struct.Struct("<f")
_F64 = struct.Struct("<d")
_I64 = struct.Struct("<q")


def to_f32(x: float) -> float:
    """Round a Python float to the nearest float32 value (ties to even)."""
    try:
        return _F32.unpack(_F32.pack(x))[0]
    except OverflowError:
        return math.copysign(math.inf, x)


def mul32(a: float, b: float) -> float:
    return to_f32(a * b)


def add32(a: float, b: float) -> float:
    # double rounding of a single float32 add through binary64 is innocuous
    return to_f32(a + b)


def div32(a: float, b: float) -> float:
    try:
        return to_f32(a / b)
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def sqrt32(a: float) -> float:
    if a < 0.0:
        return math.nan
    return to_f32(math.sqrt(a))


def _round_to_odd(s: float, err: float) -> float:
    # ``s`` is round-to-nearest of s+err; move to the odd neighbour if inexact
    if err and math.isfinite(s) and math.isfinite(err):
        if not _I64.unpack(_F64.pack(s))[0] & 1:
            s = math.nextafter(s, math.copysign(math.inf, err))
    return s


def fma32(a: float, b: float, c: float) -> float:
    """Correctly rounded float32 ``a*b + c`` for float32-valued inputs."""
    p = a * b
    s = p + c
    bb = s - p
    err = (p - (s - bb)) + (c - bb)
    return to_f32(_round_to_odd(s, err))


def mul_add32(a: float, b: float, c: float) -> float:
    """Unfused ``a*b + c``: two float32 roundings (non-FMA fallback)."""
    return add32(mul32(a, b), c)


def round_even32(x: float) -> float:
    """Round to the nearest integer, ties to even; non-finite values pass through."""
    if not math.isfinite(x):
        return x
    return float(round(x))


# -- array versions ---------------------------------------------------------


def fma32_array(a, b, c) -> np.ndarray:
    """Vectorized ``fma32``; inputs must be float32 arrays or scalars."""
    p = np.multiply(a, b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(p + c)
    bb = s - p
    err = (p - (s - bb)) + (c - bb)
    bits = s.view(np.int64)
    inexact = (err > 0) | (err < 0)
    even = (bits & 1) == 0
    step = np.where((err > 0) == (s > 0), 1, -1)
    bits += (inexact & even) * step
    return s.astype(np.float32)


def mul_add32_array(a, b, c) -> np.ndarray:
    return np.multiply(a, b, dtype=np.float32) + np.asarray(c, dtype=np.float32)


def ulp32(x) -> np.ndarray:
    """Spacing between |x| and the next larger float32."""
    return np.spacing(np.abs(np.asarray(x, dtype=np.float32)))


def ulp_distance32(a, b) -> np.ndarray:
    """Number of float32 values between ``a`` and ``b`` (sign-aware ordering)."""
    ai = np.asarray(a, dtype=np.float32).view(np.int32).astype(np.int64)
    bi = np.asarray(b, dtype=np.float32).view(np.int32).astype(np.int64)
    ai = np.where(ai >= 0, ai, -(ai & 0x7FFFFFFF))
    bi = np.where(bi >= 0, bi, -(bi & 0x7FFFFFFF))
    return np.abs(ai - bi)
