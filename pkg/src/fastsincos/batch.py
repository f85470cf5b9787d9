"""Array-in, array-out evaluation of the sine-cosine pipeline.

Inputs are processed in fixed-size lane groups, each group going through the
whole pipeline as a handful of numpy operations on float32 vectors.  The
numerics mirror :mod:`fastsincos.kernel` operation for operation, so every
element is bitwise identical to the scalar reference.

The interleaved variant feeds two lane groups through the pipeline per loop
iteration.  In numpy the cost it hides is per-operation dispatch overhead
rather than vector-unit latency, but the transformation is the same one: two
independent dependency chains issued together.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._float32 import fma32_array, mul_add32_array
from .kernel import INV_TWO_PI, MagnitudeFix, PipelineConfig

# vectors per lane group; one group's temporaries should stay cache resident
_VECTORS_PER_GROUP = 128

_F32 = np.float32


@lru_cache(maxsize=None)
def simd_lanes() -> int:
    """float32 lanes in the widest vector extension numpy reports."""
    try:
        from numpy._core._multiarray_umath import __cpu_features__ as features
    except ImportError:  # numpy < 2
        try:
            from numpy.core._multiarray_umath import __cpu_features__ as features
        except ImportError:
            return 4
    if features.get("AVX512F"):
        return 16
    if features.get("AVX") or features.get("ASIMD"):
        return 8 if features.get("AVX") else 4
    return 4


def lane_group_size() -> int:
    return simd_lanes() * _VECTORS_PER_GROUP


@dataclass
class PairBatch:
    """Structure-of-arrays result: ``sines[i]``, ``cosines[i]`` belong to input i."""

    sines: np.ndarray
    cosines: np.ndarray

    def __len__(self) -> int:
        return len(self.sines)

    def interleaved(self) -> np.ndarray:
        """(n, 2) array of (sin, cos) rows."""
        return np.column_stack([self.sines, self.cosines])


def _pipeline(theta: np.ndarray, cfg: PipelineConfig):
    """Full pipeline over a float32 array of any shape."""
    fma = fma32_array if cfg.fused else mul_add32_array
    coeffs = cfg.coefficients

    x1 = theta * _F32(INV_TWO_PI)
    a = np.abs(x1)
    x = np.copysign(_F32(1.0), x1) * (a - np.rint(a))
    q = x * x

    acc = np.full_like(q, coeffs.sin_terms[-1])
    for k in reversed(coeffs.sin_terms[:-1]):
        acc = fma(q, acc, _F32(k))
    s = x * acc
    acc = np.full_like(q, coeffs.cos_terms[-1])
    for k in reversed(coeffs.cos_terms[:-1]):
        acc = fma(q, acc, _F32(k))
    c = fma(q, acc, _F32(1.0))

    ps = pc = None
    for _ in range(cfg.doublings):
        ps, pc = s, c
        c = fma(-ps, ps, pc * pc)
        s = _F32(2.0) * (ps * pc)

    fix = cfg.magnitude_fix
    if fix is MagnitudeFix.NONE:
        return s, c
    if ps is None:
        if fix is MagnitudeFix.PENULTIMATE:
            f = fma(-s, s, fma(-c, c, _F32(3.0))) * _F32(0.5)
        else:
            f = _F32(1.0) / np.sqrt(fma(s, s, c * c))
    elif fix is MagnitudeFix.PENULTIMATE:
        f = fma(-ps, ps, fma(-pc, pc, _F32(2.0)))
    else:
        f = _F32(1.0) / fma(ps, ps, pc * pc)
    return s * f, c * f


def _as_angles(thetas) -> np.ndarray:
    return np.ascontiguousarray(thetas, dtype=np.float32).reshape(-1)


def _run(theta: np.ndarray, cfg: PipelineConfig, group: int, per_iter: int) -> PairBatch:
    n = len(theta)
    sines = np.empty(n, dtype=np.float32)
    cosines = np.empty(n, dtype=np.float32)
    span = group * per_iter
    body = n - n % span
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        for start in range(0, body, span):
            chunk = theta[start:start + span].reshape(per_iter, group)
            s, c = _pipeline(chunk, cfg)
            sines[start:start + span] = s.reshape(-1)
            cosines[start:start + span] = c.reshape(-1)
        if body < n:
            # tail: the same vector code on a shorter slice (masked lanes)
            s, c = _pipeline(theta[body:], cfg)
            sines[body:] = s
            cosines[body:] = c
    return PairBatch(sines, cosines)


def sincos_batch(thetas, cfg: PipelineConfig = PipelineConfig()) -> PairBatch:
    """Evaluate the pipeline for every angle in ``thetas`` (radians)."""
    return _run(_as_angles(thetas), cfg, lane_group_size(), 1)


def sincos_batch_interleaved(thetas, cfg: PipelineConfig = PipelineConfig()) -> PairBatch:
    """Same results as :func:`sincos_batch`, two lane groups per iteration."""
    return _run(_as_angles(thetas), cfg, lane_group_size(), 2)
