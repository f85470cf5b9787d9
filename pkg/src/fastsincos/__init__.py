"""Branch-free single-precision sine-cosine pairs.

Angles are reduced in turns, a quarter-angle series is evaluated, and two
double-angle steps expand the pair over the full circle.
"""

from .batch import PairBatch, sincos_batch, sincos_batch_interleaved
from .kernel import (
    ANGLE_ACCURATE_COEFFS,
    NORMALIZED_COEFFS,
    CoefficientSet,
    MagnitudeFix,
    PipelineConfig,
    SinCosPair,
    Variant,
    sincos,
)

__all__ = [
    "ANGLE_ACCURATE_COEFFS",
    "NORMALIZED_COEFFS",
    "CoefficientSet",
    "MagnitudeFix",
    "PairBatch",
    "PipelineConfig",
    "SinCosPair",
    "Variant",
    "sincos",
    "sincos_batch",
    "sincos_batch_interleaved",
]
