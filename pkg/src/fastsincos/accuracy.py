"""Error statistics of the float32 pipeline against a double-precision reference.

The combined error of one angle is the Euclidean distance between the
computed pair and (sin, cos) of the same float32 angle evaluated in double
precision.  The amplitude error is 1 - sqrt(s**2 + c**2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernel
from ._float32 import to_f32
from .batch import sincos_batch
from .kernel import PipelineConfig, Variant

DEFAULT_SEED = 0x5EED

# samples per partition when accumulating sums of squares
_PARTITION = 1 << 16


class Sampling(str, enum.Enum):
    GRID = "grid"
    RANDOM = "random"


@dataclass(frozen=True)
class SweepSpec:
    lo: float = -math.pi
    hi: float = math.pi
    samples: int = 1_000_000
    sampling: Sampling = Sampling.GRID
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "sampling", Sampling(self.sampling))
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("sweep bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty sweep range [{self.lo}, {self.hi})")
        if self.samples < 2:
            raise ValueError(f"need at least 2 samples, got {self.samples}")

    def angles(self) -> np.ndarray:
        """float32 sample angles in [lo, hi)."""
        if self.sampling is Sampling.GRID:
            t = self.lo + (self.hi - self.lo) * (np.arange(self.samples) / self.samples)
        else:
            rng = np.random.default_rng(self.seed)
            t = rng.uniform(self.lo, self.hi, self.samples)
        return t.astype(np.float32)


@dataclass(frozen=True)
class ErrorStats:
    rms_combined: float
    max_combined: float
    max_amplitude: float
    worst_theta: float
    samples: int

    def as_dict(self) -> dict:
        return asdict(self)


# Acceptance bounds over [-pi, pi): the published figures plus 1.25-1.5x slack.
BOUNDS = {
    Variant.NORMALIZED: {"rms_combined": 1.5e-7, "max_combined": 5.5e-7, "max_amplitude": 2.5e-7},
    Variant.ANGLE_ACCURATE: {"rms_combined": 1.3e-7, "max_combined": 4.5e-7, "max_amplitude": 5e-7},
}


def exceeded_bounds(stats: ErrorStats, variant: Variant) -> list:
    """Names of the statistics above the variant's acceptance bound."""
    bounds = BOUNDS[Variant(variant)]
    return [k for k, limit in bounds.items() if not getattr(stats, k) <= limit]


def reference_pair(theta):
    """(sin, cos) in double precision of the angle(s) widened to double."""
    t = np.asarray(theta, dtype=np.float64)
    return np.sin(t), np.cos(t)


def combined_error(theta: float, cfg: PipelineConfig = PipelineConfig()) -> float:
    t = to_f32(theta)
    p = kernel.sincos(t, cfg)
    return math.hypot(p.s - math.sin(t), p.c - math.cos(t))


def amplitude_error(theta: float, cfg: PipelineConfig = PipelineConfig()) -> float:
    p = kernel.sincos(theta, cfg)
    return 1.0 - math.sqrt(p.s * p.s + p.c * p.c)


def pair_errors(theta: np.ndarray, cfg: PipelineConfig = PipelineConfig()):
    """Per-angle combined and amplitude errors for a float32 array."""
    theta = np.asarray(theta, dtype=np.float32)
    out = sincos_batch(theta, cfg)
    s = out.sines.astype(np.float64)
    c = out.cosines.astype(np.float64)
    rs, rc = reference_pair(theta)
    combined = np.hypot(s - rs, c - rc)
    amplitude = 1.0 - np.sqrt(s * s + c * c)
    return combined, amplitude


def sweep(spec: SweepSpec = SweepSpec(), cfg: PipelineConfig = PipelineConfig()) -> ErrorStats:
    """Error statistics over the angles of ``spec``.

    Partitions are reduced independently and combined in index order, so the
    result does not depend on how the work is split.
    """
    theta = spec.angles()
    sum_sq = 0.0
    worst = -1.0
    worst_theta = math.nan
    max_amp = 0.0
    for start in range(0, len(theta), _PARTITION):
        part = theta[start:start + _PARTITION]
        combined, amplitude = pair_errors(part, cfg)
        sum_sq += float(np.sum(combined * combined))
        i = int(np.argmax(combined))
        if combined[i] > worst:
            worst = float(combined[i])
            worst_theta = float(part[i])
        max_amp = max(max_amp, float(np.max(np.abs(amplitude))))
    return ErrorStats(
        rms_combined=math.sqrt(sum_sq / len(theta)),
        max_combined=worst,
        max_amplitude=max_amp,
        worst_theta=worst_theta,
        samples=len(theta),
    )
