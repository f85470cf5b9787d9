"""Scalar reference implementation of the sine-cosine pipeline.

The angle is converted to turns and reduced onto [-1/2, 1/2] by rounding and
subtraction, a short polynomial gives the sine and cosine of a quarter of the
reduced angle, and two applications of the double-angle formula

    sin(2t) = 2 sin(t) cos(t),    cos(2t) = cos(t)**2 - sin(t)**2

carry the pair back over the whole circle.  That recursion squares any
amplitude error but leaves the angle alone, so the amplitude is repaired once
at the end from the magnitude of the pair before the last doubling.

Every value is a float32 held in a Python float and every step rounds exactly
as the vector code does, so this module is the numerical ground truth for the
batch path.  Nothing here branches on the value being computed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from ._float32 import (
    div32,
    fma32,
    mul32,
    mul_add32,
    round_even32,
    sqrt32,
    to_f32,
)

INV_TWO_PI = to_f32(1.0 / (2.0 * math.pi))


class Variant(str, enum.Enum):
    """Which coefficient family (and which amplitude repair) to use."""

    NORMALIZED = "normalized"
    ANGLE_ACCURATE = "accurate"


class MagnitudeFix(str, enum.Enum):
    PENULTIMATE = "penultimate"  # multiply by 2 - |p|^2 of the previous pair
    RECIPROCAL = "reciprocal"  # divide by |p|^2 of the previous pair
    NONE = "none"  # debugging only


_DEFAULT_FIX = {
    Variant.NORMALIZED: MagnitudeFix.PENULTIMATE,
    Variant.ANGLE_ACCURATE: MagnitudeFix.RECIPROCAL,
}


@dataclass(frozen=True)
class CoefficientSet:
    """Quarter-angle polynomial coefficients.

    ``sin_terms`` multiply x, x**3, x**5, ...; ``cos_terms`` multiply x**2,
    x**4, ... with the constant term fixed at 1.  Values are rounded to
    float32 on construction.
    """

    sin_terms: tuple
    cos_terms: tuple
    variant: Variant = Variant.NORMALIZED
    shipped: bool = False

    def __post_init__(self):
        sin_terms = tuple(to_f32(float(v)) for v in self.sin_terms)
        cos_terms = tuple(to_f32(float(v)) for v in self.cos_terms)
        if not sin_terms or not cos_terms:
            raise ValueError("need at least one sine and one cosine coefficient")
        if not all(math.isfinite(v) for v in sin_terms + cos_terms):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "sin_terms", sin_terms)
        object.__setattr__(self, "cos_terms", cos_terms)
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def ss1(self) -> float:
        return self.sin_terms[0]

    @property
    def ss2(self) -> float:
        return self.sin_terms[1]

    @property
    def ss3(self) -> float:
        return self.sin_terms[2]

    @property
    def ss4(self) -> float:
        return self.sin_terms[3]

    @property
    def cc1(self) -> float:
        return self.cos_terms[0]

    @property
    def cc2(self) -> float:
        return self.cos_terms[1]

    @property
    def cc3(self) -> float:
        return self.cos_terms[2]

    def shape_problems(self, doublings: int = 2) -> list:
        """List the ways this set departs from the expected series shape.

        The leading sine coefficient should be close to 2*pi / 2**doublings
        and the signs should alternate like the Taylor series.
        """
        problems = []
        lead = 2.0 * math.pi / 2**doublings
        tol = 1e-6 * 2.0 ** (2 - doublings)
        if abs(self.ss1 - lead) > tol:
            problems.append(f"ss1={self.ss1!r} is not within {tol:g} of {lead!r}")
        for k, v in enumerate(self.sin_terms):
            if (v > 0) != (k % 2 == 0):
                problems.append(f"ss{k + 1}={v!r} has the wrong sign")
        for k, v in enumerate(self.cos_terms):
            if (v > 0) != (k % 2 == 1):
                problems.append(f"cc{k + 1}={v!r} has the wrong sign")
        return problems

    def with_sin_term(self, index: int, value: float) -> "CoefficientSet":
        terms = list(self.sin_terms)
        terms[index] = value
        return CoefficientSet(tuple(terms), self.cos_terms, self.variant, self.shipped)

    def as_dict(self) -> dict:
        d = {f"ss{k + 1}": v for k, v in enumerate(self.sin_terms)}
        d.update({f"cc{k + 1}": v for k, v in enumerate(self.cos_terms)})
        return d


# Least-squares sine and cosine series (the fast path of the original listing).
NORMALIZED_COEFFS = CoefficientSet(
    (1.5707963235, -0.645963615, 0.0796819754, -0.0046075748),
    (-1.2336977925, 0.2536086171, -0.0204391631),
    Variant.NORMALIZED,
    shipped=True,
)

# The two published digit orders for ss2 of the angle-fitted series.  The
# listing's value gives the smaller worst-case error over [-pi, pi) and is the
# one shipped; ``fastsincos.fit.arbitrate_ss2`` recomputes that choice.
SS2_ANGLE_ACCURATE_TABLE = -0.6466386936
SS2_ANGLE_ACCURATE_LISTING = -0.6466386396

ANGLE_ACCURATE_COEFFS = CoefficientSet(
    (1.5707963268, SS2_ANGLE_ACCURATE_LISTING, 0.0679105987, -0.0011573807),
    (-1.2341299769, 0.2465220241, -0.0123926179),
    Variant.ANGLE_ACCURATE,
    shipped=True,
)

SHIPPED = {
    Variant.NORMALIZED: NORMALIZED_COEFFS,
    Variant.ANGLE_ACCURATE: ANGLE_ACCURATE_COEFFS,
}


@dataclass(frozen=True)
class PipelineConfig:
    """Variant, doubling count and numerics switches for one pipeline.

    ``coeffs`` defaults to the shipped set for ``variant``; shipped sets were
    fitted for exactly two doublings and reject any other count.  ``fix``
    defaults to the repair the variant needs.  ``fused=False`` replaces every
    fused multiply-add with a rounded multiply followed by a rounded add.
    """

    variant: Variant = Variant.NORMALIZED
    doublings: int = 2
    coeffs: Optional[CoefficientSet] = None
    fix: Optional[MagnitudeFix] = None
    fused: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.fix is not None:
            object.__setattr__(self, "fix", MagnitudeFix(self.fix))
        if isinstance(self.doublings, bool) or int(self.doublings) != self.doublings:
            raise ValueError(f"doublings must be an integer, got {self.doublings!r}")
        if self.doublings < 0:
            raise ValueError(f"doublings must be >= 0, got {self.doublings}")
        if self.coefficients.shipped and self.doublings != 2:
            raise ValueError(
                "shipped coefficient sets are fitted for 2 doublings, "
                f"not {self.doublings}"
            )

    @property
    def coefficients(self) -> CoefficientSet:
        return self.coeffs if self.coeffs is not None else SHIPPED[self.variant]

    @property
    def magnitude_fix(self) -> MagnitudeFix:
        return self.fix if self.fix is not None else _DEFAULT_FIX[self.variant]


@dataclass(frozen=True)
class SinCosPair:
    """A (sin, cos) pair after ``doublings`` doublings; ``final`` once repaired."""

    s: float
    c: float
    doublings: int = 0
    final: bool = False

    @property
    def stage(self) -> str:
        if self.final:
            return "final"
        if self.doublings == 0:
            return "raw"
        return f"doubled{self.doublings}"

    @property
    def magnitude_squared(self) -> float:
        return self.s * self.s + self.c * self.c


@dataclass(frozen=True)
class PerturbationModel:
    """Amplitude scale ``a`` and angle offset ``delta`` applied to an exact pair."""

    a: float = 1.0
    delta: float = 0.0

    def pair(self, theta: float) -> SinCosPair:
        t = theta + self.delta
        return SinCosPair(to_f32(self.a * math.sin(t)), to_f32(self.a * math.cos(t)))


def _fma(fused: bool):
    return fma32 if fused else mul_add32


def reduce_turns(theta: float) -> float:
    """Return theta/2pi minus its nearest integer, in float32 arithmetic."""
    x1 = mul32(to_f32(theta), INV_TWO_PI)
    # reduce |x1| and reapply the sign so that whole turns give a zero of the
    # same sign as theta; both steps are exact on the float32 grid
    a = abs(x1)
    return math.copysign(1.0, x1) * to_f32(a - round_even32(a))


def poly_quarter(x: float, coeffs: CoefficientSet, fused: bool = True) -> SinCosPair:
    """Evaluate the quarter-angle sine and cosine series by Horner's rule."""
    fma = _fma(fused)
    q = mul32(x, x)
    acc = coeffs.sin_terms[-1]
    for k in reversed(coeffs.sin_terms[:-1]):
        acc = fma(q, acc, k)
    s = mul32(x, acc)
    acc = coeffs.cos_terms[-1]
    for k in reversed(coeffs.cos_terms[:-1]):
        acc = fma(q, acc, k)
    c = fma(q, acc, 1.0)
    return SinCosPair(s, c, 0)


def double_angle(p: SinCosPair, fused: bool = True) -> SinCosPair:
    fma = _fma(fused)
    c = fma(-p.s, p.s, mul32(p.c, p.c))
    s = 2.0 * mul32(p.s, p.c)
    return SinCosPair(s, c, p.doublings + 1)


def _scale(p: SinCosPair, f: float) -> SinCosPair:
    return SinCosPair(mul32(p.s, f), mul32(p.c, f), p.doublings, final=True)


def penultimate_factor(penultimate: SinCosPair, fused: bool = True) -> float:
    """2 - (s**2 + c**2) of the pair one doubling before the last."""
    fma = _fma(fused)
    return fma(-penultimate.s, penultimate.s, fma(-penultimate.c, penultimate.c, 2.0))


def final_pair_factor(final: SinCosPair, fused: bool = True) -> float:
    """(3 - s**2 - c**2) / 2 of the final pair itself."""
    fma = _fma(fused)
    return mul32(fma(-final.s, final.s, fma(-final.c, final.c, 3.0)), 0.5)


def fix_magnitude_normalized(
    final: SinCosPair, penultimate: SinCosPair, fused: bool = True
) -> SinCosPair:
    """Scale by 2 - (s**2 + c**2) of the pair one doubling earlier.

    If that pair has magnitude 1+e, the final pair has magnitude
    (1+e)**2 ~ 1+2e while the factor is 1-2e, leaving an error of order e**2.
    """
    return _scale(final, penultimate_factor(penultimate, fused))


def fix_magnitude_reciprocal(
    final: SinCosPair, penultimate: SinCosPair, fused: bool = True
) -> SinCosPair:
    """Divide by s**2 + c**2 of the pair one doubling earlier.

    The final magnitude is exactly the square of the previous one, so this
    normalizes pairs whose amplitude is far from 1.
    """
    fma = _fma(fused)
    m = fma(penultimate.s, penultimate.s, mul32(penultimate.c, penultimate.c))
    return _scale(final, div32(1.0, m))


def fix_magnitude_final_pair(final: SinCosPair, fused: bool = True) -> SinCosPair:
    """Normalize using only the final pair; used when there was no doubling."""
    return _scale(final, final_pair_factor(final, fused))


def _fix_reciprocal_final_pair(final: SinCosPair, fused: bool = True) -> SinCosPair:
    fma = _fma(fused)
    m = fma(final.s, final.s, mul32(final.c, final.c))
    return _scale(final, div32(1.0, sqrt32(m)))


def sincos(theta: float, cfg: PipelineConfig = PipelineConfig()) -> SinCosPair:
    """Sine and cosine of ``theta`` (radians) as a float32 pair."""
    x = reduce_turns(theta)
    prev = None
    pair = poly_quarter(x, cfg.coefficients, cfg.fused)
    for _ in range(cfg.doublings):
        prev, pair = pair, double_angle(pair, cfg.fused)

    fix = cfg.magnitude_fix
    if fix is MagnitudeFix.NONE:
        return SinCosPair(pair.s, pair.c, pair.doublings, final=True)
    if prev is None:
        if fix is MagnitudeFix.PENULTIMATE:
            return fix_magnitude_final_pair(pair, cfg.fused)
        return _fix_reciprocal_final_pair(pair, cfg.fused)
    if fix is MagnitudeFix.PENULTIMATE:
        return fix_magnitude_normalized(pair, prev, cfg.fused)
    return fix_magnitude_reciprocal(pair, prev, cfg.fused)
