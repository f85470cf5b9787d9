"""Regenerate the quarter-angle coefficient tables by least squares.

Two objectives are supported.  The normalized fit solves two linear problems,
sine against an odd basis and cosine minus one against an even basis, so the
pair stays close to the unit circle.  The angle fit only asks that
atan2(S(x), C(x)) track the target angle and leaves the amplitude free; it is
nonlinear and solved by Gauss-Newton starting from the normalized solution.

All fitting is done in double precision on a symmetric grid over
[-1/2, 1/2] with unit weight, integrated with Simpson's rule (trapezoid for
an even number of points) so the fit converges as the grid is refined.
Only the returned coefficients are rounded to float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .accuracy import ErrorStats, SweepSpec, sweep
from .kernel import (
    ANGLE_ACCURATE_COEFFS,
    SS2_ANGLE_ACCURATE_LISTING,
    SS2_ANGLE_ACCURATE_TABLE,
    CoefficientSet,
    PipelineConfig,
    Variant,
)

# Gauss-Newton stops once the rms angle residual improves by less than this
RESIDUAL_TOL = 1e-14
MAX_ITERATIONS = 100
# Relative singular-value cutoff for the Gauss-Newton step.  Numerator and
# denominator can share a near-common factor that barely moves the angle;
# that direction is left where the seed put it.
STEP_RCOND = 1e-10


class FitError(ValueError):
    pass


class FitConvergenceError(FitError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class FitSpec:
    """What to fit.

    ``sin_terms`` counts the odd powers x, x**3, ...; ``cos_terms`` counts the
    even powers including the constant, which is fixed at 1.
    """

    variant: Variant = Variant.NORMALIZED
    sin_terms: int = 4
    cos_terms: int = 4
    doublings: int = 2
    grid_points: int = 4097
    eval_samples: int = 1_000_000

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.sin_terms < 2 or self.cos_terms < 2:
            raise ValueError("need at least 2 sine terms and 2 cosine terms")
        if self.doublings < 0:
            raise ValueError("doublings must be >= 0")
        if self.grid_points < 3:
            raise ValueError("grid needs at least 3 points")

    @property
    def angle_scale(self) -> float:
        """Radians per unit of reduced turn at the quarter-angle stage."""
        return 2.0 * math.pi / 2**self.doublings

    def grid(self):
        x = np.linspace(-0.5, 0.5, self.grid_points)
        x = 0.5 * (x - x[::-1])  # exact symmetry about 0
        return x, _quadrature_weights(self.grid_points)


@dataclass
class FitResult:
    coeffs: CoefficientSet
    residual_rms: float
    end_to_end_max_error: float
    end_to_end: ErrorStats
    doublings: int = 2
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    raw: np.ndarray = None  # double-precision solution before rounding

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(self.coeffs.variant, self.doublings, coeffs=self.coeffs)


def _quadrature_weights(n: int) -> np.ndarray:
    h = 1.0 / (n - 1)
    w = np.full(n, h)
    if n % 2 == 1:
        w[1:-1:2] = 4.0 * h / 3.0
        w[2:-1:2] = 2.0 * h / 3.0
        w[0] = w[-1] = h / 3.0
    else:
        w[0] = w[-1] = h / 2.0
    return w


def _odd_basis(x, n):
    return np.stack([x ** (2 * k + 1) for k in range(n)], axis=1)


def _even_basis(x, n):
    return np.stack([x ** (2 * k + 2) for k in range(n)], axis=1)


def _weighted_lstsq(a, b, sw):
    sol, _, rank, _ = np.linalg.lstsq(a * sw[:, None], b * sw, rcond=None)
    if rank < a.shape[1]:
        raise FitError(f"singular least-squares system (rank {rank} < {a.shape[1]})")
    return sol


def _series(p, n_sin, x):
    s = _odd_basis(x, n_sin) @ p[:n_sin]
    c = 1.0 + _even_basis(x, len(p) - n_sin) @ p[n_sin:]
    return s, c


def _angle_residual(p, n_sin, x, w):
    s, c = _series(p, n_sin, x)
    ct, st = np.cos(w * x), np.sin(w * x)
    # angle of (c, s) relative to the target, free of atan2 branch cuts
    return np.arctan2(s * ct - c * st, c * ct + s * st), s, c


def _end_to_end(coeffs: CoefficientSet, spec: FitSpec) -> ErrorStats:
    cfg = PipelineConfig(coeffs.variant, spec.doublings, coeffs=coeffs)
    return sweep(SweepSpec(samples=spec.eval_samples), cfg)


def _normalized_solution(spec: FitSpec):
    x, wq = spec.grid()
    sw = np.sqrt(wq)
    w = spec.angle_scale
    ss = _weighted_lstsq(_odd_basis(x, spec.sin_terms), np.sin(w * x), sw)
    cc = _weighted_lstsq(_even_basis(x, spec.cos_terms - 1), np.cos(w * x) - 1.0, sw)
    p = np.concatenate([ss, cc])
    s, c = _series(p, spec.sin_terms, x)
    resid = np.concatenate([s - np.sin(w * x), c - np.cos(w * x)])
    rms = math.sqrt(np.sum(np.concatenate([wq, wq]) * resid**2) / 2.0)
    return p, rms


def _result(p, spec, variant, rms, iterations=0, history=()):
    coeffs = CoefficientSet(tuple(p[: spec.sin_terms]), tuple(p[spec.sin_terms:]), variant)
    stats = _end_to_end(coeffs, spec)
    return FitResult(
        coeffs=coeffs,
        residual_rms=rms,
        end_to_end_max_error=stats.max_combined,
        end_to_end=stats,
        doublings=spec.doublings,
        iterations=iterations,
        residual_history=list(history),
        raw=p,
    )


def fit_normalized(spec: FitSpec = FitSpec()) -> FitResult:
    """Independent least-squares series for the quarter-angle sine and cosine."""
    if spec.variant is not Variant.NORMALIZED:
        raise ValueError("fit_normalized needs a normalized FitSpec")
    p, rms = _normalized_solution(spec)
    return _result(p, spec, Variant.NORMALIZED, rms)


def gauss_newton_angle(p0, spec: FitSpec):
    """Minimize the weighted squared angle residual starting from ``p0``.

    Returns ``(p, history)`` where history holds the rms residual before each
    step and at the end.
    """
    x, wq = spec.grid()
    sw = np.sqrt(wq)
    w = spec.angle_scale
    n = spec.sin_terms
    p = np.array(p0, dtype=np.float64)
    p_prev = p
    history = []
    for it in range(MAX_ITERATIONS + 1):
        r, s, c = _angle_residual(p, n, x, w)
        rms = math.sqrt(np.sum(wq * r * r))
        if history and history[-1] - rms < RESIDUAL_TOL:
            if rms > history[-1]:
                # the last step went uphill: keep the point before it
                p, rms = p_prev, history[-1]
            history.append(rms)
            return p, history
        history.append(rms)
        if it == MAX_ITERATIONS:
            break
        m = s * s + c * c
        jac = np.concatenate(
            [_odd_basis(x, n) * (c / m)[:, None], _even_basis(x, len(p) - n) * (-s / m)[:, None]],
            axis=1,
        )
        step, *_ = np.linalg.lstsq(jac * sw[:, None], -r * sw, rcond=STEP_RCOND)
        p_prev, p = p, p + step
    raise FitConvergenceError(
        f"Gauss-Newton did not converge in {MAX_ITERATIONS} iterations "
        f"(rms angle residual {history[-1]:.3e})",
        residual=history[-1],
        iterations=MAX_ITERATIONS,
    )


def fit_angle_accurate(spec: FitSpec = FitSpec(Variant.ANGLE_ACCURATE)) -> FitResult:
    """Fit the series so that atan2(S, C) matches the angle; amplitude is free."""
    if spec.variant is not Variant.ANGLE_ACCURATE:
        raise ValueError("fit_angle_accurate needs an angle-accurate FitSpec")
    seed, _ = _normalized_solution(replace(spec, variant=Variant.NORMALIZED))
    p, history = gauss_newton_angle(seed, spec)
    return _result(p, spec, Variant.ANGLE_ACCURATE, history[-1], len(history) - 1, history)


def fit(spec: FitSpec) -> FitResult:
    if spec.variant is Variant.NORMALIZED:
        return fit_normalized(spec)
    return fit_angle_accurate(spec)


@dataclass
class Arbitration:
    chosen: float
    max_errors: dict  # candidate value -> end-to-end max combined error
    rms_errors: dict
    tie: bool


def arbitrate_ss2(
    base: CoefficientSet = ANGLE_ACCURATE_COEFFS,
    candidates: Sequence[float] = (SS2_ANGLE_ACCURATE_TABLE, SS2_ANGLE_ACCURATE_LISTING),
    samples: int = 1_000_000,
    tie_tol: float = 1e-9,
) -> Arbitration:
    """Pick the ss2 candidate with the smaller end-to-end worst-case error.

    On a tie (within ``tie_tol``) the first candidate wins.
    """
    base = CoefficientSet(base.sin_terms, base.cos_terms, base.variant)
    max_errors, rms_errors = {}, {}
    for value in candidates:
        coeffs = base.with_sin_term(1, value)
        stats = sweep(SweepSpec(samples=samples), PipelineConfig(coeffs.variant, coeffs=coeffs))
        max_errors[value] = stats.max_combined
        rms_errors[value] = stats.rms_combined
    best = min(candidates, key=lambda v: max_errors[v])
    first = candidates[0]
    tie = all(abs(max_errors[v] - max_errors[first]) <= tie_tol for v in candidates)
    return Arbitration(first if tie else best, max_errors, rms_errors, tie)
