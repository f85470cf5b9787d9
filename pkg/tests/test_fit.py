import math
from dataclasses import replace

import numpy as np
import pytest

from fastsincos import fit
from fastsincos._float32 import to_f32
from fastsincos.accuracy import SweepSpec, sweep
from fastsincos.batch import sincos_batch
from fastsincos.fit import (
    FitConvergenceError,
    FitError,
    FitSpec,
    arbitrate_ss2,
    fit_angle_accurate,
    fit_normalized,
    gauss_newton_angle,
)
from fastsincos.kernel import (
    ANGLE_ACCURATE_COEFFS,
    NORMALIZED_COEFFS,
    SS2_ANGLE_ACCURATE_LISTING,
    SS2_ANGLE_ACCURATE_TABLE,
    PipelineConfig,
    Variant,
    poly_quarter,
    sincos,
)

NORMALIZED_SPEC = FitSpec(Variant.NORMALIZED)
ACCURATE_SPEC = FitSpec(Variant.ANGLE_ACCURATE)


@pytest.fixture(scope="module")
def normalized():
    return fit_normalized(NORMALIZED_SPEC)


@pytest.fixture(scope="module")
def accurate():
    return fit_angle_accurate(ACCURATE_SPEC)


@pytest.fixture(scope="module")
def arbitration():
    return arbitrate_ss2()


# FitSpec


def test_grid_is_symmetric_and_weights_integrate_to_one():
    for n in (4097, 4096, 5):
        x, w = FitSpec(grid_points=n).grid()
        assert np.array_equal(x, -x[::-1])
        assert x[0] == -0.5 and x[-1] == 0.5
        assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)
        assert np.array_equal(w, w[::-1])


@pytest.mark.parametrize("kwargs", [
    {"sin_terms": 1}, {"cos_terms": 1}, {"doublings": -1}, {"grid_points": 2},
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        FitSpec(**kwargs)


def test_angle_scale_tracks_doublings():
    assert FitSpec(doublings=2).angle_scale == math.pi / 2
    assert FitSpec(doublings=0).angle_scale == 2 * math.pi


def test_fitters_reject_the_wrong_variant():
    with pytest.raises(ValueError):
        fit_normalized(ACCURATE_SPEC)
    with pytest.raises(ValueError):
        fit_angle_accurate(NORMALIZED_SPEC)


def test_singular_grid_raises():
    # more unknowns than distinct grid points
    with pytest.raises(FitError):
        fit_normalized(FitSpec(sin_terms=4, cos_terms=4, grid_points=3, eval_samples=100))


# normalized fit


def test_normalized_ss1_close_to_shipped(normalized):
    assert abs(normalized.coeffs.ss1 - 1.5707963235) <= 1e-6


def test_normalized_coefficients_close_to_shipped(normalized):
    got = normalized.coeffs.sin_terms + normalized.coeffs.cos_terms
    want = NORMALIZED_COEFFS.sin_terms + NORMALIZED_COEFFS.cos_terms
    assert max(abs(a - b) for a, b in zip(got, want)) <= 1e-4


def test_normalized_end_to_end_error(normalized):
    assert normalized.end_to_end_max_error <= 7.2e-7
    assert normalized.end_to_end.samples == 1_000_000


def test_end_to_end_error_comes_from_the_kernel(normalized):
    stats = sweep(SweepSpec(), normalized.pipeline())
    assert stats.max_combined == normalized.end_to_end_max_error


def test_normalized_result_is_float32(normalized):
    c = normalized.coeffs
    assert all(v == to_f32(v) for v in c.sin_terms + c.cos_terms)
    assert normalized.raw.dtype == np.float64
    assert c.shape_problems() == []


def test_more_sine_terms_lower_the_error(normalized):
    five = fit_normalized(replace(NORMALIZED_SPEC, sin_terms=5))
    assert len(five.coeffs.sin_terms) == 5
    assert five.end_to_end_max_error < normalized.end_to_end_max_error


def test_zero_doublings_fit_is_worse(normalized):
    direct = fit_normalized(replace(NORMALIZED_SPEC, doublings=0))
    # a full-turn least-squares fit is far from the Taylor series, but still
    # leads with roughly 2*pi
    assert abs(direct.coeffs.ss1 - 2 * math.pi) <= 1e-2
    assert direct.end_to_end_max_error > normalized.end_to_end_max_error


@pytest.mark.parametrize("variant", list(Variant))
def test_grid_refinement_barely_moves_coefficients(variant):
    a = fit.fit(FitSpec(variant, eval_samples=1000))
    b = fit.fit(FitSpec(variant, grid_points=8193, eval_samples=1000))
    assert np.max(np.abs(a.raw - b.raw)) < 1e-9


# angle fit


def test_accurate_end_to_end_error(accurate):
    assert accurate.end_to_end_max_error <= 5.7e-7


def test_accurate_ss1_is_half_pi_to_one_ulp(accurate):
    ss1 = np.float32(accurate.coeffs.ss1)
    half_pi = np.float32(math.pi / 2)
    assert abs(float(ss1) - math.pi / 2) <= float(np.spacing(half_pi))
    assert abs(int(ss1.view(np.int32)) - int(half_pi.view(np.int32))) <= 1


def test_accurate_raw_pair_is_not_unit(accurate):
    p = poly_quarter(0.5, accurate.coeffs)
    assert abs(math.hypot(p.s, p.c) - 1) > 1e-3


def test_first_gauss_newton_step_reduces_residual(accurate):
    h = accurate.residual_history
    assert len(h) >= 2 and h[1] < h[0]
    assert accurate.iterations == len(h) - 1
    assert accurate.residual_rms == h[-1]


def test_gauss_newton_stops_at_a_local_minimum(accurate):
    x, w = ACCURATE_SPEC.grid()
    n = ACCURATE_SPEC.sin_terms
    scale = ACCURATE_SPEC.angle_scale

    def objective(p):
        r, _, _ = fit._angle_residual(p, n, x, scale)
        return float(np.sum(w * r * r))

    p = accurate.raw
    base = objective(p)
    for i in range(len(p)):
        for h in (1e-7, -1e-7):
            q = p.copy()
            q[i] += h * max(1.0, abs(p[i]))
            assert objective(q) >= base * (1 - 1e-9)


def test_accurate_angle_residual_beats_normalized_seed(accurate, normalized):
    x, w = ACCURATE_SPEC.grid()
    r, _, _ = fit._angle_residual(normalized.raw, 4, x, ACCURATE_SPEC.angle_scale)
    assert accurate.residual_rms < math.sqrt(np.sum(w * r * r))


def test_non_convergence_raises_with_residual(monkeypatch):
    monkeypatch.setattr(fit, "MAX_ITERATIONS", 1)
    seed, _ = fit._normalized_solution(NORMALIZED_SPEC)
    with pytest.raises(FitConvergenceError) as info:
        gauss_newton_angle(seed, ACCURATE_SPEC)
    assert info.value.iterations == 1
    assert 0 < info.value.residual < 1e-6


# refit-then-run


@pytest.mark.parametrize("which", ["normalized", "accurate"])
def test_refit_coefficients_keep_kernel_invariants(which, request):
    result = request.getfixturevalue(which)
    cfg = result.pipeline()
    theta = np.random.default_rng(21).uniform(-math.pi, math.pi, 20_000).astype(np.float32)
    a, b = sincos_batch(theta, cfg), sincos_batch(-theta, cfg)
    assert np.array_equal(b.sines, -a.sines) and np.array_equal(b.cosines, a.cosines)
    s, c = a.sines.astype(float), a.cosines.astype(float)
    assert np.max(np.abs(1 - np.sqrt(s * s + c * c))) <= 2.5e-7
    assert sincos(0.0, cfg).s == 0.0 and sincos(0.0, cfg).c == 1.0


# ss2 arbitration


def test_arbitration_reports_both_candidates(arbitration):
    assert set(arbitration.max_errors) == {SS2_ANGLE_ACCURATE_TABLE, SS2_ANGLE_ACCURATE_LISTING}
    assert arbitration.chosen in arbitration.max_errors
    if not arbitration.tie:
        best = min(arbitration.max_errors, key=arbitration.max_errors.get)
        assert arbitration.chosen == best


def test_arbitration_picks_the_listing_value(arbitration):
    errs = arbitration.max_errors
    assert errs[SS2_ANGLE_ACCURATE_LISTING] < errs[SS2_ANGLE_ACCURATE_TABLE]
    assert arbitration.chosen == SS2_ANGLE_ACCURATE_LISTING
    assert to_f32(arbitration.chosen) == ANGLE_ACCURATE_COEFFS.ss2


def test_arbitration_candidates_differ_little(arbitration):
    a, b = arbitration.max_errors.values()
    assert abs(a - b) < 1e-6


def test_arbitration_is_a_no_op_for_normalized():
    arb = arbitrate_ss2(NORMALIZED_COEFFS, (NORMALIZED_COEFFS.ss2, NORMALIZED_COEFFS.ss2),
                        samples=10_000)
    assert arb.tie and arb.chosen == NORMALIZED_COEFFS.ss2


def test_arbitration_tie_prefers_first_candidate():
    arb = arbitrate_ss2(candidates=(-0.6466386396, -0.6466386396), samples=10_000)
    assert arb.tie and arb.chosen == -0.6466386396
