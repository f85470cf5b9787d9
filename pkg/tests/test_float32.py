import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastsincos._float32 import (
    fma32,
    fma32_array,
    mul_add32,
    round_even32,
    to_f32,
    ulp_distance32,
)

from conftest import fraction_to_f32, same_bits

f32s = st.floats(width=32, allow_nan=False, allow_infinity=False)
moderate = st.floats(min_value=-2.0**49, max_value=2.0**49, width=32, allow_nan=False)


def exact_fma(a, b, c):
    return fraction_to_f32(Fraction(a) * Fraction(b) + Fraction(c))


def test_fraction_oracle_agrees_with_numpy_rounding(rng):
    x = rng.standard_normal(1000) * 10.0 ** rng.integers(-40, 38, 1000)
    for v in x:
        assert fraction_to_f32(Fraction(float(v))) == float(np.float32(v))


@settings(max_examples=2000)
@given(moderate, moderate, moderate)
def test_fma32_is_correctly_rounded(a, b, c):
    got = fma32(a, b, c)
    want = exact_fma(a, b, c)
    assert got == want or (math.isnan(got) and math.isnan(want))


@settings(max_examples=500)
@given(f32s, f32s, f32s)
def test_fma32_full_range(a, b, c):
    # float32 products never overflow a double, so the whole range is exact
    assert fma32(a, b, c) == exact_fma(a, b, c)


def test_fma32_avoids_double_rounding():
    # exact result is just above the midpoint 1 + 2**-24; the double-rounded
    # result would land on the midpoint and round down to 1.0
    a = -(1.0 + 2.0**-23)
    b = (1.0 - 2.0**-23) * 2.0**-24
    c = 1.0 + 2.0**-23
    exact = Fraction(a) * Fraction(b) + Fraction(c)
    assert exact > 1 + Fraction(1, 2**24)
    assert to_f32(a * b + c) == 1.0  # naive double-then-narrow is wrong
    assert fma32(a, b, c) == 1.0 + 2.0**-23
    assert fma32_array(np.float32([a]), np.float32([b]), np.float32([c]))[0] == np.float32(1.0 + 2.0**-23)


@settings(max_examples=300)
@given(st.lists(st.tuples(moderate, moderate, moderate), min_size=1, max_size=40))
def test_array_fma_matches_scalar(triples):
    a, b, c = (np.array(col, dtype=np.float32) for col in zip(*triples))
    got = fma32_array(a, b, c)
    want = np.array([fma32(*t) for t in triples], dtype=np.float32)
    assert same_bits(got, want)


def test_array_fma_special_values():
    inf, nan = np.float32(np.inf), np.float32(np.nan)
    a = np.float32([inf, nan, 0.0, 1.0, -0.0])
    b = np.float32([1.0, 1.0, inf, 1.0, 1.0])
    c = np.float32([1.0, 1.0, 1.0, -1.0, 0.0])
    with np.errstate(invalid="ignore"):
        got = fma32_array(a, b, c)
    assert got[0] == np.inf
    assert np.isnan(got[1]) and np.isnan(got[2])
    # exact zero sum rounds to +0, as a hardware FMA does
    assert same_bits(got[3], 0.0) and same_bits(got[4], 0.0)


def test_unfused_rounds_twice():
    a, b = 1.0 + 2.0**-12, 1.0 + 2.0**-12
    c = -1.0
    assert fma32(a, b, c) == 2.0**-11 + 2.0**-24
    assert mul_add32(a, b, c) == 2.0**-11


@pytest.mark.parametrize(
    "x, want",
    [(0.5, 0.0), (1.5, 2.0), (2.5, 2.0), (-0.5, -0.0), (-1.5, -2.0), (0.49999997, 0.0)],
)
def test_round_even(x, want):
    assert round_even32(x) == want


def test_round_even_non_finite():
    assert round_even32(math.inf) == math.inf
    assert math.isnan(round_even32(math.nan))


def test_ulp_distance():
    one = np.float32(1.0)
    assert ulp_distance32(one, np.nextafter(one, np.float32(2))) == 1
    assert ulp_distance32(np.float32(-0.0), np.float32(0.0)) == 0
    tiny = np.float32(1e-45)
    assert ulp_distance32(-tiny, tiny) == 2
