import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nexpansion.core import (
    DigitError,
    DomainError,
    NExpParams,
    branch_inverse,
    cylinder,
    derivative_bound,
    digit,
    digit_range,
    digits_array,
    fixed_point,
    gauss_step,
    gauss_step_array,
    iterate,
    orbit,
)

SQ2 = math.sqrt(2.0)


@st.composite
def params(draw, max_N=60):
    N = draw(st.integers(2, max_N))
    top = math.sqrt(N) - 1.0
    alpha = draw(st.floats(1e-3 * top, top, allow_nan=False))
    return NExpParams(N, alpha)


@pytest.mark.parametrize("N, alpha", [(1, 0.1), (2, 0.0), (2, -0.1), (2, 0.42), (9, 2.01), (2.5, 0.1)])
def test_params_rejected(N, alpha):
    with pytest.raises(ValueError):
        NExpParams(N, alpha)


def test_params_upper_bound_inclusive():
    assert NExpParams(2, SQ2 - 1).alpha == SQ2 - 1
    assert NExpParams(9, 2.0).interval == (2.0, 3.0)


@pytest.mark.parametrize("N, alpha, x, want", [
    (2, SQ2 - 1, SQ2 - 1, 4),
    (2, 0.39, 1.39, 1),
    (51, 6.0, 6.0, 2),
])
def test_digit_examples(N, alpha, x, want):
    assert digit(NExpParams(N, alpha), x) == want


def test_digit_outside_interval():
    p = NExpParams(2, 0.39)
    for x in (0.38, 1.4, -1.0):
        with pytest.raises(DomainError):
            digit(p, x)


def test_gauss_step_examples():
    s = gauss_step(NExpParams(2, 0.39), 0.39)
    assert s.digit == 4 and s.x == pytest.approx(2 / 0.39 - 4, abs=1e-15)
    s = gauss_step(NExpParams(2, SQ2 - 1), SQ2)
    assert s.digit == 1 and s.x == pytest.approx(SQ2 - 1, abs=1e-15)
    s = gauss_step(NExpParams(51, 6.0), 7.0)
    assert s.digit == 1 and s.x == pytest.approx(51 / 7 - 1, abs=1e-14)


def test_orbit_matching_example():
    p = NExpParams(2, 0.39)
    left = orbit(p, 0.39, 3)
    right = orbit(p, 1.39, 3)
    assert [s.digit for s in left] == [4, 1, 2]
    assert [s.digit for s in right] == [1, 4, 3]
    assert left[-1].x == pytest.approx(10 / 17, abs=1e-13)
    assert right[-1].x == pytest.approx(left[-1].x, abs=1e-13)
    assert orbit(p, 0.7, 0) == []
    assert iterate(p, 0.39, 3) == left[-1].x


@pytest.mark.parametrize("N, alpha, want", [(2, 0.40, (1, 4)), (51, 6.0, (1, 2)), (2, 0.39, (1, 4))])
def test_digit_range_examples(N, alpha, want):
    assert tuple(digit_range(NExpParams(N, alpha))) == want


def test_cylinder_examples():
    p = NExpParams(2, 0.39)
    assert cylinder(p, 1) == pytest.approx((2 / 2.39, 1.39))
    assert cylinder(p, 4) == pytest.approx((0.39, 2 / 4.39))
    with pytest.raises(DigitError):
        cylinder(p, 5)


@given(params())
@settings(max_examples=200, deadline=None)
def test_cylinders_partition(p):
    lo, hi = digit_range(p)
    cyl = [cylinder(p, j) for j in range(hi, lo - 1, -1)]
    assert cyl[0][0] == p.alpha and cyl[-1][1] == p.alpha + 1.0
    for (a, b), (c, _) in zip(cyl, cyl[1:]):
        assert b == c
        assert a <= b
    # shared boundary point belongs to the larger digit
    for j in range(lo, hi):
        x = p.N / (p.alpha + 1.0 + j)
        if p.alpha < x < p.alpha + 1.0:
            assert digit(p, x) == j + 1


@given(params())
@settings(max_examples=200, deadline=None)
def test_digit_count_bounds(p):
    lo, hi = digit_range(p)
    assert 1 <= lo <= hi and lo <= p.N - 1
    i = hi - lo
    assert i < (lo + 1) / p.alpha + 2
    assert i >= lo / p.alpha * (1 - 1e-12)


def test_smallest_digit_at_tiny_alpha():
    for N in (2, 3, 8, 51):
        assert digit_range(NExpParams(N, 1e-6)).d_min == N - 1


@given(params(), st.floats(0.0, 1.0))
@settings(max_examples=300, deadline=None)
def test_step_lands_in_interval(p, u):
    x = p.alpha + u
    s = gauss_step(p, x)
    lo, hi = digit_range(p)
    assert p.alpha <= s.x < p.alpha + 1.0
    assert lo <= s.digit <= hi


@given(params(), st.floats(0.01, 0.99))
@settings(max_examples=300, deadline=None)
def test_branch_inverse_left_inverse(p, u):
    x = p.alpha + u
    j = digit(p, x)
    y = gauss_step(p, x).x
    assert branch_inverse(p, j, y) == pytest.approx(x, rel=1e-12)
    c0, c1 = cylinder(p, j)
    if c0 + 1e-9 < x < c1 - 1e-9:
        assert gauss_step(p, branch_inverse(p, j, y)).x == pytest.approx(y, abs=1e-12)


def test_branch_inverse_examples():
    p = NExpParams(2, 0.39)
    assert branch_inverse(p, 4, 2 / 0.39 - 4) == pytest.approx(0.39, abs=1e-15)
    assert branch_inverse(NExpParams(51, 6.0), 1, 6.5) == pytest.approx(6.8)


@pytest.mark.parametrize("N, i, want, tol", [
    (51, 1, (math.sqrt(205) - 1) / 2, 1e-13),
    (51, 2, (math.sqrt(208) - 2) / 2, 1e-13),
    (2, 1, 1.0, 1e-15),
])
def test_fixed_point(N, i, want, tol):
    f = fixed_point(N, i)
    assert abs(f - want) < tol
    assert abs(N / f - i - f) < 1e-12


def test_fixed_points_relative_to_alpha6():
    # for N=51, alpha=6 the two fixed points sit about 0.659 and 0.2111 above alpha
    assert fixed_point(51, 1) - 6 == pytest.approx(0.659, abs=5e-4)
    assert fixed_point(51, 2) - 6 == pytest.approx(0.2111, abs=5e-5)


@pytest.mark.parametrize("N, alpha, want", [(2, 0.39, 2 / 1.39 ** 2), (51, 6.0, 51 / 49), (9, 0.5, 4.0)])
def test_derivative_bound(N, alpha, want):
    assert derivative_bound(NExpParams(N, alpha)) == pytest.approx(want, rel=1e-15)


@given(params())
@settings(max_examples=50, deadline=None)
def test_vectorised_agrees(p):
    x = np.linspace(p.alpha, p.alpha + 1.0, 257)
    y, d = gauss_step_array(p, x)
    ref = [gauss_step(p, float(v)) for v in x]
    assert list(d) == [s.digit for s in ref] == list(digits_array(p, x))
    assert np.allclose(y, [s.x for s in ref], rtol=0, atol=1e-15)
