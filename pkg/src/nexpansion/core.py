"""One-dimensional N-expansion Gauss map with a finite digit set.

For an integer N >= 2 and 0 < alpha <= sqrt(N) - 1 the map acts on
I = [alpha, alpha + 1] by ``T(x) = N/x - d(x)`` with ``d(x) = floor(N/x - alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# slack added before flooring so that N/x landing a few ulps under an integer
# at a cylinder boundary still gets the larger digit
FLOOR_SLACK = 1e-12
# parameters may sit on sqrt(N) - 1 up to rounding
ALPHA_SLACK = 1e-12


class DomainError(ValueError):
    """Point outside [alpha, alpha + 1]."""


class DigitError(ValueError):
    """Digit outside the admissible range of the map."""


@dataclass(frozen=True)
class NExpParams:
    N: int
    alpha: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        a = float(self.alpha)
        if not (a > 0.0) or a > math.sqrt(self.N) - 1.0 + ALPHA_SLACK:
            raise ValueError(
                f"alpha must lie in (0, sqrt(N) - 1] = (0, {math.sqrt(self.N) - 1:.15g}], got {a!r}"
            )
        object.__setattr__(self, "alpha", a)

    @property
    def interval(self) -> tuple[float, float]:
        return self.alpha, self.alpha + 1.0


class OrbitStep(NamedTuple):
    x: float
    digit: int


class DigitRange(NamedTuple):
    d_min: int
    d_max: int

    @property
    def count(self) -> int:
        return self.d_max - self.d_min + 1


def _floor_digit(N, alpha, x) -> int:
    v = N / x - alpha
    return math.floor(v + FLOOR_SLACK * max(1.0, abs(v)))


def digit_range(params: NExpParams) -> DigitRange:
    """Smallest digit d(alpha + 1) and largest digit d(alpha)."""
    N, a = params.N, params.alpha
    return DigitRange(_floor_digit(N, a, a + 1.0), _floor_digit(N, a, a))


def _check_point(params: NExpParams, x) -> None:
    a = params.alpha
    if not (a - ALPHA_SLACK <= x <= a + 1.0 + ALPHA_SLACK):
        raise DomainError(f"x={x!r} outside [{a!r}, {a + 1.0!r}]")


def digit(params: NExpParams, x: float) -> int:
    """First digit of x; a cylinder boundary N/(alpha+1+j) gets digit j+1."""
    _check_point(params, x)
    lo, hi = digit_range(params)
    return min(max(_floor_digit(params.N, params.alpha, x), lo), hi)


def gauss_step(params: NExpParams, x: float) -> OrbitStep:
    j = digit(params, x)
    y = params.N / x - j
    # rounding may push the image an ulp outside [alpha, alpha + 1)
    y = min(max(y, params.alpha), math.nextafter(params.alpha + 1.0, -math.inf))
    return OrbitStep(y, j)


def orbit(params: NExpParams, x: float, n: int) -> list[OrbitStep]:
    """The n successive pairs (T^k(x), d_k) for k = 1..n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    out = []
    for _ in range(n):
        step = gauss_step(params, x)
        out.append(step)
        x = step.x
    return out


def iterate(params: NExpParams, x: float, n: int) -> float:
    """T^n(x)."""
    for _ in range(n):
        x = gauss_step(params, x).x
    return x


def cylinder(params: NExpParams, j: int) -> tuple[float, float]:
    """Closure (left, right) of the cylinder {x : digit(x) = j}.

    Cylinders are half-open (left, right] except the largest-digit one, which
    is clipped to start at alpha and contains it.
    """
    lo, hi = digit_range(params)
    if not lo <= j <= hi:
        raise DigitError(f"digit {j} outside [{lo}, {hi}]")
    a, N = params.alpha, params.N
    # both ends as N/(a + integer) so neighbouring cylinders share endpoints bit-for-bit
    left = a if j == hi else N / (a + (j + 1))
    right = a + 1.0 if j == lo else N / (a + j)
    return left, right


def branch_inverse(params: NExpParams, j: int, y: float) -> float:
    return params.N / (y + j)


def fixed_point(N: int, i: int) -> float:
    """Fixed point of x -> N/x - i."""
    # algebraically (sqrt(4N + i^2) - i)/2, written without cancellation
    return 2.0 * N / (math.sqrt(4.0 * N + i * i) + i)


def derivative_bound(params: NExpParams) -> float:
    """min |T'| on the interval, i.e. N/(alpha+1)^2."""
    return params.N / (params.alpha + 1.0) ** 2


# vectorised variants used by the Monte Carlo checks

def digits_array(params: NExpParams, x: np.ndarray) -> np.ndarray:
    lo, hi = digit_range(params)
    v = params.N / x - params.alpha
    d = np.floor(v + FLOOR_SLACK * np.maximum(1.0, np.abs(v)))
    return np.clip(d, lo, hi).astype(np.int64)


def gauss_step_array(params: NExpParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = digits_array(params, x)
    y = params.N / x - d
    return np.clip(y, params.alpha, math.nextafter(params.alpha + 1.0, -math.inf)), d
