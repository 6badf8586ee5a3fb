"""Matching pairs (d, i) with N(i - 1) = d(d + i), their plateau heights, and
classification of parameters alpha by the orbits of alpha and alpha + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import NExpParams, digit, gauss_step, iterate

BOUNDARY_EPS = 1e-12


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class MatchingPair:
    N: int
    d: int
    i: int

    def __post_init__(self):
        N, d, i = self.N, self.d, self.i
        if N < 2 or d < 1 or i < 2:
            raise ValueError(f"need N >= 2, d >= 1, i >= 2; got {(N, d, i)}")
        if N * (i - 1) != d * (d + i):
            raise ValueError(f"(d={d}, i={i}) is not a matching pair for N={N}")
        if d > N - 1:
            raise ValueError(f"smallest digit {d} exceeds N - 1")

    @property
    def k(self) -> int:
        return self.N - self.d

    @property
    def digits(self) -> range:
        return range(self.d, self.d + self.i + 1)


@dataclass(frozen=True)
class PairEnumeration:
    N: int
    pairs: list[MatchingPair]

    @property
    def D(self) -> int:
        return len(self.pairs)

    @property
    def M(self) -> int:
        return (sigma0(self.N) - 1) * (sigma0(self.N + 1) - 1)


def sigma0(n: int) -> int:
    """Number of positive divisors of n."""
    if n < 1:
        raise ValueError("n must be positive")
    count = 0
    r = math.isqrt(n)
    for q in range(1, r + 1):
        if n % q == 0:
            count += 2
    if r * r == n:
        count -= 1
    return count


def enumerate_matching_pairs(N: int) -> PairEnumeration:
    """All (d, i), d >= 1, i >= 2, with N = d(d + i)/(i - 1), sorted by d.

    With k = N - d the condition reads i = d(d + 1)/k + 1, so only the k in
    1..N-1 dividing d(d + 1) contribute.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    pairs = []
    for k in range(N - 1, 0, -1):
        d = N - k
        q, r = divmod(d * (d + 1), k)
        if r == 0 and q + 1 >= 2:
            pairs.append(MatchingPair(N, d, q + 1))
    return PairEnumeration(N, pairs)


@dataclass(frozen=True)
class PlateauHeights:
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float

    @property
    def plateau(self) -> tuple[float, float]:
        return self.A, self.B

    def as_tuple(self) -> tuple[float, ...]:
        return self.A, self.B, self.C, self.D, self.E, self.F


def chain_residuals(pair: MatchingPair, h: PlateauHeights) -> dict[str, float]:
    """Residuals of the lamination relations between the six heights."""
    N, d, i = pair.N, pair.d, pair.i
    A, B, C, D, E, F = h.as_tuple()
    return {
        "A=N/(d+i+E)": abs(A - N / (d + i + E)),
        "B=N/(d+i+D)": abs(B - N / (d + i + D)),
        "C=N/(d+i+A)": abs(C - N / (d + i + A)),
        "C=N/(d+i-1+E)": abs(C - N / (d + i - 1 + E)),
        "D=N/(d+1+B)": abs(D - N / (d + 1 + B)),
        "D=N/(d+F)": abs(D - N / (d + F)),
        "E=N/(d+C)": abs(E - N / (d + C)),
        "F=N/(d+B)": abs(F - N / (d + B)),
        "E=A+1": abs(E - A - 1.0),
        "F=B+1": abs(F - B - 1.0),
    }


def plateau_heights(pair: MatchingPair) -> PlateauHeights:
    N, d, i = pair.N, pair.d, pair.i
    s = d + i
    # A = (-(s+1) + sqrt((s+1)^2 + 4N))/2 and B = (-(d+1) + sqrt((d-1)^2 + 4N))/2,
    # rationalised to avoid cancellation for large s
    A = 2.0 * N / ((s + 1) + math.sqrt((s + 1) ** 2 + 4.0 * N))
    B = 2.0 * (N - d) / ((d + 1) + math.sqrt((d - 1) ** 2 + 4.0 * N))
    E = A + 1.0
    F = B + 1.0
    C = N * E / (s + N)
    D = N * B / (N - d)
    h = PlateauHeights(A, B, C, D, E, F)
    if not 0.0 < A < B < C < D < E < F:
        raise AssertionError(f"height ordering violated for {pair}: {h}")
    worst = max(chain_residuals(pair, h).values())
    if worst > 1e-10 * max(1.0, F):
        raise AssertionError(f"height relations violated for {pair}: {worst:.3g}")
    return h


def alternative_B(pair: MatchingPair) -> float:
    """B as the positive root of (d+i)B^2 + (d+i)(d+1)B - N(d+1) = 0.

    This comes from B = N/(d+i + N/(d+1+B)) alone and agrees with the plateau
    endpoint B exactly when N(i - 1) = d(d + i).
    """
    N, d, i = pair.N, pair.d, pair.i
    p = (d + 1) * (d + i)
    return (-p + math.sqrt(p * p + 4.0 * N * p)) / (2.0 * (d + i))


@dataclass(frozen=True)
class AlphaClass:
    member: bool
    k: Optional[int] = None
    boundary: bool = False
    interval_member: bool = False

    @property
    def consistent(self) -> bool:
        return self.boundary or self.member == self.interval_member


def _orbit_membership(pair: MatchingPair, alpha: float) -> tuple[bool, Optional[int]]:
    N, d, i = pair.N, pair.d, pair.i
    if alpha <= 0 or alpha > math.sqrt(N) - 1.0:
        return False, None
    p = NExpParams(N, alpha)
    if digit(p, alpha) != d + i or digit(p, alpha + 1.0) != d:
        return False, None
    t_a = N / alpha - (d + i)
    t_b = N / (alpha + 1.0) - d
    # T(alpha) interior to the smallest-digit cylinder, T(alpha+1) interior to
    # the largest-digit one
    if not (N / (alpha + 1.0 + d) < t_a < alpha + 1.0):
        return False, None
    if not (alpha < t_b < N / (alpha + d + i)):
        return False, None
    t2_a = gauss_step(p, t_a).x
    t2_b = gauss_step(p, t_b).x
    k = digit(p, t2_a)
    if digit(p, t2_b) != k + 1:
        return True, None
    return True, k


def classify_alpha(pair: MatchingPair, alpha: float) -> AlphaClass:
    h = plateau_heights(pair)
    inside = h.A < alpha < h.B
    if abs(alpha - h.A) < BOUNDARY_EPS or abs(alpha - h.B) < BOUNDARY_EPS:
        return AlphaClass(False, None, True, False)
    member, k = _orbit_membership(pair, alpha)
    return AlphaClass(member, k if member else None, False, inside)


def exact_iterate(N: int, alpha: Fraction, x: Fraction, n: int) -> Fraction:
    """T^n(x) in rational arithmetic; floor is exact, so boundary points
    get the larger digit without any slack."""
    for _ in range(n):
        y = N / x
        x = y - math.floor(y - alpha)
    return x


def matching_residual(N: int, alpha: float, steps: int = 3, exact: bool = True) -> float:
    """|T^steps(alpha) - T^steps(alpha+1)| for arbitrary parameters.

    Near small alpha the orbit passes through regions where |T'| is in the
    thousands, and double rounding alone then produces residuals around
    1e-8. By default the float alpha is therefore treated as the rational
    number it represents and both orbits are computed exactly.
    """
    p = NExpParams(N, alpha)
    if not exact:
        return abs(iterate(p, alpha, steps) - iterate(p, alpha + 1.0, steps))
    a = Fraction(p.alpha)
    return float(abs(exact_iterate(N, a, a, steps) - exact_iterate(N, a, a + 1, steps)))


def verify_matching(pair: MatchingPair, alpha: float, exact: bool = True) -> float:
    cls = classify_alpha(pair, alpha)
    if not cls.member:
        raise PreconditionError(f"alpha={alpha!r} is not in the open plateau of {pair}")
    return matching_residual(pair.N, alpha, 3, exact)


def endpoint_identities(pair: MatchingPair) -> dict[str, float]:
    """Residuals of the four orbit identities satisfied at the plateau endpoints."""
    N, d, i = pair.N, pair.d, pair.i
    h = plateau_heights(pair)
    A, B = h.A, h.B
    return {
        "T_A(A)=A+1": abs(N / A - (d + i) - (1.0 + A)),
        "T_A(A+1)=N/(A+d+i)": abs(N / (A + 1.0) - d - N / (A + d + i)),
        "T_B(B)=N/(B+d+1)": abs(N / B - (d + i) - N / (B + d + 1)),
        "T_B(B+1)=B": abs(N / (B + 1.0) - d - B),
    }


def k_subintervals(pair: MatchingPair, grid: int = 4001, tol: float = 1e-14) -> dict[int, tuple[float, float]]:
    """Approximate closures of the sets of alpha in the plateau with a given k.

    A uniform grid over (A, B) is classified and every change of k is located
    by bisection.
    """
    h = plateau_heights(pair)
    A, B = h.A, h.B
    xs = [A + (B - A) * (j + 0.5) / grid for j in range(grid)]
    ks = [classify_alpha(pair, x).k for x in xs]

    def k_of(x):
        return classify_alpha(pair, x).k

    out: dict[int, list[float]] = {}
    lo = A
    for j in range(grid):
        if j > 0 and ks[j] != ks[j - 1]:
            a, b, ka = xs[j - 1], xs[j], ks[j - 1]
            while b - a > tol:
                m = 0.5 * (a + b)
                if k_of(m) == ka:
                    a = m
                else:
                    b = m
            if ka is not None:
                out.setdefault(ka, [lo, a])[1] = a
            lo = b
    if ks[-1] is not None:
        out.setdefault(ks[-1], [lo, B])[1] = B
    return {k: (v[0], v[1]) for k, v in sorted(out.items())}

