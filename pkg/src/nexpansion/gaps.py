"""Attractor and gaps of T_alpha via forward images of interval unions.

T_alpha maps [alpha, alpha+1] onto itself, so images of the whole interval
never shrink. Instead a tiny interval around a typical orbit point is grown by
``U -> U | T(U)`` until it stops changing; the result is the closure of the
region visited by almost every orbit, and its complement consists of the gaps.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .core import NExpParams, cylinder, derivative_bound, digit_range, iterate

MAX_PARTS = 10_000
SEED_HALF_WIDTH = 1e-9
SEED_BURN_IN = 1000


class NonConvergenceError(RuntimeError):
    pass


class IntervalUnion(NamedTuple):
    parts: tuple[tuple[float, float], ...]

    @property
    def length(self) -> float:
        return sum(b - a for a, b in self.parts)

    def __contains__(self, x) -> bool:
        return any(a <= x <= b for a, b in self.parts)


def merge(parts, tol: float) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for a, b in sorted(parts):
        if out and a <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def image(params: NExpParams, parts) -> list[tuple[float, float]]:
    """Forward image of a union of intervals, one piece per monotone branch."""
    N, lo_a, hi_a = params.N, params.alpha, params.alpha + 1.0
    d_lo, d_hi = digit_range(params)
    cyl = [(j, *cylinder(params, j)) for j in range(d_lo, d_hi + 1)]
    out = []
    for a, b in parts:
        for j, c0, c1 in cyl:
            lo, hi = max(a, c0), min(b, c1)
            if hi < lo:
                continue
            # x -> N/x - j is decreasing
            y0 = min(max(N / hi - j, lo_a), hi_a)
            y1 = min(max(N / lo - j, lo_a), hi_a)
            out.append((y0, y1))
    return out


def _hausdorff(u, v) -> float:
    if len(u) != len(v):
        return math.inf
    return max((max(abs(a - c), abs(b - e)) for (a, b), (c, e) in zip(u, v)), default=0.0)


def attractor_iterate(params: NExpParams, max_rounds: int = 10_000, tol: float = 1e-10) -> IntervalUnion:
    if max_rounds < 1 or tol <= 0:
        raise ValueError("need max_rounds >= 1 and tol > 0")
    a = params.alpha
    x = iterate(params, a + (math.sqrt(5.0) - 1.0) / 2.0, SEED_BURN_IN)
    u = merge([(max(a, x - SEED_HALF_WIDTH), min(a + 1.0, x + SEED_HALF_WIDTH))], tol)
    for _ in range(max_rounds):
        new = merge(u + image(params, u), tol)
        if len(new) > MAX_PARTS:
            raise NonConvergenceError(f"attractor fragmented into more than {MAX_PARTS} parts")
        if _hausdorff(new, u) < tol:
            return IntervalUnion(tuple(new))
        u = new
    raise NonConvergenceError(f"no stabilisation within {max_rounds} rounds")


def detect_gaps(params: NExpParams, max_rounds: int = 10_000, tol: float = 1e-10) -> list[tuple[float, float]]:
    """Maximal open sub-intervals of [alpha, alpha+1] outside the attractor."""
    att = attractor_iterate(params, max_rounds, tol)
    edges = [params.alpha] + [e for p in att.parts for e in p] + [params.alpha + 1.0]
    gaps = []
    for lo, hi in zip(edges[::2], edges[1::2]):
        if hi - lo > tol:
            gaps.append((lo, hi))
    return gaps


__all__ = [
    "IntervalUnion", "NonConvergenceError", "attractor_iterate", "derivative_bound",
    "detect_gaps", "image", "merge",
]
