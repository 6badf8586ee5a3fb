"""Planar natural extension of T_alpha on a matching plateau.

The domain is a rectilinear 12-gon over [alpha, alpha+1] whose bottom edge
steps A -> B -> C and whose top edge steps D -> E -> F, with the steps placed
at the first two orbit points of alpha and alpha + 1. The map is
``(x, y) -> (T(x), N/(d(x) + y))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import NExpParams, cylinder, digit, digit_range, digits_array
from .matching import (
    MatchingPair,
    PlateauHeights,
    classify_alpha,
    plateau_heights,
)

BOUNDARY_EPS = 1e-9


class ClassificationError(ValueError):
    pass


class InvalidBranchError(ValueError):
    pass


class OutOfDomainError(ValueError):
    pass


class XMarks(NamedTuple):
    alpha: float
    alpha1: float
    t_a: float      # T(alpha)
    t_a1: float     # T(alpha + 1)
    t2_a: float     # T^2(alpha)
    t2_a1: float    # T^2(alpha + 1)


@dataclass(frozen=True)
class NatExtDomain:
    pair: MatchingPair
    alpha: float
    heights: PlateauHeights
    x_marks: XMarks
    strips: tuple = field(default=())

    @property
    def params(self) -> NExpParams:
        return NExpParams(self.pair.N, self.alpha)

    @property
    def vertices(self) -> list[tuple[float, float]]:
        m, h = self.x_marks, self.heights
        return [
            (m.alpha, h.A), (m.t2_a1, h.A), (m.t2_a1, h.B), (m.t_a, h.B),
            (m.t_a, h.C), (m.alpha1, h.C), (m.alpha1, h.F), (m.t2_a, h.F),
            (m.t2_a, h.E), (m.t_a1, h.E), (m.t_a1, h.D), (m.alpha, h.D),
        ]

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        hs = self.heights.as_tuple()
        return self.alpha, self.alpha + 1.0, min(hs), max(hs)

    def fiber(self, x):
        """Lower and upper y of the vertical fibre over x (arrays allowed).

        On a vertical edge the fibre is the union of the two adjacent ones.
        """
        m, h = self.x_marks, self.heights
        x = np.asarray(x, dtype=float)
        low_l = np.where(x <= m.t2_a1, h.A, np.where(x <= m.t_a, h.B, h.C))
        low_r = np.where(x < m.t2_a1, h.A, np.where(x < m.t_a, h.B, h.C))
        top_l = np.where(x <= m.t_a1, h.D, np.where(x <= m.t2_a, h.E, h.F))
        top_r = np.where(x < m.t_a1, h.D, np.where(x < m.t2_a, h.E, h.F))
        return np.minimum(low_l, low_r), np.maximum(top_l, top_r)

    def contains(self, x, y, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        low, top = self.fiber(x)
        inside = (x >= self.alpha - tol) & (x <= self.alpha + 1.0 + tol)
        return inside & (y >= low - tol) & (y <= top + tol)

    def boundary_distance(self, x, y):
        """Lower bound on the distance to the polygon edges and strip walls."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        low, top = self.fiber(x)
        walls = self._walls
        pos = np.clip(np.searchsorted(walls, x), 1, len(walls) - 1)
        dx = np.minimum(np.abs(x - walls[pos - 1]), np.abs(x - walls[pos]))
        return np.minimum(dx, np.minimum(np.abs(y - low), np.abs(y - top)))

    @property
    def _walls(self) -> np.ndarray:
        w = list(self.x_marks) + [s[1] for s in self.strips] + [s[2] for s in self.strips]
        return np.unique(np.array(w))

    def area(self) -> float:
        xs = sorted(set(self.x_marks))
        total = 0.0
        for a, b in zip(xs, xs[1:]):
            low, top = self.fiber(0.5 * (a + b))
            total += (b - a) * float(top - low)
        return total

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n points uniform in the domain, by rejection from the bounding box."""
        x0, x1, y0, y1 = self.bbox
        out = np.empty((0, 2))
        while len(out) < n:
            m = max(1024, int(1.3 * (n - len(out))))
            pts = np.column_stack([rng.uniform(x0, x1, m), rng.uniform(y0, y1, m)])
            out = np.vstack([out, pts[self.contains(pts[:, 0], pts[:, 1])]])
        return out[:n]

    def export_vertices(self) -> str:
        return "".join(f"{x:.15g} {y:.15g}\n" for x, y in self.vertices)


def _x_marks(pair: MatchingPair, alpha: float) -> XMarks:
    # digits fixed by the plateau structure: alpha has digit d+i, alpha+1 has
    # d, T(alpha) lies in the d-cylinder, T(alpha+1) in the (d+i)-cylinder;
    # using them explicitly keeps the closed-plateau endpoints consistent
    N, d, i = pair.N, pair.d, pair.i
    t_a = N / alpha - (d + i)
    t_a1 = N / (alpha + 1.0) - d
    return XMarks(alpha, alpha + 1.0, t_a, t_a1, N / t_a - d, N / t_a1 - (d + i))


def _strips(pair: MatchingPair, alpha: float) -> tuple:
    p = NExpParams(pair.N, alpha)
    lo, hi = digit_range(p)
    return tuple((j, *cylinder(p, j)) for j in range(lo, hi + 1))


def build_domain(pair: MatchingPair, alpha: float, heights: Optional[PlateauHeights] = None) -> NatExtDomain:
    """Domain for alpha in the closed plateau [A, B].

    ``heights`` overrides the plateau heights (used for negative controls).
    """
    h0 = plateau_heights(pair)
    if abs(alpha - h0.A) <= 1e-12:
        alpha = h0.A
    elif abs(alpha - h0.B) <= 1e-12:
        alpha = h0.B
    if not h0.A <= alpha <= h0.B:
        raise ClassificationError(f"alpha={alpha!r} outside the closed plateau [{h0.A!r}, {h0.B!r}]")
    return NatExtDomain(pair, alpha, heights or h0, _x_marks(pair, alpha), _strips(pair, alpha))


def natext_step(pair: MatchingPair, alpha: float, point) -> tuple[float, float]:
    p = NExpParams(pair.N, alpha)
    x, y = point
    j = digit(p, x)
    return pair.N / x - j, pair.N / (j + y)


def natext_inverse(pair: MatchingPair, alpha: float, j: int, point) -> tuple[float, float]:
    x, y = point
    yp = pair.N / y - j
    if yp < 0:
        raise InvalidBranchError(f"digit {j} has no preimage at height y={y!r}")
    return pair.N / (x + j), yp


class LaminationReport(NamedTuple):
    samples: int
    violations: int
    max_overlap: int
    excluded: int


def preimage_counts(domain: NatExtDomain, pts: np.ndarray, eps: float = BOUNDARY_EPS):
    """For each point, the number of digits j whose inverse branch lands in
    the j-th strip of the domain, and a mask of points with some candidate
    preimage within eps of a boundary."""
    N = domain.pair.N
    lo, hi = digit_range(domain.params)
    x, y = pts[:, 0], pts[:, 1]
    ymin, ymax = min(domain.heights.as_tuple()), max(domain.heights.as_tuple())
    # a preimage height N/y - j must fall in [ymin, ymax], which leaves at
    # most ceil(ymax - ymin) + 1 candidate digits
    j0 = np.floor(N / y - ymax) - 1
    span = int(math.ceil(ymax - ymin)) + 3
    counts = np.zeros(len(pts), dtype=np.int64)
    near = np.zeros(len(pts), dtype=bool)
    a = domain.alpha
    for s in range(span):
        j = j0 + s
        ok_digit = (j >= lo) & (j <= hi)
        jj = np.clip(j, lo, hi)
        xp = N / (x + jj)
        yp = N / y - jj
        low, top = domain.fiber(xp)
        in_x = ok_digit & (xp >= a - eps) & (xp <= a + 1.0 + eps)
        close = in_x & (yp >= low - eps) & (yp <= top + eps)
        inside = close & (xp >= a) & (xp <= a + 1.0) & (yp >= low) & (yp <= top)
        # strip membership: the branch x -> N/x - j must be the active one
        inside[inside] = digits_array(domain.params, xp[inside]) == jj[inside]
        counts += inside
        idx = np.flatnonzero(close)
        near[idx] |= domain.boundary_distance(xp[idx], yp[idx]) < eps
    return counts, near


def check_lamination(domain: NatExtDomain, sample_count: int, seed: int = 0,
                     eps: float = BOUNDARY_EPS, chunk: int = 200_000) -> LaminationReport:
    """Monte Carlo check that every point of the domain has exactly one
    preimage under the planar map (a.s. bijectivity)."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    violations = excluded = max_overlap = 0
    done = 0
    while done < sample_count:
        n = min(chunk, sample_count - done)
        pts = domain.sample(n, rng)
        counts, near = preimage_counts(domain, pts, eps)
        bad = (counts != 1) & ~near
        violations += int(bad.sum())
        excluded += int(near.sum())
        max_overlap = max(max_overlap, int(counts[~near].max(initial=0)))
        done += n
    return LaminationReport(sample_count, violations, max_overlap, excluded)


# ---------------------------------------------------------------- quilting

class Rect(NamedTuple):
    x0: float
    x1: float
    y0: float
    y1: float

    def contains(self, x, y, tol: float = 0.0):
        return (x >= self.x0 - tol) & (x <= self.x1 + tol) & (y >= self.y0 - tol) & (y <= self.y1 + tol)

    @property
    def width(self) -> float:
        return self.x1 - self.x0


@dataclass(frozen=True)
class QuiltPatches:
    A0: Rect
    A1: Rect
    A2: Rect
    D0: Rect
    D1: Rect
    D2: Rect
    k: int


def _quilt_setup(pair: MatchingPair, alpha: float, beta: float):
    if beta < alpha:
        raise ValueError("need alpha <= beta")
    ca, cb = classify_alpha(pair, alpha), classify_alpha(pair, beta)
    if not (ca.member and cb.member) or ca.k is None or ca.k != cb.k:
        raise ClassificationError(
            f"alpha={alpha!r} (k={ca.k}) and beta={beta!r} (k={cb.k}) are not in a common X_k")
    N, d, i = pair.N, pair.d, pair.i
    pa = NExpParams(N, alpha)
    if digit(pa, beta) != d + i:
        raise ClassificationError("beta is not in the largest-digit cylinder of alpha")
    return ca.k, _x_marks(pair, alpha), _x_marks(pair, beta)


def quilting_regions(pair: MatchingPair, alpha: float, beta: float) -> QuiltPatches:
    k, ma, mb = _quilt_setup(pair, alpha, beta)
    h = plateau_heights(pair)
    return QuiltPatches(
        A0=Rect(alpha, beta, h.A, h.D),
        A1=Rect(mb.t_a, ma.t_a, h.B, h.C),
        A2=Rect(ma.t2_a, mb.t2_a, h.E, h.F),
        D0=Rect(alpha + 1.0, beta + 1.0, h.C, h.F),
        D1=Rect(mb.t_a1, ma.t_a1, h.D, h.E),
        D2=Rect(ma.t2_a1, mb.t2_a1, h.A, h.B),
        k=k,
    )


def map_rect(N: int, j: int, r: Rect) -> Rect:
    """Image of a rectangle inside the j-cylinder under the planar map."""
    return Rect(N / r.x1 - j, N / r.x0 - j, N / (j + r.y1), N / (j + r.y0))


def verify_quilting(pair: MatchingPair, alpha: float, beta: float) -> float:
    """Largest corner mismatch between the third images of A0 and D0."""
    q = quilting_regions(pair, alpha, beta)
    N = pair.N
    pa, pb = NExpParams(N, alpha), NExpParams(N, beta)
    ja = digit(pa, 0.5 * (q.A2.x0 + q.A2.x1))
    jb = digit(pb, 0.5 * (q.D2.x0 + q.D2.x1))
    ra = map_rect(N, ja, q.A2)
    rb = map_rect(N, jb, q.D2)
    return max(abs(u - v) for u, v in zip(ra, rb))


class QuiltingMap:
    """Cut-and-paste isomorphism from the beta-domain to the alpha-domain."""

    def __init__(self, pair: MatchingPair, alpha: float, beta: float):
        self.pair = pair
        self.alpha, self.beta = alpha, beta
        self.patches = quilting_regions(pair, alpha, beta)
        self.domain_alpha = build_domain(pair, alpha)
        self.domain_beta = build_domain(pair, beta)
        pa, pb = NExpParams(pair.N, alpha), NExpParams(pair.N, beta)
        q = self.patches

        def mid_digit(p, r):
            return digit(p, 0.5 * (r.x0 + r.x1))

        # digits read off the patches themselves
        self.forward = [mid_digit(pb, q.D0), mid_digit(pb, q.D1), mid_digit(pb, q.D2)]
        self.backward = [mid_digit(pa, q.A2), mid_digit(pa, q.A1), mid_digit(pa, q.A0)]

    def _apply(self, x, y, level):
        N = self.pair.N
        for j in self.forward[level:]:
            x, y = N / x - j, N / (j + y)
        for j in self.backward[: 3 - level]:
            x, y = N / (x + j), N / y - j
        return x, y

    def __call__(self, point) -> tuple[float, float]:
        x, y = point
        if not bool(self.domain_beta.contains(x, y, tol=BOUNDARY_EPS)):
            raise OutOfDomainError(f"{point!r} is not in the beta-domain")
        q = self.patches
        for level, r in enumerate((q.D0, q.D1, q.D2)):
            if r.contains(x, y):
                return self._apply(x, y, level)
        return x, y

    def map_array(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[:, 0].copy(), pts[:, 1].copy()
        q = self.patches
        done = np.zeros(len(pts), dtype=bool)
        for level, r in enumerate((q.D0, q.D1, q.D2)):
            m = r.contains(x, y) & ~done
            x[m], y[m] = self._apply(x[m], y[m], level)
            done |= m
        return np.column_stack([x, y])

    def image_rect(self, r: Rect, level: int = 0) -> Rect:
        N = self.pair.N
        for j in self.forward[level:]:
            r = map_rect(N, j, r)
        for j in self.backward[: 3 - level]:
            xs = (N / (r.x1 + j), N / (r.x0 + j))
            ys = (N / r.y1 - j, N / r.y0 - j)
            r = Rect(xs[0], xs[1], ys[0], ys[1])
        return r


def quilting_map(pair: MatchingPair, alpha: float, beta: float, point) -> tuple[float, float]:
    return QuiltingMap(pair, alpha, beta)(point)


def rect_mass(N: int, r: Rect) -> float:
    """Exact integral of N/(N + xy)^2 over a rectangle."""
    def F(x, y):
        return math.log(N + x * y)
    return (F(r.x1, r.y1) - F(r.x0, r.y1)) - (F(r.x1, r.y0) - F(r.x0, r.y0))


def domain_mass(domain: NatExtDomain) -> float:
    """Exact mass of the domain under N/(N + xy)^2 (equals 1/H)."""
    xs = sorted(set(domain.x_marks))
    total = 0.0
    for a, b in zip(xs, xs[1:]):
        low, top = domain.fiber(0.5 * (a + b))
        total += rect_mass(domain.pair.N, Rect(a, b, float(low), float(top)))
    return total


class MassCheck(NamedTuple):
    exact: float
    estimate: float
    stderr: float

    @property
    def z(self) -> float:
        return abs(self.estimate - self.exact) / self.stderr if self.stderr > 0 else math.inf


def quilting_mass_check(pair: MatchingPair, alpha: float, beta: float, rect: Optional[Rect] = None,
                        samples: int = 100_000, seed: int = 0) -> MassCheck:
    """Compare the exact mass of a rectangle of D0 with a Monte Carlo
    estimate of the mass of its quilting image inside the alpha-domain.

    Points are drawn from the normalised measure on the alpha-domain by
    rejection; the fraction landing in the image of ``rect`` times the total
    mass estimates the image mass.
    """
    qm = QuiltingMap(pair, alpha, beta)
    rect = rect or qm.patches.D0
    N = pair.N
    target = qm.image_rect(rect, 0)
    dom = qm.domain_alpha
    total = domain_mass(dom)
    x0, x1, y0, y1 = dom.bbox
    top = N / (N + x0 * y0) ** 2
    rng = np.random.default_rng(seed)
    got = np.empty((0, 2))
    while len(got) < samples:
        m = 2 * (samples - len(got)) + 1024
        pts = dom.sample(m, rng)
        keep = rng.uniform(0.0, top, m) < N / (N + pts[:, 0] * pts[:, 1]) ** 2
        got = np.vstack([got, pts[keep]])
    got = got[:samples]
    p = float(np.mean(target.contains(got[:, 0], got[:, 1])))
    se = total * math.sqrt(max(p * (1.0 - p), 1.0 / samples) / samples)
    return MassCheck(rect_mass(N, rect), total * p, se)
