import math

import numpy as np
import pytest
from scipy import integrate

from nexpansion.matching import MatchingPair, enumerate_matching_pairs, k_subintervals, plateau_heights
from nexpansion.measure import normalizing_constant
from nexpansion.natext import (
    ClassificationError,
    InvalidBranchError,
    OutOfDomainError,
    QuiltingMap,
    Rect,
    build_domain,
    check_lamination,
    domain_mass,
    natext_inverse,
    natext_step,
    quilting_mass_check,
    quilting_regions,
    rect_mass,
    verify_quilting,
)

P2 = MatchingPair(2, 1, 3)
H2 = plateau_heights(P2)


def interior_alphas(p, n=3):
    A, B = plateau_heights(p).plateau
    return [A + (B - A) * (j + 1) / (n + 1) for j in range(n)]


def quartiles_of_k(p, k):
    lo, hi = k_subintervals(p)[k]
    return lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)


def test_vertex_example():
    dom = build_domain(P2, 0.39)
    m = dom.x_marks
    assert m.t_a == pytest.approx(1.128205128205, abs=1e-11)
    assert m.t_a1 == pytest.approx(0.438848920863, abs=1e-11)
    assert m.t2_a == pytest.approx(0.772727272727, abs=1e-11)
    assert m.t2_a1 == pytest.approx(0.557377049180, abs=1e-11)
    ys = [v[1] for v in dom.vertices]
    assert ys == [H2.A, H2.A, H2.B, H2.B, H2.C, H2.C, H2.F, H2.F, H2.E, H2.E, H2.D, H2.D]
    lines = dom.export_vertices().splitlines()
    assert len(lines) == 12 and lines[0] == "0.39 0.372281323269014"


@pytest.mark.parametrize("N", [2, 3, 8, 20])
def test_polygon_rectilinear_and_inside(N):
    for p in enumerate_matching_pairs(N).pairs:
        for a in interior_alphas(p):
            dom = build_domain(p, a)
            vs = dom.vertices
            for (x0, y0), (x1, y1) in zip(vs, vs[1:] + vs[:1]):
                assert x0 == x1 or y0 == y1
            assert all(a <= x <= a + 1 for x in dom.x_marks)
            # strips tile the domain
            strips = 0.0
            for _, l, r in dom.strips:
                xs = sorted({l, r} | {x for x in dom.x_marks if l < x < r})
                for u, v in zip(xs, xs[1:]):
                    lo, hi = dom.fiber(0.5 * (u + v))
                    strips += (v - u) * float(hi - lo)
            assert strips == pytest.approx(dom.area(), rel=1e-12)


def test_endpoint_shapes():
    at_a = build_domain(P2, H2.A)
    assert at_a.x_marks.t_a == pytest.approx(H2.A + 1, abs=1e-12)
    at_b = build_domain(P2, H2.B)
    assert at_b.x_marks.t_a1 == pytest.approx(H2.B, abs=1e-12)
    assert at_b.x_marks.t_a == pytest.approx(H2.D, abs=1e-12)
    for dom in (at_a, at_b):
        assert check_lamination(dom, 50_000, seed=3).violations == 0


def test_build_domain_outside_plateau():
    with pytest.raises(ClassificationError):
        build_domain(P2, 0.36)


def test_step_examples():
    x, y = natext_step(P2, 0.39, (0.39, H2.A))
    assert (x, y) == pytest.approx((2 / 0.39 - 4, H2.C), abs=1e-14)
    x, y = natext_step(P2, 0.39, (1.39, H2.B))
    assert (x, y) == pytest.approx((2 / 1.39 - 1, H2.F), abs=1e-14)
    assert natext_inverse(P2, 0.39, 4, (2 / 0.39 - 4, H2.C)) == pytest.approx((0.39, H2.A), abs=1e-14)
    assert natext_inverse(P2, 0.39, 1, (2 / 1.39 - 1, H2.F)) == pytest.approx((1.39, H2.B), abs=1e-14)
    with pytest.raises(InvalidBranchError):
        natext_inverse(P2, 0.39, 9, (0.5, 1.0))


@pytest.mark.parametrize("N, j", [(2, 1), (2, 4), (8, 3), (20, 7)])
def test_second_coordinate_fixed_point(N, j):
    f = 2.0 * N / (math.sqrt(4.0 * N + j * j) + j)
    assert N / (j + f) == pytest.approx(f, rel=1e-14)


def test_contains_examples():
    dom = build_domain(P2, 0.39)
    x0, x1, y0, y1 = dom.bbox
    assert dom.contains(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    assert not dom.contains(0.39 - 1e-6, 0.5 * (H2.A + H2.D))
    assert not dom.contains(dom.x_marks.t_a1 - 1e-6, 0.5 * (H2.D + H2.E))


@pytest.mark.parametrize("N", [2, 3, 8])
def test_lamination_small(N):
    for p in enumerate_matching_pairs(N).pairs:
        for a in interior_alphas(p):
            rep = check_lamination(build_domain(p, a), 50_000, seed=11)
            assert rep.violations == 0 and rep.max_overlap <= 1
            assert rep.excluded < 50


def test_lamination_negative_control():
    h = plateau_heights(P2)
    bad = type(h)(h.A, h.B, h.C, h.D, h.E + 0.01, h.F)
    rep = check_lamination(build_domain(P2, 0.39, heights=bad), 100_000, seed=1)
    assert rep.violations > 0


def test_snug_fit_heights():
    for N in (2, 8, 20):
        for p in enumerate_matching_pairs(N).pairs:
            h = plateau_heights(p)
            for k in range(p.d, p.d + p.i):
                assert abs(N / (k + h.E) - N / (k + 1 + h.A)) < 1e-12
                assert abs(N / (k + h.F) - N / (k + 1 + h.B)) < 1e-12


def test_quilting_regions_example():
    a, b = quartiles_of_k(P2, 2)
    q = quilting_regions(P2, a, b)
    assert q.k == 2
    assert q.A0 == (a, b, H2.A, H2.D)
    assert q.D0 == (a + 1, b + 1, H2.C, H2.F)
    # 0.39 and 0.40 straddle two k sub-intervals
    with pytest.raises(ClassificationError):
        quilting_regions(P2, 0.39, 0.40)


def test_quilting_degenerate():
    q = quilting_regions(P2, 0.39, 0.39)
    assert all(r.width == 0 for r in (q.A0, q.A1, q.A2, q.D0, q.D1, q.D2))


@pytest.mark.parametrize("pair", [(2, 1, 3), (8, 2, 2), (8, 4, 6), (3, 2, 7)])
def test_verify_quilting(pair):
    p = MatchingPair(*pair)
    for k, (lo, hi) in k_subintervals(p).items():
        if hi - lo < 1e-9:
            continue
        a, b = lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)
        assert verify_quilting(p, a, b) < 1e-9


def test_quilting_patches_map_onto_each_other():
    a, b = quartiles_of_k(P2, 2)
    q = QuiltingMap(P2, a, b)
    P = q.patches
    for level, (src, dst) in enumerate([(P.D0, P.A0), (P.D1, P.A1), (P.D2, P.A2)]):
        assert max(abs(u - v) for u, v in zip(q.image_rect(src, level), dst)) < 1e-12


def test_quilting_map_points():
    a, b = quartiles_of_k(P2, 2)
    q = QuiltingMap(P2, a, b)
    assert q((a + 1, H2.C)) == pytest.approx((a, H2.A), abs=1e-12)
    outside = (0.5 * (b + a + 1), 0.5 * (H2.C + H2.F))  # right part, not in any D patch
    assert q.domain_beta.contains(*outside)
    assert q(outside) == outside
    with pytest.raises(OutOfDomainError):
        q((b - 1e-3, H2.A))


@pytest.mark.parametrize("pair", [(2, 1, 3), (8, 4, 6)])
def test_quilting_map_injective_into_alpha_domain(pair):
    p = MatchingPair(*pair)
    k = max(k_subintervals(p).items(), key=lambda kv: kv[1][1] - kv[1][0])[0]
    a, b = quartiles_of_k(p, k)
    q = QuiltingMap(p, a, b)
    pts = q.domain_beta.sample(100_000, np.random.default_rng(5))
    out = q.map_array(pts)
    assert np.all(q.domain_alpha.contains(out[:, 0], out[:, 1], tol=1e-9))
    order = np.lexsort((out[:, 1], out[:, 0]))
    gaps = np.max(np.abs(np.diff(out[order], axis=0)), axis=1)
    same_input = np.all(np.diff(pts[order], axis=0) == 0, axis=1)
    assert np.all((gaps > 1e-12) | same_input)


@pytest.mark.parametrize("pair", [(2, 1, 3), (8, 2, 2)])
def test_quilting_preserves_mass(pair):
    p = MatchingPair(*pair)
    for k, (lo, hi) in list(k_subintervals(p).items())[:2]:
        a, b = lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3
        q = QuiltingMap(p, a, b)
        assert abs(rect_mass(p.N, q.image_rect(q.patches.D0)) - rect_mass(p.N, q.patches.D0)) < 1e-12
        mc = quilting_mass_check(p, a, b, samples=100_000, seed=k)
        assert mc.z < 3


@pytest.mark.parametrize("N, r", [(2, Rect(0.4, 1.1, 0.4, 1.3)), (8, Rect(0.7, 1.5, 0.7, 1.7)), (3, Rect(0.1, 0.2, 0.3, 0.9))])
def test_rect_mass_quadrature(N, r):
    want, _ = integrate.dblquad(lambda y, x: N / (N + x * y) ** 2, r.x0, r.x1, r.y0, r.y1, epsabs=1e-13)
    assert rect_mass(N, r) == pytest.approx(want, abs=1e-11)


@pytest.mark.parametrize("N", [2, 3, 8])
def test_domain_mass_is_inverse_H(N):
    for p in enumerate_matching_pairs(N).pairs:
        for a in interior_alphas(p):
            assert domain_mass(build_domain(p, a)) == pytest.approx(1 / normalizing_constant(p), rel=1e-11)
