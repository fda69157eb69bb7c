import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from teichflow.curves import (
    INF,
    ZERO,
    Slope,
    act,
    annular_projection_distance,
    as_slope,
    continued_fraction,
    convergents,
    dehn_twist,
    farey_distance,
    farey_geodesic,
    from_continued_fraction,
    intersection,
    normalize_to_infinity,
    twist_of,
)
from teichflow.errors import SearchBoundExceeded, TwistUndefined

from oracles import bfs, convergent_list, crossing_count, naive_farey_graph, signed_lift_crossings, slopes_up_to


@st.composite
def slope_st(draw, bound=60):
    q = draw(st.integers(0, bound))
    p = draw(st.integers(-bound, bound))
    if p == 0 and q == 0:
        q = 1
    return Slope(p, q)


# --- Slope basics ------------------------------------------------------------


def test_slope_normalizes_sign_and_gcd():
    assert Slope(2, -4) == Slope(-1, 2)
    assert Slope(-3, 0) == INF
    with pytest.raises(ValueError):
        Slope(0, 0)


def test_parse_and_str():
    assert Slope.parse("3/5") == Slope(3, 5)
    assert Slope.parse("inf") == INF
    assert Slope.parse("-2") == Slope(-2, 1)
    assert str(Slope(-2, 3)) == "-2/3"


def test_as_slope_truncates_reals():
    golden = (1 + math.sqrt(5)) / 2
    s = as_slope(golden)
    assert s.q <= 10**6
    assert abs(float(s.value) - golden) < 1e-11
    assert as_slope(math.inf) == INF


# --- intersection ------------------------------------------------------------


def test_intersection_examples():
    assert intersection(ZERO, INF) == 1
    assert intersection(Slope(1, 2), Slope(1, 3)) == 1
    assert intersection(Slope(2, 3), Slope(3, 2)) == 5


@pytest.mark.parametrize("a,b", [("2/3", "3/2"), ("0/1", "1/0"), ("1/2", "-1/3"), ("3/4", "1/1"), ("5/2", "1/3")])
def test_intersection_matches_crossing_count(a, b):
    a, b = Slope.parse(a), Slope.parse(b)
    assert intersection(a, b) == crossing_count(a, b)


@given(slope_st(), slope_st())
def test_intersection_symmetric_and_vanishing(a, b):
    assert intersection(a, b) == intersection(b, a)
    assert (intersection(a, b) == 0) == (a == b)


# --- matrices -------------------------------------------------------------------


@given(slope_st())
def test_normalize_sends_alpha_to_infinity(alpha):
    m = normalize_to_infinity(alpha)
    (a, b), (c, d) = m
    assert a * d - b * c == 1
    assert act(m, alpha) == INF


@given(slope_st(), slope_st(), st.integers(-5, 5))
def test_dehn_twist_preserves_intersection_with_core(alpha, beta, k):
    gamma = dehn_twist(alpha, beta, k)
    assert intersection(alpha, gamma) == intersection(alpha, beta)
    assert dehn_twist(alpha, gamma, -k) == beta


def test_dehn_twist_example():
    # twisting 0/1 once about 1/0 gives 1/1 under our orientation
    assert dehn_twist(INF, ZERO, 1) in (Slope(1, 1), Slope(-1, 1))
    assert dehn_twist(INF, ZERO, 2) == Slope(2 * dehn_twist(INF, ZERO, 1).p, 1)


# --- continued fractions ------------------------------------------------------


def test_continued_fraction_roundtrip_examples():
    assert continued_fraction(Fraction(13, 8)) == [1, 1, 1, 1, 2]
    assert from_continued_fraction([1, 1, 1, 1, 2]) == Fraction(13, 8)
    assert [str(c) for c in convergents([0, 2, 3])] == ["0/1", "1/2", "3/7"]


@given(st.lists(st.integers(1, 30), min_size=1, max_size=12), st.integers(-5, 5))
def test_convergents_match_oracle(tail, a0):
    cf = [a0] + tail
    ours = [c.value for c in convergents(cf)]
    assert ours == convergent_list(cf)
    x = from_continued_fraction(cf)
    assert from_continued_fraction(continued_fraction(x)) == x


# --- Farey distance and geodesics --------------------------------------------


def test_farey_examples():
    assert farey_distance(ZERO, INF) == 1
    assert farey_distance(Slope(1, 2), Slope(2, 1)) == 2
    assert farey_distance(Slope(2, 5), Slope(2, 5)) == 0
    g = farey_geodesic(ZERO, Slope(3, 7))
    assert g[0] == ZERO and g[-1] == Slope(3, 7)
    assert len(g) - 1 == farey_distance(ZERO, Slope(3, 7))


def test_farey_search_bound():
    x = Slope.from_fraction(from_continued_fraction([0] + [1] * 40))
    with pytest.raises(SearchBoundExceeded):
        farey_distance(INF, x, max_vertices=10)


@pytest.fixture(scope="module")
def small_graph():
    verts = slopes_up_to(20, lo=-2, hi=2)
    adj = naive_farey_graph(verts)
    return verts, adj


@pytest.fixture(scope="module")
def small_distances(small_graph):
    verts, adj = small_graph
    targets = slopes_up_to(20, lo=-1, hi=1)
    oracle = {s: bfs(adj, s) for s in targets}
    return targets, oracle


def test_distance_matches_bfs_oracle_exhaustive(small_distances):
    targets, oracle = small_distances
    bad = [(a, b) for a in targets for b in targets if farey_distance(a, b) != oracle[a][b]]
    assert not bad, bad[:5]


def test_metric_axioms_exhaustive(small_distances):
    targets, _ = small_distances
    n = len(targets)
    D = np.array([[farey_distance(a, b) for b in targets] for a in targets], dtype=np.int16)
    assert np.all(np.diag(D) == 0)
    assert np.all((D == 0) == np.eye(n, dtype=bool))
    assert np.array_equal(D, D.T)
    # d(i, k) <= d(i, j) + d(j, k) for all triples, one j slab at a time
    for j in range(n):
        assert np.all(D <= D[:, j : j + 1] + D[j : j + 1, :])


def test_geodesics_valid_exhaustive(small_distances):
    targets, oracle = small_distances
    for a in targets:
        for b in targets:
            g = farey_geodesic(a, b)
            assert g[0] == a and g[-1] == b
            assert len(g) - 1 == oracle[a][b]
            assert all(intersection(u, v) == 1 for u, v in zip(g, g[1:]))


@given(slope_st(200), slope_st(200), slope_st(200))
@settings(max_examples=200)
def test_triangle_inequality_large(a, b, c):
    assert farey_distance(a, c) <= farey_distance(a, b) + farey_distance(b, c)


@given(slope_st(300), slope_st(300))
@settings(max_examples=100)
def test_distance_invariant_under_sl2z(a, b):
    m = ((2, 1), (1, 1))
    assert farey_distance(act(m, a), act(m, b)) == farey_distance(a, b)


# --- twisting -----------------------------------------------------------------


@pytest.mark.parametrize("n", [-4, -1, 0, 1, 3, 7])
def test_twist_of_matches_lift_count(n):
    assert twist_of(INF, Slope(n, 1), ZERO) == signed_lift_crossings(n)


def test_twist_undefined_for_disjoint_curve():
    with pytest.raises(TwistUndefined):
        twist_of(INF, INF, ZERO)
    with pytest.raises(TwistUndefined):
        annular_projection_distance(ZERO, ZERO, INF)


def test_twist_equivariance_random_cases():
    rng = random.Random(7)
    for _ in range(100):
        alpha = Slope(rng.randint(-30, 30), rng.randint(1, 30))
        beta = Slope(rng.randint(-30, 30), rng.randint(0, 30) or 1)
        origin = Slope(rng.randint(-30, 30), rng.randint(0, 30) or 1)
        if intersection(alpha, beta) == 0 or intersection(alpha, origin) == 0:
            continue
        k = rng.randint(-20, 20)
        assert twist_of(alpha, dehn_twist(alpha, beta, k), origin) == twist_of(alpha, beta, origin) + k


@given(slope_st(40), slope_st(40), slope_st(40), slope_st(40))
@settings(max_examples=300)
def test_annular_distance_coarse_triangle(alpha, b1, b2, b3):
    if any(intersection(alpha, b) == 0 for b in (b1, b2, b3)):
        return
    d = lambda u, v: annular_projection_distance(alpha, u, v)
    assert d(b1, b1) == 0
    assert d(b1, b2) == d(b2, b1)
    assert d(b1, b3) <= d(b1, b2) + d(b2, b3) + 1


@given(slope_st(40), slope_st(40), st.integers(-30, 30))
def test_annular_distance_grows_with_twisting(alpha, beta, k):
    if intersection(alpha, beta) == 0:
        return
    assert annular_projection_distance(alpha, beta, dehn_twist(alpha, beta, k)) == abs(k)
