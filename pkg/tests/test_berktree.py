import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ordres.berktree import (
    CPAFn,
    DiscreteMeasure,
    Direction,
    Skeleton,
    TOWARD_INFINITY,
    branching_measure,
    direction_key,
    direction_toward,
    gauss_point,
    in_direction,
    integrate_cpa,
    is_above,
    join,
    make_point,
    measure_from_json,
    parse_point,
    point_along,
    pushforward_measure,
    residue_direction,
    rho,
    skeleton_from_json,
    tree_laplacian,
)
from ordres.errors import RamificationNeeded, SupportOffGraph
from ordres.valfield import context

CTX = context(3)

points = st.builds(
    lambda c, t: make_point(CTX, c, t),
    st.integers(min_value=-60, max_value=60),
    st.fractions(min_value=-3, max_value=4, max_denominator=2),
)


def test_point_literals_round_trip():
    P = parse_point("7@2", CTX)
    assert str(P) == "7@2"
    assert parse_point("16@2", CTX) == P  # 16 and 7 agree mod 9
    assert parse_point(str(make_point(CTX, Fraction(1, 3), -1)), CTX) == make_point(CTX, Fraction(1, 3), -1)


def test_join_and_distance():
    A, B = make_point(CTX, 1, 1), make_point(CTX, -1, 1)
    assert join(A, B) == gauss_point(CTX)
    assert rho(A, B) == 2
    assert is_above(gauss_point(CTX), A)


@given(points, points, points)
def test_metric_axioms(A, B, C):
    assert rho(A, B) == rho(B, A) >= 0
    assert (rho(A, B) == 0) == (A == B)
    assert rho(A, C) <= rho(A, B) + rho(B, C)


@given(points, points, points, points)
def test_four_point_condition(A, B, C, D):
    sums = sorted([rho(A, B) + rho(C, D), rho(A, C) + rho(B, D), rho(A, D) + rho(B, C)])
    assert sums[1] == sums[2]


@given(points, points)
def test_point_along_moves_exact_distance(P, Q):
    if P == Q:
        return
    v = direction_toward(P, Q)
    s = min(rho(P, Q), Fraction(1, 2))
    X = point_along(P, v, s)
    assert rho(P, X) == s
    assert rho(X, Q) == rho(P, Q) - s
    assert in_direction(P, v, X)


def test_strict_point_along_rejects_type_three():
    with pytest.raises(RamificationNeeded):
        point_along(gauss_point(CTX), TOWARD_INFINITY, Fraction(1, 2), strict=True)


def test_residue_directions_are_distinct():
    G = gauss_point(CTX)
    keys = {direction_key(G, residue_direction(G, r)) for r in range(3)}
    assert len(keys) == 3


@given(st.lists(points, min_size=1, max_size=6))
def test_laplacian_has_total_mass_zero(pts):
    skel = Skeleton(pts)
    rng = random.Random(len(pts))
    f = CPAFn(skel, [Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in skel.vertices])
    assert tree_laplacian(f).total_mass() == 0


@given(st.lists(points, min_size=1, max_size=6))
def test_laplacian_of_minus_depth_is_branching_identity(pts):
    skel = Skeleton(pts)
    f = CPAFn.from_function(skel, lambda P: -P.t)
    expected = branching_measure(skel).scaled(-2) + DiscreteMeasure([(skel.top, 2)])
    assert tree_laplacian(f) == expected


@given(st.lists(points, min_size=1, max_size=6))
def test_branching_measure_is_probability(pts):
    assert branching_measure(Skeleton(pts)).total_mass() == 1


@given(st.lists(points, min_size=1, max_size=4), st.lists(points, min_size=1, max_size=3), points)
def test_nested_retractions(small, extra, X):
    inner = Skeleton(small)
    outer = inner.with_points(extra)
    assert inner.retract(outer.retract(X)) == inner.retract(X)
    R = outer.retract(X)
    assert outer.contains(R)
    for V in outer.vertices:
        assert rho(X, V) >= rho(X, R)


def test_measure_json_round_trip():
    nu = DiscreteMeasure([(make_point(CTX, 1, 1), Fraction(1, 3)), (gauss_point(CTX), Fraction(2, 3))])
    assert measure_from_json(nu.to_json(), CTX) == nu


def test_skeleton_json_round_trip():
    skel = Skeleton([make_point(CTX, 1, 2), make_point(CTX, 2, 1), make_point(CTX, 0, -1)])
    again = skeleton_from_json(skel.to_json(), CTX)
    assert again.vertices == skel.vertices and again.edges() == skel.edges()


def test_integration_requires_support_on_graph():
    skel = Skeleton([gauss_point(CTX), make_point(CTX, 0, 2)])
    f = CPAFn.from_function(skel, lambda P: P.t)
    nu = DiscreteMeasure([(make_point(CTX, 1, 1), 1)])
    with pytest.raises(SupportOffGraph):
        integrate_cpa(f, nu)
    assert integrate_cpa(f, pushforward_measure(nu, skel)) == 0
    assert f(make_point(CTX, 0, 1)) == 1


def test_direction_masses():
    A, B = make_point(CTX, 1, 1), make_point(CTX, -1, 1)
    nu = DiscreteMeasure([(A, Fraction(1, 2)), (B, Fraction(1, 2))])
    G = gauss_point(CTX)
    assert nu.mass_in_direction(G, Direction.toward(CTX.element(1))) == Fraction(1, 2)
    assert nu.mass_in_direction(G, TOWARD_INFINITY) == 0
