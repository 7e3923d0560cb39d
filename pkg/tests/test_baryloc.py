import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ordres.baryloc import (
    DiscreteGreen,
    SegmentLocus,
    barycenter,
    epsilon_containment,
    green_discrete,
    green_slope,
    min_value_sequence,
    minresloc,
    successive_gaps,
)
from ordres.berktree import (
    DiscreteMeasure,
    Skeleton,
    direction_toward,
    gauss_point,
    make_point,
    point_along,
    residue_directions,
    rho,
)
from ordres.crucial import haar_reference
from ordres.errors import NotProbability
from ordres.valfield import context

CTX = context(3)
G = gauss_point(CTX)
A, B = make_point(CTX, 1, 1), make_point(CTX, -1, 1)


def random_measure(rng, size):
    pts = [make_point(CTX, rng.randint(-20, 20), rng.randint(-1, 3)) for _ in range(size)]
    raw = [rng.randint(1, 6) for _ in pts]
    total = sum(raw)
    return DiscreteMeasure((P, Fraction(w, total)) for P, w in zip(pts, raw))


def test_two_equal_atoms_give_their_segment():
    locus = barycenter(DiscreteMeasure([(A, Fraction(1, 2)), (B, Fraction(1, 2))]))
    assert locus == SegmentLocus.segment(A, B)
    assert locus.contains(G) and locus.kind == "segment"


def test_point_mass():
    assert barycenter(DiscreteMeasure([(A, 1)])) == SegmentLocus.point(A)


def test_haar_retraction_depth_two():
    skel = Skeleton([make_point(CTX, a, 2) for a in range(9)])
    assert barycenter(haar_reference(skel)) == SegmentLocus.point(G)


def test_barycenter_rejects_non_probability():
    with pytest.raises(NotProbability):
        barycenter(DiscreteMeasure([(A, Fraction(1, 2))]))


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=1, max_value=6))
def test_barycenter_characterisation(seed, size):
    nu = random_measure(random.Random(seed), size)
    locus = barycenter(nu)
    skel = Skeleton(nu.support)
    for V in locus.endpoints:
        i = skel.index[V]
        assert all(nu.mass_in_direction(V, skel.direction_to(i, j)) <= Fraction(1, 2) for j in skel.neighbors(i))
    # a vertex just off the locus has a heavy direction
    for i, V in enumerate(skel.vertices):
        if not locus.contains(V):
            assert any(nu.mass_in_direction(V, skel.direction_to(i, j)) > Fraction(1, 2) for j in skel.neighbors(i))


def test_green_of_gauss_mass():
    g = DiscreteGreen.of(DiscreteMeasure([(G, 1)]))
    assert g.constant == 0 and green_discrete(g, G) == 0
    assert green_discrete(g, A) == rho(A, G)
    assert g.double_integral() == 0


def test_green_slope_inside_segment():
    g = DiscreteGreen.of(DiscreteMeasure([(A, Fraction(1, 2)), (B, Fraction(1, 2))]))
    assert green_slope(g, G, direction_toward(G, A)) == 0
    assert green_slope(g, G, direction_toward(G, B)) == 0


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_green_slope_matches_finite_difference(seed):
    rng = random.Random(seed)
    nu = random_measure(rng, rng.randint(1, 5))
    g = DiscreteGreen.of(nu)
    assert g.double_integral() == 0
    Q = make_point(CTX, rng.randint(-20, 20), rng.randint(-1, 3))
    v = rng.choice(residue_directions(Q))
    step = Fraction(1, 2)
    for _ in range(30):
        X = point_along(Q, v, step)
        Y = point_along(Q, v, step / 2)
        q1 = (green_discrete(g, X) - green_discrete(g, Q)) / step
        q2 = (green_discrete(g, Y) - green_discrete(g, Q)) / (step / 2)
        if q1 == q2:
            break
        step /= 2
    assert q1 == green_slope(g, Q, v)
    if nu.mass_in_direction(Q, v) > Fraction(1, 2):
        assert green_slope(g, Q, v) < 0


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_green_minimised_on_barycenter(seed):
    rng = random.Random(seed)
    nu = random_measure(rng, rng.randint(1, 5))
    g = DiscreteGreen.of(nu)
    locus = barycenter(nu)
    best = green_discrete(g, locus.endpoints[0])
    skel = Skeleton(nu.support)
    for V in skel.vertices:
        assert green_discrete(g, V) >= best
        assert (green_discrete(g, V) == best) == locus.contains(V)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_square_minresloc(square, n):
    result = minresloc(square, n)
    assert result.locus == SegmentLocus.point(G) and result.value == 0


def test_quadratic_minresloc_first_iterate(quadratic):
    result = minresloc(quadratic, 1)
    assert result.locus == SegmentLocus.point(G) and result.value == 1


def test_haar_minresloc_first_iterate(haar):
    result = minresloc(haar, 1)
    assert result.locus == SegmentLocus.point(G) and result.value == Fraction(3, 6)


def test_containment_flags(quadratic):
    ref = SegmentLocus.segment(A, B)
    far = SegmentLocus.point(make_point(CTX, 0, 3))
    rows = epsilon_containment(quadratic, [1], far, Fraction(1))
    assert rows[0].distance == 3 and not rows[0].contained
    rows = epsilon_containment(quadratic, [1, 2], ref, 0)
    assert all(r.contained for r in rows)


def test_good_reduction_distance_zero(square):
    rows = epsilon_containment(square, [1, 2], SegmentLocus.point(G), 0)
    assert [r.distance for r in rows] == [0, 0]


def test_min_values_of_power_map(square):
    values = min_value_sequence(square, [1, 2, 3])
    assert values == [0, 0, 0] and successive_gaps(values) == [0, 0]


def test_segment_distance_uses_tree_geometry():
    seg = SegmentLocus.segment(A, B)
    assert seg.distance(make_point(CTX, 0, 2)) == 2
    assert seg.distance(make_point(CTX, 0, -1)) == 1
    assert seg.distance(make_point(CTX, 4, 3)) == 2
