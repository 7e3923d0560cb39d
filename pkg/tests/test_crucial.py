import random
from fractions import Fraction

import pytest

from ordres.berktree import CPAFn, DiscreteMeasure, Skeleton, gauss_point, make_point, rho
from ordres.crucial import (
    FIXED_NON_ID,
    ID_INDIFFERENT,
    NON_FIXED,
    classify_point,
    crucial_laplacian_details,
    crucial_measure_laplacian,
    crucial_measure_weights,
    fixed_point_tree,
    graph_constants,
    haar_reference,
    measure_from_weights,
    point_weight,
    predicted_offtree_slope,
    probe_junction,
    random_probes,
    squarefree_part,
    weak_conv_bound,
)
from ordres.errors import PartialCoverage
from ordres.projmap import make_lift, normalize_lift
from ordres.valfield import context

CTX = context(3)
G = gauss_point(CTX)


def test_haar_first_iterate_is_gauss_mass(haar):
    assert crucial_measure_laplacian(haar, 1) == DiscreteMeasure([(G, 1)])


def test_haar_second_iterate(haar):
    expected = DiscreteMeasure(
        [(G, Fraction(1, 4))] + [(make_point(CTX, a, 1), Fraction(1, 4)) for a in range(3)]
    )
    assert crucial_measure_laplacian(haar, 2) == expected


def test_quadratic_first_iterate(quadratic):
    assert crucial_measure_laplacian(quadratic, 1) == DiscreteMeasure([(G, 1)])


def test_weights_at_gauss(haar, quadratic):
    w = point_weight(haar, 1, G)
    assert (w.fixed, w.valence, w.weight) == (False, 4, 2)
    w = point_weight(quadratic, 1, G)
    assert (w.fixed, w.valence, w.weight) == (False, 3, 1)


def test_classical_points_carry_no_weight(haar):
    assert crucial_measure_laplacian(haar, 2).weight(make_point(CTX, 0, 5)) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_routes_agree_on_quadratic(quadratic, n):
    details = crucial_laplacian_details(quadratic, n)
    reports = crucial_measure_weights(quadratic, n)
    assert sum(r.weight for r in reports) == 2 ** n - 1
    assert measure_from_weights(quadratic, n, reports) == details.measure
    assert details.certified


def test_good_reduction_gauss_is_fixed(square):
    w = point_weight(square, 1, G)
    assert w.fixed and w.degree == 2 and w.weight == 1
    assert crucial_measure_laplacian(square, 1) == DiscreteMeasure([(G, 1)])


def test_weight_route_reports_unresolved_points(square):
    # the fixed points of z^8 other than 0, 1, oo need F_729
    with pytest.raises(PartialCoverage) as info:
        crucial_measure_weights(square, 3, [G])
    assert info.value.unresolved == [G]
    assert not crucial_laplacian_details(square, 3).certified


def test_fixed_point_tree_of_haar(haar):
    tree = fixed_point_tree(haar, 2)
    assert tree.complete and tree.infinity_fixed and tree.distinct_finite == 9
    assert len(tree.leaves) == 9


def test_squarefree_part_removes_repeats():
    x = CTX.element
    poly = (x(0), x(0), x(1))  # z^2
    assert len(squarefree_part(poly)) == 2


def test_predicted_slope_examples(haar):
    assert predicted_offtree_slope(haar, 1, G, NON_FIXED, 2) == 0
    assert predicted_offtree_slope(haar, 1, G, ID_INDIFFERENT, 5) == 0
    assert predicted_offtree_slope(haar, 2, G, NON_FIXED, 1, junction=True) == Fraction(2, 8)
    assert predicted_offtree_slope(haar, 1, G, FIXED_NON_ID, 3) == 3


@pytest.mark.parametrize("preset", ["haar", "quadratic"])
def test_offtree_slopes_match_prediction(preset, request):
    lift = request.getfixturevalue(preset)
    rng = random.Random(7)
    for n in (1, 2):
        for probe in random_probes(lift, n, 10, rng):
            assert probe.agrees, probe


def test_junction_probe_at_fixed_gauss(square):
    # Gauss is fixed for z^2 and the direction 2 holds no fixed point
    from ordres.berktree import residue_direction

    assert classify_point(square, 1, G) == FIXED_NON_ID
    probe = probe_junction(square, 1, G, [residue_direction(G, 2)])
    assert probe.agrees and probe.predicted == 2


def test_id_indifferent_offtree_probe():
    # z + 3 z^2 reduces to the identity at the Gauss point
    lift = normalize_lift(make_lift(CTX, [3, 1, 0], [0, 0, 1]))
    assert classify_point(lift, 1, G) == ID_INDIFFERENT


def test_weak_bound_unit_segment(square):
    A, B = G, make_point(CTX, 0, 1)
    skel = Skeleton([A, B])
    f = CPAFn.from_function(skel, lambda P: rho(A, P))
    report = weak_conv_bound(skel, f, square, 2, C=1)
    assert (report.laplacian_mass, report.D_gamma, report.bound) == (2, 12, Fraction(28, 3))


def test_weak_bound_constant_function(square):
    skel = Skeleton([G, make_point(CTX, 0, 1), make_point(CTX, 1, 1)])
    f = CPAFn(skel, [5] * len(skel.vertices))
    report = weak_conv_bound(skel, f, square, 3, C=1)
    _, _, _, D_gamma = graph_constants(skel)
    assert report.laplacian_mass == 0
    assert report.bound == Fraction(2, 7) * 5 * D_gamma


def test_weak_bound_decreases(haar):
    skel = Skeleton([G, make_point(CTX, 0, 2)])
    f = CPAFn.from_function(skel, lambda P: rho(G, P))
    bounds = [weak_conv_bound(skel, f, haar, n).bound for n in (1, 2, 3, 4)]
    assert bounds == [Fraction(56, 3 ** n - 1) for n in (1, 2, 3, 4)]


def test_haar_reference_masses():
    skel = Skeleton([G, make_point(CTX, 0, 2)])
    ref = haar_reference(skel)
    assert ref == DiscreteMeasure(
        [(G, Fraction(2, 3)), (make_point(CTX, 0, 1), Fraction(2, 9)), (make_point(CTX, 0, 2), Fraction(1, 9))]
    )
