import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ordres.berktree import (
    TOWARD_INFINITY,
    direction_toward,
    gauss_point,
    join,
    make_point,
    point_along,
    residue_directions,
    rho,
)
from ordres.errors import DegenerateMap, NoStabilization, RamificationNeeded
from ordres.projmap import make_lift, normalize_lift, ord_resultant
from ordres.resfunc import (
    default_constant,
    empirical_slope,
    eval_fn,
    green_estimate,
    green_ladder,
    height_convergent,
    lipschitz_constant,
    normalized_ord_res,
    ord_res_at,
    ord_res_at_conjugate,
)
from ordres.valfield import context

CTX = context(3)


def random_lift(rng):
    while True:
        d = rng.choice([2, 2, 3])
        F = [rng.randint(-6, 6) * 3 ** rng.randint(0, 2) for _ in range(d + 1)]
        G = [rng.randint(-6, 6) * 3 ** rng.randint(0, 2) for _ in range(d + 1)]
        try:
            return normalize_lift(make_lift(CTX, F, G))
        except DegenerateMap:
            continue


def point_on_path(x, y, s):
    """Point at distance ``s`` from ``x`` on the path to ``y``."""
    if s == 0:
        return x
    J = join(x, y)
    up = x.t - J.t
    if s <= up:
        return point_along(x, TOWARD_INFINITY, s) if s > 0 else x
    return point_along(J, direction_toward(J, y), s - up) if s - up > 0 else J


def test_square_at_depth_one_by_direct_conjugation(square):
    # gamma(z) = 3z conjugates [X^2, Y^2] to [9X^2, 3Y^2] ~ [3X^2, Y^2]; Res = 9
    conj = normalize_lift(make_lift(CTX, [3, 0, 0], [0, 0, 1]))
    assert ord_resultant(conj) == 2
    P = make_point(CTX, 0, 1)
    assert ord_res_at(square, P) == 2
    for n in range(1, 7):
        assert normalized_ord_res(square, P, n) == 1
        assert eval_fn(square, P, n) == 0


@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_square_along_the_ray_to_zero(square, t):
    P = make_point(CTX, 0, t)
    assert ord_res_at_conjugate(square, P) == ord_res_at(square, P) == 2 * t


def test_square_off_the_ray(square):
    # the Lipschitz-one claim fails here: distance 1 from Gauss, value 3
    P = make_point(CTX, 2, 1)
    assert ord_res_at_conjugate(square, P) == 6
    assert normalized_ord_res(square, P) == 3
    assert rho(P, gauss_point(CTX)) == 1


def test_quadratic_gauss_value(quadratic):
    assert normalized_ord_res(quadratic, gauss_point(CTX)) == 1


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_routes_agree(seed):
    rng = random.Random(seed)
    lift = random_lift(rng)
    P = make_point(CTX, rng.randint(-40, 40), rng.randint(-2, 3))
    n = 1 if lift.degree == 3 else rng.randint(1, 2)
    assert ord_res_at(lift, P, n) == ord_res_at_conjugate(lift, P, n)


def test_route_b_needs_value_group(square):
    P = make_point(CTX, 0, Fraction(1, 2))
    with pytest.raises(RamificationNeeded):
        ord_res_at_conjugate(square, P)
    assert ord_res_at(square, P) == 1


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_convex_and_sharply_lipschitz(seed):
    rng = random.Random(seed)
    lift = random_lift(rng)
    n = rng.randint(1, 2) if lift.degree == 2 else 1
    x = make_point(CTX, rng.randint(-30, 30), Fraction(rng.randint(-4, 8), 2))
    y = make_point(CTX, rng.randint(-30, 30), Fraction(rng.randint(-4, 8), 2))
    L = rho(x, y)
    fx, fy = normalized_ord_res(lift, x, n), normalized_ord_res(lift, y, n)
    assert abs(fx - fy) <= lipschitz_constant(lift, n) * L
    if L == 0:
        return
    s = Fraction(rng.randint(0, 12), 12) * L
    m = point_on_path(x, y, s)
    assert rho(x, m) == s
    lam = s / L
    assert normalized_ord_res(lift, m, n) <= (1 - lam) * fx + lam * fy


@pytest.mark.parametrize("v", range(4))
def test_good_reduction_minimum_at_gauss(square, v):
    G = gauss_point(CTX)
    assert empirical_slope(square, 1, G, residue_directions(G)[v]) >= 0


def test_empirical_slope_along_ray(square):
    P = make_point(CTX, 0, 1)
    assert empirical_slope(square, 1, P, TOWARD_INFINITY, modified=True) == 0
    assert empirical_slope(square, 1, P, TOWARD_INFINITY) == -1


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_slopes_are_integral_multiples(seed):
    rng = random.Random(seed)
    lift = random_lift(rng)
    P = make_point(CTX, rng.randint(-9, 9), rng.randint(-1, 2))
    v = rng.choice(residue_directions(P))
    D = lift.degree
    assert (empirical_slope(lift, 1, P, v) * (D * D - D)).denominator == 1


def test_no_stabilization_when_step_floor_is_too_high(haar):
    with pytest.raises(NoStabilization):
        empirical_slope(haar, 1, gauss_point(CTX), TOWARD_INFINITY, step=Fraction(1), min_step=Fraction(3, 4))


@pytest.mark.parametrize("t", [0, 1, 2])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_height_bound_for_power_map(square, n, t):
    est = height_convergent(square, make_point(CTX, 0, t), n)
    # the canonical height of zeta_{0,t} for z^2 vanishes when t >= 0
    assert abs(est.value - 0) <= est.error_bound


def test_green_ladder_shape(square):
    ladder = green_ladder(square, make_point(CTX, 0, 1), 4, C=2)
    assert [g.value for g in ladder] == [1, 1, 1, 1]
    assert [g.error_bound for g in ladder] == [Fraction(4, 2 ** n - 1) for n in range(1, 5)]
    assert ladder[0].empirical_gap is None and ladder[1].empirical_gap == 0


def test_green_constant_default(haar, quadratic):
    assert default_constant(haar) == 1
    assert default_constant(quadratic) == 2
    with pytest.raises(ValueError):
        green_estimate(haar, gauss_point(CTX), 1, C=0)


def test_green_gaps_shrink_on_quadratic(quadratic):
    ladder = green_ladder(quadratic, gauss_point(CTX), 4)
    assert ladder[0].value == 1
    for g in ladder[1:]:
        assert g.empirical_gap <= g.error_bound
