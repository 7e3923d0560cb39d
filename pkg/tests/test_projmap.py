import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from ordres.errors import DegenerateMap, IterationBudgetExceeded, SingularMatrix
from ordres.projmap import (
    MobiusMap,
    compose_lifts,
    conjugate_lift,
    iterate_lift,
    make_lift,
    normalize_lift,
    ord_resultant,
    ord_resultant_iterate,
    reduce_map,
    resultant,
)
from ordres.valfield import INF, context, padic_ord


def random_lift(rng, p, d, full_degree=False):
    ctx = context(p)
    while True:
        F = [rng.randint(-9, 9) * p ** rng.randint(0, 2) for _ in range(d + 1)]
        G = [rng.randint(-9, 9) * p ** rng.randint(0, 2) for _ in range(d + 1)]
        if full_degree and (F[0] == 0 or G[0] == 0):
            continue
        try:
            return normalize_lift(make_lift(ctx, F, G))
        except DegenerateMap:
            continue


def sympy_resultant(lift):
    x = sympy.symbols("x")
    d = lift.degree
    f = sum(sympy.Rational(str(c.coeffs[0])) * x ** (d - i) for i, c in enumerate(lift.F))
    g = sum(sympy.Rational(str(c.coeffs[0])) * x ** (d - i) for i, c in enumerate(lift.G))
    return Fraction(str(sympy.resultant(f, g, x)))


@pytest.mark.parametrize("seed", range(12))
def test_resultant_matches_independent_oracle(seed):
    rng = random.Random(seed)
    lift = random_lift(rng, rng.choice([2, 3, 5]), rng.choice([1, 2, 3]), full_degree=True)
    assert resultant(lift).coeffs[0] == sympy_resultant(lift)


def test_quadratic_resultant_and_reduction(quadratic):
    assert ord_resultant(quadratic) == 2
    red = reduce_map(quadratic)
    assert red.is_constant and red.constant_value == INF


def test_reduction_degree_drops_after_cancellation():
    ctx = context(3)
    red = reduce_map(normalize_lift(make_lift(ctx, [3, 1, 0], [0, 0, 1])))
    assert red.degree == 1 and red.is_identity()


def test_square_reduces_to_square(square):
    red = reduce_map(square)
    assert red.degree == 2 and [red(r) for r in range(3)] == [0, 1, 1]


def test_conjugation_by_scaling(square):
    ctx = square.ctx
    gamma = MobiusMap.affine(ctx.element(3), ctx.zero())
    conj, m = conjugate_lift(square, gamma)
    assert [c.coeffs[0] for c in conj.F] == [9, 0, 0]
    assert [c.coeffs[0] for c in conj.G] == [0, 0, 3]
    assert m == 1


def test_normalization_records_shift():
    ctx = context(3)
    lift = normalize_lift(make_lift(ctx, [3, 0, 3], [0, 9, 0]))
    assert lift.normalization_shift == 1
    assert lift.is_normalized()


def test_common_root_is_degenerate():
    ctx = context(3)
    with pytest.raises(DegenerateMap):
        normalize_lift(make_lift(ctx, [1, -1, 0], [1, 0, -1]))


def test_singular_moebius():
    ctx = context(3)
    with pytest.raises(SingularMatrix):
        MobiusMap(ctx.one(), ctx.one(), ctx.one(), ctx.one())


def test_quadratic_second_iterate(quadratic):
    it = iterate_lift(quadratic, 2)
    assert [c.coeffs[0] for c in it.F] == [1, 0, -2, 0, -8]
    assert [c.coeffs[0] for c in it.G] == [0, 0, 0, 0, 27]
    assert ord_resultant(it) == ord_resultant_iterate(quadratic, 2) == 12


def test_iterate_normalization_is_tracked():
    # pz^2/(z+p): the plain second composition is not normalised
    ctx = context(3)
    lift = normalize_lift(make_lift(ctx, [3, 0, 0], [0, 1, 3]))
    it = iterate_lift(lift, 2)
    assert it.is_normalized()
    assert it.normalization_shift != 0
    assert ord_resultant(it) == ord_resultant_iterate(lift, 2)


@pytest.mark.parametrize("seed", range(10))
def test_closed_form_matches_direct_determinant(seed):
    rng = random.Random(100 + seed)
    lift = random_lift(rng, rng.choice([2, 3, 5]), 2)
    for n in (1, 2, 3):
        assert ord_resultant(iterate_lift(lift, n)) == ord_resultant_iterate(lift, n)


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_raw_composition_identity(seed):
    rng = random.Random(seed)
    p = rng.choice([2, 3, 5])
    lift = random_lift(rng, p, 2)
    raw = compose_lifts(lift, lift)
    d = 2
    assert (d * d - d) * ord_resultant(raw) == (d ** 4 - d ** 2) * ord_resultant(lift)


def test_budget_from_environment(monkeypatch, square):
    monkeypatch.setenv("DYNLAB_MAX_BUDGET", "4")
    with pytest.raises(IterationBudgetExceeded):
        iterate_lift(square, 3)
    monkeypatch.setenv("DYNLAB_MAX_BUDGET", "8")
    assert iterate_lift(square, 3).degree == 8


def test_resultant_of_e2_context():
    ctx = context(3, 2)
    pi = ctx.pi_power(1)
    lift = normalize_lift(make_lift(ctx, [ctx.one(), ctx.zero(), ctx.zero()], [ctx.zero(), ctx.zero(), pi]))
    # Res(X^2, pi Y^2) = pi^2
    assert ord_resultant(lift) == 1
    assert padic_ord(9, 3) == 2
