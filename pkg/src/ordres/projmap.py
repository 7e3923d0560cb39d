"""Homogeneous lifts of rational maps on the projective line over Q(pi).

A lift ``[F, G]`` of degree ``d`` stores ``F = sum a_i X^(d-i) Y^i`` and
``G = sum b_i X^(d-i) Y^i`` as coefficient tuples ``(a_0, ..., a_d)`` and
``(b_0, ..., b_d)``.  Every homogeneous form in this module uses the same
indexing: entry ``i`` is the coefficient of ``X^(D-i) Y^i``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DegenerateMap, IterationBudgetExceeded, SingularMatrix
from .valfield import INF, ValContext, ValElement, parse_element, element_to_json

DEFAULT_MAX_BUDGET = 65
BUDGET_ENV = "DYNLAB_MAX_BUDGET"


def iteration_budget() -> int:
    """Largest admissible iterate degree; overridable through the environment."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_BUDGET
    return int(raw)


# -- homogeneous form arithmetic ----------------------------------------------

def form_mul(f: Sequence, g: Sequence) -> tuple:
    zero = f[0] * 0
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a:
            continue
        for j, b in enumerate(g):
            if b:
                out[i + j] = out[i + j] + a * b
    return tuple(out)


def form_add(f: Sequence, g: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(f, g))


def form_scale(f: Sequence, c) -> tuple:
    return tuple(a * c for a in f)


def form_ord(f: Sequence[ValElement]):
    """Minimum coefficient valuation of a form (``INF`` for the zero form)."""
    return min((c.ord() for c in f), default=INF)


def form_powers(f: Sequence, k: int, one) -> list:
    """``[f**0, f**1, ..., f**k]`` as forms."""
    powers = [(one,)]
    for _ in range(k):
        powers.append(form_mul(powers[-1], f))
    return powers


def substitute(form: Sequence, left: Sequence, right: Sequence, one) -> tuple:
    """Evaluate ``form(left, right)`` where ``left`` and ``right`` are forms of equal degree."""
    d = len(form) - 1
    lp = form_powers(left, d, one)
    rp = form_powers(right, d, one)
    total = None
    for i, c in enumerate(form):
        if not c:
            continue
        term = form_scale(form_mul(lp[d - i], rp[i]), c)
        total = term if total is None else form_add(total, term)
    if total is None:
        zero = one * 0
        total = (zero,) * (d * (len(left) - 1) + 1)
    return total


# -- lifts --------------------------------------------------------------------

@dataclass(frozen=True)
class Lift:
    """A homogeneous lift ``[F, G]`` of a rational map of degree ``d >= 1``.

    ``normalization_shift`` records the valuation removed when the lift was
    normalised (for iterates: relative to the plain composition of the
    normalised input).  It does not take part in equality.
    """

    ctx: ValContext
    F: tuple
    G: tuple
    normalization_shift: Fraction = field(default=Fraction(0), compare=False)

    @property
    def degree(self) -> int:
        return len(self.F) - 1

    def min_ord(self):
        return min(form_ord(self.F), form_ord(self.G))

    def is_normalized(self) -> bool:
        return self.min_ord() == 0

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p,
            "e": self.ctx.e,
            "d": self.degree,
            "F": [_element_literal(c) for c in self.F],
            "G": [_element_literal(c) for c in self.G],
        }


def _element_literal(x: ValElement):
    if x.ctx.e == 1:
        c = x.coeffs[0]
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return element_to_json(x)


def make_lift(ctx: ValContext, F: Sequence, G: Sequence) -> Lift:
    """Build a lift from coefficient sequences without normalising it."""
    if len(F) != len(G) or len(F) < 2:
        raise ValueError("F and G must be forms of the same degree >= 1")
    Fv = tuple(c if isinstance(c, ValElement) else parse_element(c, ctx) for c in F)
    Gv = tuple(c if isinstance(c, ValElement) else parse_element(c, ctx) for c in G)
    return Lift(ctx, Fv, Gv)


def lift_from_json(data: dict) -> Lift:
    """Load a map given as ``{"p", "e", "d", "F", "G"}`` and normalise it."""
    ctx = ValContext(int(data["p"]), int(data.get("e", 1)))
    raw = make_lift(ctx, data["F"], data["G"])
    if "d" in data and int(data["d"]) != raw.degree:
        raise ValueError(f"declared degree {data['d']} does not match {raw.degree}")
    return normalize_lift(raw)


def scale_lift(lift: Lift, c) -> Lift:
    return Lift(lift.ctx, form_scale(lift.F, c), form_scale(lift.G, c))


def normalize_lift(raw: Lift, check: bool = True) -> Lift:
    """Rescale by a power of pi so that the minimum coefficient valuation is 0."""
    m = raw.min_ord()
    if m == INF:
        raise DegenerateMap("both forms vanish")
    factor = raw.ctx.pi_power(int(-m * raw.ctx.e))
    scaled = scale_lift(raw, factor)
    out = Lift(raw.ctx, scaled.F, scaled.G, Fraction(m) + raw.normalization_shift)
    if check and resultant(out).is_zero():
        raise DegenerateMap("F and G share a projective root")
    return out


# -- resultants ---------------------------------------------------------------

def sylvester_matrix(F: Sequence, G: Sequence) -> list:
    d = len(F) - 1
    zero = F[0] * 0
    size = 2 * d
    rows = []
    for form in (F, G):
        for shift in range(d):
            row = [zero] * size
            for i, c in enumerate(form):
                row[shift + i] = c
            rows.append(row)
    return rows


def bareiss_determinant(matrix: list):
    """Determinant by fraction-free (Bareiss) elimination over a field."""
    m = [list(r) for r in matrix]
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    sign = 1
    prev = None
    for k in range(n - 1):
        if not m[k][k]:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return m[k][k] * 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        inv_prev = None if prev is None else 1 / prev
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                val = row_i[j] * pivot
                if lead and row_k[j]:
                    val = val - lead * row_k[j]
                if inv_prev is not None and val:
                    val = val * inv_prev
                row_i[j] = val
            row_i[k] = lead * 0
        prev = pivot
    return m[n - 1][n - 1] if sign == 1 else -m[n - 1][n - 1]


def resultant(lift: Lift) -> ValElement:
    """Exact Sylvester resultant ``Res(F, G)`` as an element of Q(pi)."""
    ctx = lift.ctx
    matrix = sylvester_matrix(lift.F, lift.G)
    if ctx.e == 1:
        det = bareiss_determinant([[c.coeffs[0] for c in row] for row in matrix])
        return ctx.element(det)
    return bareiss_determinant(matrix)


def ord_resultant(lift: Lift):
    """Valuation of the Sylvester determinant of the lift."""
    res = resultant(lift)
    if res.is_zero():
        raise DegenerateMap("zero resultant")
    return res.ord()


# -- composition and iteration -------------------------------------------------

def compose_lifts(outer: Lift, inner: Lift) -> Lift:
    """Coefficient-level composition ``outer o inner`` (not normalised)."""
    if outer.ctx != inner.ctx:
        raise ValueError("lifts live in different contexts")
    one = outer.ctx.one()
    F = substitute(outer.F, inner.F, inner.G, one)
    G = substitute(outer.G, inner.F, inner.G, one)
    return Lift(outer.ctx, F, G)


def check_budget(d: int, n: int, budget: int | None = None) -> None:
    limit = iteration_budget() if budget is None else budget
    if d ** n > limit:
        raise IterationBudgetExceeded(f"iterate degree {d}**{n} = {d ** n} exceeds budget {limit}")


def iterate_lift(lift: Lift, n: int, budget: int | None = None) -> Lift:
    """Normalised lift of the n-th iterate, built as ``lift o lift^(n-1)``.

    The returned ``normalization_shift`` is the valuation of the scalar
    separating the plain n-fold composition of ``lift`` from the result.
    """
    if n < 1:
        raise ValueError("n must be positive")
    check_budget(lift.degree, n, budget)
    base = Lift(lift.ctx, lift.F, lift.G)
    return _iterate_cached(base, n)


@lru_cache(maxsize=512)
def _iterate_cached(lift: Lift, n: int) -> Lift:
    if n == 1:
        return lift
    prev = _iterate_cached(lift, n - 1)
    raw = compose_lifts(lift, prev)
    step = raw.min_ord()
    factor = lift.ctx.pi_power(int(-step * lift.ctx.e))
    scaled = scale_lift(raw, factor)
    shift = lift.degree * prev.normalization_shift + step
    return Lift(lift.ctx, scaled.F, scaled.G, Fraction(shift))


def ord_resultant_iterate(lift: Lift, n: int, budget: int | None = None):
    """``ordRes`` of the normalised n-th iterate from the closed form.

    The plain composition has resultant valuation
    ``(D^2 - D)/(d^2 - d) * ordRes(lift)`` with ``D = d**n``; normalising
    removes ``2 D`` times the accumulated shift.
    """
    d = lift.degree
    D = d ** n
    it = iterate_lift(lift, n, budget)
    return Fraction(D * D - D, d * d - d) * ord_resultant(lift) - 2 * D * it.normalization_shift


# -- Moebius transformations --------------------------------------------------

@dataclass(frozen=True)
class MobiusMap:
    """``z -> (alpha z + beta) / (gamma z + delta)`` with entries in Q(pi)."""

    alpha: ValElement
    beta: ValElement
    gamma: ValElement
    delta: ValElement

    def __post_init__(self):
        if (self.alpha * self.delta - self.beta * self.gamma).is_zero():
            raise SingularMatrix("Moebius map with zero determinant")

    @classmethod
    def affine(cls, scale: ValElement, shift: ValElement) -> "MobiusMap":
        ctx = scale.ctx
        return cls(scale, shift, ctx.zero(), ctx.one())

    @property
    def is_affine(self) -> bool:
        return self.gamma.is_zero() and self.delta == 1

    def det(self) -> ValElement:
        return self.alpha * self.delta - self.beta * self.gamma


def conjugate_lift(lift: Lift, gamma: MobiusMap):
    """Return ``(Adj(gamma) . lift o gamma, min_ord)``; the pair is not normalised.

    For ``gamma(z) = b z + a`` this is
    ``[F(bX+aY, Y) - a G(bX+aY, Y), b G(bX+aY, Y)]``.
    """
    one = lift.ctx.one()
    left = (gamma.alpha, gamma.beta)
    right = (gamma.gamma, gamma.delta)
    FF = substitute(lift.F, left, right, one)
    GG = substitute(lift.G, left, right, one)
    # Adj(gamma) = [[delta, -beta], [-gamma, alpha]]
    F_new = form_add(form_scale(FF, gamma.delta), form_scale(GG, -gamma.beta))
    G_new = form_add(form_scale(FF, -gamma.gamma), form_scale(GG, gamma.alpha))
    out = Lift(lift.ctx, F_new, G_new)
    return out, out.min_ord()


# -- reduction ----------------------------------------------------------------

def _trim(poly: list) -> list:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_divmod(num: list, den: list, p: int):
    num = list(num)
    den = _trim(list(den))
    inv = pow(den[-1], -1, p)
    quot = [0] * max(len(num) - len(den) + 1, 1)
    while len(_trim(num)) >= len(den):
        shift = len(num) - len(den)
        coef = num[-1] * inv % p
        quot[shift] = coef
        for i, c in enumerate(den):
            num[shift + i] = (num[shift + i] - coef * c) % p
    return _trim(quot), _trim(num)


def _poly_gcd(a: list, b: list, p: int) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        _, r = _poly_divmod(a, b, p)
        a, b = b, r
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def _poly_eval(poly: list, x: int, p: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = (acc * x + c) % p
    return acc


@dataclass(frozen=True)
class ReducedMap:
    """Reduction of a normalised lift over F_p after cancelling common factors.

    ``numerator`` and ``denominator`` are the dehomogenised reduced forms as
    ascending coefficient lists (coefficient of ``z**k`` at index ``k``), of
    homogeneous degree ``degree``.  Points of P^1(F_p) are integers ``0..p-1``
    or ``INF``.
    """

    p: int
    numerator: tuple
    denominator: tuple
    degree: int

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def _top(self, poly: tuple) -> int:
        return poly[self.degree] if len(poly) > self.degree else 0

    def __call__(self, r):
        if r == INF:
            num, den = self._top(self.numerator), self._top(self.denominator)
        else:
            num = _poly_eval(list(self.numerator), int(r), self.p)
            den = _poly_eval(list(self.denominator), int(r), self.p)
        if den == 0:
            return INF
        return num * pow(den, -1, self.p) % self.p

    @property
    def constant_value(self):
        if not self.is_constant:
            raise ValueError("reduction is not constant")
        return self(0)

    def is_identity(self) -> bool:
        if self.degree != 1:
            return False
        return all(self(r) == r for r in list(range(self.p)) + [INF])


def _reduce_form(form: Sequence[ValElement]) -> list:
    from .valfield import reduce_residue

    return [reduce_residue(c) for c in form]


def reduce_map(lift: Lift) -> ReducedMap:
    """Reduce a normalised lift modulo the maximal ideal and cancel the gcd."""
    if not lift.is_normalized():
        raise ValueError("reduce_map expects a normalised lift")
    p = lift.ctx.p
    D = lift.degree
    Fr = _reduce_form(lift.F)
    Gr = _reduce_form(lift.G)
    # ascending in z = X/Y: coefficient of z^k is entry D-k
    f = _trim([Fr[D - k] for k in range(D + 1)])
    g = _trim([Gr[D - k] for k in range(D + 1)])
    if not g:
        return ReducedMap(p, (1,), (0,), 0)
    if not f:
        return ReducedMap(p, (0,), (1,), 0)
    y_power = min(D - (len(f) - 1), D - (len(g) - 1))
    h = _poly_gcd(f, g, p)
    f_red, _ = _poly_divmod(f, h, p)
    g_red, _ = _poly_divmod(g, h, p)
    degree = D - y_power - (len(h) - 1)
    return ReducedMap(p, tuple(f_red or [0]), tuple(g_red or [0]), degree)
