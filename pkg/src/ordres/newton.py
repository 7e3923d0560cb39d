"""Newton polygons, root counting in Berkovich balls and fixed-point counts.

Polynomials are ascending coefficient tuples of ValElements (index ``k`` holds
the coefficient of ``z**k``); the tuple length minus one is the nominal
degree, so vanishing top coefficients are read as roots at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .berktree import Direction, TypeIIPoint
from .errors import IdentityMap, ZeroPolynomial
from .projmap import Lift, iterate_lift
from .valfield import ValElement, format_rational


@dataclass(frozen=True)
class NewtonPolygon:
    """Root valuations with multiplicities, largest valuation first."""

    segments: tuple
    zero_root_multiplicity: int
    infinite_root_multiplicity: int
    nominal_degree: int

    def count_above(self, t, strict: bool = True) -> int:
        """Roots with valuation ``> t`` (or ``>= t``), zero roots included."""
        total = self.zero_root_multiplicity
        for val, mult in self.segments:
            if val > t or (not strict and val == t):
                total += mult
        return total

    def to_json(self) -> list:
        return [[format_rational(v), m] for v, m in self.segments]


def newton_polygon(poly: Sequence[ValElement]) -> NewtonPolygon:
    """Lower convex hull of ``(k, ord c_k)`` read as root valuations."""
    pts = [(k, c.ord()) for k, c in enumerate(poly) if not c.is_zero()]
    if not pts:
        raise ZeroPolynomial("Newton polygon of the zero polynomial")
    hull: list = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it is not strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append((Fraction(y1 - y2) / (x2 - x1), x2 - x1))
    nominal = len(poly) - 1
    return NewtonPolygon(tuple(segments), pts[0][0], nominal - pts[-1][0], nominal)


@lru_cache(maxsize=4096)
def taylor_shift(poly: tuple, center: ValElement) -> tuple:
    """Coefficients of ``poly(z + center)`` (same nominal degree)."""
    if center.is_zero():
        return poly
    zero = center * 0
    out = [zero] * len(poly)
    for c in reversed(poly):
        # out <- out * (z + center) + c
        shifted = [zero] + out[:-1]
        out = [s + o * center for s, o in zip(shifted, out)]
        out[0] = out[0] + c
    return tuple(out)


def count_roots_in_ball(poly: Sequence[ValElement], center: ValElement, t, open_flag: bool) -> int:
    """Number of roots ``x`` with ``ord(x - center) > t`` (open) or ``>= t`` (closed)."""
    shifted = taylor_shift(tuple(poly), center)
    return newton_polygon(shifted).count_above(Fraction(t), strict=open_flag)


def root_valuations(poly: Sequence[ValElement], center: ValElement) -> NewtonPolygon:
    """Newton polygon of ``poly(z + center)``: valuations of ``root - center``."""
    return newton_polygon(taylor_shift(tuple(poly), center))


@dataclass(frozen=True)
class FixedPointDivisor:
    """The form ``R = Y F - X G`` of degree ``D + 1`` and its dehomogenisation."""

    form: tuple
    poly: tuple
    infinity_multiplicity: int

    @property
    def degree(self) -> int:
        return len(self.form) - 1

    @property
    def infinity_fixed(self) -> bool:
        return self.infinity_multiplicity > 0


def fixed_point_divisor(lift: Lift) -> FixedPointDivisor:
    D = lift.degree
    zero = lift.ctx.zero()
    form = []
    for i in range(D + 2):
        term = lift.F[i - 1] if i >= 1 else zero
        if i <= D:
            term = term - lift.G[i]
        form.append(term)
    if all(c.is_zero() for c in form):
        raise IdentityMap("Y F - X G vanishes identically")
    poly = tuple(form[D + 1 - k] for k in range(D + 2))
    top = max(k for k, c in enumerate(poly) if not c.is_zero())
    return FixedPointDivisor(tuple(form), poly, D + 1 - top)


@lru_cache(maxsize=256)
def _iterate_divisor(lift: Lift, n: int) -> FixedPointDivisor:
    return fixed_point_divisor(iterate_lift(lift, n))


def iterate_fixed_divisor(lift: Lift, n: int) -> FixedPointDivisor:
    iterate_lift(lift, n)  # budget check
    return _iterate_divisor(Lift(lift.ctx, lift.F, lift.G), n)


def count_fixed_in_direction(lift: Lift, n: int, P: TypeIIPoint, v: Direction) -> int:
    """Fixed points of the n-th iterate (with multiplicity, infinity included) in ``B_P(v)^-``."""
    div = iterate_fixed_divisor(lift, n)
    if v.is_infinity:
        inside = count_roots_in_ball(div.poly, P.center, P.t, open_flag=False)
        return div.degree - inside
    return count_roots_in_ball(div.poly, v.center, P.t, open_flag=True)
