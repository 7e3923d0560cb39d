"""Resultant functions ``ordRes`` of iterates, the modified function ``f_n``,
height convergents and certified Green's-function estimates.

For ``P = zeta_{c,t}`` and ``gamma(z) = b z + c`` with ``ord(b) = t``::

    ordRes_{phi^n}(P) = ordRes(F_n, G_n) + (D^2 + D) t - 2 D min(ord F_n^gamma, ord G_n^gamma)

where ``D = d**n`` and ``[F_n, G_n]`` is the normalised iterate.  With
``A_k, B_k`` the Taylor coefficients of ``F_n(z + c, 1)`` and
``G_n(z + c, 1)``, the coefficient valuations of the conjugate are
``k t + ord(A_k - c B_k)`` and ``(k + 1) t + ord(B_k)``.  For a fixed center
the minimum is therefore a concave piecewise-affine function of ``t``, which
is evaluated exactly for every rational ``t`` (see :func:`min_ord_pieces`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .berktree import (
    Direction,
    TypeIIPoint,
    gauss_point,
    in_value_group,
    point_along,
    rho,
)
from .errors import NoStabilization, RamificationNeeded
from .newton import taylor_shift
from .projmap import (
    Lift,
    MobiusMap,
    conjugate_lift,
    iterate_lift,
    normalize_lift,
    ord_resultant,
    ord_resultant_iterate,
)
from .valfield import ValElement

MIN_STEP = Fraction(1, 2 ** 20)


def _bare(lift: Lift) -> Lift:
    return Lift(lift.ctx, lift.F, lift.G)


def _dehomogenise(form: tuple) -> tuple:
    D = len(form) - 1
    return tuple(form[D - k] for k in range(D + 1))


@lru_cache(maxsize=8192)
def _pieces_cached(lift: Lift, n: int, center: ValElement) -> tuple:
    it = iterate_lift(lift, n)
    A = taylor_shift(_dehomogenise(it.F), center)
    B = taylor_shift(_dehomogenise(it.G), center)
    pieces = set()
    for k, (a, b) in enumerate(zip(A, B)):
        diff = a - center * b
        if not diff.is_zero():
            pieces.add((k, diff.ord()))
        if not b.is_zero():
            pieces.add((k + 1, b.ord()))
    return tuple(sorted(pieces))


def min_ord_pieces(lift: Lift, n: int, center: ValElement) -> tuple:
    """Affine pieces ``(slope, intercept)`` whose minimum over ``t`` is
    ``min(ord F_n^gamma, ord G_n^gamma)`` along the ray toward ``center``."""
    iterate_lift(lift, n)  # budget check before caching
    return _pieces_cached(_bare(lift), n, center)


def conjugate_min_ord(lift: Lift, P: TypeIIPoint, n: int = 1) -> Fraction:
    """``min(ord (F_n)^gamma, ord (G_n)^gamma)`` for ``gamma(zeta_Gauss) = P``."""
    return min(slope * P.t + icpt for slope, icpt in min_ord_pieces(lift, n, P.center))


def iterate_degree(lift: Lift, n: int) -> int:
    return lift.degree ** n


def ord_res_at(lift: Lift, P: TypeIIPoint, n: int = 1) -> Fraction:
    """``ordRes_{phi^n}(P)`` from the closed-form decomposition (route A)."""
    D = iterate_degree(lift, n)
    base = ord_resultant_iterate(lift, n)
    return base + (D * D + D) * P.t - 2 * D * conjugate_min_ord(lift, P, n)


def affine_conjugator(P: TypeIIPoint) -> MobiusMap:
    """``gamma(z) = pi^(e t) z + center``, sending the Gauss point to ``P``."""
    ctx = P.ctx
    if not in_value_group(P.t, ctx.e):
        raise RamificationNeeded(f"radius valuation {P.t} is not in (1/{ctx.e})Z")
    return MobiusMap.affine(ctx.pi_power(int(P.t * ctx.e)), P.center)


def conjugate_at(lift: Lift, P: TypeIIPoint) -> Lift:
    """Normalised lift of the conjugate of ``lift`` moving the Gauss point to ``P``."""
    raw, _ = conjugate_lift(lift, affine_conjugator(P))
    return normalize_lift(raw, check=False)


def ord_res_at_conjugate(lift: Lift, P: TypeIIPoint, n: int = 1) -> Fraction:
    """Route B: conjugate, normalise, iterate and take the Sylvester determinant."""
    conj = conjugate_at(lift, P)
    return ord_resultant(iterate_lift(conj, n))


def normalized_ord_res(lift: Lift, P: TypeIIPoint, n: int = 1) -> Fraction:
    D = iterate_degree(lift, n)
    return ord_res_at(lift, P, n) / (D * D - D)


def eval_fn(lift: Lift, P: TypeIIPoint, n: int = 1) -> Fraction:
    """``f_n(P)``: normalised ordRes plus ``log_v delta(P,P)_oo = -t``."""
    return normalized_ord_res(lift, P, n) - P.t


def lipschitz_constant(lift: Lift, n: int) -> Fraction:
    """Sharp slope bound ``(D + 1)/(D - 1)`` for the normalised resultant function.

    Along any segment the conjugate min-ord has slopes in ``[0, D + 1]``, so
    ``ordRes`` has slopes in ``[-(D^2 + D), D^2 + D]``.
    """
    D = iterate_degree(lift, n)
    return Fraction(D + 1, D - 1)


def default_constant(lift: Lift) -> Fraction:
    """``max(1, 2/(d-1) * spread)`` with ``spread`` the coefficient valuation range."""
    ords = [c.ord() for c in lift.F + lift.G if not c.is_zero()]
    spread = max(ords) - min(ords)
    return max(Fraction(1), Fraction(2, lift.degree - 1) * spread)


@dataclass(frozen=True)
class GreenEstimate:
    n: int
    value: Fraction
    error_bound: Fraction
    empirical_gap: Optional[Fraction]
    C_used: Fraction

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "value": self.value,
            "error_bound": self.error_bound,
            "empirical_gap": self.empirical_gap,
            "C_used": self.C_used,
        }


@dataclass(frozen=True)
class HeightEstimate:
    n: int
    value: Fraction
    error_bound: Fraction


def green_estimate(lift: Lift, P: TypeIIPoint, n: int, C=None) -> GreenEstimate:
    """Normalised ordRes with the error bound ``2/(D-1) * max(C, rho(P, Gauss))``."""
    C = default_constant(lift) if C is None else Fraction(C)
    if C <= 0:
        raise ValueError("C must be positive")
    D = iterate_degree(lift, n)
    value = normalized_ord_res(lift, P, n)
    gap = abs(value - normalized_ord_res(lift, P, n - 1)) if n >= 2 else None
    bound = Fraction(2, D - 1) * max(C, rho(P, gauss_point(P.ctx)))
    return GreenEstimate(n, value, bound, gap, C)


def green_ladder(lift: Lift, P: TypeIIPoint, n_max: int, C=None) -> list:
    return [green_estimate(lift, P, n, C) for n in range(1, n_max + 1)]


def height_convergent(lift: Lift, P: TypeIIPoint, n: int, C=None) -> HeightEstimate:
    """Approximant of the canonical height from the conjugated iterate's coefficients.

    The min-ord term refers to the plain n-fold composition of ``lift``, which
    differs from the normalised iterate by the recorded normalisation shift.
    """
    C = default_constant(lift) if C is None else Fraction(C)
    D = iterate_degree(lift, n)
    shift = iterate_lift(lift, n).normalization_shift
    m = conjugate_min_ord(lift, P, n) + shift
    value = (-m + P.t) / (D - 1)
    bound = max(C, rho(P, gauss_point(P.ctx))) / (D - 1)
    return HeightEstimate(n, value, bound)


def empirical_slope(
    lift: Lift,
    n: int,
    P: TypeIIPoint,
    v: Direction,
    modified: bool = False,
    step=None,
    min_step: Fraction = MIN_STEP,
) -> Fraction:
    """One-sided slope at ``P`` in direction ``v`` by halving difference quotients.

    The target (normalised ordRes, or ``f_n`` when ``modified``) is convex and
    piecewise affine along the vertical ray in direction ``v``, so two equal
    consecutive quotients certify affinity on the first step.
    """
    fn = eval_fn if modified else normalized_ord_res
    base = fn(lift, P, n)
    s = Fraction(1) if step is None else Fraction(step)

    def quotient(size):
        return (fn(lift, point_along(P, v, size), n) - base) / size

    prev = quotient(s)
    while True:
        s /= 2
        if s < min_step:
            raise NoStabilization(f"slope at {P} toward {v} did not stabilise")
        cur = quotient(s)
        if cur == prev:
            return cur
        prev = cur


def ray_breakpoints(lift: Lift, n: int, center: ValElement, t_low, t_high) -> list:
    """Exact breakpoints of ``t -> ordRes_{phi^n}(zeta_{center,t})`` in ``(t_low, t_high)``."""
    pieces = min_ord_pieces(lift, n, center)
    out = set()
    for i, (s1, c1) in enumerate(pieces):
        for s2, c2 in pieces[i + 1:]:
            if s1 == s2:
                continue
            t = Fraction(c2 - c1) / (s1 - s2)
            if not t_low < t < t_high:
                continue
            value = s1 * t + c1
            active = [s for s, c in pieces if s * t + c == value]
            if value == min(s * t + c for s, c in pieces) and min(active) != max(active):
                out.add(t)
    return sorted(out)


def fn_slope_on_ray(lift: Lift, n: int, center: ValElement, t) -> Fraction:
    """Slope of ``f_n`` along the ray toward ``center`` just beyond depth ``t``."""
    pieces = min_ord_pieces(lift, n, center)
    value = min(s * t + c for s, c in pieces)
    active_slope = min(s for s, c in pieces if s * t + c == value)
    D = iterate_degree(lift, n)
    return Fraction(D * D + D - 2 * D * active_slope, D * D - D) - 1
