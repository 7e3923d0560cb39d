"""Type II points of the Berkovich line, finite skeleta, CPA functions and measures.

A type II point ``zeta_{a,t}`` is the sup-norm of the closed disc
``{x : ord(x - a) >= t}`` of radius ``p**-t``.  Centers lie in Q(pi); the
radius valuation ``t`` may be any rational number, although tangent
directions can only be labelled by residues when ``t`` lies in the value group
``(1/e) Z``.  Distances are in log_p units, so the path distance between
nested points is the difference of their radius valuations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import RamificationNeeded, SupportOffGraph
from .valfield import (
    INF,
    ValContext,
    ValElement,
    format_element,
    format_rational,
    lift_residue,
    parse_element,
    parse_rational,
    reduce_residue,
    truncate_below,
)


# -- points -------------------------------------------------------------------

@dataclass(frozen=True)
class TypeIIPoint:
    """The point ``zeta_{center, t}``; the stored center is canonical."""

    center: ValElement
    t: Fraction

    def __post_init__(self):
        t = Fraction(self.t)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "center", truncate_below(self.center, t))

    @property
    def ctx(self) -> ValContext:
        return self.center.ctx

    def __str__(self):
        return format_point(self)

    def __repr__(self):
        return f"TypeIIPoint({format_point(self)!r})"


def gauss_point(ctx: ValContext) -> TypeIIPoint:
    return TypeIIPoint(ctx.zero(), Fraction(0))


def make_point(ctx: ValContext, center, t) -> TypeIIPoint:
    if not isinstance(center, ValElement):
        center = parse_element(center, ctx)
    return TypeIIPoint(center, parse_rational(t))


def format_point(P: TypeIIPoint) -> str:
    return f"{format_element(P.center)}@{format_rational(P.t)}"


def parse_point(text: str, ctx: ValContext) -> TypeIIPoint:
    """Parse ``"center@t"``, e.g. ``"0@1"`` or ``"1 + pi@1/2"``."""
    if "@" not in text:
        raise ValueError(f"point literal {text!r} lacks '@'")
    center, t = text.rsplit("@", 1)
    return make_point(ctx, center.strip(), t.strip())


def point_sort_key(P: TypeIIPoint):
    return (P.t, tuple(P.center.coeffs))


def in_value_group(t: Fraction, e: int) -> bool:
    return (Fraction(t) * e).denominator == 1


def is_above(A: TypeIIPoint, B: TypeIIPoint) -> bool:
    """True when ``B`` lies in the closed disc of ``A`` (so ``A`` is on ``[B, oo]``)."""
    return B.t >= A.t and (B.center - A.center).ord() >= A.t


def join(P: TypeIIPoint, Q: TypeIIPoint) -> TypeIIPoint:
    """The point where the paths from ``P`` and ``Q`` to infinity meet."""
    t = min(P.t, Q.t, (P.center - Q.center).ord())
    return TypeIIPoint(P.center, t)


def rho(P: TypeIIPoint, Q: TypeIIPoint) -> Fraction:
    """Path distance in log_p units."""
    tj = min(P.t, Q.t, (P.center - Q.center).ord())
    return (P.t - tj) + (Q.t - tj)


def hsia_diag_logv(P: TypeIIPoint) -> Fraction:
    """``log_v`` of the diagonal Hsia kernel relative to infinity: ``-t``."""
    return -P.t


# -- tangent directions ---------------------------------------------------------

@dataclass(frozen=True)
class Direction:
    """A tangent direction: toward infinity, or down toward a center.

    A downward direction at ``P`` is represented by any element ``center``
    with ``ord(center - P.center) >= P.t``; two such centers give the same
    direction exactly when they differ by an element of valuation ``> P.t``.
    """

    center: ValElement | None = None

    @property
    def is_infinity(self) -> bool:
        return self.center is None

    @classmethod
    def infinity(cls) -> "Direction":
        return cls(None)

    @classmethod
    def toward(cls, center: ValElement) -> "Direction":
        return cls(center)

    def __str__(self):
        return "inf" if self.center is None else f"toward {format_element(self.center)}"


TOWARD_INFINITY = Direction.infinity()


def _next_value(t: Fraction, e: int) -> Fraction:
    """Smallest element of (1/e) Z strictly greater than ``t``."""
    return Fraction(math.floor(t * e) + 1, e)


def direction_key(P: TypeIIPoint, v: Direction):
    """Hashable canonical label of ``v`` as a tangent vector at ``P``."""
    if v.is_infinity:
        return ("inf",)
    if (v.center - P.center).ord() < P.t:
        raise ValueError(f"{v} is not a downward direction at {P}")
    canon = truncate_below(v.center, _next_value(P.t, P.ctx.e))
    return ("down", canon.coeffs)


def same_direction(P: TypeIIPoint, v: Direction, w: Direction) -> bool:
    return direction_key(P, v) == direction_key(P, w)


def residue_direction(P: TypeIIPoint, r) -> Direction:
    """Direction at ``P`` labelled by ``r`` in P^1(F_p) (``INF`` for infinity)."""
    if r == INF:
        return TOWARD_INFINITY
    ctx = P.ctx
    if not in_value_group(P.t, ctx.e):
        raise RamificationNeeded(f"radius valuation {P.t} is not in (1/{ctx.e})Z")
    scale = ctx.pi_power(int(P.t * ctx.e))
    return Direction.toward(P.center + lift_residue(r, ctx) * scale)


def direction_residue(P: TypeIIPoint, v: Direction):
    """Residue label of ``v`` at ``P``; ``None`` when ``t`` is outside the value group."""
    if v.is_infinity:
        return INF
    ctx = P.ctx
    if not in_value_group(P.t, ctx.e):
        return None
    scale = ctx.pi_power(int(P.t * ctx.e))
    return reduce_residue((v.center - P.center) / scale)


def residue_directions(P: TypeIIPoint) -> list:
    """All directions at ``P`` defined over F_p, infinity last."""
    return [residue_direction(P, r) for r in range(P.ctx.p)] + [TOWARD_INFINITY]


def direction_toward(P: TypeIIPoint, target: Union[TypeIIPoint, ValElement, float]) -> Direction:
    """Tangent direction at ``P`` containing ``target`` (``INF`` for infinity)."""
    if isinstance(target, TypeIIPoint):
        if target == P:
            raise ValueError("a point has no direction toward itself")
        if is_above(P, target):
            return Direction.toward(target.center)
        return TOWARD_INFINITY
    if isinstance(target, ValElement):
        if (target - P.center).ord() >= P.t:
            return Direction.toward(target)
        return TOWARD_INFINITY
    if target == INF:
        return TOWARD_INFINITY
    raise TypeError(f"unsupported target {target!r}")


def point_along(P: TypeIIPoint, v: Direction, s, strict: bool = False) -> TypeIIPoint:
    """The point at distance ``s`` from ``P`` in direction ``v``.

    With ``strict=True`` the result must keep its radius valuation in the
    value group of the context.
    """
    s = Fraction(s)
    if s <= 0:
        raise ValueError("step must be positive")
    if v.is_infinity:
        out = TypeIIPoint(P.center, P.t - s)
    else:
        out = TypeIIPoint(v.center, P.t + s)
    if strict and not in_value_group(out.t, P.ctx.e):
        raise RamificationNeeded(f"radius valuation {out.t} is not in (1/{P.ctx.e})Z")
    return out


def in_direction(P: TypeIIPoint, v: Direction, X: TypeIIPoint) -> bool:
    """Whether ``X`` lies in the open ball ``B_P(v)^-``."""
    if X == P:
        return False
    if v.is_infinity:
        return not is_above(P, X)
    return X.t > P.t and (X.center - v.center).ord() > P.t


# -- skeleta ------------------------------------------------------------------

class Skeleton:
    """A finite subtree spanned by type II points, closed under joins.

    Every edge joins a vertex to its nearest strict ancestor (toward
    infinity), so all edges are vertical and ``lengths[i]`` is
    ``t(vertex i) - t(parent i)``.
    """

    def __init__(self, points: Iterable[TypeIIPoint]):
        pts = sorted(set(points), key=point_sort_key)
        if not pts:
            raise ValueError("a skeleton needs at least one point")
        closed = set(pts)
        for i, a in enumerate(pts):
            for b in pts[i + 1:]:
                closed.add(join(a, b))
        self.vertices: list = sorted(closed, key=point_sort_key)
        self.index = {P: i for i, P in enumerate(self.vertices)}
        self.parent: list = []
        for P in self.vertices:
            best = None
            for j, Q in enumerate(self.vertices):
                if Q != P and is_above(Q, P) and (best is None or Q.t > self.vertices[best].t):
                    best = j
            self.parent.append(best)
        roots = [i for i, par in enumerate(self.parent) if par is None]
        assert len(roots) == 1, "join-closed point sets have a unique top vertex"
        self.root = roots[0]
        self.children: list = [[] for _ in self.vertices]
        for i, par in enumerate(self.parent):
            if par is not None:
                self.children[par].append(i)

    # structure
    @property
    def top(self) -> TypeIIPoint:
        """The retraction of infinity onto the skeleton."""
        return self.vertices[self.root]

    def edges(self) -> list:
        """``(parent, child, length)`` triples in vertex order."""
        return [
            (par, i, self.vertices[i].t - self.vertices[par].t)
            for i, par in enumerate(self.parent)
            if par is not None
        ]

    @property
    def edge_count(self) -> int:
        return len(self.vertices) - 1

    def neighbors(self, i: int) -> list:
        out = list(self.children[i])
        if self.parent[i] is not None:
            out.append(self.parent[i])
        return out

    def valence(self, i: int) -> int:
        return len(self.neighbors(i))

    def direction_to(self, i: int, j: int) -> Direction:
        """Tangent direction at vertex ``i`` along the edge to vertex ``j``."""
        if self.parent[i] == j:
            return TOWARD_INFINITY
        return Direction.toward(self.vertices[j].center)

    def edge_length(self, i: int, j: int) -> Fraction:
        a, b = self.vertices[i], self.vertices[j]
        return abs(a.t - b.t)

    # geometry
    def retract(self, X: TypeIIPoint) -> TypeIIPoint:
        """Nearest point of the skeleton to ``X``."""
        if len(self.vertices) == 1:
            return self.vertices[0]
        best, best_dist = None, None
        for par, child, _ in self.edges():
            top, bottom = self.vertices[par], self.vertices[child]
            meet = min(X.t, (X.center - bottom.center).ord())
            depth = min(max(meet, top.t), bottom.t)
            cand = TypeIIPoint(bottom.center, depth)
            dist = rho(X, cand)
            if best_dist is None or dist < best_dist:
                best, best_dist = cand, dist
        return best

    def contains(self, X: TypeIIPoint) -> bool:
        return self.retract(X) == X

    def locate(self, X: TypeIIPoint):
        """Return ``("vertex", i)`` or ``("edge", parent, child)`` for ``X`` on the skeleton."""
        if X in self.index:
            return ("vertex", self.index[X])
        for par, child, _ in self.edges():
            top, bottom = self.vertices[par], self.vertices[child]
            if top.t < X.t < bottom.t and is_above(X, bottom):
                return ("edge", par, child)
        raise SupportOffGraph(f"{X} is not on the skeleton")

    def with_points(self, extra: Iterable[TypeIIPoint]) -> "Skeleton":
        return Skeleton(list(self.vertices) + list(extra))

    def radius_from(self, P: TypeIIPoint) -> Fraction:
        return max(rho(P, V) for V in self.vertices)

    def to_json(self) -> dict:
        return {
            "vertices": [format_point(P) for P in self.vertices],
            "edges": [
                [format_point(self.vertices[a]), format_point(self.vertices[b]), format_rational(length)]
                for a, b, length in self.edges()
            ],
        }


def span_skeleton(points: Sequence[TypeIIPoint]) -> Skeleton:
    """Convex hull tree of the given points, with all pairwise joins as vertices."""
    return Skeleton(points)


def skeleton_from_json(data: dict, ctx: ValContext) -> Skeleton:
    return Skeleton(parse_point(s, ctx) for s in data["vertices"])


# -- measures -------------------------------------------------------------------

class DiscreteMeasure:
    """A finitely supported signed measure with exact rational weights."""

    def __init__(self, atoms: Iterable = ()):
        merged: dict = {}
        for P, w in atoms:
            merged[P] = merged.get(P, Fraction(0)) + Fraction(w)
        self.atoms = {P: w for P, w in merged.items() if w != 0}

    def items(self) -> list:
        return sorted(self.atoms.items(), key=lambda kv: point_sort_key(kv[0]))

    @property
    def support(self) -> list:
        return [P for P, _ in self.items()]

    def total_mass(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))

    def total_variation(self) -> Fraction:
        return sum((abs(w) for w in self.atoms.values()), Fraction(0))

    def weight(self, P: TypeIIPoint) -> Fraction:
        return self.atoms.get(P, Fraction(0))

    def mass_in_direction(self, P: TypeIIPoint, v: Direction) -> Fraction:
        return sum((w for X, w in self.atoms.items() if in_direction(P, v, X)), Fraction(0))

    def is_nonnegative(self) -> bool:
        return all(w > 0 for w in self.atoms.values())

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(list(self.atoms.items()) + list(other.atoms.items()))

    def scaled(self, c) -> "DiscreteMeasure":
        return DiscreteMeasure((P, w * c) for P, w in self.atoms.items())

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self.atoms == other.atoms

    def __repr__(self):
        body = ", ".join(f"{format_point(P)}: {format_rational(w)}" for P, w in self.items())
        return f"DiscreteMeasure({{{body}}})"

    def to_json(self) -> dict:
        return {"atoms": [[format_point(P), format_rational(w)] for P, w in self.items()]}


def measure_from_json(data: dict, ctx: ValContext) -> DiscreteMeasure:
    return DiscreteMeasure((parse_point(p, ctx), parse_rational(w)) for p, w in data["atoms"])


def dirac(P: TypeIIPoint, weight=1) -> DiscreteMeasure:
    return DiscreteMeasure([(P, weight)])


def branching_measure(skel: Skeleton) -> DiscreteMeasure:
    """``(1/2) sum (2 - valence(P)) delta_P`` over the vertices."""
    return DiscreteMeasure(
        (P, Fraction(2 - skel.valence(i), 2)) for i, P in enumerate(skel.vertices)
    )


def pushforward_measure(nu: DiscreteMeasure, skel: Skeleton) -> DiscreteMeasure:
    """Retract every atom onto the skeleton and merge weights."""
    return DiscreteMeasure((skel.retract(P), w) for P, w in nu.atoms.items())


# -- CPA functions --------------------------------------------------------------

class CPAFn:
    """Continuous function on a skeleton, affine along every edge."""

    def __init__(self, skel: Skeleton, values: Sequence):
        if len(values) != len(skel.vertices):
            raise ValueError("one value per vertex is required")
        self.skeleton = skel
        self.values = [Fraction(v) for v in values]

    @classmethod
    def from_function(cls, skel: Skeleton, fn) -> "CPAFn":
        return cls(skel, [fn(P) for P in skel.vertices])

    def slope(self, i: int, j: int) -> Fraction:
        """Slope at vertex ``i`` along the edge toward vertex ``j``."""
        return (self.values[j] - self.values[i]) / self.skeleton.edge_length(i, j)

    def __call__(self, X: TypeIIPoint) -> Fraction:
        where = self.skeleton.locate(X)
        if where[0] == "vertex":
            return self.values[where[1]]
        _, par, child = where
        top = self.skeleton.vertices[par]
        return self.values[par] + self.slope(par, child) * (X.t - top.t)

    def restrict(self, sub: Skeleton) -> "CPAFn":
        return CPAFn(sub, [self(P) for P in sub.vertices])

    def max_abs(self) -> Fraction:
        return max(abs(v) for v in self.values)


def tree_laplacian(f: CPAFn) -> DiscreteMeasure:
    """Minus the sum of outgoing slopes at each vertex."""
    skel = f.skeleton
    return DiscreteMeasure(
        (P, -sum((f.slope(i, j) for j in skel.neighbors(i)), Fraction(0)))
        for i, P in enumerate(skel.vertices)
    )


def integrate_cpa(f: CPAFn, nu: DiscreteMeasure) -> Fraction:
    """Exact ``sum f(P_i) w_i``; every atom must lie on the skeleton."""
    total = Fraction(0)
    for P, w in nu.atoms.items():
        if not f.skeleton.contains(P):
            raise SupportOffGraph(f"atom {P} is off the skeleton; retract first")
        total += f(P) * w
    return total
