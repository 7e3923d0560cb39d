"""Barycenters of discrete measures, discrete Arakelov-Green functions and the
minimal resultant locus of iterates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .berktree import (
    DiscreteMeasure,
    Direction,
    Skeleton,
    TypeIIPoint,
    format_point,
    gauss_point,
    point_sort_key,
    residue_directions,
    rho,
    in_value_group,
)
from .crucial import crucial_laplacian_details
from .errors import NotProbability, RouteMismatch, TypeISupport
from .projmap import Lift
from .resfunc import empirical_slope, normalized_ord_res

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class SegmentLocus:
    """A single point or the path between two distinct points."""

    endpoints: tuple

    def __post_init__(self):
        ends = tuple(sorted(set(self.endpoints), key=point_sort_key))
        if len(ends) not in (1, 2):
            raise ValueError("a locus has one or two endpoints")
        object.__setattr__(self, "endpoints", ends)

    @property
    def kind(self) -> str:
        return "point" if len(self.endpoints) == 1 else "segment"

    @classmethod
    def point(cls, P: TypeIIPoint) -> "SegmentLocus":
        return cls((P,))

    @classmethod
    def segment(cls, A: TypeIIPoint, B: TypeIIPoint) -> "SegmentLocus":
        return cls((A, B))

    def distance(self, X: TypeIIPoint) -> Fraction:
        """Tree distance from ``X`` to the locus (Gromov product for segments)."""
        if self.kind == "point":
            return rho(X, self.endpoints[0])
        A, B = self.endpoints
        return (rho(X, A) + rho(X, B) - rho(A, B)) / 2

    def contains(self, X: TypeIIPoint) -> bool:
        return self.distance(X) == 0

    def hausdorff_to(self, other: "SegmentLocus") -> Fraction:
        """``sup`` over this locus of the distance to ``other`` (attained at endpoints)."""
        return max(other.distance(P) for P in self.endpoints)

    def to_json(self) -> dict:
        return {"kind": self.kind, "endpoints": [format_point(P) for P in self.endpoints]}


def _check_probability(nu: DiscreteMeasure) -> None:
    for P in nu.atoms:
        if not isinstance(P, TypeIIPoint):
            raise TypeISupport(f"atom {P!r} is not a type II point")
    if not nu.atoms or nu.total_mass() != 1 or not nu.is_nonnegative():
        raise NotProbability("barycenters need a probability measure")


def _locus_from_path(skel: Skeleton, vertices: set, edges: set) -> SegmentLocus:
    """Endpoints of a path given by its vertex and edge sets."""
    if len(vertices) == 1:
        return SegmentLocus.point(skel.vertices[next(iter(vertices))])
    degree = {i: 0 for i in vertices}
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    ends = [skel.vertices[i] for i, k in degree.items() if k <= 1]
    if len(ends) != 2 or any(k > 2 for k in degree.values()):
        raise ValueError("locus is not a point or a segment")
    return SegmentLocus.segment(*ends)


def barycenter(nu: DiscreteMeasure) -> SegmentLocus:
    """Points where every tangent direction carries mass at most one half."""
    _check_probability(nu)
    skel = Skeleton(nu.support)
    good = set()
    for i, V in enumerate(skel.vertices):
        masses = [nu.mass_in_direction(V, skel.direction_to(i, j)) for j in skel.neighbors(i)]
        if all(m <= HALF for m in masses):
            good.add(i)
    # an edge interior belongs to the barycenter exactly when it splits the mass in half
    split_edges = set()
    for par, child, _ in skel.edges():
        if nu.mass_in_direction(skel.vertices[par], skel.direction_to(par, child)) == HALF:
            split_edges.add((par, child))
            good.update((par, child))
    return _locus_from_path(skel, good, split_edges)


@dataclass(frozen=True)
class DiscreteGreen:
    """Arakelov-Green function of a discrete probability measure on H^1."""

    nu: DiscreteMeasure
    constant: Fraction

    @classmethod
    def of(cls, nu: DiscreteMeasure) -> "DiscreteGreen":
        _check_probability(nu)
        atoms = nu.items()
        total = Fraction(0)
        for Pi, wi in atoms:
            for Pj, wj in atoms:
                total += wi * wj * _potential(nu, Pi, Pj)
        return cls(nu, -total)

    def __call__(self, x: TypeIIPoint, y: TypeIIPoint) -> Fraction:
        return _potential(self.nu, x, y) + self.constant

    def double_integral(self) -> Fraction:
        atoms = self.nu.items()
        return sum((wi * wj * self(Pi, Pj) for Pi, wi in atoms for Pj, wj in atoms), Fraction(0))


def gromov_depth(base: TypeIIPoint, x: TypeIIPoint, y: TypeIIPoint) -> Fraction:
    """``rho(base, x ^_base y)``: distance from ``base`` to where the paths to ``x`` and ``y`` split."""
    return (rho(base, x) + rho(base, y) - rho(x, y)) / 2


def _potential(nu: DiscreteMeasure, x: TypeIIPoint, y: TypeIIPoint) -> Fraction:
    return sum((w * gromov_depth(Z, x, y) for Z, w in nu.atoms.items()), Fraction(0))


def green_discrete(G: DiscreteGreen, x: TypeIIPoint) -> Fraction:
    """``g_nu(x, x)``."""
    return G(x, x)


def green_slope(G: DiscreteGreen, Q: TypeIIPoint, v: Direction) -> Fraction:
    """Outgoing slope of ``x -> g_nu(x, x)`` at ``Q`` in direction ``v``."""
    return 1 - 2 * G.nu.mass_in_direction(Q, v)


# -- minimal resultant locus ---------------------------------------------------------

@dataclass(frozen=True)
class MinResult:
    locus: SegmentLocus
    value: Fraction
    n: int

    def to_json(self) -> dict:
        from .valfield import format_rational

        return {"n": self.n, "locus": self.locus.to_json(), "value": format_rational(self.value)}


def descent_minimum(lift: Lift, n: int, skel: Skeleton, start: TypeIIPoint):
    """Walk downhill along the skeleton; return ``(locus, value)``.

    Normalised ordRes is affine on every edge of a refined skeleton, so vertex
    values determine all edge slopes.
    """
    values = [normalized_ord_res(lift, P, n) for P in skel.vertices]
    current = skel.index[start]
    while True:
        moves = []
        for j in skel.neighbors(current):
            slope = (values[j] - values[current]) / skel.edge_length(current, j)
            if slope < 0:
                moves.append((slope, point_sort_key(skel.vertices[j]), j))
        if not moves:
            break
        current = min(moves)[2]
    best = values[current]
    _certify_local_minimum(lift, n, skel, current)
    locus_vertices = {current}
    locus_edges = set()
    frontier = [current]
    while frontier:
        i = frontier.pop()
        for j in skel.neighbors(i):
            if values[j] == best and j not in locus_vertices:
                locus_vertices.add(j)
                locus_edges.add((min(i, j), max(i, j)))
                frontier.append(j)
            elif values[j] == best:
                locus_edges.add((min(i, j), max(i, j)))
    return _locus_from_path(skel, locus_vertices, locus_edges), best


def _certify_local_minimum(lift: Lift, n: int, skel: Skeleton, i: int) -> None:
    """Off-skeleton F_p-rational directions must not descend either."""
    P = skel.vertices[i]
    if not in_value_group(P.t, P.ctx.e):
        return
    for v in residue_directions(P):
        if empirical_slope(lift, n, P, v) < 0:
            raise RouteMismatch(f"descent stopped at {format_point(P)} but direction {v} descends")


def minresloc(lift: Lift, n: int) -> MinResult:
    """Minimal resultant locus of the n-th iterate, checked by two routes."""
    details = crucial_laplacian_details(lift, n)
    bary = barycenter(details.measure)
    value = normalized_ord_res(lift, bary.endpoints[0], n)
    skel = details.skeleton.with_points(bary.endpoints)
    start = skel.retract(gauss_point(lift.ctx))
    skel = skel.with_points([start])
    locus, best = descent_minimum(lift, n, skel, start)
    if locus != bary or best != value:
        raise RouteMismatch(
            f"barycenter route {bary.to_json()} (value {value}) vs descent {locus.to_json()} (value {best})"
        )
    return MinResult(bary, value, n)


@dataclass(frozen=True)
class ContainmentRow:
    n: int
    distance: Fraction
    contained: bool
    locus: SegmentLocus

    def to_row(self) -> dict:
        return {"n": self.n, "distance": self.distance, "contained": self.contained,
                "locus_kind": self.locus.kind}


def epsilon_containment(lift: Lift, n_values: Iterable[int], bary_ref: SegmentLocus, eps) -> list:
    eps = Fraction(eps)
    rows = []
    for n in n_values:
        locus = minresloc(lift, n).locus
        dist = locus.hausdorff_to(bary_ref)
        rows.append(ContainmentRow(n, dist, dist <= eps, locus))
    return rows


def min_value_sequence(lift: Lift, n_values: Iterable[int]) -> list:
    """Normalised minima ``m_n`` of the resultant functions of iterates."""
    return [minresloc(lift, n).value for n in n_values]


def successive_gaps(values: list) -> list:
    return [abs(b - a) for a, b in zip(values, values[1:])]
