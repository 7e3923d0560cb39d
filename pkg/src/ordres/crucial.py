"""Crucial measures of iterates, by the Laplacian of ``f_n`` and by weights.

Laplacian route: locate the classical fixed points of the iterate by
Newton-polygon descent, span the tree they define (truncated near each
fixed point and near infinity), insert every breakpoint of ``f_n`` along its
edges, and solve ``Delta(f_n) = -2 nu + 2 delta_{r(oo)}`` for ``nu``.  On a
subtree of the fixed/repelling tree the identity yields the exact retraction
of ``nu``, so a zero weight at a truncation vertex certifies that no mass lies
beyond it.

Weight route: classify candidate points through the reduction of the
conjugated iterate and count fixed points in each tangent direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .berktree import (
    CPAFn,
    DiscreteMeasure,
    Direction,
    Skeleton,
    TOWARD_INFINITY,
    TypeIIPoint,
    format_point,
    gauss_point,
    in_value_group,
    make_point,
    point_along,
    pushforward_measure,
    residue_direction,
    tree_laplacian,
    integrate_cpa,
)
from .errors import (
    NoStabilization,
    NotProbability,
    PartialCoverage,
    RamificationNeeded,
    UnlocatableFixedPoints,
)
from .newton import count_fixed_in_direction, count_roots_in_ball, iterate_fixed_divisor, newton_polygon, taylor_shift
from .projmap import Lift, iterate_lift, reduce_map
from .resfunc import (
    conjugate_at,
    default_constant,
    eval_fn,
    fn_slope_on_ray,
    empirical_slope,
    iterate_degree,
    ray_breakpoints,
)
from .valfield import INF, ValContext, ValElement, format_rational, lift_residue

MAX_TREE_DEPTH = 64


# -- polynomial helpers over Q(pi) ---------------------------------------------

def _trim(poly: Sequence[ValElement]) -> tuple:
    out = list(poly)
    while out and out[-1].is_zero():
        out.pop()
    return tuple(out)


def _poly_divmod(num: Sequence[ValElement], den: Sequence[ValElement]):
    num = list(_trim(num))
    den = _trim(den)
    zero = den[0] * 0
    quot = [zero] * max(len(num) - len(den) + 1, 1)
    lead_inv = 1 / den[-1]
    while len(num) >= len(den) and num:
        shift = len(num) - len(den)
        coef = num[-1] * lead_inv
        quot[shift] = coef
        for i, c in enumerate(den):
            num[shift + i] = num[shift + i] - coef * c
        num = list(_trim(num))
    return _trim(quot), tuple(num)


def _poly_gcd(a: Sequence[ValElement], b: Sequence[ValElement]) -> tuple:
    a, b = _trim(a), _trim(b)
    while b:
        _, rem = _poly_divmod(a, b)
        a, b = b, rem
    lead_inv = 1 / a[-1]
    return tuple(c * lead_inv for c in a)


def _derivative(poly: Sequence[ValElement]) -> tuple:
    return tuple(c * k for k, c in enumerate(poly) if k > 0)


def squarefree_part(poly: Sequence[ValElement]) -> tuple:
    """``poly / gcd(poly, poly')``: same roots, each with multiplicity one."""
    poly = _trim(poly)
    if len(poly) <= 2:
        return poly
    g = _poly_gcd(poly, _derivative(poly))
    if len(g) == 1:
        return poly
    quot, _ = _poly_divmod(poly, g)
    return quot


def _eval_poly(poly: Sequence[ValElement], x: ValElement) -> ValElement:
    acc = x * 0
    for c in reversed(poly):
        acc = acc * x + c
    return acc


# -- fixed-point tree ------------------------------------------------------------

def _vg_floor(t: Fraction, e: int) -> Fraction:
    return Fraction(math.floor(t * e), e)


def _vg_ceil(t: Fraction, e: int) -> Fraction:
    return Fraction(math.ceil(t * e), e)


@dataclass
class FixedPointTree:
    """Truncated tree spanned by the classical fixed points of an iterate."""

    skeleton: Skeleton
    top: TypeIIPoint
    leaves: list
    branch_points: list
    infinity_fixed: bool
    distinct_finite: int
    blocked: list = field(default_factory=list)
    """Vertices below which fixed points leave the F_p-rational directions or
    separate outside the value group; the tree is not followed past them."""

    @property
    def complete(self) -> bool:
        return not self.blocked


def _open_ball_children(poly: tuple, center: ValElement, t: Fraction, ctx: ValContext) -> list:
    scale = ctx.pi_power(int(t * ctx.e))
    out = []
    for r in range(ctx.p):
        c_r = center + lift_residue(r, ctx) * scale
        k_r = count_roots_in_ball(poly, c_r, t, open_flag=True)
        if k_r:
            out.append((c_r, k_r))
    return out


def _refine_center(poly: tuple, center: ValElement, t: Fraction, K: Fraction, ctx: ValContext):
    """Sharpen ``center`` of the open ball ``ord(x - center) > t`` holding one root.

    Returns ``(center, exact)`` with ``ord(root - center) >= K`` or ``center``
    equal to the root.
    """
    step = Fraction(1, ctx.e)
    s = _vg_floor(t, ctx.e) + step
    while s < K:
        if _eval_poly(poly, center).is_zero():
            return center, True
        scale = ctx.pi_power(int(s * ctx.e))
        for r in range(ctx.p):
            cand = center + lift_residue(r, ctx) * scale
            if count_roots_in_ball(poly, cand, s, open_flag=True) == 1:
                center = cand
                break
        else:
            raise UnlocatableFixedPoints("isolated fixed point escaped residue refinement")
        s += step
    return center, _eval_poly(poly, center).is_zero()


def _leaf_point(lift: Lift, n: int, poly: tuple, center: ValElement, t: Fraction, ctx: ValContext) -> TypeIIPoint:
    """Truncation point toward the single root in ``ord(x - center) > t``.

    The point sits one unit past the last breakpoint of ``f_n`` along the
    ray, where ``f_n`` has slope zero toward the root.
    """
    horizon = _vg_floor(t, ctx.e) + 2
    while horizon <= t + MAX_TREE_DEPTH:
        center, exact = _refine_center(poly, center, t, horizon, ctx)
        limit = Fraction(10 ** 9) if exact else horizon
        bps = ray_breakpoints(lift, n, center, t, limit)
        last = max([t] + bps)
        depth = _vg_floor(last, ctx.e) + 1
        if exact or depth < horizon:
            if fn_slope_on_ray(lift, n, center, depth) == 0:
                return TypeIIPoint(center, depth)
            if exact:
                raise NoStabilization("f_n keeps a nonzero slope toward an exact fixed point")
        horizon += 2
    raise NoStabilization("fixed-point truncation exceeded the depth guard")


def fixed_point_tree(lift: Lift, n: int) -> FixedPointTree:
    """Locate the classical fixed points of the n-th iterate and span their tree."""
    ctx = lift.ctx
    div = iterate_fixed_divisor(lift, n)
    poly = squarefree_part(_trim(div.poly))
    finite = len(poly) - 1
    infinity_fixed = div.infinity_fixed
    if finite + (1 if infinity_fixed else 0) < 2:
        raise UnlocatableFixedPoints("fewer than two distinct fixed points; supply seed points")

    leaves: list = []
    branch_points: list = []
    blocked: list = []
    if finite == 1:
        root = -poly[0] / poly[1]
        leaves.append(_leaf_point(lift, n, poly, root, _vg_floor(root.ord(), ctx.e) - 1
                                  if root.ord() != INF else Fraction(-1), ctx))
    elif finite >= 2:
        vals = [v for v, _ in newton_polygon(poly).segments]
        stack = [(ctx.zero(), min(vals), finite)]
        while stack:
            center, t, k = stack.pop()
            if t > MAX_TREE_DEPTH:
                raise UnlocatableFixedPoints("fixed-point descent exceeded the depth guard")
            node = TypeIIPoint(center, t)
            branch_points.append(node)
            if not in_value_group(t, ctx.e):
                blocked.append(node)
                continue
            children = _open_ball_children(poly, center, t, ctx)
            if sum(k_r for _, k_r in children) != k:
                # some fixed points lie in directions not defined over F_p
                blocked.append(node)
            for c_r, k_r in children:
                if k_r == 1:
                    leaves.append(_leaf_point(lift, n, poly, c_r, t, ctx))
                    continue
                shifted = newton_polygon(taylor_shift(poly, c_r))
                t_next = min(v for v, _ in shifted.segments if v > t)
                stack.append((c_r, t_next, k_r))

    points = leaves + branch_points
    skel = Skeleton(points)
    top = skel.top
    if infinity_fixed:
        top = _top_point(lift, n, skel)
        skel = skel.with_points([top])
    return FixedPointTree(skel, top, leaves, branch_points, infinity_fixed, finite, blocked)


def _top_point(lift: Lift, n: int, skel: Skeleton) -> TypeIIPoint:
    """Truncation toward infinity: the first point above the tree carrying no mass."""
    ctx = lift.ctx
    root = skel.top
    t = _vg_floor(root.t, ctx.e) - 1
    while t >= root.t - MAX_TREE_DEPTH:
        top = TypeIIPoint(root.center, t)
        bps = ray_breakpoints(lift, n, root.center, t, root.t)
        if not bps and fn_slope_on_ray(lift, n, root.center, t) == -2:
            return top
        t -= 1
    raise NoStabilization("truncation toward infinity exceeded the depth guard")


def refine_skeleton(lift: Lift, n: int, skel: Skeleton) -> Skeleton:
    """Insert every breakpoint of ``f_n`` lying inside an edge."""
    extra = []
    for par, child, _ in skel.edges():
        top, bottom = skel.vertices[par], skel.vertices[child]
        for b in ray_breakpoints(lift, n, bottom.center, top.t, bottom.t):
            extra.append(TypeIIPoint(bottom.center, b))
    return skel.with_points(extra) if extra else skel


# -- Laplacian route ---------------------------------------------------------------

@dataclass
class CrucialResult:
    measure: DiscreteMeasure
    skeleton: Skeleton
    fn: CPAFn
    tree: Optional[FixedPointTree]

    @property
    def certified(self) -> bool:
        """True when the measure is ``nu`` itself rather than only its retraction.

        Blocked vertices carry the retracted mass of everything below them, so
        zero weight there rules out hidden atoms.
        """
        if self.tree is None:
            return False
        return all(self.measure.weight(P) == 0 for P in self.tree.blocked)

    def to_json(self) -> dict:
        return {
            "measure": self.measure.to_json(),
            "certified": self.certified,
            "skeleton": self.skeleton.to_json(),
            "f_n": [format_rational(v) for v in self.fn.values],
        }


def measure_from_fn(fn: CPAFn) -> DiscreteMeasure:
    """``nu = delta_top - (1/2) Delta(f_n)`` on the skeleton of ``fn``."""
    skel = fn.skeleton
    lap = tree_laplacian(fn)
    return DiscreteMeasure([(skel.top, 1)] + [(P, -w / 2) for P, w in lap.atoms.items()])


def crucial_laplacian_details(lift: Lift, n: int, seed_points: Iterable[TypeIIPoint] = ()) -> CrucialResult:
    seeds = list(seed_points)
    tree = None
    try:
        tree = fixed_point_tree(lift, n)
        base = tree.skeleton.with_points(seeds) if seeds else tree.skeleton
    except UnlocatableFixedPoints:
        if len(seeds) < 1:
            raise
        base = Skeleton(seeds)
    skel = refine_skeleton(lift, n, base)
    fn = CPAFn.from_function(skel, lambda P: eval_fn(lift, P, n))
    nu = measure_from_fn(fn)
    if nu.total_mass() != 1 or not nu.is_nonnegative():
        raise NotProbability(f"Laplacian route produced a non-probability measure: {nu!r}")
    return CrucialResult(nu, skel, fn, tree)


def crucial_measure_laplacian(lift: Lift, n: int, seed_points: Iterable[TypeIIPoint] = ()) -> DiscreteMeasure:
    return crucial_laplacian_details(lift, n, seed_points).measure


# -- weight route ------------------------------------------------------------------

@dataclass(frozen=True)
class WeightReport:
    point: TypeIIPoint
    weight: int
    fixed: bool
    degree: int
    shearing: int
    valence: int
    counts: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        out = {"point": format_point(self.point), "weight": self.weight, "fixed": self.fixed}
        if self.fixed:
            out.update(degree=self.degree, shearing=self.shearing)
        else:
            out["valence"] = self.valence
        return out


def direction_fixed_counts(lift: Lift, n: int, P: TypeIIPoint) -> dict:
    """Fixed points (with multiplicity) in each F_p-rational direction at ``P``."""
    if not in_value_group(P.t, P.ctx.e):
        raise RamificationNeeded(f"{format_point(P)} is not a type II point of this field")
    labels = list(range(P.ctx.p)) + [INF]
    return {r: count_fixed_in_direction(lift, n, P, residue_direction(P, r)) for r in labels}


def point_weight(lift: Lift, n: int, P: TypeIIPoint) -> WeightReport:
    D = iterate_degree(lift, n)
    counts = direction_fixed_counts(lift, n, P)
    if sum(counts.values()) != D + 1:
        raise PartialCoverage(f"fixed points at {format_point(P)} leave F_p directions", [P])
    reduced = reduce_map(conjugate_at(iterate_lift(lift, n), P))
    occupied = [r for r, c in counts.items() if c > 0]
    ordered = tuple(sorted(counts.items(), key=lambda kv: (kv[0] == INF, kv[0] if kv[0] != INF else 0)))
    if reduced.is_constant:
        v = len(occupied)
        return WeightReport(P, max(0, v - 2), False, 0, 0, v, ordered)
    shearing = sum(1 for r in occupied if reduced(r) != r)
    weight = reduced.degree - 1 + shearing
    return WeightReport(P, weight, True, reduced.degree, shearing, len(occupied), ordered)


def crucial_measure_weights(lift: Lift, n: int, candidate_points: Optional[Iterable[TypeIIPoint]] = None) -> list:
    """Weight reports for candidates; by default the vertices of the fixed-point tree."""
    if candidate_points is None:
        candidate_points = fixed_point_tree(lift, n).skeleton.vertices
    reports, unresolved = [], []
    for P in candidate_points:
        try:
            reports.append(point_weight(lift, n, P))
        except (PartialCoverage, RamificationNeeded):
            unresolved.append(P)
    if unresolved:
        raise PartialCoverage("tangent analysis needs residue extensions", unresolved)
    return reports


def measure_from_weights(lift: Lift, n: int, reports: Sequence[WeightReport]) -> DiscreteMeasure:
    D = iterate_degree(lift, n)
    total = sum(r.weight for r in reports)
    if total != D - 1:
        raise PartialCoverage(f"weights sum to {total}, expected {D - 1}", [])
    return DiscreteMeasure((r.point, Fraction(r.weight, D - 1)) for r in reports)


# -- slope formulas off the fixed-point tree -----------------------------------------

NON_FIXED = "non-fixed"
FIXED_NON_ID = "fixed-non-id"
ID_INDIFFERENT = "id-indifferent"


def classify_point(lift: Lift, n: int, P: TypeIIPoint) -> str:
    reduced = reduce_map(conjugate_at(iterate_lift(lift, n), P))
    if reduced.is_constant:
        return NON_FIXED
    return ID_INDIFFERENT if reduced.is_identity() else FIXED_NON_ID


def predicted_offtree_slope(lift: Lift, n: int, P: TypeIIPoint, status: str, v_count: int,
                            junction: bool = False) -> Fraction:
    """Total outgoing slope of ``f_n`` over a star of ``v_count`` directions.

    Away from the tree the star includes the direction back toward it; at the
    junction point the star holds only directions leaving the tree.
    """
    D = iterate_degree(lift, n)
    if status == ID_INDIFFERENT:
        return Fraction(0)
    if junction or status == FIXED_NON_ID:
        return Fraction(2 * v_count, D - 1)
    if status == NON_FIXED:
        return Fraction(2 * (v_count - 2), D - 1)
    raise ValueError(f"unknown status {status!r}")


@dataclass(frozen=True)
class SlopeProbe:
    point: TypeIIPoint
    directions: tuple
    status: str
    junction: bool
    empirical: Fraction
    predicted: Fraction

    @property
    def agrees(self) -> bool:
        return self.empirical == self.predicted


def star_slope(lift: Lift, n: int, P: TypeIIPoint, directions: Sequence[Direction]) -> Fraction:
    return sum((empirical_slope(lift, n, P, v, modified=True) for v in directions), Fraction(0))


def free_directions(lift: Lift, n: int, P: TypeIIPoint) -> list:
    """F_p-rational downward directions at ``P`` that contain no fixed point."""
    counts = direction_fixed_counts(lift, n, P)
    return [residue_direction(P, r) for r, c in counts.items() if r != INF and c == 0]


def probe_offtree(lift: Lift, n: int, P: TypeIIPoint, extra: Sequence[Direction]) -> SlopeProbe:
    """Probe at a point off the tree: the star is infinity (toward the tree) plus ``extra``."""
    dirs = (TOWARD_INFINITY,) + tuple(extra)
    status = classify_point(lift, n, P)
    emp = star_slope(lift, n, P, dirs)
    return SlopeProbe(P, dirs, status, False, emp, predicted_offtree_slope(lift, n, P, status, len(dirs)))


def probe_junction(lift: Lift, n: int, P: TypeIIPoint, dirs: Sequence[Direction]) -> SlopeProbe:
    """Probe at a tree point using only fixed-point-free directions."""
    status = classify_point(lift, n, P)
    emp = star_slope(lift, n, P, dirs)
    pred = predicted_offtree_slope(lift, n, P, status, len(dirs), junction=True)
    return SlopeProbe(P, tuple(dirs), status, True, emp, pred)


def random_probes(lift: Lift, n: int, count: int, rng) -> list:
    """Off-tree and junction probes below vertices of the fixed-point tree."""
    tree = fixed_point_tree(lift, n)
    e = lift.ctx.e
    anchors = [V for V in tree.skeleton.vertices if in_value_group(V.t, e)]
    probes = []
    attempts = 0
    while len(probes) < count and attempts < 50 * count:
        attempts += 1
        V = rng.choice(anchors)
        free = free_directions(lift, n, V)
        if not free:
            continue
        if rng.random() < 0.25:
            k = rng.randint(1, len(free))
            probes.append(probe_junction(lift, n, V, rng.sample(free, k)))
            continue
        depth = Fraction(rng.randint(1, 3 * e), e)
        P = point_along(V, rng.choice(free), depth)
        below = [residue_direction(P, r) for r in range(lift.ctx.p)]
        k = rng.randint(0, len(below))
        probes.append(probe_offtree(lift, n, P, rng.sample(below, k)))
    return probes


# -- weak convergence bound -------------------------------------------------------

@dataclass(frozen=True)
class WeakBoundReport:
    edge_count: int
    R: Fraction
    K: int
    D_gamma: Fraction
    laplacian_mass: Fraction
    max_abs_f: Fraction
    C: Fraction
    n: int
    bound: Fraction

    def to_json(self) -> dict:
        return {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in self.__dict__.items()}


def graph_constants(skel: Skeleton):
    """``(E, R, K, D)`` for the weak-convergence bound on ``skel``."""
    E = skel.edge_count
    R = skel.radius_from(gauss_point(skel.vertices[0].ctx))
    K = 2 * E
    valences = [skel.valence(i) for i in range(len(skel.vertices))]
    max_v = max(valences + ([2] if E >= 1 else []))
    spread = sum(abs(v - 2) for v in valences if v != 2)
    D_gamma = Fraction(K * (spread + (E + 1) * max_v))
    return E, R, K, D_gamma


def weak_conv_bound(skel: Skeleton, f: CPAFn, lift: Lift, n: int, C=None) -> WeakBoundReport:
    C = default_constant(lift) if C is None else Fraction(C)
    E, R, K, D_gamma = graph_constants(skel)
    lap_mass = tree_laplacian(f).total_variation()
    max_f = f.max_abs()
    D = iterate_degree(lift, n)
    bound = Fraction(2, D - 1) * (max(C, R) * lap_mass + max_f * D_gamma)
    return WeakBoundReport(E, R, K, D_gamma, lap_mass, max_f, C, n, bound)


def haar_reference(skel: Skeleton) -> DiscreteMeasure:
    """Retraction of Haar measure on Z_p (e = 1) to ``skel``."""
    ctx = skel.vertices[0].ctx
    depth = math.floor(max(V.t for V in skel.vertices)) + 1
    depth = max(depth, 0)
    modulus = ctx.p ** depth
    atoms = (
        (skel.retract(make_point(ctx, a, depth)), Fraction(1, modulus)) for a in range(modulus)
    )
    return DiscreteMeasure(atoms)


def gauss_reference(skel: Skeleton) -> DiscreteMeasure:
    """Retraction of the Gauss point mass (the invariant measure of good reduction maps)."""
    return DiscreteMeasure([(skel.retract(gauss_point(skel.vertices[0].ctx)), 1)])


@dataclass(frozen=True)
class EquidistRow:
    n: int
    integral_nu: Fraction
    integral_ref: Fraction
    diff: Fraction
    bound: Fraction

    def to_row(self) -> dict:
        return dict(self.__dict__)


def equidist_report(lift: Lift, n_values: Iterable[int], skel: Skeleton, f: CPAFn,
                    reference: DiscreteMeasure, C=None) -> list:
    ref_integral = integrate_cpa(f, pushforward_measure(reference, skel))
    rows = []
    for n in n_values:
        nu = crucial_measure_laplacian(lift, n)
        value = integrate_cpa(f, pushforward_measure(nu, skel))
        bound = weak_conv_bound(skel, f, lift, n, C).bound
        rows.append(EquidistRow(n, value, ref_integral, abs(value - ref_integral), bound))
    return rows
