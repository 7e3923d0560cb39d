"""Built-in maps for the worked examples and their known invariant-measure data."""

from __future__ import annotations

from ..berktree import gauss_point, make_point
from ..projmap import Lift, make_lift, normalize_lift
from ..valfield import context


def haar_map(p: int) -> Lift:
    """``(z^p - z)/p``, whose invariant measure is Haar measure on Z_p."""
    F = [1] + [0] * (p - 2) + [-1, 0]
    G = [0] * p + [p]
    return normalize_lift(make_lift(context(p), F, G))


def quadratic_map(p: int) -> Lift:
    """``(z^2 - 1)/p``; its invariant measure has barycenter ``[zeta_{1,1}, zeta_{-1,1}]``."""
    return normalize_lift(make_lift(context(p), [1, 0, -1], [0, 0, p]))


def square_map(p: int) -> Lift:
    """``z^2``: good reduction, invariant measure the Gauss point mass."""
    return normalize_lift(make_lift(context(p), [1, 0, 0], [0, 0, 1]))


PRESETS = {
    "haar": haar_map,
    "quadratic": quadratic_map,
    "square": square_map,
}

REFERENCE_FOR = {"haar": "haar", "square": "gauss"}


def preset_map(name: str, p: int = 3) -> Lift:
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return builder(p)


def preset_barycenter(name: str, p: int = 3):
    """Endpoints of the barycenter of the invariant measure, when known."""
    from ..baryloc import SegmentLocus

    ctx = context(p)
    if name == "quadratic":
        return SegmentLocus.segment(make_point(ctx, 1, 1), make_point(ctx, -1, 1))
    if name in ("haar", "square"):
        return SegmentLocus.point(gauss_point(ctx))
    raise ValueError(f"no barycenter known for preset {name!r}")
