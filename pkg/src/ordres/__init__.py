"""Exact resultant functions, crucial measures and minimal resultant loci
for rational maps over p-adic fields."""

from .valfield import ValContext, ValElement, context
from .projmap import Lift, make_lift, normalize_lift, iterate_lift
from .berktree import TypeIIPoint, DiscreteMeasure, Skeleton, make_point, gauss_point
from .resfunc import ord_res_at, normalized_ord_res, eval_fn, green_estimate
from .crucial import crucial_measure_laplacian, crucial_measure_weights
from .baryloc import barycenter, minresloc

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure",
    "Lift",
    "Skeleton",
    "TypeIIPoint",
    "ValContext",
    "ValElement",
    "barycenter",
    "context",
    "crucial_measure_laplacian",
    "crucial_measure_weights",
    "eval_fn",
    "gauss_point",
    "green_estimate",
    "iterate_lift",
    "make_lift",
    "make_point",
    "minresloc",
    "normalize_lift",
    "normalized_ord_res",
    "ord_res_at",
]
