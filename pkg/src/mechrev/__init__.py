"""Exact revenue of simple and optimal mechanisms for one additive buyer."""
from .dist import (
    CorrelationSpec,
    Dist1D,
    JointDist,
    build_joint,
    check_semi_independent,
    condition,
    make_joint,
    marginal,
    product,
    restrict,
    sum_dist,
    val,
)
from .errors import MechRevError
from .harness import gen_instance, guarantee_report, ratio_search, scaled_iid_pigeonhole, two_point_reduce
from .optmech import Menu, optimal_revenue, revenue, verify_menu
from .pricing import brev, myerson_price, srev
from .reductions import check_reduction_identities, cor_base_value, cor_linear

__version__ = "0.1.0"

__all__ = [
    "CorrelationSpec",
    "Dist1D",
    "JointDist",
    "Menu",
    "MechRevError",
    "brev",
    "build_joint",
    "check_reduction_identities",
    "check_semi_independent",
    "condition",
    "cor_base_value",
    "cor_linear",
    "gen_instance",
    "guarantee_report",
    "make_joint",
    "marginal",
    "myerson_price",
    "optimal_revenue",
    "product",
    "ratio_search",
    "restrict",
    "revenue",
    "scaled_iid_pigeonhole",
    "srev",
    "sum_dist",
    "two_point_reduce",
    "val",
    "verify_menu",
]
