from fractions import Fraction

import pytest
from hypothesis import given, settings

from mechrev import CorrelationSpec, Dist1D, build_joint, check_semi_independent, marginal, sum_dist
from mechrev.dist import scale
from mechrev.errors import SupportExplosion, WrongKind
from mechrev.optmech import revenue
from mechrev.pricing import brev, myerson_price
from mechrev.reductions import (
    MAX_REDUCED_ITEMS,
    ReductionMap,
    check_packaging,
    check_reduction_identities,
    cor_base_value,
    cor_linear,
    packaged_joint,
)
from oracles import convolve, myerson_brute
from strategies import cbv_specs, linear_specs

H = Fraction(1, 2)
coin = Dist1D.of([(0, H), (1, H)])


def by_name(report):
    return {c.name: c for c in report.checks}


# ---- common base-value ----

def test_cbv_one_item(u12):
    rm = cor_base_value(CorrelationSpec.common_base_value([u12], coin))
    assert rm.reduced.kind == "semi_independent"
    assert rm.reduced.laws == (u12, coin)
    assert rm.reduced.multiplicities == (1, 1)
    assert rm.packaging == ((0, 1),)


def test_cbv_two_items():
    rm = cor_base_value(CorrelationSpec.common_base_value([coin, coin], coin))
    assert rm.reduced.n_items == 4
    assert rm.reduced.multiplicities == (1, 1, 2)
    assert rm.packaging == ((0, 2), (1, 3))
    assert build_joint(rm.reduced).partition == ((0,), (1,), (2, 3))


def test_cbv_valueless_base(u12):
    spec = CorrelationSpec.common_base_value([u12, coin], Dist1D.point(0))
    rm = cor_base_value(spec)
    plain = build_joint(CorrelationSpec.independent([u12, coin]))
    assert revenue(build_joint(rm.reduced)) == revenue(plain)
    checks = by_name(check_reduction_identities(rm))
    assert all(c.holds for c in checks.values())
    # nothing is lost when the base is zero
    assert checks["rev"].lhs == checks["rev"].rhs
    assert checks["brev"].lhs == checks["brev"].rhs


def test_cbv_one_item_pair_identity(u12):
    rm = cor_base_value(CorrelationSpec.common_base_value([u12], coin))
    checks = by_name(check_reduction_identities(rm))
    pair = build_joint(CorrelationSpec.independent([u12, coin]))
    assert checks["item_revenue[0]"].lhs == brev(pair)
    assert checks["item_revenue[0]"].holds


def test_cbv_wrong_kind(u12):
    with pytest.raises(WrongKind):
        cor_base_value(CorrelationSpec.independent([u12]))


# ---- linear ----

def test_linear_identity_matrix(u12):
    spec = CorrelationSpec.linear([u12, coin], [[1, 0], [0, 1]])
    rm = cor_linear(spec)
    assert rm.reduced.laws == (u12, coin)
    assert rm.reduced.multiplicities == (1, 1)
    assert rm.packaging == ((0,), (1,))
    assert rm.scale == 1


def test_linear_base_value_form_matches(u12):
    F, B = [u12, coin], Dist1D.of([(0, H), (2, H)])
    lin = cor_linear(CorrelationSpec.linear([*F, B], [[1, 0], [0, 1], [1, 1]]))
    cbv = cor_base_value(CorrelationSpec.common_base_value(F, B))
    assert lin.reduced.laws == cbv.reduced.laws
    assert lin.reduced.multiplicities == cbv.reduced.multiplicities
    assert lin.packaging == cbv.packaging


def test_linear_column_sums():
    rm = cor_linear(CorrelationSpec.linear([coin, coin], [[2], [1]]))
    assert rm.reduced.n_items == 3
    assert rm.reduced.multiplicities == (2, 1)
    assert rm.packaging == ((0, 1, 2),)


def test_linear_fractional_matrix(u12):
    spec = CorrelationSpec.linear([u12], [[H, Fraction(3, 2)]])
    rm = cor_linear(spec)
    assert rm.scale == 2
    assert rm.reduced.laws == (scale(u12, H),)
    assert rm.reduced.multiplicities == (4,)
    assert rm.packaging == ((0,), (1, 2, 3))
    assert check_packaging(rm).holds


def test_linear_zero_feature_dropped(u12):
    rm = cor_linear(CorrelationSpec.linear([u12, coin], [[1, 1], [0, 0]]))
    assert rm.reduced.laws == (u12,)
    assert check_packaging(rm).holds


def test_linear_cap(u12):
    spec = CorrelationSpec.linear([u12], [[MAX_REDUCED_ITEMS, 1]])
    with pytest.raises(SupportExplosion):
        cor_linear(spec)
    assert cor_linear(spec, max_items=MAX_REDUCED_ITEMS + 1).reduced.n_items == MAX_REDUCED_ITEMS + 1


def test_linear_wrong_kind(u12):
    with pytest.raises(WrongKind):
        cor_linear(CorrelationSpec.common_base_value([u12], u12))


def test_broken_packaging_detected(u12):
    rm = cor_base_value(CorrelationSpec.common_base_value([u12, u12], u12))
    swapped = ReductionMap(rm.original, rm.reduced, ((0, 3), (1, 2)))
    assert check_packaging(swapped).holds  # the copies of the base are interchangeable
    worse = ReductionMap(rm.original, rm.reduced, ((0,), (1, 2, 3)))
    c = check_packaging(worse)
    assert not c.holds
    assert c.lhs > 0


# ---- invariants ----

@settings(max_examples=30)
@given(cbv_specs(max_items=2, max_support=2))
def test_cbv_identities(spec):
    rm = cor_base_value(spec)
    D2 = build_joint(rm.reduced)
    assert check_semi_independent(D2)
    assert sum_dist(D2) == sum_dist(build_joint(spec))
    assert packaged_joint(rm) == build_joint(spec)
    rep = check_reduction_identities(rm)
    assert rep.holds, [c.name for c in rep.checks if not c.holds]


@settings(max_examples=30)
@given(linear_specs(max_features=3, max_items=2, max_entry=2, max_support=2))
def test_linear_identities(spec):
    rm = cor_linear(spec)
    D, D2 = build_joint(spec), build_joint(rm.reduced)
    assert check_semi_independent(D2)
    assert sum_dist(D) == sum_dist(D2)
    assert check_packaging(rm).holds
    rep = check_reduction_identities(rm)
    assert rep.holds, [c.name for c in rep.checks if not c.holds]


@settings(max_examples=20)
@given(cbv_specs(max_items=3, max_support=2))
def test_item_law_is_a_convolution(spec):
    # independent route: item j's law is F_j convolved with B
    D = build_joint(spec)
    for j, F in enumerate(spec.laws):
        law = {k: v for k, v in convolve(dict(F.support), dict(spec.base.support)).items() if v}
        assert dict(marginal(D, j).support) == law
        assert myerson_price(marginal(D, j)).revenue == myerson_brute(list(law.items()))[1]
