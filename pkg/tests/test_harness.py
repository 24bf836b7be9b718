import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mechrev import CorrelationSpec, Dist1D, build_joint, marginal
from mechrev.errors import BadParams, NotCommonP, WrongKind
from mechrev.harness import (
    BOUNDS,
    check_two_point_ratio,
    gen_instance,
    guarantee_report,
    ratio_search,
    scaled_iid_pigeonhole,
    two_point_reduce,
)
from mechrev.optmech import revenue
from mechrev.pricing import myerson_price
from mechrev.specio import spec_hash
from strategies import laws

H = Fraction(1, 2)

# spec hashes of generated instances, recorded once
FROZEN_HASHES = {
    "single": ["ab1e121dba72901b", "240ecb70e566dbb0", "d3693322f7cdc6c4"],
    "independent": ["668db59b437db5de", "75368ae2a6086533", "374a6bcb0e10c71c"],
    "semi": ["4bdf1329dabfbfa0", "2f3c0790909a60ea", "f5973a8859f1e613"],
    "cbv": ["49907d85cd8260c1", "994fb463bc1f8c32", "4d90b9a030dfda93"],
    "linear": ["acd7e32adb5a52fd", "710e03bcf07be0bb", "7dd30beb01e5542d"],
}


# ---- guarantee report ----

def test_report_tied_pair(u12):
    rep = guarantee_report(CorrelationSpec.semi_independent([(u12, 2)]))
    assert rep.ratio == 1
    assert rep.bound == 6
    assert rep.holds


def test_report_uniform_pair(u12):
    rep = guarantee_report(CorrelationSpec.independent([u12, u12]), seed=4)
    assert (rep.srev, rep.brev, rep.val) == (2, Fraction(9, 4), 3)
    assert rep.ratio == rep.rev / Fraction(9, 4)
    assert rep.ratio <= 6
    assert rep.holds
    assert rep.fingerprint.startswith("4:")


@pytest.mark.parametrize("seed", range(5))
def test_report_base_value(seed):
    rep = guarantee_report(gen_instance("cbv", seed))
    assert rep.bound == 12
    assert 1 <= rep.ratio <= 12
    assert rep.holds


def test_report_linear_has_no_constant():
    rep = guarantee_report(gen_instance("linear", 2))
    assert rep.bound is None
    assert rep.holds
    assert {"k", "log_k", "log_n", "iid_features"} <= set(rep.info)
    assert rep.info["log_k"] == math.log(rep.info["k"])


def test_report_float_mode():
    rep = guarantee_report(gen_instance("semi", 3), mode="float")
    exact = guarantee_report(gen_instance("semi", 3))
    assert float(rep.rev) == pytest.approx(float(exact.rev), abs=1e-7)
    assert rep.holds


# ---- two-point reduction ----

def test_two_point_examples(u12):
    assert two_point_reduce(u12) == Dist1D.point(1)
    F = Dist1D.of([(0, Fraction(3, 4)), (4, Fraction(1, 4))])
    assert two_point_reduce(F) == F
    assert two_point_reduce(Dist1D.point(3)) == Dist1D.point(3)
    assert two_point_reduce(Dist1D.point(0)) == Dist1D.point(0)


@given(laws(max_support=6))
def test_two_point_keeps_revenue_and_is_dominated(F):
    G = two_point_reduce(F)
    assert myerson_price(G).revenue == myerson_price(F).revenue
    for x in set(F.values) | set(G.values):
        assert G.cdf(x) >= F.cdf(x)


def test_two_point_ratio_points():
    rep = check_two_point_ratio([Dist1D.point(1), Dist1D.point(2)])
    assert rep.holds
    assert all(c.lhs == c.rhs for c in rep.checks)


def test_two_point_ratio_uniform(u12):
    rep = check_two_point_ratio(CorrelationSpec.independent([u12, u12]))
    by = {c.name: c for c in rep.checks}
    # {1: 1/2, 2: 1/2} collapses to the point 1, so the bundle drops to 2
    assert (by["brev_not_raised"].lhs, by["brev_not_raised"].rhs) == (2, Fraction(9, 4))
    assert rep.holds


def test_two_point_ratio_wrong_kind(u12):
    with pytest.raises(WrongKind):
        check_two_point_ratio(CorrelationSpec.semi_independent([(u12, 2)]))


@settings(max_examples=40)
@given(st.lists(laws(max_support=3), min_size=1, max_size=3))
def test_two_point_ratio_holds(ls):
    assert check_two_point_ratio(ls).holds


# ---- pigeonhole ----

def test_pigeonhole_equal_values():
    c = scaled_iid_pigeonhole([(3, H)] * 4)
    assert c.info["argmax"] == 4
    assert c.info["max_jpu"] == c.lhs == 6
    assert c.holds


def test_pigeonhole_harmonic():
    n, p = 8, Fraction(1, 3)
    c = scaled_iid_pigeonhole([(Fraction(1, i), p) for i in range(1, n + 1)])
    assert c.info["max_jpu"] == p
    assert c.lhs == p * sum(Fraction(1, i) for i in range(1, n + 1))
    assert c.holds
    # the bound is nearly tight: H_n is within 1 of 1 + ln n
    assert c.rhs - c.lhs < p


def test_pigeonhole_single_item():
    c = scaled_iid_pigeonhole([(5, H)])
    assert c.lhs == c.rhs == Fraction(5, 2)


def test_pigeonhole_reports_bundle_when_small():
    # the sum is uniform on {0, 1, 2, 3}; price 2 earns 2 * 1/2
    c = scaled_iid_pigeonhole([(2, H), (1, H)])
    assert c.info["brev"] == 1


def test_pigeonhole_errors():
    with pytest.raises(NotCommonP):
        scaled_iid_pigeonhole([(1, H), (1, Fraction(1, 3))])
    with pytest.raises(BadParams):
        scaled_iid_pigeonhole([])


@given(
    st.lists(st.builds(Fraction, st.integers(1, 64), st.integers(1, 8)), min_size=1, max_size=64),
    st.builds(Fraction, st.integers(1, 9), st.just(10)),
)
def test_pigeonhole_holds(us, p):
    assert scaled_iid_pigeonhole([(u, p) for u in us], exact_limit=64).holds


# ---- generators ----

@pytest.mark.parametrize("kind", sorted(FROZEN_HASHES))
def test_generator_fixtures(kind):
    assert [spec_hash(gen_instance(kind, s)) for s in (0, 1, 2)] == FROZEN_HASHES[kind]


def test_generator_single_item():
    spec = gen_instance("single", 5)
    assert spec.n_items == 1
    assert gen_instance("independent", 5, n_items=1).n_items == 1


@pytest.mark.parametrize("kind", ["independent", "semi", "cbv", "linear"])
def test_generator_deterministic(kind):
    assert gen_instance(kind, 17) == gen_instance(kind, 17)
    assert gen_instance(kind, 17) != gen_instance(kind, 18)


@pytest.mark.parametrize("kind", ["single", "independent", "semi", "cbv", "linear"])
@pytest.mark.parametrize("seed", range(15))
def test_generator_never_emits_valueless_items(kind, seed):
    D = build_joint(gen_instance(kind, seed))
    assert all(myerson_price(marginal(D, j)).revenue > 0 for j in range(D.n_items))


def test_generator_respects_sizes():
    for seed in range(20):
        spec = gen_instance("semi", seed, n_items=2, support=2, max_multiplicity=4)
        assert 1 <= len(spec.laws) <= 2
        assert all(1 <= m <= 4 for m in spec.multiplicities)
        assert all(len(F) <= 2 for F in spec.laws)
        for F in spec.laws:
            assert all(v.denominator in (1, 2, 4) and 0 <= v <= 16 for v in F.values)


@pytest.mark.parametrize("bad", [{"kind": "nope"}, {"n_items": 0}, {"support": -1}, {"seed": 1.5}, {"max_entry": True}])
def test_generator_bad_params(bad):
    args = {"kind": "semi", "seed": 1, **bad}
    kind, seed = args.pop("kind"), args.pop("seed")
    with pytest.raises(BadParams):
        gen_instance(kind, seed, **args)


# ---- search ----

def test_search_single_item_ratio_is_one():
    res = ratio_search("single", range(4), steps=3)
    assert res.report.ratio == 1


def test_search_regression():
    res = ratio_search("cbv", [0, 1], steps=4)
    assert res.report.ratio == Fraction(4523, 4428)
    assert res.evaluated == 10
    assert res.report.fingerprint == "1:994fb463bc1f8c32"
    assert revenue(build_joint(res.spec)) == res.report.rev


def test_search_finds_at_least_the_uniform_ratio():
    # Rev(uniform{1,2}^2) / 2.25 = 1
    res = ratio_search("independent", range(3), steps=6, n_items=2, support=2)
    assert res.report.ratio >= 1


def test_search_needs_seeds():
    with pytest.raises(BadParams):
        ratio_search("semi", [], steps=1)


def test_bounds_table():
    assert BOUNDS["semi_independent"] == 6
    assert BOUNDS["common_base_value"] == 12
