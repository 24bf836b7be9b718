from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from mechrev import CorrelationSpec, Dist1D, build_joint, make_joint, sum_dist, val
from mechrev.dist import scale
from mechrev.pricing import brev, myerson_price, srev
from oracles import myerson_brute
from strategies import independent_specs, laws, semi_specs

H = Fraction(1, 2)


def test_point_mass():
    q = myerson_price(Dist1D.point(1))
    assert (q.price, q.revenue, q.sale_prob) == (1, 1, 1)


def test_tie_goes_to_lowest_price(u12):
    q = myerson_price(u12)
    assert (q.price, q.revenue, q.sale_prob) == (1, 1, 1)


def test_high_price_wins():
    q = myerson_price(Dist1D.of([(0, Fraction(3, 4)), (4, Fraction(1, 4))]))
    assert (q.price, q.revenue) == (4, 1)


def test_all_zero_law():
    q = myerson_price(Dist1D.point(0))
    assert (q.price, q.revenue) == (0, 0)


def test_srev_examples(uniform_sq, point_pair, tied_pair):
    assert srev(uniform_sq) == 2
    assert srev(point_pair) == 2
    assert srev(tied_pair) == 2


def test_brev_examples(uniform_sq, point_pair, tied_pair):
    assert brev(uniform_sq) == Fraction(9, 4)
    assert myerson_price(sum_dist(uniform_sq)).price == 3
    assert brev(point_pair) == 2
    # price 2 and price 4 both earn 2; the lower one is reported
    assert brev(tied_pair) == 2
    assert myerson_price(sum_dist(tied_pair)).price == 2


@given(laws(max_support=6))
def test_matches_brute_force(F):
    q = myerson_price(F)
    assert (q.price, q.revenue) == myerson_brute(list(F.support))
    assert q.revenue == q.price * q.sale_prob
    assert q.sale_prob == F.tail_prob(q.price)


@given(laws(max_support=5), st.builds(Fraction, st.integers(1, 12), st.integers(1, 5)))
def test_scaling(F, alpha):
    q, qs = myerson_price(F), myerson_price(scale(F, alpha))
    assert qs.revenue == alpha * q.revenue
    assert qs.price == alpha * q.price


@given(laws(max_support=6))
def test_no_support_price_does_better(F):
    best = myerson_price(F).revenue
    for v in F.values:
        assert v * F.tail_prob(v) <= best


@given(independent_specs(), st.randoms(use_true_random=False))
def test_permutation_invariance(spec, rnd):
    D = build_joint(spec)
    perm = list(range(D.n_items))
    rnd.shuffle(perm)
    P = make_joint([(tuple(v[i] for i in perm), p) for v, p in D.atoms])
    assert srev(P) == srev(D)
    assert brev(P) == brev(D)


@given(laws(max_support=5))
def test_single_item_all_agree(F):
    D = build_joint(CorrelationSpec.independent([F]))
    r = myerson_price(F).revenue
    assert srev(D) == brev(D) == r


@given(semi_specs())
def test_brev_at_most_val_and_srev_at_most_val(spec):
    D = build_joint(spec)
    assert brev(D) <= val(D)
    assert srev(D) <= val(D)
