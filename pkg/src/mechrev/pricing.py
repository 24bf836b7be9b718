"""Posted-price revenue for one item and the two simple mechanisms."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dist import Dist1D, JointDist, marginal, sum_dist


@dataclass(frozen=True)
class PriceQuote:
    price: Fraction
    revenue: Fraction
    sale_prob: Fraction


def myerson_price(F: Dist1D) -> PriceQuote:
    """Revenue-maximizing posted price; the lowest one wins ties.

    Only support points are candidates.  A buyer at exactly the price buys.
    """
    best = PriceQuote(Fraction(0), Fraction(0), Fraction(1))
    above = Fraction(1)  # Pr[v >= current support point]
    for v, p in F.support:
        rev = v * above
        if rev > best.revenue:
            best = PriceQuote(v, rev, above)
        above -= p
    return best


def srev(D: JointDist) -> Fraction:
    """Revenue of selling every item separately at its own optimal price."""
    return sum((myerson_price(marginal(D, j)).revenue for j in range(D.n_items)), Fraction(0))


def brev(D: JointDist) -> Fraction:
    """Revenue of the grand bundle at its optimal price."""
    return myerson_price(sum_dist(D)).revenue
