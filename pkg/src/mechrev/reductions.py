"""Reductions from correlated laws to semi-independent ones.

Both constructions give every independent ingredient of the original law its
own block of identical reduced items, so that each original item is the sum
(its "package") of some reduced items:

* common base-value ``v_j = f_j + b`` becomes ``2n`` items: ``f_1 .. f_n``
  alone, plus one class of ``n`` copies of ``b``; item ``j`` is ``{j, n + j}``.
* linear ``v_j = sum_a w_a M[a][j]`` first scales ``M`` to integers by the
  common denominator ``L`` (and the features by ``1 / L``), then gives feature
  ``a`` a class of ``sum_j M[a][j]`` items; item ``j`` takes ``M[a][j]`` of them.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .decomposition import CheckSet, Inequality
from .dist import DEFAULT_MAX_ATOMS, CorrelationSpec, Dist1D, build_joint, make_joint, marginal, scale, sum_dist
from .errors import SupportExplosion, WrongKind
from .optmech import revenue
from .pricing import brev, myerson_price, srev

# cap on the number of reduced items
MAX_REDUCED_ITEMS = 64


@dataclass(frozen=True)
class ReductionMap:
    original: CorrelationSpec
    reduced: CorrelationSpec  # always semi_independent
    packaging: tuple[tuple[int, ...], ...]  # reduced items making up each original item
    scale: Fraction = Fraction(1)  # integerizing factor applied to the matrix


ReductionReport = CheckSet


def cor_base_value(spec: CorrelationSpec) -> ReductionMap:
    if spec.kind != "common_base_value":
        raise WrongKind(f"expected a common_base_value spec, got {spec.kind}")
    n = len(spec.laws)
    classes = [(F, 1) for F in spec.laws] + [(spec.base, n)]
    reduced = CorrelationSpec.semi_independent(classes, name=_derived_name(spec))
    packaging = tuple((j, n + j) for j in range(n))
    return ReductionMap(spec, reduced, packaging)


def cor_linear(spec: CorrelationSpec, max_items: int = MAX_REDUCED_ITEMS) -> ReductionMap:
    if spec.kind != "linear":
        raise WrongKind(f"expected a linear spec, got {spec.kind}")
    L = math.lcm(*(x.denominator for row in spec.matrix for x in row))
    M = [[int(x * L) for x in row] for row in spec.matrix]
    kept = [a for a, row in enumerate(M) if any(row)]
    sizes = [sum(M[a]) for a in kept]
    if sum(sizes) > max_items:
        raise SupportExplosion(f"{sum(sizes)} reduced items exceed the cap of {max_items}")
    classes = [(scale(spec.laws[a], Fraction(1, L)), m) for a, m in zip(kept, sizes)]
    reduced = CorrelationSpec.semi_independent(classes, name=_derived_name(spec))
    packages: list[list[int]] = [[] for _ in range(spec.n_items)]
    start = 0
    for a, m in zip(kept, sizes):
        nxt = start
        for j in range(spec.n_items):
            packages[j].extend(range(nxt, nxt + M[a][j]))
            nxt += M[a][j]
        start += m
    return ReductionMap(spec, reduced, tuple(tuple(p) for p in packages), Fraction(L))


def _derived_name(spec: CorrelationSpec) -> str | None:
    return None if spec.name is None else f"{spec.name}-reduced"


def _draw_laws(spec: CorrelationSpec) -> list[Dist1D]:
    if spec.kind == "common_base_value":
        return list(spec.laws) + [spec.base]
    return list(spec.laws)


def _original_values(spec: CorrelationSpec, draw) -> tuple[Fraction, ...]:
    if spec.kind == "common_base_value":
        return tuple(f + draw[-1] for f in draw[:-1])
    return tuple(sum((w * row[j] for w, row in zip(draw, spec.matrix)), Fraction(0)) for j in range(spec.n_items))


def _reduced_values(rm: ReductionMap, draw) -> tuple[Fraction, ...]:
    spec = rm.original
    if spec.kind == "common_base_value":
        parts = list(draw)
    else:
        parts = [w / rm.scale for w, row in zip(draw, spec.matrix) if any(row)]
    return tuple(x for x, m in zip(parts, rm.reduced.multiplicities) for _ in range(m))


def check_packaging(rm: ReductionMap) -> Inequality:
    """For every draw of the independent ingredients, each original value is
    the sum of its package.  ``lhs`` is the largest discrepancy."""
    n_reduced = rm.reduced.n_items
    flat = sorted(i for p in rm.packaging for i in p)
    if flat != list(range(n_reduced)):
        return Inequality("packaging", Fraction(1), Fraction(0), False, info={"reason": "not a partition"})
    worst = Fraction(0)
    for combo in itertools.product(*(law.values for law in _draw_laws(rm.original))):
        orig = _original_values(rm.original, combo)
        red = _reduced_values(rm, combo)
        for j, pkg in enumerate(rm.packaging):
            worst = max(worst, abs(sum((red[i] for i in pkg), Fraction(0)) - orig[j]))
    return Inequality("packaging", worst, Fraction(0), worst == 0)


def packaged_joint(rm: ReductionMap, max_atoms: int = DEFAULT_MAX_ATOMS):
    """The law of the package sums under the reduced law; equals the original law."""
    D2 = build_joint(rm.reduced, max_atoms)
    atoms = ((tuple(sum((v[i] for i in pkg), Fraction(0)) for pkg in rm.packaging), p) for v, p in D2.atoms)
    return make_joint(atoms, len(rm.packaging))


def _eq(name, lhs, rhs) -> Inequality:
    return Inequality(name, lhs, rhs, lhs == rhs)


def _le(name, lhs, rhs, tol=0) -> Inequality:
    return Inequality(name, lhs, rhs, lhs <= rhs + tol * max(1, abs(rhs)))


def _mismatch(P, Q) -> Fraction:
    """Total probability on which two laws disagree (sum of |p - q| over points)."""
    a = dict(P.atoms) if hasattr(P, "atoms") else dict(P.support)
    b = dict(Q.atoms) if hasattr(Q, "atoms") else dict(Q.support)
    return sum((abs(a.get(k, 0) - b.get(k, 0)) for k in a.keys() | b.keys()), Fraction(0))


def check_reduction_identities(rm: ReductionMap, max_atoms: int = DEFAULT_MAX_ATOMS, mode: str = "rational") -> ReductionReport:
    """Revenue relations between the original law ``D`` and the reduced ``D'``.

    * the bundle sees the same total value: ``sum_dist`` and ``brev`` agree;
    * ``Rev(D) <= Rev(D')``: the seller of ``D'`` can sell packages;
    * common base-value only: ``srev(D) >= srev(D') / 2``, through the per-item
      identity ``r(item j) = brev(F_j x B)`` and ``srev(F_j x B) <= 2 brev(F_j x B)``.
    """
    D = build_joint(rm.original, max_atoms)
    D2 = build_joint(rm.reduced, max_atoms)
    tol = 0 if mode == "rational" else 1e-7
    checks = [
        check_packaging(rm),
        _eq("packaged_law", _mismatch(packaged_joint(rm, max_atoms), D), Fraction(0)),
        _eq("sum_dist", _mismatch(sum_dist(D), sum_dist(D2)), Fraction(0)),
        _eq("brev", brev(D), brev(D2)),
        _le("rev", revenue(D, mode, max_atoms), revenue(D2, mode, max_atoms), tol),
    ]
    if rm.original.kind == "common_base_value":
        B = rm.original.base
        rb = myerson_price(B).revenue
        for j, F in enumerate(rm.original.laws):
            pair = build_joint(CorrelationSpec.independent([F, B]), max_atoms)
            rj = myerson_price(sum_dist(pair)).revenue
            checks.append(_eq(f"item_revenue[{j}]", myerson_price(marginal(D, j)).revenue, rj))
            checks.append(_le(f"pair_bound[{j}]", myerson_price(F).revenue + rb, 2 * rj))
        checks.append(_le("srev_half", srev(D2) / 2, srev(D)))
    return ReductionReport(tuple(checks))
