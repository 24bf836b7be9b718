"""Core/tail decomposition of a joint law and checks of the inequalities it supports.

Each item ``i`` gets a cut ``cut_i = r_i * t_i``.  In an atom the item is in
the tail when its value exceeds the cut and in the core otherwise.  For a
tail set ``A`` we keep

* ``p_A`` the probability that exactly the items of ``A`` are in the tail,
* ``D^A`` the law conditioned on that event,
* ``D_A^T`` and ``D_A^C`` the parts of ``D^A`` on ``A`` and off ``A``,

and ``core`` is ``D^A`` for the empty tail set.  Every ``check_*`` function
returns an :class:`Inequality` whose ``holds`` must be true on valid input;
an unmet precondition raises instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .dist import (
    DEFAULT_MAX_ATOMS,
    Dist1D,
    JointDist,
    check_semi_independent,
    condition,
    independent_split,
    marginal,
    product,
    restrict,
    val,
    variance_sum,
)
from .errors import (
    IndependenceViolated,
    PreconditionViolated,
    TooManyClasses,
    ZeroItemRevenue,
    ZeroProbabilitySubdomain,
)
from .optmech import revenue
from .pricing import brev, myerson_price, srev

MAX_CLASSES = 20


@dataclass(frozen=True)
class Inequality:
    """``lhs <= rhs``; ``parts`` are supporting inequalities that must hold too."""

    name: str
    lhs: object
    rhs: object
    holds: bool
    parts: tuple["Inequality", ...] = ()
    info: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CheckSet:
    """A group of checks that pass together."""

    checks: tuple[Inequality, ...]

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)


def _leq(name, lhs, rhs, parts=(), tol=0, **info) -> Inequality:
    ok = lhs <= rhs + tol * max(1, abs(rhs)) and all(p.holds for p in parts)
    return Inequality(name, lhs, rhs, bool(ok), tuple(parts), info)


def _tol(mode: str) -> float:
    return 0 if mode == "rational" else 1e-7


@dataclass(frozen=True)
class Thresholds:
    """Per-item ``t_i`` and ``cut_i = r_i * t_i``, with the Myerson revenues ``r_i``."""

    t: tuple[Fraction, ...]
    cut: tuple[Fraction, ...]
    item_revenue: tuple[Fraction, ...]

    @classmethod
    def from_cuts(cls, D: JointDist, cuts: Sequence) -> "Thresholds":
        """Thresholds with the given cuts; ``t_i = cut_i / r_i``."""
        if len(cuts) != D.n_items:
            raise ValueError(f"{len(cuts)} cuts for {D.n_items} items")
        rs = tuple(myerson_price(marginal(D, j)).revenue for j in range(D.n_items))
        for j, r in enumerate(rs):
            if r == 0:
                raise ZeroItemRevenue(f"item {j} never sells at a positive price")
        cuts = tuple(Fraction(c) for c in cuts)
        return cls(tuple(c / r for c, r in zip(cuts, rs)), cuts, rs)


def thresholds_semi_independent(D: JointDist) -> Thresholds:
    """``t_i = r / (r_i n_i)`` with ``r = srev(D)`` and ``n_i`` the class size of ``i``.

    So ``cut_i = r / n_i``.
    """
    rs = [myerson_price(marginal(D, j)).revenue for j in range(D.n_items)]
    for j, r in enumerate(rs):
        if r == 0:
            raise ZeroItemRevenue(f"item {j} never sells at a positive price")
    total = sum(rs, Fraction(0))
    sizes = [len(D.class_of(j)) for j in range(D.n_items)]
    t = tuple(total / (r * n) for r, n in zip(rs, sizes))
    cut = tuple(total / n for n in sizes)
    return Thresholds(t, cut, tuple(rs))


@dataclass(frozen=True)
class TailEntry:
    tail: tuple[int, ...]
    prob: Fraction
    conditional: JointDist  # D^A
    tail_part: JointDist | None  # D_A^T, None when A is empty
    core_part: JointDist | None  # D_A^C, None when A is everything


@dataclass(frozen=True)
class DecompositionReport:
    thresholds: Thresholds
    tail_probs: tuple[Fraction, ...]  # p_i = Pr[v_i > cut_i]
    entries: tuple[TailEntry, ...]
    core: JointDist | None  # D^A for A empty, None if that event has probability 0
    class_respecting: bool
    # sum over similarity classes of the probability that the class is in the tail
    expected_tail_classes: Fraction

    def entry(self, tail: Sequence[int]) -> TailEntry | None:
        tail = tuple(sorted(tail))
        for e in self.entries:
            if e.tail == tail:
                return e
        return None


def decompose(D: JointDist, t: Thresholds) -> DecompositionReport:
    """Split ``D`` by which items are in the tail."""
    if len(D.partition) > MAX_CLASSES:
        raise TooManyClasses(f"{len(D.partition)} similarity classes exceed the cap of {MAX_CLASSES}")
    n = D.n_items
    cut = t.cut

    def tail_of(vals):
        return tuple(i for i in range(n) if vals[i] > cut[i])

    groups: dict[tuple[int, ...], Fraction] = {}
    for vals, p in D.atoms:
        A = tail_of(vals)
        groups[A] = groups.get(A, Fraction(0)) + p
    respecting = all(all((c[0] in A) == (i in A) for c in D.partition for i in c) for A in groups)

    entries = []
    for A in sorted(groups, key=lambda A: (len(A), A)):
        cond = condition(D, lambda vals, A=A: tail_of(vals) == A)
        rest = [i for i in range(n) if i not in A]
        entries.append(
            TailEntry(
                A,
                groups[A],
                cond,
                restrict(cond, A) if A else None,
                restrict(cond, rest) if rest else None,
            )
        )
    core = entries[0].conditional if entries[0].tail == () else None
    tail_probs = tuple(sum((p for vals, p in D.atoms if vals[i] > cut[i]), Fraction(0)) for i in range(n))
    expected = sum((tail_probs[c[0]] for c in D.partition), Fraction(0))
    return DecompositionReport(t, tail_probs, tuple(entries), core, respecting, expected)


def check_split_bound(D: JointDist, A: Sequence[int], mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS) -> Inequality:
    """``Rev(D) <= Rev(D restricted to A) + Val(D restricted to the rest)`` for independent parts."""
    A = sorted(set(A))
    if not independent_split(D, A):
        raise IndependenceViolated(f"values on {A} are not independent of the other items")
    rest = [j for j in range(D.n_items) if j not in A]
    lhs = revenue(D, mode, max_atoms)
    rhs = revenue(restrict(D, A) if A else None, mode, max_atoms) + (val(restrict(D, rest)) if rest else 0)
    return _leq("split_bound", lhs, rhs, tol=_tol(mode))


def check_tail_probability(report: DecompositionReport) -> list[Inequality]:
    """Per item: ``p_i <= 1 / t_i``."""
    return [
        _leq(f"tail_probability[{i}]", p, 1 / t, item=i)
        for i, (p, t) in enumerate(zip(report.tail_probs, report.thresholds.t))
    ]


def _core_law(F: Dist1D, cut) -> Dist1D | None:
    kept = [(v, p) for v, p in F.support if v <= cut]
    s = sum((p for _, p in kept), Fraction(0))
    return Dist1D(tuple((v, p / s) for v, p in kept)) if s else None


def _tail_law(F: Dist1D, cut) -> Dist1D | None:
    kept = [(v, p) for v, p in F.support if v > cut]
    s = sum((p for _, p in kept), Fraction(0))
    return Dist1D(tuple((v, p / s) for v, p in kept)) if s else None


def check_core_item_revenue(D: JointDist, t: Thresholds) -> list[Inequality]:
    """Per item with a non-empty core: the core's Myerson revenue is at most ``r_i``."""
    out = []
    for i in range(D.n_items):
        core = _core_law(marginal(D, i), t.cut[i])
        if core is not None:
            out.append(_leq(f"core_item_revenue[{i}]", myerson_price(core).revenue, t.item_revenue[i], item=i))
    return out


def check_tail_item_revenue(D: JointDist, t: Thresholds) -> list[Inequality]:
    """Per item with a non-empty tail: the tail's Myerson revenue is at most ``r_i / p_i``."""
    out = []
    for i in range(D.n_items):
        F = marginal(D, i)
        tail = _tail_law(F, t.cut[i])
        if tail is not None:
            p = sum((q for v, q in F.support if v > t.cut[i]), Fraction(0))
            out.append(_leq(f"tail_item_revenue[{i}]", myerson_price(tail).revenue, t.item_revenue[i] / p, item=i))
    return out


def check_tail_oracle(D: JointDist, report: DecompositionReport, mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS) -> Inequality:
    """``Rev(D) <= sum_A p_A Rev(D^A)``: knowing the tail set never hurts the seller."""
    lhs = revenue(D, mode, max_atoms)
    rhs = sum((e.prob * revenue(e.conditional, mode, max_atoms) for e in report.entries), 0 * lhs)
    return _leq("tail_oracle", lhs, rhs, tol=_tol(mode))


def _tail_revenue(report, mode, max_atoms):
    return sum((e.prob * revenue(e.tail_part, mode, max_atoms) for e in report.entries), Fraction(0) if mode == "rational" else 0.0)


def check_core_tail(D: JointDist, report: DecompositionReport, mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS) -> Inequality:
    """``Rev(D) <= Val(core) + sum_A p_A Rev(D_A^T)``.

    Needs tail sets made of whole similarity classes, and within each
    ``D^A`` the tail items independent of the core items.  The finer bound
    ``sum_A p_A (Val(D_A^C) + Rev(D_A^T))`` is checked as a part.
    """
    if not report.class_respecting:
        raise PreconditionViolated("some tail set splits a similarity class")
    if report.core is None:
        raise PreconditionViolated("the all-core event has probability zero")
    for e in report.entries:
        if not independent_split(e.conditional, e.tail):
            raise PreconditionViolated(f"given tail set {e.tail}, tail and core values are dependent")
    lhs = revenue(D, mode, max_atoms)
    tails = _tail_revenue(report, mode, max_atoms)
    fine = tails + sum((e.prob * val(e.core_part) for e in report.entries if e.core_part is not None), Fraction(0))
    tol = _tol(mode)
    part = _leq("core_tail.fine", lhs, fine, tol=tol)
    return _leq("core_tail", lhs, val(report.core) + tails, parts=(part,), tol=tol)


def check_tail_bound(D: JointDist, report: DecompositionReport, mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS) -> Inequality:
    """``sum_A p_A Rev(D_A^T) <= 2 srev(D)`` for semi-independent ``D``."""
    if not check_semi_independent(D):
        raise PreconditionViolated("the tail bound needs a semi-independent law")
    return _leq("tail_bound", _tail_revenue(report, mode, max_atoms), 2 * srev(D), tol=_tol(mode))


def check_core_bound(D: JointDist, report: DecompositionReport) -> Inequality:
    """``Val(core) <= 4 max(srev, brev)`` for semi-independent ``D``.

    Parts: the core's total value has variance at most ``2 r^2`` (``r`` the
    separate revenue), and when ``Val(core) > 4 r`` the bundle alone earns
    at least ``Val(core) / 4``.
    """
    if not check_semi_independent(D):
        raise PreconditionViolated("the core bound needs a semi-independent law")
    if report.core is None:
        raise PreconditionViolated("the all-core event has probability zero")
    r = srev(D)
    b = brev(D)
    core_val = val(report.core)
    var = variance_sum(report.core)
    parts = [_leq("core_bound.variance", var, 2 * r * r)]
    if core_val > 4 * r:
        parts.append(_leq("core_bound.bundle", core_val / 4, b))
    return _leq("core_bound", core_val, 4 * max(r, b), parts=parts, srev=r, brev=b)


def check_tail_class_count(report: DecompositionReport) -> Inequality:
    """Expected number of similarity classes in the tail is at most one."""
    return _leq("tail_classes", report.expected_tail_classes, Fraction(1))


def check_variance_lemma(F: Dist1D, c, t) -> Inequality:
    """``Var(F) <= (2t - 1) c^2`` for ``F`` on ``[0, t c]`` with Myerson revenue at most ``c``."""
    c, t = Fraction(c), Fraction(t)
    if t < 1:
        raise PreconditionViolated(f"t = {t} is below 1")
    if myerson_price(F).revenue > c:
        raise PreconditionViolated(f"Myerson revenue exceeds c = {c}")
    if F.values[-1] > t * c:
        raise PreconditionViolated(f"support reaches {F.values[-1]} beyond t*c = {t * c}")
    return _leq("variance", F.variance(), (2 * t - 1) * c * c)


def check_marginal_subdomain(
    D: JointDist,
    E: JointDist,
    S: Callable[[tuple], bool],
    mode: str = "rational",
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> Inequality:
    """``s Rev(DxE | S) <= s Val(D | S) + Rev(E)`` with ``s = Pr[S]`` under the product.

    ``S`` receives the joint valuation vector (``D``'s items first).
    """
    P = product(D, E, max_atoms=max(max_atoms, len(D) * len(E)))
    s = sum((p for vals, p in P.atoms if S(vals)), Fraction(0))
    if s == 0:
        raise ZeroProbabilitySubdomain("the subdomain has probability zero")
    sub = condition(P, S)
    own = restrict(sub, range(D.n_items))
    lhs = s * revenue(sub, mode, max_atoms)
    rhs = s * val(own) + revenue(E, mode, max_atoms)
    return _leq("marginal_subdomain", lhs, rhs, tol=_tol(mode), prob=s)


def check_class_bound(D: JointDist, mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS) -> Inequality:
    """``Rev(D) <= (k + 1) srev(D)`` for semi-independent ``D`` with ``k`` similarity classes.

    ``k srev`` is recorded alongside.
    """
    if not check_semi_independent(D):
        raise PreconditionViolated("the class bound needs a semi-independent law")
    k = len(D.partition)
    r = srev(D)
    return _leq("class_bound", revenue(D, mode, max_atoms), (k + 1) * r, tol=_tol(mode), classes=k, k_srev=k * r)
