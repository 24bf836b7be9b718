"""End-to-end guarantee checks, seeded instance generators and worst-case search."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .decomposition import CheckSet, Inequality
from .dist import DEFAULT_MAX_ATOMS, CorrelationSpec, Dist1D, build_joint, val
from .errors import BadParams, MechRevError, NotCommonP, WrongKind
from .optmech import revenue
from .pricing import brev, myerson_price, srev
from .specio import spec_hash

# proven worst-case ratio Rev / max(srev, brev) by kind
BOUNDS = {"independent": 6, "semi_independent": 6, "common_base_value": 12}

KIND_ALIASES = {
    "single": "single",
    "independent": "independent",
    "semi": "semi_independent",
    "semi_independent": "semi_independent",
    "cbv": "common_base_value",
    "common_base_value": "common_base_value",
    "linear": "linear",
}

DENOMINATORS = (1, 2, 4)
MAX_NUMERATOR = 16


@dataclass(frozen=True)
class GuaranteeReport:
    kind: str
    srev: object
    brev: object
    rev: object
    val: object
    ratio: object  # rev / max(srev, brev)
    bound: int | None  # None when no concrete constant applies
    holds: bool
    fingerprint: str
    info: dict = field(default_factory=dict, compare=False)


def guarantee_report(
    spec: CorrelationSpec,
    mode: str = "rational",
    max_atoms: int = DEFAULT_MAX_ATOMS,
    seed: int | None = None,
) -> GuaranteeReport:
    """Compare ``Rev`` with the better simple mechanism.

    ``holds`` requires ``srev, brev <= rev <= val`` and, for kinds with a
    proven constant, ``ratio <= bound``.  Linear specs report the feature
    count per item ``k`` and ``log k`` / ``log n`` without asserting a bound.
    """
    D = build_joint(spec, max_atoms)
    s, b, v = srev(D), brev(D), val(D)
    r = revenue(D, mode, max_atoms)
    best = max(s, b)
    ratio = r / best if best else Fraction(1)
    tol = 0 if mode == "rational" else 1e-7
    sandwich = s <= r + tol * max(1, v) and b <= r + tol * max(1, v) and r <= v + tol * max(1, v)
    bound = BOUNDS.get(spec.kind)
    holds = sandwich and (bound is None or ratio <= bound + tol)
    info = {"sandwich": sandwich}
    if spec.kind == "linear":
        k = spec.max_features_per_item()
        n = spec.n_items
        info.update(k=k, log_k=math.log(k), log_n=math.log(n), iid_features=len(set(spec.laws)) == 1)
    fp = spec_hash(spec) if seed is None else f"{seed}:{spec_hash(spec)}"
    return GuaranteeReport(spec.kind, s, b, r, v, ratio, bound, bool(holds), fp, info)


def two_point_reduce(F: Dist1D) -> Dist1D:
    """The law that pays ``u`` with probability ``p`` and 0 otherwise, where
    ``u`` is the Myerson price of ``F`` and ``p`` its sale probability."""
    q = myerson_price(F)
    if q.price == 0:
        return Dist1D.point(0)
    return Dist1D.of([(Fraction(0), 1 - q.sale_prob), (q.price, q.sale_prob)])


def _independent_laws(spec_or_laws) -> list[Dist1D]:
    if isinstance(spec_or_laws, CorrelationSpec):
        if spec_or_laws.kind != "independent":
            raise WrongKind(f"expected an independent spec, got {spec_or_laws.kind}")
        return list(spec_or_laws.laws)
    return list(spec_or_laws)


def check_two_point_ratio(spec_or_laws, max_atoms: int = DEFAULT_MAX_ATOMS) -> CheckSet:
    """Replacing each item by its two-point law keeps ``srev`` and does not raise ``brev``."""
    laws = _independent_laws(spec_or_laws)
    D = build_joint(CorrelationSpec.independent(laws), max_atoms)
    D2 = build_joint(CorrelationSpec.independent([two_point_reduce(F) for F in laws]), max_atoms)
    s, s2, b, b2 = srev(D), srev(D2), brev(D), brev(D2)
    checks = [
        Inequality("srev_kept", s2, s, s2 == s),
        Inequality("brev_not_raised", b2, b, b2 <= b),
    ]
    if b2 and b:
        # srev / brev can only grow
        checks.append(Inequality("ratio_grows", s / b, s2 / b2, s / b <= s2 / b2))
    return CheckSet(tuple(checks))


def _log_lower(n: int) -> Fraction:
    """A rational no larger than ``ln n``."""
    if n == 1:
        return Fraction(0)
    return Fraction(math.log(n)) - Fraction(1, 10**12)


def scaled_iid_pigeonhole(items: Sequence[tuple], exact_limit: int = 4096) -> Inequality:
    """``max_j j p u_j >= srev / (1 + ln n)`` for two-point laws ``(u_j, p)``
    with a common ``p`` and ``u`` sorted descending.

    Checked as ``srev <= (1 + l) max_j j p u_j`` with a rational ``l <= ln n``,
    which implies the real inequality.  When the bundle's sum law has at most
    ``exact_limit`` points, ``srev / brev`` is reported too.
    """
    items = [(Fraction(u), Fraction(p)) for u, p in items]
    if not items:
        raise BadParams("need at least one item")
    ps = {p for _, p in items}
    if len(ps) != 1:
        raise NotCommonP(f"items use {len(ps)} different probabilities")
    p = ps.pop()
    us = sorted((u for u, _ in items), reverse=True)
    n = len(us)
    total = p * sum(us, Fraction(0))
    j_best, best = max(((j, j * p * u) for j, u in enumerate(us, start=1)), key=lambda t: (t[1], -t[0]))
    info = {"n": n, "argmax": j_best, "max_jpu": best, "srev": total}
    law = {Fraction(0): Fraction(1)}
    for u in us:
        nxt: dict = {}
        for s, q in law.items():
            nxt[s] = nxt.get(s, 0) + q * (1 - p)
            nxt[s + u] = nxt.get(s + u, 0) + q * p
        law = {k: v for k, v in nxt.items() if v}
        if len(law) > exact_limit:
            law = None
            break
    if law is not None:
        b = myerson_price(Dist1D(tuple(sorted(law.items())))).revenue
        info["brev"] = b
        info["srev_over_brev"] = total / b if b else None
    rhs = (1 + _log_lower(n)) * best
    return Inequality("pigeonhole", total, rhs, total <= rhs, info=info)


def _grid_value(rng: random.Random, positive: bool = False) -> Fraction:
    lo = 1 if positive else 0
    return Fraction(rng.randint(lo, MAX_NUMERATOR), rng.choice(DENOMINATORS))


def _random_law(rng: random.Random, max_support: int) -> Dist1D:
    size = rng.randint(1, max_support)
    values = [_grid_value(rng) for _ in range(size)]
    if all(v == 0 for v in values):
        values[rng.randrange(size)] = _grid_value(rng, positive=True)
    weights = [rng.randint(1, MAX_NUMERATOR) for _ in range(size)]
    total = sum(weights)
    return Dist1D.of([(v, Fraction(w, total)) for v, w in zip(values, weights)])


def _check_size(name, value, lo=1):
    if not isinstance(value, int) or isinstance(value, bool) or value < lo:
        raise BadParams(f"{name} must be an integer >= {lo}, got {value!r}")


def gen_instance(
    kind: str,
    seed: int,
    n_items: int = 3,
    support: int = 3,
    max_multiplicity: int = 3,
    n_features: int = 3,
    max_entry: int = 2,
) -> CorrelationSpec:
    """Random spec of ``kind`` drawn deterministically from ``seed``.

    Sizes are upper limits: each instance draws its item (or class, or
    feature) count in ``1..n_items`` and every support size in
    ``1..support``.  Values lie on the grid ``0..16`` over ``{1, 2, 4}``;
    probabilities are normalized integer weights.  No item is identically
    zero.
    """
    if kind not in KIND_ALIASES:
        raise BadParams(f"unknown kind {kind!r}")
    kind = KIND_ALIASES[kind]
    for name, value in [("n_items", n_items), ("support", support), ("max_multiplicity", max_multiplicity),
                        ("n_features", n_features), ("max_entry", max_entry)]:
        _check_size(name, value)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise BadParams(f"seed must be an integer, got {seed!r}")
    rng = random.Random(f"{kind}:{seed}")
    name = f"{kind}-{seed}"
    if kind == "single":
        return CorrelationSpec.independent([_random_law(rng, support)], name=name)
    n = rng.randint(1, n_items)
    if kind == "independent":
        return CorrelationSpec.independent([_random_law(rng, support) for _ in range(n)], name=name)
    if kind == "semi_independent":
        classes = [(_random_law(rng, support), rng.randint(1, max_multiplicity)) for _ in range(n)]
        return CorrelationSpec.semi_independent(classes, name=name)
    if kind == "common_base_value":
        laws = [_random_law(rng, support) for _ in range(n)]
        return CorrelationSpec.common_base_value(laws, _random_law(rng, support), name=name)
    l = rng.randint(1, n_features)
    M = [[rng.randint(0, max_entry) for _ in range(n)] for _ in range(l)]
    for j in range(n):
        if all(M[a][j] == 0 for a in range(l)):
            M[rng.randrange(l)][j] = rng.randint(1, max_entry)
    return CorrelationSpec.linear([_random_law(rng, support) for _ in range(l)], M, name=name)


@dataclass(frozen=True)
class SearchResult:
    report: GuaranteeReport
    spec: CorrelationSpec
    evaluated: int


def _perturb_law(rng: random.Random, F: Dist1D) -> Dist1D:
    pairs = list(F.support)
    i = rng.randrange(len(pairs))
    v, p = pairs[i]
    if rng.random() < 0.5:
        # move a value to a neighbouring grid point
        d = rng.choice(DENOMINATORS)
        v = max(Fraction(0), min(Fraction(MAX_NUMERATOR), Fraction(round(v * d) + rng.choice((-1, 1)), d)))
        pairs[i] = (v, p)
    else:
        # shift probability mass between two points, on a 1/64 grid
        j = rng.randrange(len(pairs))
        step = min(Fraction(1, 64), pairs[j][1])
        if i != j and step < pairs[j][1]:
            pairs[i] = (v, p + step)
            pairs[j] = (pairs[j][0], pairs[j][1] - step)
    law = Dist1D.of(pairs)
    if all(x == 0 for x in law.values):
        return F
    return law


def _perturb(rng: random.Random, spec: CorrelationSpec) -> CorrelationSpec:
    laws = list(spec.laws)
    slots = len(laws) + (1 if spec.base is not None else 0)
    k = rng.randrange(slots)
    if k == len(laws):
        return replace(spec, base=_perturb_law(rng, spec.base))
    laws[k] = _perturb_law(rng, laws[k])
    return replace(spec, laws=tuple(laws))


def ratio_search(
    kind: str,
    seeds: Sequence[int],
    steps: int = 20,
    mode: str = "rational",
    max_atoms: int = DEFAULT_MAX_ATOMS,
    **size,
) -> SearchResult:
    """Hill-climb on grid-projected values and probabilities to raise the
    ratio ``Rev / max(srev, brev)``.  Returns the worst instance seen; this
    is a search, not a proof of optimality."""
    worst = None
    evaluated = 0
    for seed in seeds:
        spec = gen_instance(kind, seed, **size)
        rng = random.Random(f"search:{seed}")
        rep = guarantee_report(spec, mode, max_atoms, seed)
        evaluated += 1
        for _ in range(steps):
            cand = _perturb(rng, spec)
            try:
                crep = guarantee_report(cand, mode, max_atoms, seed)
            except MechRevError:  # a move may leave the caps; skip it
                continue
            evaluated += 1
            if crep.ratio > rep.ratio:
                spec, rep = cand, crep
        if worst is None or rep.ratio > worst.report.ratio:
            worst = SearchResult(rep, spec, 0)
    if worst is None:
        raise BadParams("no seeds given")
    return SearchResult(worst.report, worst.spec, evaluated)
