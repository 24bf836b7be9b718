"""Optimal truthful revenue for one additive buyer.

The revenue-optimal mechanism is the optimum of the direct-revelation LP
over the distinct valuation vectors ``v_a`` (probability ``pi_a``):

    maximize   sum_a pi_a (q_a . v_a - u_a)
    subject to u_a >= u_b + q_b . (v_a - v_b)   for every pair a != b
               0 <= q_a <= 1,  u_a >= 0

with ``u_a`` the buyer's utility and ``q_a . v_a - u_a`` the payment.  Two
exact reductions keep the LP small:

* items whose values agree in every atom are merged into one item worth
  their sum (average the allocation over a class: payments and utilities
  are unchanged), and items that are always worth zero are dropped;
* the quadratic family of IC constraints is generated lazily, starting
  from each atom's nearest dominated neighbours.  An optimum of the
  relaxation that satisfies every IC constraint is optimal for the full LP.

In rational mode the relaxation is first solved in floating point to find
the working constraint set, and the final LP is then solved exactly and
every IC constraint is re-checked in exact arithmetic.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import lp
from .dist import DEFAULT_MAX_ATOMS, JointDist, as_fraction, marginal
from .errors import DimensionMismatch, IterationLimit, SupportTooLarge
from .pricing import myerson_price

# new IC constraints per violated atom and round
PAIRS_PER_ATOM = 5
# atoms at or below this count skip the float warm-up in rational mode
SMALL = 12
# float gains below this are certainly not violations of the exact solution
_SAFE_MARGIN = 1e-7
MAX_ROUNDS = 500


@dataclass(frozen=True)
class Menu:
    """Options ``(alloc, payment)``; the zero option is always implicitly available."""

    options: tuple[tuple[tuple, object], ...]
    n_items: int

    def __post_init__(self):
        for alloc, _ in self.options:
            if len(alloc) != self.n_items:
                raise DimensionMismatch(f"allocation {alloc} has {len(alloc)} entries, expected {self.n_items}")
            if any(not 0 <= x <= 1 for x in alloc):
                raise ValueError(f"allocation {alloc} leaves [0, 1]")

    @classmethod
    def of(cls, options, n_items: int) -> "Menu":
        opts = tuple((tuple(alloc), pay) for alloc, pay in options)
        return cls(opts, n_items)


@dataclass(frozen=True)
class RevResult:
    """Optimal revenue with its certificate: option ``a`` of the menu is the
    one designed for atom ``a`` of the distribution."""

    revenue: object
    menu: Menu
    per_atom_utility: tuple
    ic_constraints: int = 0
    rounds: int = 0
    mode: str = "rational"


@dataclass(frozen=True)
class MenuReport:
    revenue: object
    choices: tuple[int, ...]  # option index per atom, -1 for the zero option
    utilities: tuple
    payments: tuple
    ir: tuple[bool, ...]
    # for a menu with one option per atom: the largest gain any atom makes by
    # taking the best option instead of its own
    max_ic_violation: object


def _collapse(D: JointDist, collapse: bool) -> tuple[list[list[int]], list[list[Fraction]]]:
    """Item groups and the per-atom value of each group."""
    vectors = D.vectors
    cols: dict[tuple, list[int]] = {}
    groups = []
    for j in range(D.n_items):
        col = tuple(v[j] for v in vectors)
        if all(x == 0 for x in col):
            continue
        if collapse and col in cols:
            cols[col].append(j)
        else:
            cols[col] = [j]
            groups.append(cols[col])
    W = [[len(g) * v[g[0]] for g in groups] for v in vectors]
    return groups, W


def _build_lp(W, probs, pairs) -> lp.LinearProgram:
    N, k = len(W), len(W[0])
    width = k + 1
    objective = {}
    for a in range(N):
        for g in range(k):
            if W[a][g]:
                objective[a * width + g] = probs[a] * W[a][g]
        objective[a * width + k] = -probs[a]
    bounds = ([(0, 1)] * k + [(0, None)]) * N
    prog = lp.LinearProgram(objective, bounds=bounds, n_vars=N * width)
    for a, b in pairs:
        row = {b * width + k: 1, a * width + k: -1}
        for g in range(k):
            d = W[a][g] - W[b][g]
            if d:
                row[b * width + g] = d
        prog.constraints.append(lp.Constraint(row, "<=", 0))
    return prog


def _initial_pairs(Wf: np.ndarray) -> set:
    """For each atom and coordinate, the nearest atom below it in that coordinate
    and weakly below it in all others."""
    N, k = Wf.shape
    below = (Wf[None, :, :] <= Wf[:, None, :]).all(axis=2)
    dist = np.abs(Wf[:, None, :] - Wf[None, :, :]).sum(axis=2)
    pairs = set()
    for g in range(k):
        mask = below & (Wf[None, :, g] < Wf[:, None, g])
        d = np.where(mask, dist, np.inf)
        best = d.argmin(axis=1)
        for a in np.flatnonzero(np.isfinite(d.min(axis=1))):
            pairs.add((int(a), int(best[a])))
    return pairs


def _gains(Wf: np.ndarray, Q: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``gain[a, b]``: what atom ``a`` gains by taking ``b``'s option over its own."""
    G = Wf @ Q.T - np.einsum("bg,bg->b", Q, Wf)[None, :] + U[None, :] - U[:, None]
    np.fill_diagonal(G, -np.inf)
    return G


def _split(x, N: int, k: int):
    width = k + 1
    Q = [[x[a * width + g] for g in range(k)] for a in range(N)]
    U = [x[a * width + k] for a in range(N)]
    return Q, U


def _add_violated(G: np.ndarray, pairs: dict, threshold: float) -> int:
    added = 0
    for a in np.flatnonzero((G > threshold).any(axis=1)):
        row = G[a]
        order = np.argsort(-row, kind="stable")
        taken = 0
        for b in order:
            if row[b] <= threshold or taken == PAIRS_PER_ATOM:
                break
            if (int(a), int(b)) not in pairs:
                pairs[int(a), int(b)] = None
                added += 1
                taken += 1
    return added


def _solve(prog, mode, tol, guided, hint=None):
    sol = lp.solve(prog, mode=mode, tol=tol, guided=guided, hint=hint)
    if not sol.optimal:
        # the IC LP is feasible (the zero mechanism) and bounded (q <= 1)
        raise IterationLimit(f"IC relaxation reported {sol.status}")
    return sol


def _exact_violations(W, Q, U, candidates) -> list:
    bad = []
    for a, b in candidates:
        gain = U[b] - U[a] + sum((q * (wa - wb) for q, wa, wb in zip(Q[b], W[a], W[b])), Fraction(0))
        if gain > 0:
            bad.append((a, b))
    return bad


def optimal_revenue(
    D: JointDist,
    mode: str = "rational",
    max_atoms: int = DEFAULT_MAX_ATOMS,
    tol: float = 1e-9,
    collapse: bool = True,
) -> RevResult:
    """Revenue of the optimal truthful mechanism for ``D``.

    ``mode="rational"`` is exact; ``mode="float"`` meets every constraint
    within ``tol``.  ``collapse=False`` keeps identical items apart (same
    answer, bigger LP).
    """
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    N = len(D.atoms)
    if N > max_atoms:
        raise SupportTooLarge(f"{N} atoms exceed the cap of {max_atoms}")
    probs = D.probs
    groups, W = _collapse(D, collapse)
    k = len(groups)
    if k == 0:
        zero = (Fraction(0) if mode == "rational" else 0.0)
        menu = Menu.of([((zero,) * D.n_items, zero)] * N, D.n_items)
        return RevResult(zero, menu, (zero,) * N, 0, 0, mode)

    Wf = np.array([[float(w) for w in row] for row in W])
    # insertion-ordered, so each round's LP extends the previous one and
    # the float solve can warm-start from its tableau
    pairs = dict.fromkeys(sorted(_initial_pairs(Wf)))
    rounds = 0
    hint = None

    if mode == "float" or N > SMALL:
        while True:
            rounds += 1
            if rounds > MAX_ROUNDS:
                raise IterationLimit(f"constraint generation did not settle in {MAX_ROUNDS} rounds")
            sol = _solve(_build_lp(W, probs, pairs), "float", tol, False, hint)
            hint = sol
            Q, U = _split(sol.assignment, N, k)
            G = _gains(Wf, np.array(Q), np.array(U))
            if not _add_violated(G, pairs, tol):
                break
        if mode == "float":
            return _result(D, groups, W, probs, Q, U, len(pairs), rounds, mode)

    while True:
        rounds += 1
        if rounds > MAX_ROUNDS:
            raise IterationLimit(f"constraint generation did not settle in {MAX_ROUNDS} rounds")
        sol = _solve(_build_lp(W, probs, pairs), "rational", tol, N > SMALL, hint)
        hint = None
        Q, U = _split(sol.assignment, N, k)
        G = _gains(Wf, np.array(Q, dtype=float), np.array(U, dtype=float))
        near = [(int(a), int(b)) for a, b in zip(*np.nonzero(G > -_SAFE_MARGIN)) if (a, b) not in pairs]
        bad = _exact_violations(W, Q, U, near)
        if not bad:
            break
        # the exact optimum may break several constraints at once
        bad.sort(key=lambda ab: -G[ab])
        per_atom: dict[int, int] = {}
        for a, b in bad:
            if per_atom.get(a, 0) < PAIRS_PER_ATOM:
                pairs[a, b] = None
                per_atom[a] = per_atom.get(a, 0) + 1
    return _result(D, groups, W, probs, Q, U, len(pairs), rounds, mode)


@functools.lru_cache(maxsize=1024)
def revenue(D: JointDist, mode: str = "rational", max_atoms: int = DEFAULT_MAX_ATOMS):
    """``optimal_revenue(D).revenue``, memoized; zero for ``None`` (no items)."""
    if D is None:
        return Fraction(0) if mode == "rational" else 0.0
    return optimal_revenue(D, mode=mode, max_atoms=max_atoms).revenue


def _result(D, groups, W, probs, Q, U, n_pairs, rounds, mode) -> RevResult:
    zero = Fraction(0) if mode == "rational" else 0.0
    options = []
    revenue = zero
    for a, (q, u) in enumerate(zip(Q, U)):
        alloc = [zero] * D.n_items
        for g, items in enumerate(groups):
            for i in items:
                alloc[i] = q[g]
        pay = sum((qg * wg for qg, wg in zip(q, W[a])), zero) - u
        if mode == "float":
            alloc = [min(max(float(x), 0.0), 1.0) for x in alloc]
            pay = float(pay)
        options.append((tuple(alloc), pay))
        revenue += probs[a] * pay if mode == "rational" else float(probs[a]) * pay
    menu = Menu.of(options, D.n_items)
    return RevResult(revenue, menu, tuple(U), n_pairs, rounds, mode)


TIE_BREAKS = ("low_payment", "high_payment")


def verify_menu(D: JointDist, m: Menu, tie_break: str = "low_payment") -> MenuReport:
    """Buyer best response to ``m`` for every atom.

    The buyer takes the option of highest utility, breaking ties toward the
    lower payment (``"high_payment"``: the higher one) and then the lower
    index.  The implicit zero option is taken only when every listed option
    has negative utility.
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    sign = -1 if tie_break == "low_payment" else 1
    if m.n_items != D.n_items:
        raise DimensionMismatch(f"menu covers {m.n_items} items, distribution has {D.n_items}")
    choices, utils, pays, ir = [], [], [], []
    revenue = 0
    gap = 0
    for a, (vals, p) in enumerate(D.atoms):
        best = None
        own = None
        for idx, (alloc, pay) in enumerate(m.options):
            util = sum(x * v for x, v in zip(alloc, vals)) - pay
            key = (util, sign * pay, -idx)
            if best is None or key > best[0]:
                best = (key, idx, util, pay)
            if idx == a:
                own = util
        if best is None or best[2] < 0:
            choice, util, pay = -1, 0, 0
        else:
            _, choice, util, pay = best
        if len(m.options) == len(D.atoms) and own is not None:
            gap = max(gap, util - own)
        choices.append(choice)
        utils.append(util)
        pays.append(pay)
        ir.append(util >= 0)
        revenue += p * pay
    return MenuReport(revenue, tuple(choices), tuple(utils), tuple(pays), tuple(ir), gap)


def simulate_menu_revenue(D: JointDist, m: Menu, samples: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the menu's revenue and its standard error.

    Atoms are drawn by inverse CDF over their probabilities from a
    ``numpy`` PCG64 generator seeded with ``seed``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    report = verify_menu(D, m)
    pay = np.array([float(x) for x in report.payments])
    cum = np.cumsum([float(p) for p in D.probs])
    cum[-1] = 1.0
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cum, rng.random(samples), side="right")
    draws = pay[idx]
    est = float(draws.mean())
    se = float(draws.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return est, se


def bundle_menu(n_items: int, price) -> Menu:
    """The grand bundle at ``price``."""
    return Menu.of([((Fraction(1),) * n_items, as_fraction(price))], n_items)


def separate_menu(D: JointDist, prices: Sequence | None = None) -> Menu:
    """Every subset of items at the sum of per-item prices (Myerson prices by default)."""
    n = D.n_items
    if prices is None:
        prices = [myerson_price(marginal(D, j)).price for j in range(n)]
    options = []
    for mask in itertools.product((0, 1), repeat=n):
        if any(mask):
            alloc = tuple(Fraction(x) for x in mask)
            options.append((alloc, sum((as_fraction(p) for p, x in zip(prices, mask) if x), Fraction(0))))
    return Menu.of(options, n)
