"""Two-phase primal simplex on an explicit tableau.

Two arithmetic modes share one front end:

* ``"float"``: a dense numpy tableau with feasibility tolerance ``tol``.
  Finite upper bounds are handled by complementing variables (bounded
  simplex), so they cost no tableau rows.  The tableau is rebuilt from the
  original system every ``REFACTOR_EVERY`` pivots to shed round-off.
* ``"rational"``: exact.  The tableau is stored as sparse rows of
  ``gmpy2.mpq`` with a column -> rows index, so a pivot touches only the
  non-zeros it must, and upper bounds are explicit rows.  By default the
  float engine runs first and its final basis is installed in the exact
  tableau by exact pivots; the exact phase 2 then resumes from there and
  only stops on an exactly optimal basis.  When the float basis cannot be
  installed (singular or not primal feasible) the exact solve restarts
  from scratch.  Results come back as :class:`fractions.Fraction`.

Pivoting rules: ``"bland"`` (lowest index enters; lowest basic index leaves
on ratio ties) or ``"dantzig"`` (largest reduced cost enters, ties in the
ratio test broken lexicographically, which rules out cycling).  Float mode
uses a Harris ratio test before the lexicographic tie-break.  Every path is
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import gmpy2
import numpy as np

from .errors import InvalidLP, IterationLimit

Number = Union[int, Fraction, float]
Coeffs = Union[Sequence[Number], Mapping[int, Number]]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEFAULT_MAX_PIVOTS = 10**6
PIVOT_TOL = 1e-7
REFACTOR_EVERY = 100
PRICING = "steepest"
_DROP = 1e-12
# acceptable pivot size relative to the largest tied candidate
STABLE_FRACTION = 0.1
# relative size of the right-hand side perturbation against degeneracy
PERTURB = 1e-6
PERTURB_SEED = 20240601


@dataclass(frozen=True)
class Constraint:
    coeffs: Coeffs
    relation: str  # "<=" or "="
    bound: Number


@dataclass
class LinearProgram:
    """maximize ``objective . x`` subject to ``constraints`` and ``bounds``.

    ``bounds`` holds one ``(lower, upper)`` pair per variable; ``upper`` may be
    ``None`` for +inf.  Omitted bounds default to ``(0, None)``.  Coefficient
    vectors may be dense sequences or sparse ``{index: value}`` mappings.
    """

    objective: Coeffs
    constraints: list[Constraint] = field(default_factory=list)
    bounds: list[tuple[Number, Number | None]] | None = None
    n_vars: int | None = None

    def __post_init__(self):
        if self.n_vars is None:
            if isinstance(self.objective, Mapping):
                raise InvalidLP("n_vars is required with a sparse objective")
            self.n_vars = len(self.objective)
        if not isinstance(self.objective, Mapping) and len(self.objective) != self.n_vars:
            raise InvalidLP("objective length does not match variable count")
        if self.bounds is None:
            self.bounds = [(0, None)] * self.n_vars
        if len(self.bounds) != self.n_vars:
            raise InvalidLP("bounds length does not match variable count")
        for lo, up in self.bounds:
            if lo is None:
                raise InvalidLP("lower bounds must be finite")
            if up is not None and up < lo:
                raise InvalidLP(f"lower bound {lo} exceeds upper bound {up}")
        for con in self.constraints:
            self._check(con)

    def _check(self, con: Constraint) -> None:
        if con.relation not in ("<=", "="):
            raise InvalidLP(f"unknown relation {con.relation!r}")
        if isinstance(con.coeffs, Mapping):
            if any(not 0 <= j < self.n_vars for j in con.coeffs):
                raise InvalidLP("constraint index out of range")
        elif len(con.coeffs) != self.n_vars:
            raise InvalidLP("constraint length does not match variable count")

    def add(self, coeffs: Coeffs, relation: str, bound: Number) -> None:
        con = Constraint(coeffs, relation, bound)
        self._check(con)
        self.constraints.append(con)


@dataclass
class LpSolution:
    status: str
    objective_value: Number | None = None
    assignment: list[Number] | None = None
    pivots: int = 0
    # final float tableau, reusable as the starting basis of an exact solve
    basis_hint: object = field(default=None, repr=False, compare=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _items(coeffs: Coeffs):
    if isinstance(coeffs, Mapping):
        return coeffs.items()
    return enumerate(coeffs)


def _to_mpq(x) -> gmpy2.mpq:
    # floats are read as their shortest decimal repr, so 0.6 means 3/5
    if isinstance(x, float):
        x = Fraction(repr(x))
    return gmpy2.mpq(x)


def _pivot_cap(pivots: int, max_pivots: int, rows: int) -> None:
    if pivots >= max_pivots:
        raise IterationLimit(f"pivot cap {max_pivots} reached on a {rows}-row tableau")


class _SparseTableau:
    """Exact tableau; rows are dicts ``{col: mpq}``."""

    tol = 0
    pivot_tol = 0

    def __init__(self):
        self.rows: list[dict] = []
        self.rhs: list = []
        self.basis: list[int] = []
        self.cols: dict[int, set] = {}
        self.obj: dict = {}
        self.obj_val = gmpy2.mpq(0)
        self.pivots = 0
        # column -> row position in the initial basis, for lexicographic ties
        self.origin: dict[int, int] = {}
        self.limit = float("inf")

    def add_row(self, row: dict, rhs, basic: int) -> None:
        i = len(self.rows)
        self.rows.append(row)
        self.rhs.append(rhs)
        self.basis.append(basic)
        self.origin[basic] = i
        for k in row:
            self.cols.setdefault(k, set()).add(i)

    def pivot(self, r: int, e: int) -> None:
        self.pivots += 1
        rows, cols = self.rows, self.cols
        prow = rows[r]
        inv = 1 / prow[e]
        for k in prow:
            prow[k] = prow[k] * inv
        self.rhs[r] = self.rhs[r] * inv
        prhs = self.rhs[r]
        pitems = [(k, v) for k, v in prow.items() if k != e]
        for i in list(cols[e]):
            if i == r:
                continue
            row = rows[i]
            f = row.pop(e)
            cols[e].discard(i)
            for k, v in pitems:
                nv = row.get(k)
                if nv is None:
                    row[k] = -f * v
                    cols.setdefault(k, set()).add(i)
                else:
                    nv -= f * v
                    if nv:
                        row[k] = nv
                    else:
                        del row[k]
                        cols[k].discard(i)
            self.rhs[i] -= f * prhs
        f = self.obj.pop(e, None)
        if f is not None:
            obj = self.obj
            for k, v in pitems:
                nv = obj.get(k, 0) - f * v
                if nv:
                    obj[k] = nv
                else:
                    obj.pop(k, None)
            self.obj_val += f * prhs
        self.basis[r] = e

    def set_objective(self, costs: dict) -> None:
        """Install reduced costs for ``max costs . x`` w.r.t. the current basis."""
        obj = dict(costs)
        val = gmpy2.mpq(0)
        for i, b in enumerate(self.basis):
            cb = costs.get(b)
            if not cb:
                continue
            for k, v in self.rows[i].items():
                nv = obj.get(k, 0) - cb * v
                if nv:
                    obj[k] = nv
                else:
                    obj.pop(k, None)
            val += cb * self.rhs[i]
        for b in self.basis:
            obj.pop(b, None)
        self.obj = obj
        self.obj_val = val

    def run(self, max_pivots: int, rule: str) -> str:
        while True:
            obj, limit = self.obj, self.limit
            cands = [k for k, v in obj.items() if v > 0 and k < limit]
            if not cands:
                return OPTIMAL
            if rule == "bland":
                e = min(cands)
            else:
                e = min(cands, key=lambda k: (-obj[k], k))
            r = self._ratio_test(e, rule)
            if r < 0:
                return UNBOUNDED
            _pivot_cap(self.pivots, max_pivots, len(self.rows))
            self.pivot(r, e)

    def _ratio_test(self, e: int, rule: str) -> int:
        rows, rhs = self.rows, self.rhs
        best, ties = None, []
        for i in self.cols.get(e, ()):
            a = rows[i][e]
            if a <= 0:
                continue
            ratio = rhs[i] / a
            if best is None or ratio < best:
                best, ties = ratio, [i]
            elif ratio == best:
                ties.append(i)
        if not ties:
            return -1
        if len(ties) == 1:
            return ties[0]
        if rule == "bland":
            return min(ties, key=lambda i: self.basis[i])
        return min(ties, key=lambda i: _LexKey(self._lex_vector(i, e)))

    def _lex_vector(self, i: int, e: int) -> list:
        pos = self.origin
        a = self.rows[i][e]
        return sorted((pos[k], v / a) for k, v in self.rows[i].items() if k in pos)

    def crash(self, target: set[int]) -> bool:
        """Pivot the columns of ``target`` into the basis; False if singular."""
        for e in sorted(target):
            if e in self.basis:
                continue
            rows = [i for i in self.cols.get(e, ()) if self.basis[i] not in target]
            if not rows:
                return False
            r = min(rows, key=lambda i: (len(self.rows[i]), i))
            self.pivot(r, e)
        return True

    def drop_rows(self, keep: list[int]) -> None:
        self.rows = [self.rows[i] for i in keep]
        self.rhs = [self.rhs[i] for i in keep]
        self.basis = [self.basis[i] for i in keep]
        self.cols = {}
        for i, row in enumerate(self.rows):
            for k in row:
                self.cols.setdefault(k, set()).add(i)

    def entry(self, i: int, k: int):
        return self.rows[i].get(k, 0)

    def row_support(self, i: int):
        return list(self.rows[i])


class _LexKey:
    """Orders sparse ``[(position, value)]`` vectors lexicographically."""

    __slots__ = ("vec",)

    def __init__(self, vec):
        self.vec = vec

    def __lt__(self, other):
        x, y = self.vec, other.vec
        i = j = 0
        while i < len(x) or j < len(y):
            px = x[i][0] if i < len(x) else None
            py = y[j][0] if j < len(y) else None
            if py is None or (px is not None and px < py):
                return x[i][1] < 0
            if px is None or py < px:
                return y[j][1] > 0
            if x[i][1] != y[j][1]:
                return x[i][1] < y[j][1]
            i += 1
            j += 1
        return False


class _DenseTableau:
    """Float bounded-variable tableau held in one numpy array.

    A variable at its upper bound ``U`` is complemented (``x' = U - x``) so
    every nonbasic variable sits at zero; ``flipped`` records which.
    """

    pivot_tol = PIVOT_TOL

    def __init__(self, rows, rhs, basis, ncols: int, tol: float, upper=None):
        self.A = np.zeros((len(rows), ncols))
        for i, row in enumerate(rows):
            for k, v in row.items():
                self.A[i, k] = v
        self.rhs = np.array(rhs, dtype=float)
        # the original system, kept for refactorization
        self.A0 = self.A.copy()
        self._find_units()
        self.b0 = self.rhs.copy()
        # right-hand side perturbation currently applied (see perturb)
        self.delta = np.zeros(len(rows))
        self.upper = np.full(ncols, np.inf)
        if upper is not None:
            self.upper[: len(upper)] = upper
        self.flipped = np.zeros(ncols, dtype=bool)
        self.basis = list(basis)
        # initial basis columns in row order, for lexicographic ties
        self.origin = list(basis)
        self.tol = tol
        self.costs: dict = {}
        self.obj = np.zeros(ncols)
        self.obj_val = 0.0
        self.pivots = 0
        self.limit = ncols

    def _find_units(self) -> None:
        # row of the single nonzero for unit-like columns, else -1
        nnz = np.count_nonzero(self.A0, axis=0)
        if self.A0.shape[0] == 0:
            self.unit_rows = np.full(self.A0.shape[1], -1)
            return
        self.unit_rows = np.where(nnz == 1, np.abs(self.A0).argmax(axis=0), -1)

    def pivot(self, r: int, e: int) -> None:
        self.pivots += 1
        A = self.A
        piv = A[r, e]
        A[r] /= piv
        self.rhs[r] /= piv
        A[r, e] = 1.0
        col = A[:, e].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            # the pivot row is sparse: only its nonzero columns change
            nc = np.flatnonzero(A[r])
            block = np.ix_(nz, nc)
            sub = A[block] - np.outer(col[nz], A[r, nc])
            # snap round-off so degenerate vertices stay exactly degenerate
            sub[np.abs(sub) < _DROP] = 0.0
            A[block] = sub
            A[nz, e] = 0.0
            self.rhs[nz] -= col[nz] * self.rhs[r]
        f = self.obj[e]
        if f != 0.0:
            self.obj -= f * A[r]
            self.obj[e] = 0.0
            self.obj_val += f * self.rhs[r]
        self.basis[r] = e

    def _flip_column(self, j: int) -> None:
        u = self.upper[j]
        col = self.A[:, j]
        self.rhs -= col * u
        self.A[:, j] = -col
        self.obj_val += self.obj[j] * u
        self.obj[j] = -self.obj[j]
        self.flipped[j] = not self.flipped[j]

    def _flip_row(self, r: int) -> None:
        b = self.basis[r]
        self.A[r] = -self.A[r]
        self.A[r, b] = 1.0
        self.rhs[r] = self.upper[b] - self.rhs[r]
        self.flipped[b] = not self.flipped[b]

    def set_objective(self, costs: dict) -> None:
        self.costs = costs
        c = np.zeros(self.A.shape[1])
        for k, v in costs.items():
            c[k] = v
        f = self.flipped
        const = float(c[f] @ self.upper[f]) if f.any() else 0.0
        c = np.where(f, -c, c)
        cb = c[self.basis]
        self.obj = c - cb @ self.A
        self.obj[self.basis] = 0.0
        self.obj_val = const + float(cb @ self.rhs)

    def refactor(self, clip: bool = True) -> bool:
        """Recompute the tableau from the original system and current basis.
        False (tableau untouched) when the basis matrix is singular."""
        f = self.flipped
        A = np.where(f, -self.A0, self.A0)
        b = self.b0 - self.A0[:, f] @ self.upper[f] if f.any() else self.b0
        M = np.column_stack([A, b])
        try:
            X = self._basis_solve(A, M)
        except np.linalg.LinAlgError:
            return False
        self.A, self.rhs = X[:, :-1], X[:, -1].copy()
        self.A[np.abs(self.A) < _DROP] = 0.0
        self.A[np.arange(len(self.basis)), self.basis] = 1.0
        if clip:
            self._clip()
        self.set_objective(self.costs)
        return True

    def _basis_solve(self, A: np.ndarray, M: np.ndarray) -> np.ndarray:
        """Solve ``B X = M`` for the basis matrix ``B``, eliminating unit
        (slack or artificial) basic columns first so only the structural
        block is factored."""
        m = len(self.basis)
        unit_row = {}
        for pos, j in enumerate(self.basis):
            i = self.unit_rows[j]
            if i >= 0 and i not in unit_row:
                unit_row[i] = pos
        S = [pos for pos in range(m) if self.unit_rows[self.basis[pos]] < 0 or unit_row.get(self.unit_rows[self.basis[pos]]) != pos]
        rest = np.array([i for i in range(m) if i not in unit_row], dtype=int)
        cols = [self.basis[pos] for pos in S]
        X = np.empty_like(M)
        if S:
            XS = np.linalg.solve(A[np.ix_(rest, cols)], M[rest])
            X[S] = XS
            resid = M - A[:, cols] @ XS
        else:
            resid = M
        for i, pos in unit_row.items():
            X[pos] = resid[i] / A[i, self.basis[pos]]
        return X

    def _clip(self) -> None:
        self.rhs[np.abs(self.rhs) < self.tol] = 0.0
        np.clip(self.rhs, 0.0, self.upper[self.basis], out=self.rhs)

    def run(self, max_pivots: int, rule: str) -> str:
        tol = self.tol
        bland = rule == "bland"
        while True:
            d = self.obj[: self.limit]
            cands = np.flatnonzero(d > tol)
            if cands.size == 0:
                return OPTIMAL
            if bland:
                e = int(cands[0])
            elif PRICING == "steepest":
                sub = self.A[:, cands]
                score = d[cands] ** 2 / (1.0 + np.einsum("ij,ij->j", sub, sub))
                e = int(cands[np.argmax(score)])
            else:
                e = int(cands[np.argmax(d[cands])])
            col = self.A[:, e]
            ub = self.upper[self.basis]
            # rows blocking at a lower bound, then rows blocking at an upper one
            lo_rows = np.flatnonzero(col > PIVOT_TOL)
            up_rows = np.flatnonzero((col < -PIVOT_TOL) & np.isfinite(ub))
            rows = np.concatenate([lo_rows, up_rows])
            u_e = self.upper[e]
            if rows.size == 0:
                if np.isinf(u_e):
                    return UNBOUNDED
                self._flip_column(e)
                self._clip()
                continue
            room = np.concatenate([self.rhs[lo_rows], ub[up_rows] - self.rhs[up_rows]])
            room = np.maximum(room, 0.0)
            mag = np.abs(col[rows])
            # Harris two-pass test: relax every step by tol, then choose
            # among the rows that block within the relaxed step
            bound = ((room + tol) / mag).min()
            if u_e <= bound:
                self._flip_column(e)
                self._clip()
                continue
            ties = np.flatnonzero(room / mag <= bound)
            # among rows blocking within the relaxed step, refuse pivots much
            # smaller than the best one available
            ties = ties[mag[ties] >= STABLE_FRACTION * mag[ties].max()]
            if bland:
                k = int(min(ties, key=lambda t: self.basis[rows[t]]))
            elif ties.size > 1:
                k = self._lex_min(rows, ties, col)
            else:
                k = int(ties[0])
            r = int(rows[k])
            _pivot_cap(self.pivots, max_pivots, len(self.basis))
            if k >= lo_rows.size:
                self._flip_row(r)
            self.pivot(r, e)
            self._clip()
            if self.pivots % REFACTOR_EVERY == 0:
                self.refactor()

    def perturb(self, rows: list[int]) -> None:
        """Loosen the given rows by small distinct amounts so that almost no
        pivot is degenerate.  Only valid before the first pivot."""
        rng = np.random.default_rng(PERTURB_SEED)
        d = np.zeros(len(self.basis))
        d[rows] = PERTURB * (1 + np.abs(self.b0[rows])) * (1 + rng.random(len(rows)))
        self.delta = d
        self.b0 = self.b0 + d
        self.rhs = self.rhs + d

    def unperturb(self, max_pivots: int) -> bool:
        """Restore the true right-hand side and repair the basic solution with
        dual simplex pivots (reduced costs stay optimal).  False if repair fails."""
        if not self.delta.any():
            return True
        self.b0 = self.b0 - self.delta
        self.delta = np.zeros_like(self.delta)
        self.refactor(clip=False)
        return self.dual_repair(max_pivots)

    def dual_repair(self, max_pivots: int) -> bool:
        """Dual simplex from a basis whose reduced costs are optimal but whose
        basic values may leave their bounds.  False if no pivot can fix a row."""
        tol = self.tol
        while True:
            ub = self.upper[self.basis]
            low = -self.rhs
            high = self.rhs - ub
            viol = np.maximum(low, high)
            r = int(np.argmax(viol))
            if viol[r] <= tol:
                self._clip()
                return True
            if high[r] > low[r]:
                self._flip_row(r)
            row = self.A[r, : self.limit]
            cand = np.flatnonzero(row < -PIVOT_TOL)
            if cand.size == 0:
                return False
            ratio = np.maximum(-self.obj[cand], 0.0) / -row[cand]
            best = ratio.min()
            ties = cand[ratio <= best + tol]
            e = int(ties[np.argmax(-row[ties])])
            _pivot_cap(self.pivots, max_pivots, len(self.basis))
            self.pivot(r, e)
            if self.pivots % REFACTOR_EVERY == 0 and not self.refactor(clip=False):
                return False

    def _lex_min(self, rows: np.ndarray, ties: np.ndarray, col: np.ndarray) -> int:
        """Lexicographic ratio test over the initial basis columns."""
        idx = rows[ties]
        M = self.A[np.ix_(idx, self.origin)] / np.abs(col[idx])[:, None]
        # columns where every tied row agrees cannot separate them
        spread = np.flatnonzero(M.max(axis=0) - M.min(axis=0) > self.tol)
        alive = np.arange(ties.size)
        for j in spread:
            v = M[alive, j]
            alive = alive[v <= v.min() + self.tol]
            if alive.size == 1:
                break
        return int(ties[alive[0]])

    def drop_rows(self, keep: list[int]) -> None:
        self.A0 = self.A0[keep]
        self.b0 = self.b0[keep]
        self.delta = self.delta[keep]
        self._find_units()
        self.A = self.A[keep]
        self.rhs = self.rhs[keep]
        self.basis = [self.basis[i] for i in keep]

    def entry(self, i: int, k: int):
        return self.A[i, k]

    def row_support(self, i: int):
        return [int(k) for k in np.flatnonzero(np.abs(self.A[i]) > self.tol)]

    def values(self) -> np.ndarray:
        x = np.zeros(self.A.shape[1])
        x[self.basis] = self.rhs
        f = self.flipped
        x[f] = self.upper[f] - x[f]
        return x


@dataclass
class _StandardForm:
    """``rows . y = rhs`` over shifted variables ``y = x - lo`` plus slacks.

    Columns: structural ``[0, n)``, constraint slacks ``[n, bound_start)``,
    upper-bound row slacks ``[bound_start, art_start)`` (exact form only),
    artificials from ``art_start``.
    """

    rows: list
    rhs: list
    basis: list
    n_cols: int
    art_start: int
    bound_start: int
    n_artificial: int
    lows: list
    upper: list  # shifted upper bounds, float form only
    bound_slack: dict  # structural -> its bound-row slack, exact form only


def _standard_form(lp: LinearProgram, conv, bound_rows: bool) -> _StandardForm:
    n = lp.n_vars
    lows = [conv(lo) for lo, _ in lp.bounds]
    # every inequality gets its own slack column, in constraint order; the
    # slack of a row with negative rhs turns into a surplus after the flip
    rows, rhs, basis = [], [], []
    pending = []
    col = n
    for con in lp.constraints:
        row = {}
        b = conv(con.bound)
        for j, a in _items(con.coeffs):
            a = conv(a)
            if a != 0:
                row[j] = row.get(j, 0) + a
                b -= a * lows[j]
        slack = None
        if con.relation == "<=":
            slack = col
            col += 1
            row[slack] = conv(1)
        if slack is not None and b >= 0:
            rows.append(row)
            rhs.append(b)
            basis.append(slack)
        else:
            if b < 0:
                row = {k: -v for k, v in row.items()}
                b = -b
            pending.append((row, b))
    bound_start = col
    bound_slack = {}
    upper = []
    for j, (lo, up) in enumerate(lp.bounds):
        span = None if up is None else conv(up) - lows[j]
        if bound_rows:
            if span is not None:
                bound_slack[j] = col
                rows.append({j: conv(1), col: conv(1)})
                rhs.append(span)
                basis.append(col)
                col += 1
        else:
            upper.append(np.inf if span is None else float(span))
    art_start = col
    for row, b in pending:
        row[col] = conv(1)
        rows.append(row)
        rhs.append(b)
        basis.append(col)
        col += 1
    return _StandardForm(rows, rhs, basis, col, art_start, bound_start, len(pending), lows, upper, bound_slack)


def _phase_one(tab, form: _StandardForm, conv, max_pivots: int, rule: str, feas_tol) -> bool:
    """Drive the artificials to zero; False when the LP is infeasible."""
    if form.n_artificial:
        tab.set_objective({k: conv(-1) for k in range(form.art_start, form.n_cols)})
        tab.run(max_pivots, rule)
        if tab.obj_val < -feas_tol:
            return False
        _drive_out_artificials(tab, form.art_start)
    # artificial columns stay in the tableau (the lexicographic rule reads
    # them) but may never re-enter
    tab.limit = form.art_start
    return True


def _costs(lp: LinearProgram, conv) -> dict:
    costs = {}
    for j, c in _items(lp.objective):
        c = conv(c)
        if c != 0:
            costs[j] = costs.get(j, 0) + c
    return costs


def _solve_float(lp: LinearProgram, tol: float, max_pivots: int, rule: str, perturb: bool = True):
    form = _standard_form(lp, float, bound_rows=False)
    tab = _DenseTableau(form.rows, form.rhs, form.basis, form.n_cols, tol, form.upper)
    # loosen only inequality rows that start with their slack basic: the
    # feasible set grows slightly and its recession cone is unchanged
    loose = [i for i, b in enumerate(form.basis) if b < form.art_start]
    perturbed = perturb and rule == "dantzig" and bool(loose)
    if perturbed:
        tab.perturb(loose)
    if not _phase_one(tab, form, float, max_pivots, rule, tol * max(1, form.n_artificial)):
        return LpSolution(INFEASIBLE, pivots=tab.pivots), None
    tab.set_objective(_costs(lp, float))
    if tab.run(max_pivots, rule) == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots), None
    if perturbed and not tab.unperturb(max_pivots):
        sol, guide = _solve_float(lp, tol, max_pivots, rule, perturb=False)
        sol.pivots += tab.pivots
        return sol, guide
    return _finish_float(lp, form, tab, max_pivots, rule)


def _finish_float(lp: LinearProgram, form: _StandardForm, tab: _DenseTableau, max_pivots: int, rule: str):
    # read the answer off a freshly factored tableau; resume if the
    # cleaned-up reduced costs still show an improving column
    for _ in range(3):
        tab.refactor()
        if not (tab.obj[: tab.limit] > tab.tol).any():
            break
        if tab.run(max_pivots, rule) == UNBOUNDED:
            return LpSolution(UNBOUNDED, pivots=tab.pivots), None
    y = tab.values()[: lp.n_vars]
    x = [float(yi + lo) for yi, lo in zip(y, form.lows)]
    value = float(sum(float(c) * x[j] for j, c in _items(lp.objective)))
    return LpSolution(OPTIMAL, value, x, tab.pivots, (form, tab)), (form, tab)


def _solve_float_warm(lp: LinearProgram, guide, tol: float, max_pivots: int, rule: str):
    """Resume from the optimal tableau of an earlier LP whose constraints are
    a prefix of ``lp``'s, all ``<=`` rows with slacks basic at the start.

    The new rows enter with their slacks basic, so the old reduced costs stay
    optimal and dual simplex pivots restore feasibility.  None when the
    earlier LP does not fit or the repair fails; the caller then solves cold.
    """
    oform, otab = guide
    form = _standard_form(lp, float, bound_rows=False)
    m = len(oform.rows)
    if (
        form.n_artificial
        or oform.n_artificial
        or len(otab.basis) != m
        or len(form.rows) < m
        or form.upper != oform.upper
        or form.rows[:m] != oform.rows
        or form.rhs[:m] != oform.rhs
    ):
        return None
    tab = _DenseTableau(form.rows, form.rhs, list(otab.basis) + form.basis[m:], form.n_cols, tol, form.upper)
    tab.flipped[: otab.flipped.size] = otab.flipped
    tab.limit = form.art_start
    tab.costs = _costs(lp, float)
    if not tab.refactor(clip=False) or not tab.dual_repair(max_pivots):
        return None
    if tab.run(max_pivots, rule) == UNBOUNDED:
        return None
    return _finish_float(lp, form, tab, max_pivots, rule)


def _exact_target(form: _StandardForm, fform: _StandardForm, ftab: _DenseTableau) -> set[int]:
    """Translate a float basis into the column numbering of the exact form."""
    basic = {b for b in ftab.basis if b < fform.art_start}
    target = set(basic)
    for j, s in form.bound_slack.items():
        if j in basic:
            target.add(s)
        elif ftab.flipped[j]:
            target.add(j)
        else:
            target.add(s)
    return target


def _exact_tableau(form: _StandardForm) -> _SparseTableau:
    tab = _SparseTableau()
    for row, b, bv in zip(form.rows, form.rhs, form.basis):
        tab.add_row(dict(row), b, bv)
    return tab


def _solve_exact(lp: LinearProgram, max_pivots: int, rule: str, guide) -> LpSolution:
    form = _standard_form(lp, _to_mpq, bound_rows=True)
    if guide is not None:
        tab = _exact_tableau(form)
        if _install_basis(tab, form, guide):
            return _phase_two_exact(lp, form, tab, max_pivots, rule)
    tab = _exact_tableau(form)
    if not _phase_one(tab, form, _to_mpq, max_pivots, rule, 0):
        return LpSolution(INFEASIBLE, pivots=tab.pivots)
    return _phase_two_exact(lp, form, tab, max_pivots, rule)


def _install_basis(tab: _SparseTableau, form: _StandardForm, guide) -> bool:
    """Move ``tab`` onto the float basis; False unless it is primal feasible."""
    fform, ftab = guide
    if not tab.crash(_exact_target(form, fform, ftab)):
        return False
    for i, b in enumerate(tab.basis):
        if tab.rhs[i] < 0 or (b >= form.art_start and tab.rhs[i] != 0):
            return False
    _drive_out_artificials(tab, form.art_start)
    tab.limit = form.art_start
    return True


def _phase_two_exact(lp, form, tab, max_pivots, rule) -> LpSolution:
    tab.set_objective(_costs(lp, _to_mpq))
    if tab.run(max_pivots, rule) == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)
    n = lp.n_vars
    y = [gmpy2.mpq(0)] * n
    for i, b in enumerate(tab.basis):
        if b < n:
            y[b] = tab.rhs[i]
    x = [Fraction(int(v.numerator), int(v.denominator)) for v in (yi + lo for yi, lo in zip(y, form.lows))]
    value = sum((Fraction(_to_mpq(c)) * x[j] for j, c in _items(lp.objective)), Fraction(0))
    return LpSolution(OPTIMAL, value, x, tab.pivots)


def solve(
    lp: LinearProgram,
    mode: str = "rational",
    tol: float = 1e-9,
    max_pivots: int = DEFAULT_MAX_PIVOTS,
    rule: str = "dantzig",
    guided: bool = True,
    hint: LpSolution | None = None,
) -> LpSolution:
    """Solve ``lp`` and return an :class:`LpSolution`.

    In rational mode ``guided`` lets a float solve pick the starting basis
    of the exact simplex; ``hint``, a float-mode solution of the same LP,
    supplies that basis directly.  The answer is exact either way.  In
    float mode ``hint`` may be the solution of an earlier LP whose
    constraints (all ``<=`` with non-negative bounds) are a prefix of this
    one's; the solve then warm-starts from its final tableau.  Raises
    :class:`IterationLimit` when more than ``max_pivots`` pivots are needed.
    """
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    if rule not in ("dantzig", "bland"):
        raise ValueError(f"unknown pivoting rule {rule!r}")
    if mode == "float":
        if hint is not None and hint.basis_hint is not None and rule == "dantzig":
            warm = _solve_float_warm(lp, hint.basis_hint, tol, max_pivots, rule)
            if warm is not None:
                return warm[0]
        return _solve_float(lp, tol, max_pivots, rule)[0]
    guide = None
    if hint is not None and rule == "dantzig":
        guide = hint.basis_hint
    elif guided and rule == "dantzig":
        try:
            guide = _solve_float(lp, tol, max_pivots, rule)[1]
        except IterationLimit:
            guide = None
    return _solve_exact(lp, max_pivots, rule, guide)


def _drive_out_artificials(tab, art_start: int) -> None:
    """Pivot basic artificials (all at level zero) out, dropping redundant rows."""
    for i in range(len(tab.basis)):
        if tab.basis[i] < art_start:
            continue
        cands = [k for k in tab.row_support(i) if k < art_start and abs(tab.entry(i, k)) > tab.pivot_tol]
        if cands:
            tab.pivot(i, min(cands))
    keep = [i for i, b in enumerate(tab.basis) if b < art_start]
    if len(keep) != len(tab.basis):
        tab.drop_rows(keep)


def check_solution(lp: LinearProgram, sol: LpSolution) -> Number:
    """Largest constraint or bound violation of ``sol`` (0 when feasible)."""
    x = sol.assignment
    worst = 0
    for con in lp.constraints:
        lhs = sum(a * x[j] for j, a in _items(con.coeffs))
        gap = lhs - con.bound
        if con.relation == "=":
            gap = abs(gap)
        worst = max(worst, gap)
    for j, (lo, up) in enumerate(lp.bounds):
        worst = max(worst, lo - x[j])
        if up is not None:
            worst = max(worst, x[j] - up)
    return worst
