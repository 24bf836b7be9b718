"""Brute-force references that share no code with the package's solvers."""
import itertools
from fractions import Fraction


def myerson_brute(pairs):
    """Best posted price by scanning every support value; lowest price wins ties."""
    best = (Fraction(0), Fraction(0))
    for price, _ in sorted(pairs):
        rev = price * sum((p for v, p in pairs if v >= price), Fraction(0))
        if rev > best[1]:
            best = (price, rev)
    return best


def convolve(*laws):
    """Law of the sum of independent laws given as {value: prob} dicts."""
    out = {Fraction(0): Fraction(1)}
    for law in laws:
        nxt = {}
        for s, p in out.items():
            for v, q in law.items():
                nxt[s + v] = nxt.get(s + v, 0) + p * q
        out = nxt
    return out


def _solve_square(A, b):
    """Gaussian elimination over the rationals; None if singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def lp_vertex_max(c, A, b):
    """max c.x s.t. A x <= b by enumerating every basic solution.

    Only for a handful of variables.  Returns the optimum or None when the
    feasible set is empty; boundedness is the caller's concern.
    """
    n = len(c)
    best = None
    for rows in itertools.combinations(range(len(A)), n):
        x = _solve_square([A[r] for r in rows], [b[r] for r in rows])
        if x is None:
            continue
        if all(sum(a * xi for a, xi in zip(row, x)) <= bi for row, bi in zip(A, b)):
            v = sum(ci * xi for ci, xi in zip(c, x))
            best = v if best is None else max(best, v)
    return best
