"""Finite-support valuation distributions.

Every number is an exact :class:`fractions.Fraction`.  Floats are accepted
as input and read through their shortest decimal repr, so ``0.1`` means
``1/10``.  Item indices are 0-based throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    EmptySubset,
    IndexOutOfRange,
    InvalidSpec,
    NonPositiveScale,
    SupportExplosion,
)

FLOAT_SUM_TOL = Fraction(1, 10**12)
DEFAULT_MAX_ATOMS = 200

KINDS = ("independent", "semi_independent", "common_base_value", "linear", "explicit")


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidSpec(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidSpec(f"not a finite number: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidSpec(f"not a rational: {x!r}") from exc
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidSpec(f"not a rational: {x!r}") from exc


def _normalize(probs: list[Fraction], approximate: bool) -> list[Fraction]:
    total = sum(probs, Fraction(0))
    if total == 1:
        return probs
    if approximate and abs(total - 1) <= FLOAT_SUM_TOL:
        return [p / total for p in probs]
    raise InvalidSpec(f"probabilities sum to {total}, not 1")


@dataclass(frozen=True)
class Dist1D:
    """A finite law on non-negative rationals: ``((value, prob), ...)``.

    Values are distinct and ascending, probabilities positive and summing to
    exactly one.  Use :meth:`of` to build one from loose input.
    """

    support: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if not self.support:
            raise InvalidSpec("empty support")
        prev = None
        total = Fraction(0)
        for v, p in self.support:
            if not isinstance(v, Fraction) or not isinstance(p, Fraction):
                raise InvalidSpec("support entries must be Fractions; use Dist1D.of")
            if v < 0:
                raise InvalidSpec(f"negative value {v}")
            if not 0 < p <= 1:
                raise InvalidSpec(f"probability {p} outside (0, 1]")
            if prev is not None and v <= prev:
                raise InvalidSpec("support values must be distinct and ascending")
            prev = v
            total += p
        if total != 1:
            raise InvalidSpec(f"probabilities sum to {total}, not 1")

    @classmethod
    def of(cls, pairs) -> "Dist1D":
        """Build from ``{value: prob}`` or ``[(value, prob), ...]``.

        Duplicate values are merged and zero-probability points dropped.  If
        any input is a float the sum may miss one by up to 1e-12, and the
        law is then renormalized exactly.
        """
        items = pairs.items() if isinstance(pairs, dict) else pairs
        approximate = False
        merged: dict[Fraction, Fraction] = {}
        for v, p in items:
            approximate = approximate or isinstance(v, float) or isinstance(p, float)
            v, p = as_fraction(v), as_fraction(p)
            if p < 0:
                raise InvalidSpec(f"negative probability {p}")
            if p:
                merged[v] = merged.get(v, Fraction(0)) + p
        values = sorted(merged)
        probs = _normalize([merged[v] for v in values], approximate)
        return cls(tuple(zip(values, probs)))

    @classmethod
    def point(cls, value) -> "Dist1D":
        return cls(((as_fraction(value), Fraction(1)),))

    @property
    def values(self) -> list[Fraction]:
        return [v for v, _ in self.support]

    @property
    def probs(self) -> list[Fraction]:
        return [p for _, p in self.support]

    def mean(self) -> Fraction:
        return sum((v * p for v, p in self.support), Fraction(0))

    def variance(self) -> Fraction:
        m = self.mean()
        return sum(((v - m) ** 2 * p for v, p in self.support), Fraction(0))

    def tail_prob(self, price) -> Fraction:
        """``Pr[v >= price]``."""
        return sum((p for v, p in self.support if v >= price), Fraction(0))

    def cdf(self, x) -> Fraction:
        return sum((p for v, p in self.support if v <= x), Fraction(0))

    def __len__(self) -> int:
        return len(self.support)


def scale(F: Dist1D, alpha) -> Dist1D:
    """The law of ``alpha * v`` for ``v ~ F``."""
    alpha = as_fraction(alpha)
    if alpha <= 0:
        raise NonPositiveScale(f"scale factor must be positive, got {alpha}")
    return Dist1D(tuple((v * alpha, p) for v, p in F.support))


@dataclass(frozen=True)
class CorrelationSpec:
    """Declarative description of a joint valuation law.

    Build with the classmethods; the fields used depend on ``kind``:

    * independent: ``laws``
    * semi_independent: ``laws`` with ``multiplicities`` (one law per class)
    * common_base_value: ``laws`` (the item-specific parts) and ``base``
    * linear: ``laws`` (feature laws) and ``matrix`` (features x items);
      item ``j`` is worth ``sum_a w_a * matrix[a][j]``
    * explicit: ``atoms`` and optionally ``partition``
    """

    kind: str
    laws: tuple[Dist1D, ...] = ()
    multiplicities: tuple[int, ...] = ()
    base: Dist1D | None = None
    matrix: tuple[tuple[Fraction, ...], ...] = ()
    atoms: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = ()
    partition: tuple[tuple[int, ...], ...] | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.atoms:
                raise InvalidSpec("explicit spec needs atoms")
            return
        if not self.laws:
            raise InvalidSpec(f"{self.kind} spec needs at least one law")
        if self.kind == "semi_independent":
            if len(self.multiplicities) != len(self.laws):
                raise InvalidSpec("one multiplicity per class is required")
            if any(not isinstance(m, int) or m < 1 for m in self.multiplicities):
                raise InvalidSpec("multiplicities must be positive integers")
        if self.kind == "common_base_value" and self.base is None:
            raise InvalidSpec("common base-value spec needs a base law")
        if self.kind == "linear":
            if len(self.matrix) != len(self.laws):
                raise InvalidSpec("matrix needs one row per feature")
            widths = {len(row) for row in self.matrix}
            if len(widths) != 1 or 0 in widths:
                raise InvalidSpec("matrix rows must share a positive length")
            for row in self.matrix:
                if any(x < 0 for x in row):
                    raise InvalidSpec("matrix entries must be non-negative")
            for j in range(self.n_items):
                if all(row[j] == 0 for row in self.matrix):
                    raise InvalidSpec(f"item {j} has no non-zero feature weight")

    @classmethod
    def independent(cls, laws: Sequence[Dist1D], name=None) -> "CorrelationSpec":
        return cls("independent", laws=tuple(laws), name=name)

    @classmethod
    def semi_independent(cls, classes: Sequence[tuple[Dist1D, int]], name=None) -> "CorrelationSpec":
        laws = tuple(law for law, _ in classes)
        return cls("semi_independent", laws=laws, multiplicities=tuple(m for _, m in classes), name=name)

    @classmethod
    def common_base_value(cls, laws: Sequence[Dist1D], base: Dist1D, name=None) -> "CorrelationSpec":
        return cls("common_base_value", laws=tuple(laws), base=base, name=name)

    @classmethod
    def linear(cls, features: Sequence[Dist1D], matrix, name=None) -> "CorrelationSpec":
        M = tuple(tuple(as_fraction(x) for x in row) for row in matrix)
        return cls("linear", laws=tuple(features), matrix=M, name=name)

    @classmethod
    def explicit(cls, atoms, partition=None, name=None) -> "CorrelationSpec":
        atoms = list(atoms)
        approximate = any(isinstance(p, float) or any(isinstance(v, float) for v in vals) for vals, p in atoms)
        probs = _normalize([as_fraction(p) for _, p in atoms], approximate)
        atoms = tuple((tuple(as_fraction(v) for v in vals), p) for (vals, _), p in zip(atoms, probs))
        part = None if partition is None else tuple(tuple(c) for c in partition)
        return cls("explicit", atoms=atoms, partition=part, name=name)

    @property
    def n_items(self) -> int:
        if self.kind == "semi_independent":
            return sum(self.multiplicities)
        if self.kind == "linear":
            return len(self.matrix[0])
        if self.kind == "explicit":
            return len(self.atoms[0][0])
        return len(self.laws)

    def expanded_size(self) -> int:
        """Atom count of the product support before duplicates merge."""
        if self.kind == "explicit":
            return len(self.atoms)
        size = math.prod(len(law) for law in self.laws)
        if self.kind == "common_base_value":
            size *= len(self.base)
        return size

    def max_features_per_item(self) -> int:
        """For linear specs, the largest number of non-zero weights on one item."""
        if self.kind != "linear":
            raise InvalidSpec("only linear specs have feature weights")
        return max(sum(1 for row in self.matrix if row[j] != 0) for j in range(self.n_items))


@dataclass(frozen=True)
class JointDist:
    """Explicit joint law: distinct valuation vectors with their probabilities.

    ``partition`` lists the similarity classes (items whose values are equal
    in every atom, as declared by the instance).
    """

    n_items: int
    atoms: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    partition: tuple[tuple[int, ...], ...]

    @property
    def similarity_partition(self):
        return self.partition

    @property
    def probs(self) -> list[Fraction]:
        return [p for _, p in self.atoms]

    @property
    def vectors(self) -> list[tuple[Fraction, ...]]:
        return [v for v, _ in self.atoms]

    def class_of(self, i: int) -> tuple[int, ...]:
        for c in self.partition:
            if i in c:
                return c
        raise IndexOutOfRange(f"item {i} is not in the partition")

    def __len__(self) -> int:
        return len(self.atoms)


def make_joint(atoms: Iterable, n_items: int | None = None, partition=None) -> JointDist:
    """Validate, merge duplicate vectors and sort; the partition defaults to singletons."""
    merged: dict[tuple[Fraction, ...], Fraction] = {}
    approximate = False
    for vals, p in atoms:
        approximate = approximate or isinstance(p, float) or any(isinstance(v, float) for v in vals)
        vals = tuple(as_fraction(v) for v in vals)
        p = as_fraction(p)
        if p < 0:
            raise InvalidSpec(f"negative probability {p}")
        if any(v < 0 for v in vals):
            raise InvalidSpec("values must be non-negative")
        if n_items is None:
            n_items = len(vals)
        if len(vals) != n_items:
            raise InvalidSpec("valuation vectors differ in length")
        if p:
            merged[vals] = merged.get(vals, Fraction(0)) + p
    if not merged or not n_items:
        raise InvalidSpec("a joint law needs at least one atom and one item")
    keys = sorted(merged)
    probs = _normalize([merged[k] for k in keys], approximate)
    if partition is None:
        partition = tuple((i,) for i in range(n_items))
    partition = _check_partition(partition, n_items)
    for vals in keys:
        for c in partition:
            if any(vals[i] != vals[c[0]] for i in c):
                raise InvalidSpec(f"items {c} are declared similar but differ in {vals}")
    return JointDist(n_items, tuple(zip(keys, probs)), partition)


def _check_partition(partition, n: int) -> tuple[tuple[int, ...], ...]:
    classes = tuple(tuple(sorted(c)) for c in partition)
    flat = sorted(i for c in classes for i in c)
    if flat != list(range(n)) or any(not c for c in classes):
        raise InvalidSpec(f"{partition} is not a partition of {n} items")
    return tuple(sorted(classes))


def _product(laws: Sequence[Dist1D], max_atoms: int):
    size = math.prod(len(law) for law in laws)
    if size > max_atoms:
        raise SupportExplosion(f"{size} atoms exceed the cap of {max_atoms}")
    for combo in itertools.product(*(law.support for law in laws)):
        p = Fraction(1)
        for _, q in combo:
            p *= q
        yield tuple(v for v, _ in combo), p


def build_joint(spec: CorrelationSpec, max_atoms: int = DEFAULT_MAX_ATOMS) -> JointDist:
    """Expand ``spec`` into an explicit :class:`JointDist`."""
    kind = spec.kind
    if kind == "explicit":
        if len(spec.atoms) > max_atoms:
            raise SupportExplosion(f"{len(spec.atoms)} atoms exceed the cap of {max_atoms}")
        return make_joint(spec.atoms, partition=spec.partition)
    if kind == "independent":
        return make_joint(_product(spec.laws, max_atoms), len(spec.laws))
    if kind == "semi_independent":
        classes, start = [], 0
        for m in spec.multiplicities:
            classes.append(tuple(range(start, start + m)))
            start += m
        atoms = (
            (tuple(v for v, m in zip(vals, spec.multiplicities) for _ in range(m)), p)
            for vals, p in _product(spec.laws, max_atoms)
        )
        return make_joint(atoms, start, classes)
    if kind == "common_base_value":
        laws = list(spec.laws) + [spec.base]
        atoms = ((tuple(f + vals[-1] for f in vals[:-1]), p) for vals, p in _product(laws, max_atoms))
        return make_joint(atoms, len(spec.laws))
    # linear
    M = spec.matrix
    n = spec.n_items
    atoms = (
        (tuple(sum((w * M[a][j] for a, w in enumerate(vals)), Fraction(0)) for j in range(n)), p)
        for vals, p in _product(spec.laws, max_atoms)
    )
    return make_joint(atoms, n)


def _check_item(D: JointDist, j: int) -> None:
    if not isinstance(j, int) or not 0 <= j < D.n_items:
        raise IndexOutOfRange(f"item {j} outside 0..{D.n_items - 1}")


def marginal(D: JointDist, j: int) -> Dist1D:
    _check_item(D, j)
    law: dict[Fraction, Fraction] = {}
    for vals, p in D.atoms:
        law[vals[j]] = law.get(vals[j], Fraction(0)) + p
    return Dist1D(tuple(sorted(law.items())))


def restrict(D: JointDist, A: Sequence[int]) -> JointDist:
    """Joint marginal over the items of ``A`` (kept in ascending order)."""
    A = sorted(set(A))
    if not A:
        raise EmptySubset("cannot restrict to an empty set of items")
    for j in A:
        _check_item(D, j)
    pos = {j: k for k, j in enumerate(A)}
    partition = [tuple(pos[i] for i in c if i in pos) for c in D.partition]
    atoms = ((tuple(vals[j] for j in A), p) for vals, p in D.atoms)
    return make_joint(atoms, len(A), [c for c in partition if c])


def condition(D: JointDist, keep) -> JointDist | None:
    """``D`` conditioned on the atoms where ``keep(values)`` holds; None if that has probability 0."""
    kept = [(vals, p) for vals, p in D.atoms if keep(vals)]
    s = sum((p for _, p in kept), Fraction(0))
    if s == 0:
        return None
    return JointDist(D.n_items, tuple((vals, p / s) for vals, p in kept), D.partition)


def product(D: JointDist, E: JointDist, max_atoms: int = DEFAULT_MAX_ATOMS) -> JointDist:
    """The independent join of ``D`` and ``E``; ``E``'s items come after ``D``'s."""
    if len(D) * len(E) > max_atoms:
        raise SupportExplosion(f"{len(D) * len(E)} atoms exceed the cap of {max_atoms}")
    atoms = tuple((u + v, p * q) for u, p in D.atoms for v, q in E.atoms)
    partition = D.partition + tuple(tuple(i + D.n_items for i in c) for c in E.partition)
    return JointDist(D.n_items + E.n_items, atoms, partition)


def sum_dist(D: JointDist) -> Dist1D:
    law: dict[Fraction, Fraction] = {}
    for vals, p in D.atoms:
        s = sum(vals, Fraction(0))
        law[s] = law.get(s, Fraction(0)) + p
    return Dist1D(tuple(sorted(law.items())))


def val(D: JointDist) -> Fraction:
    return sum((p * sum(vals, Fraction(0)) for vals, p in D.atoms), Fraction(0))


def covariance(D: JointDist, i: int, j: int) -> Fraction:
    _check_item(D, i)
    _check_item(D, j)
    ei = sum((p * vals[i] for vals, p in D.atoms), Fraction(0))
    ej = sum((p * vals[j] for vals, p in D.atoms), Fraction(0))
    return sum((p * (vals[i] - ei) * (vals[j] - ej) for vals, p in D.atoms), Fraction(0))


def variance_sum(D: JointDist) -> Fraction:
    return sum_dist(D).variance()


def check_semi_independent(D: JointDist) -> bool:
    """True iff items within each class are always equal and the classes are
    mutually independent (the joint law is the product of class laws)."""
    reps = [c[0] for c in D.partition]
    for vals, _ in D.atoms:
        for c in D.partition:
            if any(vals[i] != vals[c[0]] for i in c):
                return False
    laws = [marginal(D, r) for r in reps]
    if math.prod(len(law) for law in laws) != len(D.atoms):
        return False
    lookup = [dict(law.support) for law in laws]
    for vals, p in D.atoms:
        q = Fraction(1)
        for r, law in zip(reps, lookup):
            q *= law[vals[r]]
        if q != p:
            return False
    return True


def independent_split(D: JointDist, A: Sequence[int]) -> bool:
    """True iff the values on ``A`` are independent of the values off ``A``."""
    A = sorted(set(A))
    rest = [j for j in range(D.n_items) if j not in A]
    if not A or not rest:
        return True
    left: dict = {}
    right: dict = {}
    for vals, p in D.atoms:
        a = tuple(vals[j] for j in A)
        b = tuple(vals[j] for j in rest)
        left[a] = left.get(a, Fraction(0)) + p
        right[b] = right.get(b, Fraction(0)) + p
    if len(left) * len(right) != len(D.atoms):
        return False
    for vals, p in D.atoms:
        a = tuple(vals[j] for j in A)
        b = tuple(vals[j] for j in rest)
        if left[a] * right[b] != p:
            return False
    return True
