"""Plain-data form of specs and numbers, shared by the CLI and fingerprints.

Rationals travel as strings: ``"3/4"``, ``"2"`` or an exact decimal ``"0.75"``.
"""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .dist import CorrelationSpec, Dist1D
from .errors import InvalidSpec


def fmt(x) -> str:
    """Exact string form of a rational (floats go through their repr)."""
    if isinstance(x, float):
        x = Fraction(repr(x))
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_number(s) -> Fraction:
    if isinstance(s, bool):
        raise InvalidSpec(f"not a number: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, float):
        return Fraction(repr(s))
    if not isinstance(s, str):
        raise InvalidSpec(f"not a number: {s!r}")
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        raise InvalidSpec(f"not a rational number: {s!r}") from None


def law_to_list(F: Dist1D) -> list[dict]:
    return [{"value": fmt(v), "prob": fmt(p)} for v, p in F.support]


def law_from_list(items) -> Dist1D:
    if not isinstance(items, list) or not items:
        raise InvalidSpec("a law is a non-empty list of {value, prob} entries")
    pairs = []
    for it in items:
        if not isinstance(it, dict) or set(it) != {"value", "prob"}:
            raise InvalidSpec(f"bad law entry {it!r}")
        pairs.append((parse_number(it["value"]), parse_number(it["prob"])))
    return Dist1D.of(pairs)


def spec_to_dict(spec: CorrelationSpec) -> dict:
    d: dict = {"kind": spec.kind}
    if spec.name is not None:
        d["name"] = spec.name
    if spec.kind == "independent":
        d["laws"] = [law_to_list(F) for F in spec.laws]
    elif spec.kind == "semi_independent":
        d["classes"] = [{"law": law_to_list(F), "multiplicity": m} for F, m in zip(spec.laws, spec.multiplicities)]
    elif spec.kind == "common_base_value":
        d["laws"] = [law_to_list(F) for F in spec.laws]
        d["base"] = law_to_list(spec.base)
    elif spec.kind == "linear":
        d["features"] = [law_to_list(F) for F in spec.laws]
        d["matrix"] = [[fmt(x) for x in row] for row in spec.matrix]
    else:
        d["atoms"] = [{"values": [fmt(v) for v in vals], "prob": fmt(p)} for vals, p in spec.atoms]
        if spec.partition is not None:
            d["partition"] = [list(c) for c in spec.partition]
    return d


def _need(d: dict, key: str, kind: type):
    if key not in d:
        raise InvalidSpec(f"missing field {key!r}")
    if not isinstance(d[key], kind):
        raise InvalidSpec(f"field {key!r} has the wrong type")
    return d[key]


def spec_from_dict(d) -> CorrelationSpec:
    if not isinstance(d, dict):
        raise InvalidSpec("an instance is a JSON object")
    kind = _need(d, "kind", str)
    name = d.get("name")
    if name is not None and not isinstance(name, str):
        raise InvalidSpec("field 'name' must be a string")
    if kind == "independent":
        return CorrelationSpec.independent([law_from_list(x) for x in _need(d, "laws", list)], name=name)
    if kind == "semi_independent":
        classes = []
        for c in _need(d, "classes", list):
            if not isinstance(c, dict):
                raise InvalidSpec("each class is an object with 'law' and 'multiplicity'")
            m = _need(c, "multiplicity", int)
            classes.append((law_from_list(_need(c, "law", list)), m))
        return CorrelationSpec.semi_independent(classes, name=name)
    if kind == "common_base_value":
        laws = [law_from_list(x) for x in _need(d, "laws", list)]
        return CorrelationSpec.common_base_value(laws, law_from_list(_need(d, "base", list)), name=name)
    if kind == "linear":
        feats = [law_from_list(x) for x in _need(d, "features", list)]
        rows = _need(d, "matrix", list)
        if not all(isinstance(r, list) for r in rows):
            raise InvalidSpec("matrix rows must be lists")
        return CorrelationSpec.linear(feats, [[parse_number(x) for x in r] for r in rows], name=name)
    if kind == "explicit":
        atoms = []
        for a in _need(d, "atoms", list):
            if not isinstance(a, dict):
                raise InvalidSpec("each atom is an object with 'values' and 'prob'")
            atoms.append(([parse_number(v) for v in _need(a, "values", list)], parse_number(a.get("prob"))))
        return CorrelationSpec.explicit(atoms, partition=d.get("partition"), name=name)
    raise InvalidSpec(f"unknown kind {kind!r}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_hash(spec: CorrelationSpec) -> str:
    """Short stable digest of an instance's canonical form (the name is ignored)."""
    d = spec_to_dict(spec)
    d.pop("name", None)
    return hashlib.sha256(canonical_json(d).encode()).hexdigest()[:16]
