"""Command-line front end: instance files in, reports out.

    mechrev compute FILE [--what rev|srev|brev|all]
    mechrev decompose FILE
    mechrev reduce FILE [--out PATH]
    mechrev verify (FILE | --gen KIND --seeds A..B) [--suite core|semi|cbv|linear|all]
    mechrev gen KIND --seed N [--out PATH]

Exit status is 0 when everything checked holds, 1 when some check fails and
2 on usage, parse or cap errors.  Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from .decomposition import (
    CheckSet,
    Inequality,
    check_class_bound,
    check_core_bound,
    check_core_item_revenue,
    check_core_tail,
    check_tail_bound,
    check_tail_class_count,
    check_tail_item_revenue,
    check_tail_oracle,
    check_tail_probability,
    decompose,
    thresholds_semi_independent,
)
from .dist import DEFAULT_MAX_ATOMS, build_joint, check_semi_independent, val
from .errors import (
    BadParams,
    CapExceeded,
    InvalidSpec,
    IterationLimit,
    MechRevError,
    ParseError,
    PreconditionViolated,
    SupportExplosion,
    SupportTooLarge,
    TooManyClasses,
    WrongKind,
)
from .harness import KIND_ALIASES, gen_instance, guarantee_report
from .optmech import optimal_revenue
from .pricing import brev, srev
from .reductions import MAX_REDUCED_ITEMS, check_packaging, check_reduction_identities, cor_base_value, cor_linear
from .specio import fmt, spec_from_dict, spec_hash, spec_to_dict

SCHEMA = 1
SUITES = ("core", "semi", "cbv", "linear")
MAX_SEEDS = 100_000

OK, FAILED, USAGE = 0, 1, 2


# ---------------------------------------------------------------- numbers

def _num(x):
    """Exact string plus decimal; floats (float-mode results) have no exact form."""
    if x is None or isinstance(x, bool):
        return x
    if isinstance(x, float):
        return {"exact": None, "decimal": x}
    x = Fraction(x)
    return {"exact": fmt(x), "decimal": float(x)}


def _plain(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return fmt(x)


def _text(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return repr(x)
    s = fmt(x)
    return s if "/" not in s else f"{s} ({float(Fraction(x)):.6g})"


# ---------------------------------------------------------------- input

def load_instance(path: str):
    """Read an instance file; JSON syntax errors carry line and column."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise BadParams(f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    try:
        return spec_from_dict(doc)
    except InvalidSpec as e:
        raise ParseError(str(e)) from None


def parse_seeds(s: str) -> list[int]:
    """``"a..b"`` (inclusive), ``"a,b,c"`` or a single integer."""
    try:
        if ".." in s:
            a, b = s.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise BadParams(f"empty seed range {s!r}")
            if hi - lo + 1 > MAX_SEEDS:
                raise CapExceeded("max-seeds", f"{hi - lo + 1} seeds exceed the cap of {MAX_SEEDS}")
            return list(range(lo, hi + 1))
        return [int(x) for x in s.split(",")]
    except ValueError:
        raise BadParams(f"bad seed list {s!r}") from None


# ---------------------------------------------------------------- checks

def _tol(mode):
    return 0 if mode == "rational" else 1e-7


def _le(name, lhs, rhs, tol=0) -> Inequality:
    return Inequality(name, lhs, rhs, bool(lhs <= rhs + tol * max(1, abs(rhs))))


def _flag(name, ok: bool) -> Inequality:
    return Inequality(name, None, None, bool(ok))


def _flatten(items) -> list[Inequality]:
    out = []
    for c in items:
        out.append(c)
        out.extend(_flatten(c.parts))
    return out


def suite_core(spec, D, args, seed):
    rep = guarantee_report(spec, args.mode, args.max_atoms, seed)
    tol = _tol(args.mode)
    checks = [
        _le("srev_le_rev", rep.srev, rep.rev, tol),
        _le("brev_le_rev", rep.brev, rep.rev, tol),
        _le("rev_le_val", rep.rev, rep.val, tol),
    ]
    if rep.bound is not None:
        checks.append(_le("ratio_le_bound", rep.ratio, Fraction(rep.bound), tol))
    return checks


def suite_semi(spec, D, args, seed):
    mode, cap = args.mode, args.max_atoms
    t = thresholds_semi_independent(D)
    rep = decompose(D, t)
    checks = list(check_tail_probability(rep))
    checks += check_core_item_revenue(D, t)
    checks += check_tail_item_revenue(D, t)
    checks.append(check_tail_oracle(D, rep, mode, cap))
    checks.append(check_core_tail(D, rep, mode, cap))
    checks.append(check_tail_bound(D, rep, mode, cap))
    checks.append(check_core_bound(D, rep))
    checks.append(check_tail_class_count(rep))
    checks.append(check_class_bound(D, mode, cap))
    return checks


def _reduced_semi(rm, cap) -> Inequality:
    return _flag("reduced_semi_independent", check_semi_independent(build_joint(rm.reduced, cap)))


def suite_cbv(spec, D, args, seed):
    rm = cor_base_value(spec)
    rep = check_reduction_identities(rm, args.max_atoms, args.mode)
    return list(rep.checks) + [_reduced_semi(rm, args.max_atoms)]


def suite_linear(spec, D, args, seed):
    rm = cor_linear(spec)
    rep = check_reduction_identities(rm, args.max_atoms, args.mode)
    return list(rep.checks) + [_reduced_semi(rm, args.max_atoms)]


def _applies(suite, spec, D) -> bool:
    if suite == "core":
        return True
    if suite == "semi":
        return check_semi_independent(D)
    if suite == "cbv":
        return spec.kind == "common_base_value"
    return spec.kind == "linear"


RUNNERS = {"core": suite_core, "semi": suite_semi, "cbv": suite_cbv, "linear": suite_linear}


def verify_instance(spec, args, seed=None) -> dict:
    D = build_joint(spec, args.max_atoms)
    suites = SUITES if args.suite == "all" else (args.suite,)
    rows = []
    for suite in suites:
        if not _applies(suite, spec, D):
            if args.suite != "all":
                raise WrongKind(f"suite {suite!r} does not apply to a {spec.kind} instance")
            continue
        try:
            checks = RUNNERS[suite](spec, D, args, seed)
        except PreconditionViolated as e:
            # a documented precondition failing on an instance the suite
            # covers contradicts the theory, so it counts as a failed check
            checks = [Inequality("precondition", None, None, False, info={"reason": str(e)})]
        rows += [(suite, c) for c in _flatten(checks)]
    return {
        "seed": seed,
        "kind": spec.kind,
        "name": spec.name,
        "fingerprint": spec_hash(spec),
        "holds": all(c.holds for _, c in rows),
        "checks": rows,
    }


# ---------------------------------------------------------------- commands

def _instance_head(spec) -> dict:
    return {"kind": spec.kind, "name": spec.name, "fingerprint": spec_hash(spec)}


def cmd_compute(args) -> tuple[dict, int]:
    spec = load_instance(args.file)
    D = build_joint(spec, args.max_atoms)
    what = ("srev", "brev", "rev", "val") if args.what == "all" else (args.what,)
    results: dict = {}
    menu = None
    for w in what:
        if w == "srev":
            results["srev"] = srev(D)
        elif w == "brev":
            results["brev"] = brev(D)
        elif w == "val":
            results["val"] = val(D)
        else:
            res = optimal_revenue(D, args.mode, args.max_atoms, args.tol)
            results["rev"] = res.revenue
            menu = res.menu
    doc = {
        "schema": SCHEMA,
        "command": "compute",
        "mode": args.mode,
        "instance": _instance_head(spec),
        "results": {k: _num(v) for k, v in results.items()},
    }
    if menu is not None:
        doc["menu"] = [{"allocation": [_num(q) for q in alloc], "price": _num(p)} for alloc, p in menu.options]
    doc["_raw"] = results
    return doc, OK


def cmd_decompose(args) -> tuple[dict, int]:
    spec = load_instance(args.file)
    D = build_joint(spec, args.max_atoms)
    t = thresholds_semi_independent(D)
    rep = decompose(D, t)
    doc = {
        "schema": SCHEMA,
        "command": "decompose",
        "instance": _instance_head(spec),
        "thresholds": {
            "t": [_num(x) for x in t.t],
            "cut": [_num(x) for x in t.cut],
            "item_revenue": [_num(x) for x in t.item_revenue],
        },
        "tail_probs": [_num(p) for p in rep.tail_probs],
        "class_respecting": rep.class_respecting,
        "expected_tail_classes": _num(rep.expected_tail_classes),
        "core_val": _num(val(rep.core)) if rep.core is not None else None,
        "entries": [
            {
                "tail": list(e.tail),
                "prob": _num(e.prob),
                "atoms": len(e.conditional),
                "core_val": _num(val(e.core_part)) if e.core_part is not None else None,
            }
            for e in rep.entries
        ],
    }
    return doc, OK


def _reduced_path(src: str) -> Path:
    p = Path("reduced.json" if src == "-" else src)
    return p.with_name(p.stem + ".reduced.json")


def cmd_reduce(args) -> tuple[dict, int]:
    spec = load_instance(args.file)
    if spec.kind == "common_base_value":
        rm = cor_base_value(spec)
    elif spec.kind == "linear":
        try:
            rm = cor_linear(spec, args.max_items)
        except SupportExplosion as e:
            raise CapExceeded("max-items", str(e)) from None
    else:
        raise WrongKind(f"only common_base_value and linear instances reduce, got {spec.kind}")
    out = Path(args.out) if args.out else _reduced_path(args.file)
    try:
        out.write_text(_dump_instance(rm.reduced))
    except OSError as e:
        raise BadParams(f"cannot write {out}: {e.strerror}") from None
    check = check_packaging(rm)
    doc = {
        "schema": SCHEMA,
        "command": "reduce",
        "instance": _instance_head(spec),
        "reduced": {"path": str(out), **_instance_head(rm.reduced), "items": rm.reduced.n_items},
        "packaging": [list(p) for p in rm.packaging],
        "scale": _num(rm.scale),
        "checks": [("reduce", check)],
        "holds": check.holds,
    }
    return doc, OK if check.holds else FAILED


def cmd_verify(args) -> tuple[dict, int]:
    if (args.file is None) == (args.gen is None):
        raise BadParams("give either an instance file or --gen KIND")
    if args.gen is not None:
        seeds = parse_seeds(args.seeds)
        size = _size(args)
        instances = [verify_instance(gen_instance(args.gen, s, **size), args, s) for s in seeds]
    else:
        instances = [verify_instance(load_instance(args.file), args, args.seed)]
    rows = [(inst, suite, c) for inst in instances for suite, c in inst["checks"]]
    failed = sum(not c.holds for _, _, c in rows)
    doc = {
        "schema": SCHEMA,
        "command": "verify",
        "mode": args.mode,
        "suite": args.suite,
        "instances": instances,
        "counts": {"instances": len(instances), "checks": len(rows), "failed": failed},
        "holds": failed == 0,
    }
    return doc, OK if failed == 0 else FAILED


def _size(args) -> dict:
    size = {
        "n_items": args.items,
        "support": args.support,
        "max_multiplicity": args.multiplicity,
        "n_features": args.features,
        "max_entry": args.max_entry,
    }
    return {k: v for k, v in size.items() if v is not None}


def _dump_instance(spec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def cmd_gen(args) -> tuple[str, int]:
    seed = 0 if args.seed is None else args.seed
    spec = gen_instance(args.kind, seed, **_size(args))
    text = _dump_instance(spec)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as e:
            raise BadParams(f"cannot write {args.out}: {e.strerror}") from None
        return "", OK
    return text, OK


# ---------------------------------------------------------------- rendering

def _check_json(suite, c: Inequality) -> dict:
    d = {"suite": suite, "name": c.name, "lhs": _num(c.lhs), "rhs": _num(c.rhs), "holds": c.holds}
    if "reason" in c.info:
        d["reason"] = c.info["reason"]
    return d


def _jsonable(doc: dict) -> dict:
    doc = dict(doc)
    doc.pop("_raw", None)
    if "checks" in doc:
        doc["checks"] = [_check_json(s, c) for s, c in doc["checks"]]
    if "instances" in doc:
        doc["instances"] = [
            {**inst, "checks": [_check_json(s, c) for s, c in inst["checks"]]} for inst in doc["instances"]
        ]
    return doc


def _check_rows(doc):
    if "instances" in doc:
        for inst in doc["instances"]:
            for s, c in inst["checks"]:
                yield inst, s, c
    for s, c in doc.get("checks", ()):
        yield None, s, c


def render_json(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def render_csv(doc) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    rows = list(_check_rows(doc))
    if doc["command"] in ("verify", "reduce"):
        multi = doc["command"] == "verify" and doc["instances"] and doc["instances"][0]["seed"] is not None
        w.writerow((["seed"] if multi else []) + ["suite", "name", "lhs", "rhs", "holds"])
        for inst, s, c in rows:
            w.writerow(([inst["seed"]] if multi else []) + [s, c.name, _plain(c.lhs), _plain(c.rhs), str(c.holds).lower()])
    elif doc["command"] == "compute":
        w.writerow(["quantity", "exact", "decimal"])
        for k, v in doc["_raw"].items():
            w.writerow([k, "" if isinstance(v, float) else fmt(v), repr(float(v))])
    else:
        w.writerow(["tail", "prob", "atoms"])
        for e in doc["entries"]:
            w.writerow([" ".join(map(str, e["tail"])), e["prob"]["exact"], e["atoms"]])
    return buf.getvalue()


def render_text(doc) -> str:
    lines = []
    cmd = doc["command"]
    if "instance" in doc:
        inst = doc["instance"]
        lines.append(f"instance {inst['name'] or '-'} ({inst['kind']}, {inst['fingerprint']})")
    if cmd == "compute":
        for k, v in doc["_raw"].items():
            lines.append(f"{k} = {_text(v)}")
        if "menu" in doc:
            lines.append(f"menu: {len(doc['menu'])} options")
    elif cmd == "decompose":
        lines.append("cut = " + ", ".join(x["exact"] for x in doc["thresholds"]["cut"]))
        lines.append("tail probabilities = " + ", ".join(x["exact"] for x in doc["tail_probs"]))
        lines.append(f"expected tail classes = {doc['expected_tail_classes']['exact']}")
        for e in doc["entries"]:
            lines.append(f"  tail {{{', '.join(map(str, e['tail']))}}}: prob {e['prob']['exact']}, {e['atoms']} atoms")
    else:
        if cmd == "reduce":
            r = doc["reduced"]
            lines.append(f"reduced to {r['items']} items, written to {r['path']}")
        for inst, s, c in _check_rows(doc):
            tag = "PASS" if c.holds else "FAIL"
            where = f"seed {inst['seed']} " if inst is not None and inst["seed"] is not None else ""
            rel = f": {_text(c.lhs)} <= {_text(c.rhs)}" if c.lhs is not None else ""
            lines.append(f"[{tag}] {where}{s}.{c.name}{rel}")
        if cmd == "verify":
            n = doc["counts"]
            lines.append(f"{n['checks'] - n['failed']}/{n['checks']} checks hold over {n['instances']} instances")
    return "\n".join(lines) + "\n"


RENDER = {"json": render_json, "csv": render_csv, "text": render_text}


# ---------------------------------------------------------------- parser

def _kind(s: str) -> str:
    if s not in KIND_ALIASES:
        raise argparse.ArgumentTypeError(f"unknown kind {s!r} (choose from {', '.join(KIND_ALIASES)})")
    return s


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="float-mode LP tolerance")
    common.add_argument("--max-atoms", type=int, default=DEFAULT_MAX_ATOMS, help="cap on joint support size")
    common.add_argument("--mode", choices=("rational", "float"), default="rational")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--seed", type=int, default=None)

    sizes = argparse.ArgumentParser(add_help=False)
    sizes.add_argument("--items", type=int, help="max number of items (or classes)")
    sizes.add_argument("--support", type=int, help="max support size per law")
    sizes.add_argument("--multiplicity", type=int, help="max class multiplicity")
    sizes.add_argument("--features", type=int, help="max number of features (linear)")
    sizes.add_argument("--max-entry", type=int, help="max matrix entry (linear)")

    p = argparse.ArgumentParser(prog="mechrev", description="Revenue of simple versus optimal selling mechanisms.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="srev, brev and the optimal revenue")
    c.add_argument("file")
    c.add_argument("--what", choices=("rev", "srev", "brev", "all"), default="all")

    d = sub.add_parser("decompose", parents=[common], help="core/tail decomposition")
    d.add_argument("file")

    r = sub.add_parser("reduce", parents=[common], help="reduce to a semi-independent instance")
    r.add_argument("file")
    r.add_argument("--out", help="where to write the reduced instance (default: FILE.reduced.json)")
    r.add_argument("--max-items", type=int, default=MAX_REDUCED_ITEMS, help="cap on reduced items")

    v = sub.add_parser("verify", parents=[common, sizes], help="run theorem checks")
    v.add_argument("file", nargs="?")
    v.add_argument("--gen", type=_kind, help="generate instances of this kind instead of reading a file")
    v.add_argument("--seeds", default="0..9", help="seed range a..b (inclusive) or list a,b,c")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")

    g = sub.add_parser("gen", parents=[common, sizes], help="write a random instance")
    g.add_argument("kind", type=_kind)
    g.add_argument("--out", help="output path (default: stdout)")
    return p


COMMANDS = {"compute": cmd_compute, "decompose": cmd_decompose, "reduce": cmd_reduce, "verify": cmd_verify}

CAPS = {
    SupportExplosion: "max-atoms",
    SupportTooLarge: "max-atoms",
    TooManyClasses: "max-classes",
    IterationLimit: "max-pivots",
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.max_atoms < 1:
            raise BadParams("--max-atoms must be positive")
        if args.tol <= 0:
            raise BadParams("--tol must be positive")
        if args.command == "gen":
            text, code = cmd_gen(args)
        else:
            doc, code = COMMANDS[args.command](args)
            text = RENDER[args.format](doc)
    except tuple(CAPS) as e:
        err = CapExceeded(CAPS[type(e)], str(e))
        print(f"mechrev: cap exceeded: {err}", file=stderr)
        return USAGE
    except ParseError as e:
        print(f"mechrev: parse error: {e}", file=stderr)
        return USAGE
    except CapExceeded as e:
        print(f"mechrev: cap exceeded: {e}", file=stderr)
        return USAGE
    except MechRevError as e:
        print(f"mechrev: error: {e}", file=stderr)
        return USAGE
    stdout.write(text)
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
