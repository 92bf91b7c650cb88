"""Command-line driver: validate | census | mqme | deform | latex.

Exit codes: 0 every check passed, 1 a check failed, 2 the input could not be
read.  Reports are JSON (sorted keys, fixed separators) unless ``--pretty``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import effective_action as ea
from . import feynman_graphs as fg
from . import gauge_deformation as gd
from .lie_bialgebra import (
    FIXTURES,
    MalformedInputError,
    StructureConstants,
    fixture,
    random_classical_double,
    validate_constants_file,
    validate_manin_triple,
)

SCHEMA = "splitcs.report/1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "BVBFV_SEED"


class InputError(Exception):
    pass


# -- reports -----------------------------------------------------------------


def dump_report(report: dict) -> str:
    """Canonical serialization; parsing and dumping again is byte-identical."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check(name: str, residual=None, *, ok: Optional[bool] = None, detail=None) -> dict:
    if ok is None:
        ok = not residual
    out = {"name": name, "status": "pass" if ok else "fail"}
    if residual is not None:
        out["residual_terms"] = len(residual)
        out["rendering"] = residual.render().splitlines() if residual else []
    if detail is not None:
        out["detail"] = detail
    return out


def _report(command: str, source: str, digest: str, checks: List[dict], extra=None) -> dict:
    rep = {
        "schema": SCHEMA,
        "command": command,
        "input": source,
        "input_digest": digest,
        "status": "pass" if all(c["status"] == "pass" for c in checks) else "fail",
        "checks": checks,
    }
    if extra:
        rep.update(extra)
    return rep


def _pretty(rep: dict) -> str:
    lines = [f"{rep['command']}: {rep['status'].upper()}  ({rep['input']})"]
    for c in rep["checks"]:
        tail = f"  [{c['residual_terms']} residual terms]" if c.get("residual_terms") else ""
        lines.append(f"  {c['status']:4}  {c['name']}{tail}")
        for row in c.get("rendering", [])[:10]:
            lines.append(f"          {row}")
        if c.get("detail") and c["status"] == "fail":
            lines.append(f"          {c['detail']}")
    for key in ("count", "contributing", "dot_files", "output", "elapsed_s"):
        if key in rep:
            lines.append(f"  {key}: {rep[key]}")
    return "\n".join(lines) + "\n"


# -- input ---------------------------------------------------------------------


def _digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def load_input(source: str):
    """(text, StructureConstants or None, violations) for a path or a fixture name."""
    path = Path(source)
    if path.is_file():
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(str(exc)) from exc
    elif source in FIXTURES:
        text = fixture(source).to_json()
    else:
        raise InputError(f"no such file or fixture: {source}")
    try:
        violations = validate_constants_file(text)
        sc = None if any(v[0].startswith("antisymmetry") for v in violations) else StructureConstants.from_json(text)
    except MalformedInputError as exc:
        raise InputError(str(exc)) from exc
    return text, sc, violations


def _violation_checks(violations) -> List[dict]:
    names = sorted({v[0] for v in violations})
    return [
        _check(f"manin_triple:{n}", ok=False, detail=[list(map(str, v[1])) if isinstance(v[1], tuple) else str(v[1]) for v in violations if v[0] == n][:20])
        for n in names
    ]


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def break_compatibility(sc: StructureConstants) -> StructureConstants:
    """Shift the first independent g entry (or set g_1^{12} if g is empty) by one."""
    if sc.dim < 2:
        raise InputError("--break-compatibility needs dimension at least 2")
    if sc.g_independent:
        (i, j, k), v = sc.g_independent[0]
        return sc.with_g_entry(i, j, k, v + 1)
    return sc.with_g_entry(1, 2, 1, 1)


# -- commands ------------------------------------------------------------------


def cmd_validate(args):
    text, _, violations = load_input(args.input)
    checks = [_check("manin_triple", ok=True)] if not violations else _violation_checks(violations)
    return _report("validate", args.input, _digest(text), checks, {"violations": len(violations)})


def cmd_census(args):
    t0 = time.perf_counter()
    classes = fg.enumerate_admissible(args.l, args.m, args.k, trees_only=args.trees)
    survivors = fg.prune_by_propagator_properties(list(classes))
    extra = {
        "parameters": {"l": args.l, "m": args.m, "k": args.k, "trees_only": args.trees},
        "count": len(classes),
        "contributing": len(survivors),
        "classes": [
            {
                "index": n,
                "leaves": [list(lv) for lv in c.graph.leaves],
                "arrows": [[str(t), str(h)] for t, h in c.graph.arrows],
                "automorphisms": c.automorphisms,
                "pruned_by": c.pruned_by,
                "term": fg.term_family(c) if c.pruned_by is None else None,
            }
            for n, c in enumerate(classes)
        ],
    }
    if args.dot_dir:
        out = Path(args.dot_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            paths = []
            for n, c in enumerate(classes):
                p = out / f"l{args.l}_class{n}.dot"
                p.write_text(c.graph.to_dot(f"class{n}") + "\n")
                paths.append(str(p))
        except OSError as exc:
            raise InputError(str(exc)) from exc
        extra["dot_files"] = paths
    if args.timing:
        extra["elapsed_s"] = round(time.perf_counter() - t0, 4)
    return _report("census", "graphs", _digest(json.dumps(extra["parameters"], sort_keys=True)), [], extra)


def _action_for(args, text):
    """Effective action plus preliminary checks; None when validation already failed."""
    _, sc, violations = load_input(args.input)
    checks = []
    if getattr(args, "break_compatibility", False):
        if sc is None:
            return None, _violation_checks(violations)
        sc = break_compatibility(sc)
        checks += _violation_checks(validate_manin_triple(sc))
        return ea.build_terms(sc, validate=False), checks
    if violations:
        return None, _violation_checks(violations)
    return ea.build_terms(sc), checks


def _random_actions(args):
    if not args.random:
        return []
    rng = random.Random(resolve_seed(args.seed))
    return [(f"random[{n}]", ea.build_terms(random_classical_double(rng))) for n in range(args.random)]


def cmd_mqme(args):
    text, _, _ = load_input(args.input)
    t0 = time.perf_counter()
    S, checks = _action_for(args, text)
    items = args.which.split(",") if args.which else list(ea.LEMMA1_ITEMS)
    for it in items:
        if it not in ea.LEMMA1_ITEMS:
            raise InputError(f"unknown identity {it!r}; choose from {','.join(ea.LEMMA1_ITEMS)}")
    targets = ([("input", S)] if S is not None else []) + _random_actions(args)
    for label, act in targets:
        pre = "" if label == "input" else f"{label}:"
        for it in items:
            checks.append(_check(f"{pre}lemma1({it})", ea.lemma1_check(act, it)))
        dS = ea.delta_seff(act)
        checks.append(_check(f"{pre}delta_seff", ok=not dS, detail=str(dS)))
        checks.append(_check(f"{pre}mqme_residual", ea.mqme_residual(act)))
    extra = {"elapsed_s": round(time.perf_counter() - t0, 4)} if args.timing else None
    return _report("mqme", args.input, _digest(text), checks, extra)


def cmd_deform(args):
    text, _, _ = load_input(args.input)
    t0 = time.perf_counter()
    S, checks = _action_for(args, text)
    targets = ([("input", S)] if S is not None else []) + _random_actions(args)
    for label, act in targets:
        pre = "" if label == "input" else f"{label}:"
        for it in gd.LEMMA2_ITEMS:
            checks.append(_check(f"{pre}lemma2({it})", gd.lemma2_check(act, it)))
        checks.append(_check(f"{pre}deformation_residual", gd.deformation_residual(act)))
    extra = {"elapsed_s": round(time.perf_counter() - t0, 4)} if args.timing else None
    return _report("deform", args.input, _digest(text), checks, extra)


def latex_document(S: ea.EffectiveAction) -> str:
    lines = [
        r"\documentclass{article}",
        r"\usepackage{amsmath}",
        r"\begin{document}",
    ]
    for label in S.nonzero_labels():
        lines += [r"\begin{align*}", rf"S^{{\mathrm{{eff}}}}_{{{label[1:]}}} &= {S[label].to_latex()}", r"\end{align*}"]
    zeta = gd.build_zeta(S)
    if zeta:
        lines += [r"\begin{align*}", rf"\zeta &= {zeta.to_latex()}", r"\end{align*}"]
    lines.append(r"\end{document}")
    return "\n".join(lines) + "\n"


def cmd_latex(args):
    text, sc, violations = load_input(args.input)
    if violations:
        return _report("latex", args.input, _digest(text), _violation_checks(violations))
    S = ea.build_terms(sc)
    doc = latex_document(S)
    try:
        Path(args.out).write_text(doc)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    extra = {"output": args.out, "terms": S.nonzero_labels()}
    return _report("latex", args.input, _digest(text), [_check("rendered", ok=True)], extra)


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splitcs", description=__doc__.splitlines()[0])
    p.add_argument("--pretty", action="store_true", help="human-readable text instead of JSON")
    p.add_argument("--timing", action="store_true", help="include wall-clock time (reports are then not reproducible)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a constants file defines a Manin triple")
    v.add_argument("input", help="constants JSON file or fixture name")

    c = sub.add_parser("census", help="enumerate admissible graphs")
    c.add_argument("--l", type=int, default=1, help="interaction vertices")
    c.add_argument("--m", type=int, default=None, help="maximum number of sources")
    c.add_argument("--k", type=int, default=1, help="maximum number of background vertices")
    c.add_argument("--trees", action="store_true", help="trees only")
    c.add_argument("--dot-dir", default=None, help="write one DOT file per class here")

    for name, text in (("mqme", "check the master-equation identities"), ("deform", "check the change-of-data identities")):
        q = sub.add_parser(name, help=text)
        q.add_argument("input", help="constants JSON file or fixture name")
        q.add_argument("--break-compatibility", action="store_true", help="perturb one g entry first")
        q.add_argument("--random", type=int, default=0, help="also check this many random classical doubles")
        q.add_argument("--seed", type=int, default=None, help=f"seed for --random (fallback: ${SEED_ENV}, then 0)")
        if name == "mqme":
            q.add_argument("--which", default=None, help="comma-separated identities, e.g. i,iii")

    t = sub.add_parser("latex", help="write S0..S5 and zeta as a LaTeX document")
    t.add_argument("input", help="constants JSON file or fixture name")
    t.add_argument("out", help="output .tex path")
    return p


COMMANDS = {"validate": cmd_validate, "census": cmd_census, "mqme": cmd_mqme, "deform": cmd_deform, "latex": cmd_latex}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "census" and min(args.l, args.k, args.m if args.m is not None else 0) < 0:
            raise InputError("counts must be non-negative")
        rep = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(_pretty(rep) if args.pretty else dump_report(rep))
    return EXIT_OK if rep["status"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
