"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` for the summary only.
"""

import contextlib
import io
import json
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from generators import random_functional, random_homogeneous, random_poly, random_tagged_product, random_word, rng_for  # noqa: E402
from splitcs import cli  # noqa: E402
from splitcs.config_forms import (  # noqa: E402
    A,
    abstract_model,
    canonical_word,
    check_abelian_mqme,
    contract,
    omega_st_tagged,
)
from splitcs.effective_action import LEMMA1_ITEMS, build_terms, delta_seff, lemma1_check, mqme_residual  # noqa: E402
from splitcs.feynman_graphs import enumerate_admissible  # noqa: E402
from splitcs.gauge_deformation import LEMMA2_ITEMS, build_zeta, cartan_residual, deformation_residual, lemma2_check  # noqa: E402
from splitcs.graded_algebra import bv_bracket, bv_laplacian  # noqa: E402
from splitcs.lie_bialgebra import FIXTURES, fixture, random_classical_double  # noqa: E402

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def _failures(label, items):
    bad = [name for name, residual in items if residual]
    return bad, f"{label}: {len(items) - len(bad)}/{len(items)} zero" + (f"; nonzero: {', '.join(bad[:6])}" if bad else "")


# -- criteria ------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    counts = (len(enumerate_admissible(0, 0, 1)), len(enumerate_admissible(1, trees_only=True)), len(enumerate_admissible(2, m=2, trees_only=True)))
    dt = time.perf_counter() - t0
    return counts == (1, 3, 5) and dt < 1.0, f"counts {counts}, {dt:.2f}s"


def _lemma1_targets():
    targets = [(name, fixture(name)) for name in FIXTURES]
    rng = random.Random(2024)
    targets += [(f"random{n}", random_classical_double(rng, max_dim=3)) for n in range(20)]
    return targets


def criterion_2():
    t0 = time.perf_counter()
    items = []
    for name, sc in _lemma1_targets():
        S = build_terms(sc)
        items += [(f"{name}({it})", lemma1_check(S, it)) for it in LEMMA1_ITEMS]
    dt = time.perf_counter() - t0
    bad, msg = _failures("lemma residuals", items)
    return not bad and dt < 30, f"{msg}, {dt:.1f}s"


def criterion_3():
    bad, msg = _failures("mQME", [(name, mqme_residual(fixture(name))) for name in FIXTURES])
    return not bad, msg


def criterion_4():
    bad, msg = _failures("Delta S", [(name, delta_seff(fixture(name))) for name in FIXTURES])
    return not bad, msg


def criterion_5():
    sc = fixture("iwasawa_su2")
    items = []
    for seed in range(50):
        P = random_tagged_product(rng_for(10_000 + seed))
        items.append((f"seed{seed}", omega_st_tagged(omega_st_tagged(P, sc), sc)))
    bad, msg = _failures("Omega^2", items)
    return not bad, msg


def criterion_6():
    good = [check_abelian_mqme(abstract_model(d)) for d in ((1,), (1, 2))]
    corrupted = check_abelian_mqme(abstract_model((1,), corrupt=1))
    ok = not any(good) and bool(corrupted)
    return ok, f"1 pair: {len(good[0])} terms, 2 pairs: {len(good[1])} terms, corrupted: {len(corrupted)} terms"


def criterion_7():
    t0 = time.perf_counter()
    items = []
    for name in FIXTURES:
        S = build_terms(fixture(name))
        items += [(f"{name}({it})", lemma2_check(S, it)) for it in LEMMA2_ITEMS]
        items.append((f"{name}(total)", deformation_residual(S)))
    dt = time.perf_counter() - t0
    bad, msg = _failures("change-of-data residuals", items)
    return not bad and dt < 60, f"{msg}, {dt:.1f}s"


def _par(g):
    return g & 1


def _property_failures():
    fails = {}
    for seed in range(100):
        rng = rng_for(20_000 + seed)
        p = random_poly(rng)
        fails.setdefault("Delta^2", 0)
        fails["Delta^2"] += bool(bv_laplacian(bv_laplacian(p)))
        (x, a), (y, b), (z, _) = (random_homogeneous(rng, max_terms=3) for _ in range(3))
        sym = bv_bracket(x, y) != bv_bracket(y, x).scale(-((-1) ** ((_par(a) + 1) * (_par(b) + 1))))
        leib = bv_bracket(x, y * z) != bv_bracket(x, y) * z + (y * bv_bracket(x, z)).scale((-1) ** ((_par(a) + 1) * _par(b)))
        jac = bv_bracket(x, bv_bracket(y, z)) != bv_bracket(bv_bracket(x, y), z) + bv_bracket(y, bv_bracket(x, z)).scale(
            (-1) ** ((_par(a) + 1) * (_par(b) + 1))
        )
        for key, bad in (("symmetry", sym), ("Leibniz", leib), ("Jacobi", jac)):
            fails[key] = fails.get(key, 0) + bad
        forms, pts = random_word(rng)
        fields = tuple(A(rng.randint(1, 3), q) for q in pts)
        s, cf, cx = canonical_word(forms, fields)
        fails["canonicalize"] = fails.get("canonicalize", 0) + bool(s and canonical_word(cf, cx) != (1, cf, cx))
        F = random_functional(rng)
        fails["iota^2"] = fails.get("iota^2", 0) + bool(contract(contract(F)))
        fails["Cartan"] = fails.get("Cartan", 0) + bool(cartan_residual(F))
    return fails


def criterion_8():
    fails = _property_failures()
    return not any(fails.values()), ", ".join(f"{k} {100 - v}/100" for k, v in fails.items())


def criterion_9():
    bad = []
    for name in FIXTURES:
        S = build_terms(fixture(name))
        for label, F in S.terms.items():
            if F and F.ghost_numbers() != {0}:
                bad.append(f"{name}:{label}")
        zeta = build_zeta(S)
        if zeta and zeta.ghost_numbers() != {-1}:
            bad.append(f"{name}:zeta")
    return not bad, "all S terms ghost 0, all zeta terms ghost -1" if not bad else f"wrong ghost: {bad}"


def _cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv)
    rep = json.loads(buf.getvalue())
    return code, [c["name"] for c in rep["checks"] if c["status"] == "fail"]


def criterion_10():
    runs = {
        "break-compatibility": _cli(["mqme", str(FIXTURE_DIR / "iwasawa_su2.json"), "--break-compatibility"]),
        "broken-jacobi mqme": _cli(["mqme", str(FIXTURE_DIR / "broken_jacobi.json")]),
        "broken-jacobi deform": _cli(["deform", str(FIXTURE_DIR / "broken_jacobi.json")]),
    }
    ok = all(code == 1 and names for code, names in runs.values())
    return ok, "; ".join(f"{k}: exit {c}, {names[:2]}" for k, (c, names) in runs.items())


CRITERIA = [
    (1, "diagram census", criterion_1),
    (2, "bracket/boundary-operator identities", criterion_2),
    (3, "composite mQME", criterion_3),
    (4, "Delta S_eff = 0", criterion_4),
    (5, "Omega_st^2 = 0", criterion_5),
    (6, "abelian BF calibration", criterion_6),
    (7, "change-of-data identities", criterion_7),
    (8, "property suites", criterion_8),
    (9, "ghost-number invariant", criterion_9),
    (10, "negative controls", criterion_10),
]


def _line(num, title, ok, detail):
    return f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'}  {title}  ({detail})"


@pytest.mark.parametrize("num, title, fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        results.append(ok)
        print(_line(num, title, ok, detail))
    sys.exit(0 if all(results) else 1)
