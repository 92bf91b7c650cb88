import json
import random
from fractions import Fraction

import pytest

from splitcs.lie_bialgebra import (
    FIXTURES,
    DoubleElement,
    MalformedInputError,
    StructureConstants,
    double_bracket,
    fixture,
    pairing,
    random_classical_double,
    validate_constants_file,
    validate_lie_algebra,
    validate_manin_triple,
)


def test_abelian_algebra_is_valid():
    assert validate_lie_algebra({}, 2) == []


def test_two_dimensional_nonabelian_algebra_is_valid():
    assert validate_lie_algebra({(1, 2, 2): Fraction(1), (2, 1, 2): Fraction(-1)}, 2) == []


def test_antisymmetry_violation_is_reported():
    report = validate_lie_algebra({(1, 2, 1): Fraction(1)}, 2)
    assert ("antisymmetry", (1, 2, 1)) in report


def test_jacobi_violation_is_reported():
    bad = {(1, 2, 3): 1, (2, 3, 1): 1, (1, 3, 2): -1, (1, 2, 1): 1}
    sc_table = StructureConstants.from_maps(3, bad).f_table
    assert any(kind == "jacobi" for kind, _ in validate_lie_algebra(sc_table, 3))


def test_index_out_of_range_is_malformed():
    with pytest.raises(MalformedInputError):
        validate_lie_algebra({(1, 3, 1): Fraction(1)}, 2)


def test_manin_triple_examples():
    assert validate_manin_triple(StructureConstants.from_maps(1)) == []
    assert validate_manin_triple(StructureConstants.from_maps(2, {(1, 2, 2): 1})) == []
    assert validate_manin_triple(StructureConstants.from_maps(2, {(1, 2, 2): 1}, {(1, 2, 1): 1})) == []


def test_compatibility_oracle_brute_force():
    """Check the compatibility identity by an independent loop on random tables."""
    rng = random.Random(5)
    for _ in range(20):
        f = {(1, 2, k): Fraction(rng.randint(-1, 1)) for k in (1, 2)}
        g = {(1, 2, k): Fraction(rng.randint(-1, 1)) for k in (1, 2)}
        sc = StructureConstants.from_maps(2, f, g)
        F, G, r = sc.f, sc.g, sc.indices
        ok = all(
            sum(F(i, j, k) * G(l, m, k) for k in r)
            == sum(
                F(i, k, l) * G(k, m, j) - F(j, k, l) * G(k, m, i) + F(i, k, m) * G(l, k, j) - F(j, k, m) * G(l, k, i)
                for k in r
            )
            for i in r
            for j in r
            for l in r
            for m in r
        )
        assert ok == (not any(t[0] == "compatibility" for t in validate_manin_triple(sc)))


def test_fixture_contents():
    a = fixture("abelian_2")
    assert a.dim == 2 and not a.f_table and not a.g_table
    d = fixture("double_2d")
    assert d.f(1, 2, 2) == 1 and d.f(2, 1, 2) == -1 and not d.g_table
    w = fixture("iwasawa_su2")
    assert w.dim == 3 and w.f_table and w.g_table
    assert w.f(1, 2, 3) == w.f(2, 3, 1) == w.f(3, 1, 2) == 1


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture("nope")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_and_their_duals_are_manin_triples(name):
    sc = fixture(name)
    assert validate_manin_triple(sc) == []
    assert validate_manin_triple(sc.dual()) == []


@pytest.mark.parametrize("seed", range(20))
def test_random_classical_doubles_are_valid(seed):
    sc = random_classical_double(random.Random(seed))
    assert validate_manin_triple(sc) == []
    assert validate_manin_triple(sc.dual()) == []
    assert not sc.f_table or not sc.g_table


def _rand_elem(rng, n):
    q = lambda: Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return DoubleElement(tuple(q() for _ in range(n)), tuple(q() for _ in range(n)))


def test_bracket_restricts_to_v():
    sc = fixture("double_2d")
    e1 = DoubleElement((Fraction(1), Fraction(0)), (Fraction(0),) * 2)
    e2 = DoubleElement((Fraction(0), Fraction(1)), (Fraction(0),) * 2)
    assert double_bracket(e1, e2, sc) == e2


def test_mixed_bracket_vanishes_for_abelian_triple():
    sc = fixture("abelian_2")
    x = DoubleElement((Fraction(1), Fraction(2)), (Fraction(0),) * 2)
    y = DoubleElement((Fraction(0),) * 2, (Fraction(3), Fraction(-1)))
    assert double_bracket(x, y, sc) == DoubleElement.zero(2)


@pytest.mark.parametrize("name", FIXTURES)
def test_pairing_is_invariant(name):
    sc = fixture(name)
    rng = random.Random(17)
    for _ in range(100):
        x, y, z = (_rand_elem(rng, sc.dim) for _ in range(3))
        assert pairing(double_bracket(x, y, sc), z) + pairing(y, double_bracket(x, z, sc)) == 0


@pytest.mark.parametrize("name", FIXTURES)
def test_double_bracket_jacobi(name):
    sc = fixture(name)
    rng = random.Random(23)
    for _ in range(100):
        x, y, z = (_rand_elem(rng, sc.dim) for _ in range(3))
        b = lambda p, q: double_bracket(p, q, sc)
        total = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
        assert total == DoubleElement.zero(sc.dim)


def test_pairing_is_symmetric_and_nondegenerate():
    rng = random.Random(3)
    for _ in range(20):
        x, y = _rand_elem(rng, 3), _rand_elem(rng, 3)
        assert pairing(x, y) == pairing(y, x)
    basis = []
    for k in range(6):
        vec = [Fraction(0)] * 6
        vec[k] = Fraction(1)
        basis.append(DoubleElement(tuple(vec[:3]), tuple(vec[3:])))
    assert all(any(pairing(e, f) for f in basis) for e in basis)


def test_json_round_trip():
    for name in FIXTURES:
        sc = fixture(name)
        assert StructureConstants.from_json(sc.to_json()) == sc


def test_file_format_rejects_floats_and_bad_rows():
    with pytest.raises(MalformedInputError):
        StructureConstants.from_json(json.dumps({"dim": 2, "f": [[1, 2, 2, 0.5]]}))
    with pytest.raises(MalformedInputError):
        StructureConstants.from_json(json.dumps({"dim": 2, "f": [[1, 2, 2]]}))
    with pytest.raises(MalformedInputError):
        StructureConstants.from_json("not json")


def test_inconsistent_file_reports_antisymmetry():
    text = json.dumps({"dim": 2, "f": [[1, 2, 2, "1"], [2, 1, 2, "1"]], "g": []})
    report = validate_constants_file(text)
    assert report and report[0][0] == "antisymmetry_f"
