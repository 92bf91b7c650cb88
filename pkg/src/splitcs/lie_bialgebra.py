"""Manin-triple structure constants: storage, validation, the double's bracket.

Indices are 1-based throughout, matching the basis xi_1..xi_n of V and the
dual basis xi^1..xi^n of W with <xi_i, xi^j> = delta_i^j.

``f[(i, j, k)]`` is f^k_{ij}, the constants of V: [xi_i, xi_j] = f^k_{ij} xi_k.
``g[(i, j, k)]`` is g_k^{ij}, the constants of W: [xi^i, xi^j] = g_k^{ij} xi^k.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

Index3 = Tuple[int, int, int]


class MalformedInputError(ValueError):
    """Structure constants or a constants file that cannot be interpreted."""


def _check_indices(c: Mapping[Index3, Fraction], dim: int) -> None:
    if dim < 1:
        raise MalformedInputError(f"dimension must be positive, got {dim}")
    for key in c:
        if len(key) != 3 or any(not (1 <= x <= dim) for x in key):
            raise MalformedInputError(f"index {key} out of range 1..{dim}")


def validate_lie_algebra(c: Mapping[Index3, Fraction], dim: int) -> List[tuple]:
    """Check antisymmetry and Jacobi for a complete bracket table.

    ``c[(i, j, k)]`` is the coefficient of basis vector k in [e_i, e_j];
    missing keys are zero.  Returns the violated tuples, tagged
    ``("antisymmetry", (i, j, k))`` or ``("jacobi", (i, j, k, m))``.
    """
    _check_indices(c, dim)
    get = lambda i, j, k: c.get((i, j, k), 0)
    rng = range(1, dim + 1)
    report = []
    for i, j, k in itertools.product(rng, repeat=3):
        if i <= j and get(i, j, k) + get(j, i, k) != 0:
            report.append(("antisymmetry", (i, j, k)))
    for i, j, k in itertools.combinations(rng, 3) if dim >= 3 else ():
        for m in rng:
            total = sum(
                get(j, k, l) * get(i, l, m)
                + get(k, i, l) * get(j, l, m)
                + get(i, j, l) * get(k, l, m)
                for l in rng
            )
            if total != 0:
                report.append(("jacobi", (i, j, k, m)))
    return report


def _expand(independent: Mapping[Index3, Fraction]) -> Dict[Index3, Fraction]:
    full = {}
    for (i, j, k), v in independent.items():
        if v:
            full[(i, j, k)] = Fraction(v)
            full[(j, i, k)] = -Fraction(v)
    return full


@dataclass(frozen=True)
class StructureConstants:
    """The pair (f, g) of a candidate Manin triple.

    Only entries with i < j are stored; ``f(i, j, k)`` and ``g(i, j, k)``
    derive the antisymmetric partners on read.
    """

    dim: int
    f_independent: Tuple[Tuple[Index3, Fraction], ...] = ()
    g_independent: Tuple[Tuple[Index3, Fraction], ...] = ()
    _f: Dict[Index3, Fraction] = field(default_factory=dict, compare=False, repr=False)
    _g: Dict[Index3, Fraction] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_maps(cls, dim: int, f=None, g=None) -> "StructureConstants":
        """Build from maps keyed (i, j, k) with i < j (i > j entries are folded in)."""
        parts = []
        for table in (f or {}, g or {}):
            _check_indices(table, dim)
            ind: Dict[Index3, Fraction] = {}
            for (i, j, k), v in table.items():
                v = Fraction(v)
                if i == j:
                    if v:
                        raise MalformedInputError(f"diagonal entry {(i, j, k)} must vanish")
                    continue
                key, sign = ((i, j, k), 1) if i < j else ((j, i, k), -1)
                ind[key] = ind.get(key, Fraction(0)) + sign * v
            parts.append(tuple(sorted((k, v) for k, v in ind.items() if v)))
        sc = cls(dim, parts[0], parts[1])
        object.__setattr__(sc, "_f", _expand(dict(parts[0])))
        object.__setattr__(sc, "_g", _expand(dict(parts[1])))
        return sc

    def f(self, i: int, j: int, k: int) -> Fraction:
        """f^k_{ij}."""
        return self._f.get((i, j, k), Fraction(0))

    def g(self, i: int, j: int, k: int) -> Fraction:
        """g_k^{ij}."""
        return self._g.get((i, j, k), Fraction(0))

    @property
    def f_table(self) -> Dict[Index3, Fraction]:
        return dict(self._f)

    @property
    def g_table(self) -> Dict[Index3, Fraction]:
        return dict(self._g)

    @property
    def indices(self) -> range:
        return range(1, self.dim + 1)

    def f_nonzero(self):
        """Nonzero (i, j, k, f^k_{ij}) including antisymmetric partners."""
        return [(i, j, k, v) for (i, j, k), v in sorted(self._f.items())]

    def g_nonzero(self):
        """Nonzero (i, j, k, g_k^{ij}) including antisymmetric partners."""
        return [(i, j, k, v) for (i, j, k), v in sorted(self._g.items())]

    def dual(self) -> "StructureConstants":
        """The swapped triple (g, f), i.e. the roles of V and W exchanged."""
        return StructureConstants.from_maps(
            self.dim, dict(self.g_independent), dict(self.f_independent)
        )

    def with_g_entry(self, i: int, j: int, k: int, value) -> "StructureConstants":
        g = dict(self.g_independent)
        g[(i, j, k)] = Fraction(value)
        return StructureConstants.from_maps(self.dim, dict(self.f_independent), g)

    def with_f_entry(self, i: int, j: int, k: int, value) -> "StructureConstants":
        f = dict(self.f_independent)
        f[(i, j, k)] = Fraction(value)
        return StructureConstants.from_maps(self.dim, f, dict(self.g_independent))

    # -- file format -----------------------------------------------------

    def to_json(self) -> str:
        def rows(ind):
            return [[i, j, k, _fmt(v)] for (i, j, k), v in ind]

        return json.dumps(
            {"dim": self.dim, "f": rows(self.f_independent), "g": rows(self.g_independent)},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "StructureConstants":
        """Parse the constants file; raises if the tables are not antisymmetric."""
        dim, f_raw, g_raw = parse_constants(text)
        bad = [t for t in validate_lie_algebra(f_raw, dim) if t[0] == "antisymmetry"]
        bad += [t for t in validate_lie_algebra(g_raw, dim) if t[0] == "antisymmetry"]
        if bad:
            raise MalformedInputError(f"tables are not antisymmetric at {bad}")
        return cls.from_maps(
            dim,
            {k: v for k, v in f_raw.items() if k[0] < k[1]},
            {k: v for k, v in g_raw.items() if k[0] < k[1]},
        )


def parse_constants(text: str):
    """Read ``{"dim": n, "f": [[i,j,k,"p/q"],...], "g": [...]}``.

    Returns ``(dim, f_raw, g_raw)`` as complete bracket tables.  Rows with
    i < j are completed antisymmetrically; a row with i >= j is taken
    literally, so an inconsistent file shows up as an antisymmetry violation.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"not JSON: {exc}") from exc
    if not isinstance(data, dict) or "dim" not in data:
        raise MalformedInputError("expected an object with a 'dim' key")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MalformedInputError("'dim' must be a positive integer")
    tables = []
    for name in ("f", "g"):
        rows = data.get(name, [])
        if not isinstance(rows, list):
            raise MalformedInputError(f"'{name}' must be a list")
        given = {}
        for row in rows:
            if not (isinstance(row, list) and len(row) == 4):
                raise MalformedInputError(f"bad {name} entry {row!r}")
            i, j, k, v = row
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j, k)):
                raise MalformedInputError(f"bad indices in {name} entry {row!r}")
            if (i, j, k) in given:
                raise MalformedInputError(f"duplicate {name} entry {(i, j, k)}")
            given[(i, j, k)] = _parse_rational(v)
        _check_indices(given, dim)
        raw = {}
        for (i, j, k), v in given.items():
            if i < j:
                raw[(i, j, k)] = v
                if (j, i, k) not in given:
                    raw[(j, i, k)] = -v
        for (i, j, k), v in given.items():
            if i >= j:
                raw[(i, j, k)] = v
        tables.append({key: v for key, v in raw.items() if v})
    return dim, tables[0], tables[1]


def validate_constants_file(text: str) -> List[tuple]:
    """Antisymmetry of the raw tables, then the full Manin-triple report."""
    dim, f_raw, g_raw = parse_constants(text)
    report = [("antisymmetry_f", t) for kind, t in validate_lie_algebra(f_raw, dim) if kind == "antisymmetry"]
    report += [("antisymmetry_g", t) for kind, t in validate_lie_algebra(g_raw, dim) if kind == "antisymmetry"]
    if report:
        return report
    return validate_manin_triple(StructureConstants.from_json(text))


def _parse_rational(v) -> Fraction:
    if isinstance(v, bool):
        raise MalformedInputError(f"not a rational: {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if not isinstance(v, str) or "." in v or "e" in v.lower():
        raise MalformedInputError(f"rationals are 'p/q' strings, got {v!r}")
    try:
        return Fraction(v)
    except ValueError as exc:
        raise MalformedInputError(f"not a rational: {v!r}") from exc


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# -- validation ----------------------------------------------------------


def compatibility_violations(sc: StructureConstants) -> List[tuple]:
    """Tuples (i, j, l, m) at which the bialgebra compatibility identity fails.

    f^k_{ij} g_k^{lm} = f^l_{ik} g_j^{km} - f^l_{jk} g_i^{km}
                        + f^m_{ik} g_j^{lk} - f^m_{jk} g_i^{lk}
    (summed over k).
    """
    f, g, rng = sc.f, sc.g, sc.indices
    bad = []
    for i, j, l, m in itertools.product(rng, repeat=4):
        lhs = sum(f(i, j, k) * g(l, m, k) for k in rng)
        rhs = sum(
            f(i, k, l) * g(k, m, j)
            - f(j, k, l) * g(k, m, i)
            + f(i, k, m) * g(l, k, j)
            - f(j, k, m) * g(l, k, i)
            for k in rng
        )
        if lhs != rhs:
            bad.append(("compatibility", (i, j, l, m)))
    return bad


def validate_manin_triple(sc: StructureConstants) -> List[tuple]:
    """Full report: Jacobi for f, Jacobi for g, then compatibility.

    Empty iff (f, g) define a Manin triple.  Jacobi failures are tagged
    ``("jacobi_f", ...)`` / ``("jacobi_g", ...)``.
    """
    # the g table is keyed (i, j, k) -> g_k^{ij}, already a bracket table for W
    report = [("jacobi_f", t) for _, t in validate_lie_algebra(sc.f_table, sc.dim)]
    report += [("jacobi_g", t) for _, t in validate_lie_algebra(sc.g_table, sc.dim)]
    report += compatibility_violations(sc)
    return report


def is_manin_triple(sc: StructureConstants) -> bool:
    return not validate_manin_triple(sc)


# -- the double g = V (+) W ------------------------------------------------


@dataclass(frozen=True)
class DoubleElement:
    """v in V (coefficients of xi_i) plus w in W (coefficients of xi^i)."""

    v: Tuple[Fraction, ...]
    w: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(Fraction(x) for x in self.v))
        object.__setattr__(self, "w", tuple(Fraction(x) for x in self.w))
        if len(self.v) != len(self.w):
            raise MalformedInputError("V and W components must have equal length")

    def __add__(self, other):
        return DoubleElement(
            tuple(a + b for a, b in zip(self.v, other.v)),
            tuple(a + b for a, b in zip(self.w, other.w)),
        )

    def scale(self, c) -> "DoubleElement":
        return DoubleElement(tuple(c * a for a in self.v), tuple(c * a for a in self.w))

    @classmethod
    def zero(cls, n: int) -> "DoubleElement":
        return cls((0,) * n, (0,) * n)


def pairing(x: DoubleElement, y: DoubleElement) -> Fraction:
    """Canonical split pairing <(v,w),(v',w')> = sum_i v_i w'_i + w_i v'_i."""
    return sum(a * d + b * c for a, b, c, d in zip(x.v, x.w, y.v, y.w))


def double_bracket(x: DoubleElement, y: DoubleElement, sc: StructureConstants) -> DoubleElement:
    """Bracket on the double.

    Mixed brackets follow from ad-invariance of the pairing:
    [xi_i, xi^j] = g_i^{jk} xi_k - f^j_{ik} xi^k.
    """
    n = sc.dim
    if len(x.v) != n or len(y.v) != n:
        raise MalformedInputError("element length does not match dimension")
    f, g, rng = sc.f, sc.g, sc.indices
    v = [Fraction(0)] * n
    w = [Fraction(0)] * n
    for i in rng:
        for j in rng:
            vv = x.v[i - 1] * y.v[j - 1]
            ww = x.w[i - 1] * y.w[j - 1]
            # x_V with y_W, and x_W with y_V = -[y_V, x_W]
            vw = x.v[i - 1] * y.w[j - 1] - y.v[i - 1] * x.w[j - 1]
            if not (vv or ww or vw):
                continue
            for k in rng:
                v[k - 1] += vv * f(i, j, k) + vw * g(j, k, i)
                w[k - 1] += ww * g(i, j, k) - vw * f(i, k, j)
    return DoubleElement(tuple(v), tuple(w))


# -- fixtures and random triples -----------------------------------------

FIXTURES = ("abelian_2", "double_2d", "iwasawa_su2")


def fixture(name: str) -> StructureConstants:
    """Named Manin triples, each certified by ``validate_manin_triple``."""
    if name == "abelian_2":
        sc = StructureConstants.from_maps(2)
    elif name == "double_2d":
        sc = StructureConstants.from_maps(2, {(1, 2, 2): 1})
    elif name == "iwasawa_su2":
        # su(2): [e_i, e_j] = eps_ijk e_k;  sb(2,C) dual: [x^1,x^3] = x^1, [x^2,x^3] = x^2
        sc = StructureConstants.from_maps(
            3,
            {(1, 2, 3): 1, (2, 3, 1): 1, (1, 3, 2): -1},
            {(1, 3, 1): 1, (2, 3, 2): 1},
        )
    else:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    report = validate_manin_triple(sc)
    if report:
        raise AssertionError(f"fixture {name} failed certification: {report[:5]}")
    return sc


_SEED_ALGEBRAS = {
    2: [{(1, 2, 2): 1}, {(1, 2, 1): 1}],
    3: [
        {(1, 2, 3): 1, (2, 3, 1): 1, (1, 3, 2): -1},  # su(2)
        {(1, 2, 3): 1},  # Heisenberg
        {(1, 3, 1): 1, (2, 3, 2): 1},  # book algebra
        {(1, 2, 3): 1, (1, 3, 2): -1},  # e(2)
        {(1, 2, 3): 2, (1, 3, 1): 1, (2, 3, 2): -1},  # sl(2), h = -e3
    ],
}


def _random_matrix(rng: random.Random, n: int):
    while True:
        m = [[Fraction(rng.randint(-3, 3)) for _ in range(n)] for _ in range(n)]
        inv = _invert(m)
        if inv is not None:
            return m, inv


def _invert(m):
    n = len(m)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                c = a[r][col]
                a[r] = [x - c * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _change_basis(table, n, m, inv):
    """Constants in the basis e'_a = sum_i m[i][a] e_i."""
    full = _expand(table)
    out = {}
    for a, b in itertools.combinations(range(n), 2):
        for c in range(n):
            s = Fraction(0)
            for (i, j, k), v in full.items():
                s += m[i - 1][a] * m[j - 1][b] * v * inv[c][k - 1]
            if s:
                out[(a + 1, b + 1, c + 1)] = s
    return out


def random_lie_algebra(rng: random.Random, dim: int) -> Dict[Index3, Fraction]:
    """A random valid bracket table (i<j entries): a seed algebra in a random basis."""
    seeds = [s for s in _SEED_ALGEBRAS.get(dim, []) if not validate_lie_algebra(_expand(s), dim)]
    if dim == 1 or not seeds:
        return {}
    m, inv = _random_matrix(rng, dim)
    return _change_basis(rng.choice(seeds), dim, m, inv)


def random_classical_double(rng: random.Random, max_dim: int = 3, dual: bool = None) -> StructureConstants:
    """Random triple with g = 0 (or, dualized, f = 0)."""
    dim = rng.randint(1, max_dim)
    table = random_lie_algebra(rng, dim)
    sc = StructureConstants.from_maps(dim, table)
    if dual is None:
        dual = rng.random() < 0.5
    return sc.dual() if dual else sc
