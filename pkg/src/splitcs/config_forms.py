"""Symbolic configuration-space integrals of boundary forms.

A term is ``c * int_{C_n} sigma_1 ... sigma_r A^{j_1}_{p_1} ... A^{j_s}_{p_s}``:
a graded polynomial ``c`` in residual fields (always kept on the left), a word
of form symbols, and a word of field insertions.  Every point that appears is
integrated over a copy of an even-dimensional boundary, so relabelling points
never produces an orientation sign; all signs come from Koszul reordering by
total degree.

The compactified configuration space is never modelled geometrically.  Its
only two algebraic shadows are the rewrite of d(eta) through the cohomology
model and the collapse of a pair of points joined by a propagator.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

from .graded_algebra import (
    Coefficient,
    GradedPolynomial,
    GradedVariable,
    I,
    bv_bracket,
    bv_laplacian,
)
from .lie_bialgebra import StructureConstants

PLAIN, IOTA, LIE = 0, 1, 2
_OP_NAMES = {PLAIN: "", IOTA: "i", LIE: "L"}


class PreconditionError(ValueError):
    """An operation was applied outside its domain."""


class RegularizationError(PreconditionError):
    """The two-derivative operator was asked to act on a single factor."""


class Form(NamedTuple):
    """A form symbol.

    ``base`` is one of ``dt``, ``dth``, ``eta`` or ``chi``; ``deg`` is the
    form degree of the base symbol; ``op`` wraps it in a contraction (form
    degree - 1) or a Lie derivative (degree unchanged).  For ``chi`` the
    label is +i for the relative class chi_i and -i for its dual chi^i.
    """

    op: int
    base: str
    label: int
    deg: int
    pts: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return self.deg - 1 if self.op == IOTA else self.deg

    def __str__(self):
        pts = "".join(str(p) for p in self.pts)
        if self.base == "chi":
            name = f"chi_{self.label}" if self.label > 0 else f"chi^{-self.label}"
        else:
            name = self.base
        core = f"{name}[{pts}]"
        return f"{_OP_NAMES[self.op]}({core})" if self.op else core


class Field(NamedTuple):
    """A boundary-field insertion A^j or B_j at a point (total degree 1).

    ``tag`` records which factor of a product the insertion came from; it is
    only non-zero inside the two-derivative operator.
    """

    name: str
    index: int
    pt: int
    tag: int = 0

    def __str__(self):
        t = f"#{self.tag}" if self.tag else ""
        return f"{self.name}{self.index}[{self.pt}]{t}"


def dt(p):
    return Form(PLAIN, "dt", 0, 1, (p,))


def dth(p):
    return Form(PLAIN, "dth", 0, 1, (p,))


def eta(a, b):
    return Form(PLAIN, "eta", 0, 1, (a, b))


def chi(label, deg, p):
    return Form(PLAIN, "chi", label, deg, (p,))


def A(j, p):
    return Field("A", j, p)


def B(j, p):
    return Field("B", j, p)


Word = Tuple[Tuple[Form, ...], Tuple[Field, ...]]


def forms_parity(forms: Sequence[Form]) -> int:
    return sum(f.degree for f in forms) & 1


def word_parity(forms, fields) -> int:
    return (sum(f.degree for f in forms) + len(fields)) & 1


def word_ghost(forms, fields) -> int:
    """Total degree of int_{C_n} word: form degrees + fields - 2 per point."""
    pts = _points(forms, fields)
    return sum(f.degree for f in forms) + len(fields) - 2 * len(pts)


def _points(forms, fields):
    s = {p for f in forms for p in f.pts}
    s.update(x.pt for x in fields)
    return s


def _koszul_sort(items, parity) -> Tuple[int, tuple]:
    """Insertion sort with the graded sign; (0, ()) if an odd item repeats."""
    items = list(items)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] >= items[j]:
            a, b = items[j - 1], items[j]
            if a == b:
                if parity(a):
                    return 0, ()
                break
            if parity(a) and parity(b):
                sign = -sign
            items[j - 1], items[j] = b, a
            j -= 1
    return sign, tuple(items)


def _form_odd(f: Form) -> int:
    return f.degree & 1


def _field_odd(_: Field) -> int:
    return 1


def _relabel(forms, fields, mapping):
    nf = tuple(f._replace(pts=tuple(mapping.get(p, p) for p in f.pts)) for f in forms)
    nx = tuple(x._replace(pt=mapping.get(x.pt, x.pt)) for x in fields)
    return nf, nx


@functools.lru_cache(maxsize=200_000)
def canonical_word(forms: Tuple[Form, ...], fields: Tuple[Field, ...], fixed: frozenset = frozenset()):
    """Canonical representative of a word: (sign, forms, fields), sign 0 if it vanishes.

    Points outside ``fixed`` are relabelled 1, 2, ... (skipping fixed labels)
    by trying every assignment and keeping the smallest sorted word.  If two
    assignments give the same word with opposite signs the word is zero.
    """
    pts = sorted(_points(forms, fields) - fixed)
    labels = []
    nxt = 1
    while len(labels) < len(pts):
        if nxt not in fixed:
            labels.append(nxt)
        nxt += 1
    best = None
    best_sign = 0
    for perm in itertools.permutations(labels):
        mapping = dict(zip(pts, perm))
        nf, nx = _relabel(forms, fields, mapping)
        s1, sf = _koszul_sort(nf, _form_odd)
        if not s1:
            return 0, (), ()
        s2, sx = _koszul_sort(nx, _field_odd)
        if not s2:
            return 0, (), ()
        key = (sf, sx)
        if best is None or key < best:
            best, best_sign = key, s1 * s2
        elif key == best and s1 * s2 != best_sign:
            return 0, (), ()
    if best is None:
        return 1, (), ()
    return best_sign, best[0], best[1]


def _poly_parity_parts(c: GradedPolynomial):
    even, odd = c.split_parity()
    if even:
        yield 0, even
    if odd:
        yield 1, odd


class Functional:
    """Finite formal sum of configuration-space integrals, keyed by canonical word."""

    __slots__ = ("terms",)

    def __init__(self):
        self.terms: Dict[Word, GradedPolynomial] = {}

    @classmethod
    def term(cls, coeff, forms=(), fields=(), fixed=frozenset()) -> "Functional":
        F = cls()
        F.add_term(coeff, forms, fields, fixed)
        return F

    @classmethod
    def scalar(cls, coeff: GradedPolynomial) -> "Functional":
        return cls.term(coeff)

    def add_term(self, coeff: GradedPolynomial, forms=(), fields=(), fixed=frozenset(), sign=1):
        if not coeff:
            return
        s, cf, cx = canonical_word(tuple(forms), tuple(fields), frozenset(fixed))
        if not s:
            return
        s *= sign
        key = (cf, cx)
        c = coeff if s > 0 else -coeff
        old = self.terms.get(key)
        c = c if old is None else old + c
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def copy(self) -> "Functional":
        F = Functional()
        F.terms = dict(self.terms)
        return F

    def __iter__(self):
        for (forms, fields), c in self.terms.items():
            yield c, forms, fields

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Functional):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other: "Functional") -> "Functional":
        F = self.copy()
        for (forms, fields), c in other.terms.items():
            old = F.terms.get((forms, fields))
            c = c if old is None else old + c
            if c:
                F.terms[(forms, fields)] = c
            else:
                F.terms.pop((forms, fields), None)
        return F

    def __neg__(self):
        F = Functional()
        F.terms = {k: -c for k, c in self.terms.items()}
        return F

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Functional":
        F = Functional()
        for k, v in self.terms.items():
            v = v.scale(c)
            if v:
                F.terms[k] = v
        return F

    def map_coefficients(self, fn) -> "Functional":
        F = Functional()
        for k, v in self.terms.items():
            v = fn(v)
            if v:
                F.terms[k] = v
        return F

    def filter(self, max_fields=None, max_order=None, hbar_power=None) -> "Functional":
        """Truncate by number of field insertions, interaction order and hbar power."""
        F = Functional()
        for (forms, fields), c in self.terms.items():
            if max_fields is not None and len(fields) > max_fields:
                continue
            c = c.filter(
                lambda k: (max_order is None or k[1] <= max_order)
                and (hbar_power is None or k[0] == hbar_power)
            )
            if c:
                F.terms[(forms, fields)] = c
        return F

    def strip_tags(self) -> "Functional":
        F = Functional()
        for c, forms, fields in self:
            F.add_term(c, forms, tuple(x._replace(tag=0) for x in fields))
        return F

    def tagged(self, tag: int) -> "Functional":
        F = Functional()
        for c, forms, fields in self:
            F.add_term(c, forms, tuple(x._replace(tag=tag) for x in fields))
        return F

    def ghost_numbers(self):
        """Total ghost number of every (monomial, word) pair."""
        out = set()
        for c, forms, fields in self:
            w = word_ghost(forms, fields)
            for (_, _, m) in c.terms:
                out.add(sum(x.ghost for x in m) + w)
        return out

    def hbar_powers(self):
        return {k[0] for c, _, _ in self for k in c.terms}

    def orders(self):
        return {k[1] for c, _, _ in self for k in c.terms}

    def field_counts(self):
        return {len(fields) for _, _, fields in self}

    # -- rendering -------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0][1]), kv[0]))

    def render(self) -> str:
        if not self.terms:
            return "0"
        lines = []
        for (forms, fields), c in self.sorted_terms():
            word = " ".join([str(f) for f in forms] + [str(x) for x in fields])
            lines.append(f"[{c}] * int {word}" if word else f"[{c}]")
        return "\n".join(lines)

    __str__ = render

    def to_json_obj(self):
        out = []
        for (forms, fields), c in self.sorted_terms():
            out.append(
                {
                    "coefficient": str(c),
                    "forms": [str(f) for f in forms],
                    "fields": [str(x) for x in fields],
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for (forms, fields), c in self.sorted_terms():
            pts = sorted(_points(forms, fields))
            word = " ".join([_latex_form(f) for f in forms] + [_latex_field(x) for x in fields])
            if pts:
                dom = rf"C_{{{len(pts)}}}(\partial_1 M)" if len(pts) > 1 else r"\partial_1 M"
                out.append(rf"\left({c.to_latex()}\right)\int_{{{dom}}} {word}")
            else:
                out.append(c.to_latex())
        return " \\\\\n&+ ".join(out)


def _latex_form(f: Form) -> str:
    pts = "".join(str(p) for p in f.pts)
    core = {
        "dt": rf"dt_{{{pts}}}",
        "dth": rf"d\theta_{{{pts}}}",
        "eta": rf"\eta^T_{{{pts}}}",
    }.get(f.base)
    if core is None:
        core = rf"\chi_{{{f.label}}}({pts})" if f.label > 0 else rf"\chi^{{{-f.label}}}({pts})"
    if f.op == IOTA:
        return rf"\iota_X({core})"
    if f.op == LIE:
        return rf"L_X({core})"
    return core


def _latex_field(x: Field) -> str:
    name = r"\mathbb{A}" if x.name == "A" else r"\mathbb{B}"
    return rf"{name}^{{{x.index}}}_{{{x.pt}}}" if x.name == "A" else rf"{name}_{{{x.index},{x.pt}}}"


# -- products and brackets --------------------------------------------------


def _shift(forms, fields, offset, keep=frozenset()):
    mapping = {p: p + offset for p in _points(forms, fields) if p not in keep}
    return _relabel(forms, fields, mapping)


def multiply(F: Functional, G: Functional, shared=frozenset()) -> Functional:
    """Graded product.  Points of G are shifted apart from those of F except ``shared``."""
    out = Functional()
    for c1, f1, x1 in F:
        pts1 = _points(f1, x1)
        offset = max(pts1 | {0})
        w1 = word_parity(f1, x1)
        for c2, f2, x2 in G:
            f2s, x2s = _shift(f2, x2, offset, shared)
            sign = -1 if (len(x1) & 1) and forms_parity(f2s) else 1
            for par, part in _poly_parity_parts(c2):
                s = -sign if (w1 and par) else sign
                out.add_term(c1 * part, f1 + f2s, x1 + x2s, fixed=shared, sign=s)
    return out


def product(*factors: Functional) -> Functional:
    out = Functional.scalar(GradedPolynomial.const(1))
    for F in factors:
        out = multiply(out, F)
    return out


def bracket(F: Functional, G: Functional) -> Functional:
    """BV bracket paired through the residual-field coefficients.

    (c1 W1, c2 W2) = (-1)^{|W1|(|c2|+1)} (c1, c2) W1 W2, the bracket induced by
    Delta acting on the leftmost (coefficient) factor.
    """
    out = Functional()
    for c1, f1, x1 in F:
        offset = max(_points(f1, x1) | {0})
        w1 = word_parity(f1, x1)
        for c2, f2, x2 in G:
            f2s, x2s = _shift(f2, x2, offset)
            sign = -1 if (len(x1) & 1) and forms_parity(f2s) else 1
            for par, part in _poly_parity_parts(c2):
                br = bv_bracket(c1, part)
                if not br:
                    continue
                s = sign * (-1 if (w1 and not par) else 1)
                out.add_term(br, f1 + f2s, x1 + x2s, sign=s)
    return out


def laplacian(F: Functional) -> Functional:
    return F.map_coefficients(bv_laplacian)


# -- cohomology models and the de Rham differential -------------------------


@dataclass(frozen=True)
class CohomologyModel:
    """Cohomology basis with its dual under the integration pairing.

    ``basis`` lists (label, degree, word-builder) where the builder maps a
    point to a tuple of Forms.  ``dual`` lists, for each basis element, the
    dual element as a list of (rational coefficient, basis position).
    ``eta_sign`` gives the sign of the term chi_i(a) chi^i(b) in d(eta_ab);
    the default is (-1)^{deg chi_i}.
    """

    name: str
    basis: Tuple[Tuple[str, int, Callable[[int], Tuple[Form, ...]]], ...]
    dual: Tuple[Tuple[Tuple[Fraction, int], ...], ...]
    eta_degree: int = 1
    eta_sign: Callable[[int], int] = staticmethod(lambda deg: -1 if deg & 1 else 1)
    corrupt: int = 0  # flips the sign of one dual pair (negative control)

    def d_eta(self, a: int, b: int) -> List[Tuple[Fraction, Tuple[Form, ...]]]:
        out = []
        for i, (_, deg, word) in enumerate(self.basis):
            s = self.eta_sign(deg) * (-1 if self.corrupt and i == self.corrupt - 1 else 1)
            for coef, j in self.dual[i]:
                out.append((s * coef, word(a) + self.basis[j][2](b)))
        return out


def torus_model(orientation: int = 1) -> CohomologyModel:
    """H(T^2) with basis {1, dt, dth, dt dth}; int_{T^2} dt dth = orientation."""
    basis = (
        ("1", 0, lambda p: ()),
        ("dt", 1, lambda p: (dt(p),)),
        ("dth", 1, lambda p: (dth(p),)),
        ("dtdth", 2, lambda p: (dt(p), dth(p))),
    )
    # pairing matrix P_ij = int chi_i chi_j
    n = len(basis)
    P = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s, cf, _ = canonical_word(basis[i][2](1) + basis[j][2](1), ())
            if s and cf == (dt(1), dth(1)):
                P[i][j] = Fraction(s * orientation)
    from .lie_bialgebra import _invert

    inv = _invert(P)
    if inv is None:
        raise PreconditionError("torus pairing is degenerate")
    # dual of chi_k is sum_j inv[j][k] chi_j so that int chi_i dual_k = delta_ik
    dual = tuple(tuple((inv[j][k], j) for j in range(n) if inv[j][k]) for k in range(n))
    return CohomologyModel("torus", basis, dual)


def abstract_model(degrees: Sequence[int], corrupt: int = 0) -> CohomologyModel:
    """Abstract relative classes chi_i of the given degrees with duals chi^i (degree 3 - d)."""
    basis = []
    for i, d in enumerate(degrees, start=1):
        basis.append((f"chi_{i}", d, (lambda lab, dd: lambda p: (chi(lab, dd, p),))(i, d)))
    for i, d in enumerate(degrees, start=1):
        basis.append((f"chi^{i}", 3 - d, (lambda lab, dd: lambda p: (chi(-lab, dd, p),))(i, 3 - d)))
    n = len(degrees)
    # d(eta) only sums over the relative classes
    dual = tuple(((Fraction(1), n + i),) for i in range(n)) + tuple(() for _ in range(n))
    return CohomologyModel(f"abstract{tuple(degrees)}", tuple(basis), dual, eta_degree=2, corrupt=corrupt)


TORUS = torus_model()


def _derivation(forms, rule, odd: bool):
    """Apply a (graded) derivation symbol-by-symbol.

    ``rule(form)`` returns [(coef, replacement forms)]; odd derivations pick up
    (-1)^{degree of the preceding symbols}.
    """
    out = []
    prefix_deg = 0
    for pos, f in enumerate(forms):
        for coef, repl in rule(f):
            s = -1 if (odd and prefix_deg & 1) else 1
            out.append((s * coef, forms[:pos] + tuple(repl) + forms[pos + 1:]))
        prefix_deg += f.degree
    return out


def iota_rule(f: Form):
    if f.op == PLAIN:
        if f.deg == 0:
            return []
        return [(1, (f._replace(op=IOTA),))]
    if f.op == IOTA:
        return []
    raise PreconditionError(f"contraction of {f} is not represented")


def lie_rule(f: Form):
    if f.op == PLAIN:
        return [(1, (f._replace(op=LIE),))]
    raise PreconditionError(f"Lie derivative of {f} is not represented")


def iota_word(forms):
    return _derivation(tuple(forms), iota_rule, odd=True)


def lie_word(forms):
    return _derivation(tuple(forms), lie_rule, odd=False)


def d_rule(model: CohomologyModel):
    def rule(f: Form):
        base = f._replace(op=PLAIN)
        if base.base == "eta":
            d_base = model.d_eta(*base.pts)
        else:
            d_base = []
        if f.op == PLAIN:
            return d_base
        if f.op == IOTA:
            # Cartan: d(i s) = L s - i(d s)
            out = [(1, (base._replace(op=LIE),))]
            for coef, w in d_base:
                for c2, w2 in iota_word(w):
                    out.append((-coef * c2, w2))
            return out
        # d(L s) = L(d s)
        out = []
        for coef, w in d_base:
            for c2, w2 in lie_word(w):
                out.append((coef * c2, w2))
        return out

    return rule


def d_word(forms, model: CohomologyModel = TORUS):
    return _derivation(tuple(forms), d_rule(model), odd=True)


def _apply_word_op(F: Functional, op) -> Functional:
    out = Functional()
    for c, forms, fields in F:
        for coef, w in op(forms):
            out.add_term(c.scale(coef), w, fields)
    return out


def differential(F: Functional, model: CohomologyModel = TORUS) -> Functional:
    """Replace each form word gamma by d(gamma); insertions are not differentiated."""
    return _apply_word_op(F, lambda w: d_word(w, model))


def contract(F: Functional) -> Functional:
    """Replace each form word gamma by iota_X(gamma)."""
    return _apply_word_op(F, iota_word)


def lie_derivative(F: Functional) -> Functional:
    """Replace each form word gamma by L_X(gamma)."""
    return _apply_word_op(F, lie_word)


# -- configuration-space boundary -------------------------------------------


def _collapse_word(forms, fields, a, b):
    """(sign, forms, fields) after collapsing a propagator between a and b, or None."""
    prefix = 0
    for pos, f in enumerate(forms):
        if f.op == PLAIN and f.base == "eta" and set(f.pts) == {a, b}:
            orient = 1 if f.pts == (a, b) else -1
            s = orient * (-1 if prefix & 1 else 1)
            rest = forms[:pos] + forms[pos + 1:]
            nf, nx = _relabel(rest, fields, {b: a})
            return s, nf, nx
        prefix += f.degree
    return None


def diagonal_collapse(F: Functional, a: int, b: int) -> Functional:
    """Collapse points a, b along the propagator joining them (fiber integral +-1)."""
    out = Functional()
    for c, forms, fields in F:
        r = _collapse_word(forms, fields, a, b)
        if r is None:
            raise PreconditionError(f"no propagator between points {a} and {b} in {forms}")
        s, nf, nx = r
        out.add_term(c, nf, nx, sign=s)
    return out


# Orientation of the collapse stratum relative to Stokes' theorem on C_2.
STRATUM_SIGN = 1


def _boundary_terms(forms, fields, stratum_sign):
    out = []
    for f in forms:
        if f.op == PLAIN and f.base == "eta":
            r = _collapse_word(forms, fields, *f.pts)
            if r is not None:
                s, nf, nx = r
                out.append((stratum_sign * s, nf, nx))
    return out


# -- variational derivatives and the boundary operators -----------------------


def _delta_raw(par_c, forms, fields, index, x, name="A", exclude_tag=None):
    """Left derivative d/dA^index(x) of c * int forms fields (c of parity par_c).

    Yields (sign, forms, fields, removed_tag) with the removed point renamed x.
    """
    base = par_c + forms_parity(forms)
    for pos, fld in enumerate(fields):
        if fld.name != name or fld.index != index:
            continue
        if exclude_tag is not None and fld.tag == exclude_tag:
            continue
        s = -1 if (base + pos) & 1 else 1
        rest = fields[:pos] + fields[pos + 1:]
        nf, nx = _relabel(forms, rest, {fld.pt: x})
        yield s, nf, nx, fld.tag


def variational_derivative(F: Functional, lie_index: int, new_point: int = 0, name: str = "A") -> Functional:
    """delta/delta A^j at ``new_point``; the new point stays free (not relabelled)."""
    out = Functional()
    for c, forms, fields in F:
        if new_point in _points(forms, fields):
            raise PreconditionError(f"point label {new_point} already in use")
        for par, part in _poly_parity_parts(c):
            for s, nf, nx, _ in _delta_raw(par, forms, fields, lie_index, new_point, name):
                out.add_term(part, nf, nx, fixed={new_point}, sign=s)
    return out


def omega0_prime(F: Functional, model: CohomologyModel = TORUS, stratum_sign: int = None) -> Functional:
    """int dA delta/delta A, integrated by parts.

    c int gamma A..A  ->  (-1)^{|c|} [ sum over collapse strata - int d(gamma) A..A ].
    """
    if stratum_sign is None:
        stratum_sign = STRATUM_SIGN
    out = Functional()
    for c, forms, fields in F:
        for par, part in _poly_parity_parts(c):
            sgn = -1 if par else 1
            for s, nf, nx in _boundary_terms(forms, fields, stratum_sign):
                out.add_term(part, nf, nx, sign=sgn * s)
            for coef, w in d_word(forms, model):
                out.add_term(part.scale(-sgn * coef), w, fields)
    return out


def omega1_prime(F: Functional, sc: StructureConstants, name: str = "A") -> Functional:
    """(1/2) f^a_{bc} int A^b A^c delta/delta A^a, an odd derivation."""
    out = Functional()
    half = Fraction(1, 2)
    by_a: Dict[int, list] = {}
    for b_, c_, a_, v in sc.f_nonzero():
        by_a.setdefault(a_, []).append((b_, c_, v))
    for c, forms, fields in F:
        fp = forms_parity(forms)
        for par, part in _poly_parity_parts(c):
            for pos, fld in enumerate(fields):
                if fld.name != name:
                    continue
                s = -1 if (par + fp + pos) & 1 else 1
                for b_, c_, v in by_a.get(fld.index, ()):
                    new = (fld._replace(index=b_), fld._replace(index=c_))
                    nx = fields[:pos] + new + fields[pos + 1:]
                    out.add_term(part.scale(Coefficient.of(half * v * s, 0, 1)), forms, nx)
    return out


def omega2_prime_tagged(P: Functional, sc: StructureConstants) -> Functional:
    """(1/2) g_a^{bc} int A^a delta/delta A^b delta/delta A^c on a tagged product.

    Both derivatives must hit insertions carrying different tags (different
    factors).  The two factors merge into one: every insertion of either tag,
    and the new one, carries the smaller tag afterwards.
    """
    out = Functional()
    half = Fraction(1, 2)
    X = 0
    gs = sc.g_nonzero()
    for c, forms, fields in P:
        if X in _points(forms, fields):
            raise PreconditionError("point label 0 is reserved")
        for par, part in _poly_parity_parts(c):
            for b_, c_, a_, v in gs:
                for s1, f1, x1, tag1 in _delta_raw(par, forms, fields, c_, X):
                    # after the first derivative the coefficient parity is unchanged,
                    # the word lost one odd insertion: account for it via par + 1
                    for s2, f2, x2, tag2 in _delta_raw(par + 1, f1, x1, b_, X, exclude_tag=tag1):
                        tag, gone = min(tag1, tag2), max(tag1, tag2)
                        # A^a(x) moves in from the far left past c and the forms
                        s3 = -1 if (par + 0 + forms_parity(f2)) & 1 else 1
                        rest = tuple(x._replace(tag=tag) if x.tag == gone else x for x in x2)
                        new = (Field("A", a_, X, tag),) + rest
                        coef = Coefficient.of(half * v * s1 * s2 * s3, 0, 1)
                        out.add_term(part.scale(coef), f2, new)
    return out


def omega0(F: Functional, model: CohomologyModel = TORUS) -> Functional:
    """Omega_0 = -i hbar int dA delta/delta A."""
    return omega0_prime(F, model).scale(Coefficient.of(-I, 1))


def omega1(F: Functional, sc: StructureConstants) -> Functional:
    """Omega_1 = -(i hbar / 2) f^a_{bc} int A^b A^c delta/delta A^a."""
    return omega1_prime(F, sc).scale(Coefficient.of(-I, 1))


def tag_product(factors: Sequence[Functional]) -> Functional:
    out = Functional.scalar(GradedPolynomial.const(1))
    for t, F in enumerate(factors, start=1):
        out = multiply(out, F.tagged(t))
    return out


def omega2(factors: Sequence[Functional], sc: StructureConstants) -> Functional:
    """Omega_2 = -(hbar^2 / 2) g_a^{bc} int A^a delta/delta A^b delta/delta A^c.

    Point-splitting regularization: the derivatives act on different factors.
    """
    if len(factors) < 2:
        raise RegularizationError("Omega_2 acts only on products of at least two factors")
    P = tag_product(factors)
    return omega2_prime_tagged(P, sc).strip_tags().scale(Coefficient.of(-1, 2))


def omega_st_tagged(P: Functional, sc: StructureConstants, model: CohomologyModel = TORUS) -> Functional:
    """Full Omega on a tagged product (first-order parts act on every factor)."""
    first = omega0_prime(P, model) + omega1_prime(P, sc)
    return first.scale(Coefficient.of(-I, 1)) + omega2_prime_tagged(P, sc).scale(Coefficient.of(-1, 2))


# -- abelian BF calibration -------------------------------------------------


def abelian_bf_action(model: CohomologyModel) -> Functional:
    """S = -(int_{d2} B a - int_{d1} b A) - int_{d2 x d1} B eta A for an abstract model.

    a = sum z^i chi_i (z^i of ghost 1 - deg chi_i), b = sum z+_i chi^i.
    """
    n = len(model.basis) // 2
    S = Functional()
    for i in range(1, n + 1):
        _, d, word_lo = model.basis[i - 1]
        _, du, word_up = model.basis[n + i - 1]
        zi = GradedVariable(False, i, 1, 1 - d)
        zpi = zi.partner()
        # -B z chi = -(-1)^{|z| + deg chi} z chi B = z chi B
        S.add_term(GradedPolynomial.var(zi), word_lo(1), (B(1, 1),))
        S.add_term(GradedPolynomial.var(zpi), word_up(1), (A(1, 1),))
    # the propagator runs from the B point (d2) to the A point (d1):
    # -B_1 eta_12 A_2 = -(-1)^{deg eta} eta B A
    s = -1 * (-1) ** model.eta_degree
    bulk_eta = Form(PLAIN, "eta", 0, model.eta_degree, (1, 2))
    S.add_term(GradedPolynomial.const(1), (bulk_eta,), (B(1, 1), A(1, 2)), sign=s)
    return S


def _abstract_d(model: CohomologyModel):
    def rule(f: Form):
        if f.op == PLAIN and f.base == "eta":
            return model.d_eta(*f.pts)
        return []

    return rule


def check_abelian_mqme(model: CohomologyModel) -> Functional:
    """Residual of 1/2 (S,S) - (i/hbar) Omega S for abelian BF theory.

    Omega = -i hbar (int dA delta/delta A + int dB delta/delta B); the two
    boundary components are disjoint so no collapse strata occur.
    """
    S = abelian_bf_action(model)
    if laplacian(S):
        raise AssertionError("Delta S must vanish for a linear action")
    half_bracket = bracket(S, S).scale(Fraction(1, 2))
    omega_prime = Functional()
    for c, forms, fields in S:
        for par, part in _poly_parity_parts(c):
            sgn = -1 if par else 1
            for coef, w in _derivation(forms, _abstract_d(model), odd=True):
                omega_prime.add_term(part.scale(-sgn * coef), w, fields)
    # (i/hbar) * (-i hbar) Omega' = Omega'
    return half_bracket - omega_prime
