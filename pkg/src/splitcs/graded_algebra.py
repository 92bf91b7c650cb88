"""Graded-commutative polynomials in residual-field variables, with the BV Laplacian.

Variables come in BV pairs (z, z+) labelled by a slot and a Lie index.  On the
solid torus there are two slots:

    z1   ghost -2      z1+  ghost +1
    z2   ghost -1      z2+  ghost  0

Parity is ghost mod 2 and governs every reordering sign.  Coefficients are
Gaussian rationals times a power of hbar; a second integer exponent counts
powers of the interaction (structure constants) so that truncations can be
applied after the constants have been folded into numbers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, NamedTuple, Optional, Tuple, Union


class GaussianRational:
    """a + b i with exact rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        if not o.im:
            return GaussianRational(self.re * o.re, self.im * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.re * o.re + o.im * o.im
        return self * GaussianRational(o.re / n, -o.im / n)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({self})"

    def __str__(self):
        if not self.im:
            return _q(self.re)
        if not self.re:
            return {1: "i", -1: "-i"}.get(self.im, f"{_q(self.im)}i")
        sign = "+" if self.im > 0 else "-"
        return f"({_q(self.re)}{sign}{_q(abs(self.im))}i)"

    def to_json(self):
        return [_q(self.re), _q(self.im)]


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


I = GaussianRational(0, 1)


class Coefficient(NamedTuple):
    """A scalar prefactor: Gaussian rational times hbar^hbar_power times lambda^order."""

    value: GaussianRational
    hbar_power: int = 0
    order: int = 0

    @classmethod
    def of(cls, value=1, hbar_power=0, order=0):
        return cls(GaussianRational.coerce(value), hbar_power, order)

    def __mul__(self, other):
        return Coefficient(self.value * other.value, self.hbar_power + other.hbar_power, self.order + other.order)


I_OVER_HBAR = Coefficient.of(I, -1)
MINUS_I_HBAR = Coefficient.of(-I, 1)


_KINDS = {(1, False): "z1", (2, False): "z2", (1, True): "z1plus", (2, True): "z2plus"}
TORUS_GHOST = {"z1": -2, "z2": -1, "z1plus": 1, "z2plus": 0}


class GradedVariable(NamedTuple):
    """One residual-field coordinate.

    Ordering of the tuple fields fixes the canonical monomial order
    (z before z+, then slot, then Lie index).
    """

    plus: bool
    slot: int
    lie_index: int
    ghost: int

    @property
    def kind(self) -> str:
        return _KINDS.get((self.slot, self.plus), f"{'zp' if self.plus else 'z'}{self.slot}")

    @property
    def parity(self) -> int:
        return self.ghost & 1

    def partner(self) -> "GradedVariable":
        return GradedVariable(not self.plus, self.slot, self.lie_index, -1 - self.ghost)

    def __str__(self):
        if self.plus:
            return f"z+{self.slot}[{self.lie_index}]"
        return f"z{self.slot}[{self.lie_index}]"


def z1(i):
    return GradedVariable(False, 1, i, -2)


def z2(i):
    return GradedVariable(False, 2, i, -1)


def z1p(i):
    return GradedVariable(True, 1, i, 1)


def z2p(i):
    return GradedVariable(True, 2, i, 0)


Monomial = Tuple[GradedVariable, ...]
# (hbar_power, order, variables)
Key = Tuple[int, int, Monomial]


def _merge(a: Monomial, b: Monomial) -> Tuple[int, Optional[Monomial]]:
    """Product of two canonical monomials: (sign, monomial) or (0, None)."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sign = 1
    odd_a = [x for x in a if x.ghost & 1]
    if odd_a:
        for y in b:
            if y.ghost & 1:
                for x in odd_a:
                    if x == y:
                        return 0, None
                    if x > y:
                        sign = -sign
    return sign, tuple(sorted(a + b))


def _left_derivative(m: Monomial, v: GradedVariable) -> Tuple[int, Optional[Monomial]]:
    """d/dv from the left: (factor, remaining monomial)."""
    if v.ghost & 1:
        sign = 1
        for pos, x in enumerate(m):
            if x == v:
                return sign, m[:pos] + m[pos + 1:]
            if x.ghost & 1:
                sign = -sign
        return 0, None
    count = m.count(v)
    if not count:
        return 0, None
    pos = m.index(v)
    return count, m[:pos] + m[pos + 1:]


class GradedPolynomial:
    """Finite sum of coefficient * canonical monomial.

    Stored as ``{(hbar_power, order, monomial): GaussianRational}`` with zero
    terms dropped, so equality is dictionary equality.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Key, GaussianRational]] = None):
        self.terms: Dict[Key, GaussianRational] = {}
        if terms:
            for k, v in terms.items():
                if v:
                    self.terms[k] = v

    # -- construction ----------------------------------------------------

    @classmethod
    def const(cls, value=1, hbar_power=0, order=0) -> "GradedPolynomial":
        v = GaussianRational.coerce(value)
        return cls({(hbar_power, order, ()): v}) if v else cls()

    @classmethod
    def monomial(cls, *variables: GradedVariable, value=1, hbar_power=0, order=0) -> "GradedPolynomial":
        p = cls.const(value, hbar_power, order)
        for x in variables:
            p = p * cls({(0, 0, (x,)): GaussianRational(1)})
        return p

    @classmethod
    def var(cls, v: GradedVariable) -> "GradedPolynomial":
        return cls({(0, 0, (v,)): GaussianRational(1)})

    # -- arithmetic ------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return not self.terms
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k)
            s = v if s is None else s + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        r = GradedPolynomial()
        r.terms = out
        return r

    def __neg__(self):
        r = GradedPolynomial()
        r.terms = {k: -v for k, v in self.terms.items()}
        return r

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Union[Coefficient, GaussianRational, int, Fraction]) -> "GradedPolynomial":
        if not isinstance(c, Coefficient):
            c = Coefficient.of(c)
        if not c.value:
            return GradedPolynomial()
        r = GradedPolynomial()
        r.terms = {
            (h + c.hbar_power, o + c.order, m): v * c.value for (h, o, m), v in self.terms.items()
        }
        return r

    def __mul__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        if not isinstance(other, GradedPolynomial):
            return self.scale(other)
        out: Dict[Key, GaussianRational] = {}
        for (h1, o1, m1), v1 in self.terms.items():
            for (h2, o2, m2), v2 in other.terms.items():
                sign, m = _merge(m1, m2)
                if not sign:
                    continue
                k = (h1 + h2, o1 + o2, m)
                val = v1 * v2 if sign > 0 else -(v1 * v2)
                s = out.get(k)
                out[k] = val if s is None else s + val
        return GradedPolynomial(out)

    __rmul__ = scale

    # -- grading ---------------------------------------------------------

    def monomial_parities(self):
        return {sum(x.ghost for x in m) & 1 for (_, _, m) in self.terms}

    def split_parity(self) -> Tuple["GradedPolynomial", "GradedPolynomial"]:
        even, odd = {}, {}
        for k, v in self.terms.items():
            (odd if sum(x.ghost for x in k[2]) & 1 else even)[k] = v
        return GradedPolynomial(even), GradedPolynomial(odd)

    def variables(self):
        return sorted({x for (_, _, m) in self.terms for x in m})

    def filter(self, pred) -> "GradedPolynomial":
        return GradedPolynomial({k: v for k, v in self.terms.items() if pred(k)})

    # -- derivatives -----------------------------------------------------

    def derivative(self, v: GradedVariable) -> "GradedPolynomial":
        """Left partial derivative."""
        out: Dict[Key, GaussianRational] = {}
        for (h, o, m), val in self.terms.items():
            factor, rest = _left_derivative(m, v)
            if not factor:
                continue
            k = (h, o, rest)
            val = val * factor
            s = out.get(k)
            out[k] = val if s is None else s + val
        return GradedPolynomial(out)

    # -- rendering -------------------------------------------------------

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (h, o, m), v in self.sorted_items():
            s = str(v)
            if h:
                s += f" hbar^{h}"
            if m:
                s += " " + " ".join(str(x) for x in m)
            parts.append(s)
        return " + ".join(parts)

    __repr__ = __str__

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for (h, o, m), v in self.sorted_items():
            s = _latex_scalar(v)
            if h:
                s += rf"\hbar^{{{h}}}"
            for x in m:
                if x.plus:
                    s += rf" z^+_{{{x.slot}{x.lie_index}}}"
                else:
                    s += rf" z^{{{x.slot}{x.lie_index}}}"
            out.append(s)
        return " + ".join(out).replace("+ -", "- ")


def _latex_scalar(v: GaussianRational) -> str:
    def q(x):
        return _q(x) if x.denominator == 1 else rf"\tfrac{{{x.numerator}}}{{{x.denominator}}}"

    if not v.im:
        return q(v.re)
    if not v.re:
        return q(v.im) + "i"
    return f"({q(v.re)}+{q(v.im)}i)"


def ghost_number(p: GradedPolynomial) -> Union[int, str, None]:
    """Common ghost degree of all monomials; ``"inhomogeneous"`` if mixed, None for 0."""
    degs = {sum(x.ghost for x in m) for (_, _, m) in p.terms}
    if not degs:
        return None
    if len(degs) > 1:
        return "inhomogeneous"
    return degs.pop()


def bv_laplacian(p: GradedPolynomial) -> GradedPolynomial:
    """Delta = - sum over BV pairs of d/dz d/dz+ (left derivatives, d/dz+ applied first)."""
    out = GradedPolynomial()
    for v in p.variables():
        if not v.plus:
            continue
        dp = p.derivative(v)
        if dp:
            out = out - dp.derivative(v.partner())
    return out


def bv_bracket(p: GradedPolynomial, q: GradedPolynomial) -> GradedPolynomial:
    """Odd bracket induced by Delta:

    (p, q) = (-1)^{|p|} [Delta(pq) - Delta(p) q - (-1)^{|p|} p Delta(q)].
    """
    out = GradedPolynomial()
    for part, sign in zip(p.split_parity(), (1, -1)):
        if not part:
            continue
        r = bv_laplacian(part * q) - bv_laplacian(part) * q - (part * bv_laplacian(q)).scale(sign)
        out = out + r.scale(sign)
    return out
