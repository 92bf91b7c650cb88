"""Tree-level effective action on the solid torus and the master-equation checks.

Residual fields: z^{1i} (ghost -2), z^{2i} (ghost -1) and their partners
z+_{1i} (ghost 1), z+_{2i} (ghost 0).  Interaction order lambda counts
structure constants and is carried in the coefficient key.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

from .config_forms import (
    TORUS,
    CohomologyModel,
    Functional,
    bracket,
    dt,
    dth,
    eta,
    laplacian,
    omega0,
    omega1,
    omega2,
    A,
)
from .graded_algebra import Coefficient, GradedPolynomial, I_OVER_HBAR, z1, z1p, z2, z2p
from .lie_bialgebra import MalformedInputError, StructureConstants, validate_manin_triple

LABELS = ("S0", "S1", "S2", "S3", "S4", "S5")
LEMMA1_ITEMS = ("i", "ii", "iii", "iv", "v", "vi")


@dataclass(frozen=True)
class Truncation:
    max_fields: int = 2
    max_order: int = 2
    hbar_power: int = 0

    def apply(self, F: Functional) -> Functional:
        return F.filter(self.max_fields, self.max_order, self.hbar_power)


TRUNCATION = Truncation()


@dataclass
class EffectiveAction:
    terms: Dict[str, Functional]
    sc: StructureConstants
    truncation: Truncation = TRUNCATION

    def __getitem__(self, label: str) -> Functional:
        return self.terms[label]

    def total(self) -> Functional:
        out = Functional()
        for label in LABELS:
            out = out + self.terms[label]
        return out

    def nonzero_labels(self):
        return [k for k in LABELS if self.terms[k]]


def _mono(value, *vars_, order=0):
    return GradedPolynomial.monomial(*vars_, value=value, order=order)


class _Builder:
    """Accumulates coefficient polynomials per raw word before canonicalizing."""

    def __init__(self):
        self.parts: Dict[tuple, GradedPolynomial] = {}

    def add(self, poly, forms=(), fields=()):
        if not poly:
            return
        key = (tuple(forms), tuple(fields))
        old = self.parts.get(key)
        self.parts[key] = poly if old is None else old + poly

    def functional(self) -> Functional:
        F = Functional()
        for (forms, fields), c in self.parts.items():
            F.add_term(c, forms, fields)
        return F


def build_s0(sc: StructureConstants) -> Functional:
    b = _Builder()
    for k in sc.indices:
        b.add(_mono(-1, z1p(k)), (), (A(k, 1),))
        b.add(_mono(-1, z2p(k)), (dt(1),), (A(k, 1),))
    return b.functional()


def build_s1(sc: StructureConstants) -> Functional:
    half = Fraction(1, 2)
    c = GradedPolynomial()
    # read as g_i^{kj}: the transposed upper pair
    for k, j, i, v in sc.g_nonzero():
        c = c + _mono(half * v, z1(i), z1p(j), z1p(k), order=1)
        c = c + _mono(v, z2(i), z1p(j), z2p(k), order=1)
    return Functional.scalar(c)


def build_s2(sc: StructureConstants) -> Functional:
    b = _Builder()
    # read as f^i_{kj}: the transposed lower pair
    for k, j, i, v in sc.f_nonzero():
        b.add(_mono(v, z1p(i), z2(j), order=1), (dth(1),), (A(k, 1),))
        b.add(_mono(v, z1p(i), z1(j), order=1) - _mono(v, z2p(i), z2(j), order=1), (dt(1), dth(1)), (A(k, 1),))
    return b.functional()


def build_s3(sc: StructureConstants, z2_sign: int = -1) -> Functional:
    """The two-point tree with one b leaf.

    ``z2_sign`` multiplies the z+_2 family, whose form word is
    written as eta_12 (dt_1 + dt_2)/2.  Consistency with the one-point
    pieces under Omega_0 and Omega_1 requires -1 (equivalently the word
    ordered (dt_1 + dt_2)/2 eta_12); fixed by identity (iii).
    """
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    b = _Builder()
    fields_of = lambda j, k: (A(j, 1), A(k, 2))
    for j, k, i, v in sc.f_nonzero():
        b.add(_mono(half * v, z1p(i), order=1), (eta(1, 2),), fields_of(j, k))
        for p in (1, 2):
            b.add(_mono(z2_sign * quarter * v, z2p(i), order=1), (eta(1, 2), dt(p)), fields_of(j, k))
    return b.functional()


def _ff(sc: StructureConstants):
    """Nonzero products f^i_{jk} f^j_{lm} as (i, j, k, l, m, value)."""
    by_upper: Dict[int, list] = {}
    for l_, m_, j_, v in sc.f_nonzero():
        by_upper.setdefault(j_, []).append((l_, m_, v))
    out = []
    for j_, k_, i_, v in sc.f_nonzero():
        for l_, m_, w in by_upper.get(j_, ()):
            out.append((i_, j_, k_, l_, m_, v * w))
    return out


def build_s4(sc: StructureConstants) -> Functional:
    """f^i_{jk} f^j_{lm}: z leaf index l, insertions A^k_1 A^m_2."""
    b = _Builder()
    for i, j, k, l, m, v in _ff(sc):
        ins = (A(k, 1), A(m, 2))
        b.add(_mono(v, z1p(i), z2(l), order=2), (dth(1), eta(1, 2)), ins)
        b.add(_mono(v, z1p(i), z1(l), order=2) - _mono(v, z2p(i), z2(l), order=2), (dt(1), dth(1), eta(1, 2)), ins)
    return b.functional()


def build_s5(sc: StructureConstants, sign: int = 1) -> Functional:
    """f^i_{jk} f^k_{lm}: z leaf index j, insertions A^l_1 A^m_2 (times ``sign``).

    This is the contraction of the two-vertex tree whose a leaf sits on the
    arrow's tail; equivalently -f^i_{jk} f^j_{lm} z^{2k} after renaming.
    """
    b = _Builder()
    for i, j, k, l, m, v in _ff(sc):
        # relabel: the leaf carries the index k of f^i_{jk}, the propagator j
        v = sign * v
        ins = (A(l, 1), A(m, 2))
        b.add(_mono(-v, z1p(i), z2(k), order=2), (dth(1), eta(1, 2)), ins)
        b.add(_mono(-v, z1p(i), z1(k), order=2) - _mono(-v, z2p(i), z2(k), order=2), (dt(1), dth(1), eta(1, 2)), ins)
    return b.functional()


def build_terms(
    sc: StructureConstants,
    truncation: Truncation = TRUNCATION,
    s3_z2_sign: int = -1,
    s5_sign: int = 1,
    validate: bool = True,
) -> EffectiveAction:
    """S0..S5 for a Manin triple; ``validate=False`` builds them for any tables (negative controls)."""
    bad = validate_manin_triple(sc) if validate else []
    if bad:
        raise MalformedInputError(f"not a Manin triple: {bad[:3]}")
    terms = {
        "S0": build_s0(sc),
        "S1": build_s1(sc),
        "S2": build_s2(sc),
        "S3": build_s3(sc, s3_z2_sign),
        "S4": build_s4(sc),
        "S5": build_s5(sc, s5_sign),
    }
    return EffectiveAction(terms, sc, truncation)


# -- checks -------------------------------------------------------------------

HALF = Fraction(1, 2)
I_OVER_HBAR_SQ = Coefficient.of(-1, -2)


def lemma1_sides(S: EffectiveAction, which: str, model: CohomologyModel = TORUS) -> Tuple[Functional, Functional]:
    sc = S.sc
    s = S.terms
    if which == "i":
        lhs = bracket(s["S0"], s["S1"])
        rhs = omega2([s["S0"], s["S0"]], sc).scale(I_OVER_HBAR_SQ).scale(HALF)
    elif which == "ii":
        lhs = bracket(s["S1"], s["S1"])
        rhs = Functional()
    elif which == "iii":
        lhs = bracket(s["S0"], s["S2"])
        rhs = (omega0(s["S3"], model) + omega1(s["S0"], sc)).scale(I_OVER_HBAR)
    elif which == "iv":
        lhs = bracket(s["S1"], s["S2"])
        rhs = omega2([s["S0"], s["S2"]], sc).scale(I_OVER_HBAR_SQ)
    elif which == "v":
        lhs = bracket(s["S1"], s["S3"])
        rhs = omega2([s["S0"], s["S3"]], sc).scale(I_OVER_HBAR_SQ)
    elif which == "vi":
        lhs = bracket(s["S2"], s["S2"]).scale(HALF)
        rhs = (omega0(s["S4"], model) + omega0(s["S5"], model) + omega1(s["S2"], sc)).scale(I_OVER_HBAR)
    else:
        raise ValueError(f"unknown identity {which!r}")
    return lhs, rhs


def lemma1_check(sc_or_S, which: str, model: CohomologyModel = TORUS) -> Functional:
    """LHS - RHS of one item of the bracket/boundary-operator identities."""
    S = sc_or_S if isinstance(sc_or_S, EffectiveAction) else build_terms(sc_or_S)
    lhs, rhs = lemma1_sides(S, which, model)
    return S.truncation.apply(lhs - rhs)


def _pairs(S: EffectiveAction, max_fields, max_order):
    """Pairs (a, b) of labels whose product can survive the truncation."""
    info = {}
    for k, F in S.terms.items():
        if F:
            info[k] = (min(F.field_counts()), min(F.orders()))
    out = []
    for a in info:
        for b in info:
            if info[a][0] + info[b][0] <= max_fields and info[a][1] + info[b][1] <= max_order:
                out.append((a, b))
    return out


def half_bracket(S: EffectiveAction) -> Functional:
    t = S.truncation
    out = Functional()
    for a, b in _pairs(S, t.max_fields, t.max_order):
        out = out + bracket(S[a], S[b])
    return t.apply(out.scale(HALF))


def omega_exponential(S: EffectiveAction, model: CohomologyModel = TORUS) -> Functional:
    """e^{-iS/hbar} Omega e^{iS/hbar} = (i/hbar)(Omega0 + Omega1) S + (1/2)(i/hbar)^2 Omega2(S S)."""
    t = S.truncation
    sc = S.sc
    linear = Functional()
    for k, F in S.terms.items():
        if F:
            linear = linear + omega0(F, model) + omega1(F, sc)
    linear = linear.scale(I_OVER_HBAR)
    # Omega2 removes one insertion and adds one order
    quad = Functional()
    for a, b in _pairs(S, t.max_fields + 1, t.max_order - 1):
        quad = quad + omega2([S[a], S[b]], sc)
    quad = quad.scale(I_OVER_HBAR_SQ).scale(HALF)
    return t.apply(linear + quad)


def mqme_residual(sc_or_S, model: CohomologyModel = TORUS) -> Functional:
    """1/2 (S, S) - e^{-iS/hbar} Omega e^{iS/hbar} at the truncation (Delta S = 0 assumed, checked separately)."""
    S = sc_or_S if isinstance(sc_or_S, EffectiveAction) else build_terms(sc_or_S)
    return half_bracket(S) - omega_exponential(S, model)


def vanishing_list(sc_or_S) -> Dict[str, bool]:
    """Brackets that drop out of the master equation before any cancellation."""
    S = sc_or_S if isinstance(sc_or_S, EffectiveAction) else build_terms(sc_or_S)
    t = S.truncation
    out = {
        "(S0,S0)=0": not bracket(S["S0"], S["S0"]),
        "(S3,S3)=0": not bracket(S["S3"], S["S3"]),
        "(S0,S3)=0": not bracket(S["S0"], S["S3"]),
        "(S2,S3) truncated": not t.apply(bracket(S["S2"], S["S3"])),
        "Omega1(S1)=0": not omega1(S["S1"], S.sc),
    }
    for other in ("S0", "S2", "S3", "S4", "S5"):
        out[f"(S4,{other}) truncated"] = not t.apply(bracket(S["S4"], S[other]))
    out["(S1,S4) truncated"] = not t.apply(bracket(S["S1"], S["S4"]))
    for k in ("S0", "S1", "S2"):
        out[f"Omega0({k})=0"] = not omega0(S[k])
    return out


def delta_seff(sc_or_S) -> GradedPolynomial:
    S = sc_or_S if isinstance(sc_or_S, EffectiveAction) else build_terms(sc_or_S)
    out = GradedPolynomial()
    for c, _, _ in laplacian(S.total()):
        out = out + c
    return out


def ghost_report(S: EffectiveAction) -> Dict[str, set]:
    return {k: F.ghost_numbers() for k, F in S.terms.items() if F}


def s1_monomial_count(sc: StructureConstants) -> int:
    return len(build_s1(sc).terms.get(((), ()), GradedPolynomial()).terms)
