"""Infinitesimal change of gauge-fixing data.

The vector field X is never coordinatized.  Its only traces are the atomic
symbols i(s) (contraction, degree - 1) and L(s) (Lie derivative) on form
symbols, with d(i s) = L s - i(d s) as the single rewrite.

The state correction enters as hbar^{-2} zeta, so that every equation below
lives at hbar^0:

    (S, zeta) - (Omega0' + Omega1') zeta - (i/hbar)^2 Omega2(S zeta)' = dS/dt.
"""

from __future__ import annotations

from typing import Dict, Tuple

from .config_forms import (
    TORUS,
    CohomologyModel,
    Functional,
    bracket,
    contract,
    differential,
    lie_derivative,
    omega0_prime,
    omega1_prime,
    omega2,
)
from .effective_action import (
    I_OVER_HBAR_SQ,
    LABELS,
    EffectiveAction,
    _pairs,
    build_terms,
)

LEMMA2_ITEMS = (1, 2, 3, 4, 5)


def _koszul(F: Functional) -> Functional:
    """Multiply each coefficient by (-1)^{|c|}: the odd operator i_X passing c."""
    out = Functional()
    for c, forms, fields in F:
        even, odd = c.split_parity()
        if even:
            out.add_term(even, forms, fields)
        if odd:
            out.add_term(odd, forms, fields, sign=-1)
    return out


def iota_x(F: Functional) -> Functional:
    """i_X as an odd derivation on whole terms: contracts the forms only."""
    return _koszul(contract(F))


def iota_d(F: Functional, model: CohomologyModel = TORUS) -> Functional:
    """i_X d applied to the forms of each term (an even operator)."""
    return contract(differential(F, model))


def zeta_parts(S: EffectiveAction) -> Dict[str, Functional]:
    return {k: iota_x(S[k]) for k in LABELS}


def build_zeta(S: EffectiveAction) -> Functional:
    out = Functional()
    for F in zeta_parts(S).values():
        out = out + F
    return S.truncation.apply(out)


def time_derivative(S: EffectiveAction) -> Functional:
    """dS/dt: every form replaced by its Lie derivative."""
    return S.truncation.apply(lie_derivative(S.total()))


def cartan_residual(F: Functional, model: CohomologyModel = TORUS) -> Functional:
    """L F - (d i + i d) F on the form words; empty when Cartan's formula holds."""
    return lie_derivative(F) - differential(contract(F), model) - contract(differential(F, model))


def _as_action(sc_or_S) -> EffectiveAction:
    return sc_or_S if isinstance(sc_or_S, EffectiveAction) else build_terms(sc_or_S)


def _cross(S: EffectiveAction, zeta: Dict[str, Functional], a: str, b: str) -> Functional:
    """(i/hbar)^2 Omega2 with one derivative on S_a and the other on i_X S_b."""
    if not S[a] or not zeta[b]:
        return Functional()
    return omega2([S[a], zeta[b]], S.sc).scale(I_OVER_HBAR_SQ)


def lemma2_sides(S: EffectiveAction, which: int, model: CohomologyModel = TORUS) -> Tuple[Functional, Functional]:
    z = zeta_parts(S)
    if which == 1:
        lhs = _cross(S, z, "S0", "S0")
        rhs = bracket(S["S1"], z["S0"])
    elif which == 2:
        lhs = _cross(S, z, "S0", "S2") + _cross(S, z, "S2", "S0")
        rhs = bracket(S["S1"], z["S2"])
    elif which == 3:
        lhs = _cross(S, z, "S0", "S3") + _cross(S, z, "S3", "S0")
        rhs = bracket(S["S1"], z["S3"])
    elif which == 4:
        lhs = bracket(S["S2"], z["S0"]) + bracket(S["S0"], z["S2"])
        rhs = iota_d(S["S3"], model)
    elif which == 5:
        lhs = bracket(S["S2"], z["S2"])
        rhs = iota_d(S["S4"], model) + iota_d(S["S5"], model)
    else:
        raise ValueError(f"unknown identity {which!r}")
    return lhs, rhs


def lemma2_check(sc_or_S, which: int, model: CohomologyModel = TORUS) -> Functional:
    """LHS - RHS of one change-of-data identity."""
    S = _as_action(sc_or_S)
    lhs, rhs = lemma2_sides(S, which, model)
    return S.truncation.apply(lhs - rhs)


def deformation_residual(sc_or_S, model: CohomologyModel = TORUS) -> Functional:
    """(S, zeta) - (Omega0' + Omega1') zeta - (i/hbar)^2 Omega2(S zeta)' - dS/dt at the truncation."""
    S = _as_action(sc_or_S)
    t = S.truncation
    z = zeta_parts(S)
    out = Functional()
    for a, b in _pairs(S, t.max_fields, t.max_order):
        if z[b]:
            out = out + bracket(S[a], z[b])
    for a, b in _pairs(S, t.max_fields + 1, t.max_order - 1):
        out = out - _cross(S, z, a, b)
    for k in LABELS:
        if z[k]:
            out = out - omega0_prime(z[k], model) - omega1_prime(z[k], S.sc)
    return t.apply(out - time_derivative(S))
