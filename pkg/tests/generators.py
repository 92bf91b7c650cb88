"""Seeded random inputs shared by the property suites."""

import random
from collections import defaultdict

from splitcs.config_forms import Functional, A, dt, dth, eta, tag_product
from splitcs.graded_algebra import GradedPolynomial, z1, z1p, z2, z2p

KINDS = (z1, z2, z1p, z2p)


def random_monomial_vars(rng, dim, max_len=4):
    return [rng.choice(KINDS)(rng.randint(1, dim)) for _ in range(rng.randint(0, max_len))]


def random_poly(rng, dim=3, max_terms=20, hbar=False):
    p = GradedPolynomial()
    for _ in range(rng.randint(1, max_terms)):
        vs = random_monomial_vars(rng, dim)
        p = p + GradedPolynomial.monomial(*vs, value=rng.randint(-4, 4), hbar_power=rng.randint(-1, 1) if hbar else 0)
    return p


def random_homogeneous(rng, dim=3, max_terms=8):
    """Random polynomial whose monomials share one ghost number (never zero)."""
    while True:
        groups = defaultdict(list)
        for _ in range(max_terms * 3):
            vs = random_monomial_vars(rng, dim)
            groups[sum(v.ghost for v in vs)].append(vs)
        ghost = rng.choice(sorted(groups))
        p = GradedPolynomial()
        for vs in groups[ghost][:max_terms]:
            p = p + GradedPolynomial.monomial(*vs, value=rng.choice([-2, -1, 1, 3]))
        if p:
            return p, ghost


def random_word(rng, npts=3, max_forms=3):
    pts = list(range(1, rng.randint(1, npts) + 1))
    forms = []
    for _ in range(rng.randint(0, max_forms)):
        k = rng.random()
        if k < 0.3:
            forms.append(dt(rng.choice(pts)))
        elif k < 0.6:
            forms.append(dth(rng.choice(pts)))
        elif len(pts) > 1:
            a, b = rng.sample(pts, 2)
            forms.append(eta(a, b))
    return tuple(forms), pts


def random_functional(rng, dim=3, npts=3, max_terms=3):
    F = Functional()
    for _ in range(rng.randint(1, max_terms)):
        forms, pts = random_word(rng, npts)
        fields = tuple(A(rng.randint(1, dim), p) for p in pts)
        vs = [rng.choice(KINDS)(rng.randint(1, dim)) for _ in range(rng.randint(0, 2))]
        c = GradedPolynomial.monomial(*vs, value=rng.choice([-3, -2, -1, 1, 2, 3]))
        F.add_term(c, forms, fields)
    return F


def random_tagged_product(rng, dim=3):
    return tag_product([random_functional(rng, dim, npts=2) for _ in range(rng.randint(2, 3))])


def rng_for(seed):
    return random.Random(seed)
