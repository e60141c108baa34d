"""Shared fixtures: the two worked canonical forms and random generators."""

import random
from fractions import Fraction

import numpy as np
import pytest

from unfolding.exact import QI
from unfolding.canonical import CanonicalForm, sort_to_fundamental_domain, \
    zero_j0
from unfolding.orbit import NilpotentElem, TriangularCoords, UPart, lower_mask


def q(a, b=1):
    return QI(Fraction(a, b))


@pytest.fixture(scope="session")
def heun_tri():
    """Rank-2 form with a single order-4 pole; its unfolding runs through
    the whole Heun confluence family."""
    return CanonicalForm(2, 3,
                         ((q(-1, 2), q(1, 2)),
                          (q(0), q(0)),
                          (q(0), q(0)),
                          (q(1), q(-1))),
                         zero_j0(2))


@pytest.fixture(scope="session")
def gl4_tri():
    """Rank-4 form with doubled top eigenvalues and a split residue; its
    unfolding runs through the rank-4 confluent family."""
    return CanonicalForm(4, 3,
                         ((q(1, 2), q(1, 2), q(3), q(-4)),
                          (q(1), q(1), q(-2), q(-2)),
                          (q(1), q(1), q(0), q(0)),
                          (q(2), q(2), q(-1), q(-1))),
                         zero_j0(4))


def random_form(rng: random.Random, nmax=4, kmax=4) -> CanonicalForm:
    """A random sorted canonical form with small exact entries."""
    n = rng.randint(1, nmax)
    k = rng.randint(0, kmax)
    diag = []
    for _ in range(k + 1):
        row = []
        for _ in range(n):
            # small pool so coordinate collisions (nontrivial types) occur
            row.append(q(rng.randint(-3, 3), rng.randint(1, 2)))
        diag.append(tuple(row))
    form = CanonicalForm(n, k, tuple(diag), zero_j0(n))
    return sort_to_fundamental_domain(form)


def _masked(rng, n, mask, exact):
    if exact:
        m = [[QI(0)] * n for _ in range(n)]
        for a, b in mask:
            m[a][b] = q(rng.randint(-3, 3), rng.randint(1, 3))
        return tuple(tuple(row) for row in m)
    m = np.zeros((n, n), dtype=complex)
    for a, b in mask:
        # moderate amplitude: exponentials and Cauchy-kernel products
        # compound entries multiplicatively across levels, and the tests
        # assert absolute tolerances on the resulting moment
        m[a, b] = rng.uniform(-0.25, 0.25) + 1j * rng.uniform(-0.25, 0.25)
    return m


def random_coords(h: CanonicalForm, rng: random.Random,
                  exact=False) -> TriangularCoords:
    """Random triangular coordinates on the truncated orbit of h."""
    n = h.n
    if exact:
        while True:
            g = tuple(tuple(q(rng.randint(-3, 3), rng.randint(1, 2))
                            for _ in range(n)) for _ in range(n))
            from unfolding.exact import exact_rank
            if exact_rank([list(r) for r in g]) == n:
                break
        hh = tuple(tuple(q(1) if a == b else QI(0) for b in range(n))
                   for a in range(n))
    else:
        while True:
            g = np.array([[rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)
                           for _ in range(n)] for _ in range(n)])
            # keep g well-conditioned so conjugation does not amplify
            # rounding error past the tolerances the tests assert
            if np.linalg.cond(g) < 20.0:
                break
        hh = np.eye(n, dtype=complex)
    pairs = []
    for l in range(1, h.k + 1):
        mask = lower_mask(h, l)
        if not mask:
            pairs.append((None, None))
            continue
        umask = frozenset((b, a) for a, b in mask)
        nl = NilpotentElem(l, tuple(_masked(rng, n, mask, exact)
                                    for _ in range(l)))
        ul = UPart(l, tuple(_masked(rng, n, umask, exact)
                            for _ in range(l)))
        pairs.append((nl, ul))
    return TriangularCoords(g, tuple(pairs), hh)
