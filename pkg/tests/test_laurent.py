"""Deformed truncated polynomial ring, Laurent module, and CRT."""

import random
from fractions import Fraction

import numpy as np

from unfolding.exact import QI
from unfolding.laurent import (PrincipalPart, TruncPoly, act, crt_join,
                               crt_split, mul_gamma, pairing, total_residue)
from unfolding.strata import stratum_of
from conftest import q


def _rand_c(rng, l, distinct=False):
    vals = []
    while len(vals) < l + 1:
        v = q(rng.randint(-5, 5), rng.randint(1, 4))
        if not distinct or v not in vals:
            vals.append(v)
    return tuple(vals)


def _basis_poly(c, m):
    return TruncPoly(c, tuple(QI(1) if t == m else QI(0)
                              for t in range(len(c))))


def _basis_pp(c, m):
    return PrincipalPart(c, tuple(QI(1) if t == m else QI(0)
                                  for t in range(len(c))))


def test_mul_gamma_matches_polynomial_multiplication():
    # compare against naive expansion at the undeformed point c = 0,
    # where n_m = z^m and the ideal is (z^{l+1})
    c = (QI(0),) * 4
    rng = random.Random(1)
    for _ in range(20):
        a = TruncPoly(c, tuple(q(rng.randint(-4, 4)) for _ in range(4)))
        b = TruncPoly(c, tuple(q(rng.randint(-4, 4)) for _ in range(4)))
        prod = mul_gamma(a, b)
        for t in range(4):
            want = sum((a.coeffs[i] * b.coeffs[t - i]
                        for i in range(t + 1)), QI(0))
            assert prod.coeffs[t] == want


def test_dual_basis_identity():
    rng = random.Random(2)
    for l in range(7):
        for _ in range(8):
            c = _rand_c(rng, l)
            for m in range(l + 1):
                for t in range(l + 1):
                    p = pairing(_basis_poly(c, m), _basis_pp(c, t))
                    assert p == (QI(1) if m == t else QI(0)), (l, m, t)


def test_total_residue_formula():
    # the sum over poles of the residues of b_m is 1 for m = 0, else 0;
    # computed independently from the distinct-pole residue formula
    rng = random.Random(3)
    for l in range(1, 6):
        c = _rand_c(rng, l, distinct=True)
        for m in range(l + 1):
            total = QI(0)
            for v in range(m + 1):
                prod = QI(1)
                for u in range(m + 1):
                    if u != v:
                        prod = prod * (c[v] - c[u])
                total = total + QI(1) / prod
            assert total == total_residue(_basis_pp(c, m)), (l, m)


def test_crt_roundtrip_poly_and_principal():
    rng = random.Random(4)
    for _ in range(100):
        l = rng.randint(1, 5)
        # parameter with repeats so strata vary
        vals = [q(rng.randint(-2, 2)) for _ in range(l + 1)]
        c = tuple(vals)
        part = stratum_of(c)
        x = PrincipalPart(c, tuple(q(rng.randint(-4, 4), rng.randint(1, 3))
                                   for _ in range(l + 1)))
        back = crt_join(crt_split(x, part), part, c)
        assert back.coeffs == x.coeffs
        f = TruncPoly(c, tuple(q(rng.randint(-4, 4)) for _ in range(l + 1)))
        # polynomial side: joint jets determine the class uniquely
        jets = crt_split(f, part)
        back = crt_join(jets, part, c)
        assert back.coeffs == f.coeffs


def test_action_commutes_with_crt():
    rng = random.Random(5)
    for _ in range(100):
        l = rng.randint(1, 4)
        vals = [q(rng.randint(-2, 2)) for _ in range(l + 1)]
        c = tuple(vals)
        part = stratum_of(c)
        f = TruncPoly(c, tuple(q(rng.randint(-3, 3)) for _ in range(l + 1)))
        xi = PrincipalPart(c, tuple(q(rng.randint(-3, 3), rng.randint(1, 2))
                                    for _ in range(l + 1)))
        whole = crt_split(act(f, xi), part)
        fs = crt_split(f, part)
        xs = crt_split(xi, part)
        for w, fj, xj in zip(whole, fs, xs):
            local = act(fj, xj)
            assert local.coeffs == w.coeffs


def test_matrix_coefficients_and_sides():
    c = (0j, 1 + 0j)
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    b = np.array([[0, 0], [1, 0]], dtype=complex)
    f = TruncPoly(c, (a, np.zeros((2, 2), dtype=complex)))
    xi = PrincipalPart(c, (b, np.zeros((2, 2), dtype=complex)))
    from unfolding.laurent import mul_left, mul_right
    left = mul_left(f, xi).coeffs[0]
    right = mul_right(xi, f).coeffs[0]
    assert np.allclose(left, a @ b)
    assert np.allclose(right, b @ a)
    assert not np.allclose(left, right)


def test_numeric_matches_exact():
    rng = random.Random(6)
    for _ in range(20):
        l = rng.randint(1, 4)
        c = _rand_c(rng, l)
        f = TruncPoly(c, tuple(q(rng.randint(-3, 3)) for _ in range(l + 1)))
        xi = PrincipalPart(c, tuple(q(rng.randint(-3, 3))
                                    for _ in range(l + 1)))
        ex = act(f, xi)
        cn = tuple(complex(x) for x in c)
        fn = TruncPoly(cn, tuple(complex(x) for x in f.coeffs))
        xin = PrincipalPart(cn, tuple(complex(x) for x in xi.coeffs))
        nu = act(fn, xin)
        for a, b in zip(ex.coeffs, nu.coeffs):
            scale = max(1.0, abs(complex(a)))
            assert abs(complex(a) - b) <= 1e-12 * scale
