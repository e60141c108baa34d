"""Deformed truncated polynomial ring and Laurent module.

Gamma(c)_l = C[z]/((z-c_0)...(z-c_l)) with the Newton-style standard
basis n_m = prod_{v<m}(z-c_v); L(c)_l is spanned by the principal parts
b_m = 1/prod_{v<=m}(z-c_v).  Everything is written in these bases so
coefficients stay polynomial in c across all strata; multiplication and
the module action come from the recurrences

    (z - c_j) n_m = n_{m+1} + (c_m - c_j) n_m        (n_{l+1} = 0)
    (z - c_j) b_m = b_{m-1} + (c_m - c_j) b_m        (b_{-1} dropped)

Coefficients may be scalars (QI or complex) or square matrices (nested
tuples of QI, or numpy complex arrays); matrix products keep the order
of the factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import QI, as_qi, solve_linear
from .strata import SetPartition, stratum_of

__all__ = ["TruncPoly", "PrincipalPart", "mul_gamma", "act",
           "total_residue", "pairing", "crt_split", "crt_join",
           "mul_left", "mul_right"]


def _is_exact(x):
    return isinstance(x, (QI, int)) or (
        isinstance(x, (tuple, list)) and _is_exact(x[0]))


def czero(sample):
    """Zero of the same shape/kind as sample (scalar or matrix)."""
    if isinstance(sample, np.ndarray):
        return np.zeros_like(sample)
    if isinstance(sample, tuple):
        n = len(sample)
        return tuple(tuple(QI(0) for _ in range(n)) for _ in range(n))
    if isinstance(sample, QI):
        return QI(0)
    return 0j


def cadd(a, b):
    if isinstance(a, tuple):
        return tuple(tuple(x + y for x, y in zip(ra, rb))
                     for ra, rb in zip(a, b))
    return a + b


def csmul(s, a):
    """Scalar times coefficient."""
    if isinstance(a, tuple):
        return tuple(tuple(s * x for x in row) for row in a)
    return s * a


def cmatmul(a, b):
    """Coefficient product; matrix coefficients multiply in order."""
    if isinstance(a, tuple) and isinstance(b, tuple):
        n = len(a)
        return tuple(tuple(sum((a[i][t] * b[t][j] for t in range(n)), QI(0))
                           for j in range(n)) for i in range(n))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return a @ b
    if isinstance(b, (tuple, np.ndarray)):
        return csmul(a, b)
    if isinstance(a, (tuple, np.ndarray)):
        return csmul(b, a)
    return a * b


def _check_same_c(x, y):
    if tuple(x.c) != tuple(y.c):
        raise ValueError("parameter vectors differ")


@dataclass(frozen=True)
class TruncPoly:
    """Element sum_m coeffs[m] * n_m of Gamma(c)_l, l = len(c)-1."""
    c: tuple
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.c):
            raise ValueError("need len(c) coefficients")
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def l(self):
        return len(self.c) - 1


@dataclass(frozen=True)
class PrincipalPart:
    """Element sum_m coeffs[m] * b_m of L(c)_l."""
    c: tuple
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.c):
            raise ValueError("need len(c) coefficients")
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @property
    def l(self):
        return len(self.c) - 1


def shift_gamma(c, coeffs, j):
    """Multiply a Gamma element by (z - c_j) in the Newton basis."""
    out = []
    for m, f in enumerate(coeffs):
        term = csmul(c[m] - c[j], f)
        if m > 0:
            term = cadd(term, coeffs[m - 1])
        out.append(term)
    return out  # n_{l+1} overflow lies in the ideal and is dropped


def shift_l(c, coeffs, j):
    """Multiply an L element by (z - c_j) in the standard basis."""
    lmax = len(coeffs) - 1
    out = []
    for m, g in enumerate(coeffs):
        term = csmul(c[m] - c[j], g)
        if m < lmax:
            term = cadd(term, coeffs[m + 1])
        out.append(term)
    return out  # the constant-polynomial part of (z-c_0) b_0 is dropped


def shift_l_by_point(c, coeffs, point):
    lmax = len(coeffs) - 1
    out = []
    for m, g in enumerate(coeffs):
        term = csmul(c[m] - point, g)
        if m < lmax:
            term = cadd(term, coeffs[m + 1])
        out.append(term)
    return out


def shift_gamma_by_point(c, coeffs, point):
    out = []
    for m, f in enumerate(coeffs):
        term = csmul(c[m] - point, f)
        if m > 0:
            term = cadd(term, coeffs[m - 1])
        out.append(term)
    return out


def mul_gamma(a: TruncPoly, b: TruncPoly) -> TruncPoly:
    """Product in Gamma(c)_l (scalar or same-side matrix coefficients)."""
    _check_same_c(a, b)
    c = a.c
    powers = [list(b.coeffs)]
    for m in range(a.l):
        powers.append(shift_gamma_by_point(c, powers[-1], c[m]))
    acc = [czero(b.coeffs[0]) for _ in range(len(c))]
    for m, am in enumerate(a.coeffs):
        for t in range(len(c)):
            acc[t] = cadd(acc[t], cmatmul(am, powers[m][t]))
    return TruncPoly(c, tuple(acc))


def _act_generic(f: TruncPoly, xi: PrincipalPart, side):
    _check_same_c(f, xi)
    c = f.c
    powers = [list(xi.coeffs)]
    for m in range(f.l):
        powers.append(shift_l_by_point(c, powers[-1], c[m]))
    acc = [czero(xi.coeffs[0]) for _ in range(len(c))]
    for m, fm in enumerate(f.coeffs):
        for t in range(len(c)):
            prod = cmatmul(fm, powers[m][t]) if side == "left" \
                else cmatmul(powers[m][t], fm)
            acc[t] = cadd(acc[t], prod)
    return PrincipalPart(c, tuple(acc))


def act(f: TruncPoly, xi: PrincipalPart) -> PrincipalPart:
    """Module action of Gamma(c) on L(c)."""
    return _act_generic(f, xi, "left")


def mul_left(f: TruncPoly, xi: PrincipalPart) -> PrincipalPart:
    return _act_generic(f, xi, "left")


def mul_right(xi: PrincipalPart, f: TruncPoly) -> PrincipalPart:
    return _act_generic(f, xi, "right")


def total_residue(g: PrincipalPart):
    """Sum of the residues over all poles: the b_0 coefficient."""
    return g.coeffs[0]


def pairing(f: TruncPoly, g: PrincipalPart):
    """<f, g> = total residue of f.g; equals sum_m f_m g_m."""
    return total_residue(act(f, g))


# ---------------------------------------------------------------------
# Chinese remainder / partial fraction splitting

def _block_data(c, part: SetPartition):
    poles = [c[b[0]] for b in part.blocks]
    mults = [len(b) for b in part.blocks]
    return poles, mults


def _one_like(c):
    return QI(1) if isinstance(c[0], QI) else (1.0 + 0j)


def czero_scalar(c):
    return QI(0) if isinstance(c[0], QI) else 0j


def _taylor_of_newton_basis(c, m, pole, order):
    """Taylor coefficients of n_m(z) = prod_{v<m}(z-c_v) around pole, up
    to the given order (exclusive)."""
    one = _one_like(c)
    coeffs = [one]
    for v in range(m):
        d = pole - c[v]
        nxt = [czero_scalar(c)] * min(len(coeffs) + 1, order + 1)
        for t, s in enumerate(coeffs):
            if t < len(nxt):
                nxt[t] = nxt[t] + s * d
            if t + 1 < len(nxt):
                nxt[t + 1] = nxt[t + 1] + s
        coeffs = nxt
    while len(coeffs) <= order:
        coeffs.append(czero_scalar(c))
    return coeffs[:order + 1]


def crt_split(x, part: SetPartition):
    """Split along the coincidence pattern of c.

    TruncPoly -> list of Taylor jets at each pole (as TruncPoly with the
    constant parameter vector); PrincipalPart -> the per-pole principal
    parts (partial fractions).  Requires c to lie on the stratum.
    """
    c = x.c
    if stratum_of(c) != part:
        raise ValueError("parameter vector is not on the requested stratum")
    poles, mults = _block_data(c, part)
    if isinstance(x, TruncPoly):
        out = []
        for p, m in zip(poles, mults):
            jet = [czero(x.coeffs[0]) for _ in range(m)]
            for mm, f in enumerate(x.coeffs):
                tay = _taylor_of_newton_basis(c, mm, p, m - 1)
                for t in range(m):
                    jet[t] = cadd(jet[t], csmul(tay[t], f))
            out.append(TruncPoly((p,) * m, tuple(jet)))
        return out
    # principal part: expand each b_m over the poles
    out_coeffs = [[czero(x.coeffs[0]) for _ in range(m)] for m in mults]
    for mm, g in enumerate(x.coeffs):
        sub = _sub_principal_parts(c, part, mm)
        for j, q in sub.items():
            for t, qt in enumerate(q):
                if isinstance(qt, QI) and not bool(qt):
                    continue
                out_coeffs[j][t] = cadd(out_coeffs[j][t], csmul(qt, g))
    return [PrincipalPart((p,) * m, tuple(cs))
            for p, m, cs in zip(poles, mults, out_coeffs)]


def _sub_principal_parts(c, part, mm):
    """Partial fractions of b_mm = 1/prod_{v<=mm}(z-c_v) over the blocks.

    Returns {block j: [q_0..q_{mj-1}]} giving coefficients on
    1/(z-p_j)^{t+1}; exact when c is exact.
    """
    from math import comb
    mult = {}
    for v in range(mm + 1):
        j = part.block_of(v)
        mult[j] = mult.get(j, 0) + 1
    poles = {j: c[part.blocks[j][0]] for j in mult}
    one = _one_like(c)
    out = {}
    for j, m in mult.items():
        p = poles[j]
        taylor = [one] + [czero_scalar(c)] * (m - 1)
        for j2, m2 in mult.items():
            if j2 == j:
                continue
            d = p - poles[j2]
            dinv = one / d
            fac = [csmul((-1) ** t * comb(m2 + t - 1, t), dinv ** (m2 + t))
                   for t in range(m)]
            taylor = [sum((taylor[s] * fac[t - s] for s in range(t + 1)),
                          czero_scalar(c)) for t in range(m)]
        full = len(part.blocks[j])
        q = [czero_scalar(c)] * full
        for t in range(m):
            q[m - 1 - t] = taylor[t]
        out[j] = q
    return out


def crt_join(parts, part: SetPartition, c):
    """Inverse of crt_split for the given stratum and parameter."""
    c = tuple(c)
    if stratum_of(c) != part:
        raise ValueError("parameter vector is not on the requested stratum")
    poles, mults = _block_data(c, part)
    if isinstance(parts[0], TruncPoly):
        # Hermite interpolation: match all jets in the Newton basis
        rows = []
        rhs = []
        for (p, m, jet) in zip(poles, mults, parts):
            for t in range(m):
                rows.append([_taylor_of_newton_basis(c, mm, p, t)[t]
                             for mm in range(len(c))])
                rhs.append(jet.coeffs[t])
        sol = solve_linear(rows, rhs, tol=1e-13)
        return TruncPoly(c, tuple(sol))
    # principal parts: clear denominators and solve the triangular system
    # X * P(z) is a polynomial of degree <= l; the standard basis maps to
    # q_m = prod_{v>m}(z-c_v), monic of degree l-m.
    l = len(c) - 1
    zero = czero(parts[0].coeffs[0])
    poly = [zero for _ in range(l + 1)]  # monomial coefficients of X*P
    for (p, m, pp) in zip(poles, mults, parts):
        # (z-p)^{-(t+1)} * P(z) = (z-p)^{m-t-1} * prod over other blocks
        other = [v for v in range(l + 1) if c[v] != p]
        base = [ _one_like(c) ]
        for v in other:
            base = _poly_mul_linear(base, -c[v], c)
        for t, coeff in enumerate(pp.coeffs):
            factor = list(base)
            for _ in range(m - t - 1):
                factor = _poly_mul_linear(factor, -p, c)
            for deg, s in enumerate(factor):
                poly[deg] = cadd(poly[deg], csmul(s, coeff))
    # back-substitute against q_m, deg q_m = l - m, leading coeff 1
    coeffs = [None] * (l + 1)
    rem = poly
    for m in range(0, l + 1):
        deg = l - m
        coeffs[m] = rem[deg]
        qm = [_one_like(c)]
        for v in range(m + 1, l + 1):
            qm = _poly_mul_linear(qm, -c[v], c)
        for d2, sc in enumerate(qm):
            rem[d2] = cadd(rem[d2], csmul(-sc, coeffs[m]))
    return PrincipalPart(c, tuple(coeffs))


def _poly_mul_linear(poly, const, c):
    """poly(z) * (z + const) in monomial coefficients (scalars)."""
    zero = czero_scalar(c)
    out = [zero] * (len(poly) + 1)
    for t, s in enumerate(poly):
        out[t + 1] = out[t + 1] + s
        out[t] = out[t] + s * const
    return out
