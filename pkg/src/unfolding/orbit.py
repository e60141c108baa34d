"""Triangular coordinates on (deformed) truncated orbits for GL_n.

A point of the orbit of a canonical form H is coordinatized as
(g, (n_l, nu_l)_{l=1..k}, h): g in G, nilpotent-group data n_l supported
on the strictly-lower blocks between consecutive Levi subgroups, the
opposite principal parts nu_l in the reversed standard basis, and h in
L_1 acting on the residue H_0 + J_0.  The orbit point is evaluated
inductively and the moment map is its total residue.  All operations run
either exactly (QI matrices as nested tuples) or in complex128.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .exact import QI, exact_inverse, exact_rank
from .canonical import CanonicalForm, residue, spectral_type_of
from .laurent import (PrincipalPart, TruncPoly, cadd, cmatmul, csmul, czero,
                      czero_scalar, mul_gamma, mul_left, mul_right,
                      total_residue, crt_split, _one_like, _poly_mul_linear)
from .spectral import delta, _stab_dim
from .strata import stratum_of, partial_fractions

__all__ = ["NilpotentElem", "UPart", "TriangularCoords", "level_blocks",
           "lower_mask", "upper_mask", "exp_nilpotent", "log_unipotent",
           "factor_graded", "decompose_lu", "eval_orbit_point", "moment",
           "eval_orbit_point_series", "dim_check", "decompose_fiber",
           "FiberReport", "principal_invariants"]


# ---------------------------------------------------------------------
# block structure of the Levi chain

def level_blocks(h: CanonicalForm, l: int):
    """Blocks of L_l: coordinates with equal (H_k, ..., H_l); L_{k+1}=G."""
    if l >= h.k + 1:
        return [(0, h.n)]
    blocks = []
    start = 0

    def key(j):
        return tuple(h.diag[i][j] for i in range(h.k, l - 1, -1))

    for j in range(1, h.n + 1):
        if j == h.n or key(j) != key(start):
            blocks.append((start, j))
            start = j
    return blocks


def _block_id(blocks, j):
    for t, (lo, hi) in enumerate(blocks):
        if lo <= j < hi:
            return t
    raise IndexError(j)


def lower_mask(h: CanonicalForm, l: int):
    """(a, b) with a > b, same L_{l+1} block, different L_l blocks."""
    big = level_blocks(h, l + 1)
    small = level_blocks(h, l)
    return frozenset((a, b) for a in range(h.n) for b in range(a)
                     if _block_id(big, a) == _block_id(big, b)
                     and _block_id(small, a) != _block_id(small, b))


def upper_mask(h: CanonicalForm, l: int):
    return frozenset((b, a) for a, b in lower_mask(h, l))


def _mask_dim(mask):
    return len(mask)


# ---------------------------------------------------------------------
# matrices in either arithmetic

def _is_exact_mat(m):
    return isinstance(m, tuple)


def mat_zero(n, exact):
    if exact:
        return tuple(tuple(QI(0) for _ in range(n)) for _ in range(n))
    return np.zeros((n, n), dtype=complex)


def mat_eye(n, exact):
    if exact:
        return tuple(tuple(QI(1 if i == j else 0) for j in range(n))
                     for i in range(n))
    return np.eye(n, dtype=complex)


def mat_inv(m):
    if _is_exact_mat(m):
        return tuple(tuple(r) for r in exact_inverse([list(r) for r in m]))
    return np.linalg.inv(m)


def mat_is_zero(m):
    if _is_exact_mat(m):
        return all(not bool(x) for row in m for x in row)
    return not np.any(m)


def _check_support(m, mask, what):
    n = len(m) if _is_exact_mat(m) else m.shape[0]
    for a in range(n):
        for b in range(n):
            v = m[a][b] if _is_exact_mat(m) else m[a, b]
            if (a, b) not in mask and (bool(v) if isinstance(v, QI)
                                       else v != 0):
                raise ValueError(f"{what} has support outside its mask "
                                 f"at {(a, b)}")


@dataclass(frozen=True)
class NilpotentElem:
    """X = sum_{m=1}^{l} X_m n_m(z) supported on the lower blocks
    n_{l,l+1}; the constant term X_0 is zero by construction."""
    level: int
    mats: tuple   # X_1..X_l

    def __post_init__(self):
        if len(self.mats) != self.level:
            raise ValueError("need X_1..X_l")
        object.__setattr__(self, "mats", tuple(self.mats))

    def validate(self, h: CanonicalForm):
        mask = lower_mask(h, self.level)
        for m in self.mats:
            _check_support(m, mask, "nilpotent coordinate")

    def as_trunc(self, c, length, exact):
        n = (len(self.mats[0]) if _is_exact_mat(self.mats[0])
             else self.mats[0].shape[0]) if self.mats else 0
        coeffs = [mat_zero(n, exact)]
        coeffs += [m if exact == _is_exact_mat(m) else _convert(m, exact)
                   for m in self.mats]
        while len(coeffs) < length:
            coeffs.append(mat_zero(n, exact))
        return TruncPoly(tuple(c[:length]), tuple(coeffs[:length]))


@dataclass(frozen=True)
class UPart:
    """nu = sum_{t=0}^{l-1} nu_t / ((z-c_l)...(z-c_{l-t})) supported on
    the upper blocks u_{l,l+1}; the deepest coefficient (the full product
    down to z-c_0) is absent."""
    level: int
    mats: tuple   # nu_0..nu_{l-1}

    def __post_init__(self):
        if len(self.mats) != self.level:
            raise ValueError("need nu_0..nu_{l-1}")
        object.__setattr__(self, "mats", tuple(self.mats))

    def validate(self, h: CanonicalForm):
        mask = upper_mask(h, self.level)
        for m in self.mats:
            _check_support(m, mask, "opposite principal part")


@dataclass(frozen=True)
class TriangularCoords:
    """(g, (n_l, nu_l)_{l=1..k}, h) with h in L_1 (identity if None)."""
    g: object
    pairs: tuple   # ((NilpotentElem, UPart) or (None, None)) per level
    h: object = None


def _convert(m, exact):
    if exact and isinstance(m, np.ndarray):
        raise ValueError("cannot promote floats to exact scalars")
    if not exact and _is_exact_mat(m):
        return np.array([[complex(x) for x in row] for row in m])
    return m


# ---------------------------------------------------------------------
# exponentials, logarithms, factorizations over the truncated ring

def exp_nilpotent(x: TruncPoly) -> TruncPoly:
    """Finite matrix exponential of a nilpotent element (zero constant
    term and strictly triangular blocks make the series terminate)."""
    n_len = len(x.c)
    sample = x.coeffs[0]
    exact = _is_exact_mat(sample)
    n = len(sample) if exact else sample.shape[0]
    acc = TruncPoly(x.c, tuple(mat_eye(n, exact) if m == 0 else
                               mat_zero(n, exact) for m in range(n_len)))
    term = acc
    for t in range(1, n_len + n + 2):
        term = mul_gamma(term, x)
        if all(mat_is_zero(co) for co in term.coeffs):
            break
        scale = QI(1, 0) / QI(factorial(t)) if exact else 1.0 / factorial(t)
        acc = TruncPoly(x.c, tuple(cadd(a, csmul(scale, b))
                                   for a, b in zip(acc.coeffs, term.coeffs)))
    else:
        raise ValueError("element is not nilpotent")
    return acc


def log_unipotent(u: TruncPoly) -> TruncPoly:
    """Inverse of exp_nilpotent on unipotent elements."""
    n_len = len(u.c)
    sample = u.coeffs[0]
    exact = _is_exact_mat(sample)
    n = len(sample) if exact else sample.shape[0]
    eye = mat_eye(n, exact)
    minus = csmul(QI(-1) if exact else -1.0, eye)
    y = TruncPoly(u.c, tuple(cadd(co, minus) if m == 0 else co
                             for m, co in enumerate(u.coeffs)))
    acc = TruncPoly(u.c, tuple(mat_zero(n, exact) for _ in range(n_len)))
    term = TruncPoly(u.c, tuple(mat_eye(n, exact) if m == 0 else
                                mat_zero(n, exact) for m in range(n_len)))
    for t in range(1, n_len + n + 2):
        term = mul_gamma(term, y)
        if all(mat_is_zero(co) for co in term.coeffs):
            break
        sign = (-1) ** (t + 1)
        scale = QI(sign) / QI(t) if exact else sign / t
        acc = TruncPoly(u.c, tuple(cadd(a, csmul(scale, b))
                                   for a, b in zip(acc.coeffs, term.coeffs)))
    else:
        raise ValueError("element is not unipotent")
    return acc


def _gamma_inv_unipotent(u: TruncPoly) -> TruncPoly:
    return exp_nilpotent(_neg_trunc(log_unipotent(u)))


def _neg_trunc(x: TruncPoly) -> TruncPoly:
    exact = _is_exact_mat(x.coeffs[0])
    s = QI(-1) if exact else -1.0
    return TruncPoly(x.c, tuple(csmul(s, co) for co in x.coeffs))


def factor_graded(g: TruncPoly):
    """Graded factors of a unipotent g over C[z]_l: g = e^{Z_l z^l} ...
    e^{Z_1 z}; unique, returned as (Z_1, ..., Z_l)."""
    if any(complex(x) != 0 for x in g.c) if isinstance(g.c[0], QI) \
            else any(x != 0 for x in g.c):
        raise ValueError("graded factorization lives at c = 0")
    sample = g.coeffs[0]
    exact = _is_exact_mat(sample)
    n = len(sample) if exact else sample.shape[0]
    if not mat_is_zero(cadd(sample, csmul(QI(-1) if exact else -1.0,
                                          mat_eye(n, exact)))):
        raise ValueError("input is not unipotent (constant term != 1)")
    l = g.l
    current = g
    factors = []
    for m in range(1, l + 1):
        zm = current.coeffs[m]
        factors.append(zm)
        x = TruncPoly(g.c, tuple(csmul(QI(-1) if exact else -1.0, zm)
                                 if t == m else mat_zero(n, exact)
                                 for t in range(l + 1)))
        current = mul_gamma(current, exp_nilpotent(x))
    return tuple(factors)


def decompose_lu(g: TruncPoly, mask1, mask2):
    """g = g1 * g2 with log g1 supported on mask1 (plus diagonal-free
    complement handling: the masks must split the support of log g)."""
    if mask1 & mask2:
        raise ValueError("masks overlap; need a direct-sum split")
    sample = g.coeffs[0]
    exact = _is_exact_mat(sample)
    n = len(sample) if exact else sample.shape[0]
    l = g.l
    eye = TruncPoly(g.c, tuple(mat_eye(n, exact) if m == 0 else
                               mat_zero(n, exact) for m in range(l + 1)))
    g1, g2 = eye, eye
    for m in range(1, l + 1):
        mid = mul_gamma(mul_gamma(_gamma_inv_unipotent(g1), g),
                        _gamma_inv_unipotent(g2))
        d = mid.coeffs[m]
        d1 = mat_zero(n, exact)
        d2 = mat_zero(n, exact)
        for a in range(n):
            for b in range(n):
                v = d[a][b] if exact else d[a, b]
                if isinstance(v, QI) and not bool(v):
                    continue
                if not isinstance(v, QI) and v == 0:
                    continue
                if (a, b) in mask1:
                    d1 = _set_entry(d1, a, b, v, exact)
                elif (a, b) in mask2:
                    d2 = _set_entry(d2, a, b, v, exact)
                else:
                    raise ValueError(f"degree-{m} defect outside both masks "
                                     f"at {(a, b)}")
        e1 = exp_nilpotent(TruncPoly(g.c, tuple(
            d1 if t == m else mat_zero(n, exact) for t in range(l + 1))))
        e2 = exp_nilpotent(TruncPoly(g.c, tuple(
            d2 if t == m else mat_zero(n, exact) for t in range(l + 1))))
        g1 = mul_gamma(g1, e1)
        g2 = mul_gamma(e2, g2)
    return g1, g2


def _set_entry(m, a, b, v, exact):
    if exact:
        rows = [list(r) for r in m]
        rows[a][b] = v
        return tuple(tuple(r) for r in rows)
    m = m.copy()
    m[a, b] = v
    return m


# ---------------------------------------------------------------------
# the inductive orbit-point evaluation and the moment map

def _principal_from_terms(c, terms, n, exact):
    """Element sum of coeff / prod_{v in factors}(z - c_v) written in the
    standard basis of L(c)_l; factors are index subsets of {0..l}."""
    l = len(c) - 1
    poly = [mat_zero(n, exact) for _ in range(l + 1)]
    for factors, coeff in terms:
        fset = set(factors)
        base = [_one_like(c)]
        for v in range(l + 1):
            if v not in fset:
                base = _poly_mul_linear(base, -c[v], c)
        for deg, s in enumerate(base):
            poly[deg] = cadd(poly[deg], csmul(s, coeff))
    coeffs = [None] * (l + 1)
    rem = poly
    for m in range(l + 1):
        deg = l - m
        coeffs[m] = rem[deg]
        qm = [_one_like(c)]
        for v in range(m + 1, l + 1):
            qm = _poly_mul_linear(qm, -c[v], c)
        for d2, sc in enumerate(qm):
            rem[d2] = cadd(rem[d2], csmul(-sc, coeffs[m]))
    return PrincipalPart(tuple(c), tuple(coeffs))


def _upart_principal(nu: UPart, c, n, exact):
    l = nu.level
    terms = []
    for t, m in enumerate(nu.mats):
        mm = m if exact == _is_exact_mat(m) else _convert(m, exact)
        terms.append((list(range(l - t, l + 1)), mm))
    return _principal_from_terms(c, terms, n, exact)


def _ad_exp(x: TruncPoly, xi: PrincipalPart, bound):
    """e^{ad_x}(xi); terminates by structural nilpotency of x."""
    exact = _is_exact_mat(xi.coeffs[0])
    acc = xi
    term = xi
    for t in range(1, bound + 2):
        left = mul_left(x, term)
        right = mul_right(term, x)
        term = PrincipalPart(xi.c, tuple(
            cadd(a, csmul(QI(-1) if exact else -1.0, b))
            for a, b in zip(left.coeffs, right.coeffs)))
        if all(mat_is_zero(co) for co in term.coeffs):
            break
        scale = QI(1) / QI(factorial(t)) if exact else 1.0 / factorial(t)
        acc = PrincipalPart(xi.c, tuple(
            cadd(a, csmul(scale, b)) for a, b in zip(acc.coeffs, term.coeffs)))
    else:
        raise ValueError("adjoint series did not terminate")
    return acc


def _conjugate_coeffs(g, xi: PrincipalPart):
    ginv = mat_inv(g)
    return PrincipalPart(xi.c, tuple(cmatmul(cmatmul(g, co), ginv)
                                     for co in xi.coeffs))


def _mode(t: TriangularCoords, c):
    exact = not isinstance(t.g, np.ndarray)
    if any(isinstance(x, (complex, float)) for x in c):
        exact = False
    return exact


def _coerce_c(c, exact):
    if exact:
        return tuple(c)
    return tuple(complex(x) for x in c)


def eval_orbit_point(t: TriangularCoords, h: CanonicalForm, c) \
        -> PrincipalPart:
    """The orbit point Ad*(g) ( Ad*(e^{n_k})(nu_k + ... ) ) built
    inductively from the residue term upward."""
    if len(c) != h.k + 1:
        raise ValueError("parameter length must be k+1")
    exact = _mode(t, c)
    cc = _coerce_c(c, exact)
    n = h.n
    bound = 2 * n + h.k + 2

    def mat(m):
        return _convert(m, exact) if exact != _is_exact_mat(m) else m

    res = tuple(tuple(x for x in row) for row in residue(h))
    if t.h is not None:
        hh = mat(t.h)
        res = cmatmul(cmatmul(hh, mat(res)), mat_inv(hh))
    else:
        res = mat(res)
    coeffs = [res]
    for i in range(1, h.k + 1):
        d = tuple(tuple((h.diag[i][a] if a == b else QI(0))
                        for b in range(n)) for a in range(n))
        coeffs.append(mat(d))
    cur = PrincipalPart(cc, tuple(coeffs))
    for l in range(1, h.k + 1):
        nl, nul = t.pairs[l - 1]
        if nul is not None and nul.level:
            nu = _upart_principal(nul, cc, n, exact)
            cur = PrincipalPart(cc, tuple(cadd(a, b) for a, b in
                                          zip(nu.coeffs, cur.coeffs)))
        if nl is not None and nl.level:
            x = nl.as_trunc(cc, h.k + 1, exact)
            cur = _ad_exp(x, cur, bound)
    return _conjugate_coeffs(mat(t.g), cur)


def moment(t: TriangularCoords, h: CanonicalForm, c):
    """Total residue of the orbit point; trace equals tr(H_res)."""
    return total_residue(eval_orbit_point(t, h, c))


def eval_orbit_point_series(t: TriangularCoords, h: CanonicalForm):
    """Independent undeformed (c = 0) evaluation via plain Laurent-series
    index arithmetic; used to cross-check the deformed code at c = 0."""
    exact = not isinstance(t.g, np.ndarray)
    n = h.n
    k = h.k

    def mat(m):
        return _convert(m, exact) if exact != _is_exact_mat(m) else m

    # coefficient list indexed by power of z^{-(m+1)}, m = 0..k
    res = residue(h)
    if t.h is not None:
        hh = mat(t.h)
        res = cmatmul(cmatmul(hh, mat(res)), mat_inv(hh))
    else:
        res = mat(res)
    cur = [res]
    for i in range(1, k + 1):
        cur.append(mat(tuple(tuple((h.diag[i][a] if a == b else QI(0))
                                   for b in range(n)) for a in range(n))))

    def series_mul_poly(poly, lser, side):
        # poly[m] on z^m (m>=0), lser[m] on z^{-(m+1)}; drop z^{>=0}
        out = [mat_zero(n, exact) for _ in range(k + 1)]
        for pm, pmat in enumerate(poly):
            if mat_is_zero(pmat):
                continue
            for lm, lmat in enumerate(lser):
                tgt = lm - pm
                if tgt < 0:
                    continue
                prod = cmatmul(pmat, lmat) if side == "left" \
                    else cmatmul(lmat, pmat)
                out[tgt] = cadd(out[tgt], prod)
        return out

    for l in range(1, k + 1):
        nl, nul = t.pairs[l - 1]
        if nul is not None and nul.level:
            # reversed basis at c=0: nu_t / z^{t+1}... the factors are
            # (z-c_l)...(z-c_{l-t}) which all collapse to z^{t+1}
            for tdx, m in enumerate(nul.mats):
                cur[tdx] = cadd(cur[tdx], mat(m))
        if nl is not None and nl.level:
            poly = [mat_zero(n, exact)] + [mat(m) for m in nl.mats]
            acc = list(cur)
            term = list(cur)
            for s in range(1, 2 * n + k + 2):
                left = series_mul_poly(poly, term, "left")
                right = series_mul_poly(poly, term, "right")
                term = [cadd(a, csmul(QI(-1) if exact else -1.0, b))
                        for a, b in zip(left, right)]
                if all(mat_is_zero(co) for co in term):
                    break
                sc = QI(1) / QI(factorial(s)) if exact else 1.0 / factorial(s)
                acc = [cadd(a, csmul(sc, b)) for a, b in zip(acc, term)]
            cur = acc
    g = mat(t.g)
    ginv = mat_inv(g)
    return [cmatmul(cmatmul(g, co), ginv) for co in cur]


def dim_check(h: CanonicalForm):
    """(chart parameter count, delta(H)); equal for every form."""
    sp = spectral_type_of(h)
    dim_l = [None] * (h.k + 2)
    for l in range(1, h.k + 2):
        dim_l[l] = sum((hi - lo) ** 2 for lo, hi in level_blocks(h, l))
    g_dim = h.n * h.n
    count = g_dim - dim_l[1]
    for l in range(1, h.k + 1):
        count += 2 * l * _mask_dim(lower_mask(h, l))
    count += dim_l[1] - _stab_dim(sp)
    return count, delta(sp)


# ---------------------------------------------------------------------
# fiber decomposition over a stratum

@dataclass(frozen=True)
class FiberReport:
    ok: bool
    poles: tuple      # per pole: (pole, ok, expected levels, got levels)


def _cluster(vals, tol):
    groups = []
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(v - g[0]) <= tol:
                g.append(v)
                break
        else:
            groups.append([v])
    return groups


def principal_invariants(coeffs, tol=1e-8):
    """Eigenvalues (with multiplicity) of the leading coefficient on each
    level of a complex principal part, computed by recursive splitting
    along the eigenblocks of the top coefficient."""
    lmax = len(coeffs) - 1
    n = coeffs[0].shape[0]
    if lmax == 0:
        return [sorted(np.linalg.eigvals(coeffs[0]),
                       key=lambda z: (z.real, z.imag))]
    top = coeffs[-1]
    evals, vecs = np.linalg.eig(top)
    # group eigenvalues into clusters
    idx = sorted(range(n), key=lambda i: (evals[i].real, evals[i].imag))
    clusters = []
    for i in idx:
        if clusters and abs(evals[i] - evals[clusters[-1][0]]) <= tol * 100:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    # orthonormal basis per cluster subspace: raw eigenvectors of a
    # near-degenerate cluster are nearly parallel, but their span still
    # approximates the invariant subspace well
    cols = []
    for cl in clusters:
        u, _, _ = np.linalg.svd(vecs[:, cl], full_matrices=False)
        cols.append(u[:, :len(cl)])
    v = np.hstack(cols)
    vinv = np.linalg.inv(v)
    mats = [vinv @ b @ v for b in coeffs]
    sizes = [len(cl) for cl in clusters]
    bounds = np.cumsum([0] + sizes)
    lam = [np.mean([evals[i] for i in cl]) for cl in clusters]
    if len(clusters) > 1:
        # kill the off-blocks of the lower coefficients level by level
        for m in range(1, lmax + 1):
            x = np.zeros((n, n), dtype=complex)
            b_t = mats[lmax - m]
            for bi in range(len(sizes)):
                for bj in range(len(sizes)):
                    if bi == bj:
                        continue
                    sl_i = slice(bounds[bi], bounds[bi + 1])
                    sl_j = slice(bounds[bj], bounds[bj + 1])
                    x[sl_i, sl_j] = b_t[sl_i, sl_j] / (lam[bi] - lam[bj])
            if not np.any(x):
                continue
            mats = _gauge_exp(mats, x, m)
    out = [[] for _ in range(lmax + 1)]
    for bi in range(len(sizes)):
        sl = slice(bounds[bi], bounds[bi + 1])
        out[lmax].extend([lam[bi]] * sizes[bi])
        sub = [mats[tt][sl, sl] for tt in range(lmax)]
        subinv = principal_invariants(sub, tol)
        for tt in range(lmax):
            out[tt].extend(subinv[tt])
    return [sorted(level, key=lambda z: (z.real, z.imag)) for level in out]


def _gauge_exp(mats, x, m):
    """Ad(exp(x w^m)) acting on principal-part coefficients in the local
    variable w: B_t <- sum_s ad(x)^s(B_{t+sm}) / s!."""
    lmax = len(mats) - 1
    out = []
    for tdeg in range(lmax + 1):
        acc = mats[tdeg].copy()
        s = 1
        fact = 1.0
        while tdeg + s * m <= lmax:
            fact *= s
            ad = mats[tdeg + s * m]
            for _ in range(s):
                ad = x @ ad - ad @ x
            acc = acc + ad / fact
            s += 1
        out.append(acc)
    return out


def _contiguous_groups(vals):
    groups = []
    for a, v in enumerate(vals):
        if groups and groups[-1][0] == v:
            groups[-1][1].append(a)
        else:
            groups.append((v, [a]))
    return groups


def _shift_diag(m, lam):
    n = len(m)
    return tuple(tuple(m[i][j] - lam if i == j else m[i][j]
                       for j in range(n)) for i in range(n))


def _mat_trace(m):
    return sum((m[i][i] for i in range(len(m))), QI(0))


def _char_poly(m):
    """Monic characteristic polynomial of an exact matrix, descending
    coefficients, by the Faddeev-LeVerrier recurrence."""
    n = len(m)
    eye = mat_eye(n, True)
    cs = [QI(1)]
    mk = None
    for s in range(1, n + 1):
        if mk is None:
            mk = tuple(tuple(row) for row in m)
        else:
            mk = cmatmul(m, cadd(mk, csmul(cs[-1], eye)))
        cs.append(QI(Fraction(-1, s)) * _mat_trace(mk))
    return cs


def _poly_from_roots(vals):
    cs = [QI(1)]
    for lam in vals:
        out = [QI(0)] * (len(cs) + 1)
        for i, cv in enumerate(cs):
            out[i] = out[i] + cv
            out[i + 1] = out[i + 1] - lam * cv
        cs = out
    return cs


def _exact_gauge_exp(mats, x, m):
    lmax = len(mats) - 1
    out = []
    for tdeg in range(lmax + 1):
        acc = mats[tdeg]
        s = 1
        while tdeg + s * m <= lmax:
            ad = mats[tdeg + s * m]
            for _ in range(s):
                ad = cadd(cmatmul(x, ad), csmul(QI(-1), cmatmul(ad, x)))
            acc = cadd(acc, csmul(QI(Fraction(1, factorial(s))), ad))
            s += 1
        out.append(acc)
    return out


def _exact_invariant_check(coeffs, levels):
    """Exact verification that a principal part with exact coefficients
    carries the prescribed per-level eigenvalue multiplicities.

    levels[i] lists the expected eigenvalues at level i in nested block
    order (equal values contiguous, as on a sorted canonical form).  The
    leading coefficients above the residue must be semisimple; the
    residue itself may carry a nilpotent part, so only algebraic
    multiplicities are compared there via the characteristic polynomial.
    """
    lmax = len(coeffs) - 1
    n = len(levels[0])
    top = coeffs[lmax]
    if lmax == 0:
        return _char_poly(top) == _poly_from_roots(levels[0])
    groups = _contiguous_groups(levels[lmax])
    eye = mat_eye(n, True)
    prod = eye
    for lam, _ in groups:
        prod = cmatmul(prod, _shift_diag(top, lam))
    if not mat_is_zero(prod):
        return False
    if len(groups) == 1:
        return _exact_invariant_check(coeffs[:lmax], levels[:lmax])
    # exact eigenbasis from spectral projectors
    cols = []
    for lam, idxs in groups:
        proj = eye
        for lam2, _ in groups:
            if lam2 == lam:
                continue
            proj = cmatmul(proj, csmul(QI(1) / (lam - lam2),
                                       _shift_diag(top, lam2)))
        if _mat_trace(proj) != QI(len(idxs)):
            return False
        chosen = []
        for j in range(n):
            col = [proj[i][j] for i in range(n)]
            if exact_rank(chosen + [col]) > len(chosen):
                chosen.append(col)
                if len(chosen) == len(idxs):
                    break
        cols.extend(chosen)
    v = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
    vinv = mat_inv(v)
    mats = [cmatmul(cmatmul(vinv, b), v) for b in coeffs]
    sizes = [len(idxs) for _, idxs in groups]
    bounds = [0]
    for sz in sizes:
        bounds.append(bounds[-1] + sz)
    lams = [lam for lam, _ in groups]
    for m in range(1, lmax + 1):
        b_t = mats[lmax - m]
        x = [[QI(0)] * n for _ in range(n)]
        nonzero = False
        for bi in range(len(sizes)):
            for bj in range(len(sizes)):
                if bi == bj:
                    continue
                d = lams[bi] - lams[bj]
                for a in range(bounds[bi], bounds[bi + 1]):
                    for b in range(bounds[bj], bounds[bj + 1]):
                        if bool(b_t[a][b]):
                            x[a][b] = b_t[a][b] / d
                            nonzero = True
        if nonzero:
            mats = _exact_gauge_exp(mats, tuple(tuple(r) for r in x), m)
    for bi, (lam, idxs) in enumerate(groups):
        lo, hi = bounds[bi], bounds[bi + 1]
        sub = [tuple(tuple(mats[t][a][b] for b in range(lo, hi))
                     for a in range(lo, hi)) for t in range(lmax)]
        sublevels = [tuple(levels[i][a] for a in idxs) for i in range(lmax)]
        if not _exact_invariant_check(sub, sublevels):
            return False
    return True


def decompose_fiber(t: TriangularCoords, h: CanonicalForm, c, tol=1e-8) \
        -> FiberReport:
    """Evaluate the orbit point at exact c, split per pole, and verify
    that each principal part carries the leading-coefficient eigenvalue
    multiplicities of the exact unfolded piece H(c)_j."""
    part = stratum_of(c)
    exact = all(isinstance(x, QI) for x in c) and isinstance(t.g[0][0], QI)
    ev = eval_orbit_point(t, h, list(c) if exact else [complex(x) for x in c])
    split = crt_split(ev, part)
    expected = partial_fractions(h, c)
    reports = []
    all_ok = True
    for (pole, piece), got in zip(expected.pieces, split):
        exp_levels = []
        for i in range(piece.k, -1, -1):
            exp_levels.append(sorted((complex(x) for x in piece.diag[i]),
                                     key=lambda z: (z.real, z.imag)))
        exp_levels = exp_levels[::-1]
        if exact:
            coeffs = [np.array([[complex(x) for x in row] for row in co])
                      for co in got.coeffs]
        else:
            coeffs = [np.asarray(co) for co in got.coeffs]
        got_levels = principal_invariants(coeffs, tol)
        scale = max([1.0] + [abs(co).max() for co in coeffs])
        ok = True
        for le, lg in zip(exp_levels, got_levels):
            rem = list(lg)
            for vexp in le:
                best = min(range(len(rem)), key=lambda i: abs(rem[i] - vexp))
                if abs(rem[best] - vexp) > tol * scale:
                    ok = False
                    break
                rem.pop(best)
            if not ok:
                break
        if not ok and exact:
            # numeric clustering can lose digits on highly non-normal
            # coefficients; settle the question in exact arithmetic
            levels = [tuple(piece.diag[i]) for i in range(piece.k + 1)]
            ok = _exact_invariant_check(list(got.coeffs), levels)
            if ok:
                got_levels = exp_levels
        reports.append((pole, ok, exp_levels, got_levels))
        all_ok = all_ok and ok
    return FiberReport(all_ok, tuple(reports))
