"""Set-partition strata of the unfolding parameter space and the exact
partial-fraction decomposition of the unfolded form H(c).

The unfolding replaces 1/z^{i+1} by b_i = 1/((z-c_0)...(z-c_i)).  On the
stratum where the coincidence pattern of (c_0,...,c_k) is the partition
I, the form splits into one canonical form per block, and on the open
set B_H the spectral types of the pieces are the unfolded types S^I.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .exact import QI, as_qi
from .canonical import (CanonicalForm, sort_to_fundamental_domain,
                        spectral_type_of, residue, zero_j0)
from .spectral import (SpectralCollection, delta, unfold_spectral, weyl_key)

__all__ = ["SetPartition", "HyperplanePoly", "UnfoldedDecomposition",
           "MismatchReport", "SamplingExhausted", "partitions", "refines",
           "stratum_of", "hyperplane_polys", "in_BH", "partial_fractions",
           "verify_spectral_decomposition", "delta_sum_check",
           "sample_stratum"]


@dataclass(frozen=True)
class SetPartition:
    """Disjoint sorted blocks covering {0..k}; the block containing 0
    comes first, the rest are ordered by their minima."""
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        seen = set()
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            if seen & set(b):
                raise ValueError("blocks must be disjoint")
            seen.update(b)
        if seen != set(range(max(seen) + 1)) or 0 not in seen:
            raise ValueError("blocks must cover {0..k}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def ground_size(self):
        return sum(len(b) for b in self.blocks)

    def block_of(self, x):
        for j, b in enumerate(self.blocks):
            if x in b:
                return j
        raise KeyError(x)

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    @staticmethod
    def parse(s: str) -> "SetPartition":
        return SetPartition(tuple(tuple(int(x) for x in b.split(","))
                                  for b in s.split("|")))


def partitions(k: int):
    """All set partitions of {0..k} via restricted growth strings,
    deterministic order; Bell(k+1) of them."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = []

    def rec(pos, rgs, mx):
        if pos == k + 1:
            nblocks = mx + 1
            blocks = [[] for _ in range(nblocks)]
            for i, b in enumerate(rgs):
                blocks[b].append(i)
            out.append(SetPartition(tuple(tuple(b) for b in blocks)))
            return
        for b in range(mx + 2):
            rgs.append(b)
            rec(pos + 1, rgs, max(mx, b))
            rgs.pop()

    rec(1, [0], 0)
    return out


def refines(i: SetPartition, j: SetPartition) -> bool:
    """True iff every block of i is contained in a block of j."""
    if i.ground_size != j.ground_size:
        raise ValueError("partitions of different ground sets")
    return all(set(b) <= set(j.blocks[j.block_of(b[0])]) for b in i.blocks)


def stratum_of(c) -> SetPartition:
    """Coincidence pattern of the coordinates (exact equality)."""
    classes = {}
    for idx, x in enumerate(c):
        classes.setdefault(as_qi(x) if not isinstance(x, complex) else x,
                           []).append(idx)
    return SetPartition(tuple(tuple(b) for b in classes.values()))


@dataclass(frozen=True)
class HyperplanePoly:
    """f_alpha^(i)(x) = sum_{j=i}^{d} alpha(H_j) prod_{v=j+1}^{d}(x_i - x_v),
    where d = d(alpha) is the deepest level whose subset omits alpha."""
    alpha: int
    level: int
    depth: int
    coeffs: tuple  # alpha(H_j) for j = level..depth

    def evaluate(self, c):
        i, d = self.level, self.depth
        numeric = any(isinstance(x, (complex, float)) for x in c)
        vals = [complex(x) for x in self.coeffs] if numeric else list(self.coeffs)
        cc = [complex(x) for x in c] if numeric else list(c)
        acc = 0j if numeric else QI(0)
        prod = 1.0 + 0j if numeric else QI(1)
        # run j downward from d so the product accumulates one factor a step
        for j in range(d, i - 1, -1):
            acc = acc + vals[j - i] * prod
            prod = prod * (cc[i] - cc[j])
        return acc

    @property
    def constant_term(self):
        return self.coeffs[-1]


def hyperplane_polys(h: CanonicalForm):
    """The defining polynomials of the complement B_H."""
    if not h.is_sorted():
        raise ValueError("form must be sorted to the fundamental domain first")
    sp = spectral_type_of(h)
    k = h.k
    out = []
    for a in range(h.n - 1):
        depths = [i for i in range(k + 1) if a not in sp.levels[k - i]]
        if not depths:
            continue
        d = max(depths)
        for i in range(d + 1):
            coeffs = tuple(h.diag[j][a] - h.diag[j][a + 1] for j in range(i, d + 1))
            out.append(HyperplanePoly(a, i, d, coeffs))
    return out


def _pair_polys(h: CanonicalForm):
    """Coincidence polynomials for every coordinate pair, not just
    adjacent ones.

    B_H itself only excludes coincidences between adjacent coordinates,
    which is what the decomposition needs at level resolution.  But the
    residue of a piece can still pick up an accidental equality between
    two non-adjacent coordinates at special parameter points, which
    collapses the piece's orbit.  The same polynomial family written for
    an arbitrary pair (a, b) rules those points out as well, so samplers
    can stay clear of them.  The pair's depth is the deepest level at
    which the two diagonal entries differ; pairs equal at every level
    impose no condition.
    """
    k = h.k
    out = []
    for a in range(h.n - 1):
        for b in range(a + 1, h.n):
            depths = [j for j in range(k + 1) if h.diag[j][a] != h.diag[j][b]]
            if not depths:
                continue
            d = max(depths)
            for i in range(d + 1):
                coeffs = tuple(h.diag[j][a] - h.diag[j][b]
                               for j in range(i, d + 1))
                out.append(HyperplanePoly(a, i, d, coeffs))
    return out


def in_BH(h: CanonicalForm, c) -> bool:
    c = [x if isinstance(x, (complex, float)) else as_qi(x) for x in c]
    if len(c) != h.k + 1:
        raise ValueError("parameter length must be k+1")
    for p in hyperplane_polys(h):
        v = p.evaluate(c)
        if (not bool(v)) if isinstance(v, QI) else abs(v) <= 1e-13:
            return False
    return True


# ---------------------------------------------------------------------
# partial fractions of the unfolded form

def _principal_parts_of_b(i, c, part: SetPartition):
    """Per-block principal parts of b_i = prod_{v=0}^{i} 1/(z - c_v).

    Returns {block j: [q_0, ..., q_{m_j-1}]} with b_i = sum over blocks of
    sum_t q_t / (z - p_j)^{t+1}; exact Taylor expansion at each pole.
    """
    mult = {}
    for v in range(i + 1):
        j = part.block_of(v)
        mult[j] = mult.get(j, 0) + 1
    poles = {j: c[part.blocks[j][0]] for j in mult}
    out = {}
    for j, m in mult.items():
        p = poles[j]
        # Taylor coefficients of prod_{j'!=j} (w + (p - p_{j'}))^{-m_{j'}}
        taylor = [QI(1)] + [QI(0)] * (m - 1)
        for j2, m2 in mult.items():
            if j2 == j:
                continue
            d = p - poles[j2]
            # (w + d)^{-m2} = d^{-m2} sum_t C(m2+t-1, t) (-w/d)^t
            dinv = QI(1) / d
            fac = [QI(comb(m2 + t - 1, t)) * ((-1) ** t) * dinv ** (m2 + t)
                   for t in range(m)]
            taylor = [sum((taylor[s] * fac[t - s] for s in range(t + 1)), QI(0))
                      for t in range(m)]
        # principal coefficient of (z-p)^{-(m-t)} is taylor[t]:
        # q_{m-1-t} = taylor[t] in the (z-p)^{-(s+1)} indexing
        q = [QI(0)] * m
        for t in range(m):
            q[m - 1 - t] = taylor[t]
        out[j] = q
    return out


@dataclass(frozen=True)
class UnfoldedDecomposition:
    """H(c) = sum of canonical forms, one per block of the stratum."""
    c: tuple
    stratum: SetPartition
    pieces: tuple  # tuple of (pole QI, CanonicalForm), block order

    def residue_sum(self):
        n = self.pieces[0][1].n
        total = [[QI(0)] * n for _ in range(n)]
        for _, form in self.pieces:
            r = residue(form)
            for a in range(n):
                for b in range(n):
                    total[a][b] = total[a][b] + r[a][b]
        return tuple(tuple(row) for row in total)


def partial_fractions(h: CanonicalForm, c) -> UnfoldedDecomposition:
    """Exact decomposition of H(c) into per-pole canonical forms.

    The nilpotent J0 rides on b_0 = 1/(z - c_0) and so lands entirely in
    the block containing index 0.  Pieces come back sorted to the
    fundamental domain, but unpermuted coefficient data is preserved in
    their J0-block structure.
    """
    c = tuple(as_qi(x) for x in c)
    if len(c) != h.k + 1:
        raise ValueError("parameter length must be k+1")
    part = stratum_of(c)
    nblocks = len(part.blocks)
    sizes = [len(b) for b in part.blocks]
    coeff = [[[QI(0)] * h.n for _ in range(sizes[j])] for j in range(nblocks)]
    for i in range(h.k + 1):
        pieces = _principal_parts_of_b(i, c, part)
        for j, q in pieces.items():
            for t, qt in enumerate(q):
                if not bool(qt):
                    continue
                for a in range(h.n):
                    coeff[j][t][a] = coeff[j][t][a] + qt * h.diag[i][a]
    out = []
    for j in range(nblocks):
        pole = c[part.blocks[j][0]]
        j0 = h.j0 if j == 0 else zero_j0(h.n)
        form = CanonicalForm(h.n, sizes[j] - 1,
                             tuple(tuple(r) for r in coeff[j]), j0)
        out.append((pole, sort_to_fundamental_domain(form)))
    return UnfoldedDecomposition(c, part, tuple(out))


class MismatchReport(Exception):
    """Spectral decomposition mismatch: either c lies outside B_H or the
    implementation is at fault."""

    def __init__(self, block, expected, got):
        self.block = block
        self.expected = expected
        self.got = got
        super().__init__(f"block {block}: expected {expected.pretty()}, "
                         f"got {got.pretty()}")


def verify_spectral_decomposition(h: CanonicalForm, c) -> SpectralCollection:
    """Check sp(H(c)_j) = S^{I_j} blockwise (as types up to the Weyl
    action) and return the computed collection."""
    dec = partial_fractions(h, c)
    expected = unfold_spectral(spectral_type_of(h), dec.stratum)
    got = []
    for j, (_, piece) in enumerate(dec.pieces):
        sp = spectral_type_of(piece)
        if weyl_key(sp) != weyl_key(expected.types[j]):
            raise MismatchReport(j, expected.types[j], sp)
        got.append(sp)
    return SpectralCollection(tuple(got))


def delta_sum_check(h: CanonicalForm, c):
    """(sum of piece deltas, delta of H); equal on B_H."""
    dec = partial_fractions(h, c)
    total = sum(delta(spectral_type_of(piece)) for _, piece in dec.pieces)
    return total, delta(spectral_type_of(h))


class SamplingExhausted(Exception):
    pass


def sample_stratum(h: CanonicalForm, part: SetPartition, seed=0,
                   budget=200):
    """Draw an exact c in C(I) and B_H; heights grow geometrically on
    rejection since B_H is open dense.

    Beyond membership in B_H, the sample also avoids the accidental
    non-adjacent coincidence loci (see _pair_polys), so every returned
    point realizes the generic piece types of its stratum.
    """
    if part.ground_size != h.k + 1:
        raise ValueError("partition size must be k+1")
    polys = hyperplane_polys(h) + _pair_polys(h)
    rng = random.Random(seed)
    height = 4
    for attempt in range(budget):
        vals = []
        while len(vals) < len(part.blocks):
            v = QI(Fraction(rng.randint(-height, height),
                            rng.randint(1, height)))
            if v not in vals:
                vals.append(v)
        c = [None] * (h.k + 1)
        for j, block in enumerate(part.blocks):
            for i in block:
                c[i] = vals[j]
        ce = [as_qi(x) for x in c]
        if all(bool(p.evaluate(ce)) for p in polys):
            return tuple(c)
        if attempt % 8 == 7:
            height *= 2
    raise SamplingExhausted(f"no point of C({part}) in B_H found")
