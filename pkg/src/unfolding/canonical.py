"""Canonical forms of unramified irregular singularities over GL_n.

A form is H = H_k/z^{k+1} + ... + H_1/z^2 + (H_0 + J_0)/z with diagonal
exact coefficients H_i and a nilpotent J_0 that commutes with all of
them.  Exact scalars matter: the spectral type is defined by exact
vanishing of simple roots on the coefficients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .exact import QI, as_qi, exact_rank, format_scalar, parse_scalar
from .rootdata import gl_root_data
from .spectral import AbstractSpectralType

__all__ = ["CanonicalForm", "sort_to_fundamental_domain", "spectral_type_of",
           "is_nonresonant", "residue", "form_to_json", "form_from_json"]


@dataclass(frozen=True)
class CanonicalForm:
    """Diagonal coefficient vectors diag[i] = H_i (i = 0..k) plus J0.

    J0 is a nested tuple (n x n) of QI, strictly upper triangular and
    supported on the equal-coordinate blocks of (H_k, ..., H_0).
    """
    n: int
    k: int
    diag: tuple   # diag[i] = tuple of n QI, the coefficient H_i
    j0: tuple     # n x n nested tuple of QI

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise ValueError("need n >= 1 and k >= 0")
        diag = tuple(tuple(as_qi(x) for x in row) for row in self.diag)
        if len(diag) != self.k + 1 or any(len(r) != self.n for r in diag):
            raise ValueError("need k+1 diagonal vectors of length n")
        j0 = tuple(tuple(as_qi(x) for x in row) for row in self.j0)
        if len(j0) != self.n or any(len(r) != self.n for r in j0):
            raise ValueError("J0 must be n x n")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "j0", j0)
        for a in range(self.n):
            for b in range(self.n):
                if not bool(j0[a][b]):
                    continue
                if a >= b:
                    raise ValueError("J0 must be strictly upper triangular")
                if any(row[a] != row[b] for row in diag):
                    raise ValueError("J0 supported outside the equal-"
                                     "coordinate blocks (breaks [J0,H_i]=0)")

    def coord_key(self, j):
        # top-down value tuple of coordinate j, highest pole order first
        return tuple(self.diag[i][j] for i in range(self.k, -1, -1))

    def is_sorted(self):
        keys = [tuple((-x.re, -x.im) for x in self.coord_key(j))
                for j in range(self.n)]
        return all(a <= b for a, b in zip(keys, keys[1:]))


def zero_j0(n):
    return tuple(tuple(QI(0) for _ in range(n)) for _ in range(n))


def diagonal_form(diag, j0=None) -> CanonicalForm:
    """Build a form from diag[i] = H_i vectors (i ascending from 0)."""
    n = len(diag[0])
    k = len(diag) - 1
    return CanonicalForm(n, k, tuple(tuple(as_qi(x) for x in row) for row in diag),
                         zero_j0(n) if j0 is None else j0)


def sort_to_fundamental_domain(h: CanonicalForm) -> CanonicalForm:
    """Permute coordinates so the value tuples (h_k,...,h_0) descend
    lexicographically under Re-then-Im descending order; J0 is conjugated
    by the same permutation.  Stable, hence idempotent."""
    order = sorted(range(h.n),
                   key=lambda j: tuple((-x.re, -x.im) for x in h.coord_key(j)))
    diag = tuple(tuple(row[j] for j in order) for row in h.diag)
    j0 = tuple(tuple(h.j0[order[a]][order[b]] for b in range(h.n))
               for a in range(h.n))
    return CanonicalForm(h.n, h.k, diag, j0)


def _jordan_type(block):
    """Jordan partition of a nilpotent QI matrix given as list of lists."""
    m = len(block)
    if m == 0:
        return ()
    ranks = [m]
    power = [row[:] for row in block]
    while True:
        r = exact_rank(power)
        ranks.append(r)
        if r == 0:
            break
        power = [[sum((power[a][t] * block[t][b] for t in range(m)), QI(0))
                  for b in range(m)] for a in range(m)]
    # number of blocks of size >= s is ranks[s-1] - ranks[s]
    sizes = []
    for s in range(1, len(ranks)):
        count = (ranks[s - 1] - ranks[s]) - (ranks[s] - ranks[s + 1]
                                             if s + 1 < len(ranks) else 0)
        sizes.extend([s] * count)
    lam = tuple(sorted(sizes, reverse=True))
    if sum(lam) != m:
        raise AssertionError("jordan type bookkeeping failed")
    return lam


def _pi0_blocks(h: CanonicalForm):
    blocks = []
    start = 0
    for j in range(1, h.n + 1):
        if j == h.n or h.coord_key(j) != h.coord_key(start):
            blocks.append((start, j))
            start = j
    return blocks


def spectral_type_of(h: CanonicalForm) -> AbstractSpectralType:
    """Extract (Pi_k >= ... >= Pi_0 ; [J0]) from a sorted form."""
    if not h.is_sorted():
        raise ValueError("form must be sorted to the fundamental domain first")
    data = gl_root_data(h.n)
    levels = []
    for i in range(h.k, -1, -1):
        sub = frozenset(
            j for j in range(h.n - 1)
            if all(h.diag[m][j] == h.diag[m][j + 1] for m in range(i, h.k + 1)))
        levels.append(sub)
    nil = []
    for lo, hi in _pi0_blocks(h):
        block = [[h.j0[a][b] for b in range(lo, hi)] for a in range(lo, hi)]
        nil.append(_jordan_type(block))
    return AbstractSpectralType(data, tuple(levels), tuple(nil))


def _irr_blocks(h: CanonicalForm):
    """Blocks of equal (H_k,...,H_1) coordinate tuples (the L_1 blocks)."""
    if h.k == 0:
        return [(0, h.n)]
    blocks = []
    start = 0

    def key(j):
        return tuple(h.diag[i][j] for i in range(h.k, 0, -1))

    for j in range(1, h.n + 1):
        if j == h.n or key(j) != key(start):
            blocks.append((start, j))
            start = j
    return blocks


def is_nonresonant(h: CanonicalForm) -> bool:
    """No two residue exponents in one irregular block differ by a
    nonzero integer."""
    if not h.is_sorted():
        raise ValueError("form must be sorted to the fundamental domain first")
    for lo, hi in _irr_blocks(h):
        for a in range(lo, hi):
            for b in range(a + 1, hi):
                d = h.diag[0][a] - h.diag[0][b]
                if d.im == 0 and d.re.denominator == 1 and d.re != 0:
                    return False
    return True


def residue(h: CanonicalForm):
    """H_res = H_0 + J0 as an n x n nested tuple of QI."""
    return tuple(tuple(h.j0[a][b] + (h.diag[0][a] if a == b else QI(0))
                       for b in range(h.n)) for a in range(h.n))


# JSON ----------------------------------------------------------------

def form_to_json(h: CanonicalForm) -> dict:
    j0 = [[a, b, format_scalar(h.j0[a][b])]
          for a in range(h.n) for b in range(h.n) if bool(h.j0[a][b])]
    return {"n": h.n, "k": h.k,
            "H": [[format_scalar(x) for x in row] for row in h.diag],
            "J0": j0}


def form_from_json(d) -> CanonicalForm:
    if isinstance(d, str):
        d = json.loads(d)
    n, k = d["n"], d["k"]
    diag = tuple(tuple(parse_scalar(x) for x in row) for row in d["H"])
    j0 = [[QI(0)] * n for _ in range(n)]
    for a, b, s in d.get("J0", []):
        j0[a][b] = parse_scalar(s)
    return CanonicalForm(n, k, diag, tuple(tuple(r) for r in j0))
