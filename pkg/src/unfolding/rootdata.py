"""Root-system data, Levi dimensions, and type-A centralizer dimensions.

Roots are stored as integer coordinate vectors; membership of a root in
the integer span of a set of simple roots is decided by exact rational
linear algebra, so Levi dimensions carry no floating error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = ["RootSystemData", "gl_root_data", "levi_dim", "centralizer_dim",
           "subset_to_composition", "composition_to_subset",
           "zero_nilpotent_label", "validate_nilpotent_label"]


@dataclass(frozen=True)
class RootSystemData:
    """Roots and simple roots of a reductive group in coordinate form.

    cartan_dim: dim of the maximal torus t
    group_dim:  dim G = cartan_dim + #roots
    center_dim: dim of the center Z
    roots:      tuple of integer vectors
    simple:     indices into roots giving the simple system Pi
    """
    cartan_dim: int
    group_dim: int
    center_dim: int
    roots: tuple
    simple: tuple

    def __post_init__(self):
        rootset = {tuple(r) for r in self.roots}
        for r in self.roots:
            if tuple(-x for x in r) not in rootset:
                raise ValueError("root set not closed under negation")
        if self.group_dim != self.cartan_dim + len(self.roots):
            raise ValueError("group_dim must equal cartan_dim + #roots")

    @property
    def rank(self):
        return len(self.simple)

    def simple_root(self, i):
        return self.roots[self.simple[i]]

    def to_json(self):
        return {"cartan_dim": self.cartan_dim, "group_dim": self.group_dim,
                "center_dim": self.center_dim,
                "roots": [list(r) for r in self.roots],
                "simple": list(self.simple)}

    @staticmethod
    def from_json(d):
        return RootSystemData(d["cartan_dim"], d["group_dim"], d["center_dim"],
                              tuple(tuple(r) for r in d["roots"]),
                              tuple(d["simple"]))


@lru_cache(maxsize=None)
def gl_root_data(n: int) -> RootSystemData:
    """Root data of GL_n: roots e_i - e_j, simple roots e_i - e_{i+1}."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    roots = []
    index = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                v = [0] * n
                v[i], v[j] = 1, -1
                index[(i, j)] = len(roots)
                roots.append(tuple(v))
    simple = tuple(index[(i, i + 1)] for i in range(n - 1))
    return RootSystemData(n, n * n, 1, tuple(roots), simple)


# a SimpleSubset is a frozenset of positions into data.simple

def subset_to_composition(n: int, subset) -> tuple:
    """GL_n: simple-root subset -> ordered block sizes (composition of n)."""
    comp = []
    size = 1
    for i in range(n - 1):
        if i in subset:
            size += 1
        else:
            comp.append(size)
            size = 1
    comp.append(size)
    return tuple(comp)


def composition_to_subset(comp) -> frozenset:
    subset = set()
    pos = 0
    for size in comp[:-1]:
        pos += size
        subset.update(range(pos - size, pos - 1))
        # boundary simple root pos-1 excluded
    subset.update(range(pos, pos + comp[-1] - 1))
    return frozenset(subset)


def _in_integer_span(vec, basis):
    """Is vec an integer combination of the (independent) basis vectors?"""
    if not basis:
        return all(x == 0 for x in vec)
    m = len(basis)
    dim = len(vec)
    # least-squares-free exact solve: pick m independent coordinates
    rows = [[Fraction(basis[j][i]) for j in range(m)] for i in range(dim)]
    rhs = [Fraction(vec[i]) for i in range(dim)]
    # gaussian elimination on the dim x m system, consistency checked
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, dim) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rhs[r], rhs[piv] = rhs[piv], rhs[r]
        for i in range(dim):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                for cc in range(c, m):
                    rows[i][cc] -= f * rows[r][cc]
                rhs[i] -= f * rhs[r]
        pivots.append((r, c))
        r += 1
    sol = [Fraction(0)] * m
    for rr, cc in pivots:
        sol[cc] = rhs[rr] / rows[rr][cc]
    # rows below the pivot rows must be consistent
    for i in range(r, dim):
        if rhs[i] != 0:
            return False
    return all(s.denominator == 1 for s in sol)


def levi_dim(data: RootSystemData, subset) -> int:
    """dim of the Levi subalgebra generated by the simple subset.

    Counts roots in the integer span of the chosen simple roots and adds
    the Cartan dimension.
    """
    return _levi_dim_cached(data, frozenset(subset))


@lru_cache(maxsize=None)
def _levi_dim_cached(data: RootSystemData, subset) -> int:
    for i in subset:
        if not 0 <= i < len(data.simple):
            raise IndexError(f"simple-root index {i} out of range")
    basis = [data.simple_root(i) for i in sorted(subset)]
    count = sum(1 for rt in data.roots if _in_integer_span(rt, basis))
    return data.cartan_dim + count


def zero_nilpotent_label(comp) -> tuple:
    """All-ones partitions: the zero orbit on each block."""
    return tuple(tuple(1 for _ in range(b)) for b in comp)


def validate_nilpotent_label(comp, label):
    if len(label) != len(comp):
        raise ValueError("one partition per composition block required")
    for b, lam in zip(comp, label):
        if sorted(lam, reverse=True) != list(lam) or sum(lam) != b:
            raise ValueError(f"partition {lam} incompatible with block {b}")


def _conjugate_partition(lam):
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > i) for i in range(max(lam)))


def centralizer_dim(data: RootSystemData, levi0, j) -> int:
    """dim of the centralizer of a nilpotent with Jordan type j inside the
    block-diagonal Levi given by the composition levi0 (type A only)."""
    validate_nilpotent_label(levi0, j)
    total = 0
    for lam in j:
        total += sum(p * p for p in _conjugate_partition(lam))
    return total
