"""Abstract spectral types and their invariants.

A spectral type is a non-strictly nested chain of simple-root subsets
Pi_k >= ... >= Pi_0 together with a nilpotent-orbit label on the Pi_0
blocks.  Irregularity, delta, rigidity and moduli dimension are the
integer invariants computed here; unfold_spectral splits a type along a
set partition of its levels.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rootdata import (RootSystemData, levi_dim, centralizer_dim,
                       subset_to_composition, zero_nilpotent_label,
                       validate_nilpotent_label)

__all__ = ["AbstractSpectralType", "SpectralCollection", "irregularity",
           "delta", "rigidity", "moduli_dim", "unfold_spectral",
           "canonicalize", "weyl_key"]


@dataclass(frozen=True)
class AbstractSpectralType:
    """(Pi_k >= ... >= Pi_0 ; [J0]) over a fixed root datum.

    levels lists the subsets top-down: levels[0] = Pi_k, levels[-1] = Pi_0.
    nilpotent is one partition per Pi_0 block (GL_n composition order);
    repeated equal subsets are allowed.
    """
    data: RootSystemData
    levels: tuple          # tuple of frozensets of simple indices
    nilpotent: tuple       # tuple of partitions (tuples of ints)

    def __post_init__(self):
        object.__setattr__(self, "levels",
                           tuple(frozenset(s) for s in self.levels))
        object.__setattr__(self, "nilpotent",
                           tuple(tuple(p) for p in self.nilpotent))
        if not self.levels:
            raise ValueError("at least the residue level Pi_0 is required")
        for upper, lower in zip(self.levels, self.levels[1:]):
            if not lower <= upper:
                raise ValueError("levels must be nested Pi_i <= Pi_{i+1}")
        n = self.data.cartan_dim
        comp = subset_to_composition(n, self.levels[-1])
        validate_nilpotent_label(comp, self.nilpotent)

    @property
    def k(self):
        return len(self.levels) - 1

    @property
    def pi0(self):
        return self.levels[-1]

    def sort_key(self):
        masks = tuple(sum(1 << i for i in s) for s in self.levels)
        return (self.k, masks, self.nilpotent)

    def to_json(self):
        return {"levels": [sorted(s) for s in self.levels],
                "nilpotent": [list(p) for p in self.nilpotent],
                "n": self.data.cartan_dim}

    def pretty(self):
        body = " > ".join("{" + ",".join(f"a{i+1}" for i in sorted(s)) + "}"
                          if s else "0" for s in self.levels)
        nil = ",".join("".join(map(str, p)) for p in self.nilpotent)
        return f"({body};[{nil}])"


@dataclass(frozen=True)
class SpectralCollection:
    """One spectral type per singular point, over one root datum."""
    types: tuple

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if self.types:
            data = self.types[0].data
            for t in self.types:
                if t.data != data:
                    raise ValueError("collection must share one root datum")

    @property
    def data(self):
        if not self.types:
            raise ValueError("empty collection")
        return self.types[0].data

    def to_json(self):
        return [t.to_json() for t in self.types]


def irregularity(s: AbstractSpectralType) -> int:
    """Irr = sum over levels i=1..k of (dim G - dim L_i)."""
    g = s.data.group_dim
    return sum(g - levi_dim(s.data, lev) for lev in s.levels[:-1])


def _stab_dim(s: AbstractSpectralType) -> int:
    comp = subset_to_composition(s.data.cartan_dim, s.pi0)
    if s.nilpotent == zero_nilpotent_label(comp):
        return levi_dim(s.data, s.pi0)
    return centralizer_dim(s.data, comp, s.nilpotent)


def delta(s: AbstractSpectralType) -> int:
    """delta = dim G + Irr - dim Stab_G(H)."""
    return s.data.group_dim + irregularity(s) - _stab_dim(s)


def rigidity(c: SpectralCollection) -> int:
    """Index of rigidity 2 dim G - sum of deltas."""
    return 2 * c.data.group_dim - sum(delta(t) for t in c.types)


def moduli_dim(c: SpectralCollection) -> int:
    """Dimension 2 dim Z - rig of the moduli space of connections."""
    return 2 * c.data.center_dim - rigidity(c)


def unfold_spectral(s: AbstractSpectralType, partition) -> SpectralCollection:
    """Split s along a set partition of its level indices {0..k}.

    The block containing 0 keeps the nilpotent label and bottom level
    Pi_0; every other block gets the zero label on its own bottom level.
    Blocks are emitted in the partition's order (0-block first).
    """
    ground = set()
    for block in partition.blocks:
        ground.update(block)
    if ground != set(range(s.k + 1)):
        raise ValueError("partition must cover the level indices 0..k")
    out = []
    for block in partition.blocks:
        idx = sorted(block, reverse=True)          # i_[j,kj] > ... > i_[j,0]
        levels = tuple(s.levels[s.k - i] for i in idx)
        if 0 in block:
            nil = s.nilpotent
        else:
            comp = subset_to_composition(s.data.cartan_dim, levels[-1])
            nil = zero_nilpotent_label(comp)
        out.append(AbstractSpectralType(s.data, levels, nil))
    return SpectralCollection(tuple(out))


def canonicalize(c: SpectralCollection) -> SpectralCollection:
    """Sort the entries under a fixed total order; idempotent."""
    return SpectralCollection(tuple(sorted(c.types, key=lambda t: t.sort_key())))


def _blocks_of(comp):
    out = []
    pos = 0
    for size in comp:
        out.append((pos, pos + size))
        pos += size
    return out


def weyl_key(s: AbstractSpectralType):
    """Canonical key of a GL_n type up to simultaneous relabeling.

    Two canonical forms conjugate by a coordinate permutation have
    W-equivalent types; the invariant content is the nesting tree of
    composition blocks with nilpotent partitions at the leaves.  The key
    is that tree with children recursively sorted.
    """
    n = s.data.cartan_dim
    comps = [subset_to_composition(n, lev) for lev in s.levels]
    leaf_blocks = _blocks_of(comps[-1])

    def build(level, lo, hi):
        if level == len(comps) - 1:
            idx = leaf_blocks.index((lo, hi))
            return ("leaf", hi - lo, s.nilpotent[idx])
        children = [build(level + 1, a, b)
                    for a, b in _blocks_of(comps[level + 1]) if lo <= a and b <= hi]
        return ("node", tuple(sorted(children)))

    top = sorted(build(0, a, b) for a, b in _blocks_of(comps[0]))
    return (s.k, tuple(top))
