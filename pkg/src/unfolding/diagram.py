"""Unfolding diagrams of spectral collections and their reductions.

The full diagram is the Hasse diagram of a product of set-partition
lattices, one factor per singular point, each vertex labelled with the
unfolded collection; the reduced diagram identifies vertices whose
canonicalized labels agree and keeps the covering relations of the
induced order.  Edges are oriented finer -> coarser so the picture reads
as confluence.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .spectral import (SpectralCollection, canonicalize, unfold_spectral)
from .strata import SetPartition, partitions, refines

__all__ = ["UnfoldingDiagram", "ReducedDiagram", "unfolding_diagram",
           "reduced_diagram", "to_dot", "DiagramTooLarge"]


class DiagramTooLarge(Exception):
    pass


@dataclass(frozen=True)
class UnfoldingDiagram:
    vertices: tuple      # tuples of SetPartition, one per point
    labels: tuple        # attached SpectralCollection per vertex
    edges: tuple         # (i, j) index pairs, finer -> coarser covers


@dataclass(frozen=True)
class ReducedDiagram:
    labels: tuple        # canonicalized SpectralCollection per class
    edges: tuple         # covering relations of the induced order
    members: tuple       # tuple of vertex-index tuples per class


def _covers(i: SetPartition, j: SetPartition) -> bool:
    # j covers i in refinement order iff j merges exactly two blocks of i
    return len(j.blocks) == len(i.blocks) - 1 and refines(i, j)


def _attach(c: SpectralCollection, vertex):
    types = []
    for s, part in zip(c.types, vertex):
        types.extend(unfold_spectral(s, part).types)
    return SpectralCollection(tuple(types))


def unfolding_diagram(c: SpectralCollection, max_vertices=20000):
    """Labelled Hasse diagram of the product refinement order."""
    factors = [partitions(s.k) for s in c.types]
    count = 1
    for f in factors:
        count *= len(f)
    if count > max_vertices:
        raise DiagramTooLarge(f"{count} vertices exceed cap {max_vertices}")
    vertices = tuple(product(*factors))
    labels = tuple(_attach(c, v) for v in vertices)
    index = {v: i for i, v in enumerate(vertices)}
    edges = []
    for i, v in enumerate(vertices):
        for pos in range(len(v)):
            for cand in factors[pos]:
                if _covers(v[pos], cand):
                    w = v[:pos] + (cand,) + v[pos + 1:]
                    edges.append((i, index[w]))
    return UnfoldingDiagram(vertices, labels, tuple(sorted(edges)))


def _transitive_reduction(nodes, edges):
    reach = {a: set() for a in nodes}
    adj = {a: set() for a in nodes}
    for a, b in edges:
        adj[a].add(b)
    # closure by repeated expansion (small graphs)
    def dfs(a, seen):
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                dfs(b, seen)
    for a in nodes:
        dfs(a, reach[a])
    reduced = []
    for a in nodes:
        for b in adj[a]:
            if not any(b in reach[m] for m in adj[a] if m != b):
                reduced.append((a, b))
    return sorted(reduced)


def reduced_diagram(c: SpectralCollection, max_vertices=20000):
    """Quotient the full diagram by equality of canonicalized labels."""
    full = unfolding_diagram(c, max_vertices)
    keys = [tuple(t.sort_key() for t in canonicalize(l).types)
            for l in full.labels]
    classes = {}
    for i, key in enumerate(keys):
        classes.setdefault(key, []).append(i)
    # stable class order: by decreasing number of points, then label key
    order = sorted(classes, key=lambda key: (-len(key), key))
    class_of = {}
    for ci, key in enumerate(order):
        for i in classes[key]:
            class_of[i] = ci
    nodes = list(range(len(order)))
    raw = {(class_of[a], class_of[b]) for a, b in full.edges
           if class_of[a] != class_of[b]}
    edges = _transitive_reduction(nodes, raw)
    labels = tuple(canonicalize(full.labels[classes[key][0]]) for key in order)
    members = tuple(tuple(classes[key]) for key in order)
    return ReducedDiagram(labels, tuple(edges), members)


def _kns_label(col: SpectralCollection) -> str:
    from .cli import pretty_kns
    return ",".join(pretty_kns(t) for t in col.types)


def to_dot(diagram) -> str:
    """Deterministic DOT output with compact nesting-notation labels."""
    if isinstance(diagram, UnfoldingDiagram):
        labels = [_kns_label(l) for l in diagram.labels]
        edges = diagram.edges
    else:
        labels = [_kns_label(l) for l in diagram.labels]
        edges = diagram.edges
    lines = ["digraph unfolding {", "  rankdir=LR;"]
    for i, lab in enumerate(labels):
        lines.append(f'  v{i} [label="{lab}"];')
    for a, b in edges:
        lines.append(f"  v{a} -> v{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
