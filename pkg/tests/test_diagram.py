"""Unfolding diagrams, reductions, and DOT output."""

import pytest

from unfolding.cli import parse_kns, pretty_collection
from unfolding.diagram import (DiagramTooLarge, reduced_diagram, to_dot,
                               unfolding_diagram)

HEUN_EDGES = ((0, 1), (1, 2), (1, 3), (2, 4), (3, 4))
GL4_EDGES = ((0, 1), (0, 2), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5),
             (3, 6), (4, 6), (5, 6))


def test_full_heun_diagram_is_partition_lattice():
    col = parse_kns("(((1)))(((1)))", 2)
    dia = unfolding_diagram(col)
    assert len(dia.vertices) == 15          # Bell(4)
    # finest vertex is labelled by four simple poles
    finest = min(range(15), key=lambda i: -len(dia.vertices[i][0].blocks))
    assert all(t.k == 0 for t in dia.labels[finest].types)


def test_reduced_heun_diagram():
    dia = reduced_diagram(parse_kns("(((1)))(((1)))", 2))
    assert len(dia.labels) == 5
    assert dia.edges == HEUN_EDGES
    labels = [pretty_collection(l) for l in dia.labels]
    assert labels[0] == "11,11,11,11"
    assert labels[-1] == "(((1)))(((1)))"


def test_reduced_gl4_diagram():
    dia = reduced_diagram(parse_kns("(((2)))(((11)))", 4))
    assert len(dia.labels) == 7
    assert dia.edges == GL4_EDGES
    labels = [pretty_collection(l) for l in dia.labels]
    assert sorted(labels[0].split(",")) == ["211", "22", "22", "22"]
    assert labels[-1] == "(((2)))(((11)))"


def test_reduced_classes_cover_all_vertices():
    dia = reduced_diagram(parse_kns("(((1)))(((1)))", 2))
    covered = sorted(i for cls in dia.members for i in cls)
    assert covered == list(range(15))


def test_to_dot_structure():
    dia = reduced_diagram(parse_kns("(((1)))(((1)))", 2))
    dot = to_dot(dia)
    assert dot.startswith("digraph unfolding {")
    assert dot.count(" -> ") == 5
    assert '[label="11,11,11,11"]' in dot
    # deterministic
    assert dot == to_dot(reduced_diagram(parse_kns("(((1)))(((1)))", 2)))


def test_vertex_cap():
    with pytest.raises(DiagramTooLarge):
        unfolding_diagram(parse_kns("(((1)))(((1)))", 2), max_vertices=3)


def test_multi_point_diagram():
    # two singular points: product of partition lattices
    col = parse_kns("(1)(1),(1)(1)", 2)
    dia = unfolding_diagram(col)
    assert len(dia.vertices) == 4           # Bell(2)^2
    red = reduced_diagram(col)
    assert len(red.labels) == 3             # middle vertices merge
