"""Strata, partial fractions, and the spectral decomposition."""

import random

import pytest

from unfolding.canonical import residue, spectral_type_of
from unfolding.cli import parse_kns
from unfolding.exact import QI
from unfolding.spectral import weyl_key
from unfolding.strata import (SetPartition, delta_sum_check, in_BH,
                              partial_fractions, partitions, refines,
                              sample_stratum, stratum_of,
                              verify_spectral_decomposition)
from conftest import q, random_form


def test_partition_counts_are_bell_numbers():
    assert [len(partitions(k)) for k in range(5)] == [1, 2, 5, 15, 52]


def test_partition_parse_and_str():
    p = SetPartition.parse("0,2|1|3")
    assert str(p) == "0,2|1|3"
    assert p.blocks == ((0, 2), (1,), (3,))


def test_refines():
    fine = SetPartition.parse("0|1|2|3")
    mid = SetPartition.parse("0,1|2,3")
    coarse = SetPartition.parse("0,1,2,3")
    assert refines(fine, mid) and refines(mid, coarse)
    assert not refines(mid, SetPartition.parse("0,2|1,3"))


def test_stratum_of():
    c = (q(1), q(2), q(1), q(3))
    assert stratum_of(c) == SetPartition.parse("0,2|1|3")


def test_sample_stratum_lands_on_stratum_and_in_BH(heun_tri, gl4_tri):
    for h in (heun_tri, gl4_tri):
        for part in partitions(h.k):
            c = sample_stratum(h, part, seed=3)
            assert stratum_of(c) == part
            assert in_BH(h, c)


def test_partial_fractions_conserves_residue_trace(gl4_tri):
    # pieces come back sorted (coordinates permuted per piece), so the
    # conserved quantity is the trace of the total residue
    c = sample_stratum(gl4_tri, SetPartition.parse("0|1,2|3"), seed=1)
    dec = partial_fractions(gl4_tri, c)
    total = dec.residue_sum()
    tr = sum((total[a][a] for a in range(4)), QI(0))
    want = sum((residue(gl4_tri)[a][a] for a in range(4)), QI(0))
    assert tr == want


def test_partial_fractions_pole_orders(heun_tri):
    c = sample_stratum(heun_tri, SetPartition.parse("0,1|2,3"), seed=1)
    dec = partial_fractions(heun_tri, c)
    assert sorted(piece.k + 1 for _, piece in dec.pieces) == [2, 2]


def test_verify_spectral_decomposition_worked_forms(heun_tri, gl4_tri):
    for h in (heun_tri, gl4_tri):
        for part in partitions(h.k):
            c = sample_stratum(h, part, seed=7)
            verify_spectral_decomposition(h, c)
            s, d0 = delta_sum_check(h, c)
            assert s == d0


def test_worked_example_stratum_types(heun_tri, gl4_tri):
    """The listed strata of the two worked forms reproduce exactly the
    confluent-family spectral collections."""
    cases = {
        heun_tri: {
            "0,1,2,3": "(((1)))(((1)))",
            "0|1,2,3": "11,((1))((1))",
            "0,1|2,3": "(1)(1),(1)(1)",
            "0|1|2,3": "11,11,(1)(1)",
            "0|1|2|3": "11,11,11,11",
        },
        gl4_tri: {
            "0,1,2,3": "(((2)))(((11)))",
            "0|1,2,3": "((2))((2)),211",
            "0,1,2|3": "22,((2))((11))",
            "0,1|2,3": "(2)(2),(2)(11)",
            "0|1|2,3": "(2)(2),22,211",
            "0,1|2|3": "22,22,(2)(11)",
            "0|1|2|3": "22,22,22,211",
        },
    }
    for h, strata in cases.items():
        for part_s, kns in strata.items():
            part = SetPartition.parse(part_s)
            c = sample_stratum(h, part, seed=11)
            dec = partial_fractions(h, c)
            got = sorted(weyl_key(spectral_type_of(p)) for _, p in dec.pieces)
            want = sorted(weyl_key(t) for t in parse_kns(kns, h.n).types)
            assert got == want, (part_s, kns)


def test_sibling_strata_same_collections(gl4_tri):
    """Partitions of the same shape containing 0 in the same-size block
    give the same collections."""
    for a, b in [("0,1,2|3", "0,1,3|2"),
                 ("0,1|2,3", "0,2|1,3"),
                 ("0,1|2|3", "0,2|1|3")]:
        ca = sample_stratum(gl4_tri, SetPartition.parse(a), seed=5)
        cb = sample_stratum(gl4_tri, SetPartition.parse(b), seed=6)
        ka = sorted(weyl_key(spectral_type_of(p))
                    for _, p in partial_fractions(gl4_tri, ca).pieces)
        kb = sorted(weyl_key(spectral_type_of(p))
                    for _, p in partial_fractions(gl4_tri, cb).pieces)
        assert ka == kb, (a, b)


def test_randomized_decomposition_suite_small():
    rng = random.Random(20)
    for trial in range(20):
        h = random_form(rng, nmax=3, kmax=3)
        for part in partitions(h.k):
            c = sample_stratum(h, part, seed=trial)
            verify_spectral_decomposition(h, c)
            s, d0 = delta_sum_check(h, c)
            assert s == d0


def test_in_BH_rejects_bad_points(heun_tri):
    # c with c_0 = c_1 = 0 but c in the "distinct" pattern collapses a
    # hyperplane for this form when the top difference cancels
    assert in_BH(heun_tri, (q(0), q(0), q(0), q(0)))
    # sampled finest-stratum points always pass
    c = sample_stratum(heun_tri, SetPartition.parse("0|1|2|3"), seed=0)
    assert in_BH(heun_tri, c)
