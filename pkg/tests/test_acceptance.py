"""End-to-end acceptance checks for the whole package.

Each test pins one externally meaningful guarantee: exact invariants of
the two confluent families, diagram reproduction, the unfolding
decomposition on random forms, the worked-example strata, the Laurent
kernel, the orbit chart, and desk-scale Deligne-Simpson solving with
continuation.
"""

import random
import time

import numpy as np
import pytest

from unfolding.canonical import spectral_type_of
from unfolding.cli import parse_kns, pretty_collection
from unfolding.dsp import DSPInstance, continue_family, is_irreducible, \
    solve_dsp
from unfolding.diagram import reduced_diagram
from unfolding.exact import QI
from unfolding.laurent import PrincipalPart, TruncPoly, act, crt_join, \
    crt_split, pairing, total_residue
from unfolding.orbit import dim_check, eval_orbit_point, \
    eval_orbit_point_series, moment
from unfolding.spectral import SpectralCollection, moduli_dim, rigidity, \
    unfold_spectral, weyl_key
from unfolding.strata import SetPartition, delta_sum_check, \
    partial_fractions, partitions, sample_stratum, stratum_of, \
    verify_spectral_decomposition
from conftest import q, random_coords, random_form

HEUN_FAMILY = ["11,11,11,11", "11,11,(1)(1)", "(1)(1),(1)(1)",
               "11,((1))((1))", "(((1)))(((1)))"]
GL4_FAMILY = ["22,22,22,211", "(2)(2),22,211", "22,22,(2)(11)",
              "(2)(2),(2)(11)", "((2))((2)),211", "22,((2))((11))",
              "(((2)))(((11)))"]


def test_criterion_1_rigidity_reproduction():
    start = time.monotonic()
    for s in HEUN_FAMILY:
        assert rigidity(parse_kns(s, 2)) == 0, s
    for s in GL4_FAMILY:
        assert rigidity(parse_kns(s, 4)) == -2, s
    assert time.monotonic() - start < 1.0


def test_criterion_2_moduli_dimensions():
    for s in HEUN_FAMILY:
        assert moduli_dim(parse_kns(s, 2)) == 2, s
    for s in GL4_FAMILY:
        assert moduli_dim(parse_kns(s, 4)) == 4, s


def test_criterion_3_diagram_reproduction():
    start = time.monotonic()
    heun = reduced_diagram(parse_kns("(((1)))(((1)))", 2))
    assert len(heun.labels) == 5 and len(heun.edges) == 5
    assert heun.edges == ((0, 1), (1, 2), (1, 3), (2, 4), (3, 4))
    labels = [pretty_collection(l) for l in heun.labels]
    assert labels == ["11,11,11,11", "11,11,(1)(1)", "11,((1))((1))",
                      "(1)(1),(1)(1)", "(((1)))(((1)))"]
    gl4 = reduced_diagram(parse_kns("(((2)))(((11)))", 4))
    assert len(gl4.labels) == 7 and len(gl4.edges) == 10
    assert gl4.edges == ((0, 1), (0, 2), (1, 3), (1, 4), (1, 5), (2, 4),
                         (2, 5), (3, 6), (4, 6), (5, 6))
    got = [sorted(pretty_collection(l).split(",")) for l in gl4.labels]
    want = [sorted(s.split(",")) for s in GL4_FAMILY]
    assert sorted(map(tuple, got)) == sorted(map(tuple, want))
    assert time.monotonic() - start < 1.0


def test_criterion_4_unfolding_decomposition_suite():
    start = time.monotonic()
    rng = random.Random(2026)
    for trial in range(200):
        h = random_form(rng, nmax=4, kmax=4)
        t = spectral_type_of(h)
        rig = rigidity(SpectralCollection((t,)))
        for part in partitions(h.k):
            c = sample_stratum(h, part, seed=trial)
            col = verify_spectral_decomposition(h, c)
            s, d0 = delta_sum_check(h, c)
            assert s == d0
            assert rigidity(col) == rig
    assert time.monotonic() - start < 60.0


def test_criterion_5_worked_example_strata(heun_tri, gl4_tri):
    cases = [
        (heun_tri, "0,1,2,3", "(((1)))(((1)))"),
        (heun_tri, "0|1,2,3", "11,((1))((1))"),
        (heun_tri, "0,1|2,3", "(1)(1),(1)(1)"),
        (heun_tri, "0|1|2,3", "11,11,(1)(1)"),
        (heun_tri, "0|1|2|3", "11,11,11,11"),
        (gl4_tri, "0,1,2,3", "(((2)))(((11)))"),
        (gl4_tri, "0|1,2,3", "((2))((2)),211"),
        (gl4_tri, "0,1,2|3", "22,((2))((11))"),
        (gl4_tri, "0,1|2,3", "(2)(2),(2)(11)"),
        (gl4_tri, "0|1|2,3", "(2)(2),22,211"),
        (gl4_tri, "0,1|2|3", "22,22,(2)(11)"),
        (gl4_tri, "0|1|2|3", "22,22,22,211"),
    ]
    for h, part_s, kns in cases:
        part = SetPartition.parse(part_s)
        c = sample_stratum(h, part, seed=23)
        dec = partial_fractions(h, c)
        got = sorted(weyl_key(spectral_type_of(p)) for _, p in dec.pieces)
        want = sorted(weyl_key(t) for t in parse_kns(kns, h.n).types)
        assert got == want, (part_s, kns)


def _rand_c(rng, l, distinct=False):
    vals = []
    while len(vals) < l + 1:
        v = q(rng.randint(-5, 5), rng.randint(1, 4))
        if not distinct or v not in vals:
            vals.append(v)
    return tuple(vals)


def test_criterion_6_laurent_kernel():
    rng = random.Random(6)
    # dual-basis identity for l <= 6 over 50 random parameter vectors
    checked = 0
    while checked < 50:
        l = checked % 7
        c = _rand_c(rng, l)
        for m in range(l + 1):
            row = [pairing(
                TruncPoly(c, tuple(QI(1) if i == m else QI(0)
                                   for i in range(l + 1))),
                PrincipalPart(c, tuple(QI(1) if i == t else QI(0)
                                       for i in range(l + 1))))
                for t in range(l + 1)]
            assert row == [QI(1) if t == m else QI(0)
                           for t in range(l + 1)]
        checked += 1
    # residue formula on distinct points
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
            b_m = PrincipalPart(c, tuple(QI(1) if i == m else QI(0)
                                         for i in range(l + 1)))
            assert total_residue(b_m) == total
    # CRT round-trip and action/CRT commutativity on 100 random inputs
    for _ in range(100):
        l = rng.randint(1, 5)
        c = tuple(q(rng.randint(-2, 2)) for _ in range(l + 1))
        part = stratum_of(c)
        xi = PrincipalPart(c, tuple(q(rng.randint(-4, 4), rng.randint(1, 3))
                                    for _ in range(l + 1)))
        assert crt_join(crt_split(xi, part), part, c).coeffs == xi.coeffs
        f = TruncPoly(c, tuple(q(rng.randint(-3, 3)) for _ in range(l + 1)))
        whole = crt_split(act(f, xi), part)
        for w, fj, xj in zip(whole, crt_split(f, part),
                             crt_split(xi, part)):
            assert act(fj, xj).coeffs == w.coeffs


def test_criterion_7_orbit_chart(heun_tri, gl4_tri):
    rng = random.Random(7)
    forms = [heun_tri, gl4_tri] + [random_form(rng) for _ in range(30)]
    for h in forms:
        count, d = dim_check(h)
        assert count == d
    # moment trace conservation over 1000 samples
    samples = 0
    while samples < 1000:
        h = (heun_tri, gl4_tri)[samples % 2]
        t = random_coords(h, rng)
        parts = partitions(h.k)
        part = parts[rng.randrange(len(parts))]
        c = tuple(complex(x)
                  for x in sample_stratum(h, part, seed=rng.random()))
        mu = moment(t, h, c)
        want = sum(complex(x) for x in h.diag[0])
        assert abs(np.trace(mu) - want) <= 1e-12 * max(1.0, abs(want))
        samples += 1
    # c = 0: deformed evaluation equals the independent series evaluation
    for h in (heun_tri, gl4_tri):
        for _ in range(3):
            t = random_coords(h, rng, exact=True)
            deformed = eval_orbit_point(t, h, (QI(0),) * (h.k + 1))
            assert list(deformed.coeffs) == list(eval_orbit_point_series(t, h))
    # CRT moment compatibility on distinct-point strata
    for h in (heun_tri, gl4_tri):
        for trial in range(10):
            t = random_coords(h, rng)
            part = SetPartition.parse("0|1|2|3")
            c = tuple(complex(x)
                      for x in sample_stratum(h, part, seed=trial))
            ev = eval_orbit_point(t, h, c)
            total = sum(p.coeffs[0] for p in crt_split(ev, part))
            scale = max(1.0, float(np.abs(total_residue(ev)).max()))
            assert np.abs(total - total_residue(ev)).max() <= 1e-10 * scale


def test_criterion_8_dsp_desk_scale(heun_tri):
    start = time.monotonic()
    sol = solve_dsp(DSPInstance(((q(0), heun_tri),), seed=1))
    assert sol.residual < 1e-10
    assert is_irreducible(sol.connection.all_matrices())
    assert time.monotonic() - start < 30.0

    target = (q(0), q(4), q(3, 2), q(-2))
    fam = continue_family(sol, target, steps=16, eig_tol=1e-8)
    # per-step residual
    assert all(r < 1e-10 for _, r in fam.path)
    # 4-point Fuchsian endpoint
    assert len(fam.end_connection.points) == 4
    assert all(len(coeffs) == 1 for _, coeffs in fam.end_connection.points)
    rep = fam.end_report
    # residue eigenvalues match the target canonical forms to 1e-8
    assert rep["fibers_ok"]
    assert rep["eigenvalue_error"] <= 1e-8
    # endpoint spectral types equal the finest unfolding
    finest = SetPartition.parse("0|1|2|3")
    expected = unfold_spectral(spectral_type_of(heun_tri), finest)
    got = sorted(weyl_key(parse_kns(s, 2).types[0]) for s in rep["types"])
    assert got == sorted(weyl_key(t) for t in expected.types)
    assert rep["types_ok"] and rep["rigidity_ok"]
