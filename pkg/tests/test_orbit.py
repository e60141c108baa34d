"""Triangular chart on deformed truncated orbits and the moment map."""

import random

import numpy as np
import pytest

from unfolding.canonical import residue, spectral_type_of
from unfolding.exact import QI
from unfolding.laurent import TruncPoly, crt_split, total_residue
from unfolding.orbit import (decompose_fiber, dim_check, eval_orbit_point,
                             eval_orbit_point_series, exp_nilpotent,
                             factor_graded, log_unipotent, moment)
from unfolding.spectral import delta
from unfolding.strata import SetPartition, partitions, sample_stratum
from conftest import q, random_coords, random_form


def test_dim_check_on_worked_forms(heun_tri, gl4_tri):
    for h in (heun_tri, gl4_tri):
        count, d = dim_check(h)
        assert count == d
    assert dim_check(heun_tri)[1] == delta(spectral_type_of(heun_tri))


def test_dim_check_on_random_forms():
    rng = random.Random(9)
    for _ in range(40):
        h = random_form(rng)
        count, d = dim_check(h)
        assert count == d, h


def test_exp_log_inverse():
    rng = random.Random(10)
    c = tuple(q(rng.randint(-2, 2)) for _ in range(4))
    zero = tuple(tuple(QI(0) for _ in range(2)) for _ in range(2))
    low = tuple(tuple(q(rng.randint(-2, 2)) if a > b else QI(0)
                      for b in range(2)) for a in range(2))
    x = TruncPoly(c, (zero, low, low, zero))
    u = exp_nilpotent(x)
    back = log_unipotent(u)
    assert back.coeffs == x.coeffs


def test_factor_graded_reconstructs():
    from unfolding.laurent import mul_gamma
    rng = random.Random(11)
    c = (QI(0),) * 4
    zero = tuple(tuple(QI(0) for _ in range(2)) for _ in range(2))
    low = tuple(tuple(q(rng.randint(-2, 2)) if a > b else QI(0)
                      for b in range(2)) for a in range(2))
    up = tuple(tuple(q(rng.randint(-2, 2)) if a < b else QI(0)
                     for b in range(2)) for a in range(2))
    g = exp_nilpotent(TruncPoly(c, (zero, low, up, low)))
    factors = factor_graded(g)
    # rebuild e^{Z_3 z^3} e^{Z_2 z^2} e^{Z_1 z} and compare
    acc = None
    for m in range(3, 0, -1):
        e = exp_nilpotent(TruncPoly(c, tuple(
            factors[m - 1] if t == m else zero for t in range(4))))
        acc = e if acc is None else mul_gamma(acc, e)
    assert acc.coeffs == g.coeffs


def test_moment_trace_conservation(heun_tri, gl4_tri):
    rng = random.Random(12)
    for h in (heun_tri, gl4_tri):
        want = sum(complex(x) for x in h.diag[0])
        for _ in range(25):
            t = random_coords(h, rng)
            part = partitions(h.k)[rng.randrange(len(partitions(h.k)))]
            c = tuple(complex(x)
                      for x in sample_stratum(h, part, seed=rng.random()))
            mu = moment(t, h, c)
            assert abs(np.trace(mu) - want) <= 1e-12 * max(1.0, abs(want))


def test_c_zero_deformed_equals_undeformed_exact(heun_tri, gl4_tri):
    rng = random.Random(13)
    for h in (heun_tri, gl4_tri):
        for _ in range(5):
            t = random_coords(h, rng, exact=True)
            c = (QI(0),) * (h.k + 1)
            deformed = eval_orbit_point(t, h, c)
            series = eval_orbit_point_series(t, h)
            assert list(deformed.coeffs) == list(series)


def test_crt_moment_compatibility(heun_tri, gl4_tri):
    # total residue equals the sum of the per-pole residues after CRT
    rng = random.Random(14)
    for h in (heun_tri, gl4_tri):
        for _ in range(10):
            t = random_coords(h, rng)
            part = SetPartition.parse("0|1|2|3")
            ce = sample_stratum(h, part, seed=rng.random())
            c = tuple(complex(x) for x in ce)
            ev = eval_orbit_point(t, h, c)
            pieces = crt_split(ev, part)
            total = sum(p.coeffs[0] for p in pieces)
            scale = max(1.0, float(np.abs(total_residue(ev)).max()))
            assert np.abs(total - total_residue(ev)).max() <= 1e-10 * scale


def test_decompose_fiber_on_all_strata(heun_tri, gl4_tri):
    rng = random.Random(15)
    for h in (heun_tri, gl4_tri):
        for part in partitions(h.k):
            t = random_coords(h, rng, exact=True)
            ce = sample_stratum(h, part, seed=17)
            rep = decompose_fiber(t, h, list(ce))
            assert rep.ok, (h.n, str(part), rep.poles)


def test_decompose_fiber_numeric_coords(heun_tri):
    rng = random.Random(16)
    t = random_coords(heun_tri, rng)
    ce = sample_stratum(heun_tri, SetPartition.parse("0|1|2,3"), seed=2)
    rep = decompose_fiber(t, heun_tri, list(ce))
    assert rep.ok
