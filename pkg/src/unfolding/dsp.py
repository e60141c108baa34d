"""Additive Deligne-Simpson solving and continuation at desk scale.

An instance prescribes one canonical form per singular point of a
meromorphic connection on the line.  Solving finds triangular
coordinates on each truncated orbit whose total moment (the sum of
residues) vanishes, so that the assembled connection is regular at
infinity; irreducibility is certified by a Burnside span closure.
Continuation then transports a solution along a straight path in the
unfolding parameters, splitting poles while keeping the moment at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .exact import QI, as_qi, exact_rank, format_scalar, parse_scalar
from .canonical import (CanonicalForm, form_from_json, form_to_json, residue,
                        spectral_type_of)
from .laurent import cmatmul, crt_split
from .orbit import (NilpotentElem, TriangularCoords, UPart, decompose_fiber,
                    eval_orbit_point, level_blocks, lower_mask, moment,
                    principal_invariants)
from .spectral import SpectralCollection, rigidity, unfold_spectral, weyl_key
from .strata import in_BH, partial_fractions, stratum_of

__all__ = ["ConnectionOnP1", "DSPInstance", "DSPSolution",
           "ContinuationFamily", "FuchsViolation", "NoConvergence",
           "ReducibleSolution", "PathLeftBH", "fuchs_check", "is_irreducible",
           "solve_dsp", "continue_family", "verify_solution",
           "instance_to_json", "instance_from_json", "solution_to_json",
           "solution_from_json", "family_to_json", "coords_to_json",
           "coords_from_json"]


class FuchsViolation(Exception):
    pass


class NoConvergence(Exception):
    def __init__(self, iterations, best_residual, step=None):
        self.iterations = iterations
        self.best_residual = best_residual
        self.step = step
        at = f" at step {step}" if step is not None else ""
        super().__init__(f"best residual {best_residual:.3e} after "
                         f"{iterations} iterations{at}")


class ReducibleSolution(Exception):
    pass


class PathLeftBH(Exception):
    def __init__(self, step, point):
        self.step = step
        self.point = point
        super().__init__(f"step {step} leaves B_H at point {point}")


# ---------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class ConnectionOnP1:
    """Poles with their principal-part coefficients; coeffs ascending,
    index 0 the residue."""
    points: tuple    # ((position complex, coeffs tuple of ndarrays), ...)

    def residue_sum(self):
        return sum(coeffs[0] for _, coeffs in self.points)

    def all_matrices(self):
        return [m for _, coeffs in self.points for m in coeffs]


@dataclass(frozen=True)
class DSPInstance:
    points: tuple            # ((base QI, CanonicalForm), ...)
    tol: float = 1e-10
    seed: int = 0
    restarts: int = 12
    max_iter: int = 200

    def __post_init__(self):
        bases = [b for b, _ in self.points]
        if len({(b.re, b.im) for b in bases}) != len(bases):
            raise ValueError("base points must be distinct")
        ns = {h.n for _, h in self.points}
        if len(ns) != 1:
            raise ValueError("all forms must share the same rank")

    @property
    def n(self):
        return self.points[0][1].n

    def collection(self) -> SpectralCollection:
        return SpectralCollection(tuple(spectral_type_of(h)
                                        for _, h in self.points))


@dataclass(frozen=True)
class DSPSolution:
    instance: DSPInstance
    coords: tuple            # TriangularCoords per point, numeric
    connection: ConnectionOnP1
    residual: float


@dataclass(frozen=True)
class ContinuationFamily:
    solution: DSPSolution    # the c = 0 starting solution
    target: tuple            # exact scalars, concatenated per point
    steps: int
    path: tuple              # (c tuple, residual) per accepted step
    end_coords: tuple        # TriangularCoords per point at the target
    end_connection: ConnectionOnP1
    end_report: dict         # endpoint verification summary


# ---------------------------------------------------------------------
# residue condition and irreducibility

def fuchs_check(forms) -> bool:
    """Total trace of the residues vanishes exactly."""
    total = QI(0)
    for h in forms:
        r = residue(h)
        for a in range(h.n):
            total = total + r[a][a]
    return not bool(total)


def is_irreducible(mats, tol=1e-9) -> bool:
    """Burnside criterion: the unital algebra generated by the matrices
    has full dimension n^2, equivalently there is no common proper
    nonzero invariant subspace."""
    if not mats:
        raise ValueError("need at least one matrix")
    if isinstance(mats[0], tuple):
        return _is_irreducible_exact(mats)
    gens = [np.asarray(m, dtype=complex) for m in mats]
    n = gens[0].shape[0]
    basis = [np.eye(n, dtype=complex)] + gens
    rank = 0
    while True:
        stack = np.array([b.ravel() for b in basis])
        _, sv, vh = np.linalg.svd(stack, full_matrices=False)
        new_rank = int(np.sum(sv > tol * sv[0]))
        if new_rank == rank or new_rank == n * n:
            return new_rank == n * n
        rank = new_rank
        basis = [vh[i].reshape(n, n) for i in range(rank)]
        basis += [b @ g for b in basis[:rank] for g in gens]


def _is_irreducible_exact(mats):
    n = len(mats[0])
    eye = tuple(tuple(QI(1 if i == j else 0) for j in range(n))
                for i in range(n))
    basis = []
    rows = []

    def absorb(m):
        row = [m[i][j] for i in range(n) for j in range(n)]
        if exact_rank(rows + [row]) > len(rows):
            rows.append(row)
            basis.append(m)
            return True
        return False

    absorb(eye)
    for m in mats:
        absorb(m)
    frontier = list(basis)
    while frontier and len(rows) < n * n:
        fresh = []
        for b in frontier:
            for g in mats:
                p = cmatmul(b, g)
                if absorb(p):
                    fresh.append(p)
        frontier = fresh
    return len(rows) == n * n


# ---------------------------------------------------------------------
# chart packing: one complex vector per instance

def _chart_slots(h: CanonicalForm):
    """Deterministic list of (kind, ...) complex parameter slots."""
    slots = []
    n = h.n
    for a in range(n):
        for b in range(n):
            slots.append(("g", a, b))
    for lo, hi in level_blocks(h, 1):
        for a in range(lo, hi):
            for b in range(lo, hi):
                slots.append(("h", a, b))
    for l in range(1, h.k + 1):
        mask = sorted(lower_mask(h, l))
        for m in range(l):
            for a, b in mask:
                slots.append(("X", l, m, a, b))
        for m in range(l):
            for a, b in mask:
                slots.append(("nu", l, m, b, a))
    return slots


def _coords_from_vector(h: CanonicalForm, vec):
    n = h.n
    g = np.zeros((n, n), dtype=complex)
    hh = np.zeros((n, n), dtype=complex)
    xmats = {l: [np.zeros((n, n), dtype=complex) for _ in range(l)]
             for l in range(1, h.k + 1)}
    vmats = {l: [np.zeros((n, n), dtype=complex) for _ in range(l)]
             for l in range(1, h.k + 1)}
    used = {l: False for l in range(1, h.k + 1)}
    for val, slot in zip(vec, _chart_slots(h)):
        kind = slot[0]
        if kind == "g":
            g[slot[1], slot[2]] = val
        elif kind == "h":
            hh[slot[1], slot[2]] = val
        elif kind == "X":
            _, l, m, a, b = slot
            xmats[l][m][a, b] = val
            used[l] = True
        else:
            _, l, m, a, b = slot
            vmats[l][m][a, b] = val
            used[l] = True
    pairs = []
    for l in range(1, h.k + 1):
        if used[l]:
            pairs.append((NilpotentElem(l, tuple(xmats[l])),
                          UPart(l, tuple(vmats[l]))))
        else:
            pairs.append((None, None))
    return TriangularCoords(g, tuple(pairs), hh)


def _vector_from_coords(h: CanonicalForm, t: TriangularCoords):
    n = h.n
    g = np.asarray(t.g, dtype=complex)
    hh = (np.eye(n, dtype=complex) if t.h is None
          else np.asarray(t.h, dtype=complex))
    out = []
    for slot in _chart_slots(h):
        kind = slot[0]
        if kind == "g":
            out.append(g[slot[1], slot[2]])
        elif kind == "h":
            out.append(hh[slot[1], slot[2]])
        else:
            _, l, m, a, b = slot
            nl, nul = t.pairs[l - 1]
            src = nl if kind == "X" else nul
            if src is None:
                out.append(0j)
            else:
                out.append(complex(np.asarray(src.mats[m])[a, b]))
    return np.array(out, dtype=complex)


def _init_vector(h: CanonicalForm, rng, scale=0.4):
    vec = []
    for slot in _chart_slots(h):
        noise = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        base = 1.0 if slot[0] in ("g", "h") and slot[1] == slot[2] else 0.0
        vec.append(base + noise)
    return np.array(vec, dtype=complex)


# ---------------------------------------------------------------------
# Gauss-Newton on the total moment

def _total_moment(inst: DSPInstance, x, cs):
    n = inst.n
    total = np.zeros((n, n), dtype=complex)
    pos = 0
    for (base, h), c in zip(inst.points, cs):
        m = len(_chart_slots(h))
        t = _coords_from_vector(h, x[pos:pos + m])
        total = total + moment(t, h, c)
        pos += m
    return total.ravel()


def _gauss_newton(fun, x0, tol, max_iter):
    """Minimum-norm Gauss-Newton with backtracking line search on a
    holomorphic residual.  Returns (x, residual norm, iterations)."""
    x = np.array(x0, dtype=complex)
    r = fun(x)
    rn = np.linalg.norm(r)
    step = 1e-6
    it = 0
    while it < max_iter and rn >= tol:
        it += 1
        jac = np.empty((r.size, x.size), dtype=complex)
        for j in range(x.size):
            xp = x.copy()
            xm = x.copy()
            xp[j] += step
            xm[j] -= step
            jac[:, j] = (fun(xp) - fun(xm)) / (2 * step)
        d = -np.linalg.pinv(jac, rcond=1e-10) @ r
        alpha = 1.0
        accepted = False
        for _ in range(40):
            x2 = x + alpha * d
            r2 = fun(x2)
            rn2 = np.linalg.norm(r2)
            if rn2 < rn * (1 - 1e-4 * alpha):
                accepted = True
                break
            alpha /= 2
        if not accepted:
            break
        x, r, rn = x2, r2, rn2
    return x, rn, it


def _gauge_fix(inst: DSPInstance):
    """Mask of free coordinates and the pinned values of the frozen ones.

    The residue-sum equation is invariant under simultaneous conjugation
    of every point, and a near-singular leading g can shrink the total
    moment without moving the underlying orbit points, which strands the
    iteration near the chart boundary.  Freezing the first point's g
    removes that redundancy; any solution can be conjugated into this
    gauge, and irreducibility is conjugation-invariant."""
    free, fixed = [], []
    for idx, (_, h) in enumerate(inst.points):
        for slot in _chart_slots(h):
            frozen = idx == 0 and slot[0] == "g"
            free.append(not frozen)
            fixed.append(1 + 0j if frozen and slot[1] == slot[2] else 0j)
    return np.array(free, dtype=bool), np.array(fixed, dtype=complex)


# ---------------------------------------------------------------------
# solving

def _coords_list(inst: DSPInstance, x):
    out = []
    pos = 0
    for base, h in inst.points:
        m = len(_chart_slots(h))
        out.append(_coords_from_vector(h, x[pos:pos + m]))
        pos += m
    return tuple(out)


def _assemble_connection(inst: DSPInstance, coords, cs) -> ConnectionOnP1:
    points = []
    for (base, h), t, c in zip(inst.points, coords, cs):
        ev = eval_orbit_point(t, h, c)
        part = stratum_of(tuple(c))
        if len(part.blocks) == 1:
            points.append((complex(base) + complex(c[0]),
                           tuple(np.asarray(co) for co in ev.coeffs)))
        else:
            for piece in crt_split(ev, part):
                points.append((complex(base) + complex(piece.c[0]),
                               tuple(np.asarray(co) for co in piece.coeffs)))
    return ConnectionOnP1(tuple(points))


def solve_dsp(inst: DSPInstance) -> DSPSolution:
    """Find triangular coordinates with vanishing total moment and an
    irreducible assembled connection, from seeded random starts."""
    if not fuchs_check([h for _, h in inst.points]):
        raise FuchsViolation("total residue trace is nonzero")
    rng = np.random.default_rng(inst.seed)
    cs = [(0j,) * (h.k + 1) for _, h in inst.points]
    free, fixed = _gauge_fix(inst)

    def embed(y):
        full = fixed.copy()
        full[free] = y
        return full

    best = np.inf
    iterations = 0
    saw_reducible = False
    for attempt in range(inst.restarts):
        x0 = np.concatenate([_init_vector(h, rng) for _, h in inst.points])
        y, rn, it = _gauss_newton(lambda v: _total_moment(inst, embed(v), cs),
                                  x0[free], inst.tol, inst.max_iter)
        x = embed(y)
        iterations += it
        best = min(best, rn)
        if rn >= inst.tol:
            continue
        coords = _coords_list(inst, x)
        conn = _assemble_connection(inst, coords, cs)
        if not is_irreducible(conn.all_matrices()):
            saw_reducible = True
            continue
        return DSPSolution(inst, coords, conn, float(rn))
    if saw_reducible:
        raise ReducibleSolution("converged but reducible; restart advised")
    raise NoConvergence(iterations, best)


# ---------------------------------------------------------------------
# continuation

def _split_target(inst: DSPInstance, target):
    lengths = [h.k + 1 for _, h in inst.points]
    if len(target) != sum(lengths):
        raise ValueError(f"target must list {sum(lengths)} parameters")
    out = []
    pos = 0
    for m in lengths:
        out.append(tuple(as_qi(x) for x in target[pos:pos + m]))
        pos += m
    return out


def continue_family(sol: DSPSolution, target, steps=16,
                    eig_tol=1e-8) -> ContinuationFamily:
    """Predictor-corrector along the straight segment from c = 0 to the
    target, reusing the chart (only the moment depends on c); the
    endpoint is verified against the unfolded spectral types."""
    inst = sol.instance
    targets = _split_target(inst, target)
    x_full = np.concatenate([_vector_from_coords(h, t)
                             for (_, h), t in zip(inst.points, sol.coords)])
    free, _ = _gauge_fix(inst)
    fixed = x_full.copy()   # pin the gauge at the solution's own g

    def embed(y):
        full = fixed.copy()
        full[free] = y
        return full

    x = x_full[free]
    x_prev = None
    path = []
    rng = np.random.default_rng(inst.seed + 1)
    for step in range(1, steps + 1):
        s = QI(Fraction(step, steps))
        cs_exact = [tuple(s * v for v in tg) for tg in targets]
        for (base, h), ce in zip(inst.points, cs_exact):
            if not in_BH(h, ce):
                raise PathLeftBH(step, format_scalar(as_qi(base)))
        cs = [tuple(complex(v) for v in ce) for ce in cs_exact]
        fun = lambda v: _total_moment(inst, embed(v), cs)
        # secant predictor, then the plain one, then seeded noisy
        # restarts: the moment's zero set has plenty of chart slack, and
        # corrections stalling near a degenerate chart representative
        # usually succeed from a nearby start
        starts = [x if x_prev is None else 2 * x - x_prev, x]
        amp = 0.25
        for _ in range(6):
            noise = amp * (rng.standard_normal(x.size)
                           + 1j * rng.standard_normal(x.size))
            starts.append(x + noise)
            amp *= 1.7
        total_it = 0
        rn = np.inf
        for x0 in starts:
            x_new, rn, it = _gauss_newton(fun, x0, inst.tol, inst.max_iter)
            total_it += it
            if rn < inst.tol:
                break
        if rn >= inst.tol:
            raise NoConvergence(total_it, rn, step=step)
        x_prev, x = x, x_new
        flat = tuple(v for ce in cs_exact for v in ce)
        path.append((flat, float(rn)))
    end_coords = _coords_list(inst, embed(x))
    end_conn = _assemble_connection(
        inst, end_coords, [[complex(v) for v in ce] for ce in cs_exact])
    report = _endpoint_report(inst, end_coords, cs_exact, eig_tol)
    return ContinuationFamily(sol, tuple(as_qi(v) for v in target), steps,
                              tuple(path), end_coords, end_conn, report)


def _endpoint_report(inst, coords, cs_exact, eig_tol):
    from .cli import pretty_kns
    fibers_ok = True
    types_ok = True
    types = []
    eig_err = 0.0
    for (base, h), t, ce in zip(inst.points, coords, cs_exact):
        rep = decompose_fiber(t, h, list(ce))
        fibers_ok = fibers_ok and rep.ok
        dec = partial_fractions(h, ce)
        expected = unfold_spectral(spectral_type_of(h), dec.stratum)
        for (_, piece), exp_type, (_, _, exp_levels, got_levels) in zip(
                dec.pieces, expected.types, rep.poles):
            sp = spectral_type_of(piece)
            types_ok = types_ok and weyl_key(sp) == weyl_key(exp_type)
            types.append(pretty_kns(sp))
            for le, lg in zip(exp_levels, got_levels):
                rem = list(lg)
                for v in le:
                    j = min(range(len(rem)), key=lambda i: abs(rem[i] - v))
                    eig_err = max(eig_err, abs(rem.pop(j) - v))
    rig_start = rigidity(inst.collection())
    end_types = []
    for (base, h), ce in zip(inst.points, cs_exact):
        dec = partial_fractions(h, ce)
        end_types.extend(spectral_type_of(piece) for _, piece in dec.pieces)
    rig_end = rigidity(SpectralCollection(tuple(end_types)))
    return {
        "fibers_ok": bool(fibers_ok),
        "types_ok": bool(types_ok),
        "eigenvalue_error": float(eig_err),
        "eigenvalues_ok": bool(fibers_ok and eig_err <= eig_tol),
        "types": types,
        "rigidity_start": rig_start,
        "rigidity_end": rig_end,
        "rigidity_ok": rig_start == rig_end,
    }


# ---------------------------------------------------------------------
# verification report

def verify_solution(conn: ConnectionOnP1, expected, tol=1e-8):
    """Check residue-sum, irreducibility, and per-pole spectral
    invariants of a connection against expected (position, form) pairs;
    returns a machine-readable report dict."""
    rsum = conn.residue_sum()
    residue_err = float(np.abs(rsum).max()) if conn.points else 0.0
    irr = is_irreducible(conn.all_matrices()) if conn.points else False
    spectral_ok = True
    details = []
    used = list(conn.points)
    for pos, form in expected:
        j = min(range(len(used)),
                key=lambda i: abs(used[i][0] - complex(pos)))
        at, coeffs = used.pop(j)
        ok = abs(at - complex(pos)) <= 1e-6 and len(coeffs) == form.k + 1
        if ok:
            inv = principal_invariants([np.asarray(co) for co in coeffs])
            scale = max([1.0] + [float(np.abs(co).max()) for co in coeffs])
            for i in range(form.k + 1):
                exp_vals = sorted((complex(x) for x in form.diag[i]),
                                  key=lambda z: (z.real, z.imag))
                rem = list(inv[i])
                for v in exp_vals:
                    jj = min(range(len(rem)), key=lambda t: abs(rem[t] - v))
                    if abs(rem.pop(jj) - v) > tol * scale:
                        ok = False
                        break
                if not ok:
                    break
        spectral_ok = spectral_ok and ok
        details.append({"position": str(pos), "ok": bool(ok)})
    return {
        "residue_sum_error": residue_err,
        "residue_sum_ok": residue_err <= tol,
        "irreducible": bool(irr),
        "spectral_ok": bool(spectral_ok),
        "poles": details,
        "ok": bool(residue_err <= tol and irr and spectral_ok),
    }


# ---------------------------------------------------------------------
# JSON round-trips

def _num_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def _num_from_json(v):
    return complex(v[0], v[1])


def _mat_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[_num_to_json(x) for x in row] for row in m]


def _mat_from_json(v):
    return np.array([[_num_from_json(x) for x in row] for row in v])


def coords_to_json(t: TriangularCoords):
    levels = []
    for nl, nul in t.pairs:
        if nl is None:
            levels.append(None)
        else:
            levels.append({"X": [_mat_to_json(m) for m in nl.mats],
                           "nu": [_mat_to_json(m) for m in nul.mats]})
    return {"g": _mat_to_json(t.g),
            "h": None if t.h is None else _mat_to_json(t.h),
            "levels": levels}


def coords_from_json(d) -> TriangularCoords:
    pairs = []
    for lvl, entry in enumerate(d["levels"], start=1):
        if entry is None:
            pairs.append((None, None))
        else:
            pairs.append((NilpotentElem(lvl, tuple(_mat_from_json(m)
                                                   for m in entry["X"])),
                          UPart(lvl, tuple(_mat_from_json(m)
                                           for m in entry["nu"]))))
    h = None if d["h"] is None else _mat_from_json(d["h"])
    return TriangularCoords(_mat_from_json(d["g"]), tuple(pairs), h)


def instance_to_json(inst: DSPInstance):
    return {"points": [{"base": format_scalar(as_qi(b)),
                        "form": form_to_json(h)} for b, h in inst.points],
            "tol": inst.tol, "seed": inst.seed, "restarts": inst.restarts,
            "max_iter": inst.max_iter}


def instance_from_json(d, seed=None) -> DSPInstance:
    points = tuple((parse_scalar(p["base"]), form_from_json(p["form"]))
                   for p in d["points"])
    inst = DSPInstance(points,
                       tol=float(d.get("tol", 1e-10)),
                       seed=int(d.get("seed", 0)),
                       restarts=int(d.get("restarts", 12)),
                       max_iter=int(d.get("max_iter", 200)))
    if seed is not None:
        inst = replace(inst, seed=seed)
    return inst


def connection_to_json(conn: ConnectionOnP1):
    return {"points": [{"position": _num_to_json(pos),
                        "coeffs": [_mat_to_json(m) for m in coeffs]}
                       for pos, coeffs in conn.points]}


def connection_from_json(d) -> ConnectionOnP1:
    return ConnectionOnP1(tuple(
        (_num_from_json(p["position"]),
         tuple(_mat_from_json(m) for m in p["coeffs"]))
        for p in d["points"]))


def solution_to_json(sol: DSPSolution):
    return {"instance": instance_to_json(sol.instance),
            "coords": [coords_to_json(t) for t in sol.coords],
            "connection": connection_to_json(sol.connection),
            "residual": sol.residual}


def solution_from_json(d) -> DSPSolution:
    inst = instance_from_json(d["instance"])
    coords = tuple(coords_from_json(c) for c in d["coords"])
    conn = connection_from_json(d["connection"])
    return DSPSolution(inst, coords, conn, float(d["residual"]))


def family_to_json(fam: ContinuationFamily):
    return {"solution": solution_to_json(fam.solution),
            "target": [format_scalar(v) for v in fam.target],
            "steps": fam.steps,
            "path": [{"c": [format_scalar(as_qi(v)) for v in c],
                      "residual": r} for c, r in fam.path],
            "end_coords": [coords_to_json(t) for t in fam.end_coords],
            "end_connection": connection_to_json(fam.end_connection),
            "end_report": fam.end_report}
