"""Command-line front end and the nesting notation for spectral types.

A point is written as balanced groups whose leaves are digits at uniform
depth k, e.g. "(((2)))(((11)))"; level Pi_i is read off from the node
sizes at depth k-i+1 and Pi_0 from the leaves.  Points are separated by
commas: "22,22,22,211".
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .exact import format_scalar, parse_scalar
from .rootdata import gl_root_data, composition_to_subset, \
    subset_to_composition, zero_nilpotent_label
from .spectral import (AbstractSpectralType, SpectralCollection, delta,
                       irregularity, moduli_dim, rigidity)
from .canonical import form_from_json, form_to_json, spectral_type_of, \
    sort_to_fundamental_domain
from .strata import (SetPartition, partitions, in_BH, partial_fractions,
                     sample_stratum, verify_spectral_decomposition,
                     delta_sum_check, MismatchReport)
from .diagram import reduced_diagram, unfolding_diagram, to_dot

__all__ = ["parse_kns", "pretty_kns", "main", "USAGE_ERROR", "DATA_ERROR"]

USAGE_ERROR = 64
DATA_ERROR = 65


class KnsError(ValueError):
    pass


def _parse_point(s: str):
    """One point -> list of node-size compositions by depth (leaves last)."""
    if not s:
        raise KnsError("empty point")
    # parse into a tree; leaves are single digits 1-9
    pos = 0

    def parse_group():
        nonlocal pos
        if s[pos] == "(":
            pos += 1
            children = []
            while pos < len(s) and s[pos] != ")":
                children.append(parse_group())
            if pos >= len(s):
                raise KnsError("unbalanced parentheses")
            pos += 1
            if not children:
                raise KnsError("empty group")
            return children
        ch = s[pos]
        if not ch.isdigit() or ch == "0":
            raise KnsError(f"bad character {ch!r}")
        pos += 1
        return int(ch)

    roots = []
    while pos < len(s):
        roots.append(parse_group())
    # uniform leaf depth
    def depth(node):
        if isinstance(node, int):
            return 0
        ds = {depth(ch) for ch in node}
        if len(ds) != 1:
            raise KnsError("non-uniform leaf depth")
        return 1 + ds.pop()

    depths = {depth(r) for r in roots}
    if len(depths) != 1:
        raise KnsError("non-uniform leaf depth")
    k = depths.pop()

    def size(node):
        return node if isinstance(node, int) else sum(size(ch) for ch in node)

    comps = []          # comps[d] = composition at depth d (0 = top)
    frontier = roots
    for _ in range(k + 1):
        comps.append(tuple(size(nd) for nd in frontier))
        nxt = []
        for nd in frontier:
            if isinstance(nd, int):
                continue
            nxt.extend(nd)
        frontier = nxt
    return k, comps


def parse_kns(s: str, n: int) -> SpectralCollection:
    """Parse the comma-separated nesting notation into a collection."""
    data = gl_root_data(n)
    types = []
    for point in s.split(","):
        k, comps = _parse_point(point.strip())
        total = sum(comps[-1])
        if total != n:
            raise KnsError(f"leaf digits sum to {total}, expected n={n}")
        levels = tuple(composition_to_subset(c) for c in comps)
        nil = zero_nilpotent_label(comps[-1])
        types.append(AbstractSpectralType(data, levels, nil))
    return SpectralCollection(tuple(types))


def pretty_kns(s: AbstractSpectralType) -> str:
    """Inverse of parse_kns for zero nilpotent labels; a nontrivial label
    is appended as ;[...] since the notation cannot carry it."""
    n = s.data.cartan_dim
    comps = [subset_to_composition(n, lev) for lev in s.levels]

    def blocks(comp):
        out, pos = [], 0
        for sz in comp:
            out.append((pos, pos + sz))
            pos += sz
        return out

    def render(level, lo, hi):
        if level == len(comps) - 1:
            return str(hi - lo)
        inner = "".join(render(level + 1, a, b)
                        for a, b in blocks(comps[level + 1])
                        if lo <= a and b <= hi)
        return "(" + inner + ")"

    body = "".join(render(0, a, b) for a, b in blocks(comps[0]))
    if s.nilpotent != zero_nilpotent_label(comps[-1]):
        body += ";[" + ",".join("".join(map(str, p)) for p in s.nilpotent) + "]"
    return body


def pretty_collection(c: SpectralCollection) -> str:
    return ",".join(pretty_kns(t) for t in c.types)


# ---------------------------------------------------------------------
# commands

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _default_seed():
    return int(os.environ.get("UNFOLDING_SEED", "0"))


def _load_form(path):
    with open(path) as fh:
        return sort_to_fundamental_domain(form_from_json(json.load(fh)))


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_invariants(args):
    col = parse_kns(args.spec, args.n)
    for i, t in enumerate(col.types):
        print(f"point {i}: type {pretty_kns(t)}  Irr {irregularity(t)}"
              f"  delta {delta(t)}")
    print(f"rig {rigidity(col)}")
    print(f"moduli dim {moduli_dim(col)}")
    return 0


def cmd_diagram(args):
    col = parse_kns(args.spec, args.n)
    if args.reduced:
        dia = reduced_diagram(col, max_vertices=args.max_vertices)
    else:
        dia = unfolding_diagram(col, max_vertices=args.max_vertices)
    if args.dot:
        _emit(to_dot(dia), args.output)
    else:
        labels = dia.labels
        print(f"{len(labels)} vertices, {len(dia.edges)} edges")
        for i, lab in enumerate(labels):
            print(f"v{i}: {pretty_collection(lab)}")
        for a, b in dia.edges:
            print(f"v{a} -> v{b}")
    return 0


def cmd_unfold(args):
    h = _load_form(args.form)
    if args.at:
        c = tuple(parse_scalar(x) for x in args.at.split(","))
    else:
        part = SetPartition.parse(args.stratum) if args.stratum else \
            partitions(h.k)[-1]
        c = sample_stratum(h, part, seed=args.seed)
    dec = partial_fractions(h, c)
    print("c =", ", ".join(format_scalar(x) for x in dec.c))
    print("stratum", dec.stratum)
    for pole, piece in dec.pieces:
        print(f"pole {format_scalar(pole)} order {piece.k + 1}: "
              f"type {pretty_kns(spectral_type_of(piece))}")
        print(json.dumps(form_to_json(piece)))
    col = verify_spectral_decomposition(h, c)
    s, d0 = delta_sum_check(h, c)
    print(f"spectral decomposition verified; delta sum {s} = {d0}")
    return 0


def cmd_verify(args):
    h = _load_form(args.form)
    if not args.all_strata:
        print("nothing to do (pass --all-strata)")
        return 0
    failures = 0
    for part in partitions(h.k):
        c = sample_stratum(h, part, seed=args.seed)
        try:
            verify_spectral_decomposition(h, c)
            s, d0 = delta_sum_check(h, c)
            ok = s == d0
        except MismatchReport as exc:
            ok = False
        print(f"stratum {part}: {'ok' if ok else 'FAIL'}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else DATA_ERROR


def cmd_solve(args):
    from .dsp import (DSPInstance, solve_dsp, FuchsViolation, NoConvergence,
                      ReducibleSolution, instance_from_json, solution_to_json)
    with open(args.instance) as fh:
        inst = instance_from_json(json.load(fh), seed=args.seed)
    try:
        sol = solve_dsp(inst)
    except FuchsViolation as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (NoConvergence, ReducibleSolution) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(solution_to_json(sol), indent=2)
    _emit(text + "\n", args.output)
    print(f"residual {sol.residual:.3e}", file=sys.stderr)
    return 0


def cmd_continue(args):
    from .dsp import (continue_family, solution_from_json, PathLeftBH,
                      NoConvergence, family_to_json)
    with open(args.solution) as fh:
        sol = solution_from_json(json.load(fh))
    target = tuple(parse_scalar(x) for x in args.to.split(","))
    try:
        fam = continue_family(sol, target, steps=args.steps)
    except PathLeftBH as exc:
        print(f"path left B_H: {exc}", file=sys.stderr)
        return 2
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 2
    _emit(json.dumps(family_to_json(fam), indent=2) + "\n", args.output)
    return 0


def build_parser():
    p = _Parser(prog="unfolding",
                description="spectral types, unfolding diagrams, and "
                            "additive Deligne-Simpson solving")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("invariants", help="Irr/delta per point, rig, moduli dim")
    q.add_argument("spec")
    q.add_argument("-n", type=int, required=True)
    q.set_defaults(func=cmd_invariants)

    q = sub.add_parser("diagram", help="unfolding diagram of a collection")
    q.add_argument("spec")
    q.add_argument("-n", type=int, required=True)
    q.add_argument("--reduced", action="store_true")
    q.add_argument("--dot", action="store_true")
    q.add_argument("--max-vertices", type=int, default=20000)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_diagram)

    q = sub.add_parser("unfold", help="partial fractions of H(c) on a stratum")
    q.add_argument("form")
    q.add_argument("--stratum", help='e.g. "0,1|2,3"')
    q.add_argument("--sample", action="store_true")
    q.add_argument("--at", help="comma-separated exact scalars")
    q.add_argument("--seed", type=int, default=None)
    q.set_defaults(func=cmd_unfold)

    q = sub.add_parser("verify", help="spectral decomposition on all strata")
    q.add_argument("form")
    q.add_argument("--all-strata", action="store_true")
    q.add_argument("--seed", type=int, default=None)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("solve", help="solve an additive Deligne-Simpson instance")
    q.add_argument("instance")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("continue", help="continue a solution along c")
    q.add_argument("solution")
    q.add_argument("--to", required=True)
    q.add_argument("--steps", type=int, default=16)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_continue)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _default_seed()
    try:
        return args.func(args)
    except (KnsError, MismatchReport, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
