"""Command line driver: ``ends <verb> [flags]``.

Exit status 0 on success, 1 on a domain error (one ``ERR:<Name>: ...`` line
on stderr), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import endsum, h0
from .errors import EndsError
from .exhaust import efficient_exhaustion, ray_efficient_exhaustion
from .graphs import FAMILY_NAMES, format_graph, make_generator, materialize_ball, parse_edge_list, parse_family
from .rays import (
    build_retraction,
    embed_end_tree,
    find_ray,
    format_ray,
    parse_ray,
    points_to,
    tree_retraction,
)
from .tower import (
    build_tower,
    canonical_code,
    emit_dot,
    ends_report,
    enumerate_prefixes,
    format_tower,
    normalize_tower,
    parse_tower,
    prefix_from_indices,
    tree_realization,
)

VERBS = ("gen", "tower", "ends", "h0", "ray", "retract", "tree", "realize", "endsum", "dot")


class UsageError(Exception):
    pass


def _family(text: str) -> str:
    try:
        name, _ = parse_family(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if name not in FAMILY_NAMES:
        raise argparse.ArgumentTypeError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    return text


def _params(text: str) -> dict:
    out = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError:
            raise argparse.ArgumentTypeError(f"parameter {k} must be an integer") from None
    return out


def _indices(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _coeff(text: str):
    if text == "z":
        return None
    if text.startswith("fp:"):
        try:
            p = int(text[3:])
        except ValueError:
            p = 0
        if p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1)):
            return p
    raise argparse.ArgumentTypeError(f"coefficients must be z or fp:<prime>, got {text!r}")


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = -1
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ends", description="End invariants of locally finite graphs.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--family", type=_family, help="line, halfline, grid(d), regular_tree(d), free_group(k), "
                   "binary_tree, comb")
    p.add_argument("--params", type=_params, default={}, help="extra family parameters, k=v,...")
    p.add_argument("--graph", help="GRAPH v1 file instead of a family")
    p.add_argument("--depth", type=_nonneg, default=4)
    p.add_argument("--window", type=_nonneg, help="window radius (default depth + 2)")
    p.add_argument("--stride", type=_nonneg, default=1)
    p.add_argument("--end", type=_indices, help="end prefix as comma-separated per-level indices")
    p.add_argument("--ray", help="ray v1 file")
    p.add_argument("--tower", help="TOWER v1 file")
    p.add_argument("--out", help="write the main artifact to this file")
    p.add_argument("--coeff", type=_coeff, default=None, help="z or fp:<p>")
    p.add_argument("--basis", action="store_true", help="list basis elements")
    p.add_argument("--reduced", action="store_true", help="use the reduced theory at --end")
    p.add_argument("--left", type=_family, help="first summand family for endsum")
    p.add_argument("--right", type=_family, help="second summand family for endsum")
    return p


# -- shared pipeline pieces ------------------------------------------------------

def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _generator(args, family=None):
    family = family or args.family
    if args.graph and family is None:
        gen = parse_edge_list(_read(args.graph))
        if "base" in args.params:
            gen = type(gen)(gen.adjacency, base=args.params["base"])
        return gen
    if family is None:
        raise UsageError("one of --family or --graph is required")
    try:
        return make_generator(family, **args.params)
    except TypeError:
        raise UsageError(f"bad --params for {family}: {args.params}") from None


def _radius(args) -> int:
    return args.window if args.window is not None else args.depth + 2


def _graph_tower(args):
    if args.stride < 1:
        raise UsageError("--stride must be positive")
    gen = _generator(args)
    exh = efficient_exhaustion(gen, args.depth, _radius(args), args.stride)
    return gen, exh, build_tower(exh.window, exh)


def _any_tower(args):
    if args.tower:
        return parse_tower(_read(args.tower))
    return _graph_tower(args)[2]


def _prefix(args, t):
    if args.end is None:
        if t.depth == 0 or not t.levels[-1]:
            raise UsageError("tower has no ends to choose from")
        return enumerate_prefixes(t, t.depth)[0]
    if len(args.end) != t.depth:
        raise UsageError(f"--end needs {t.depth} indices, got {len(args.end)}")
    return prefix_from_indices(t, args.end)


def _indices_of(t, eps) -> str:
    return ",".join(str(t.index(i, u)) for i, u in enumerate(eps.thread, 1))


def _sizes(t) -> str:
    return " ".join(str(s) for s in t.sizes)


# -- verbs -----------------------------------------------------------------------

def cmd_gen(args):
    gen = _generator(args)
    ball = materialize_ball(gen, _radius(args))
    report = f"{gen.describe()}: ball of radius {ball.radius} with {len(ball.vertices)} vertices, " \
             f"{len(ball.edges)} edges, sphere {len(ball.boundary)}\n"
    return report, format_graph(ball, gen.basepoint)


def cmd_tower(args):
    if args.tower:
        t = parse_tower(_read(args.tower))
        head = f"imported tower, depth {t.depth}"
    else:
        gen, exh, t = _graph_tower(args)
        head = f"{gen.describe()}: depth {t.depth}, window {exh.window.radius}"
    rep = ends_report(t)
    lines = [head, "level  size"]
    lines += [f"{i:>5}  {s:>4}" for i, s in enumerate(t.sizes, 1)]
    lines.append(f"sizes: {_sizes(t)}")
    lines.append("stabilized" if rep.stabilized else "not stabilized")
    return "\n".join(lines) + "\n", format_tower(t)


def cmd_ends(args):
    t = _any_tower(args)
    rep = ends_report(t)
    lines = [f"sizes: {_sizes(t)}", f"ends at depth {t.depth}: {rep.count_at_depth} (lower bound)"]
    if rep.stabilized:
        lines.append(f"stabilized: {rep.stabilized_count} ends")
    else:
        lines.append("not stabilized")
    for eps in enumerate_prefixes(t, t.depth):
        lines.append(f"end {_indices_of(t, eps)}")
    return "\n".join(lines) + "\n", None


def cmd_h0(args):
    t = _any_tower(args)
    p = args.coeff
    ring = "Z" if p is None else f"F_{p}"
    if args.reduced:
        eps = _prefix(args, t)
        B = h0.reduced_basis(t, eps, p)
        head = f"reduced H0 over {ring} at end {_indices_of(t, eps)}: rank {len(B)}"
    else:
        B = h0.basis(t, "min-id", p)
        head = f"H0 over {ring}: rank {len(B)}"
    lines = [head, f"sizes: {_sizes(t)}"]
    if not args.reduced:
        for k in range(1, t.depth + 1):
            d = h0.determinant(h0.basis_matrix(B, k), p)
            lines.append(f"level {k}: {len(B.up_to(k))} elements, det {d}")
    if args.basis:
        lines.append("basis:")
        lines += [f"  level {i} index {t.index(i, u)}" for i, u in B.elements]
    blocks = "".join(h0.format_h0(x) for x in B.classes())
    return "\n".join(lines) + "\n", blocks


def cmd_ray(args):
    gen, exh, t = _graph_tower(args)
    if args.ray:
        eps = points_to(parse_ray(_read(args.ray)), t)
        return f"points to end {_indices_of(t, eps)}\n", None
    eps = _prefix(args, t)
    ray = find_ray(exh.window, exh, t, eps)
    report = f"ray of length {len(ray) - 1} to end {_indices_of(t, eps)}; exits {' '.join(map(str, ray.exit_indices))}\n"
    return report, format_ray(ray)


def cmd_retract(args):
    gen, exh, t = _graph_tower(args)
    if args.ray:
        verts = parse_ray(_read(args.ray))
    else:
        verts = find_ray(exh.window, exh, t, _prefix(args, t)).vertices
    rexh = ray_efficient_exhaustion(gen, verts, args.depth, _radius(args), args.stride, window=exh.window)
    rho = build_retraction(rexh.window, rexh, verts)
    lines = ["level  a_i  b_i"]
    lines += [f"{i:>5}  {a:>3}  {b:>3}" for i, (a, b) in enumerate(zip(rho.a, rho.b), 1)]
    lines.append(f"identity on ray: {'yes' if rho.identity_on_ray() else 'no'}")
    lines.append(f"properness violations: {len(rho.properness_violations())}")
    lines.append(f"max edge stretch: {rho.max_edge_stretch()}")
    body = "".join(f"{v} {rho.values[v]}\n" for v in sorted(rho.values))
    return "\n".join(lines) + "\n", "retraction v1\n" + body


def cmd_tree(args):
    gen, exh, t = _graph_tower(args)
    emb = embed_end_tree(exh.window, exh, t)
    m = emb.tower_map
    lines = [f"tree with {len(emb.vertices)} vertices, hubs per level: "
             + " ".join(str(len(t.level(i))) for i in range(1, t.depth + 1))]
    lines.append(f"end map bijective: {'yes' if m.is_bijective() else 'no'}")
    tr = tree_retraction(exh.window, exh, emb)
    lines.append(f"E(retraction) o E(inclusion) = id: {'yes' if tr.end_level_identity() else 'no'}")
    edges = "".join(f"e {min(v, p)} {max(v, p)}\n" for v, p in sorted(emb.parent.items()) if p is not None)
    return "\n".join(lines) + "\n", f"lfgraph v1\n{edges}base {emb.root}\n"


def cmd_realize(args):
    if not args.tower:
        raise UsageError("realize needs --tower")
    t = parse_tower(_read(args.tower))
    norm = normalize_tower(t)
    gen, exh, rt = tree_realization(t)
    B, _ = h0.nobeling_basis(t, args.coeff)
    lines = [f"normalized sizes: {_sizes(norm)} ({norm.provenance})",
             f"realized sizes: {_sizes(rt)}",
             f"canonical codes equal: {'yes' if canonical_code(rt) == canonical_code(norm) else 'no'}",
             f"basis size: {len(B)}"]
    return "\n".join(lines) + "\n", format_graph(exh.window, 0)


def cmd_endsum(args):
    if not args.left or not args.right:
        raise UsageError("endsum needs --left and --right")
    gm = make_generator(args.left)
    gn = make_generator(args.right)
    R = _radius(args)
    spec = endsum.EndSumSpec(gm, endsum.geodesic_ray(gm), gn, endsum.geodesic_ray(gn), args.depth, R, args.stride)
    rep = endsum.verify_end_sum(spec)
    return endsum.format_report(rep), None


def cmd_dot(args):
    t = _any_tower(args)
    return None, emit_dot(t)


ARTIFACT_VERBS = ("gen", "ray", "dot")
COMMANDS = {name: globals()[f"cmd_{name}"] for name in VERBS}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, artifact = COMMANDS[args.verb](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ends: error: {exc}", file=sys.stderr)
        return 2
    except EndsError as exc:
        print(f"ERR:{exc.name}: {str(exc).splitlines()[0] if str(exc) else ''}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ERR:{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(artifact if artifact is not None else report)
        if report:
            sys.stdout.write(report)
    elif args.verb in ARTIFACT_VERBS and artifact is not None:
        sys.stdout.write(artifact)
    else:
        sys.stdout.write(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
