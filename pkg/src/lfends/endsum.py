"""End sum of two ray-based graphs: glue them vertex by vertex along their
rays and check the resulting end tower against the predicted quotient."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AlignmentFailure, RayNotProperInWindow
from .exhaust import Exhaustion, bounded_filling, efficient_exhaustion
from .graphs import GraphGenerator, materialize_ball
from .h0 import reduced_basis
from .rays import points_to
from .tower import EndTower, build_tower, canonical_code, quotient_tower


class ExtendedRay:
    """A ray given by a finite prefix and continued outward greedily.

    Past the prefix each step goes to the smallest neighbour one unit further
    from the family origin, so the continuation never revisits the prefix as
    long as the prefix ends at its farthest vertex.
    """

    def __init__(self, gen: GraphGenerator, prefix):
        prefix = tuple(prefix)
        if not prefix or prefix[0] != gen.basepoint:
            raise RayNotProperInWindow("ray must start at the basepoint")
        if len(set(prefix)) != len(prefix):
            raise RayNotProperInWindow("ray repeats a vertex")
        for u, v in zip(prefix, prefix[1:]):
            if v not in gen.neighbors(u):
                raise RayNotProperInWindow(f"ray step {u} -> {v} is not an edge")
        dists = [gen.origin_distance(v) for v in prefix]
        if None in dists:
            raise RayNotProperInWindow(f"{gen.describe()} has no outward direction to extend rays")
        if max(dists) != dists[-1] or dists.count(dists[-1]) != 1:
            raise RayNotProperInWindow("ray prefix must end at its unique farthest vertex")
        self.gen = gen
        self.verts = list(prefix)
        self.position = {v: t for t, v in enumerate(prefix)}
        self.last = len(prefix) - 1
        self.last_dist = dists[-1]

    def __call__(self, t: int) -> int:
        while len(self.verts) <= t:
            v = self.verts[-1]
            d = self.gen.origin_distance(v)
            nxt = [u for u in self.gen.neighbors(v) if self.gen.origin_distance(u) == d + 1]
            if not nxt:
                raise RayNotProperInWindow(f"cannot extend the ray past {v}")
            self.verts.append(min(nxt))
        return self.verts[t]

    def index(self, v) -> int | None:
        """Ray parameter of ``v``, or ``None`` when ``v`` is off the ray."""
        t = self.position.get(v)
        if t is not None:
            return t
        d = self.gen.origin_distance(v)
        if d is None or d <= self.last_dist:
            return None
        t = self.last + d - self.last_dist
        return t if self(t) == v else None


def geodesic_ray(gen: GraphGenerator, length: int = 1) -> tuple:
    """Prefix of the outward ray from the basepoint taking the smallest step."""
    r = ExtendedRay(gen, (gen.basepoint,))
    return tuple(r(t) for t in range(length + 1))


class EndSumGenerator(GraphGenerator):
    """``M`` and ``N`` with ``rayM(k)`` identified with ``rayN(k)`` for all ``k``.

    Ids: ``m -> 2m`` for vertices of ``M`` and ``n -> 2n + 1`` for vertices
    of ``N`` off its ray; ray vertices keep their ``M`` id.
    """

    family = "end_sum"

    def __init__(self, gen_m: GraphGenerator, ray_m, gen_n: GraphGenerator, ray_n):
        self.gen_m, self.gen_n = gen_m, gen_n
        self.ray_m = ExtendedRay(gen_m, ray_m)
        self.ray_n = ExtendedRay(gen_n, ray_n)
        super().__init__(2 * gen_m.basepoint, gen_m.degree_bound + gen_n.degree_bound)

    def describe(self) -> str:
        return f"end_sum({self.gen_m.describe()},{self.gen_n.describe()})"

    def from_m(self, m: int) -> int:
        return 2 * m

    def from_n(self, n: int) -> int:
        k = self.ray_n.index(n)
        return 2 * self.ray_m(k) if k is not None else 2 * n + 1

    def contains(self, v):
        if not isinstance(v, int) or v < 0:
            return False
        if v % 2 == 0:
            return self.gen_m.contains(v // 2)
        n = v // 2
        return self.gen_n.contains(n) and self.ray_n.index(n) is None

    def _neighbors(self, v):
        if v % 2:
            return {self.from_n(y) for y in self.gen_n.neighbors(v // 2)}
        m = v // 2
        out = {2 * x for x in self.gen_m.neighbors(m)}
        k = self.ray_m.index(m)
        if k is not None:
            out |= {self.from_n(y) for y in self.gen_n.neighbors(self.ray_n(k))}
        return out


@dataclass(frozen=True)
class EndSumSpec:
    gen_m: GraphGenerator
    ray_m: tuple
    gen_n: GraphGenerator
    ray_n: tuple
    depth: int
    window_radius: int
    stride: int = 1


def end_sum_graph(spec: EndSumSpec) -> EndSumGenerator:
    return EndSumGenerator(spec.gen_m, spec.ray_m, spec.gen_n, spec.ray_n)


def _window_ray(ray: ExtendedRay, image, window) -> tuple:
    """The ray (mapped by ``image``) up to its first visit to the window boundary."""
    out = []
    t = 0
    while True:
        v = image(ray(t))
        if v not in window.vertices:
            raise RayNotProperInWindow("ray leaves the window without meeting its boundary")
        out.append(v)
        if v in window.boundary:
            return tuple(out)
        t += 1


@dataclass(frozen=True)
class EndSumReport:
    rows: tuple
    code_match: bool
    ranks: tuple
    towers: tuple = field(repr=False)

    @property
    def sizes_match(self) -> bool:
        return all(r[-1] for r in self.rows)

    @property
    def rank_additive(self) -> bool:
        rm, rn, rs = self.ranks
        return rs == rm + rn

    @property
    def ok(self) -> bool:
        return self.sizes_match and self.code_match and self.rank_additive


def _aligned_levels(genS, wS, exhM, exhN):
    levels = []
    for KM, KN in zip(exhM.levels, exhN.levels):
        img = {genS.from_m(v) for v in KM} | {genS.from_n(v) for v in KN}
        if not img <= wS.vertices or img & wS.boundary:
            raise AlignmentFailure("pushed-forward level reaches the window boundary")
        levels.append(bounded_filling(wS, img))
    exh = Exhaustion.from_levels(wS, levels, center=wS.center)
    return exh


def verify_end_sum(spec: EndSumSpec) -> EndSumReport:
    """Compare the glued graph's tower with the quotient of the summands' towers."""
    n, R = spec.depth, spec.window_radius
    sides = []
    for gen, prefix in ((spec.gen_m, spec.ray_m), (spec.gen_n, spec.ray_n)):
        exh = efficient_exhaustion(gen, n, R, spec.stride)
        t = build_tower(exh.window, exh)
        ray = _window_ray(ExtendedRay(gen, prefix), lambda v: v, exh.window)
        sides.append((exh, t, points_to(ray, t)))
    (exhM, tM, eM), (exhN, tN, eN) = sides
    genS = end_sum_graph(spec)
    wS = materialize_ball(genS, R)
    exhS = _aligned_levels(genS, wS, exhM, exhN)
    bad = exhS.nesting_violations()
    if bad or not exhS.all_efficient:
        hint = ""
        for s in range(spec.stride + 1, spec.stride + 4):
            try:
                verify_end_sum(EndSumSpec(spec.gen_m, spec.ray_m, spec.gen_n, spec.ray_n, n, R, s))
            except Exception:
                continue
            hint = f"; stride {s} aligns"
            break
        raise AlignmentFailure(f"aligned levels not interior-nested at {bad or 'efficiency'}{hint}")
    tS = build_tower(wS, exhS)
    rayS = _window_ray(genS.ray_m, genS.from_m, wS)
    eS = points_to(rayS, tS)
    q = quotient_tower(tM, eM, tN, eN)
    rows = []
    for i in range(1, n + 1):
        a, b, s = len(tM.level(i)), len(tN.level(i)), len(tS.level(i))
        rows.append((i, a, b, s, a + b - 1, s == a + b - 1))
    ranks = tuple(len(reduced_basis(t, e)) for t, e in ((tM, eM), (tN, eN), (tS, eS)))
    return EndSumReport(tuple(rows), canonical_code(tS) == canonical_code(q), ranks, (tM, tN, tS, q))


def format_report(rep: EndSumReport) -> str:
    lines = ["level  |U^M|  |U^N|  |U^S|  predicted      match"]
    for i, a, b, s, pred, ok in rep.rows:
        lines.append(f"{i:>5}  {a:>5}  {b:>5}  {s:>5}  {f'{s} = {a}+{b}-1':<13}  {'OK' if ok else 'FAIL'}")
    rm, rn, rs = rep.ranks
    lines.append(f"canonical code matches quotient: {'OK' if rep.code_match else 'FAIL'}")
    lines.append(f"reduced rank: {rs} = {rm}+{rn} {'OK' if rep.rank_additive else 'FAIL'}")
    return "\n".join(lines) + "\n"
