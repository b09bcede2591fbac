"""End towers: finite truncations of the inverse system of unbounded
complementary components, with surjective bonding maps.

Levels are numbered from 1.  ``U_i`` is a sorted tuple of component ids (the
minimum vertex of the component for graph-derived towers, abstract integers
otherwise) and ``parent(i, u)`` is the bond ``U_i -> U_{i-1}``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import (
    BadIndices,
    DepthMismatch,
    DepthOutOfRange,
    EmptyLevelAfterNormalization,
    EmptyTower,
    IncoherentPrefix,
    NotProper,
    ParseError,
)
from .exhaust import Exhaustion, complement_components, efficient_exhaustion
from .graphs import RayedTreeGenerator, Window


@dataclass(frozen=True, eq=False)
class EndTower:
    levels: tuple
    parents: tuple
    provenance: str = "imported"
    exhaustion: Exhaustion | None = field(default=None, repr=False)
    decompositions: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.parents) != max(len(self.levels) - 1, 0):
            raise ValueError("need one bond per pair of consecutive levels")
        maps = []
        for j, ps in enumerate(self.parents):
            if len(ps) != len(self.levels[j + 1]):
                raise ValueError(f"bond into level {j + 1} has the wrong length")
            allowed = set(self.levels[j])
            if not set(ps) <= allowed:
                raise ValueError(f"bond into level {j + 1} leaves the level")
            maps.append(dict(zip(self.levels[j + 1], ps)))
        object.__setattr__(self, "_bonds", tuple(maps))
        object.__setattr__(self, "_index", tuple({u: k for k, u in enumerate(lv)} for lv in self.levels))

    @classmethod
    def from_bonds(cls, levels, bonds, **kw) -> "EndTower":
        """``bonds[j]`` maps level ``j + 2`` to level ``j + 1`` (as dicts)."""
        levels = tuple(tuple(sorted(lv)) for lv in levels)
        parents = tuple(tuple(b[u] for u in levels[j + 1]) for j, b in enumerate(bonds))
        return cls(levels=levels, parents=parents, **kw)

    def __eq__(self, other):
        if not isinstance(other, EndTower):
            return NotImplemented
        return self.levels == other.levels and self.parents == other.parents

    def __hash__(self):
        return hash((self.levels, self.parents))

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def sizes(self) -> tuple:
        return tuple(len(lv) for lv in self.levels)

    def _check_level(self, i):
        if not 1 <= i <= self.depth:
            raise DepthOutOfRange(f"level {i} outside 1..{self.depth}")

    def level(self, i: int) -> tuple:
        self._check_level(i)
        return self.levels[i - 1]

    def index(self, i: int, u) -> int:
        return self._index[i - 1][u]

    def bond(self, i: int) -> dict:
        """The bond ``U_{i+1} -> U_i`` as a dict."""
        if not 1 <= i < self.depth:
            raise DepthOutOfRange(f"no bond out of level {i + 1}")
        return self._bonds[i - 1]

    def parent(self, i: int, u):
        return self._bonds[i - 2][u]

    def children(self, i: int, u) -> tuple:
        return tuple(w for w in self.levels[i] if self._bonds[i - 1][w] == u)

    def ancestor(self, i: int, u, j: int):
        """Image of ``u ∈ U_i`` under the composite bond to level ``j <= i``."""
        while i > j:
            u = self._bonds[i - 2][u]
            i -= 1
        return u

    def thread(self, i: int, u) -> tuple:
        out = [u]
        while i > 1:
            u = self._bonds[i - 2][u]
            out.append(u)
            i -= 1
        return tuple(reversed(out))

    def is_surjective(self) -> bool:
        return all(set(b.values()) == set(self.levels[j]) for j, b in enumerate(self._bonds))

    def component(self, i: int, u) -> frozenset:
        """Vertex set of component ``u`` at level ``i`` (graph-derived towers only)."""
        dec = self.decompositions[i - 1]
        for c in dec.components:
            if c.rep == u:
                return c.vertices
        raise KeyError(u)

    def relabel(self, maps) -> "EndTower":
        """Rename ids level by level (``maps[j]`` a dict on level ``j + 1``)."""
        levels = [[maps[j][u] for u in lv] for j, lv in enumerate(self.levels)]
        bonds = [{maps[j + 1][w]: maps[j][p] for w, p in b.items()} for j, b in enumerate(self._bonds)]
        return EndTower.from_bonds(levels, bonds, provenance=self.provenance)


@dataclass(frozen=True)
class EndPrefix:
    thread: tuple

    @property
    def depth(self) -> int:
        return len(self.thread)

    def at(self, i: int):
        return self.thread[i - 1]


def check_prefix(t: EndTower, eps: EndPrefix, full: bool = True) -> EndPrefix:
    if full and eps.depth != t.depth:
        raise IncoherentPrefix(f"prefix depth {eps.depth} != tower depth {t.depth}")
    for i, u in enumerate(eps.thread, 1):
        if i > t.depth or u not in t._index[i - 1]:
            raise IncoherentPrefix(f"{u} is not in level {i}")
        if i > 1 and t.parent(i, u) != eps.thread[i - 2]:
            raise IncoherentPrefix(f"thread breaks between levels {i - 1} and {i}")
    return eps


def prefix_from_indices(t: EndTower, indices) -> EndPrefix:
    """Prefix from per-level positions (0-based within each sorted level)."""
    try:
        thread = tuple(t.levels[i][k] for i, k in enumerate(indices))
    except IndexError:
        raise IncoherentPrefix(f"index out of range in {list(indices)}") from None
    return check_prefix(t, EndPrefix(thread), full=False)


def build_tower(window: Window, exh: Exhaustion) -> EndTower:
    """Unbounded components of ``window - K_i`` with containment bonds."""
    if exh.window is not window:
        raise ValueError("exhaustion belongs to a different window")
    decs = tuple(complement_components(window, K) for K in exh.levels)
    levels = [tuple(c.rep for c in d.unbounded) for d in decs]
    bonds = []
    for j in range(1, len(decs)):
        owner = {}
        for c in decs[j - 1].unbounded:
            for v in c.vertices:
                owner[v] = c.rep
        b = {}
        for c in decs[j].unbounded:
            parents = {owner.get(v) for v in c.vertices}
            if len(parents) != 1 or None in parents:
                raise ValueError(f"level {j + 1} component {c.rep} is not inside one level-{j} component")
            b[c.rep] = parents.pop()
        bonds.append(b)
    return EndTower.from_bonds(levels, bonds, provenance="graph-derived",
                               exhaustion=exh, decompositions=decs)


@dataclass(frozen=True)
class EndsReport:
    sizes: tuple
    count_at_depth: int
    stabilized: bool
    stabilized_count: int | None


def ends_report(t: EndTower) -> EndsReport:
    """Level sizes and a stabilization heuristic.

    ``count_at_depth`` is a lower bound for the number of ends.  The tower is
    flagged stabilized when every bond in the trailing half is a bijection;
    this is a guess from a truncation, not a proof.
    """
    n = t.depth
    count = len(t.levels[-1]) if n else 0
    nbonds = max(n - 1, 0)
    trailing = range(nbonds - (nbonds + 1) // 2, nbonds)
    stable = all(len(t.levels[j]) == len(t.levels[j + 1]) for j in trailing)
    return EndsReport(t.sizes, count, stable, count if stable else None)


def enumerate_prefixes(t: EndTower, k: int) -> list[EndPrefix]:
    if not 0 <= k <= t.depth:
        raise DepthOutOfRange(f"depth {k} outside 0..{t.depth}")
    if k == 0:
        return [EndPrefix(())]
    return sorted((EndPrefix(t.thread(k, u)) for u in t.levels[k - 1]), key=lambda p: p.thread)


class Relation(enum.Enum):
    DISJOINT = "disjoint"
    CONTAINS = "contains"
    CONTAINED = "contained"
    EQUAL = "equal"


def basic_open_relation(t: EndTower, a, b) -> Relation:
    """How the basic open sets of ends through ``a = (k, u)`` and ``b`` relate.

    ``CONTAINS`` means the ends through ``a`` include those through ``b``.
    """
    (k, u), (k2, u2) = a, b
    for lvl, x in (a, b):
        if not 1 <= lvl <= t.depth or x not in t._index[lvl - 1]:
            raise BadIndices(f"({lvl}, {x}) is not a tower component")
    if (k, u) == (k2, u2):
        return Relation.EQUAL
    if k == k2:
        return Relation.DISJOINT
    if k < k2:
        return Relation.CONTAINS if t.ancestor(k2, u2, k) == u else Relation.DISJOINT
    return Relation.CONTAINED if t.ancestor(k, u, k2) == u2 else Relation.DISJOINT


def canonical_code(t: EndTower) -> bytes:
    """Label-free code of the layered fibre tree (AHU style).

    Two towers get equal codes iff there are level-wise bijections commuting
    with the bonds.
    """
    codes = {}
    for i in range(t.depth, 0, -1):
        for u in t.levels[i - 1]:
            kids = t.children(i, u) if i < t.depth else ()
            codes[(i, u)] = b"(" + b"".join(sorted(codes[(i + 1, w)] for w in kids)) + b")"
    top = b"".join(sorted(codes[(1, u)] for u in t.levels[0])) if t.depth else b""
    return b"T%d:(" % t.depth + top + b")"


def subsample_tower(t: EndTower, indices) -> EndTower:
    """Keep the levels at 0-based ``indices`` and compose the bonds between them."""
    indices = list(indices)
    if any(i < 0 or i >= t.depth for i in indices) or any(a >= b for a, b in zip(indices, indices[1:])):
        raise BadIndices(f"bad level indices {indices}")
    levels = [t.levels[i] for i in indices]
    bonds = [{u: t.ancestor(b + 1, u, a + 1) for u in t.levels[b]} for a, b in zip(indices, indices[1:])]
    return EndTower.from_bonds(levels, bonds, provenance=t.provenance)


def cantor_tower(depth: int) -> EndTower:
    """Level ``i`` is ``{0,1}^i`` (as integers ``0..2^i-1``), bonds drop the last bit."""
    levels = [range(2 ** i) for i in range(1, depth + 1)]
    bonds = [{w: w // 2 for w in range(2 ** i)} for i in range(2, depth + 1)]
    return EndTower.from_bonds(levels, bonds, provenance="imported")


def point_tower(depth: int) -> EndTower:
    """One element per level."""
    return EndTower.from_bonds([(0,)] * depth, [{0: 0}] * max(depth - 1, 0), provenance="imported")


# -- maps between towers -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TowerMap:
    source: EndTower
    target: EndTower
    maps: tuple

    @property
    def depth(self) -> int:
        return len(self.maps)

    def __call__(self, i: int, u):
        return self.maps[i - 1][u]

    def commutes(self) -> bool:
        for i in range(2, self.depth + 1):
            for u in self.source.levels[i - 1]:
                if self.target.parent(i, self.maps[i - 1][u]) != self.maps[i - 2][self.source.parent(i, u)]:
                    return False
        return True

    def injective_levels(self) -> tuple:
        return tuple(len(set(m.values())) == len(m) for m in self.maps)

    def surjective_levels(self) -> tuple:
        return tuple(set(m.values()) == set(self.target.levels[j]) for j, m in enumerate(self.maps))

    def is_bijective(self) -> bool:
        return all(self.injective_levels()) and all(self.surjective_levels())

    def is_identity(self) -> bool:
        return all(all(k == v for k, v in m.items()) for m in self.maps) and self.source == self.target

    def then(self, other: "TowerMap") -> "TowerMap":
        """``other ∘ self``."""
        if other.depth != self.depth:
            raise DepthMismatch("maps have different depths")
        maps = tuple({u: other.maps[j][w] for u, w in m.items()} for j, m in enumerate(self.maps))
        return TowerMap(self.source, other.target, maps)


def identity_map(t: EndTower) -> TowerMap:
    return TowerMap(t, t, tuple({u: u for u in lv} for lv in t.levels))


def induced_tower_map(source_tower: EndTower, target_tower: EndTower, vertex_map) -> TowerMap:
    """Map of towers induced by a vertex map ``f`` between their windows.

    Each source level must satisfy ``f(window - K_i) ⊆ window' - K'_i``, which
    holds when the source exhaustion is the pullback of the target one.  Every
    unbounded source component must land inside one unbounded target
    component, otherwise :class:`NotProper` is raised with the offending
    vertex.
    """
    if source_tower.depth != target_tower.depth:
        raise DepthMismatch(f"depths {source_tower.depth} and {target_tower.depth}")
    if source_tower.decompositions is None or target_tower.decompositions is None:
        raise ValueError("induced maps need graph-derived towers")
    lookup = vertex_map.__getitem__ if hasattr(vertex_map, "__getitem__") else vertex_map
    maps = []
    for i in range(1, source_tower.depth + 1):
        tdec = target_tower.decompositions[i - 1]
        owner = {}
        for c in tdec.components:
            for v in c.vertices:
                owner[v] = c
        m = {}
        for s in source_tower.decompositions[i - 1].unbounded:
            try:
                images = {lookup(v) for v in s.vertices}
            except KeyError as exc:
                raise NotProper(f"vertex {exc} has no image") from None
            hit = set()
            for w in images:
                if w in tdec.compactum:
                    raise NotProper(f"level {i}: component {s.rep} meets K'_{i} at {w}")
                if w not in owner:
                    raise NotProper(f"level {i}: image {w} leaves the target window")
                hit.add(owner[w].rep)
            if len(hit) != 1:
                raise NotProper(f"level {i}: component {s.rep} spreads over target components {sorted(hit)}")
            rep = hit.pop()
            c = next(x for x in tdec.components if x.rep == rep)
            if not c.unbounded:
                raise NotProper(f"level {i}: unbounded component {s.rep} lands in bounded component {rep}")
            m[s.rep] = rep
        maps.append(m)
    tm = TowerMap(source_tower, target_tower, tuple(maps))
    if not tm.commutes():
        raise NotProper("induced level maps do not commute with the bonds")
    return tm


# -- end identification ------------------------------------------------------

def _quotient(tM: EndTower, eM: EndPrefix, tN: EndTower, eN: EndPrefix):
    if not (tM.depth == tN.depth == eM.depth == eN.depth):
        raise DepthMismatch(
            f"depths: towers {tM.depth}, {tN.depth}; prefixes {eM.depth}, {eN.depth}")
    check_prefix(tM, eM)
    check_prefix(tN, eN)
    mapsM, mapsN, levels = [], [], []
    for i in range(1, tM.depth + 1):
        mM, mN = {eM.at(i): 0}, {eN.at(i): 0}
        k = 1
        for u in tM.level(i):
            if u != eM.at(i):
                mM[u] = k
                k += 1
        for u in tN.level(i):
            if u != eN.at(i):
                mN[u] = k
                k += 1
        mapsM.append(mM)
        mapsN.append(mN)
        levels.append(range(k))
    bonds = []
    for i in range(2, tM.depth + 1):
        b = {}
        for t, m in ((tM, mapsM), (tN, mapsN)):
            for u in t.level(i):
                b[m[i - 1][u]] = m[i - 2][t.parent(i, u)]
        bonds.append(b)
    q = EndTower.from_bonds(levels, bonds, provenance="quotient")
    return q, TowerMap(tM, q, tuple(mapsM)), TowerMap(tN, q, tuple(mapsN))


def quotient_tower(tM: EndTower, eM: EndPrefix, tN: EndTower, eN: EndPrefix) -> EndTower:
    """Disjoint union of two towers with the threads ``eM`` and ``eN`` merged.

    Level ``i`` has ``|U_i(M)| + |U_i(N)| - 1`` elements; id 0 is the merged
    thread.
    """
    return _quotient(tM, eM, tN, eN)[0]


# -- profinite presentations ----------------------------------------------------

def normalize_tower(t: EndTower) -> EndTower:
    """Restrict every level to the image of the deepest level.

    The provenance records whether the images had already stabilized one
    level earlier; if not, deeper levels might prune further.
    """
    n = t.depth
    if n == 0:
        raise EmptyLevelAfterNormalization("tower has no levels")

    def images(top):
        img = [None] * top
        img[top - 1] = set(t.levels[top - 1])
        for i in range(top - 1, 0, -1):
            img[i - 1] = {t.parent(i + 1, w) for w in img[i]}
        return img

    img = images(n)
    if any(not s for s in img):
        raise EmptyLevelAfterNormalization("a level is empty after pruning")
    stable = n < 2 or images(n - 1)[: n - 2] == img[: n - 2]
    levels = [tuple(sorted(s)) for s in img]
    bonds = [{w: t.parent(i + 1, w) for w in img[i]} for i in range(1, n)]
    prov = "normalized" if stable else "normalized(unstable)"
    return EndTower.from_bonds(levels, bonds, provenance=prov)


def tree_realization(t: EndTower):
    """A locally finite tree whose end tower is the normalized ``t``.

    Tree vertices are a root, one vertex per element of every level, and an
    infinite ray above each deepest-level vertex.  Returns the generator, its
    exhaustion by balls about the root, and the resulting tower (whose ids
    are tree vertex ids).
    """
    norm = normalize_tower(t)
    n = norm.depth
    vid = {}
    k = 1
    for i in range(1, n + 1):
        for u in norm.level(i):
            vid[(i, u)] = k
            k += 1
    adj = {0: []}
    for v in vid.values():
        adj[v] = []
    for u in norm.level(1):
        adj[0].append(vid[(1, u)])
        adj[vid[(1, u)]].append(0)
    for i in range(2, n + 1):
        for u in norm.level(i):
            a, b = vid[(i, u)], vid[(i - 1, norm.parent(i, u))]
            adj[a].append(b)
            adj[b].append(a)
    leaves = [vid[(n, u)] for u in norm.level(n)]
    gen = RayedTreeGenerator(adj, leaves, base=0)
    exh = efficient_exhaustion(gen, n, n + 1)
    realized = build_tower(exh.window, exh)
    object.__setattr__(realized, "provenance", "realized-tree")
    return gen, exh, realized


# -- text formats --------------------------------------------------------------

def format_tower(t: EndTower) -> str:
    """TOWER v1: ``level <i> <size>`` lines, then ``bond <i> <child> <parent>``
    lines where ``i`` is the child level and indices are 0-based positions."""
    lines = ["tower v1"]
    for i, lv in enumerate(t.levels, 1):
        lines.append(f"level {i} {len(lv)}")
    for i in range(2, t.depth + 1):
        for c, u in enumerate(t.levels[i - 1]):
            lines.append(f"bond {i} {c} {t.index(i - 1, t.parent(i, u))}")
    return "\n".join(lines) + "\n"


def parse_tower(text: str) -> EndTower:
    """Read TOWER v1 text.  Ids are positions; bonds need not be surjective."""
    sizes = {}
    bonds = {}
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if not header:
            if parts != ["tower", "v1"]:
                raise ParseError("expected 'tower v1' header", lineno)
            header = True
            continue
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", lineno) from None
        if parts[0] == "level" and len(nums) == 2:
            i, size = nums
            if i != len(sizes) + 1 or size < 0:
                raise ParseError(f"levels must be listed in order 1, 2, ...; got {i}", lineno)
            sizes[i] = size
        elif parts[0] == "bond" and len(nums) == 3:
            i, c, p = nums
            if i not in sizes or i < 2 or not 0 <= c < sizes[i] or not 0 <= p < sizes[i - 1]:
                raise ParseError(f"bond out of range: {line!r}", lineno)
            if (i, c) in bonds:
                raise ParseError(f"duplicate bond for {i} {c}", lineno)
            bonds[(i, c)] = p
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno)
    if not header:
        raise ParseError("empty input")
    n = len(sizes)
    for i in range(2, n + 1):
        for c in range(sizes[i]):
            if (i, c) not in bonds:
                raise ParseError(f"missing bond for level {i} element {c}")
    levels = [range(sizes[i]) for i in range(1, n + 1)]
    bond_maps = [{c: bonds[(i, c)] for c in range(sizes[i])} for i in range(2, n + 1)]
    return EndTower.from_bonds(levels, bond_maps, provenance="imported")


def emit_dot(t: EndTower, name: str = "tower") -> str:
    """DOT digraph of the layered fibre tree: root ``L0_0`` then ``L<i>_<index>``."""
    if t.depth == 0 or not t.levels[0]:
        raise EmptyTower("nothing to draw")
    lines = [f"digraph {name} {{", "  rankdir=TB;", "  L0_0 [label=\"root\"];"]
    for i, lv in enumerate(t.levels, 1):
        for k, u in enumerate(lv):
            lines.append(f"  L{i}_{k} [label=\"{u}\"];")
    for k, _ in enumerate(t.levels[0]):
        lines.append(f"  L0_0 -> L1_{k};")
    for i in range(2, t.depth + 1):
        for k, u in enumerate(t.levels[i - 1]):
            lines.append(f"  L{i - 1}_{t.index(i - 1, t.parent(i, u))} -> L{i}_{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"
