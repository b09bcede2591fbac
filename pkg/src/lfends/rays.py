"""Rays pointing to prescribed ends, retractions onto a ray, and embedded
end trees, all certified inside a finite window."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    NonInjectiveEndMap,
    NotRayEfficient,
    ParseError,
    RayNotProperInWindow,
    WindowTooSmall,
)
from .exhaust import (
    Exhaustion,
    check_ray_in_window,
    is_initial_segment,
    pullback_exhaustion,
    ray_exit_indices,
)
from .graphs import Window, path_window
from .tower import EndPrefix, EndTower, TowerMap, build_tower, check_prefix, induced_tower_map


def shortest_path(adj, start, allowed, targets):
    """Shortest path from ``start`` to ``targets`` moving inside ``allowed``.

    Among the nearest targets the smallest id wins.  Returns ``None`` when no
    target is reachable.
    """
    if start in targets:
        return [start]
    parent = {start: None}
    layer = [start]
    while layer:
        nxt = []
        for v in layer:
            for u in adj[v]:
                if u not in parent and u in allowed:
                    parent[u] = v
                    nxt.append(u)
        hits = [u for u in nxt if u in targets]
        if hits:
            v = min(hits)
            path = []
            while v is not None:
                path.append(v)
                v = parent[v]
            return path[::-1]
        layer = nxt
    return None


def splice(P, Q):
    """Concatenate ``P`` and ``Q`` (``Q[0] == P[-1]``) cutting out any loop.

    The cut happens at the last vertex of ``Q`` already on ``P``, so the
    result is injective whenever ``P`` and ``Q`` are.
    """
    onP = {v: a for a, v in enumerate(P)}
    b = max(k for k, v in enumerate(Q) if v in onP)
    return list(P[: onP[Q[b]]]) + list(Q[b:])


@dataclass(frozen=True)
class Ray:
    vertices: tuple
    exit_indices: tuple = ()

    def __len__(self):
        return len(self.vertices)

    def index(self, v) -> int:
        return self.vertices.index(v)


def _level_components(tower: EndTower, eps: EndPrefix):
    return [tower.component(i, eps.at(i)) for i in range(1, tower.depth + 1)]


def find_ray(window: Window, exh: Exhaustion, tower: EndTower, eps: EndPrefix) -> Ray:
    """Embedded ray from the window centre to the boundary pointing to ``eps``.

    Arc ``i`` runs from ``p_i`` in the component ``eps_i`` to the first point
    ``p_{i+1}`` of ``eps_{i+1}``, preferably through ``eps_i ∩ K_{i+1}``; the
    last arc runs inside ``eps_n`` to the boundary.  Loops are cut at the
    last meeting point.
    """
    check_prefix(tower, eps)
    n = tower.depth
    if n == 0:
        raise ValueError("need at least one level")
    comps = _level_components(tower, eps)
    start = getattr(window, "center", None)
    if start is None or start not in exh.levels[0]:
        raise RayNotProperInWindow("the first level must contain the window centre")
    adj = window.adj
    path = shortest_path(adj, start, exh.levels[0] | comps[0], comps[0])
    if path is None:
        raise WindowTooSmall("cannot reach the first component")
    for i in range(n - 1):
        p = path[-1]
        arc = shortest_path(adj, p, (comps[i] & exh.levels[i + 1]) | comps[i + 1], comps[i + 1])
        if arc is None:
            arc = shortest_path(adj, p, comps[i], comps[i + 1])
        if arc is None:
            raise WindowTooSmall(f"component at level {i + 2} unreachable")
        path = splice(path, arc)
    tail = shortest_path(adj, path[-1], comps[-1], window.boundary)
    if tail is None:
        raise WindowTooSmall("last component does not reach the boundary")
    path = splice(path, tail)
    verts = tuple(path)
    check_ray_in_window(window, verts)
    return Ray(verts, tuple(ray_exit_indices(verts, exh.levels)))


def points_to(ray, tower: EndTower) -> EndPrefix:
    """The thread of components containing the ray's tail beyond each level."""
    verts = tuple(getattr(ray, "vertices", ray))
    exh = tower.exhaustion
    window = exh.window
    check_ray_in_window(window, verts)
    thread = []
    for i, K in enumerate(exh.levels, 1):
        b = max((t for t, v in enumerate(verts) if v in K), default=-1)
        if b + 1 >= len(verts):
            raise RayNotProperInWindow(f"ray does not leave K_{i}")
        c = tower.decompositions[i - 1].component_of(verts[b + 1])
        if not c.unbounded:
            raise RayNotProperInWindow(f"ray tail beyond K_{i} is in a bounded component")
        thread.append(c.rep)
    return EndPrefix(tuple(thread))


# -- retraction onto a ray ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class Retraction:
    """Vertex map onto ray parameters.

    ``a[i]`` is the first ray index on the frontier of ``K_{i+1}`` and
    ``b[i]`` the last ray index inside it (0-based lists, level ``i + 1``).
    """

    ray: tuple
    values: dict = field(repr=False)
    a: tuple
    b: tuple
    exhaustion: Exhaustion = field(repr=False)

    def __call__(self, v) -> int:
        return self.values[v]

    def identity_on_ray(self) -> bool:
        return all(self.values[v] == t for t, v in enumerate(self.ray))

    def properness_violations(self) -> list:
        """Pairs ``(i, v)`` with ``values(v) <= a_i`` but ``v`` outside ``K_{i+1}``."""
        levels = self.exhaustion.levels
        bad = []
        for i in range(1, len(levels)):
            ai, nxt = self.a[i - 1], levels[i]
            bad += [(i, v) for v, x in self.values.items() if x <= ai and v not in nxt]
        return bad

    def interleaved(self) -> bool:
        seq = []
        for ai, bi in zip(self.a, self.b):
            seq += [ai, bi]
        return all(seq[k] <= seq[k + 1] if k % 2 == 0 else seq[k] < seq[k + 1]
                   for k in range(len(seq) - 1))

    def max_edge_stretch(self) -> int:
        w = self.exhaustion.window
        return max((abs(self.values[u] - self.values[v]) for u, v in w.edges), default=0)


def build_retraction(window: Window, exh: Exhaustion, ray) -> Retraction:
    """Retraction sending off-ray vertices of ``K_i - K_{i-1}`` to ``a_i``.

    Vertices outside every level go to ``b_n + 1``.  With this rule the
    preimage of ``[0, b_i]`` is exactly ``K_i``.
    """
    verts = tuple(getattr(ray, "vertices", ray))
    check_ray_in_window(window, verts)
    if exh.window is not window:
        raise ValueError("exhaustion belongs to a different window")
    for i, K in enumerate(exh.levels, 1):
        if not is_initial_segment(verts, K):
            raise NotRayEfficient(f"ray meets K_{i} in more than an initial segment")
    b = ray_exit_indices(verts, exh.levels)
    if b and b[-1] + 1 >= len(verts):
        raise NotRayEfficient("ray does not leave the last level")
    a = []
    for K in exh.levels:
        frontier = {v for v in K if any(u not in K for u in window.adj[v])}
        a.append(min(t for t, v in enumerate(verts) if v in frontier))
    position = {v: t for t, v in enumerate(verts)}
    sentinel = b[-1] + 1 if b else 0
    values = {}
    for v in window.vertices:
        if v in position:
            values[v] = position[v]
        else:
            lvl = exh.level_of(v)
            values[v] = a[lvl - 1] if lvl is not None else sentinel
    return Retraction(verts, values, tuple(a), tuple(b), exh)


def halfline_tower(ray_exits, length: int):
    """Tower of the path ``0..length`` exhausted by ``[0, b_i]``."""
    w = path_window(length)
    exh = Exhaustion.from_levels(w, [range(b + 1) for b in ray_exits])
    return w, exh, build_tower(w, exh)


def ray_tower_maps(tower: EndTower, retraction: Retraction):
    """Tower maps of the ray inclusion and of the retraction.

    Returns ``(halfline_tower, inclusion_map, retraction_map)``; their
    composite ``retraction ∘ inclusion`` is the identity of the halfline tower.
    """
    verts = retraction.ray
    hw, hexh, ht = halfline_tower(retraction.b, len(verts) - 1)
    incl = dict(enumerate(verts))
    pulled = pullback_exhaustion(hw, incl, tower.exhaustion)
    if pulled.levels != hexh.levels:
        raise NotRayEfficient("ray pullback is not the initial-segment exhaustion")
    inc = induced_tower_map(ht, tower, incl)
    ret = induced_tower_map(tower, ht, retraction.values)
    return ht, inc, ret


# -- embedded end trees --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TreeEmbedding:
    """A subtree of the window graph rooted at ``root``.

    ``parent`` is the tree structure on graph vertices, ``hubs`` the branch
    vertex chosen for each tower component ``(level, id)``.  The tree is a
    window of its own (tree edges only) exhausted by its intersections with
    the graph's levels.
    """

    root: int
    parent: dict = field(repr=False)
    hubs: dict = field(repr=False)
    window: Window = field(repr=False)
    exhaustion: Exhaustion = field(repr=False)
    tower: EndTower = field(repr=False)
    tower_map: TowerMap = field(repr=False)

    @property
    def vertices(self) -> frozenset:
        return self.window.vertices

    def path_to_root(self, v) -> list:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def branch_path(self, i: int, u) -> list:
        """Graph path from the hub of ``(i, u)`` up to its parent hub (or root)."""
        stop = self.root if i == 1 else self.hubs[(i - 1, self.tower_map.target.parent(i, u))]
        path = [self.hubs[(i, u)]]
        while path[-1] != stop and self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path


def _tree_from_parent(graph_window: Window, exh: Exhaustion, tower: EndTower, root, parent, hubs):
    verts = frozenset(parent)
    adj = {v: [] for v in verts}
    for v, p in parent.items():
        if p is not None:
            adj[v].append(p)
            adj[p].append(v)
    adj = {v: tuple(sorted(ns)) for v, ns in adj.items()}
    tw = Window(vertices=verts, adj=adj, boundary=verts & graph_window.boundary)
    texh = pullback_exhaustion(tw, {v: v for v in verts}, exh)
    tt = build_tower(tw, texh)
    tmap = induced_tower_map(tt, tower, {v: v for v in verts})
    return TreeEmbedding(root, dict(parent), dict(hubs), tw, texh, tt, tmap)


def tree_from_edges(window: Window, exh: Exhaustion, tower: EndTower, edges, root) -> TreeEmbedding:
    """Wrap an arbitrary subtree of the window (given by its edges)."""
    adj = {}
    for u, v in edges:
        if v not in window.adj.get(u, ()):
            raise ValueError(f"{u} - {v} is not a window edge")
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    adj.setdefault(root, [])
    parent = {root: None}
    stack = [root]
    while stack:
        v = stack.pop()
        for u in sorted(adj[v]):
            if u not in parent:
                parent[u] = v
                stack.append(u)
    if len(parent) != len(adj) or len(set(map(frozenset, edges))) != len(adj) - 1:
        raise ValueError("edges do not form a tree containing the root")
    return _tree_from_parent(window, exh, tower, root, parent, {})


def embed_end_tree(window: Window, exh: Exhaustion, tower: EndTower) -> TreeEmbedding:
    """Subtree with one branch vertex per tower component and level.

    The hub of a level-``i`` component is its smallest vertex adjacent to
    ``K_i``.  It is joined to the tree by a shortest path through the parent
    component inside ``K_i`` (falling back to the whole parent component);
    deepest hubs get a tail to the window boundary inside their component.
    """
    root = getattr(window, "center", None)
    if root is None or root not in exh.levels[0]:
        raise RayNotProperInWindow("the first level must contain the window centre")
    parent = {root: None}
    hubs = {}
    adj = window.adj

    def attach(path):
        # path runs from a new vertex to an existing tree vertex
        for x, y in zip(path, path[1:]):
            if x not in parent:
                parent[x] = y

    for i in range(1, tower.depth + 1):
        K = exh.levels[i - 1]
        for u in tower.level(i):
            C = tower.component(i, u)
            x = min(v for v in C if any(w in K for w in adj[v]))
            hubs[(i, u)] = x
            if x in parent:
                continue
            region = K if i == 1 else tower.component(i - 1, tower.parent(i, u))
            tree_now = set(parent)
            path = shortest_path(adj, x, (region & K) | {x}, tree_now)
            if path is None:
                path = shortest_path(adj, x, region | {x}, tree_now)
            if path is None:
                raise WindowTooSmall(f"hub {x} cannot be joined to the tree")
            attach(path)
    n = tower.depth
    for u in tower.level(n):
        x = hubs[(n, u)]
        C = tower.component(n, u)
        free = (C - set(parent)) | {x}
        tail = shortest_path(adj, x, free, window.boundary)
        if tail is None:
            raise WindowTooSmall(f"no free tail from hub {x} to the boundary")
        for y, z in zip(tail, tail[1:]):
            parent[z] = y
    emb = _tree_from_parent(window, exh, tower, root, parent, hubs)
    return emb


# -- retraction onto an embedded tree --------------------------------------------

@dataclass(frozen=True, eq=False)
class TreeRetraction:
    values: dict = field(repr=False)
    level_choice: tuple = field(repr=False)
    tower_map: TowerMap = field(repr=False)
    embedding: TreeEmbedding = field(repr=False)

    def __call__(self, v):
        return self.values[v]

    def end_level_identity(self) -> bool:
        """E(ρ)∘E(τ) = id on the tree tower."""
        return self.embedding.tower_map.then(self.tower_map).is_identity()

    def preimage_levels_match(self) -> bool:
        """The preimage of each tree level ``T ∩ K_i`` is exactly ``K_i``."""
        ex = self.embedding.exhaustion
        gx = self.embedding.tower_map.target.exhaustion
        return all(frozenset(v for v, x in self.values.items() if x in T) == K
                   for T, K in zip(ex.levels, gx.levels))


def tree_retraction(window: Window, exh: Exhaustion, emb: TreeEmbedding) -> TreeRetraction:
    """Map every vertex to a tree vertex, inverting the end map of the tree.

    A vertex first met in ``K_{i+1}`` lies in a component ``C`` of
    ``window - K_i`` and goes to the top vertex of the tree component over
    ``C``; vertices of ``K_1`` go to the root.  Components missed by the tree
    borrow the smallest tree component below the choice for their parent.
    """
    m = emb.tower_map
    if not all(m.injective_levels()):
        lvl = m.injective_levels().index(False) + 1
        raise NonInjectiveEndMap(f"two tree ends map to one graph end at level {lvl}")
    tt, gt = emb.tower, m.target
    tparent = emb.parent
    n = gt.depth
    choice = []
    for i in range(1, n + 1):
        inverse = {c: d for d, c in m.maps[i - 1].items()}
        pick = {}
        for c in gt.level(i):
            if c in inverse:
                pick[c] = inverse[c]
            elif i == 1:
                pick[c] = tt.level(1)[0]
            else:
                up = choice[-1][gt.parent(i, c)]
                pick[c] = tt.children(i - 1, up)[0]
        choice.append(pick)
    tops = []
    for i in range(1, n + 1):
        Ki = emb.exhaustion.levels[i - 1]
        top = {}
        for d in tt.level(i):
            D = tt.component(i, d)
            top[d] = next(v for v in sorted(D) if tparent[v] in Ki)
        tops.append(top)
    values = {}
    decs = gt.decompositions
    owner = []
    for dec in decs:
        own = {}
        for c in dec.components:
            for v in c.vertices:
                own[v] = c.rep
        owner.append(own)
    for v in window.vertices:
        lvl = exh.level_of(v)
        if lvl == 1:
            values[v] = emb.root
            continue
        i = n if lvl is None else lvl - 1
        c = owner[i - 1][v]
        values[v] = tops[i - 1][choice[i - 1][c]]
    tmap = induced_tower_map(gt, tt, values)
    return TreeRetraction(values, tuple(choice), tmap, emb)


# -- ray v1 ----------------------------------------------------------------------

def format_ray(ray) -> str:
    verts = getattr(ray, "vertices", ray)
    return "ray v1\n" + "".join(f"{v}\n" for v in verts)


def parse_ray(text: str) -> tuple:
    tokens = text.split()
    if tokens[:2] != ["ray", "v1"]:
        raise ParseError("expected 'ray v1' header", 1)
    try:
        verts = tuple(int(x) for x in tokens[2:])
    except ValueError as exc:
        raise ParseError(f"bad vertex id: {exc}") from None
    if not verts:
        raise ParseError("ray has no vertices")
    return verts
