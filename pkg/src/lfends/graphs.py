"""Connected, locally finite graphs given by a neighbour function.

A generator never stores the (usually infinite) graph.  It knows how to list
the neighbours of a vertex, and :func:`materialize_ball` turns it into a finite
:class:`Ball` by breadth first search from a centre.  Vertex ids are canonical
non-negative integers per family, so repeated materializations agree.

Families
--------
``line``            the integers; id of ``n`` is its zigzag code
``halfline``        the non-negative integers
``grid(d)``         the lattice Z^d, ids by iterated Cantor pairing of zigzag codes
``regular_tree(d)`` the d-regular tree, modelled as words over ``d`` letters with
                    no letter repeated twice in a row; ids in length-lex order
``free_group(k)``   Cayley graph of the free group on ``k`` generators (a
                    2k-regular tree); reduced words in length-lex order
``binary_tree``     rooted binary tree in heap numbering (root has degree 2)
``comb``            spine 0,1,2,... with an infinite tooth hanging off every
                    spine vertex; vertex ``(n, h)`` has id ``pair(n, h)``
``edge_list``       a finite graph read from GRAPH v1 text
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from math import isqrt

from .errors import (
    BudgetExceeded,
    DisconnectedInput,
    NonSimpleInput,
    ParseError,
    UnknownVertex,
)

DEFAULT_CAP = 10**7


# -- integer encodings -------------------------------------------------------

def zigzag(n: int) -> int:
    """0, 1, -1, 2, -2, ... -> 0, 1, 2, 3, 4, ..."""
    return 2 * n - 1 if n > 0 else -2 * n


def unzigzag(z: int) -> int:
    return (z + 1) // 2 if z % 2 else -(z // 2)


def pair(a: int, b: int) -> int:
    """Cantor pairing of two non-negative integers."""
    s = a + b
    return s * (s + 1) // 2 + b


def unpair(z: int) -> tuple[int, int]:
    w = (isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def encode_point(point) -> int:
    if len(point) == 1:
        return zigzag(point[0])
    return pair(zigzag(point[0]), encode_point(point[1:]))


def decode_point(v: int, d: int) -> tuple[int, ...]:
    if d == 1:
        return (unzigzag(v),)
    a, b = unpair(v)
    return (unzigzag(a),) + decode_point(b, d - 1)


# -- generators --------------------------------------------------------------

class GraphGenerator:
    """Implicit connected, locally finite, simple graph.

    Subclasses implement ``_neighbors`` and ``contains``.  ``neighbors``
    validates the vertex and returns a sorted tuple.
    """

    family = "abstract"

    def __init__(self, basepoint: int, degree_bound: int, params=None):
        self.params = dict(params or {})
        self.degree_bound = degree_bound
        if not self.contains(basepoint):
            raise UnknownVertex(basepoint)
        self.basepoint = basepoint

    def contains(self, v: int) -> bool:
        raise NotImplementedError

    def _neighbors(self, v: int):
        raise NotImplementedError

    def neighbors(self, v: int) -> tuple[int, ...]:
        if not self.contains(v):
            raise UnknownVertex(v)
        return tuple(sorted(self._neighbors(v)))

    def origin_distance(self, v: int) -> int | None:
        """Graph distance from the family's origin, when known in closed form."""
        return None

    @property
    def origin(self) -> int:
        return 0

    def describe(self) -> str:
        if not self.params:
            return self.family
        args = ",".join(str(v) for k, v in sorted(self.params.items()) if k != "base")
        return f"{self.family}({args})" if args else self.family

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()} base={self.basepoint}>"


class LineGenerator(GraphGenerator):
    family = "line"

    def __init__(self, base: int = 0):
        super().__init__(base, 2)

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def _neighbors(self, v):
        n = unzigzag(v)
        return [zigzag(n - 1), zigzag(n + 1)]

    def origin_distance(self, v):
        return abs(unzigzag(v))


class HalflineGenerator(GraphGenerator):
    family = "halfline"

    def __init__(self, base: int = 0):
        super().__init__(base, 2)

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def _neighbors(self, v):
        return [v - 1, v + 1] if v > 0 else [1]

    def origin_distance(self, v):
        return v


class GridGenerator(GraphGenerator):
    family = "grid"

    def __init__(self, d: int = 2, base: int = 0):
        if d < 1:
            raise ValueError("grid dimension must be positive")
        self.d = d
        super().__init__(base, 2 * d, {"d": d})

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def point(self, v):
        return decode_point(v, self.d)

    def _neighbors(self, v):
        p = list(decode_point(v, self.d))
        out = []
        for k in range(self.d):
            for step in (-1, 1):
                q = p.copy()
                q[k] += step
                out.append(encode_point(q))
        return out

    def origin_distance(self, v):
        return sum(abs(x) for x in decode_point(v, self.d))


class WordTreeGenerator(GraphGenerator):
    """Tree of words over ``alphabet`` letters where the letter following
    ``a`` may be anything except ``forbid(a)``.  Every vertex has degree
    ``alphabet``.  Ids enumerate words in length-lex order, where the order on
    words of a fixed length is the mixed-radix order of (first letter,
    choice indices of the later letters).
    """

    def __init__(self, alphabet: int, base: int, params):
        if alphabet < 2:
            raise ValueError("tree degree must be at least 2")
        self.alphabet = alphabet
        super().__init__(base, alphabet, params)

    def forbid(self, a: int) -> int:
        raise NotImplementedError

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def _count(self, n):
        d = self.alphabet
        return 1 if n == 0 else d * (d - 1) ** (n - 1)

    def word(self, v: int) -> tuple[int, ...]:
        n, offset = 0, 0
        while v >= offset + self._count(n):
            offset += self._count(n)
            n += 1
        if n == 0:
            return ()
        rank = v - offset
        q = self.alphabet - 1
        digits = []
        for _ in range(n - 1):
            rank, c = divmod(rank, q)
            digits.append(c)
        word = [rank]
        for c in reversed(digits):
            allowed = [b for b in range(self.alphabet) if b != self.forbid(word[-1])]
            word.append(allowed[c])
        return tuple(word)

    def index(self, word) -> int:
        n = len(word)
        offset = sum(self._count(j) for j in range(n))
        if n == 0:
            return 0
        q = self.alphabet - 1
        rank = word[0]
        for prev, b in zip(word, word[1:]):
            f = self.forbid(prev)
            if b == f:
                raise UnknownVertex(word)
            rank = rank * q + (b if b < f else b - 1)
        return offset + rank

    def _neighbors(self, v):
        w = self.word(v)
        out = [self.index(w[:-1])] if w else []
        for b in range(self.alphabet):
            if w and b == self.forbid(w[-1]):
                continue
            out.append(self.index(w + (b,)))
        return out

    def origin_distance(self, v):
        return len(self.word(v))


class RegularTreeGenerator(WordTreeGenerator):
    family = "regular_tree"

    def __init__(self, d: int = 3, base: int = 0):
        super().__init__(d, base, {"d": d})

    def forbid(self, a):
        return a


class FreeGroupGenerator(WordTreeGenerator):
    """Letters ``2j`` and ``2j+1`` are the generator ``x_j`` and its inverse."""

    family = "free_group"

    def __init__(self, k: int = 2, base: int = 0):
        super().__init__(2 * k, base, {"k": k})

    def forbid(self, a):
        return a ^ 1


class BinaryTreeGenerator(GraphGenerator):
    family = "binary_tree"

    def __init__(self, base: int = 0):
        super().__init__(base, 3)

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def _neighbors(self, v):
        out = [2 * v + 1, 2 * v + 2]
        if v > 0:
            out.append((v - 1) // 2)
        return out

    def origin_distance(self, v):
        return (v + 1).bit_length() - 1


class CombGenerator(GraphGenerator):
    family = "comb"

    def __init__(self, base: int = 0):
        super().__init__(base, 3)

    def contains(self, v):
        return isinstance(v, int) and v >= 0

    def _neighbors(self, v):
        n, h = unpair(v)
        out = [pair(n, h + 1)]
        if h > 0:
            out.append(pair(n, h - 1))
        else:
            out.append(pair(n + 1, 0))
            if n > 0:
                out.append(pair(n - 1, 0))
        return out

    def origin_distance(self, v):
        n, h = unpair(v)
        return n + h


class ExplicitGraphGenerator(GraphGenerator):
    """A finite graph held as an adjacency dictionary."""

    family = "edge_list"

    def __init__(self, adjacency, base=None, params=None):
        self.adjacency = {v: tuple(sorted(ns)) for v, ns in adjacency.items()}
        if base is None:
            base = min(self.adjacency)
        bound = max((len(ns) for ns in self.adjacency.values()), default=0)
        super().__init__(base, max(bound, 1), params)

    def contains(self, v):
        return v in self.adjacency

    def _neighbors(self, v):
        return self.adjacency[v]


class RayedTreeGenerator(GraphGenerator):
    """A finite tree on ids ``0..N-1`` with an infinite ray glued to each
    listed leaf.  Ray vertex at height ``h >= 1`` above leaf number ``j`` has
    id ``N + (h - 1) * L + j`` where ``L`` is the number of leaves."""

    family = "tree"

    def __init__(self, adjacency, leaves, base=0):
        self.core = {v: tuple(sorted(ns)) for v, ns in adjacency.items()}
        self.size = len(self.core)
        self.leaves = tuple(leaves)
        self.leaf_index = {v: j for j, v in enumerate(self.leaves)}
        bound = max((len(ns) + (v in self.leaf_index) for v, ns in self.core.items()), default=1)
        super().__init__(base, max(bound, 2))

    def contains(self, v):
        if not isinstance(v, int) or v < 0:
            return False
        return v < self.size or bool(self.leaves)

    def _neighbors(self, v):
        n, L = self.size, len(self.leaves)
        if v < n:
            out = list(self.core[v])
            if v in self.leaf_index:
                out.append(n + self.leaf_index[v])
            return out
        h, j = divmod(v - n, L)
        below = self.leaves[j] if h == 0 else v - L
        return [below, v + L]


_FAMILIES = {
    "line": LineGenerator,
    "halfline": HalflineGenerator,
    "grid": GridGenerator,
    "regular_tree": RegularTreeGenerator,
    "free_group": FreeGroupGenerator,
    "binary_tree": BinaryTreeGenerator,
    "comb": CombGenerator,
}

_POSITIONAL = {"grid": "d", "regular_tree": "d", "free_group": "k"}

FAMILY_NAMES = tuple(_FAMILIES) + ("edge_list",)


def parse_family(spec: str) -> tuple[str, dict]:
    """``"grid(2)"`` -> ``("grid", {"d": 2})``; ``"line"`` -> ``("line", {})``."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:\(\s*([^)]*)\))?\s*", spec)
    if not m:
        raise ValueError(f"bad family spec {spec!r}")
    name, args = m.group(1), m.group(2)
    params = {}
    if args:
        for item in args.split(","):
            item = item.strip()
            if "=" in item:
                k, v = item.split("=", 1)
                params[k.strip()] = int(v)
            elif name in _POSITIONAL:
                params[_POSITIONAL[name]] = int(item)
            else:
                raise ValueError(f"family {name} takes no positional parameter")
    return name, params


def make_generator(family: str, **params) -> GraphGenerator:
    """Build a builtin generator from a family name such as ``"grid(3)"``.

    Keyword parameters override those parsed from the name.  ``base`` selects
    a basepoint other than the origin.  ``edge_list`` needs ``path=``.
    """
    name, parsed = parse_family(family)
    parsed.update(params)
    if name == "edge_list":
        path = parsed.pop("path")
        with open(path) as fh:
            return parse_edge_list(fh.read())
    try:
        cls = _FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}") from None
    return cls(**parsed)


# -- finite windows ----------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """A finite induced subgraph in which all computations take place.

    ``adj`` is restricted to ``vertices``.  Vertices outside ``boundary`` have
    their complete neighbourhood inside the window; a component of a
    complement is unbounded at window scale iff it meets ``boundary``.
    """

    vertices: frozenset
    adj: dict = field(repr=False)
    boundary: frozenset = frozenset()

    @property
    def boundary_sphere(self) -> frozenset:
        return self.boundary

    @property
    def edges(self) -> frozenset:
        return frozenset((u, v) for u, ns in self.adj.items() for v in ns if u < v)

    def neighborhood(self, K) -> frozenset:
        """Closed neighbourhood N[K] inside the window."""
        out = set(K)
        for v in K:
            out.update(self.adj[v])
        return frozenset(out)

    def interior(self, L) -> frozenset:
        """Vertices of ``L`` whose full neighbourhood lies in ``L``."""
        L = frozenset(L)
        return frozenset(v for v in L if v not in self.boundary and all(u in L for u in self.adj[v]))

    def __hash__(self):
        return id(self)


@dataclass(frozen=True, eq=False)
class Ball(Window):
    center: int = 0
    radius: int = 0
    dist: dict = field(default_factory=dict, repr=False)

    def __eq__(self, other):
        if not isinstance(other, Ball):
            return NotImplemented
        return (self.center, self.radius, self.dist, self.edges) == (
            other.center, other.radius, other.dist, other.edges)

    def __hash__(self):
        return id(self)

    def ball_vertices(self, center, radius) -> frozenset:
        """Vertices within ``radius`` of ``center`` measured inside the window."""
        return frozenset(bfs_distances(self.adj, center, radius))


def bfs_distances(adj, source, limit=None, allowed=None) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        d = dist[v]
        if limit is not None and d >= limit:
            continue
        for u in adj[v]:
            if u not in dist and (allowed is None or u in allowed):
                dist[u] = d + 1
                queue.append(u)
    return dist


def materialize_ball(gen: GraphGenerator, radius: int, center: int | None = None,
                     cap: int = DEFAULT_CAP) -> Ball:
    """All vertices within ``radius`` of ``center`` (default: the basepoint)."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if center is None:
        center = gen.basepoint
    dist = {center: 0}
    frontier = [center]
    nbrs = {}
    for d in range(1, radius + 1):
        nxt = []
        for v in frontier:
            ns = gen.neighbors(v)
            nbrs[v] = ns
            for u in ns:
                if u not in dist:
                    dist[u] = d
                    nxt.append(u)
        if len(dist) > cap:
            raise BudgetExceeded(f"ball of radius {radius} exceeds {cap} vertices")
        frontier = nxt
    vertices = frozenset(dist)
    adj = {}
    for v in dist:
        ns = nbrs.get(v)
        if ns is None:
            ns = gen.neighbors(v)
        adj[v] = tuple(u for u in ns if u in vertices)
    sphere = frozenset(v for v, d in dist.items() if d == radius)
    return Ball(vertices=vertices, adj=adj, boundary=sphere, center=center, radius=radius, dist=dist)


def induced_window(adj_source, vertices, boundary) -> Window:
    """Window on ``vertices`` with adjacency induced from ``adj_source``."""
    vertices = frozenset(vertices)
    adj = {v: tuple(u for u in adj_source[v] if u in vertices) for v in vertices}
    return Window(vertices=vertices, adj=adj, boundary=frozenset(boundary) & vertices)


def path_window(length: int) -> Window:
    """The path 0 - 1 - ... - length, with boundary {length}."""
    adj = {t: tuple(u for u in (t - 1, t + 1) if 0 <= u <= length) for t in range(length + 1)}
    return Window(vertices=frozenset(adj), adj=adj, boundary=frozenset({length}))


# -- GRAPH v1 ----------------------------------------------------------------

def parse_edge_list(text: str) -> ExplicitGraphGenerator:
    """Parse GRAPH v1 text into a finite generator.

    The ``lfgraph v1`` header is expected but tolerated when absent.
    """
    adjacency: dict[int, set] = {}
    base = None
    seen = set()
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "lfgraph":
            if parts[1:] != ["v1"]:
                raise ParseError(f"unsupported header {line!r}", lineno)
            continue
        try:
            nums = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(f"non-integer vertex id in {line!r}", lineno) from None
        if any(n < 0 for n in nums):
            raise ParseError("vertex ids must be non-negative", lineno)
        if parts[0] == "v" and len(nums) == 1:
            adjacency.setdefault(nums[0], set())
        elif parts[0] == "e" and len(nums) == 2:
            u, v = nums
            if u == v:
                raise NonSimpleInput(f"line {lineno}: loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise NonSimpleInput(f"line {lineno}: duplicate edge {u} {v}")
            seen.add(key)
            adjacency.setdefault(u, set()).add(v)
            adjacency.setdefault(v, set()).add(u)
        elif parts[0] == "base" and len(nums) == 1:
            base = nums[0]
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno)
    if not adjacency:
        raise ParseError("graph has no vertices")
    if base is not None and base not in adjacency:
        raise ParseError(f"basepoint {base} is not a vertex")
    start = min(adjacency)
    if len(bfs_distances(adjacency, start)) != len(adjacency):
        raise DisconnectedInput("graph is not connected")
    return ExplicitGraphGenerator(adjacency, base)


def format_graph(window: Window, base: int | None = None) -> str:
    """GRAPH v1 text for a finite window."""
    lines = ["lfgraph v1"]
    for v in sorted(window.vertices):
        if not window.adj[v]:
            lines.append(f"v {v}")
    lines.extend(f"e {u} {v}" for u, v in sorted(window.edges))
    if base is not None and base != min(window.vertices):
        lines.append(f"base {base}")
    return "\n".join(lines) + "\n"
