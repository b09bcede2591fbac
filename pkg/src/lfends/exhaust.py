"""Compact exhaustions inside a finite window.

A compactum is a finite vertex set (its full induced subgraph).  ``K`` lies in
the interior of ``L`` when the closed neighbourhood ``N[K]`` is contained in
``L``.  Components of the complement are graph components of the window minus
``K``; a component is *unbounded at window scale* when it reaches the window
boundary.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import (
    BadIndices,
    CompactumTouchesWindowBoundary,
    RayNotProperInWindow,
    WindowTooSmall,
)
from .graphs import Ball, GraphGenerator, Window, bfs_distances, materialize_ball


@dataclass(frozen=True)
class Component:
    rep: int
    vertices: frozenset = field(repr=False)
    unbounded: bool

    @property
    def classification(self) -> str:
        return "unbounded-at-window" if self.unbounded else "bounded"


@dataclass(frozen=True)
class ComplementDecomposition:
    compactum: frozenset
    components: tuple

    @property
    def unbounded(self) -> tuple:
        return tuple(c for c in self.components if c.unbounded)

    @property
    def bounded(self) -> tuple:
        return tuple(c for c in self.components if not c.unbounded)

    def component_of(self, v) -> Component | None:
        for c in self.components:
            if v in c.vertices:
                return c
        return None


def _check_compactum(window: Window, K) -> frozenset:
    K = frozenset(K)
    if not K <= window.vertices:
        raise ValueError(f"compactum has {len(K - window.vertices)} vertices outside the window")
    if K & window.boundary:
        raise CompactumTouchesWindowBoundary(
            f"compactum meets the window boundary at {sorted(K & window.boundary)[:5]}")
    return K


def complement_components(window: Window, K) -> ComplementDecomposition:
    """Components of ``window - K``, ordered by their minimum vertex id."""
    K = _check_compactum(window, K)
    seen = set(K)
    comps = []
    for start in sorted(window.vertices - K):
        if start in seen:
            continue
        seen.add(start)
        members = [start]
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in window.adj[v]:
                if u not in seen:
                    seen.add(u)
                    members.append(u)
                    queue.append(u)
        verts = frozenset(members)
        comps.append(Component(rep=start, vertices=verts, unbounded=bool(verts & window.boundary)))
    return ComplementDecomposition(compactum=K, components=tuple(comps))


def bounded_filling(window: Window, K) -> frozenset:
    """``K`` together with every bounded component of its complement."""
    dec = complement_components(window, K)
    out = set(dec.compactum)
    for c in dec.bounded:
        out |= c.vertices
    return frozenset(out)


def is_connected(window: Window, K) -> bool:
    K = frozenset(K)
    if not K:
        return False
    start = min(K)
    return len(bfs_distances(window.adj, start, allowed=K)) == len(K)


def is_efficient(window: Window, K) -> bool:
    return is_connected(window, K) and not complement_components(window, K).bounded


def interior_nested(window: Window, K, L) -> bool:
    """True when ``N[K]`` is contained in ``L``."""
    L = frozenset(L)
    return window.neighborhood(K) <= L


@dataclass(frozen=True, eq=False)
class Exhaustion:
    """Nested compacta ``K_1 ⊆ K_2 ⊆ ...`` in one window.

    ``radii`` records the ball radii the levels were filled from (when they
    came from balls); ``ray_exits`` holds ``b_i``, the last ray index inside
    ``K_i``, for ray-efficient exhaustions.
    """

    window: Window
    levels: tuple
    connected: tuple = ()
    efficient: tuple = ()
    center: int | None = None
    radii: tuple = ()
    ray_exits: tuple | None = None

    @classmethod
    def from_levels(cls, window, levels, **kw) -> "Exhaustion":
        levels = tuple(frozenset(K) for K in levels)
        for K in levels:
            _check_compactum(window, K)
        return cls(
            window=window,
            levels=levels,
            connected=tuple(is_connected(window, K) for K in levels),
            efficient=tuple(is_efficient(window, K) for K in levels),
            **kw,
        )

    def __len__(self):
        return len(self.levels)

    def __eq__(self, other):
        if not isinstance(other, Exhaustion):
            return NotImplemented
        return (self.window is other.window and self.levels == other.levels
                and self.ray_exits == other.ray_exits)

    __hash__ = object.__hash__

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def all_efficient(self) -> bool:
        return all(self.efficient)

    def level_of(self, v) -> int | None:
        """Smallest 1-based ``i`` with ``v`` in ``K_i``; ``None`` if in no level."""
        for i, K in enumerate(self.levels, 1):
            if v in K:
                return i
        return None

    def nesting_violations(self) -> list[int]:
        """Indices ``i`` (1-based) where ``N[K_i]`` is not inside ``K_{i+1}``."""
        return [i for i in range(1, len(self.levels))
                if not interior_nested(self.window, self.levels[i - 1], self.levels[i])]


def filled_ball_levels(window: Ball, radii, center=None) -> list[frozenset]:
    """Bounded fillings of the balls of the given radii around ``center``."""
    if center is None:
        center = window.center
    dist = bfs_distances(window.adj, center, max(radii, default=0))
    out = []
    for r in radii:
        ball = frozenset(v for v, d in dist.items() if d <= r)
        out.append(bounded_filling(window, ball))
    return out


def _required_radius(window: Ball, center, r) -> int:
    """Minimal window radius (about the window centre) so that the ball of
    radius ``r + 1`` about ``center`` avoids the boundary."""
    offset = window.dist.get(center, 0) if isinstance(window, Ball) else 0
    return offset + r + 2


def efficient_exhaustion(gen: GraphGenerator, depth: int, window_radius: int, stride: int = 1,
                         center: int | None = None, window: Ball | None = None) -> Exhaustion:
    """Efficient exhaustion by filled balls of radii ``0, stride, 2*stride, ...``.

    The levels live in a window of radius ``window_radius`` about the
    generator's basepoint; ``center`` picks a different centre for the balls
    (it must lie in that window).
    """
    if depth < 0 or stride < 1:
        raise ValueError("depth must be non-negative and stride positive")
    if window is None:
        window = materialize_ball(gen, window_radius)
    if center is None:
        center = window.center
    radii = tuple(i * stride for i in range(depth))
    if depth:
        need = _required_radius(window, center, radii[-1])
        if need > window.radius:
            raise WindowTooSmall(f"levels up to radius {radii[-1]} need a larger window", need)
    levels = filled_ball_levels(window, radii, center)
    exh = Exhaustion.from_levels(window, levels, center=center, radii=radii)
    bad = exh.nesting_violations()
    if bad or not exh.all_efficient:
        raise WindowTooSmall(f"exhaustion not certified at levels {bad}", window.radius + 1)
    return exh


def ray_exit_indices(ray_vertices, levels) -> list[int]:
    """``b_i``: the last ray index lying in ``K_i`` (-1 if none)."""
    out = []
    for K in levels:
        b = -1
        for t, v in enumerate(ray_vertices):
            if v in K:
                b = t
        out.append(b)
    return out


def is_initial_segment(ray_vertices, K) -> bool:
    hits = [v in K for v in ray_vertices]
    if not hits or not hits[0]:
        return False
    first_out = hits.index(False) if False in hits else len(hits)
    return not any(hits[first_out:])


def check_ray_in_window(window: Window, ray_vertices):
    vs = list(ray_vertices)
    if not vs:
        raise RayNotProperInWindow("empty ray")
    if len(set(vs)) != len(vs):
        raise RayNotProperInWindow("ray repeats a vertex")
    for u, v in zip(vs, vs[1:]):
        if u not in window.vertices or v not in window.adj[u]:
            raise RayNotProperInWindow(f"ray step {u} -> {v} is not a window edge")
    if vs[-1] not in window.boundary:
        raise RayNotProperInWindow("ray does not reach the window boundary")


def ray_efficient_exhaustion(gen: GraphGenerator, ray, depth: int, window_radius: int,
                             stride: int = 1, window: Ball | None = None) -> Exhaustion:
    """Efficient exhaustion meeting the ray in initial segments.

    When the filled-ball exhaustion already cuts the ray in initial segments it
    is returned as is.  Otherwise filled balls ``J_i`` and ray segments
    ``L_i`` are interleaved so that ``L_i ⊆ int J_i`` and
    ``ray ∩ J_i ⊆ int L_{i+1}`` (interior relative to the ray), and
    ``K_i = fill(J_i ∪ L_{i+1})``.
    """
    ray_vertices = tuple(getattr(ray, "vertices", ray))
    if window is None:
        window = materialize_ball(gen, window_radius)
    check_ray_in_window(window, ray_vertices)
    if ray_vertices[0] != window.center:
        raise RayNotProperInWindow("ray must start at the window centre")
    base = efficient_exhaustion(gen, depth, window_radius, stride, window=window)
    if all(is_initial_segment(ray_vertices, K) for K in base.levels):
        exits = tuple(ray_exit_indices(ray_vertices, base.levels))
        return Exhaustion(window=base.window, levels=base.levels, connected=base.connected,
                          efficient=base.efficient, center=base.center, radii=base.radii,
                          ray_exits=exits)
    return _shuffled(window, ray_vertices, depth)


def _shuffled(window: Ball, ray_vertices, depth: int) -> Exhaustion:
    dist = window.dist
    position = {v: t for t, v in enumerate(ray_vertices)}
    last = len(ray_vertices) - 1

    def filled(r):
        return bounded_filling(window, frozenset(v for v, d in dist.items() if d <= r))

    levels, radii = [], []
    seg_end = 0  # L_1 = ray[0..0]
    prev_J = None
    r = -1
    for _ in range(depth):
        L = frozenset(ray_vertices[:seg_end + 1])
        need = set(window.neighborhood(L))
        if prev_J is not None:
            need |= window.neighborhood(prev_J)
        r = max(r + 1, max(dist[v] for v in need))
        if r + 2 > window.radius:
            raise WindowTooSmall("shuffled ray exhaustion does not fit", r + 2)
        J = filled(r)
        if not need <= J:
            raise WindowTooSmall("filled ball misses required vertices", r + 3)
        m = max(position[v] for v in J if v in position)
        seg_end = m + 1
        if seg_end >= last:
            raise RayNotProperInWindow("ray too short for the shuffled exhaustion")
        L_next = frozenset(ray_vertices[:seg_end + 1])
        K = bounded_filling(window, J | L_next)
        if window.neighborhood(K) & window.boundary:
            raise WindowTooSmall("shuffled level touches the window boundary", window.radius + 1)
        levels.append(K)
        radii.append(r)
        prev_J = K
    exits = tuple(ray_exit_indices(ray_vertices, levels))
    exh = Exhaustion.from_levels(window, levels, center=window.center, radii=tuple(radii),
                                 ray_exits=exits)
    if exh.nesting_violations() or not exh.all_efficient or not all(
            is_initial_segment(ray_vertices, K) for K in levels):
        raise WindowTooSmall("shuffled exhaustion failed certification", window.radius + 1)
    return exh


def subsequence(exh: Exhaustion, indices) -> Exhaustion:
    """Levels at the given 0-based, strictly increasing indices."""
    indices = list(indices)
    if any(not isinstance(i, int) or i < 0 or i >= len(exh.levels) for i in indices):
        raise BadIndices(f"indices {indices} out of range for {len(exh.levels)} levels")
    if any(a >= b for a, b in zip(indices, indices[1:])):
        raise BadIndices(f"indices {indices} are not strictly increasing")
    pick = lambda seq: tuple(seq[i] for i in indices) if seq else seq  # noqa: E731
    return Exhaustion(
        window=exh.window,
        levels=pick(exh.levels),
        connected=pick(exh.connected),
        efficient=pick(exh.efficient),
        center=exh.center,
        radii=pick(exh.radii),
        ray_exits=pick(exh.ray_exits) if exh.ray_exits is not None else None,
    )


def pullback_exhaustion(source: Window, vertex_map, target: Exhaustion, **kw) -> Exhaustion:
    """Levels ``f^{-1}(K_i)`` of a map given on source vertices."""
    levels = [frozenset(v for v in source.vertices if vertex_map[v] in K) for K in target.levels]
    return Exhaustion.from_levels(source, levels, **kw)


def shuffle_exhaustions(a: Exhaustion, b: Exhaustion):
    """Interleave two exhaustions of one window.

    Returns ``(J, ia, ib)``: an exhaustion ``J`` whose odd levels are the
    levels of ``a`` at 0-based indices ``ia`` and whose even levels are the
    levels of ``b`` at indices ``ib``, with every level in the interior of
    the next.  Stops when either exhaustion runs out.
    """
    if a.window is not b.window:
        raise ValueError("exhaustions live in different windows")
    w = a.window
    levels, ia, ib = [], [], []
    prev = frozenset()
    i = j = 0
    while True:
        if prev:
            while i < len(a.levels) and not interior_nested(w, prev, a.levels[i]):
                i += 1
        if i >= len(a.levels):
            break
        Ka = a.levels[i]
        while j < len(b.levels) and not interior_nested(w, Ka, b.levels[j]):
            j += 1
        if j >= len(b.levels):
            break
        levels += [Ka, b.levels[j]]
        ia.append(i)
        ib.append(j)
        prev = b.levels[j]
        i += 1
        j += 1
    J = Exhaustion.from_levels(w, levels, center=a.center)
    return J, ia, ib
