from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfends.errors import NonInjectiveEndMap, NotRayEfficient, ParseError, RayNotProperInWindow
from lfends.exhaust import efficient_exhaustion, ray_efficient_exhaustion
from lfends.graphs import encode_point, make_generator, pair, zigzag
from lfends.rays import (
    Ray,
    build_retraction,
    embed_end_tree,
    find_ray,
    format_ray,
    parse_ray,
    points_to,
    ray_tower_maps,
    shortest_path,
    splice,
    tree_from_edges,
    tree_retraction,
)
from lfends.tower import build_tower, enumerate_prefixes

from conftest import graph_tower


def thread_containing(t, v):
    return tuple(next(u for u in t.level(i) if v in t.component(i, u)) for i in range(1, t.depth + 1))


def test_line_right_ray():
    _, exh, t = graph_tower("line", 4)
    right = thread_containing(t, zigzag(exh.window.radius))
    (eps,) = [p for p in enumerate_prefixes(t, 4) if p.thread == right]
    ray = find_ray(exh.window, exh, t, eps)
    assert ray.vertices == tuple(zigzag(k) for k in range(exh.window.radius + 1))
    assert ray.exit_indices == (0, 1, 2, 3)


def test_regular_tree_leftmost_ray_descends():
    g, exh, t = graph_tower("regular_tree(4)", 4)
    eps = enumerate_prefixes(t, 4)[0]
    ray = find_ray(exh.window, exh, t, eps)
    assert [exh.window.dist[v] for v in ray.vertices] == list(range(len(ray)))
    assert ray.vertices[1] == min(g.neighbors(g.basepoint))


def test_grid_ray_is_certified():
    _, exh, t = graph_tower("grid(2)", 4)
    ray = find_ray(exh.window, exh, t, enumerate_prefixes(t, 4)[0])
    assert len(set(ray.vertices)) == len(ray)
    assert list(ray.exit_indices) == sorted(set(ray.exit_indices))
    assert ray.vertices[-1] in exh.window.boundary


@pytest.mark.parametrize("family", ["line", "comb", "binary_tree", "regular_tree(3)", "grid(3)"])
def test_round_trip_and_segments(family):
    _, exh, t = graph_tower(family, 4)
    for eps in enumerate_prefixes(t, 4):
        ray = find_ray(exh.window, exh, t, eps)
        assert points_to(ray, t) == eps
        for i, b in enumerate(ray.exit_indices, 1):
            assert set(ray.vertices[b + 1:]) <= t.component(i, eps.at(i))


def test_points_to_left_and_spine():
    _, exh, t = graph_tower("line", 4)
    left = [zigzag(-k) for k in range(exh.window.radius + 1)]
    assert points_to(left, t).thread == thread_containing(t, zigzag(-exh.window.radius))
    _, exh, c = graph_tower("comb", 4)
    spine = [pair(n, 0) for n in range(exh.window.radius + 1)]
    assert points_to(spine, c).thread == thread_containing(c, spine[-1])


def test_points_to_needs_boundary():
    _, exh, t = graph_tower("line", 3)
    with pytest.raises(RayNotProperInWindow):
        points_to([0, 2, 4], t)


def test_halfline_retraction_is_identity():
    g = make_generator("halfline")
    ray = list(range(9))
    exh = ray_efficient_exhaustion(g, ray, 4, 8)
    rho = build_retraction(exh.window, exh, ray)
    assert rho.values == {v: v for v in range(9)}


def test_line_retraction_uses_frontier_parameters():
    g = make_generator("line")
    ray = [zigzag(k) for k in range(9)]
    exh = ray_efficient_exhaustion(g, ray, 4, 8)
    rho = build_retraction(exh.window, exh, ray)
    assert rho.identity_on_ray()
    assert rho.a == (0, 1, 2, 3) and rho.b == (0, 1, 2, 3)
    for k in range(1, 4):
        assert rho(zigzag(-k)) == rho.a[k]
    assert rho(zigzag(-8)) == rho.b[-1] + 1


def test_grid_axis_retraction_is_proper():
    g = make_generator("grid(2)")
    ray = [encode_point((x, 0)) for x in range(9)]
    exh = ray_efficient_exhaustion(g, ray, 5, 8)
    rho = build_retraction(exh.window, exh, ray)
    assert rho.identity_on_ray() and rho.interleaved()
    a2 = rho.a[1]
    assert {v for v, x in rho.values.items() if x <= a2} <= exh.levels[2]
    assert not rho.properness_violations()
    for i, K in enumerate(exh.levels):
        assert {v for v, x in rho.values.items() if x <= rho.b[i]} == K


def test_retraction_rejects_wandering_ray():
    g = make_generator("grid(2)")
    pts = [(0, 0), (1, 0), (2, 0), (2, 1), (1, 1), (0, 1)] + [(0, y) for y in range(2, 9)]
    ray = [encode_point(p) for p in pts]
    exh = efficient_exhaustion(g, 3, 8)
    with pytest.raises(NotRayEfficient):
        build_retraction(exh.window, exh, ray)
    rexh = ray_efficient_exhaustion(g, ray, 2, 8, window=exh.window)
    assert build_retraction(rexh.window, rexh, ray).identity_on_ray()


@pytest.mark.parametrize("family", ["line", "grid(2)", "comb", "regular_tree(3)"])
def test_retraction_naturality(family):
    _, exh, t = graph_tower(family, 4)
    for eps in enumerate_prefixes(t, 4):
        ray = find_ray(exh.window, exh, t, eps)
        rho = build_retraction(exh.window, exh, ray)
        ht, inc, ret = ray_tower_maps(t, rho)
        assert ht.sizes == (1,) * 4
        assert inc.then(ret).is_identity()
        assert [m[ht.level(i + 1)[0]] for i, m in enumerate(inc.maps)] == list(eps.thread)


def test_line_tree_is_the_line():
    _, exh, t = graph_tower("line", 4)
    emb = embed_end_tree(exh.window, exh, t)
    assert emb.vertices == exh.window.vertices
    assert emb.tower_map.is_bijective()


def test_regular_tree_hubs():
    _, exh, t = graph_tower("regular_tree(4)", 4)
    emb = embed_end_tree(exh.window, exh, t)
    assert [sum(1 for (i, _) in emb.hubs if i == k) for k in range(1, 5)] == [4, 12, 36, 108]
    assert emb.tower.sizes == t.sizes and emb.tower_map.is_bijective()


@pytest.mark.parametrize("family", ["grid(2)", "grid(3)", "comb", "binary_tree", "free_group(2)"])
def test_embedded_tree_shape(family):
    _, exh, t = graph_tower(family, 4)
    emb = embed_end_tree(exh.window, exh, t)
    T = nx.Graph([(v, p) for v, p in emb.parent.items() if p is not None])
    T.add_node(emb.root)
    assert nx.is_tree(T)
    assert all(p in exh.window.adj[v] for v, p in emb.parent.items() if p is not None)
    assert emb.tower_map.is_bijective()
    if t.sizes[-1] == 1:
        assert max(d for _, d in T.degree()) <= 2
    for (i, u), x in emb.hubs.items():
        path = emb.branch_path(i, u)
        assert path[0] == x and len(set(path)) == len(path)


def test_negative_x_axis_in_plane():
    g = make_generator("grid(2)")
    exh = efficient_exhaustion(g, 4, 6)
    t = build_tower(exh.window, exh)
    axis = {v for v in exh.window.vertices if g.point(v)[1] == 0}
    edges = [(u, v) for u in axis for v in exh.window.adj[u] if v in axis and u < v]
    emb = tree_from_edges(exh.window, exh, t, edges, exh.window.center)
    assert emb.tower.sizes == (2, 2, 2, 2)
    with pytest.raises(NonInjectiveEndMap):
        tree_retraction(exh.window, exh, emb)


def test_line_tree_retraction_nearest_hub():
    _, exh, t = graph_tower("line", 4)
    emb = embed_end_tree(exh.window, exh, t)
    tr = tree_retraction(exh.window, exh, emb)
    assert tr.end_level_identity() and tr.preimage_levels_match()
    assert tr(exh.window.center) == emb.root
    for (i, u), x in emb.hubs.items():
        assert tr(x) == x


@pytest.mark.parametrize("family", ["regular_tree(4)", "comb", "grid(2)"])
def test_tree_retraction_end_identity(family):
    _, exh, t = graph_tower(family, 4)
    emb = embed_end_tree(exh.window, exh, t)
    tr = tree_retraction(exh.window, exh, emb)
    assert tr.end_level_identity() and tr.preimage_levels_match()
    assert set(tr.values.values()) <= emb.vertices


def test_partial_tree_borrows_branches():
    # a single ray in the binary tree: the retraction still sends every end somewhere
    _, exh, t = graph_tower("binary_tree", 3)
    ray = find_ray(exh.window, exh, t, enumerate_prefixes(t, 3)[0])
    edges = list(zip(ray.vertices, ray.vertices[1:]))
    emb = tree_from_edges(exh.window, exh, t, edges, ray.vertices[0])
    tr = tree_retraction(exh.window, exh, emb)
    assert tr.end_level_identity() and set(tr.values.values()) <= set(ray.vertices)


@settings(max_examples=100)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=8, unique=True),
       st.lists(st.integers(0, 12), min_size=0, max_size=8, unique=True))
def test_splice_is_injective(P, Q):
    Q = [P[-1]] + [q for q in Q if q != P[-1]]
    out = splice(P, Q)
    assert len(set(out)) == len(out)
    assert out[0] == P[0] or P[0] in Q
    assert out[-1] == Q[-1]


def test_shortest_path_prefers_small_ids():
    adj = {0: (1, 2), 1: (0, 3), 2: (0, 3), 3: (1, 2)}
    assert shortest_path(adj, 0, set(adj), {1, 2}) == [0, 1]
    assert shortest_path(adj, 0, {0}, {3}) is None


def test_ray_text():
    text = format_ray(Ray((0, 2, 4)))
    assert text == "ray v1\n0\n2\n4\n"
    assert parse_ray(text) == (0, 2, 4)
    assert parse_ray("ray v1 0 1\n2") == (0, 1, 2)
    with pytest.raises(ParseError):
        parse_ray("0 1 2")
