from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfends.errors import (
    BadIndices,
    DepthMismatch,
    DepthOutOfRange,
    EmptyLevelAfterNormalization,
    EmptyTower,
    NotProper,
    ParseError,
)
from lfends.exhaust import Exhaustion, efficient_exhaustion, pullback_exhaustion, subsequence
from lfends.graphs import make_generator, parse_edge_list, path_window, zigzag
from lfends.tower import (
    EndPrefix,
    EndTower,
    Relation,
    basic_open_relation,
    build_tower,
    canonical_code,
    cantor_tower,
    emit_dot,
    ends_report,
    enumerate_prefixes,
    format_tower,
    identity_map,
    induced_tower_map,
    normalize_tower,
    parse_tower,
    point_tower,
    quotient_tower,
    subsample_tower,
    tree_realization,
)

from conftest import CORPUS, graph_tower
from oracles import unbounded_counts


@st.composite
def towers(draw, max_depth=4, max_width=4, surjective=True):
    depth = draw(st.integers(1, max_depth))
    sizes = [draw(st.integers(1, max_width))]
    bonds = []
    for _ in range(depth - 1):
        prev = sizes[-1]
        if surjective:
            n = draw(st.integers(prev, prev + max_width))
            parents = list(range(prev)) + [draw(st.integers(0, prev - 1)) for _ in range(n - prev)]
            parents = draw(st.permutations(parents))
        else:
            n = draw(st.integers(1, max_width))
            parents = [draw(st.integers(0, prev - 1)) for _ in range(n)]
        sizes.append(n)
        bonds.append(dict(enumerate(parents)))
    return EndTower.from_bonds([range(s) for s in sizes], bonds)


def as_rooted_graph(t):
    G = nx.Graph()
    G.add_node("root", level=0)
    for i, lv in enumerate(t.levels, 1):
        for u in lv:
            G.add_node((i, u), level=i)
            G.add_edge((i, u), "root" if i == 1 else (i - 1, t.parent(i, u)))
    return G


def shuffled_labels(t, rng):
    maps = []
    for lv in t.levels:
        new = [100 + k for k in range(len(lv))]
        rng.shuffle(new)
        maps.append(dict(zip(lv, new)))
    return t.relabel(maps)


@pytest.mark.parametrize("family", CORPUS)
def test_sizes_match_brute_force(family):
    _, exh, t = graph_tower(family, 4, 6)
    assert list(t.sizes) == unbounded_counts(family, exh.radii, 6)
    assert t.is_surjective()


def test_line_bonds_are_bijections():
    _, _, t = graph_tower("line", 4)
    assert t.sizes == (2, 2, 2, 2)
    for i in range(1, 4):
        assert sorted(t.bond(i).values()) == sorted(t.level(i))


def test_bonds_follow_containment():
    _, _, t = graph_tower("regular_tree(4)", 3)
    for i in range(2, 4):
        for u in t.level(i):
            assert t.component(i, u) <= t.component(i - 1, t.parent(i, u))


def test_ends_report():
    _, _, t = graph_tower("line", 4)
    rep = ends_report(t)
    assert (rep.count_at_depth, rep.stabilized, rep.stabilized_count) == (2, True, 2)
    _, _, t = graph_tower("regular_tree(4)", 4)
    rep = ends_report(t)
    assert rep.sizes == (4, 12, 36, 108) and not rep.stabilized and rep.stabilized_count is None


def test_finite_graph_has_empty_tower():
    g = parse_edge_list("e 0 1\ne 1 2\ne 2 3")
    exh = efficient_exhaustion(g, 2, 6)
    t = build_tower(exh.window, exh)
    assert t.sizes == (0, 0) and ends_report(t).count_at_depth == 0
    with pytest.raises(EmptyTower):
        emit_dot(t)


def test_prefixes():
    _, _, t = graph_tower("line", 4)
    assert len(enumerate_prefixes(t, 3)) == 2
    assert enumerate_prefixes(t, 0) == [EndPrefix(())]
    _, _, c = graph_tower("comb", 4)
    ps = enumerate_prefixes(c, 3)
    assert len(ps) == len(c.level(3)) == 4
    assert ps == sorted(ps, key=lambda p: p.thread)
    with pytest.raises(DepthOutOfRange):
        enumerate_prefixes(t, 5)


def test_basic_open_relation():
    _, _, t = graph_tower("line", 3)
    left1, right1 = t.level(1)
    right2 = next(u for u in t.level(2) if t.parent(2, u) == right1)
    assert basic_open_relation(t, (1, left1), (1, left1)) is Relation.EQUAL
    assert basic_open_relation(t, (1, left1), (2, right2)) is Relation.DISJOINT
    assert basic_open_relation(t, (1, right1), (2, right2)) is Relation.CONTAINS
    assert basic_open_relation(t, (2, right2), (1, right1)) is Relation.CONTAINED
    with pytest.raises(BadIndices):
        basic_open_relation(t, (4, left1), (1, left1))


@pytest.mark.parametrize("family", ["comb", "binary_tree", "regular_tree(3)"])
def test_truncation_separation(family):
    _, _, t = graph_tower(family, 4)
    ps = enumerate_prefixes(t, 4)
    for a in ps:
        for b in ps:
            if a == b:
                continue
            k = next(i for i in range(1, 5) if a.at(i) != b.at(i))
            assert basic_open_relation(t, (k, a.at(k)), (k, b.at(k))) is Relation.DISJOINT


def test_codes_across_basepoints_and_families():
    _, _, a = graph_tower("line", 4)
    _, _, b = graph_tower("line", 4, base=zigzag(5))
    assert canonical_code(a) == canonical_code(b)
    _, _, g = graph_tower("grid(2)", 4)
    assert canonical_code(a) != canonical_code(g)


@settings(max_examples=80, deadline=None)
@given(towers(), st.randoms(use_true_random=False))
def test_code_is_label_independent(t, rng):
    assert canonical_code(shuffled_labels(t, rng)) == canonical_code(t)


@settings(max_examples=120, deadline=None)
@given(towers(max_depth=3, max_width=3), towers(max_depth=3, max_width=3))
def test_code_equality_iff_isomorphic(s, t):
    same = s.depth == t.depth and nx.is_isomorphic(
        as_rooted_graph(s), as_rooted_graph(t), node_match=lambda x, y: x["level"] == y["level"])
    assert (canonical_code(s) == canonical_code(t)) == same


@pytest.mark.parametrize("family", ["grid(2)", "comb", "binary_tree"])
def test_subsequence_compatibility(family):
    _, exh, t = graph_tower(family, 6)
    for idx in ([0, 2, 4], [1, 5], [0, 1, 2, 3, 4, 5]):
        sub = subsequence(exh, idx)
        assert build_tower(sub.window, sub) == subsample_tower(t, idx)
    with pytest.raises(BadIndices):
        subsample_tower(t, [3, 3])


def test_ray_inclusion_hits_right_thread():
    gen, exh, t = graph_tower("line", 4)
    ray = [zigzag(k) for k in range(exh.window.radius + 1)]
    hw = path_window(len(ray) - 1)
    incl = dict(enumerate(ray))
    hexh = pullback_exhaustion(hw, incl, exh)
    ht = build_tower(hw, hexh)
    m = induced_tower_map(ht, t, incl)
    for i in range(1, 5):
        (only,) = m.maps[i - 1].values()
        assert zigzag(i + 1) in t.component(i, only)
    assert m.commutes()


def test_identity_map():
    _, exh, t = graph_tower("comb", 3)
    m = induced_tower_map(t, t, {v: v for v in exh.window.vertices})
    assert m.is_identity() and identity_map(t).maps == m.maps


def test_not_proper_when_level_hits_compactum():
    _, exh, t = graph_tower("line", 3)
    collapse = {v: exh.window.center for v in exh.window.vertices}
    with pytest.raises(NotProper):
        induced_tower_map(t, t, collapse)


def test_quotient_sizes():
    _, _, line = graph_tower("line", 4)
    eR = enumerate_prefixes(line, 4)[1]
    eL = enumerate_prefixes(line, 4)[0]
    assert quotient_tower(line, eR, line, eL).sizes == (3, 3, 3, 3)
    _, _, g = graph_tower("grid(2)", 4)
    (eg,) = enumerate_prefixes(g, 4)
    assert quotient_tower(g, eg, g, eg).sizes == (1, 1, 1, 1)
    _, _, tr = graph_tower("regular_tree(4)", 4)
    q = quotient_tower(tr, enumerate_prefixes(tr, 4)[0], line, eL)
    assert q.sizes == tuple(4 * 3 ** (i - 1) + 1 for i in range(1, 5))
    assert q.is_surjective()
    with pytest.raises(DepthMismatch):
        quotient_tower(tr, enumerate_prefixes(tr, 4)[0], point_tower(3), EndPrefix((0, 0, 0)))


def test_cantor_realizes_binary_tree():
    t = cantor_tower(4)
    gen, exh, rt = tree_realization(t)
    assert rt.sizes == (2, 4, 8, 16) and rt.provenance == "realized-tree"
    assert canonical_code(rt) == canonical_code(t)
    _, _, bt = graph_tower("binary_tree", 4)
    assert canonical_code(bt) == canonical_code(t)


def test_point_tower_realizes_halfline():
    gen, exh, rt = tree_realization(point_tower(3))
    assert rt.sizes == (1, 1, 1)
    assert all(len(gen.neighbors(v)) <= 2 for v in exh.window.vertices)


def test_normalization_prunes_dead_branch():
    # level 1 {0,1,2}; level 2 {0,1} both over 0 and 1; element 2 has empty fibre
    t = EndTower.from_bonds([range(3), range(2)], [{0: 0, 1: 1}])
    assert not t.is_surjective()
    norm = normalize_tower(t)
    assert norm.levels == ((0, 1), (0, 1))
    gen, exh, rt = tree_realization(t)
    assert canonical_code(rt) == canonical_code(norm)
    with pytest.raises(EmptyLevelAfterNormalization):
        normalize_tower(EndTower.from_bonds([range(1), range(0)], [{}]))


def test_normalization_flags_unstable_images():
    # the deepest level prunes an element that the level above still sees
    t = EndTower.from_bonds([range(2), range(2), range(1)], [{0: 0, 1: 1}, {0: 0}])
    assert normalize_tower(t).provenance == "normalized(unstable)"
    assert normalize_tower(cantor_tower(3)).provenance == "normalized"


@settings(max_examples=60, deadline=None)
@given(towers(max_depth=4, max_width=3, surjective=False))
def test_realization_round_trip(t):
    try:
        norm = normalize_tower(t)
    except EmptyLevelAfterNormalization:
        return
    _, _, rt = tree_realization(t)
    assert canonical_code(rt) == canonical_code(norm)


@settings(max_examples=60, deadline=None)
@given(towers(max_depth=4, max_width=4))
def test_tower_text_round_trip(t):
    text = format_tower(t)
    back = parse_tower(text)
    assert back == t and format_tower(back) == text


@pytest.mark.parametrize("text", [
    "", "tower v2\n", "tower v1\nlevel 2 1\n", "tower v1\nlevel 1 1\nlevel 2 1\n",
    "tower v1\nlevel 1 1\nlevel 2 1\nbond 2 0 3\n", "tower v1\nlevel 1 x\n",
])
def test_tower_parse_errors(text):
    with pytest.raises(ParseError):
        parse_tower(text)


def test_dot_output():
    dot = emit_dot(point_tower(1))
    assert dot.count("[label") == 2
    assert emit_dot(cantor_tower(3)).count("[label") == 15
    _, _, t = graph_tower("line", 3)
    text = emit_dot(t)
    assert "L0_0 -> L1_0;" in text and "L1_1 -> L2_1;" in text
    assert text == emit_dot(t)


def test_relabel_keeps_structure():
    t = cantor_tower(3)
    s = shuffled_labels(t, random.Random(3))
    assert s.sizes == t.sizes and s.is_surjective()
