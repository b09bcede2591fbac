"""The plane has one end and a full line has two, so no end-respecting
retraction of the plane onto an embedded line exists."""

from __future__ import annotations

from lfends.errors import NonInjectiveEndMap
from lfends.exhaust import efficient_exhaustion
from lfends.graphs import make_generator
from lfends.rays import tree_from_edges, tree_retraction
from lfends.tower import build_tower


def main():
    g = make_generator("grid(2)")
    exh = efficient_exhaustion(g, 4, 6)
    t = build_tower(exh.window, exh)
    axis = {v for v in exh.window.vertices if g.point(v)[1] == 0}
    edges = [(u, v) for u in axis for v in exh.window.adj[u] if v in axis and u < v]
    emb = tree_from_edges(exh.window, exh, t, edges, exh.window.center)
    print("plane tower:", t.sizes, " x-axis tower:", emb.tower.sizes)
    try:
        tree_retraction(exh.window, exh, emb)
    except NonInjectiveEndMap as e:
        print("no retraction:", e)


if __name__ == "__main__":
    main()
