"""Find a ray toward every end of a regular tree and retract the window onto it."""

from __future__ import annotations

from lfends.exhaust import efficient_exhaustion
from lfends.graphs import make_generator
from lfends.rays import build_retraction, find_ray, points_to
from lfends.tower import build_tower, enumerate_prefixes


def main(family: str = "regular_tree(3)", depth: int = 3):
    gen = make_generator(family)
    exh = efficient_exhaustion(gen, depth, depth + 2)
    t = build_tower(exh.window, exh)
    for eps in enumerate_prefixes(t, depth):
        ray = find_ray(exh.window, exh, t, eps)
        rho = build_retraction(exh.window, exh, ray)
        assert points_to(ray, t) == eps
        print(f"end {eps.thread}: ray {ray.vertices}  a={rho.a} b={rho.b} "
              f"proper={not rho.properness_violations()}")


if __name__ == "__main__":
    main()
