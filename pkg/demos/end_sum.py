"""Glue a regular tree and a comb along rays and compare end counts."""

from __future__ import annotations

from lfends.endsum import EndSumSpec, format_report, geodesic_ray, verify_end_sum
from lfends.graphs import make_generator


def main():
    m, n = make_generator("regular_tree(4)"), make_generator("comb")
    rep = verify_end_sum(EndSumSpec(m, geodesic_ray(m), n, geodesic_ray(n), depth=4, window_radius=6))
    print(format_report(rep), end="")


if __name__ == "__main__":
    main()
