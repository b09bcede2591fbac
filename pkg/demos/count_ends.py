"""Count the ends of the built-in graph families.

Each family is cut out to a finite ball, exhausted by filled balls, and the
unbounded complementary components are counted level by level.
"""

from __future__ import annotations

from lfends.exhaust import efficient_exhaustion
from lfends.graphs import make_generator
from lfends.tower import build_tower, ends_report

FAMILIES = ["line", "halfline", "grid(2)", "grid(3)", "comb", "binary_tree", "regular_tree(4)", "free_group(2)"]


def main(depth: int = 5):
    print(f"{'family':<16} level sizes")
    for fam in FAMILIES:
        gen = make_generator(fam)
        exh = efficient_exhaustion(gen, depth, depth + 2)
        rep = ends_report(build_tower(exh.window, exh))
        verdict = f"stabilized at {rep.stabilized_count}" if rep.stabilized else "still growing"
        print(f"{fam:<16} {' '.join(map(str, rep.sizes)):<24} {verdict}")


if __name__ == "__main__":
    main()
