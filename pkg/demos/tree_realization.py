"""Realize an abstract Cantor tower by a rooted tree and draw it as DOT."""

from __future__ import annotations

from lfends.tower import canonical_code, cantor_tower, emit_dot, tree_realization


def main(depth: int = 3):
    c = cantor_tower(depth)
    _, _, realized = tree_realization(c)
    print("sizes:", realized.sizes)
    print("same shape as the Cantor tower:", canonical_code(realized) == canonical_code(c))
    print(emit_dot(realized), end="")


if __name__ == "__main__":
    main()
