"""Locally constant integer functions on the ends of the binary tree.

Builds the explicit free basis, checks the change-of-basis matrix is
unimodular, and expands a random function in it.
"""

from __future__ import annotations

import random

from lfends.exhaust import efficient_exhaustion
from lfends.graphs import make_generator
from lfends.h0 import basis, basis_matrix, combine, determinant, expand_in_basis, random_class
from lfends.tower import build_tower


def main(depth: int = 4):
    gen = make_generator("binary_tree")
    exh = efficient_exhaustion(gen, depth, depth + 2)
    t = build_tower(exh.window, exh)
    B = basis(t)
    print(f"basis of size {len(B)} (2^{depth} = {2 ** depth})")
    print("basis elements (level, component):", B.elements)
    print("determinant of the basis matrix:", determinant(basis_matrix(B, depth)))
    x = random_class(t, depth, random.Random(1))
    coeffs = expand_in_basis(x, B)
    print("random class values:", x.values)
    print("coefficients:", coeffs)
    assert combine(coeffs, B) == x


if __name__ == "__main__":
    main()
