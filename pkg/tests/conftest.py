from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lfends.exhaust import efficient_exhaustion  # noqa: E402
from lfends.graphs import make_generator  # noqa: E402
from lfends.tower import build_tower  # noqa: E402

CORPUS = ["line", "halfline", "grid(2)", "grid(3)", "regular_tree(4)", "free_group(2)", "comb", "binary_tree"]
SMALL = ["line", "halfline", "grid(2)", "comb", "binary_tree", "regular_tree(3)"]


def graph_tower(family: str, depth: int, window: int | None = None, **params):
    gen = make_generator(family, **params)
    exh = efficient_exhaustion(gen, depth, depth + 2 if window is None else window)
    return gen, exh, build_tower(exh.window, exh)


@pytest.fixture(params=CORPUS)
def corpus_family(request):
    return request.param


@pytest.fixture(params=SMALL)
def small_family(request):
    return request.param
