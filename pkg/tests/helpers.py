"""Corpora and independent reference implementations shared by the tests.

The references here avoid the package's own machinery: densities are
enumerated with plain ``itertools`` and ``Fraction``, max flow comes from a
min-cut enumeration, and BFS balls come from networkx.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import networkx as nx

from localdensity.graph import Graph, gnm, lollipop, path, star


def atlas_graphs(max_n: int = 7) -> list[Graph]:
    """Every connected graph on 2..max_n vertices, up to isomorphism."""
    out = []
    for h in nx.graph_atlas_g():
        if 2 <= h.number_of_nodes() <= max_n and nx.is_connected(h):
            out.append(Graph.from_edges(h.number_of_nodes(), list(h.edges())))
    return out


def seeded_gnm(count: int, max_n: int = 12, first_seed: int = 0) -> list[Graph]:
    """``count`` reproducible G(n, m) graphs with ``4 <= n <= max_n``."""
    out = []
    for s in range(first_seed, first_seed + count):
        rng = random.Random(1000 + s)
        n = rng.randint(4, max_n)
        m = rng.randint(n - 1, min(n * (n - 1) // 2, 3 * n))
        out.append(gnm(n, m, s))
    return out


def algorithm_corpus() -> list[tuple[str, Graph]]:
    """Named small graphs used for the distributed algorithms."""
    named = [("lollipop(4,3)", lollipop(4, 3)), ("P10", path(10)), ("K1,3", star(3))]
    named += [(f"gnm#{i}(n={g.n},m={g.m})", g) for i, g in enumerate(seeded_gnm(20, first_seed=500))]
    return named


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from((u, v) for u, v, _ in g.edges)
    return h


# reference densities ----------------------------------------------------------


def ref_weight(g: Graph, X) -> Fraction:
    X = set(X)
    return sum((w for u, v, w in g.edges if u in X and v in X), Fraction(0))


def ref_densest(g: Graph, pool=None) -> tuple[frozenset, Fraction]:
    """Union of all maximisers by plain enumeration."""
    pool = list(range(g.n)) if pool is None else list(pool)
    best, arg = Fraction(-1), frozenset()
    for r in range(1, len(pool) + 1):
        for X in itertools.combinations(pool, r):
            d = ref_weight(g, X) / r
            if d > best:
                best, arg = d, frozenset(X)
            elif d == best:
                arg |= frozenset(X)
    return arg, best


def ref_local_density(g: Graph) -> dict[int, Fraction]:
    """Peel by quotient density with plain enumeration."""
    rho: dict[int, Fraction] = {}
    B: set[int] = set()
    rest = set(range(g.n))
    while rest:
        best, arg = Fraction(-1), set()
        wb = ref_weight(g, B)
        for r in range(1, len(rest) + 1):
            for X in itertools.combinations(sorted(rest), r):
                q = (ref_weight(g, B | set(X)) - wb) / r
                if q > best:
                    best, arg = q, set(X)
                elif q == best:
                    arg |= set(X)
        for v in arg:
            rho[v] = best
        B |= arg
        rest -= arg
    return rho


# reference max flow -------------------------------------------------------------


def ref_max_flow(edges, source, sink):
    """Minimum cut by enumerating every source side."""
    nodes = sorted({x for a, b, _ in edges for x in (a, b)} - {source, sink}, key=str)
    best = None
    for r in range(len(nodes) + 1):
        for side in itertools.combinations(nodes, r):
            S = set(side) | {source}
            cut = sum(c for a, b, c in edges if a in S and b not in S)
            best = cut if best is None else min(best, cut)
    return best if best is not None else 0


def random_layered_dag(rng: random.Random, max_nodes: int = 12, max_layers: int = 4):
    """``(edges, layer count)`` for a DAG whose node layers run from 'S' to 'T'.

    Interior edges connect consecutive layers; capacities are small integers
    so flows are exact.
    """
    layers_total = rng.randint(3, max_layers)
    interior = layers_total - 2
    budget = max_nodes - 2
    sizes = [1] * interior
    for _ in range(rng.randint(0, budget - interior)):
        sizes[rng.randrange(interior)] += 1
    names = []
    k = 0
    for size in sizes:
        names.append([f"n{k + i}" for i in range(size)])
        k += size
    layers = [["S"], *names, ["T"]]
    edges = []
    for a_layer, b_layer in zip(layers, layers[1:]):
        for a in a_layer:
            for b in b_layer:
                if rng.random() < 0.6:
                    edges.append((a, b, rng.randint(0, 5)))
    return edges, layers_total
