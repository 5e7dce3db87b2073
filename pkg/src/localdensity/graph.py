"""Undirected weighted graphs, k-hop neighbourhoods and deterministic generators.

Vertices are the dense integers ``0..n-1``.  Edge weights are stored as
:class:`fractions.Fraction` so that the exact oracles can compare densities
without rounding; simulators convert to ``float`` on ingestion.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator


class GraphFormatError(ValueError):
    """Raised when an edge-list text cannot be parsed into a valid graph."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _as_weight(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, float):
        return Fraction(w).limit_denominator(10**12)
    return Fraction(w)


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph with positive weights.

    ``edges[i] = (u, v, w)`` with ``u < v``.  ``adj[u]`` lists
    ``(neighbour, edge_index)`` pairs sorted by neighbour.
    """

    n: int
    edges: tuple[tuple[int, int, Fraction], ...]
    adj: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False, compare=False)
    _index: dict = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        Edges are normalised to ``u < v`` and sorted; duplicates, self-loops,
        out-of-range ids and non-positive weights raise ``ValueError``.
        """
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        seen: dict[tuple[int, int], Fraction] = {}
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = Fraction(1)
            else:
                u, v, w = e
                w = _as_weight(w)
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"vertex id out of range in edge ({u}, {v})")
            if w <= 0:
                raise ValueError(f"non-positive weight {w} on edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen[key] = w
        ordered = tuple((u, v, seen[(u, v)]) for (u, v) in sorted(seen))
        adj_lists: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for i, (u, v, _) in enumerate(ordered):
            adj_lists[u].append((v, i))
            adj_lists[v].append((u, i))
        adj = tuple(tuple(sorted(a)) for a in adj_lists)
        index = {(u, v): i for i, (u, v, _) in enumerate(ordered)}
        return cls(n, ordered, adj, index)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.n)

    @property
    def is_unit(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    def edge_index(self, u: int, v: int) -> int:
        """Index of edge ``{u, v}``; ``KeyError`` if absent."""
        return self._index[(min(u, v), max(u, v))]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._index

    def neighbors(self, u: int) -> Iterator[int]:
        return (v for v, _ in self.adj[u])

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def weighted_degree(self, u: int) -> Fraction:
        return sum((self.edges[i][2] for _, i in self.adj[u]), Fraction(0))

    def total_weight(self) -> Fraction:
        return sum((w for _, _, w in self.edges), Fraction(0))

    def float_weights(self) -> list[float]:
        return [float(w) for _, _, w in self.edges]

    def without_edge(self, u: int, v: int) -> "Graph":
        key = (min(u, v), max(u, v))
        if key not in self._index:
            raise KeyError(key)
        return Graph.from_edges(self.n, (e for e in self.edges if (e[0], e[1]) != key))

    def bfs_distances(self, source: int, limit: int | None = None) -> dict[int, int]:
        """Hop distances from ``source``, optionally truncated at ``limit`` hops."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if limit is not None and dist[u] >= limit:
                continue
            for v, _ in self.adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            comp = sorted(self.bfs_distances(s))
            for v in comp:
                seen[v] = True
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.bfs_distances(0)) == self.n

    def diameter(self) -> int:
        """Largest finite hop distance over all pairs (per component)."""
        best = 0
        for s in range(self.n):
            best = max(best, max(self.bfs_distances(s).values()))
        return best

    def induced(self, vertices: Iterable[int]) -> "Subgraph":
        vs = frozenset(vertices)
        for v in vs:
            if not 0 <= v < self.n:
                raise ValueError(f"vertex {v} out of range")
        idx = tuple(i for i, (u, v, _) in enumerate(self.edges) if u in vs and v in vs)
        return Subgraph(self, vs, idx)

    # serialisation -------------------------------------------------------

    def to_text(self) -> str:
        kind = "unit" if self.is_unit else "weighted"
        lines = [f"{self.n} {self.m} {kind}"]
        for u, v, w in self.edges:
            lines.append(f"{u} {v}" if kind == "unit" else f"{u} {v} {w}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        def enc(w: Fraction):
            return int(w) if w.denominator == 1 else str(w)

        return {"n": self.n, "edges": [[u, v, enc(w)] for u, v, w in self.edges]}

    @classmethod
    def from_json(cls, data: dict | str) -> "Graph":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_edges(data["n"], [(u, v, Fraction(w)) for u, v, w in data["edges"]])


@dataclass(frozen=True)
class Subgraph:
    """Induced subgraph of ``parent`` on ``vertices``; ``edge_ids`` index parent edges."""

    parent: Graph = field(repr=False)
    vertices: frozenset[int]
    edge_ids: tuple[int, ...]

    @property
    def edges(self) -> list[tuple[int, int, Fraction]]:
        return [self.parent.edges[i] for i in self.edge_ids]

    def weight(self) -> Fraction:
        return sum((self.parent.edges[i][2] for i in self.edge_ids), Fraction(0))

    def relabel(self) -> tuple[Graph, list[int]]:
        """Return the subgraph as a standalone :class:`Graph` plus ``local -> parent`` ids."""
        order = sorted(self.vertices)
        pos = {v: i for i, v in enumerate(order)}
        g = Graph.from_edges(len(order), [(pos[u], pos[v], w) for u, v, w in self.edges])
        return g, order


def load_graph(text: str) -> Graph:
    """Parse the edge-list format ``"n m [unit|weighted]"`` followed by ``u v [w]`` lines.

    Blank lines and ``#`` comments are ignored.  Errors carry the 1-based
    line number of the offending line.
    """
    lines = text.splitlines()
    header = None
    edges: list[tuple[int, int, Fraction]] = []
    seen: set[tuple[int, int]] = set()
    n = m = 0
    kind = "unit"
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) not in (2, 3):
                raise GraphFormatError("header must be 'n m [unit|weighted]'", lineno)
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError("header counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise GraphFormatError("negative count in header", lineno)
            if len(parts) == 3:
                kind = parts[2].lower()
                if kind not in ("unit", "weighted"):
                    raise GraphFormatError(f"unknown graph kind {parts[2]!r}", lineno)
            header = lineno
            continue
        if len(parts) not in (2, 3):
            raise GraphFormatError("edge line must be 'u v [weight]'", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("vertex ids must be integers", lineno) from None
        w = Fraction(1)
        if len(parts) == 3:
            try:
                w = Fraction(parts[2])
            except (ValueError, ZeroDivisionError):
                raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
            if kind == "unit" and w != 1:
                raise GraphFormatError("non-unit weight in a unit graph", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range (n={n})", lineno)
        if w <= 0:
            raise GraphFormatError(f"non-positive weight {w}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key[0]}-{key[1]}", lineno)
        seen.add(key)
        edges.append((u, v, w))
    if header is None:
        raise GraphFormatError("missing header line")
    if len(edges) != m:
        raise GraphFormatError(f"header declares {m} edges but {len(edges)} were given", header)
    return Graph.from_edges(n, edges)


def serialize(g: Graph) -> str:
    return g.to_text()


def khop_subgraph(g: Graph, v: int, k: int) -> Subgraph:
    """Induced subgraph on all vertices within ``k`` hops of ``v``."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if k < 0:
        raise ValueError("hop count must be non-negative")
    return g.induced(g.bfs_distances(v, limit=k))


# generators ---------------------------------------------------------------


def clique(c: int) -> Graph:
    _positive(c=c)
    return Graph.from_edges(c, [(i, j) for i in range(c) for j in range(i + 1, c)])


def path(p: int) -> Graph:
    """Path on ``p`` vertices."""
    _positive(p=p)
    return Graph.from_edges(p, [(i, i + 1) for i in range(p - 1)])


def star(s: int) -> Graph:
    """Star ``K_{1,s}``: centre 0 joined to leaves ``1..s``."""
    _positive(s=s)
    return Graph.from_edges(s + 1, [(0, i) for i in range(1, s + 1)])


def lollipop(c: int, p: int) -> Graph:
    """``K_c`` on ``0..c-1`` with a path of ``p`` extra vertices hanging off vertex ``c-1``."""
    _positive(c=c, p=p)
    edges = [(i, j) for i in range(c) for j in range(i + 1, c)]
    prev = c - 1
    for k in range(c, c + p):
        edges.append((prev, k))
        prev = k
    return Graph.from_edges(c + p, edges)


def gnm(n: int, m: int, seed: int) -> Graph:
    """Uniform random graph with ``n`` vertices and ``m`` edges, seeded explicitly."""
    _positive(n=n)
    if m < 0 or m > n * (n - 1) // 2:
        raise ValueError(f"infeasible edge count m={m} for n={n}")
    rng = random.Random(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph.from_edges(n, rng.sample(pairs, m))


def two_cliques_on_path(c: int, p: int) -> Graph:
    """Two ``K_c`` joined by a path of ``p`` intermediate vertices."""
    _positive(c=c)
    if p < 0:
        raise ValueError("path length must be non-negative")
    edges = [(i, j) for i in range(c) for j in range(i + 1, c)]
    off = c + p
    edges += [(off + i, off + j) for i in range(c) for j in range(i + 1, c)]
    chain = [c - 1] + list(range(c, c + p)) + [off]
    edges += list(zip(chain, chain[1:]))
    return Graph.from_edges(2 * c + p, edges)


def _positive(**params: int) -> None:
    for name, val in params.items():
        if val <= 0:
            raise ValueError(f"{name} must be positive, got {val}")


_GENERATORS = {
    "clique": (clique, 1),
    "path": (path, 1),
    "star": (star, 1),
    "lollipop": (lollipop, 2),
    "gnm": (gnm, 3),
    "barbell": (two_cliques_on_path, 2),
}


def generate(spec: str | tuple) -> Graph:
    """Build a graph from a spec such as ``"clique:4"``, ``"lollipop:4,3"``
    or ``"gnm:10,15,7"`` (n, m, seed).  ``"lollipop(4,3)"`` and tuples such
    as ``("gnm", 10, 15, 7)`` work too.
    """
    if isinstance(spec, str):
        spec = spec.strip()
        if spec.endswith(")") and "(" in spec:
            spec = spec[:-1].replace("(", ":", 1)
        name, _, rest = spec.partition(":")
        args = [int(a) for a in rest.replace(" ", "").split(",") if a] if rest else []
    else:
        name, *args = spec
    name = name.strip().lower()
    if name not in _GENERATORS:
        raise ValueError(f"unknown generator {name!r}; expected one of {sorted(_GENERATORS)}")
    fn, arity = _GENERATORS[name]
    if len(args) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(args)}")
    return fn(*args)
