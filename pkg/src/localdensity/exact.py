"""Exact ground truth for small graphs.

Densities are computed with :class:`fractions.Fraction`.  The brute-force
routines enumerate vertex subsets through an integer lookup table indexed by
bitmask, so they are limited to ``n <= MAX_BRUTE_FORCE_N``.

The quadratic-program orientation (minimise the sum of squared out-degrees)
is approximated by pairwise rebalancing sweeps; its fixed points are exactly
the locally fair orientations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable

import numpy as np

from .graph import Graph, Subgraph

MAX_BRUTE_FORCE_N = 24
DEFAULT_TOL = 1e-9
DEFAULT_MAX_SWEEPS = 10**6


class GuardError(ValueError):
    """Raised when an exponential routine is asked to run beyond its size guard."""


class ConvergenceError(RuntimeError):
    """Raised by :func:`solve_fo2` when the sweep cap is hit; ``residual`` is the last violation."""

    def __init__(self, message: str, residual: float, sweeps: int):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps


def density(g: Graph, vertices: Subgraph | Iterable[int]) -> Fraction:
    """Total induced edge weight divided by the number of vertices."""
    sub = vertices if isinstance(vertices, Subgraph) else g.induced(vertices)
    if not sub.vertices:
        raise ValueError("density of an empty vertex set is undefined")
    return sub.weight() / len(sub.vertices)


def quotient_density(g: Graph, B: Iterable[int], X: Iterable[int]) -> Fraction:
    """Weight of edges with one end in ``X`` and the other in ``X | B``, over ``|X|``."""
    B, X = frozenset(B), frozenset(X)
    if not X:
        raise ValueError("X must be nonempty")
    if B & X:
        raise ValueError("X and B must be disjoint")
    total = Fraction(0)
    for u, v, w in g.edges:
        if (u in X and (v in X or v in B)) or (v in X and u in B):
            total += w
    return total / len(X)


# brute force ---------------------------------------------------------------


class _SubsetTable:
    """Induced weight of every vertex subset, scaled to integers.

    ``weight[S]`` is the induced weight of bitmask ``S`` times ``scale``.
    """

    def __init__(self, g: Graph):
        if g.n > MAX_BRUTE_FORCE_N:
            raise GuardError(f"brute force limited to n <= {MAX_BRUTE_FORCE_N}, got n={g.n}")
        self.n = g.n
        self.scale = lcm(*(w.denominator for _, _, w in g.edges)) if g.edges else 1
        size = 1 << g.n
        table = np.zeros(size, dtype=np.int64)
        idx = np.arange(size, dtype=np.int64)
        for i in range(g.n):
            lo = 1 << i
            gain = np.zeros(lo, dtype=np.int64)
            for j, e in g.adj[i]:
                if j < i:
                    w = g.edges[e][2] * self.scale
                    gain += int(w) * ((idx[:lo] >> j) & 1)
            table[lo : 2 * lo] = table[:lo] + gain
        self.weight = table
        self.popcount = np.zeros(size, dtype=np.int64)
        for i in range(g.n):
            self.popcount += (idx >> i) & 1
        self.index = idx

    def best_quotient(self, B: int) -> tuple[int, Fraction]:
        """Union of all maximisers of the quotient density over ``X`` disjoint from ``B``."""
        free = ((self.index & B) == 0) & (self.index != 0)
        cand = self.index[free]
        gains = self.weight[cand | B] - self.weight[B]
        sizes = self.popcount[cand]
        approx = gains / sizes
        top = approx.max()
        # float pass narrows the field; the exact check below settles ties
        near = np.nonzero(approx >= top - 1e-9 * max(1.0, abs(top)))[0]
        best = max(Fraction(int(gains[k]), int(sizes[k])) for k in near)
        union = 0
        for k in near:
            if Fraction(int(gains[k]), int(sizes[k])) == best:
                union |= int(cand[k])
        union_val = Fraction(int(self.weight[union | B] - self.weight[B]), int(self.popcount[union]))
        # maximisers are closed under union
        assert union_val == best, "quotient maximisers not closed under union"
        return union, best / self.scale


def _bits(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def densest_subgraph_bruteforce(g: Graph) -> tuple[frozenset[int], Fraction]:
    """Maximal densest vertex set and its exact density."""
    if g.n == 0:
        raise ValueError("empty graph")
    table = _SubsetTable(g)
    mask, val = table.best_quotient(0)
    return _bits(mask), val


@dataclass(frozen=True)
class Level:
    S: frozenset[int]
    B_prev: frozenset[int]
    density: Fraction


@dataclass(frozen=True)
class Decomposition:
    """Ordered peeling ``[(S_1, B_0, rho_1), ...]`` with strictly decreasing densities."""

    levels: tuple[Level, ...]

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    def local_density(self) -> dict[int, Fraction]:
        return {v: lvl.density for lvl in self.levels for v in lvl.S}

    def to_json(self) -> list[dict]:
        return [
            {"S": sorted(l.S), "B_prev": sorted(l.B_prev), "density": str(l.density),
             "density_float": float(l.density)}
            for l in self.levels
        ]


def diminishing_decomposition(g: Graph) -> Decomposition:
    """Peel maximal maximisers of the quotient density until every vertex is placed."""
    table = _SubsetTable(g)
    full = (1 << g.n) - 1
    B = 0
    levels = []
    while B != full:
        S, val = table.best_quotient(B)
        levels.append(Level(_bits(S), _bits(B), val))
        B |= S
    for a, b in zip(levels, levels[1:]):
        assert a.density > b.density, "decomposition densities must strictly decrease"
    return Decomposition(tuple(levels))


def local_density_exact(g: Graph) -> dict[int, Fraction]:
    """Exact local density of every vertex, read off the decomposition."""
    return diminishing_decomposition(g).local_density()


# quadratic-program orientation ---------------------------------------------------


def solve_fo2(
    g: Graph,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    reverse: bool = False,
    start=None,
):
    """Locally fair fractional orientation by pairwise rebalancing.

    Each sweep visits the edges in index order (``reverse=True`` flips the
    order).  On an edge whose heavier endpoint still sends mass to the
    lighter one, ``min(mass, gap / 2)`` is moved back.  Sweeps stop once the
    largest violation ``g(u) - g(v)`` over edges with ``g(u->v) > 0`` is at
    most ``tol``.  ``start`` optionally seeds the solver with an existing
    orientation on the same graph.
    """
    from .orientation import FractionalOrientation, init_half

    if tol <= 0:
        raise ValueError("tol must be positive")
    o = FractionalOrientation.from_other(start, float) if start is not None else init_half(g, exact=False)
    x = o.x
    out = o.out
    w = o.w
    ends = [(u, v) for u, v, _ in g.edges]
    order = list(range(g.m))
    if reverse:
        order.reverse()
    residual = _max_violation(ends, x, w, out)
    sweeps = 0
    while residual > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"no convergence after {sweeps} sweeps (residual {residual:.3e})", residual, sweeps
            )
        for e in order:
            u, v = ends[e]
            gu, gv = out[u], out[v]
            xe = x[e]
            if gu > gv and xe > 0:
                d = min(xe, (gu - gv) / 2)
                x[e] = xe - d
                out[u] = gu - d
                out[v] = gv + d
            elif gv > gu and w[e] - xe > 0:
                d = min(w[e] - xe, (gv - gu) / 2)
                x[e] = xe + d
                out[v] = gv - d
                out[u] = gu + d
        sweeps += 1
        residual = _max_violation(ends, x, w, out)
    o.sweeps = sweeps
    o.refresh()
    return o


def _max_violation(ends, x, w, out) -> float:
    worst = 0.0
    for e, (u, v) in enumerate(ends):
        d = out[u] - out[v]
        if d > worst and x[e] > 0:
            worst = d
        elif -d > worst and w[e] - x[e] > 0:
            worst = -d
    return worst


def verify_duality(g: Graph, tol: float = 1e-6, solver_tol: float = DEFAULT_TOL) -> dict:
    """Compare the solver's out-degrees with the brute-force oracles.

    The report lists every vertex with its exact local density and solver
    out-degree; ``ok`` is false and ``failure`` names the first offending
    vertex when any gap exceeds ``tol``.
    """
    rho_max_set, rho_max = densest_subgraph_bruteforce(g)
    rho = local_density_exact(g)
    o = solve_fo2(g, tol=solver_tol)
    per_vertex = []
    failure = None
    max_res = 0.0
    for v in range(g.n):
        gap = abs(o.out[v] - float(rho[v]))
        max_res = max(max_res, gap)
        per_vertex.append({"v": v, "rho_star": float(rho[v]), "rho_star_exact": str(rho[v]), "g": o.out[v]})
        if gap > tol and failure is None:
            failure = {"v": v, "rho_star": float(rho[v]), "g": o.out[v], "gap": gap}
    gmax = max(o.out) if g.n else 0.0
    top_gap = abs(gmax - float(rho_max))
    if top_gap > tol and failure is None:
        failure = {"v": None, "rho_max": float(rho_max), "max_g": gmax, "gap": top_gap}
    return {
        "rho_max": float(rho_max),
        "rho_max_exact": str(rho_max),
        "densest_set": sorted(rho_max_set),
        "max_g": gmax,
        "per_vertex": per_vertex,
        "max_residual": max(max_res, top_gap),
        "tol": tol,
        "sweeps": o.sweeps,
        "ok": failure is None,
        "failure": failure,
    }
