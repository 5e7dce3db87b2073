"""LOCAL-model estimate of every vertex's local density.

Each node floods the edges it knows for ``k`` rounds, rebuilds its
``k``-hop neighbourhood, solves the quadratic-program orientation on it and
outputs its own out-degree.
"""

from __future__ import annotations

from .exact import DEFAULT_TOL, solve_fo2
from .graph import Graph, khop_subgraph
from .orientation import schedule_k
from .sim import LOCAL, Trace, run


class NeighborhoodGather:
    """Flood incident edges for ``k`` rounds, then solve on the gathered ball.

    Only edges learned in the previous round are forwarded, so every edge
    crosses each link at most once per direction.
    """

    def __init__(self, k: int, tol: float = DEFAULT_TOL):
        self.k = k
        self.tol = tol

    def init(self, node, view):
        own = frozenset(view.incident)
        return {"id": node, "nbrs": view.neighbors, "known": own, "fresh": own}

    def step(self, state, round_no, inbox):
        known = state["known"]
        fresh = frozenset()
        for edges in inbox.values():
            new = edges - known
            if new:
                fresh |= new
                known = known | new
        if round_no == 0:
            fresh = state["fresh"]
        state = dict(state, known=known, fresh=fresh)
        if round_no >= self.k:
            return state, {}, self._solve(state)
        sends = {u: fresh for u in state["nbrs"]} if fresh else {}
        return state, sends, None

    def _solve(self, state) -> float:
        v = state["id"]
        if not state["known"]:
            return 0.0
        verts = sorted({x for u, w, _ in state["known"] for x in (u, w)})
        pos = {x: i for i, x in enumerate(verts)}
        ball = Graph.from_edges(len(verts), [(pos[a], pos[b], wt) for a, b, wt in state["known"]])
        sub, order = khop_subgraph(ball, pos[v], self.k).relabel()
        o = solve_fo2(sub, tol=self.tol)
        return o.out[order.index(pos[v])]


def local_density_local_model(
    g: Graph, eps: float, multiplier: float = 1.0, tol: float = DEFAULT_TOL, k: int | None = None
) -> tuple[dict[int, float], Trace]:
    """Run the gathering algorithm and return ``({v: rho_v}, trace)``."""
    if not g.is_unit:
        raise ValueError("the LOCAL algorithm is defined for unit-weight graphs")
    if k is None:
        k = schedule_k(eps, g.n, multiplier)
    trace = run(g, NeighborhoodGather(k, tol), mode=LOCAL, budget=k)
    return dict(trace.outputs), trace


def local_reference(g: Graph, k: int, tol: float = DEFAULT_TOL) -> dict[int, float]:
    """Centralised equivalent: solve on each ``k``-hop ball directly."""
    out = {}
    for v in range(g.n):
        sub, order = khop_subgraph(g, v, k).relabel()
        out[v] = solve_fo2(sub, tol=tol).out[order.index(v)] if sub.m else 0.0
    return out
