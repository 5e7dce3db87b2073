"""Capacitated DAGs with a super-source and super-sink, and blocking flows on them."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field


@dataclass
class FlowNetwork:
    """Directed acyclic network; ``edges[i] = (tail, head, capacity)``.

    Node names are arbitrary hashables.  Capacities may be ints, floats or
    fractions; the arithmetic stays in whatever type they use.
    """

    source: object
    sink: object
    edges: list[tuple[object, object, object]] = field(default_factory=list)

    def add_edge(self, tail, head, cap) -> int:
        if cap < 0:
            raise ValueError(f"negative capacity on {tail}->{head}")
        self.edges.append((tail, head, cap))
        return len(self.edges) - 1

    def nodes(self) -> list:
        seen = {self.source: None, self.sink: None}
        for a, b, _ in self.edges:
            seen.setdefault(a, None)
            seen.setdefault(b, None)
        return list(seen)

    def out_edges(self) -> dict:
        out = defaultdict(list)
        for i, (a, _, _) in enumerate(self.edges):
            out[a].append(i)
        return out

    def topological_order(self) -> list:
        """Nodes in topological order; raises ``ValueError`` on a cycle."""
        indeg = {v: 0 for v in self.nodes()}
        for _, b, _ in self.edges:
            indeg[b] += 1
        out = self.out_edges()
        ready = [v for v in indeg if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop()
            order.append(v)
            for i in out.get(v, ()):
                b = self.edges[i][1]
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        if len(order) != len(indeg):
            raise ValueError("flow network contains a cycle")
        return order

    def layers(self) -> dict:
        """Longest-path depth of every node from the nodes without in-edges."""
        depth = {}
        incoming = defaultdict(list)
        for a, b, _ in self.edges:
            incoming[b].append(a)
        for v in self.topological_order():
            depth[v] = max((depth[a] + 1 for a in incoming[v]), default=0)
        return depth

    def height(self) -> int:
        """Number of layers on the longest path (nodes, not edges)."""
        d = self.layers()
        return max(d.values()) + 1 if d else 0


def blocking_flow(net: FlowNetwork) -> tuple[list, object]:
    """Flow after which every source-to-sink path has a saturated edge.

    Paths are found by depth-first search over edges with spare capacity
    only; no residual back-edges are used, so the result is blocking in the
    path sense over the whole DAG.  Each augmentation saturates at least one
    edge, and nodes that cannot reach the sink are pruned, so the search
    finishes after at most ``|E|`` augmentations.  Returns the per-edge flow
    list and the total value.
    """
    net.topological_order()
    out = net.out_edges()
    caps = [c for _, _, c in net.edges]
    zero = caps[0] * 0 if caps else 0
    flow = [zero] * len(caps)
    arc = defaultdict(int)
    dead = set()
    total = zero
    s, t = net.source, net.sink
    while True:
        path = []
        stack = [s]
        while stack and stack[-1] != t:
            v = stack[-1]
            arcs = out.get(v, ())
            moved = False
            while arc[v] < len(arcs):
                i = arcs[arc[v]]
                head = net.edges[i][1]
                if head not in dead and flow[i] < caps[i]:
                    path.append(i)
                    stack.append(head)
                    moved = True
                    break
                arc[v] += 1
            if not moved:
                dead.add(v)
                stack.pop()
                if path:
                    path.pop()
                    arc[stack[-1]] += 1
        if not stack:
            break
        push = min(caps[i] - flow[i] for i in path)
        for i in path:
            # pin bottlenecks exactly so float capacities cannot leave dust
            flow[i] = caps[i] if caps[i] - flow[i] == push else flow[i] + push
        total += push
    return flow, total


def has_unsaturated_path(net: FlowNetwork, flow: list) -> bool:
    """Whether the sink is reachable from the source along edges with spare capacity."""
    out = net.out_edges()
    seen = {net.source}
    stack = [net.source]
    while stack:
        v = stack.pop()
        if v == net.sink:
            return True
        for i in out.get(v, ()):
            head = net.edges[i][1]
            if flow[i] < net.edges[i][2] and head not in seen:
                seen.add(head)
                stack.append(head)
    return False


def check_flow(net: FlowNetwork, flow: list) -> None:
    """Assert capacity bounds and conservation at every internal node."""
    bal = defaultdict(lambda: 0)
    for (a, b, c), f in zip(net.edges, flow):
        assert 0 <= f <= c, f"flow {f} outside [0, {c}] on {a}->{b}"
        bal[a] -= f
        bal[b] += f
    for v, x in bal.items():
        if v not in (net.source, net.sink):
            assert x == 0, f"conservation broken at {v}: {x}"
