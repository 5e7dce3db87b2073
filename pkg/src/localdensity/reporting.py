"""Reporting a dense subgraph: every vertex outputs one bit.

A truncated max-flooding election picks leaders whose priority is their
out-degree under a fair orientation (ties to the lower id).  Each active
leader re-orients its ball, looks at the nested sets ``T_i`` of vertices
whose out-degree is within ``(1+eta)^-i`` of the top, and cuts where the
sets stop growing by a ``1 + eps/16`` factor.  Vertices above the cut
output 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import GuardError, MAX_BRUTE_FORCE_N, densest_subgraph_bruteforce, density, local_density_exact, solve_fo2
from .graph import Graph, khop_subgraph
from .orientation import FractionalOrientation, eta_for, schedule_k
from .sim import CONGEST, Trace, charge_abstract_rounds, default_bandwidth, run

RADIUS_CONSTANT = 32
PRIORITY_BITS = 20


def election_radius(n: int, eps: float, c: float = RADIUS_CONSTANT) -> int:
    """Truncation radius ``ceil(c log2 n / eps)``."""
    return max(1, math.ceil(c * math.log2(n) / eps - 1e-9))


def priority(value: float, v: int) -> tuple[int, int]:
    """Comparable key: out-degree rounded to ``2**-20``, then lower id wins."""
    return (math.floor(float(value) * (1 << PRIORITY_BITS) + 0.5), -v)


class MaxFlood:
    """Every node repeatedly forwards the largest key it has seen.

    After ``t`` rounds a node's best key names the candidate it
    acknowledges; after ``2t`` rounds it equals the maximum over the
    ``2t``-ball, which is the maximum over the ``t``-balls of every vertex
    in its own ``t``-ball.  So a node that still holds its own key after
    ``2t`` rounds is acknowledged by its entire ``t``-hop neighbourhood.
    """

    def __init__(self, keys: dict[int, tuple[int, int]], t: int):
        self.keys = keys
        self.t = t

    def init(self, node, view):
        return {"own": self.keys[node], "best": self.keys[node], "ack": None, "nbrs": view.neighbors, "sent": None}

    def step(self, state, round_no, inbox):
        best = max([state["best"], *inbox.values()])
        state = dict(state, best=best)
        if round_no == self.t:
            state["ack"] = -best[1]
        if round_no >= 2 * self.t:
            return state, {}, (state["ack"], best == state["own"])
        # only changes need to travel
        sends = {u: best for u in state["nbrs"]} if best != state["sent"] else {}
        state["sent"] = best
        return state, sends, None


def elect_leaders(
    g: Graph,
    orientation: FractionalOrientation,
    eps: float,
    radius: int | None = None,
    c: float = RADIUS_CONSTANT,
) -> tuple[list[int], dict[int, int], Trace]:
    """Truncated election; returns ``(leaders, acknowledgement map, trace)``.

    ``radius`` overrides ``ceil(c log2 n / eps)``.  A node isolated from
    everything elects itself.
    """
    t = election_radius(g.n, eps, c) if radius is None else radius
    keys = {v: priority(orientation.out[v], v) for v in range(g.n)}
    # keys are two ints, so an id-sized bandwidth plus the fixed-point part suffices
    trace = run(g, MaxFlood(keys, t), mode=CONGEST, budget=2 * t, bandwidth=default_bandwidth(g.n) + 64)
    acks = {v: out[0] for v, out in trace.outputs.items()}
    leaders = sorted(v for v, out in trace.outputs.items() if out[1])
    trace.meta = {"radius": t}
    return leaders, acks, trace


@dataclass
class LeaderRecord:
    leader: int
    active: bool
    h_max: float | None = None
    k: int | None = None
    cutoff: float | None = None
    ball: list[int] = field(default_factory=list)
    T_sizes: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"leader": self.leader, "active": self.active, "h_max": self.h_max, "k": self.k,
                "cutoff": self.cutoff, "ball_size": len(self.ball), "T_sizes": self.T_sizes}


@dataclass
class ReportResult:
    bits: dict[int, int]
    leaders: list[LeaderRecord]
    trace: Trace
    eps: float
    target: float | None = None

    @property
    def H(self) -> frozenset[int]:
        return frozenset(v for v, b in self.bits.items() if b)

    def density(self, g: Graph) -> Fraction | None:
        return density(g, self.H) if self.H else None

    def to_json(self, g: Graph) -> dict:
        rho = self.density(g)
        out = {
            "eps": self.eps,
            "bits": [self.bits[v] for v in sorted(self.bits)],
            "H": sorted(self.H),
            "rho_H": None if rho is None else float(rho),
            "leaders": [r.to_json() for r in self.leaders],
            "rounds": self.trace.total_rounds,
        }
        if self.target is not None:
            out["target"] = self.target
            out["bound"] = (1 - self.eps) * self.target
            out["certified"] = rho is None or float(rho) >= (1 - self.eps) * self.target - 1e-9
        return out


def _cutoff_scan(values: dict[int, float], top: float, eta: float, eps: float, n: int) -> tuple[int, float, list[int]]:
    """Smallest ``k`` with ``|T_{k+1}| < (1 + eps/16) |T_k|`` and the matching cut-off."""
    grow = 1 + eps / 16
    last = math.ceil(math.log(n) / math.log(grow)) + 1
    sizes = []
    for i in range(last + 1):
        thr = top * (1 + eta) ** (-i)
        sizes.append(sum(1 for x in values.values() if x >= thr))
        if i and sizes[i] < grow * sizes[i - 1]:
            k = i - 1
            return k, top * (1 + eta) ** (-(k + 1)), sizes
    raise RuntimeError("the T_i sizes never stabilised; more than n vertices would be needed")


def _ball_orientation(g: Graph, ball: frozenset[int]) -> dict[int, float]:
    sub, order = g.induced(ball).relabel()
    o = solve_fo2(sub)
    return {order[i]: o.out[i] for i in range(sub.n)}


def report_subgraph(
    g: Graph,
    eps: float,
    dtilde: float,
    orientation: FractionalOrientation | None = None,
    radius: int | None = None,
    c: float = RADIUS_CONSTANT,
) -> ReportResult:
    """Bits whose 1-set is empty or has density at least ``(1 - eps) dtilde``.

    ``orientation`` is the first fair orientation the election uses; it
    defaults to the fair orientation from :func:`solve_fo2`.
    """
    if not g.is_unit:
        raise ValueError("reporting is defined for unit-weight graphs")
    if dtilde < 0:
        raise ValueError("dtilde must be nonnegative")
    eta = eta_for(eps, g.n)
    o = orientation if orientation is not None else solve_fo2(g)
    leaders, _, trace = elect_leaders(g, o, eps, radius, c)
    t = trace.meta["radius"]
    bits = {v: 0 for v in range(g.n)}
    records = []
    seen: set[int] = set()
    for ldr in leaders:
        ball = frozenset(g.bfs_distances(ldr, limit=t))
        if ball & seen:
            raise RuntimeError(f"leader {ldr} shares its ball with another leader")
        seen |= ball
        if float(o.out[ldr]) < dtilde:
            records.append(LeaderRecord(ldr, False, ball=sorted(ball)))
            continue
        h = _ball_orientation(g, ball)
        top = max(h.values())
        k, cut, sizes = _cutoff_scan(h, top, eta, eps, g.n)
        for u in ball:
            if h[u] >= cut:
                bits[u] = 1
        records.append(LeaderRecord(ldr, True, top, k, cut, sorted(ball), sizes))
    # status broadcast, h_max gather, one gather per T_i, cut-off broadcast
    scans = max((len(r.T_sizes) for r in records), default=0)
    charge_abstract_rounds(trace, "leader-status", t)
    charge_abstract_rounds(trace, "gather-hmax", t)
    charge_abstract_rounds(trace, "gather-T", t * scans)
    charge_abstract_rounds(trace, "broadcast-cutoff", t)
    trace.outputs = dict(bits)
    return ReportResult(bits, records, trace, eps, float(dtilde))


def report_local_subgraph(g: Graph, eps: float, v: int, multiplier: float = 1.0) -> ReportResult:
    """Bits whose 1-set contains ``v`` and has density at least ``(1 - eps) rho*(v)``.

    ``v`` is the only leader and works on its ``k``-hop ball with ``k`` the
    hop radius of the LOCAL algorithm; the ``T_i`` are measured relative
    to ``v``'s own out-degree.
    """
    if not g.is_unit:
        raise ValueError("reporting is defined for unit-weight graphs")
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    eta = eta_for(eps, g.n)
    k = schedule_k(eps, g.n, multiplier)
    ball = frozenset(khop_subgraph(g, v, k).vertices)
    h = _ball_orientation(g, ball)
    kk, cut, sizes = _cutoff_scan(h, h[v], eta, eps, g.n)
    bits = {u: int(u in ball and h[u] >= cut) for u in range(g.n)}
    trace = Trace(CONGEST, None)
    charge_abstract_rounds(trace, "gather-ball", k)
    charge_abstract_rounds(trace, "gather-T", k * len(sizes))
    charge_abstract_rounds(trace, "broadcast-cutoff", k)
    trace.outputs = dict(bits)
    rec = LeaderRecord(v, True, h[v], kk, cut, sorted(ball), sizes)
    return ReportResult(bits, [rec], trace, eps)


def verify_t_hop_dense_subgraph(g: Graph, v: int, eps: float, rho_star=None) -> dict:
    """Densest subgraph inside the ``ceil(2 log2 n / eps)``-ball of ``v`` versus ``(1 - eps) rho*(v)``."""
    if g.n > MAX_BRUTE_FORCE_N:
        raise GuardError(f"n={g.n} exceeds the brute-force limit of {MAX_BRUTE_FORCE_N}")
    t = math.ceil(2 * math.log2(g.n) / eps - 1e-9)
    if rho_star is None:
        rho_star = local_density_exact(g)[v]
    sub, order = khop_subgraph(g, v, t).relabel()
    if sub.m == 0:
        witness, rho = frozenset([v]), Fraction(0)
    else:
        S, rho = densest_subgraph_bruteforce(sub)
        witness = frozenset(order[i] for i in S)
    bound = (1 - Fraction(eps).limit_denominator(10**9)) * Fraction(rho_star)
    return {
        "v": v, "t": t, "witness": sorted(witness), "density": float(rho), "rho_star": float(rho_star),
        "bound": float(bound), "pass": rho >= bound,
    }
