"""Fractional orientations, fairness predicates, levels and deletion-only repair."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .graph import Graph

FLOAT_TOL = 1e-9
# distinguished level for out-degree zero; below every real level
FLOOR_LEVEL = -(1 << 30)
ZERO_FLOOR = 1e-12
_REL = 1e-12


class PreconditionError(ValueError):
    pass


class FractionalOrientation:
    """Per-edge split of each weight into two nonnegative directed parts.

    ``x[e]`` is the mass pointing from the lower-id endpoint of edge ``e`` to
    the higher-id one; the opposite direction carries ``w[e] - x[e]``.
    ``out[v]`` caches the out-degree.  Deleted edges keep their slot but are
    marked dead and carry no mass.
    """

    def __init__(self, g: Graph, x: list, exact: bool):
        self.g = g
        self.exact = exact
        num = Fraction if exact else float
        self.w = [num(wt) for _, _, wt in g.edges]
        self.x = [num(v) for v in x]
        self.alive = [True] * g.m
        self.out = [num(0)] * g.n
        self.sweeps = 0
        self.refresh()

    @classmethod
    def from_other(cls, o: "FractionalOrientation", num=float) -> "FractionalOrientation":
        new = cls(o.g, [num(v) for v in o.x], exact=num is Fraction)
        new.alive = list(o.alive)
        for e, a in enumerate(new.alive):
            if not a:
                new.x[e] = new.w[e] = new.x[e] * 0
        new.refresh()
        return new

    def copy(self) -> "FractionalOrientation":
        return FractionalOrientation.from_other(self, Fraction if self.exact else float)

    def refresh(self) -> None:
        zero = Fraction(0) if self.exact else 0.0
        out = [zero] * self.g.n
        for e, (u, v, _) in enumerate(self.g.edges):
            if not self.alive[e]:
                continue
            out[u] += self.x[e]
            out[v] += self.w[e] - self.x[e]
        self.out = out

    # access ----------------------------------------------------------------

    def mass(self, a: int, b: int):
        """Directed mass ``g(a -> b)``."""
        e = self.g.edge_index(a, b)
        if not self.alive[e]:
            return self.x[e] * 0
        return self.x[e] if a < b else self.w[e] - self.x[e]

    def mass_on(self, e: int, tail: int):
        if not self.alive[e]:
            return self.x[e] * 0
        return self.x[e] if tail == self.g.edges[e][0] else self.w[e] - self.x[e]

    def neighbors(self, u: int) -> Iterable[tuple[int, int]]:
        """Alive ``(neighbour, edge)`` pairs around ``u``."""
        return ((v, e) for v, e in self.g.adj[u] if self.alive[e])

    def transfer(self, a: int, b: int, d) -> None:
        """Decrease ``g(a -> b)`` by ``d`` and increase ``g(b -> a)`` by the same."""
        e = self.g.edge_index(a, b)
        if a < b:
            self.x[e] -= d
        else:
            self.x[e] += d
        self.out[a] -= d
        self.out[b] += d

    def remove_edge(self, u: int, v: int) -> None:
        e = self.g.edge_index(u, v)
        if not self.alive[e]:
            raise KeyError((u, v))
        self.out[u] -= self.mass(u, v)
        self.out[v] -= self.mass(v, u)
        self.alive[e] = False
        self.x[e] = self.x[e] * 0
        self.w[e] = self.w[e] * 0

    def total(self):
        return sum(self.out)

    def alive_edges(self) -> list[tuple[int, int]]:
        return [(u, v) for e, (u, v, _) in enumerate(self.g.edges) if self.alive[e]]

    def check(self, tol: float = FLOAT_TOL) -> None:
        """Assert nonnegativity, per-edge conservation and out-degree cache consistency."""
        t = 0 if self.exact else tol
        for e in range(self.g.m):
            if self.alive[e]:
                assert -t <= self.x[e] <= self.w[e] + t, f"edge {e} mass out of range"
        cached = list(self.out)
        self.refresh()
        for v in range(self.g.n):
            assert abs(cached[v] - self.out[v]) <= t + (1e-9 if not self.exact else 0), f"stale out-degree at {v}"

    def to_json(self, levels: dict[int, int] | None = None) -> dict:
        edges = []
        for e, (u, v, _) in enumerate(self.g.edges):
            if self.alive[e]:
                edges.append({"u": u, "v": v, "g_uv": float(self.x[e]), "g_vu": float(self.w[e] - self.x[e])})
        verts = []
        for v in range(self.g.n):
            rec = {"v": v, "g": float(self.out[v])}
            if levels is not None:
                rec["level"] = levels[v]
            verts.append(rec)
        return {"edges": edges, "vertices": verts}


def init_half(g: Graph, exact: bool = True) -> FractionalOrientation:
    """Split every edge evenly between its two directions."""
    if exact:
        return FractionalOrientation(g, [w / 2 for _, _, w in g.edges], exact=True)
    return FractionalOrientation(g, [float(w) / 2 for _, _, w in g.edges], exact=False)


def orientation_from_masses(g: Graph, masses: dict[tuple[int, int], float], exact=False) -> FractionalOrientation:
    """Build an orientation from ``{(u, v): g(u->v)}`` entries (missing edges split evenly)."""
    num = Fraction if exact else float
    x = []
    for u, v, w in g.edges:
        if (u, v) in masses:
            x.append(num(masses[(u, v)]))
        elif (v, u) in masses:
            x.append(num(w) - num(masses[(v, u)]))
        else:
            x.append(num(w) / 2)
    return FractionalOrientation(g, x, exact=exact)


# fairness ----------------------------------------------------------------------


def is_locally_fair(o: FractionalOrientation, tol: float = FLOAT_TOL) -> list[tuple[int, int]]:
    """Directed edges ``(u, v)`` with ``g(u->v) > tol`` and ``g(u) > g(v) + tol``."""
    return is_eta_fair(o, 0.0, tol)


def is_eta_fair(o: FractionalOrientation, eta: float, tol: float = FLOAT_TOL) -> list[tuple[int, int]]:
    """Directed edges ``(u, v)`` with ``g(u->v) > tol`` and ``g(u) > (1 + eta) g(v) + tol``."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    bad = []
    for e, (u, v, _) in enumerate(o.g.edges):
        if not o.alive[e]:
            continue
        for a, b in ((u, v), (v, u)):
            if o.mass_on(e, a) > tol and o.out[a] > (1 + eta) * o.out[b] + tol:
                bad.append((a, b))
    return bad


def relax_to_eta_fair(o: FractionalOrientation, eta: float, tol: float = FLOAT_TOL, max_moves: int = 10**7) -> int:
    """Rebalance bad edges in place until the orientation is ``eta``-fair.

    Each move on a bad edge ``a -> b`` shifts ``min(g(a->b), (g(a)-g(b))/2)``
    back to ``b``.  Returns the number of moves.
    """
    moves = 0
    while True:
        bad = is_eta_fair(o, eta, tol)
        if not bad:
            return moves
        for a, b in bad:
            ga, gb = o.out[a], o.out[b]
            m = o.mass(a, b)
            if m > tol and ga > (1 + eta) * gb + tol:
                o.transfer(a, b, min(m, (ga - gb) / 2))
                moves += 1
        if moves > max_moves:
            raise RuntimeError("relaxation did not settle")


# parameters ----------------------------------------------------------------------


def _check_eps(eps: float, n: int) -> None:
    if not (0 < eps <= 1):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")


def eta_for(eps: float, n: int) -> float:
    """Fairness slack ``eps^2 / (128 log2 n)``."""
    _check_eps(eps, n)
    return eps * eps / (128 * math.log2(n))


def schedule_k(eps: float, n: int, multiplier: float = 1.0) -> int:
    """Hop radius ``ceil(multiplier * eps^-2 * log2(n)^2)``."""
    _check_eps(eps, n)
    raw = multiplier * math.log2(n) ** 2 / (eps * eps)
    return max(1, math.ceil(raw - 1e-9))


def depth_bound(n: int, eta: float) -> int:
    """Recursion-depth ceiling ``ceil(log2 n / log2(1 + eta)) + 1``."""
    return math.ceil(math.log2(n) / math.log2(1 + eta)) + 1


# levels ----------------------------------------------------------------------------


def level_base(eta: float) -> float:
    """Ratio between consecutive level thresholds.

    ``sqrt(1 + eta)`` makes "no edge skips a level" equivalent to
    ``eta``-fairness: a tail at most one level above its head has at most
    ``base**2 = 1 + eta`` times its out-degree.
    """
    return math.sqrt(1 + eta)


def level_of(value, eta: float, rising: bool = False, base: float | None = None) -> int:
    """Level ``i`` with ``base**i <= value < base**(i+1)``.

    A value sitting on a threshold ``base**i`` belongs to both ``i - 1`` and
    ``i``; a vertex whose out-degree just rose takes the lower one, otherwise
    the higher one.  Zero maps to :data:`FLOOR_LEVEL`.
    """
    value = float(value)
    if value < 0:
        raise ValueError("out-degree must be nonnegative")
    if value <= ZERO_FLOOR:
        return FLOOR_LEVEL
    r = base if base is not None else level_base(eta)
    i = math.floor(math.log(value) / math.log(r))
    while r**i > value:
        i -= 1
    while r ** (i + 1) <= value:
        i += 1
    if value >= r ** (i + 1) * (1 - _REL):
        edge = i + 1
    elif value <= r**i * (1 + _REL):
        edge = i
    else:
        return i
    return edge - 1 if rising else edge


class LevelIndex:
    """Per-vertex levels that follow the threshold tie rule across updates."""

    def __init__(self, values: list, eta: float, base: float | None = None):
        self.eta = eta
        self.base = base if base is not None else level_base(eta)
        self.level = [level_of(v, eta, False, self.base) for v in values]

    def threshold(self, i: int) -> float:
        return self.base**i

    def update(self, v: int, old, new) -> int:
        if new != old:
            self.level[v] = level_of(new, self.eta, new > old, self.base)
        return self.level[v]

    def is_violating(self, o: FractionalOrientation, a: int, b: int, tol: float = 0.0) -> bool:
        return o.mass(a, b) > tol and self.level[a] > self.level[b] + 1


# deletion-only maintenance ---------------------------------------------------------


@dataclass
class DecreaseStats:
    depth: int = 0
    calls: int = 0
    transferred: float = 0.0
    cleanup_moves: int = 0
    trail: list = field(default_factory=list)


def _in_argmax(o: FractionalOrientation, u: int, tol, skip: frozenset[int], chain: set[int]):
    best = None
    for w, e in o.neighbors(u):
        if e in skip or w in chain or o.mass_on(e, w) <= tol:
            continue
        if best is None or o.out[w] > o.out[best] or (o.out[w] == o.out[best] and w < best):
            best = w
    return best


def _compensate(o, u, delta, eta, depth, stats: DecreaseStats, tol, skip, chain: set[int]):
    """Pull in-mass toward ``u`` before it loses ``delta`` of out-degree.

    ``chain`` holds the vertices of the enclosing calls.  They are never
    picked as donors, so every chain of calls is a simple path and an edge
    carrying mass both ways cannot bounce the recursion back and forth.
    """
    stats.calls += 1
    stats.depth = max(stats.depth, depth)
    chain.add(u)
    remaining = delta
    while remaining > tol:
        w = _in_argmax(o, u, tol, skip, chain)
        if w is None or not (o.out[w] > (1 + eta) * (o.out[u] - delta) + tol):
            break
        d = min(remaining, o.mass(w, u))
        stats.trail.append((depth + 1, w, u))
        _compensate(o, w, d, eta, depth + 1, stats, tol, skip, chain)
        o.transfer(w, u, d)
        remaining -= d
    chain.discard(u)


def decrease(
    o: FractionalOrientation,
    u: int,
    v: int,
    delta,
    eta: float,
    tol: float = FLOAT_TOL,
    stats: DecreaseStats | None = None,
) -> DecreaseStats:
    """Lower ``g(u->v)`` by ``delta`` while repairing ``u``'s in-neighbours.

    While some in-neighbour ``w`` (highest out-degree, then lowest id) with
    ``g(w->u) > 0`` would exceed ``(1 + eta)`` times ``u``'s post-flip
    out-degree, up to the outstanding amount of ``w -> u`` mass is itself
    decreased recursively, which raises ``g(u)``.  Vertices already on the
    current call chain are skipped as donors.  Finally ``delta`` moves from
    ``u -> v`` to ``v -> u``.
    """
    if stats is None:
        stats = DecreaseStats()
    if delta < 0:
        raise PreconditionError("delta must be nonnegative")
    if delta > o.mass(u, v) + (0 if o.exact else tol):
        raise PreconditionError(f"delta {delta} exceeds g({u}->{v}) = {o.mass(u, v)}")
    if delta == 0:
        return stats
    limit = sys.getrecursionlimit()
    if limit < 10 * o.g.n + 1000:
        sys.setrecursionlimit(10 * o.g.n + 1000)
    _compensate(o, u, delta, eta, 0, stats, 0 if o.exact else tol, frozenset(), set())
    o.transfer(u, v, delta)
    stats.transferred += float(delta)
    return stats


def delete_edge_maintaining_fairness(
    o: FractionalOrientation,
    u: int,
    v: int,
    eta: float,
    tol: float = FLOAT_TOL,
    cleanup: bool = True,
) -> DecreaseStats:
    """Delete edge ``{u, v}`` and repair both endpoints.

    Each endpoint loses its directed mass on the edge; the same
    compensation loop as :func:`decrease` runs for each before the edge is
    removed.  Because a compensating transfer may overshoot and leave the
    receiving vertex heavier than its donor allows, a local relaxation pass
    runs afterwards when ``cleanup`` is set; the number of relaxation moves
    it needed is reported in ``cleanup_moves``.
    """
    e = o.g.edge_index(u, v)
    if not o.alive[e]:
        raise KeyError((u, v))
    stats = DecreaseStats()
    t = 0 if o.exact else tol
    skip = frozenset([e])
    a, b = o.mass(u, v), o.mass(v, u)
    if a > 0:
        _compensate(o, u, a, eta, 0, stats, t, skip, set())
    if b > 0:
        _compensate(o, v, b, eta, 0, stats, t, skip, set())
    o.remove_edge(u, v)
    if cleanup:
        stats.cleanup_moves = relax_to_eta_fair(o, eta, tol)
    return stats


# approximation check ---------------------------------------------------------------


def approx_check(o: FractionalOrientation, exact: dict, eps: float, tol: float = 1e-6) -> dict:
    """Per-vertex test of ``rho*(v)/(1+eps) <= g(v) <= (1+eps) rho*(v)``."""
    rows = []
    ok = True
    for v in range(o.g.n):
        rho = float(exact[v])
        gv = float(o.out[v])
        lo, hi = rho / (1 + eps), rho * (1 + eps)
        good = lo - tol <= gv <= hi + tol
        ok &= good
        rows.append({"v": v, "g": gv, "rho_star": rho, "ratio": gv / rho if rho else None,
                     "lower": lo, "upper": hi, "pass": good})
    return {"eps": eps, "pass": ok, "vertices": rows}
