"""CONGEST protocol that drives a unit-weight graph to an eta-fair orientation.

The protocol runs on an ``(hour : minute : second)`` clock.  Hours count
down over levels; in hour ``h`` even minutes push mass off violating
out-edges of level-``h`` vertices, and odd minutes repair the violating
in-edges that this created by flipping paths found with blocking flows on a
layered DAG.

Even minutes exchange real messages through :class:`~localdensity.sim.Network`
and respect the CONGEST bandwidth.  The DAG construction and blocking-flow
subroutine of each second run as oracles whose cost is charged to the trace
through a pluggable ``Blocking(h, n)`` model.  Stretches of the clock in
which no vertex has anything to do are fast-forwarded, and their rounds are
still counted, so the final round total always equals the closed-form
length of the schedule.

All masses are kept on a ``2**-q`` grid (``q = 32`` by default).  Every
transferred amount is a fixed-point integer, so both endpoints of an edge
agree on its split exactly and flows are computed in integer arithmetic.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from dataclasses import dataclass, field

from .flow import FlowNetwork, blocking_flow, check_flow, has_unsaturated_path
from .graph import Graph
from .orientation import (
    FLOOR_LEVEL,
    FractionalOrientation,
    LevelIndex,
    eta_for,
    init_half,
    is_eta_fair,
    level_base,
    level_of,
)
from .sim import CONGEST, DEFAULT_Q, FixedPoint, Network, Trace

log = logging.getLogger(__name__)


BLOCKING_MODELS = {
    "id": lambda h, n: h,
    "h4": lambda h, n: h**4,
    "h6sqrt": lambda h, n: h**6 * 2 ** math.ceil(math.sqrt(math.log2(n))),
}


class ProtocolError(RuntimeError):
    """A checkpoint failed; ``where`` is the ``(hour, minute, second)`` position."""

    def __init__(self, message: str, where: tuple, detail=None):
        super().__init__(f"{message} at (h={where[0]}, m={where[1]}, s={where[2]})")
        self.where = where
        self.detail = detail


def protocol_bandwidth(n: int) -> int:
    """Per-message budget: ``8 ceil(log2 n)`` plus 64 bits for fixed-point payloads."""
    return 8 * max(1, math.ceil(math.log2(n))) + 64


@dataclass(frozen=True)
class ClockSchedule:
    """Derived constants of the clock.

    ``ell`` is the nominal hop/height parameter ``ceil(eps^-2 log2(n)^2)``.
    The protocol itself sweeps the hours from ``level_top`` (the level of
    the largest possible starting out-degree ``(n-1)/2``) down to
    ``level_bottom`` (the level of ``1/2``).  ``depth`` is the number of
    levels a vertex can occupy during the run; it bounds the height of every
    flow DAG and sets the length of a second.
    """

    eps: float
    n: int
    eta: float
    ell: int
    base: float
    level_top: int
    level_bottom: int
    minutes_per_hour: int
    even_iterations: int
    rounds_per_even_minute: int
    depth: int
    blocking_model: str = "id"

    def blocking(self, h: int) -> int:
        return BLOCKING_MODELS[self.blocking_model](h, self.n)

    def second_rounds(self, height: int) -> int:
        return height + self.blocking(height)

    @property
    def rounds_per_second(self) -> int:
        return self.second_rounds(self.depth)

    @property
    def nominal_rounds_per_second(self) -> int:
        return self.second_rounds(self.ell)

    @property
    def hours(self) -> range:
        return range(self.level_top, self.level_bottom - 1, -1)

    def seconds_per_odd_minute(self, h: int) -> int:
        return self.level_top - h + 1

    def hour_rounds(self, h: int) -> int:
        half = self.minutes_per_hour // 2
        return half * self.rounds_per_even_minute + half * self.seconds_per_odd_minute(h) * self.rounds_per_second

    def total_rounds(self) -> int:
        """Closed-form length of the whole clock."""
        half = self.minutes_per_hour // 2
        hours = self.level_top - self.level_bottom + 1
        seconds = hours * (hours + 1) // 2
        return hours * half * self.rounds_per_even_minute + half * seconds * self.rounds_per_second

    def to_json(self) -> dict:
        return {
            "eps": self.eps, "n": self.n, "eta": self.eta, "ell": self.ell, "level_base": self.base,
            "level_top": self.level_top, "level_bottom": self.level_bottom,
            "minutes_per_hour": self.minutes_per_hour, "even_iterations": self.even_iterations,
            "rounds_per_even_minute": self.rounds_per_even_minute, "depth": self.depth,
            "rounds_per_second": self.rounds_per_second, "blocking_model": self.blocking_model,
            "total_rounds": self.total_rounds(),
        }


def make_schedule(eps: float, n: int, blocking_model: str = "id", max_start: float | None = None) -> ClockSchedule:
    """Clock constants for ``n`` vertices.

    ``max_start`` bounds every out-degree at the start of the run and fixes
    the first hour; it defaults to ``(n - 1) / 2``, the largest out-degree
    an even split can produce on a unit-weight graph.
    """
    if blocking_model not in BLOCKING_MODELS:
        raise ValueError(f"unknown blocking model {blocking_model!r}; choose from {sorted(BLOCKING_MODELS)}")
    eta = eta_for(eps, n)
    ell = math.ceil(math.log2(n) ** 2 / (eps * eps) - 1e-9)
    base = level_base(eta)
    top = level_of((n - 1) / 2 if max_start is None else max_start, eta, base=base)
    bottom = level_of(0.5, eta, base=base)
    iters = 2 * math.ceil(math.log(n) / math.log(8 / 7)) + 1
    return ClockSchedule(
        eps=eps, n=n, eta=eta, ell=ell, base=base, level_top=top, level_bottom=bottom,
        minutes_per_hour=2 * math.ceil(1 / eta) + 2, even_iterations=iters,
        rounds_per_even_minute=2 * iters, depth=top - bottom + 2, blocking_model=blocking_model,
    )


@dataclass
class DagSnapshot:
    """``D_s`` restricted to vertices that reach the sinks, plus its flow network."""

    vertices: frozenset
    edges: frozenset
    sources: frozenset
    sinks: frozenset
    height: int
    network: FlowNetwork | None = None
    sigma: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.edges


class CongestProtocol:
    """State and driver of one protocol run.

    ``orientation`` may seed the run with any orientation whose masses lie
    on the fixed-point grid; by default every edge starts split evenly.
    With ``checks`` on, every checkpoint is evaluated and a failure raises
    :class:`ProtocolError`.
    """

    def __init__(
        self,
        g: Graph,
        eps: float,
        blocking_model: str = "id",
        orientation: FractionalOrientation | None = None,
        bandwidth: int | None = None,
        strict: bool = True,
        checks: bool = True,
        q: int = DEFAULT_Q,
    ):
        if not g.is_unit:
            raise ValueError("the CONGEST protocol is defined for unit-weight graphs")
        self.g = g
        # an arbitrary start may put up to n - 1 on one vertex
        self.sched = make_schedule(eps, g.n, blocking_model, None if orientation is None else g.n - 1)
        self.eta = self.sched.eta
        self.q = q
        self.scale = 1 << q
        self.o = FractionalOrientation.from_other(orientation, float) if orientation is not None else init_half(g, exact=False)
        for e, x in enumerate(self.o.x):
            if x * self.scale != int(x * self.scale):
                raise ValueError(f"edge {e} mass {x} is not on the 2^-{q} grid")
        self.levels = LevelIndex(self.o.out, self.eta, self.sched.base)
        self.net = Network(g, CONGEST, protocol_bandwidth(g.n) if bandwidth is None else bandwidth, strict)
        self.checks = checks
        self.tally = Counter()
        self.hour_log: list[dict] = []
        self.decay_log: list[list[int]] = []
        self.height_log: list[list[int]] = []
        self._thr: dict[int, float] = {}
        self.total_weight = sum(self.o.w)

    # small helpers -----------------------------------------------------------

    def thr(self, i: int) -> float:
        t = self._thr.get(i)
        if t is None:
            t = self._thr[i] = self.sched.base**i
        return t

    def raw(self, x: float) -> int:
        return int(x * self.scale)

    def g_raw(self, v: int) -> int:
        return self.raw(self.o.out[v])

    def mass_raw(self, a: int, b: int) -> int:
        return self.raw(self.o.mass(a, b))

    def _move(self, a: int, b: int, amount_raw: int) -> None:
        self.o.transfer(a, b, amount_raw / self.scale)
        self.tally["flips"] += 1

    def _relevel(self, v: int, before: float) -> None:
        self.levels.update(v, before, self.o.out[v])

    def violating(self, a: int, b: int) -> bool:
        lv = self.levels.level
        return lv[a] > lv[b] + 1 and self.o.mass(a, b) > 0

    def violating_edges(self) -> list[tuple[int, int]]:
        out = []
        for u, v in self.o.alive_edges():
            if self.violating(u, v):
                out.append((u, v))
            if self.violating(v, u):
                out.append((v, u))
        return out

    def _fail(self, message, where, detail=None):
        raise ProtocolError(message, where, detail)

    # checkpoints --------------------------------------------------------------

    def check_invariant(self, h: int, at_even_minute_start: bool) -> list[tuple[int, int]]:
        """Violating edges whose tail level breaks the hour invariant."""
        bound = h if at_even_minute_start else h + 1
        lv = self.levels.level
        return [(a, b) for a, b in self.violating_edges() if lv[a] > bound]

    def _checkpoint(self, h, m, s, even_start: bool) -> None:
        if not self.checks:
            return
        bad = self.check_invariant(h, even_start)
        self.tally["invariant_checks"] += 1
        if bad:
            self._fail(f"hour invariant broken by {bad[:3]}", (h, m, s), bad)
        total = sum(self.o.out)
        if abs(total - self.total_weight) > 1e-9:
            self._fail("out-degree total drifted", (h, m, s), total)

    # driver -------------------------------------------------------------------

    def run(self) -> tuple[FractionalOrientation, Trace]:
        sched = self.sched
        h = sched.level_top
        while h >= sched.level_bottom:
            self._checkpoint(h, 0, 0, True)
            busy = [self.levels.level[a] for a, _ in self.violating_edges()]
            nxt = max((k for k in busy if k <= h), default=None)
            if nxt is None or nxt < sched.level_bottom:
                self._idle_hours(h, sched.level_bottom)
                break
            if nxt < h:
                self._idle_hours(h, nxt + 1)
                h = nxt
            self.hour(h)
            h -= 1
        self._checkpoint(sched.level_bottom - 1, 0, 0, True)
        leftover = self.violating_edges()
        if leftover:
            self._fail(f"violating edges remain at the end: {leftover[:3]}", (sched.level_bottom, 0, 0), leftover)
        unfair = is_eta_fair(self.o, self.eta)
        if self.checks and unfair:
            self._fail(f"final orientation is not eta-fair: {unfair[:3]}", (sched.level_bottom, 0, 0), unfair)
        expected = sched.total_rounds()
        if self.net.trace.total_rounds != expected:
            self._fail(
                f"round total {self.net.trace.total_rounds} differs from schedule {expected}",
                (sched.level_bottom, 0, 0),
            )
        trace = self.net.trace
        trace.outputs = {v: self.o.out[v] for v in range(self.g.n)}
        trace.meta = self.manifest()
        return self.o, trace

    def _idle_hours(self, hi: int, lo: int) -> None:
        """Fast-forward every hour in ``hi .. lo`` (inclusive, ``hi >= lo``)."""
        if hi < lo:
            return
        sched = self.sched
        count = hi - lo + 1
        half = sched.minutes_per_hour // 2
        seconds = sum(sched.seconds_per_odd_minute(h) for h in (hi, lo)) * count // 2
        self.net.idle(count * half * sched.rounds_per_even_minute)
        self._charge_seconds(half * seconds)
        self.tally["idle_hours"] += count

    def _charge_seconds(self, seconds: int) -> None:
        if seconds:
            self.net.charge("dag", seconds * self.sched.depth)
            self.net.charge("blocking-flow", seconds * self.sched.blocking(self.sched.depth))

    def _idle_minutes(self, h: int, first: int) -> None:
        """Fast-forward minutes ``first .. end of hour``."""
        rest = range(first, self.sched.minutes_per_hour)
        evens = sum(1 for m in rest if m % 2 == 0)
        odds = len(rest) - evens
        self.net.idle(evens * self.sched.rounds_per_even_minute)
        self._charge_seconds(odds * self.sched.seconds_per_odd_minute(h))

    def hour(self, h: int) -> None:
        sched = self.sched
        record = {"hour": h, "active_minutes": 0, "flips_before": self.tally["flips"]}
        prev_V: list[int] = []
        prev_levels: list[int] = []
        for m in range(sched.minutes_per_hour):
            if m % 2 == 0:
                self._checkpoint(h, m, 0, True)
                lv = self.levels.level
                V = [v for v in range(self.g.n) if lv[v] == h and self._has_violating_out(v)]
                if not V:
                    self._idle_minutes(h, m)
                    break
                record["active_minutes"] += 1
                prev_levels = list(lv)
                self.even_minute(h, m, V)
                prev_V = V
            else:
                self._checkpoint(h, m, 0, False)
                lv = self.levels.level
                T = [v for v in prev_V if lv[v] < prev_levels[v] and self._has_violating_in(v)]
                if not T:
                    self._charge_seconds(sched.seconds_per_odd_minute(h))
                    continue
                record["active_minutes"] += 1
                self.odd_minute(h, m, T)
        record["flips"] = self.tally["flips"] - record.pop("flips_before")
        self.hour_log.append(record)
        log.info("hour %d: %d active minutes, %d flips", h, record["active_minutes"], record["flips"])

    def _has_violating_out(self, v: int) -> bool:
        return any(self.violating(v, u) for u, _ in self.o.neighbors(v))

    def _has_violating_in(self, v: int) -> bool:
        return any(self.violating(u, v) for u, _ in self.o.neighbors(v))

    # even minute ------------------------------------------------------------------

    def even_minute(self, h: int, m: int, V: list[int]) -> None:
        """Greedy offer/accept rounds that strip violating out-edges from level ``h``."""
        lv = self.levels.level
        iters = self.sched.even_iterations
        announced = list(lv)
        floor_prev = math.ceil(self.thr(h - 1) * self.scale)
        cap_top = math.floor(self.thr(h) * self.scale)
        counts = []
        for t in range(iters):
            counts.append(sum(1 for a, _ in self.violating_edges() if lv[a] == h))
            offers: dict[tuple[int, int], tuple] = {}
            for a in V:
                if lv[a] != h:
                    continue
                targets = [b for b, _ in self.o.neighbors(a) if announced[b] < h - 1 and self.o.mass(a, b) > 0]
                if not targets:
                    continue
                d = FixedPoint(self.g_raw(a) - floor_prev, self.q)
                for b in targets:
                    offers[(a, b)] = (d, len(targets))
            if not offers:
                self.net.idle(2 * (iters - t))
                break
            inbox = self.net.exchange(self._with_levels(offers, announced, 3))
            # each receiver accepts greedily, largest offer first, ties by sender id
            accepts: dict[tuple[int, int], tuple] = {}
            changed = []
            for b in sorted(inbox):
                got = [(a, msg[1], msg[2]) for a, msg in inbox[b] if msg[1] is not None]
                if not got:
                    continue
                before = self.o.out[b]
                cap = cap_top - self.g_raw(b)
                for a, d, cnt in sorted(got, key=lambda x: (-x[1].raw, x[0])):
                    amount = min(d.raw // cnt, self.mass_raw(a, b), max(cap, 0))
                    if amount > 0:
                        self._move(a, b, amount)
                        cap -= amount
                        accepts[(b, a)] = (FixedPoint(amount, self.q),)
                        changed.append(a)
                self._relevel(b, before)
            self.net.exchange(self._with_levels(accepts, announced, 2))
            for a in set(changed):
                self._relevel(a, self.o.out[a] + 1)  # out-degree only fell
            self.tally["even_iterations"] += 1
        counts.append(sum(1 for a, _ in self.violating_edges() if lv[a] == h))
        self.decay_log.append(counts)
        if self.checks:
            for prev, cur in zip(counts, counts[1:]):
                self.tally["decay_checks"] += 1
                if cur > math.ceil(7 * prev / 8):
                    self._fail(f"violating edges from level h went {prev} -> {cur}", (h, m, 0), counts)
            left = [v for v in V if lv[v] == h and self._has_violating_out(v)]
            if left:
                self._fail(f"level-h vertices {left} keep violating out-edges", (h, m, 0), left)

    def wire_level(self, level: int) -> int:
        """Level as sent: distance below the first hour, or -1 for out-degree zero."""
        return -1 if level == FLOOR_LEVEL else self.sched.level_top - level

    def _with_levels(self, payload: dict, announced: list[int], width: int) -> dict:
        """Prefix a level slot to every message and fill it where needed.

        Any node whose level differs from what its neighbours last heard
        sends it on every incident edge this round; other slots stay
        ``None``.  Messages are ``width``-tuples.
        """
        lv = self.levels.level
        blank = (None,) * (width - 1)
        box = {key: (None, *val) for key, val in payload.items()}
        for u in range(self.g.n):
            if lv[u] == announced[u]:
                continue
            for w, _ in self.o.neighbors(u):
                box[(u, w)] = (self.wire_level(lv[u]), *box.get((u, w), (None, *blank))[1:])
            announced[u] = lv[u]
        return box

    # odd minute ------------------------------------------------------------------

    def odd_minute(self, h: int, m: int, T: list[int]) -> None:
        """Repair violating in-edges of the vertices in ``T`` second by second."""
        log.debug("hour %d minute %d: repairing in-edges of %s", h, m, T)
        sched = self.sched
        l_m = list(self.levels.level)
        seconds = sched.seconds_per_odd_minute(h)
        heights = []
        prev = None
        for s in range(seconds):
            dag = self.build_dag(h, T, l_m, s)
            if prev is not None and self.checks:
                self._check_nesting(prev, dag, (h, m, s))
            if dag.empty:
                self._charge_seconds(seconds - s)
                break
            heights.append(dag.height)
            self.second_step(h, m, s, dag, l_m)
            prev = dag
        else:
            final = self.build_dag(h, T, l_m, seconds)
            if not final.empty:
                self._fail("flow DAG still nonempty after the last second", (h, m, seconds), final.edges)
        self.height_log.append(heights)

    def build_dag(self, h: int, T: list[int], l_m: list[int], s: int = 0) -> DagSnapshot:
        """Snapshot ``D_s`` and its flow network from the current state."""
        lv = self.levels.level
        Tset = frozenset(T)
        E = set()
        for u, v in self.o.alive_edges():
            for a, b in ((u, v), (v, u)):
                if self.o.mass(a, b) <= 0:
                    continue
                if b in Tset and lv[a] > lv[b] + 1:
                    E.add((a, b))
                elif lv[a] == l_m[a] and l_m[a] > h + 1 and lv[a] > lv[b]:
                    E.add((a, b))
        preds: dict[int, list[int]] = {}
        for a, b in E:
            preds.setdefault(b, []).append(a)
        reach = set(Tset)
        queue = deque(Tset)
        while queue:
            b = queue.popleft()
            for a in preds.get(b, ()):
                if a not in reach:
                    reach.add(a)
                    queue.append(a)
        ED = frozenset((a, b) for a, b in E if b in reach)
        has_in = {b for _, b in ED}
        sources = frozenset(v for v in reach if v not in Tset and v not in has_in)
        dag = DagSnapshot(frozenset(reach), ED, sources, Tset, 0)
        if ED:
            net = FlowNetwork("S", "T")
            for u in sorted(sources):
                sig = self.g_raw(u) - math.ceil(self.thr(l_m[u] - 1) * self.scale)
                dag.sigma[u] = max(sig, 0)
                net.add_edge("S", u, dag.sigma[u])
            for a, b in sorted(ED):
                net.add_edge(a, b, self.mass_raw(a, b))
            for v in sorted(Tset):
                dlt = math.floor(self.thr(h + 1) * self.scale) - self.g_raw(v)
                dag.delta[v] = max(dlt, 0)
                net.add_edge(v, "T", dag.delta[v])
            try:
                net.topological_order()
            except ValueError:
                self._fail("cycle in the flow DAG", (h, -1, s), ED)
            dag.network = net
            dag.height = self._edge_height(ED)
        return dag

    @staticmethod
    def _edge_height(edges) -> int:
        succ: dict = {}
        nodes = set()
        for a, b in edges:
            succ.setdefault(a, []).append(b)
            nodes.update((a, b))
        memo: dict = {}

        def longest(v):
            if v not in memo:
                memo[v] = max((1 + longest(b) for b in succ.get(v, ())), default=0)
            return memo[v]

        return max((longest(v) for v in nodes), default=0)

    def _check_nesting(self, prev: DagSnapshot, cur: DagSnapshot, where) -> None:
        self.tally["nesting_checks"] += 1
        if not cur.edges <= prev.edges or not cur.vertices <= prev.vertices:
            self._fail("flow DAG grew between seconds", where, (prev.edges, cur.edges))
        if prev.sources & cur.vertices:
            self._fail("a source of the previous DAG still reaches the sinks", where, prev.sources & cur.vertices)
        if not cur.empty and cur.height >= prev.height:
            self._fail(f"DAG height did not drop ({prev.height} -> {cur.height})", where)

    def second_step(self, h: int, m: int, s: int, dag: DagSnapshot, l_m: list[int]) -> None:
        """Blocking flow on ``D_s*`` and the flips it prescribes."""
        self._charge_seconds(1)
        if dag.empty:
            return
        net = dag.network
        flow, _ = blocking_flow(net)
        if self.checks:
            check_flow(net, flow)
            if has_unsaturated_path(net, flow):
                self._fail("flow is not blocking", (h, m, s))
        before = list(self.o.out)
        for (a, b, _), f in zip(net.edges, flow):
            if f and a != "S" and b != "T":
                self._move(a, b, f)
        touched = {x for (a, b, _), f in zip(net.edges, flow) if f for x in (a, b) if x not in ("S", "T")}
        for v in touched:
            self._relevel(v, before[v])
        self.tally["seconds"] += 1
        if not self.checks:
            return
        if abs(sum(self.o.out) - self.total_weight) > 1e-9:
            self._fail("conservation broken after flips", (h, m, s))
        lv = self.levels.level
        for v in range(self.g.n):
            old, new = l_m[v], lv[v]
            if old > h:
                ok = new in (old, old - 1)
            elif old == h - 1:
                ok = new in (old, old + 1)
            else:
                ok = new == old
            if not ok:
                self._fail(f"vertex {v} moved from level {old} to {new}", (h, m, s))
        self.tally["shift_checks"] += 1

    # reporting --------------------------------------------------------------

    def manifest(self) -> dict:
        lv = self.levels.level
        return {
            "schedule": self.sched.to_json(),
            "checks": dict(self.tally),
            "active_hours": list(self.hour_log),
            "even_minute_decay": self.decay_log,
            "odd_minute_heights": self.height_log,
            "final": [
                {"v": v, "g": self.o.out[v], "level": lv[v] if lv[v] != FLOOR_LEVEL else None}
                for v in range(self.g.n)
            ],
        }


def run_congest_orientation(
    g: Graph,
    eps: float,
    blocking_model: str = "id",
    strict: bool = True,
    checks: bool = True,
    bandwidth: int | None = None,
) -> tuple[FractionalOrientation, Trace]:
    """Run the protocol from the even split and return the final orientation and trace."""
    proto = CongestProtocol(g, eps, blocking_model, bandwidth=bandwidth, strict=strict, checks=checks)
    return proto.run()
