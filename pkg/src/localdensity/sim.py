"""Deterministic synchronous round simulator for the LOCAL and CONGEST models.

Nodes exchange messages along graph edges in lockstep.  A message sent in
round ``r`` is read by its receiver at the start of round ``r + 1``.  The
engine measures every message in bits; in CONGEST mode a message larger than
the bandwidth either raises :class:`BandwidthError` (strict) or is logged as
a violation (lenient).  Work done by an oracle instead of by messages is
added to the trace with :func:`charge_abstract_rounds`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Protocol

from .graph import Graph

LOCAL = "LOCAL"
CONGEST = "CONGEST"
DEFAULT_Q = 32


class SimulationError(RuntimeError):
    pass


class BandwidthError(SimulationError):
    def __init__(self, edge: tuple[int, int], round_no: int, bits: int, limit: int):
        super().__init__(f"message on edge {edge[0]}->{edge[1]} in round {round_no} has {bits} bits > {limit}")
        self.edge = edge
        self.round = round_no
        self.bits = bits
        self.limit = limit


class RoundBudgetExceeded(SimulationError):
    """Budget exhausted before every node halted; ``trace`` holds the partial run."""

    def __init__(self, message: str, trace: "Trace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class FixedPoint:
    """Fractional value on the wire: ``raw / 2**q``."""

    raw: int
    q: int = DEFAULT_Q

    @classmethod
    def floor(cls, value, q: int = DEFAULT_Q) -> "FixedPoint":
        return cls(math.floor(Fraction(value) * (1 << q)), q)

    @classmethod
    def nearest(cls, value, q: int = DEFAULT_Q) -> "FixedPoint":
        return cls(round(Fraction(value) * (1 << q)), q)

    @property
    def value(self) -> float:
        return self.raw / (1 << self.q)

    def bits(self) -> int:
        return self.raw.bit_length() + 1


def message_bits(msg: Any) -> int:
    """Serialized size: ints as two's complement, fixed point as integer part plus ``q``,
    containers as the sum of their parts, ``None`` and booleans as one flag bit."""
    if msg is None or isinstance(msg, bool):
        return 1
    if isinstance(msg, int):
        return msg.bit_length() + 1
    if isinstance(msg, FixedPoint):
        return msg.bits()
    if isinstance(msg, float):
        return 64
    if isinstance(msg, Fraction):
        return message_bits(msg.numerator) + message_bits(msg.denominator)
    if isinstance(msg, str):
        return 8 * len(msg.encode())
    if isinstance(msg, dict):
        return sum(message_bits(k) + message_bits(v) for k, v in msg.items())
    if isinstance(msg, (tuple, list, set, frozenset)):
        return sum(message_bits(m) for m in msg)
    raise TypeError(f"cannot size message of type {type(msg).__name__}")


def default_bandwidth(n: int, c: int = 8) -> int:
    return c * max(1, math.ceil(math.log2(max(n, 2))))


@dataclass
class Trace:
    mode: str
    bandwidth: int | None
    rounds: int = 0
    idle_rounds: int = 0
    max_bits_per_round: list[int] = field(default_factory=list)
    abstract: dict[str, int] = field(default_factory=dict)
    outputs: dict[int, Any] = field(default_factory=dict)
    violations: list[dict] = field(default_factory=list)
    total_bits: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def abstract_total(self) -> int:
        return sum(self.abstract.values())

    @property
    def total_rounds(self) -> int:
        return self.rounds + self.abstract_total

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "bandwidth": self.bandwidth,
            "rounds": self.rounds,
            "idle_rounds": self.idle_rounds,
            "abstract_rounds": [{"label": k, "rounds": v} for k, v in self.abstract.items()],
            "total_rounds": self.total_rounds,
            "max_bits_per_round": list(self.max_bits_per_round),
            "outputs": {str(k): _jsonable(v) for k, v in sorted(self.outputs.items())},
            "violations": list(self.violations),
            **({"meta": self.meta} if self.meta else {}),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _jsonable(v):
    if isinstance(v, FixedPoint):
        return v.value
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, (set, frozenset)):
        return sorted(_jsonable(x) for x in v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def charge_abstract_rounds(t: Trace, label: str, rounds: int) -> Trace:
    """Add ``rounds`` of cost under ``label`` without simulating messages."""
    if rounds < 0:
        raise ValueError("abstract round charge must be nonnegative")
    if rounds:
        t.abstract[label] = t.abstract.get(label, 0) + rounds
    return t


class Network:
    """Message-passing engine shared by :func:`run` and the protocol drivers."""

    def __init__(self, g: Graph, mode: str = CONGEST, bandwidth: int | None = None, strict: bool = True):
        if mode not in (LOCAL, CONGEST):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == CONGEST:
            bandwidth = default_bandwidth(g.n) if bandwidth is None else bandwidth
            if bandwidth < 1:
                raise ValueError("bandwidth must be at least one bit")
        self.g = g
        self.mode = mode
        self.strict = strict
        self.trace = Trace(mode, bandwidth if mode == CONGEST else None)

    def exchange(self, outbox: dict[tuple[int, int], Any]) -> dict[int, list[tuple[int, Any]]]:
        """Deliver one round of messages keyed by directed edge ``(sender, receiver)``.

        Returns each receiver's inbox sorted by sender id.
        """
        self.trace.rounds += 1
        rnd = self.trace.rounds
        worst = 0
        inbox: dict[int, list[tuple[int, Any]]] = {}
        for (a, b), msg in sorted(outbox.items(), key=lambda kv: kv[0]):
            if not self.g.has_edge(a, b):
                raise SimulationError(f"round {rnd}: {a} and {b} are not adjacent")
            bits = message_bits(msg)
            worst = max(worst, bits)
            self.trace.total_bits += bits
            limit = self.trace.bandwidth
            if self.mode == CONGEST and bits > limit:
                if self.strict:
                    raise BandwidthError((a, b), rnd, bits, limit)
                self.trace.violations.append({"round": rnd, "edge": [a, b], "bits": bits, "limit": limit})
            inbox.setdefault(b, []).append((a, msg))
        self.trace.max_bits_per_round.append(worst)
        return inbox

    def idle(self, rounds: int) -> None:
        """Advance the clock by ``rounds`` silent rounds."""
        if rounds < 0:
            raise ValueError("negative idle period")
        self.trace.rounds += rounds
        self.trace.idle_rounds += rounds

    def charge(self, label: str, rounds: int) -> None:
        charge_abstract_rounds(self.trace, label, rounds)


@dataclass(frozen=True)
class LocalView:
    """What a node knows before the first round."""

    id: int
    n: int
    neighbors: tuple[int, ...]
    incident: tuple[tuple[int, int, Fraction], ...]


class NodeProgram(Protocol):
    def init(self, node: int, view: LocalView) -> Any: ...

    def step(self, state: Any, round_no: int, inbox: dict[int, Any]) -> tuple[Any, dict[int, Any], Any]:
        """Return ``(state, outbox keyed by neighbour, output or None)``.

        A non-``None`` output halts the node.
        """
        ...


def local_view(g: Graph, v: int) -> LocalView:
    return LocalView(v, g.n, tuple(g.neighbors(v)), tuple(g.edges[e] for _, e in g.adj[v]))


def run(
    g: Graph,
    program: NodeProgram,
    mode: str = LOCAL,
    budget: int = 10**6,
    bandwidth: int | None = None,
    strict: bool = True,
    delay: dict[int, int] | None = None,
) -> Trace:
    """Run ``program`` on every node in lockstep until all halt.

    Round 0 is local computation on the initial view; each later round
    starts by reading the messages sent in the previous one.  ``rounds`` in
    the trace counts message deliveries.  ``delay`` maps a node to a number
    of extra rounds its messages spend in transit (used to probe causality).
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    net = Network(g, mode, bandwidth, strict)
    states = {v: program.init(v, local_view(g, v)) for v in range(g.n)}
    halted: dict[int, Any] = {}
    inboxes: dict[int, dict[int, Any]] = {}
    in_flight: list[tuple[int, tuple[int, int], Any]] = []
    delay = delay or {}
    round_no = 0
    while True:
        outbox: dict[tuple[int, int], Any] = {}
        for v in range(g.n):
            if v in halted:
                continue
            state, sends, output = program.step(states[v], round_no, inboxes.get(v, {}))
            states[v] = state
            for u, msg in sends.items():
                if not g.has_edge(v, u):
                    raise SimulationError(f"node {v} addressed non-neighbour {u}")
                outbox[(v, u)] = msg
            if output is not None:
                halted[v] = output
        if len(halted) == g.n:
            break
        if net.trace.rounds >= budget:
            net.trace.outputs = dict(halted)
            raise RoundBudgetExceeded(f"budget of {budget} rounds exhausted with {g.n - len(halted)} nodes running", net.trace)
        now: dict[tuple[int, int], Any] = {}
        pending = []
        for due, key, msg in in_flight:
            if due <= round_no + 1:
                now[key] = msg
            else:
                pending.append((due, key, msg))
        for key, msg in outbox.items():
            lag = delay.get(key[0], 0)
            if lag:
                pending.append((round_no + 1 + lag, key, msg))
            else:
                now[key] = msg
        in_flight = pending
        delivered = net.exchange(now)
        inboxes = {v: dict(msgs) for v, msgs in delivered.items() if v not in halted}
        round_no += 1
    net.trace.outputs = dict(sorted(halted.items()))
    return net.trace


class BroadcastIds:
    """Every node sends its id once, then outputs the ids it knows."""

    def init(self, node, view):
        return {"id": node, "nbrs": view.neighbors}

    def step(self, state, round_no, inbox):
        if round_no == 0:
            return state, {u: state["id"] for u in state["nbrs"]}, None
        known = frozenset([state["id"], *inbox.values()])
        return state, {}, known


class NeighborhoodDump:
    """Floods full adjacency lists; messages grow with the neighbourhood."""

    def __init__(self, hops: int):
        self.hops = hops

    def init(self, node, view):
        return {"nbrs": view.neighbors, "edges": frozenset((min(node, u), max(node, u)) for u in view.neighbors)}

    def step(self, state, round_no, inbox):
        edges = state["edges"].union(*inbox.values()) if inbox else state["edges"]
        state = dict(state, edges=edges)
        if round_no >= self.hops:
            return state, {}, edges
        return state, {u: tuple(sorted(edges)) for u in state["nbrs"]}, None
