"""Directed networks, maximum flow and min-cut dual indicators.

A :class:`Network` always carries a distinguished total-flow arc ``0`` running
from the sink back to the source. Maximum flow is computed as the largest
circulation through arc 0, which is the same as an ordinary source-to-sink
flow capped by ``Cap_0``.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field
from typing import Union

from .exceptions import ContractViolation, StructuralError, ValidationError

Node = Hashable


@dataclass(frozen=True)
class Arc:
    id: int
    tail: Node
    head: Node
    cap: int


@dataclass(frozen=True, eq=False)
class Network:
    """Single-source, single-sink network with the return arc 0.

    Arc ids are contiguous from 0 and ``arcs[i].id == i``.
    """

    nodes: tuple
    arcs: tuple[Arc, ...]
    source: Node
    sink: Node
    _index: dict = field(init=False, repr=False, compare=False)
    _out: tuple = field(init=False, repr=False, compare=False)
    _in: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        arcs = tuple(a if isinstance(a, Arc) else Arc(*a) for a in self.arcs)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", arcs)
        index = {v: i for i, v in enumerate(nodes)}
        if len(index) != len(nodes):
            raise ValidationError("duplicate node id")
        for v in (self.source, self.sink):
            if v not in index:
                raise ValidationError(f"terminal {v!r} is not a declared node")
        if self.source == self.sink:
            raise StructuralError("source and sink coincide")
        if not arcs:
            raise StructuralError("network has no total-flow arc 0")
        for i, a in enumerate(arcs):
            if a.id != i:
                raise ValidationError(f"arc ids must be contiguous from 0; got {a.id} at position {i}")
            if a.tail not in index or a.head not in index:
                raise ValidationError(f"arc {a.id} references an undeclared node")
            if not isinstance(a.cap, int) or isinstance(a.cap, bool) or a.cap < 0:
                raise ValidationError(f"arc {a.id} capacity must be a non-negative integer")
        a0 = arcs[0]
        if (a0.tail, a0.head) != (self.sink, self.source):
            raise StructuralError("arc 0 must run from the sink to the source")
        out_cap = sum(a.cap for a in arcs[1:] if a.tail == self.source)
        if a0.cap <= out_cap:
            raise StructuralError(
                f"arc 0 capacity {a0.cap} must exceed the source out-capacity {out_cap}"
            )
        out = [[] for _ in nodes]
        inc = [[] for _ in nodes]
        for a in arcs[1:]:
            out[index[a.tail]].append(a.id)
            inc[index[a.head]].append(a.id)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_out", tuple(tuple(x) for x in out))
        object.__setattr__(self, "_in", tuple(tuple(x) for x in inc))

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def total_flow_arc(self) -> int:
        return 0

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(a.cap for a in self.arcs)

    def index(self, node: Node) -> int:
        return self._index[node]

    def out_arcs(self, node: Node) -> tuple[int, ...]:
        """Arcs leaving ``node``, arc 0 excluded."""
        return self._out[self._index[node]]

    def in_arcs(self, node: Node) -> tuple[int, ...]:
        return self._in[self._index[node]]

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.nodes, self.arcs, self.source, self.sink) == (
            other.nodes, other.arcs, other.source, other.sink)

    def __hash__(self):
        return hash((self.nodes, self.arcs, self.source, self.sink))


@dataclass(frozen=True)
class ArcConfiguration:
    """Open/closed state of every arc packed into an integer bit mask.

    Bit ``a`` set means arc ``a`` is operational. Bit 0 is always set.
    """

    bits: int
    n_arcs: int

    def __post_init__(self):
        if self.n_arcs < 1:
            raise ValidationError("configuration needs at least arc 0")
        if not self.bits & 1:
            raise ValidationError("arc 0 must always be open")
        if self.bits >> self.n_arcs:
            raise ValidationError("configuration has bits beyond the arc count")

    @classmethod
    def all_open(cls, n_arcs: int) -> "ArcConfiguration":
        return cls((1 << n_arcs) - 1, n_arcs)

    @classmethod
    def from_open(cls, flags: Sequence) -> "ArcConfiguration":
        bits = 0
        for a, f in enumerate(flags):
            if f:
                bits |= 1 << a
        return cls(bits, len(flags))

    @classmethod
    def closing(cls, n_arcs: int, closed: Iterable[int]) -> "ArcConfiguration":
        bits = (1 << n_arcs) - 1
        for a in closed:
            if a == 0:
                raise ValidationError("arc 0 cannot be closed")
            bits &= ~(1 << a)
        return cls(bits, n_arcs)

    def is_open(self, arc: int) -> bool:
        return bool(self.bits >> arc & 1)

    def open_flags(self) -> tuple[int, ...]:
        return tuple(self.bits >> a & 1 for a in range(self.n_arcs))

    def closed_arcs(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.n_arcs) if not self.bits >> a & 1)


@dataclass(frozen=True)
class FlowSolution:
    value: Union[int, float]
    flows: tuple
    duals: tuple[int, ...]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(a for a, u in enumerate(self.duals) if u)


def augment_super_terminals(nodes: Iterable[Node], arcs: Iterable) -> Network:
    """Build a :class:`Network` from a raw multi-source/multi-sink graph.

    ``arcs`` are ``(tail, head, cap)`` triples and keep their order as arc ids
    1, 2, .... When the raw graph has several sources (nodes without in-arcs)
    a super source is added with one arc to each, sized to that node's
    out-capacity; sinks are handled symmetrically. Arc 0 gets capacity
    ``1 + sum of capacities leaving the final source``.
    """
    nodes = list(nodes)
    raw = [tuple(a) for a in arcs]
    declared = set(nodes)
    for t, h, c in raw:
        if t not in declared or h not in declared:
            raise ValidationError(f"arc ({t!r}, {h!r}) references an undeclared node")
        if not isinstance(c, int) or c < 0:
            raise ValidationError(f"arc ({t!r}, {h!r}) capacity must be a non-negative integer")
    has_in = {h for _, h, _ in raw}
    has_out = {t for t, _, _ in raw}
    sources = [v for v in nodes if v not in has_in and v in has_out]
    sinks = [v for v in nodes if v not in has_out and v in has_in]
    if not sources:
        raise StructuralError("graph has no source (node without in-arcs)")
    if not sinks:
        raise StructuralError("graph has no sink (node without out-arcs)")

    extra = []
    if len(sources) > 1:
        source = _fresh_name("super_source", declared)
        declared.add(source)
        nodes.append(source)
        for v in sources:
            extra.append((source, v, sum(c for t, _, c in raw if t == v)))
    else:
        source = sources[0]
    if len(sinks) > 1:
        sink = _fresh_name("super_sink", declared)
        declared.add(sink)
        nodes.append(sink)
        for v in sinks:
            extra.append((v, sink, sum(c for _, h, c in raw if h == v)))
    else:
        sink = sinks[0]

    body = raw + extra
    cap0 = 1 + sum(c for t, _, c in body if t == source)
    all_arcs = [Arc(0, sink, source, cap0)]
    all_arcs += [Arc(i, t, h, c) for i, (t, h, c) in enumerate(body, start=1)]
    return Network(tuple(nodes), tuple(all_arcs), source, sink)


def _fresh_name(base, taken):
    name, k = base, 1
    while name in taken:
        name, k = f"{base}_{k}", k + 1
    return name


def _capacities(net: Network, config) -> list:
    if isinstance(config, ArcConfiguration):
        if config.n_arcs != net.n_arcs:
            raise ValidationError(
                f"configuration has {config.n_arcs} arcs, network has {net.n_arcs}")
        bits = config.bits
        return [a.cap if bits >> a.id & 1 else 0 for a in net.arcs]
    caps = list(config)
    if len(caps) != net.n_arcs:
        raise ValidationError(f"capacity vector has {len(caps)} entries, network has {net.n_arcs}")
    return caps


def max_flow(net: Network, config: ArcConfiguration | None = None) -> FlowSolution:
    """Maximum flow with closed arcs treated as capacity 0.

    Returns the flow together with the canonical min-cut duals.
    """
    if config is None:
        config = ArcConfiguration.all_open(net.n_arcs)
    caps = _capacities(net, config)
    flows = _edmonds_karp(net, caps, eps=0)
    sol = FlowSolution(flows[0], tuple(flows), ())
    return FlowSolution(sol.value, sol.flows, min_cut_duals(net, config, sol))


def max_flow_capacities(net: Network, capacities: Sequence, eps: float = 0) -> FlowSolution:
    """Maximum flow with ``capacities[a]`` in place of ``Cap_a``.

    Capacities may be real (use a small ``eps``) or exceed the network's
    arc-0 rule. The dual support still ranges over arcs of positive nominal
    capacity ``net.arcs[a].cap``.
    """
    caps = list(capacities)
    if len(caps) != net.n_arcs:
        raise ValidationError(f"capacity vector has {len(caps)} entries, network has {net.n_arcs}")
    flows = _edmonds_karp(net, caps, eps=eps)
    return FlowSolution(flows[0], tuple(flows), _duals(net, caps, flows, eps))


def max_flow_fractional(net: Network, capacities: Sequence[float], eps: float = 1e-9) -> FlowSolution:
    """:func:`max_flow_capacities` for real-valued capacities."""
    return max_flow_capacities(net, [float(c) for c in capacities], eps)


def min_cut_duals(net: Network, config, flow: FlowSolution) -> tuple[int, ...]:
    """Binary duals of the capacity constraints for a maximal ``flow``.

    With ``S`` the residual-reachable side of the source and ``R`` the nodes
    outside ``S`` that still reach the sink inside the complement, the duals
    are 1 on arcs from ``S`` to ``R`` with positive capacity. Closed arcs are
    included when they cross, so the support is a cut-set of the underlying
    network. If arc 0 itself is saturated the support is ``{0}``.
    """
    caps = _capacities(net, config)
    return _duals(net, caps, flow.flows, 0)


def _edmonds_karp(net: Network, caps: Sequence, eps) -> list:
    n = len(net.nodes)
    tails = [net.index(a.tail) for a in net.arcs]
    heads = [net.index(a.head) for a in net.arcs]
    out, inc = net._out, net._in
    s, t = net.index(net.source), net.index(net.sink)
    flows = [0 * c for c in caps]
    total = flows[0]
    cap0 = caps[0]
    while cap0 - total > eps:
        pred = [None] * n
        pred[s] = (-1, 0)
        queue = deque([s])
        while queue and pred[t] is None:
            v = queue.popleft()
            for a in out[v]:
                w = heads[a]
                if pred[w] is None and caps[a] - flows[a] > eps:
                    pred[w] = (a, 1)
                    queue.append(w)
            for a in inc[v]:
                w = tails[a]
                if pred[w] is None and flows[a] > eps:
                    pred[w] = (a, -1)
                    queue.append(w)
        if pred[t] is None:
            break
        delta = cap0 - total
        v = t
        while v != s:
            a, d = pred[v]
            delta = min(delta, caps[a] - flows[a] if d > 0 else flows[a])
            v = tails[a] if d > 0 else heads[a]
        v = t
        while v != s:
            a, d = pred[v]
            flows[a] += d * delta
            v = tails[a] if d > 0 else heads[a]
        total += delta
    flows[0] = total
    return flows


def _duals(net: Network, caps: Sequence, flows: Sequence, eps) -> tuple[int, ...]:
    n = len(net.nodes)
    tails = [net.index(a.tail) for a in net.arcs]
    heads = [net.index(a.head) for a in net.arcs]
    out, inc = net._out, net._in
    s, t = net.index(net.source), net.index(net.sink)
    duals = [0] * net.n_arcs
    if caps[0] - flows[0] <= eps:
        duals[0] = 1
        return tuple(duals)

    in_s = [False] * n
    in_s[s] = True
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for a in out[v]:
            w = heads[a]
            if not in_s[w] and caps[a] - flows[a] > eps:
                in_s[w] = True
                queue.append(w)
        for a in inc[v]:
            w = tails[a]
            if not in_s[w] and flows[a] > eps:
                in_s[w] = True
                queue.append(w)
    if in_s[t]:
        raise ContractViolation("flow is not maximal: an augmenting path exists")

    # nodes outside S that reach the sink without re-entering S
    reach = [False] * n
    reach[t] = True
    queue = deque([t])
    while queue:
        w = queue.popleft()
        for a in inc[w]:
            v = tails[a]
            if not in_s[v] and not reach[v] and net.arcs[a].cap > 0:
                reach[v] = True
                queue.append(v)
    for a in net.arcs[1:]:
        if a.cap > 0 and in_s[tails[a.id]] and reach[heads[a.id]]:
            duals[a.id] = 1
    return tuple(duals)


def sink_reachable(net: Network, removed: Iterable[int] = ()) -> bool:
    """Whether a forward source-to-sink path survives removing ``removed``.

    Only arcs with positive capacity count; arc 0 is never traversed.
    """
    gone = set(removed)
    seen = {net.source}
    stack = [net.source]
    while stack:
        v = stack.pop()
        if v == net.sink:
            return True
        for a in net.out_arcs(v):
            if a in gone or net.arcs[a].cap <= 0:
                continue
            w = net.arcs[a].head
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def check_flow(net: Network, config, sol: FlowSolution, tol: float = 0) -> None:
    """Raise :class:`ContractViolation` unless ``sol`` is a feasible flow."""
    caps = _capacities(net, config)
    bal = {v: 0 for v in net.nodes}
    for a in net.arcs:
        f = sol.flows[a.id]
        if f < -tol or f > caps[a.id] + tol:
            raise ContractViolation(f"flow on arc {a.id} outside [0, {caps[a.id]}]")
        bal[a.tail] -= f
        bal[a.head] += f
    for v, b in bal.items():
        if abs(b) > tol:
            raise ContractViolation(f"conservation violated at node {v!r}")
    if abs(sol.value - sol.flows[0]) > tol:
        raise ContractViolation("value differs from flow on arc 0")
