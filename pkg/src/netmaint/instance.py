"""Maintenance scheduling instances, schedules, JSON I/O and evaluation."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .exceptions import ParseError, ValidationError
from .network import Arc, ArcConfiguration, Network, max_flow


@dataclass(frozen=True)
class MaintenanceRequest:
    """One job on one arc. Times are 0-based period indices.

    A job started at ``t`` keeps its arc closed during ``[t, t + duration - 1]``;
    admissible starts are ``release .. deadline - duration + 1``.
    """

    id: int
    arc: int
    release: int
    deadline: int
    duration: int

    @property
    def last_start(self) -> int:
        return self.deadline - self.duration + 1

    @property
    def starts(self) -> range:
        return range(self.release, self.last_start + 1)

    @property
    def window_size(self) -> int:
        return self.last_start - self.release + 1

    def running_at(self, t: int) -> range:
        """Start times that keep the arc closed at period ``t``."""
        return range(max(self.release, t - self.duration + 1), min(t, self.last_start) + 1)


@dataclass(frozen=True, eq=False)
class Instance:
    network: Network
    horizon: int
    requests: tuple[MaintenanceRequest, ...]
    _by_arc: dict = field(init=False, repr=False)

    def __post_init__(self):
        reqs = tuple(self.requests)
        object.__setattr__(self, "requests", reqs)
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ValidationError("horizon must be a positive integer")
        ids = set()
        by_arc = defaultdict(list)
        for r in reqs:
            _check_request(r, self.network, self.horizon)
            if r.id in ids:
                raise ValidationError(f"duplicate request id {r.id}")
            ids.add(r.id)
            by_arc[r.arc].append(r)
        for arc, jobs in by_arc.items():
            if not non_overlap_feasible(jobs):
                raise ValidationError(f"requests on arc {arc} cannot be scheduled without overlap")
        object.__setattr__(self, "_by_arc", {a: tuple(j) for a, j in sorted(by_arc.items())})

    @property
    def requests_by_arc(self) -> dict[int, tuple[MaintenanceRequest, ...]]:
        return self._by_arc

    def request(self, rid: int) -> MaintenanceRequest:
        for r in self.requests:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.network, self.horizon, self.requests) == (
            other.network, other.horizon, other.requests)

    def __hash__(self):
        return hash((self.network, self.horizon, self.requests))


@dataclass(frozen=True)
class Schedule:
    start: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "start", dict(sorted((int(k), int(v)) for k, v in self.start.items())))


def _check_request(r: MaintenanceRequest, net: Network, horizon: int) -> None:
    for name in ("id", "arc", "release", "deadline", "duration"):
        v = getattr(r, name)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"request {r.id}: field '{name}' must be an integer")
    if r.duration < 1:
        raise ValidationError(f"request {r.id}: duration must be positive")
    if r.arc == 0 or not 0 < r.arc < net.n_arcs:
        raise ValidationError(f"request {r.id}: arc {r.arc} is not a maintainable arc")
    if r.release < 0 or r.deadline >= horizon:
        raise ValidationError(f"request {r.id}: release/deadline outside [0, {horizon - 1}]")
    if r.release > r.last_start:
        raise ValidationError(f"request {r.id}: empty start window")


def non_overlap_feasible(jobs) -> bool:
    """Exact single-arc feasibility: can all jobs run without overlapping?

    Earliest-deadline-first sequencing settles the common case; otherwise a
    memoised search over job orders decides it.
    """
    jobs = sorted(jobs, key=lambda r: (r.deadline, r.release))
    end = 0
    for r in jobs:
        s = max(end, r.release)
        if s > r.last_start:
            break
        end = s + r.duration
    else:
        return True

    n = len(jobs)
    seen = set()

    def search(mask, t):
        if mask == (1 << n) - 1:
            return True
        if (mask, t) in seen:
            return False
        seen.add((mask, t))
        for i, r in enumerate(jobs):
            if mask >> i & 1:
                continue
            s = max(t, r.release)
            if s <= r.last_start and search(mask | 1 << i, s + r.duration):
                return True
        return False

    return search(0, 0)


def check_schedule(instance: Instance, schedule: Schedule) -> None:
    """Raise :class:`ValidationError` unless ``schedule`` is feasible."""
    starts = schedule.start
    ids = {r.id for r in instance.requests}
    extra = set(starts) - ids
    if extra:
        raise ValidationError(f"schedule names unknown request {min(extra)}")
    for r in instance.requests:
        if r.id not in starts:
            raise ValidationError(f"request {r.id} has no start time")
        s = starts[r.id]
        if not r.release <= s <= r.last_start:
            raise ValidationError(f"request {r.id}: start outside window [{r.release}, {r.last_start}]")
    for arc, jobs in instance.requests_by_arc.items():
        spans = sorted((starts[r.id], starts[r.id] + r.duration, r.id) for r in jobs)
        for (s0, e0, r0), (s1, _, r1) in zip(spans, spans[1:]):
            if s1 < e0:
                raise ValidationError(f"requests {r0} and {r1} overlap on arc {arc}")


def closure_masks(instance: Instance, schedule: Schedule) -> list[int]:
    """Per-period configuration bit masks (bit ``a`` set = arc open)."""
    full = (1 << instance.network.n_arcs) - 1
    masks = [full] * instance.horizon
    for r in instance.requests:
        s = schedule.start[r.id]
        for t in range(s, min(s + r.duration, instance.horizon)):
            masks[t] &= ~(1 << r.arc)
    return masks


def evaluate_schedule(instance: Instance, schedule: Schedule, cache=None) -> int:
    """Total throughput of ``schedule`` summed over the horizon."""
    check_schedule(instance, schedule)
    n = instance.network.n_arcs
    total = 0
    local = {}
    for bits in closure_masks(instance, schedule):
        if cache is not None:
            total += cache.solve_or_recall(instance.network, ArcConfiguration(bits, n)).value
            continue
        if bits not in local:
            local[bits] = max_flow(instance.network, ArcConfiguration(bits, n)).value
        total += local[bits]
    return total


def instance_to_dict(instance: Instance) -> dict:
    net = instance.network
    return {
        "nodes": list(net.nodes),
        "arcs": [{"id": a.id, "tail": a.tail, "head": a.head, "cap": a.cap} for a in net.arcs],
        "source": net.source,
        "sink": net.sink,
        "horizon": instance.horizon,
        "requests": [
            {"id": r.id, "arc": r.arc, "release": r.release,
             "deadline": r.deadline, "duration": r.duration}
            for r in instance.requests
        ],
    }


def serialize_instance(instance: Instance) -> bytes:
    return (json.dumps(instance_to_dict(instance), indent=1) + "\n").encode("utf-8")


def _field(doc, key, where, kind=None):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in doc:
        raise ParseError(f"{where}: missing field '{key}'")
    v = doc[key]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise ParseError(f"{where}: field '{key}' must be an integer")
    if kind is list and not isinstance(v, list):
        raise ParseError(f"{where}: field '{key}' must be a list")
    return v


def _node(v, where):
    if isinstance(v, (str, int)) and not isinstance(v, bool):
        return v
    raise ParseError(f"{where}: node ids must be strings or integers")


def instance_from_dict(doc: dict) -> Instance:
    nodes = [_node(v, "nodes") for v in _field(doc, "nodes", "instance", list)]
    arcs = []
    for i, a in enumerate(_field(doc, "arcs", "instance", list)):
        where = f"arcs[{i}]"
        arcs.append(Arc(
            _field(a, "id", where, int),
            _node(_field(a, "tail", where), where),
            _node(_field(a, "head", where), where),
            _field(a, "cap", where, int),
        ))
    arcs.sort(key=lambda a: a.id)
    reqs = []
    for i, r in enumerate(_field(doc, "requests", "instance", list)):
        where = f"requests[{i}]"
        reqs.append(MaintenanceRequest(*(_field(r, k, where, int) for k in
                                         ("id", "arc", "release", "deadline", "duration"))))
    try:
        net = Network(tuple(nodes), tuple(arcs), _node(_field(doc, "source", "instance"), "source"),
                      _node(_field(doc, "sink", "instance"), "sink"))
        return Instance(net, _field(doc, "horizon", "instance", int), tuple(reqs))
    except ParseError:
        raise
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def parse_instance(data: bytes | str) -> Instance:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def serialize_schedule(schedule: Schedule) -> bytes:
    doc = {"start": {str(k): v for k, v in schedule.start.items()}}
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def parse_schedule(data: bytes | str) -> Schedule:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    start = _field(doc, "start", "schedule")
    if not isinstance(start, dict):
        raise ParseError("schedule: field 'start' must be an object")
    out = {}
    for k, v in start.items():
        try:
            rid = int(k)
        except ValueError:
            raise ParseError(f"schedule: request id {k!r} is not an integer") from None
        if not isinstance(v, int) or isinstance(v, bool):
            raise ParseError(f"schedule: start of request {k} must be an integer")
        out[rid] = v
    return Schedule(out)
