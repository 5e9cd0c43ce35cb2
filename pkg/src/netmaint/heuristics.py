"""Primal heuristics: rounding a relaxed master point and start-shift local search."""

from __future__ import annotations

import time

import numpy as np

from .cache import FlowCache
from .instance import Instance, Schedule
from .network import ArcConfiguration


def round_schedule(instance: Instance, preference) -> Schedule | None:
    """Feasible schedule close to per-request start preferences.

    ``preference`` maps ``(request id, start)`` to a score (usually the
    relaxed ``start`` value). On every arc, jobs are placed in order of their
    preferred start and pushed right as little as needed to avoid overlap.
    Returns ``None`` when the push runs past a job's last start.
    """
    start = {}
    for jobs in instance.requests_by_arc.values():
        wanted = []
        for r in jobs:
            scores = [preference.get((r.id, s), 0.0) for s in r.starts]
            wanted.append((r.release + int(np.argmax(scores)), r.deadline, r))
        wanted.sort(key=lambda w: (w[0], w[1]))
        free_at = 0
        for s, _, r in wanted:
            s = max(s, free_at, r.release)
            if s > r.last_start:
                return None
            start[r.id] = s
            free_at = s + r.duration
    return Schedule(start)


class ScheduleEvaluator:
    """Incremental throughput of a schedule under single-request moves."""

    def __init__(self, instance: Instance, cache: FlowCache):
        self.instance = instance
        self.cache = cache
        self.net = instance.network
        self.n = self.net.n_arcs

    def flow(self, bits: int) -> int:
        return self.cache.solve_or_recall(self.net, ArcConfiguration(bits, self.n)).value

    def masks(self, schedule: Schedule) -> list[int]:
        T = self.instance.horizon
        masks = [(1 << self.n) - 1] * T
        for r in self.instance.requests:
            s = schedule.start[r.id]
            for t in range(s, min(s + r.duration, T)):
                masks[t] &= ~(1 << r.arc)
        return masks

    def value(self, schedule: Schedule) -> int:
        return sum(self.flow(b) for b in self.masks(schedule))


def local_search(instance: Instance, schedule: Schedule, cache: FlowCache,
                 deadline: float | None = None) -> tuple[int, Schedule]:
    """First-improvement search over single-request start shifts.

    A move re-times one request inside its window while keeping its arc free
    of overlaps; only the periods the move touches are re-evaluated.
    """
    ev = ScheduleEvaluator(instance, cache)
    T = instance.horizon
    start = dict(schedule.start)
    masks = ev.masks(schedule)
    flows = [ev.flow(b) for b in masks]
    by_arc = instance.requests_by_arc
    improved = True
    while improved:
        improved = False
        for r in instance.requests:
            if deadline is not None and time.monotonic() >= deadline:
                return sum(flows), Schedule(start)
            if r.window_size == 1:
                continue
            others = [(start[o.id], start[o.id] + o.duration) for o in by_arc[r.arc] if o.id != r.id]
            s0 = start[r.id]
            bit = 1 << r.arc
            old = range(s0, min(s0 + r.duration, T))
            best_delta, best_s = 0, s0
            for s in r.starts:
                if s == s0 or any(s < e and b < s + r.duration for b, e in others):
                    continue
                new = range(s, min(s + r.duration, T))
                delta = 0
                for t in set(old).symmetric_difference(new):
                    bits = masks[t] | bit if t in old else masks[t] & ~bit
                    delta += ev.flow(bits) - flows[t]
                if delta > best_delta:
                    best_delta, best_s = delta, s
            if best_s != s0:
                for t in old:
                    masks[t] |= bit
                for t in range(best_s, min(best_s + r.duration, T)):
                    masks[t] &= ~bit
                for t in set(old).union(range(best_s, min(best_s + r.duration, T))):
                    flows[t] = ev.flow(masks[t])
                start[r.id] = best_s
                improved = True
    return sum(flows), Schedule(start)
