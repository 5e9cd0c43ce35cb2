"""Seeded random networks and maintenance instances."""

from __future__ import annotations

import numpy as np

from .exceptions import GenerationError, ValidationError
from .instance import Instance, MaintenanceRequest, non_overlap_feasible
from .network import Network, augment_super_terminals

# number of admissible start times per job, by instance set
WINDOW_SIZES = {1: (1, 35), 2: (25, 35), 3: (1, 10)}
JOBS_PER_ARC = (5, 15)
DURATIONS = (10, 30)


def random_layered_network(seed, n_nodes: int = 8, n_layers: int = 3,
                           density: float = 0.5, cap_range=(1, 20)) -> Network:
    """Layered random DAG from one source to one sink.

    ``n_layers`` counts the interior layers; ``n_nodes`` includes source and
    sink. Every interior node gets at least one arc in and one arc out so all
    nodes lie on some source-sink path.
    """
    rng = np.random.default_rng(seed)
    n_inner = n_nodes - 2
    if n_layers < 1 or n_inner < n_layers:
        raise ValidationError("need at least one interior node per layer")
    sizes = np.ones(n_layers, dtype=int)
    for i in rng.integers(0, n_layers, n_inner - n_layers):
        sizes[i] += 1
    layers = [["s"]]
    k = 0
    for size in sizes:
        layers.append([f"v{k + j}" for j in range(size)])
        k += size
    layers.append(["t"])

    lo, hi = cap_range
    arcs = []
    for prev, nxt in zip(layers, layers[1:]):
        pairs = set()
        for w in nxt:
            pairs.add((prev[rng.integers(len(prev))], w))
        for v in prev:
            if not any(p == v for p, _ in pairs):
                pairs.add((v, nxt[rng.integers(len(nxt))]))
        for v in prev:
            for w in nxt:
                if (v, w) not in pairs and rng.random() < density:
                    pairs.add((v, w))
        for v, w in sorted(pairs, key=lambda p: (prev.index(p[0]), nxt.index(p[1]))):
            arcs.append((v, w, int(rng.integers(lo, hi + 1))))
    nodes = [v for layer in layers for v in layer]
    return augment_super_terminals(nodes, arcs)


def _place(rng, spans, slack):
    """Split ``slack`` idle periods into len(spans)+1 random gaps."""
    cuts = np.sort(rng.integers(0, slack + 1, len(spans)))
    gaps = np.diff(np.concatenate(([0], cuts)))
    starts, t = [], 0
    for g, span in zip(gaps, spans):
        t += int(g)
        starts.append(t)
        t += span
    return starts


def generate_instance(set_id: int, network: Network, seed, *, horizon: int | None = None,
                      min_horizon: int = 1, jobs_per_arc=JOBS_PER_ARC,
                      durations=DURATIONS, arcs=None, max_retries: int = 100) -> Instance:
    """Random maintenance requests on ``network`` following instance set ``set_id``.

    Each arc gets jobs whose candidate windows are laid out one after the
    other, so the per-arc non-overlap requirement holds by construction.
    With ``horizon`` given, windows are packed into it (redrawing an arc up to
    ``max_retries`` times); otherwise the horizon is the last deadline plus
    one, padded to ``min_horizon``.
    """
    if set_id not in WINDOW_SIZES:
        raise ValidationError(f"set_id must be 1, 2 or 3, got {set_id!r}")
    rng = np.random.default_rng(seed)
    wlo, whi = WINDOW_SIZES[set_id]
    targets = range(1, network.n_arcs) if arcs is None else arcs
    requests = []
    rid = 0
    for arc in targets:
        for _ in range(max_retries):
            k = int(rng.integers(jobs_per_arc[0], jobs_per_arc[1] + 1))
            durs = rng.integers(durations[0], durations[1] + 1, k)
            wins = rng.integers(wlo, whi + 1, k)
            spans = [int(d + w - 1) for d, w in zip(durs, wins)]
            if horizon is None:
                slack = int(rng.integers(0, 5 * k + 1))
            else:
                slack = horizon - sum(spans)
                if slack < 0:
                    continue
            starts = _place(rng, spans, slack)
            break
        else:
            raise GenerationError(f"could not fit the jobs of arc {arc} into horizon {horizon}")
        for s, d, w in zip(starts, durs, wins):
            d, w = int(d), int(w)
            requests.append(MaintenanceRequest(rid, arc, s, s + w + d - 2, d))
            rid += 1
    if horizon is None:
        horizon = max([r.deadline + 1 for r in requests] + [min_horizon])
    return Instance(network, horizon, tuple(requests))


def random_small_instance(seed, *, max_nodes: int = 8, max_arcs: int = 12, max_horizon: int = 12,
                          max_requests: int = 4, max_window: int = 6,
                          max_space: int = 10 ** 5) -> Instance:
    """Tiny random instance within reach of exhaustive enumeration.

    Unlike :func:`generate_instance`, candidate windows of jobs on the same
    arc may overlap; only instances admitting a non-overlapping schedule are
    returned. ``max_arcs`` counts arc 0.
    """
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        n_nodes = int(rng.integers(3, max_nodes + 1))
        n_layers = int(rng.integers(1, min(3, n_nodes - 2) + 1))
        net = random_layered_network(int(rng.integers(2 ** 31)), n_nodes, n_layers,
                                     float(rng.uniform(0.1, 0.7)), (0, 12))
        if net.n_arcs > max_arcs:
            continue
        T = int(rng.integers(1, max_horizon + 1))
        reqs = []
        for rid in range(int(rng.integers(0, max_requests + 1))):
            dur = int(rng.integers(1, min(4, T) + 1))
            ws = int(rng.integers(1, min(max_window, T - dur + 1) + 1))
            rel = int(rng.integers(0, T - dur - ws + 2))
            arc = int(rng.integers(1, net.n_arcs))
            reqs.append(MaintenanceRequest(rid, arc, rel, rel + ws + dur - 2, dur))
        space = int(np.prod([r.window_size for r in reqs])) if reqs else 1
        if space > max_space:
            continue
        by_arc = {}
        for r in reqs:
            by_arc.setdefault(r.arc, []).append(r)
        if all(non_overlap_feasible(j) for j in by_arc.values()):
            return Instance(net, T, tuple(reqs))
    raise GenerationError("no feasible small instance found")
