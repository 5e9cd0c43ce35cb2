"""Benders master problem, branch-and-bound with lazy cuts, and the brute-force oracle.

Variables of the master LP, in column order:

* ``theta[t]`` for every period, boxed by the all-open max flow;
* ``y[a, t]`` for every (arc, period) pair some request could close;
* ``start[r, t]`` for every admissible start of every request.

``y`` for pairs no request can touch is the constant 1 and never becomes a
column; its contribution moves to the right-hand side of each cut.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import lp as lpmod
from .benders import ALL, BendersCut, cut_from_duals, pre_cuts
from .cache import FlowCache
from .exceptions import InstanceTooLarge, ValidationError
from .gomory import gomory_cuts, integer_columns
from .heuristics import local_search, round_schedule
from .instance import Instance, Schedule, closure_masks, non_overlap_feasible
from .network import ArcConfiguration, max_flow_fractional

INT_TOL = 1e-6
THETA_TOL = 1e-6
LPR_IMPROVE_TOL = 1e-6
# rounding passes (each may add cuts and re-solve) at the root and at other nodes
ROOT_ROUNDS = 50
NODE_ROUNDS = 1
# a Gomory round counts as stalled when the root bound drops by less than this
GOMORY_STALL = 0.05
GOMORY_STALL_ROUNDS = 2
# restart the tree once this many lazy cuts and nodes have piled up since the root
RESTART_CUTS = 20
RESTART_NODES = 50


class Mode(enum.IntEnum):
    """Solver variants; each one adds a feature to the previous."""

    DBD = 0
    PRECUTS = 1
    MAIN = 2
    LPR = 3

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValidationError(f"unknown mode {value!r}; expected dbd, precuts, main or lpr") from None

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass
class SolverConfig:
    mode: Mode = Mode.MAIN
    time_limit: float = 300.0
    abs_gap: float = 0.999
    lpr_max_iters: int = 20
    branch_priority: bool = True
    backend: str = "highs"
    trace: bool = False
    gomory_rounds: int = 30
    max_restarts: int = 10

    def __post_init__(self):
        self.mode = Mode.parse(self.mode)
        if not self.abs_gap > 0:
            raise ValidationError("abs_gap must be positive")
        if not self.time_limit > 0:
            raise ValidationError("time_limit must be positive")
        if self.gomory_rounds < 0:
            raise ValidationError("gomory_rounds must be non-negative")
        if self.lpr_max_iters < 1:
            raise ValidationError("lpr_max_iters must be at least 1")


@dataclass
class SolveReport:
    status: str
    mode: str
    objective: Optional[int]
    bound: float
    abs_gap: float
    rel_gap: float
    root_bound: float
    nodes: int
    lazy_cuts: int
    pre_cuts: int
    lp_cuts: int
    gomory_cuts: int
    restarts: int
    flows_solved: int
    flows_recalled: int
    lp_passes: int
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "SolveReport":
        names = {f.name for f in fields(cls)}
        missing = names - set(doc)
        if missing:
            raise ValidationError(f"report is missing field '{sorted(missing)[0]}'")
        return cls(**{k: doc[k] for k in names})


@dataclass
class CutRecord:
    cut: BendersCut
    kind: str  # "pre", "lpr" or "lazy"


@dataclass(eq=False)
class MasterModel:
    instance: Instance
    mode: Mode
    flow_bound: int
    lp: lpmod.LinearProgram
    y_index: dict
    start_index: dict
    fixed_open: list
    cache: FlowCache
    cuts: list = field(default_factory=list)
    lp_passes: int = 0
    lp_history: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.instance.horizon

    @property
    def n_y(self) -> int:
        return len(self.y_index)

    def theta(self, t: int) -> int:
        return t

    def add_cut(self, cut: BendersCut, kind: str) -> None:
        """Install ``cut`` as hard rows (one per period in its scope)."""
        caps = {a: c for a, c in cut.terms}
        times = range(self.horizon) if cut.time == ALL else (cut.time,)
        rows = []
        for t in times:
            rhs = 0
            free = []
            for a, c in caps.items():
                j = self.y_index.get((a, t))
                if j is None:
                    rhs += c
                else:
                    free.append((j, c))
            if rhs >= self.flow_bound:
                continue  # the theta box already implies this row
            # a binary y with Cap_a above the remaining slack to the theta box
            # lifts the bound past the box on its own, so its coefficient can
            # be cut down to that slack without excluding any integer point
            room = self.flow_bound - rhs
            coeffs = {t: 1.0}
            for j, c in free:
                coeffs[j] = -float(min(c, room))
            rows.append(lpmod.Row(coeffs, lpmod.LE, float(rhs)))
        self.lp.add_rows(rows)
        self.cuts.append(CutRecord(cut, kind))

    def cut_rows(self, kind: str | None = None) -> int:
        return sum(self.horizon if r.cut.time == ALL else 1
                   for r in self.cuts if kind is None or r.kind == kind)

    def configuration(self, x, t: int) -> ArcConfiguration:
        """Arc configuration at ``t`` from an integral master point."""
        n = self.instance.network.n_arcs
        bits = (1 << n) - 1
        for (a, tt), j in self.y_index.items():
            if tt == t and x[j] < 0.5:
                bits &= ~(1 << a)
        return ArcConfiguration(bits, n)

    def configurations(self, x) -> list[ArcConfiguration]:
        n = self.instance.network.n_arcs
        masks = [(1 << n) - 1] * self.horizon
        for (a, t), j in self.y_index.items():
            if x[j] < 0.5:
                masks[t] &= ~(1 << a)
        return [ArcConfiguration(b, n) for b in masks]

    def capacities(self, x, t: int) -> list[float]:
        """Arc capacities ``Cap_a * y[a, t]`` for a possibly fractional point."""
        caps = [float(a.cap) for a in self.instance.network.arcs]
        for a in range(1, len(caps)):
            j = self.y_index.get((a, t))
            if j is not None:
                caps[a] *= min(max(float(x[j]), 0.0), 1.0)
        return caps

    def schedule(self, x) -> Schedule:
        best = {}
        for (rid, t), j in self.start_index.items():
            if rid not in best or x[j] > x[best[rid][1]]:
                best[rid] = (t, j)
        return Schedule({rid: t for rid, (t, _) in best.items()})

    def point(self, schedule: Schedule, thetas) -> np.ndarray:
        """Master vector for a schedule and per-period theta values."""
        x = np.zeros(self.lp.n_vars)
        x[: self.horizon] = thetas
        masks = closure_masks(self.instance, schedule)
        for (a, t), j in self.y_index.items():
            x[j] = float(masks[t] >> a & 1)
        for r in self.instance.requests:
            x[self.start_index[(r.id, schedule.start[r.id])]] = 1.0
        return x


def build_master(instance: Instance, mode=Mode.MAIN, cache: FlowCache | None = None) -> MasterModel:
    """Scheduling rows, theta boxes and (from PRECUTS on) bottleneck cuts."""
    mode = Mode.parse(mode)
    for arc, jobs in instance.requests_by_arc.items():
        if not non_overlap_feasible(jobs):
            raise ValidationError(f"requests on arc {arc} cannot be scheduled without overlap")
    net = instance.network
    T = instance.horizon
    cache = FlowCache() if cache is None else cache
    flow_bound = cache.solve_or_recall(net, ArcConfiguration.all_open(net.n_arcs)).value

    y_index = {}
    for arc, jobs in instance.requests_by_arc.items():
        for t in range(T):
            if any(len(r.running_at(t)) for r in jobs):
                y_index[(arc, t)] = None
    j = T
    for key in sorted(y_index, key=lambda k: (k[1], k[0])):
        y_index[key] = j
        j += 1
    start_index = {}
    for r in instance.requests:
        for t in r.starts:
            start_index[(r.id, t)] = j
            j += 1
    n = j

    obj = np.zeros(n)
    obj[:T] = 1.0
    lower = np.zeros(n)
    upper = np.ones(n)
    upper[:T] = flow_bound
    lp = lpmod.LinearProgram(obj, lower, upper)

    rows = []
    for r in instance.requests:
        rows.append(lpmod.Row({start_index[(r.id, t)]: 1.0 for t in r.starts}, lpmod.EQ, 1.0))
    for (arc, t), yj in sorted(y_index.items(), key=lambda kv: kv[1]):
        coeffs = {yj: 1.0}
        for r in instance.requests_by_arc[arc]:
            for s in r.running_at(t):
                coeffs[start_index[(r.id, s)]] = 1.0
        rows.append(lpmod.Row(coeffs, lpmod.EQ, 1.0))
    lp.add_rows(rows)

    fixed_open = [[a for a in range(1, net.n_arcs) if (a, t) not in y_index] for t in range(T)]
    model = MasterModel(instance, mode, flow_bound, lp, y_index, start_index, fixed_open, cache)
    if mode >= Mode.PRECUTS:
        for cut in pre_cuts(net):
            model.add_cut(cut, "pre")
    return model


def lazy_callback(model: MasterModel, x, cache: FlowCache | None = None, heuristic: bool | None = None):
    """Check an integral master point against the true flows.

    Returns ``(cuts, true_flows, suggestion)``. ``cuts`` holds one cut per
    period whose theta overestimates the flow; ``suggestion`` is the total
    true throughput when the point overestimates it and heuristic repair is
    enabled (MAIN and LPR), else ``None``.
    """
    cache = model.cache if cache is None else cache
    if heuristic is None:
        heuristic = model.mode >= Mode.MAIN
    net = model.instance.network
    cuts = []
    flows = []
    for t, config in enumerate(model.configurations(x)):
        sol = cache.solve_or_recall(net, config)
        flows.append(sol.value)
        if x[t] > sol.value + THETA_TOL:
            cut = cut_from_duals(t, sol, net)
            if cut is not None:
                cuts.append(cut)
    suggestion = None
    if heuristic and float(np.sum(x[: model.horizon])) > sum(flows) + THETA_TOL:
        suggestion = sum(flows)
    return cuts, flows, suggestion


def warm_start_lp(model: MasterModel, config: SolverConfig, deadline: float | None = None) -> float:
    """Tighten the root relaxation with cuts from fractional sub-problems.

    Repeats: solve the relaxed master, add a cut for every period whose theta
    exceeds the max flow under capacities ``Cap_a * y[a, t]``; stops once no
    cut is violated, the objective stops decreasing, ``lpr_max_iters`` passes
    are done, or the deadline passes. Returns the last relaxation objective.
    """
    net = model.instance.network
    prev = None
    obj = math.inf
    while True:
        sol = lpmod.solve(model.lp, backend=config.backend)
        model.lp_passes += 1
        if not sol.optimal:
            break
        obj = sol.objective
        model.lp_history.append(obj)
        added = 0
        for t in range(model.horizon):
            flow = max_flow_fractional(net, model.capacities(sol.x, t))
            if sol.x[t] > flow.value + THETA_TOL:
                cut = cut_from_duals(t, flow, net)
                if cut is not None:
                    model.add_cut(cut, "lpr")
                    added += 1
        improved = prev is None or obj < prev - LPR_IMPROVE_TOL * max(1.0, abs(prev))
        prev = obj
        if not added or not improved or model.lp_passes >= config.lpr_max_iters:
            break
        if deadline is not None and time.monotonic() >= deadline:
            break
    return obj


class _GomoryBudget:
    """Root Gomory rounds left; stops after two rounds in a row barely move the bound."""

    def __init__(self, rounds: int):
        self.left = rounds
        self.added = 0
        self.last = math.inf
        self.stalls = 0

    def active(self, objective: float) -> bool:
        if self.left <= 0:
            return False
        self.stalls = self.stalls + 1 if self.last - objective < GOMORY_STALL else 0
        self.last = objective
        if self.stalls >= GOMORY_STALL_ROUNDS:
            self.left = 0
            return False
        self.left -= 1
        return True


    def restart(self, rounds: int) -> None:
        self.left, self.last, self.stalls = rounds, math.inf, 0


@dataclass(order=True)
class _Node:
    key: tuple
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    bound: float = field(compare=False)
    depth: int = field(compare=False, default=0)
    basis: object = field(compare=False, default=None)


def _ceil_bound(value: float) -> float:
    # throughput of every schedule is an integer
    return float(math.floor(value + 1e-6))


def solve(model: MasterModel, config: SolverConfig | None = None):
    """Branch and bound over the master with lazy Benders cuts.

    Every integral LP optimum is passed to :func:`lazy_callback`; violated
    cuts are added to the global pool and the node is re-solved. Nodes are
    explored best-bound first, diving depth-first while there is no
    incumbent and right after a new one is found. Because every schedule has
    integral throughput, node bounds are rounded down before comparison.

    Returns ``(schedule, report)``; ``schedule`` is ``None`` when no feasible
    schedule was found (infeasible, or time ran out first).
    """
    config = config or SolverConfig(mode=model.mode)
    t0 = time.monotonic()
    deadline = t0 + config.time_limit
    T = model.horizon
    cache = model.cache
    heuristic = config.mode >= Mode.MAIN

    if config.mode >= Mode.LPR and model.lp_passes == 0:
        warm_start_lp(model, config, deadline)

    lp = model.lp
    n_y = model.n_y
    binaries = np.arange(T, lp.n_vars)

    best_val = -math.inf
    best_schedule = None
    new_incumbent = False
    pruned_bound = -math.inf
    lazy_count = 0
    nodes = 0
    root_bound = math.nan
    counter = itertools.count()
    heap: list = []
    stack = [_Node((0, next(counter)), lp.lower.copy(), lp.upper.copy(), math.inf)]
    status = "optimal"
    # bound proven by trees abandoned at a restart
    saved_bound = math.inf
    restarts = 0
    lazy_at_root = nodes_at_root = 0
    model.trace = []
    int_flags = integer_columns(model)
    gmi = _GomoryBudget(config.gomory_rounds)
    net = model.instance.network
    n_arcs = net.n_arcs
    caps = net.capacities
    seen = {r.cut for r in model.cuts}
    tried = set()

    def accept(value, schedule):
        nonlocal best_val, best_schedule, new_incumbent
        if value > best_val:
            best_val, best_schedule, new_incumbent = value, schedule, True

    def rounding_pass(x):
        """Round ``x`` to a schedule, keep it if better, return the number of cuts added."""
        nonlocal lazy_count
        pref = {key: x[j] for key, j in model.start_index.items()}
        schedule = round_schedule(model.instance, pref)
        if schedule is None:
            return 0
        added = 0
        total = 0
        y_index = model.y_index
        for t, bits in enumerate(closure_masks(model.instance, schedule)):
            sol = cache.solve_or_recall(net, ArcConfiguration(bits, n_arcs))
            total += sol.value
            if (t, bits) in tried:
                continue
            rhs = 0.0
            for a in sol.support:
                j = y_index.get((a, t))
                rhs += caps[a] * (1.0 if j is None else x[j])
            if x[t] > rhs + THETA_TOL:
                tried.add((t, bits))
                cut = cut_from_duals(t, sol, net)
                if cut is not None and cut not in seen:
                    seen.add(cut)
                    model.add_cut(cut, "lazy")
                    added += 1
        lazy_count += added
        if total > best_val:
            improve(total, schedule)
        return added

    def improve(value, schedule):
        accept(value, schedule)
        value, schedule = local_search(model.instance, schedule, cache, deadline)
        accept(value, schedule)

    def open_bound():
        return max([nd.bound for nd in heap] + [nd.bound for nd in stack], default=-math.inf)

    def global_bound():
        return min(saved_bound, max(open_bound(), pruned_bound, best_val))

    def prune(bound):
        nonlocal pruned_bound
        if bound - best_val < config.abs_gap:
            pruned_bound = max(pruned_bound, min(bound, best_val + config.abs_gap))
            return True
        return False

    while stack or heap:
        if time.monotonic() >= deadline:
            status = "time_limit"
            break
        if saved_bound - best_val < config.abs_gap:
            break
        node = stack.pop() if stack else heapq.heappop(heap)
        if prune(node.bound):
            continue
        nodes += 1
        new_incumbent = False
        branched = False
        basis = node.basis
        rounds = 0
        while True:
            sol = lpmod.solve(lp, lower=node.lower, upper=node.upper, basis=basis,
                              backend=config.backend)
            if sol.status == lpmod.NUMERICAL_FAILURE and config.backend != "highs":
                sol = lpmod.solve(lp, lower=node.lower, upper=node.upper, backend="highs")
            if not sol.optimal:
                break
            if math.isnan(root_bound):
                root_bound = sol.objective
            x = sol.x
            frac = np.abs(x[binaries] - np.round(x[binaries])) > INT_TOL
            if frac.any():
                added = 0
                if heuristic and rounds < (ROOT_ROUNDS if node.depth == 0 else NODE_ROUNDS):
                    rounds += 1
                    added += rounding_pass(x)
                if node.depth == 0 and gmi.active(sol.objective):
                    rows = gomory_cuts(lp, sol, int_flags)
                    lp.add_rows(rows)
                    gmi.added += len(rows)
                    added += len(rows)
                if not added or prune(_ceil_bound(sol.objective)):
                    break
                basis = sol.basis
                continue
            cuts, flows, suggestion = lazy_callback(model, x, cache, heuristic)
            if suggestion is not None and suggestion > best_val:
                improve(suggestion, model.schedule(x))
            if not cuts:
                accept(sum(flows), model.schedule(x))
                break
            for cut in cuts:
                seen.add(cut)
                model.add_cut(cut, "lazy")
            lazy_count += len(cuts)
            basis = sol.basis
            if prune(_ceil_bound(sol.objective)):
                break

        if sol.status == lpmod.NUMERICAL_FAILURE:
            status = "numerical_failure"
        elif sol.optimal and frac.any() and not prune(_ceil_bound(sol.objective)):
            bound = _ceil_bound(sol.objective)
            vals = x[binaries]
            dist = np.where(frac, np.minimum(vals - np.floor(vals), np.ceil(vals) - vals), -1.0)
            pick = None
            if config.branch_priority and n_y and (dist[:n_y] > 0).any():
                pick = int(np.argmax(dist[:n_y]))
            if pick is None:
                pick = int(np.argmax(dist))
            j = int(binaries[pick])
            down = _Node((-bound, next(counter)), node.lower, node.upper.copy(), bound,
                         node.depth + 1, sol.basis)
            down.upper[j] = math.floor(x[j])
            up = _Node((-bound, next(counter)), node.lower.copy(), node.upper, bound,
                       node.depth + 1, sol.basis)
            up.lower[j] = math.ceil(x[j])
            first, second = (up, down) if x[j] >= 0.5 else (down, up)
            heapq.heappush(heap, second)
            if best_val == -math.inf or new_incumbent or stack:
                stack.append(first)
            else:
                heapq.heappush(heap, first)
            branched = True
        if not branched and new_incumbent and not stack and heap:
            stack.append(heapq.heappop(heap))
        if node.depth == 0:
            lazy_at_root, nodes_at_root = lazy_count, nodes
        elif (restarts < config.max_restarts and lazy_count - lazy_at_root >= RESTART_CUTS
              and nodes - nodes_at_root >= RESTART_NODES):
            # the cut pool has grown since the root was tightened: keep the
            # proven bound, drop the tree and reprocess a fresh root
            saved_bound = global_bound()
            restarts += 1
            heap.clear()
            stack = [_Node((0, next(counter)), lp.lower.copy(), lp.upper.copy(), saved_bound)]
            pruned_bound = -math.inf
            gmi.restart(config.gomory_rounds)
        model.trace.append((global_bound(), best_val))

    if status == "optimal" and best_schedule is None:
        status = "infeasible"
    bound = max(global_bound(), best_val)
    if best_schedule is None:
        gap = rel = math.inf
    else:
        gap = max(bound - best_val, 0.0)
        rel = gap / abs(best_val) if best_val else (0.0 if gap == 0 else math.inf)
        if status == "time_limit" and gap < config.abs_gap:
            status = "optimal"
    report = SolveReport(
        status=status,
        mode=config.mode.label,
        objective=None if best_schedule is None else int(round(best_val)),
        bound=float(bound),
        abs_gap=float(gap),
        rel_gap=float(rel),
        root_bound=float(root_bound),
        nodes=nodes,
        lazy_cuts=lazy_count,
        pre_cuts=model.cut_rows("pre"),
        lp_cuts=model.cut_rows("lpr"),
        gomory_cuts=gmi.added,
        restarts=restarts,
        flows_solved=cache.solved_count,
        flows_recalled=cache.recalled_count,
        lp_passes=model.lp_passes,
        wall_time=time.monotonic() - t0,
    )
    return best_schedule, report


def solve_instance(instance: Instance, config: SolverConfig | None = None):
    """Build the master for ``config.mode`` and solve it."""
    config = config or SolverConfig()
    model = build_master(instance, config.mode)
    schedule, report = solve(model, config)
    return schedule, report, model


def brute_force(instance: Instance, cap: int = 10 ** 6, cache: FlowCache | None = None):
    """Exhaustive optimum over all non-overlapping start combinations.

    Returns ``(objective, schedule)``. Refuses with :class:`InstanceTooLarge`
    when the product of window sizes exceeds ``cap``.
    """
    reqs = instance.requests
    space = 1
    for r in reqs:
        space *= r.window_size
    if space > cap:
        raise InstanceTooLarge(f"{space} start combinations exceed the cap of {cap}")
    net = instance.network
    n = net.n_arcs
    T = instance.horizon
    cache = FlowCache() if cache is None else cache

    # per-arc feasible closure patterns, each a tuple of closed periods
    per_arc = []
    for arc, jobs in instance.requests_by_arc.items():
        options = {}
        for combo in itertools.product(*(r.starts for r in jobs)):
            spans = sorted(zip(combo, (r.duration for r in jobs)))
            if any(s1 < s0 + d0 for (s0, d0), (s1, _) in zip(spans, spans[1:])):
                continue
            closed = 0
            for s, d in spans:
                for t in range(s, s + d):
                    closed |= 1 << t
            options.setdefault(closed, combo)
        per_arc.append((arc, jobs, list(options.items())))

    full = (1 << n) - 1
    best = None
    for choice in itertools.product(*(opts for _, _, opts in per_arc)):
        masks = [full] * T
        for (arc, _, _), (closed, _) in zip(per_arc, choice):
            for t in range(T):
                if closed >> t & 1:
                    masks[t] &= ~(1 << arc)
        total = sum(cache.solve_or_recall(net, ArcConfiguration(b, n)).value for b in masks)
        if best is None or total > best[0]:
            best = (total, choice)
    value, choice = best
    start = {}
    for (_, jobs, _), (_, combo) in zip(per_arc, choice):
        for r, s in zip(jobs, combo):
            start[r.id] = s
    return value, Schedule(start)


def format_table(reports) -> str:
    """Plain-text statistics table, one column per report."""
    rows = [
        ("mode", lambda r: r.mode),
        ("status", lambda r: r.status),
        ("objective", lambda r: "-" if r.objective is None else str(r.objective)),
        ("bound", lambda r: f"{r.bound:.3f}"),
        ("gap (%)", lambda r: f"{100 * r.rel_gap:.3f}" if math.isfinite(r.rel_gap) else "inf"),
        ("num solved", lambda r: "1" if r.status == "optimal" else "0"),
        ("# flow solved", lambda r: str(r.flows_solved)),
        ("# flow recalled", lambda r: str(r.flows_recalled)),
        ("# lazy gen.", lambda r: str(r.lazy_cuts)),
        ("avg. LP solves", lambda r: f"{r.lp_passes:.1f}"),
        ("nodes", lambda r: str(r.nodes)),
        ("time (s)", lambda r: f"{r.wall_time:.2f}"),
    ]
    reports = list(reports)
    cells = [[label] + [fmt(r) for r in reports] for label, fmt in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = []
    for row in cells:
        lines.append("  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))))
    return "\n".join(lines)
