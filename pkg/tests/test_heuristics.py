import itertools

import numpy as np
import pytest

from netmaint import ArcConfiguration, FlowCache, Schedule, brute_force, build_master, evaluate_schedule, max_flow
from netmaint.generate import random_small_instance
from netmaint.gomory import gomory_cuts, integer_columns
from netmaint.heuristics import ScheduleEvaluator, local_search, round_schedule
from netmaint.instance import check_schedule, closure_masks
from netmaint.exceptions import ValidationError
from netmaint import lp as lpmod
from netmaint.lp import LE, LinearProgram, Row


def feasible_instances(n):
    return [inst for inst in (random_small_instance(4000 + s) for s in range(n)) if inst.requests]


class TestRounding:
    def test_prefers_highest_score(self):
        inst = random_small_instance(4001)
        pref = {(r.id, r.last_start): 1.0 for r in inst.requests}
        s = round_schedule(inst, pref)
        if s is not None:
            check_schedule(inst, s)

    @pytest.mark.parametrize("inst", feasible_instances(30))
    def test_result_is_feasible_or_none(self, inst):
        rng = np.random.default_rng(len(inst.requests))
        pref = {(r.id, t): float(rng.random()) for r in inst.requests for t in r.starts}
        s = round_schedule(inst, pref)
        if s is not None:
            check_schedule(inst, s)


class TestLocalSearch:
    @pytest.mark.parametrize("inst", feasible_instances(30))
    def test_never_worse_and_consistent(self, inst):
        _, best = brute_force(inst)
        start = round_schedule(inst, {}) or best
        cache = FlowCache()
        before = ScheduleEvaluator(inst, cache).value(start)
        value, improved = local_search(inst, start, cache)
        check_schedule(inst, improved)
        assert value == evaluate_schedule(inst, improved)
        assert value >= before


class TestGomory:
    @pytest.mark.parametrize("backend", ["highs", "simplex"])
    def test_knapsack_cut_is_valid(self, backend):
        # max x0 + x1 + x2 s.t. 2(x0 + x1 + x2) <= 3, binaries: optimum 1
        lp = LinearProgram([1, 1, 1], [0, 0, 0], [1, 1, 1], [Row({0: 2, 1: 2, 2: 2}, LE, 3)])
        sol = lpmod.solve(lp, backend=backend)
        rows = gomory_cuts(lp, sol, [True] * 3)
        assert rows
        for r in rows:
            act = sum(c * sol.x[j] for j, c in r.coeffs.items())
            assert act < r.rhs  # the fractional optimum is cut off
            for point in itertools.product((0, 1), repeat=3):
                if 2 * sum(point) <= 3:
                    assert sum(c * point[j] for j, c in r.coeffs.items()) >= r.rhs - 1e-9

    def test_master_cuts_keep_integer_points(self):
        # every feasible schedule, with theta at its true flows, satisfies the cuts
        with_rows = 0
        for inst in feasible_instances(150):
            model = build_master(inst, "main")
            sol = lpmod.solve(model.lp, backend="highs")
            rows = gomory_cuts(model.lp, sol, integer_columns(model))
            with_rows += bool(rows)
            if rows:
                self._check_all_schedules(inst, model, rows)
        assert with_rows >= 5

    @staticmethod
    def _check_all_schedules(inst, model, rows):
        starts = [list(r.starts) for r in inst.requests]
        n = inst.network.n_arcs
        for combo in itertools.islice(itertools.product(*starts), 2000):
            sched = Schedule({r.id: s for r, s in zip(inst.requests, combo)})
            try:
                check_schedule(inst, sched)
            except ValidationError:
                continue
            thetas = [max_flow(inst.network, ArcConfiguration(b, n)).value
                      for b in closure_masks(inst, sched)]
            x = model.point(sched, thetas)
            for r in rows:
                act = sum(c * x[j] for j, c in r.coeffs.items())
                assert act >= r.rhs - 1e-6
