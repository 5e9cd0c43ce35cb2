import itertools
import random

import pytest

from helpers import series_network, two_layer_network, single_arc_network
from netmaint import (ArcConfiguration, BendersCut, ValidationError, cut_from_duals, cut_is_valid,
                      is_simple_cutset, max_flow, pre_cuts)
from netmaint.benders import ALL
from netmaint.generate import random_layered_network


def all_configs(n_arcs):
    for bits in range(1, 1 << n_arcs, 2):
        yield ArcConfiguration(bits, n_arcs)


class TestPreCuts:
    def test_series_network(self, series):
        cuts = pre_cuts(series)
        assert [c.terms for c in cuts] == [((2, 10),), ((1, 20),)]
        assert all(c.time == ALL for c in cuts)

    def test_two_layers(self, layered):
        cuts = pre_cuts(layered)
        assert [c.terms for c in cuts] == [((3, 2), (4, 3), (5, 4), (6, 1)),
                                           ((7, 4), (8, 8), (9, 5), (10, 3))]

    def test_single_arc(self):
        assert [c.terms for c in pre_cuts(single_arc_network(7))] == [((1, 7),)]

    def test_bounds_never_decrease(self):
        # later cuts see lifted capacities, so their all-open bound is no smaller
        for seed in range(30):
            net = random_layered_network(seed, n_nodes=8)
            full = ArcConfiguration.all_open(net.n_arcs)
            bounds = [c.bound(full) for c in pre_cuts(net)]
            assert bounds == sorted(bounds)
            assert bounds[0] == max_flow(net).value

    @pytest.mark.parametrize("seed", range(15))
    def test_pre_cuts_valid_everywhere(self, seed):
        net = random_layered_network(seed, n_nodes=6, n_layers=2, density=0.6)
        if net.n_arcs > 13:
            pytest.skip("too many arcs to enumerate")
        cuts = pre_cuts(net)
        for cfg in all_configs(net.n_arcs):
            assert all(cut_is_valid(net, c, cfg) for c in cuts)
        for c in cuts:
            assert is_simple_cutset(net, c.support)


class TestCutFromDuals:
    def test_closed_bottleneck(self, series):
        cfg = ArcConfiguration.closing(3, [2])
        cut = cut_from_duals(4, max_flow(series, cfg), series)
        assert cut == BendersCut(4, ((2, 10),))
        assert cut.bound(cfg) == 0 and cut.bound([1, 1, 1]) == 10
        assert str(cut) == "theta[4] <= 10*y[2]"

    def test_no_path_means_no_cut(self):
        net = single_arc_network(0)
        assert cut_from_duals(0, max_flow(net), net) is None

    def test_round_trip_dict(self):
        cut = BendersCut(ALL, ((1, 5), (3, 2)))
        assert BendersCut.from_dict(cut.to_dict()) == cut
        with pytest.raises(ValidationError):
            BendersCut.from_dict({"t": "x", "terms": []})

    @pytest.mark.parametrize("seed", range(12))
    def test_valid_and_tight_exhaustively(self, seed):
        rng = random.Random(seed)
        net = random_layered_network(seed, n_nodes=rng.randint(4, 7), n_layers=2, density=0.5)
        if net.n_arcs > 13:
            pytest.skip("too many arcs to enumerate")
        configs = list(all_configs(net.n_arcs))
        flows = {c.bits: max_flow(net, c).value for c in configs}
        for gen in rng.sample(configs, min(8, len(configs))):
            sol = max_flow(net, gen)
            cut = cut_from_duals(0, sol, net)
            if cut is None:
                continue
            assert cut.bound(gen) == sol.value
            assert all(cut.bound(c) >= flows[c.bits] for c in configs)


class TestSimpleCutset:
    def test_examples(self, layered):
        assert is_simple_cutset(layered, [3, 4, 5, 6])
        assert is_simple_cutset(layered, [1, 2])
        assert is_simple_cutset(layered, [7, 8, 5, 6])
        assert not is_simple_cutset(layered, [1, 2, 3])  # 3 is redundant
        assert not is_simple_cutset(layered, [3, 4, 5])  # d->f still open
        assert not is_simple_cutset(layered, [])

    def test_arc0_rejected(self, series):
        with pytest.raises(ValidationError):
            is_simple_cutset(series, [0, 1])

    def test_matches_definition_by_enumeration(self, layered):
        arcs = range(1, layered.n_arcs)
        from netmaint.network import sink_reachable

        def is_cut(s):
            return not sink_reachable(layered, s)

        for k in range(1, 5):
            for combo in itertools.combinations(arcs, k):
                s = set(combo)
                expected = is_cut(s) and all(not is_cut(s - {a}) for a in s)
                assert is_simple_cutset(layered, s) == expected
