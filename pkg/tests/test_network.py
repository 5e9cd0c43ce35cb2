import itertools
import random

import networkx as nx
import pytest

from helpers import series_network, two_layer_network, single_arc_network
from netmaint import (ArcConfiguration, ContractViolation, FlowSolution, Network, StructuralError,
                      ValidationError, augment_super_terminals, is_simple_cutset, max_flow,
                      min_cut_duals)
from netmaint.generate import random_layered_network
from netmaint.network import Arc, check_flow, max_flow_fractional, sink_reachable


def brute_min_cut(net: Network, config: ArcConfiguration) -> int:
    """Minimum capacity over all source/sink node bipartitions."""
    inner = [v for v in net.nodes if v not in (net.source, net.sink)]
    best = None
    for k in range(len(inner) + 1):
        for side in itertools.combinations(inner, k):
            S = set(side) | {net.source}
            cap = sum(a.cap for a in net.arcs[1:]
                      if config.is_open(a.id) and a.tail in S and a.head not in S)
            best = cap if best is None else min(best, cap)
    return best


def networkx_flow(net: Network, config: ArcConfiguration) -> int:
    g = nx.DiGraph()
    g.add_nodes_from(net.nodes)
    for a in net.arcs[1:]:
        if config.is_open(a.id):
            prev = g.get_edge_data(a.tail, a.head, {"capacity": 0})["capacity"]
            g.add_edge(a.tail, a.head, capacity=prev + a.cap)
    return int(nx.maximum_flow_value(g, net.source, net.sink))


class TestAugment:
    def test_arc0_capacity_follows_the_rule(self, series):
        # one plus the capacity leaving the source (20)
        assert series.arcs[0].cap == 21
        assert (series.arcs[0].tail, series.arcs[0].head) == ("t", "s")
        assert series.n_arcs == 3

    def test_single_terminal_graph_keeps_topology(self):
        net = augment_super_terminals(["s", "m", "t"], [("s", "m", 3), ("m", "t", 4)])
        assert net.nodes == ("s", "m", "t")
        assert [(a.tail, a.head, a.cap) for a in net.arcs[1:]] == [("s", "m", 3), ("m", "t", 4)]

    def test_two_sources_two_sinks(self):
        arcs = [("a", "c", 1), ("a", "d", 2), ("b", "c", 3), ("b", "d", 4)]
        net = augment_super_terminals(["a", "b", "c", "d"], arcs)
        assert net.n_arcs == 1 + 4 + 4
        assert len(net.nodes) == 6
        assert net.source not in "abcd" and net.sink not in "abcd"
        assert max_flow(net).value == 10
        assert net.arcs[0].cap == 11

    def test_no_source_is_structural(self):
        with pytest.raises(StructuralError):
            augment_super_terminals(["a", "b"], [("a", "b", 1), ("b", "a", 1)])

    def test_no_arcs_means_no_source(self):
        with pytest.raises(StructuralError):
            augment_super_terminals(["a"], [])

    def test_undeclared_node(self):
        with pytest.raises(ValidationError):
            augment_super_terminals(["a", "b"], [("a", "z", 1)])

    def test_negative_capacity(self):
        with pytest.raises(ValidationError):
            augment_super_terminals(["a", "b"], [("a", "b", -1)])


class TestNetworkInvariants:
    def test_arc0_must_exceed_source_capacity(self):
        with pytest.raises(StructuralError):
            Network(("s", "t"), (Arc(0, "t", "s", 5), Arc(1, "s", "t", 5)), "s", "t")

    def test_arc0_direction(self):
        with pytest.raises(StructuralError):
            Network(("s", "t"), (Arc(0, "s", "t", 9), Arc(1, "s", "t", 5)), "s", "t")

    def test_ids_contiguous(self):
        with pytest.raises(ValidationError):
            Network(("s", "t"), (Arc(0, "t", "s", 9), Arc(2, "s", "t", 5)), "s", "t")

    def test_non_integer_capacity(self):
        with pytest.raises(ValidationError):
            Network(("s", "t"), (Arc(0, "t", "s", 9), Arc(1, "s", "t", 2.5)), "s", "t")

    def test_equality_and_hash(self):
        assert series_network() == series_network()
        assert hash(series_network()) == hash(series_network())
        assert series_network() != two_layer_network()


class TestConfiguration:
    def test_round_trip_flags(self):
        c = ArcConfiguration.closing(5, [2, 4])
        assert c.open_flags() == (1, 1, 0, 1, 0)
        assert ArcConfiguration.from_open(c.open_flags()) == c
        assert c.closed_arcs() == (2, 4)

    def test_arc0_cannot_close(self):
        with pytest.raises(ValidationError):
            ArcConfiguration.closing(3, [0])
        with pytest.raises(ValidationError):
            ArcConfiguration(0b110, 3)

    def test_excess_bits(self):
        with pytest.raises(ValidationError):
            ArcConfiguration(0b1111, 3)

    def test_length_mismatch(self, series):
        with pytest.raises(ValidationError):
            max_flow(series, ArcConfiguration.all_open(5))


class TestMaxFlow:
    def test_series_value_and_duals(self, series):
        sol = max_flow(series)
        assert sol.value == 10
        assert sol.support == (2,)
        assert sol.flows[2] == 10

    def test_two_layer_value_and_duals(self, layered):
        sol = max_flow(layered)
        assert sol.value == 10
        assert sol.support == (3, 4, 5, 6)

    def test_single_arc(self):
        sol = max_flow(single_arc_network(7))
        assert sol.value == 7 and sol.support == (1,)

    def test_everything_closed(self, layered):
        sol = max_flow(layered, ArcConfiguration.closing(layered.n_arcs, range(1, layered.n_arcs)))
        assert sol.value == 0

    def test_closed_bottleneck_still_in_support(self, series):
        sol = max_flow(series, ArcConfiguration.closing(3, [2]))
        assert sol.value == 0
        assert sol.support == (2,)

    def test_zero_capacity_arcs_are_never_duals(self):
        net = augment_super_terminals(["s", "a", "t"], [("s", "a", 0), ("a", "t", 5), ("s", "t", 2)])
        sol = max_flow(net)
        assert sol.value == 2
        assert 1 not in sol.support
        assert is_simple_cutset(net, sol.support)

    def test_min_cut_duals_rejects_non_maximal_flow(self, series):
        fake = FlowSolution(0, (0, 0, 0), ())
        with pytest.raises(ContractViolation):
            min_cut_duals(series, ArcConfiguration.all_open(3), fake)

    def test_fractional_capacities(self, series):
        sol = max_flow_fractional(series, [21.0, 20.0, 2.5])
        assert sol.value == pytest.approx(2.5)
        assert sol.support == (2,)

    @pytest.mark.parametrize("seed", range(40))
    def test_random_against_references(self, seed):
        net = random_layered_network(seed, n_nodes=7, n_layers=2, density=0.5, cap_range=(0, 9))
        rng = random.Random(seed)
        for _ in range(5):
            closed = [a for a in range(1, net.n_arcs) if rng.random() < 0.3]
            config = ArcConfiguration.closing(net.n_arcs, closed)
            sol = max_flow(net, config)
            check_flow(net, config, sol)
            assert sol.value == networkx_flow(net, config)
            assert sol.value == brute_min_cut(net, config)
            assert all(isinstance(f, int) for f in sol.flows)
            caps = sum(net.arcs[a].cap for a in sol.support if config.is_open(a))
            if sol.support != (0,):
                assert caps == sol.value
            if sol.value > 0:
                assert is_simple_cutset(net, sol.support)
            for a in sol.support:
                if config.is_open(a):
                    assert sol.flows[a] == net.arcs[a].cap


def test_sink_reachable_ignores_zero_capacity(series):
    assert sink_reachable(series)
    assert not sink_reachable(series, [1])
    net = augment_super_terminals(["s", "t"], [("s", "t", 0)])
    assert not sink_reachable(net)
