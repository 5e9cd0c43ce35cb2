"""Hand-built networks and instances shared by the tests."""

from netmaint import Instance, MaintenanceRequest, Network, augment_super_terminals


def series_network() -> Network:
    """Two arcs in series: s->m (cap 20) then m->t (cap 10)."""
    return augment_super_terminals(["s", "m", "t"], [("s", "m", 20), ("m", "t", 10)])


def two_layer_network() -> Network:
    """Two layers of bottlenecks: arcs 3-6 carry 10 in total, arcs 7-10 carry 20."""
    nodes = ["s", "a", "b", "c", "d", "e", "f", "t"]
    arcs = [
        ("e", "t", 20), ("f", "t", 20),
        ("a", "e", 2), ("b", "e", 3), ("c", "f", 4), ("d", "f", 1),
        ("s", "a", 4), ("s", "b", 8), ("s", "c", 5), ("s", "d", 3),
    ]
    return augment_super_terminals(nodes, arcs)


def single_arc_network(cap: int = 7) -> Network:
    return augment_super_terminals(["s", "t"], [("s", "t", cap)])


def relaxation_witness() -> Instance:
    """One job (release 0, duration 10, deadline 29) on the only arc, horizon 30."""
    return Instance(single_arc_network(7), 30, (MaintenanceRequest(0, 1, 0, 29, 10),))
