"""Benders cuts from min-cut duals, bottleneck pre-cuts and cut-set checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .exceptions import ContractViolation, ValidationError
from .network import (ArcConfiguration, FlowSolution, Network, max_flow, max_flow_capacities,
                      sink_reachable)

ALL = "all"


@dataclass(frozen=True)
class BendersCut:
    """``theta_t <= sum(coeff * y_{arc,t})`` for ``t == time`` or every t.

    ``time`` is an integer period or :data:`ALL`.
    """

    time: object
    terms: tuple[tuple[int, int], ...]

    @property
    def support(self) -> frozenset[int]:
        return frozenset(a for a, _ in self.terms)

    def bound(self, config) -> int:
        """Right-hand side under ``config`` (an ArcConfiguration or 0/1 sequence)."""
        if isinstance(config, ArcConfiguration):
            return sum(c for a, c in self.terms if config.is_open(a))
        return sum(c * config[a] for a, c in self.terms)

    def applies_to(self, t: int) -> bool:
        return self.time == ALL or self.time == t

    def to_dict(self) -> dict:
        return {"t": self.time, "terms": [{"arc": a, "coeff": c} for a, c in self.terms]}

    @classmethod
    def from_dict(cls, doc: dict) -> "BendersCut":
        t = doc["t"]
        if t != ALL and not isinstance(t, int):
            raise ValidationError("cut field 't' must be an integer or \"all\"")
        return cls(t, tuple((int(x["arc"]), int(x["coeff"])) for x in doc["terms"]))

    def __str__(self):
        rhs = " + ".join(f"{c}*y[{a}]" for a, c in self.terms) or "0"
        scope = "t" if self.time == ALL else str(self.time)
        return f"theta[{scope}] <= {rhs}"


def cut_from_duals(t, flow: FlowSolution, net: Network) -> Optional[BendersCut]:
    """Cut over the dual support of ``flow``; tight at the generating point.

    Returns ``None`` when the support is empty, which only happens when the
    network has no source-sink path at all (the cut would read
    ``theta <= 0`` and the flow box already says so).
    """
    terms = tuple((a, net.arcs[a].cap) for a, u in enumerate(flow.duals) if u)
    if not terms:
        if flow.value > 0:
            raise ContractViolation("empty dual support with positive flow")
        return None
    return BendersCut(t, terms)


def pre_cuts(net: Network, max_iter: int | None = None) -> list[BendersCut]:
    """Bottleneck cuts valid for every period.

    Solve the all-open flow, record a cut over its dual support, lift every
    support arc to ``Cap_0 + 1`` and repeat until arc 0 is the bottleneck.
    Coefficients always use the original capacities.
    """
    caps = list(net.capacities)
    lift = caps[0] + 1
    cuts = []
    limit = net.n_arcs if max_iter is None else max_iter
    for _ in range(limit + 1):
        sol = max_flow_capacities(net, caps)
        if sol.duals[0]:
            return cuts
        support = sol.support
        if not support:
            return cuts
        cuts.append(BendersCut(ALL, tuple((a, net.arcs[a].cap) for a in support)))
        for a in support:
            caps[a] = lift
    raise ContractViolation("pre-cut loop did not reach the total-flow arc")


def is_simple_cutset(net: Network, arcs) -> bool:
    """True iff ``arcs`` blocks every source-sink path and no proper arc can be dropped.

    Paths use arcs of positive capacity only.
    """
    arcs = set(arcs)
    if 0 in arcs:
        raise ValidationError("arc 0 cannot be part of a cut-set query")
    if sink_reachable(net, arcs):
        return False
    if not arcs:
        return False
    return all(sink_reachable(net, arcs - {a}) for a in arcs)


def cut_is_valid(net: Network, cut: BendersCut, config: ArcConfiguration) -> bool:
    return max_flow(net, config).value <= cut.bound(config)
