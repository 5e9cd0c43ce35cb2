"""Memoised max-flow sub-problems keyed by arc configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from .network import ArcConfiguration, FlowSolution, Network, max_flow


@dataclass
class FlowCache:
    """Dictionary of solved configurations with solve/recall counters.

    One cache serves one network; the key is the packed configuration mask.
    Not thread-safe for insertion.
    """

    entries: dict = field(default_factory=dict)
    solved_count: int = 0
    recalled_count: int = 0

    def solve_or_recall(self, net: Network, config: ArcConfiguration) -> FlowSolution:
        sol = self.entries.get(config.bits)
        if sol is not None:
            self.recalled_count += 1
            return sol
        sol = max_flow(net, config)
        self.entries[config.bits] = sol
        self.solved_count += 1
        return sol

    @property
    def requests(self) -> int:
        return self.solved_count + self.recalled_count

    def __len__(self):
        return len(self.entries)

    def __contains__(self, config: ArcConfiguration):
        return config.bits in self.entries
