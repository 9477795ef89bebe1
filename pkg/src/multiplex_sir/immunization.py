"""Random and degree-targeted immunization of the physical layer."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .seeding import rng

STRATEGIES = ("random", "targeted")


@dataclass(frozen=True)
class ImmunizationPlan:
    """Immunized nodes plus the non-immunized node chosen to carry the infection."""

    nodes: tuple
    strategy: str
    v: float
    seed: int
    infection_seed: int

    @property
    def size(self):
        return len(self.nodes)


def immunized_count(v, n):
    if not 0.0 <= v <= 1.0:
        raise ConfigurationError(f"must lie in [0, 1], got {v!r}", "v")
    k = int(np.floor(v * n + 0.5))
    if k >= n:
        raise ConfigurationError("immunizing every node leaves nobody to infect", "v")
    return k


def targeted_order(layer):
    """Nodes by layer degree descending, ties broken by ascending index."""
    degrees = layer.degrees()
    return np.lexsort((np.arange(layer.n), -degrees))


def plan_from_count(net, strategy, k, seed):
    """Plan immunizing exactly ``k`` nodes.

    One seeded permutation drives both choices: ``random`` immunizes its first
    ``k`` entries, and the infection seed is the last entry not immunized.
    Plans for growing ``k`` are therefore nested and, under ``random``, share
    the same infection seed.
    """
    n = net.n
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}", "strategy")
    if not 0 <= k < n:
        raise ConfigurationError(f"immunized count must lie in 0..{n - 1}", "v")
    perm = rng(seed).permutation(n)
    if strategy == "random":
        chosen = perm[:k]
    else:
        chosen = targeted_order(net.layer_b)[:k]
    mask = np.zeros(n, bool)
    mask[chosen] = True
    candidates = perm[~mask[perm]]
    return ImmunizationPlan(
        nodes=tuple(sorted(chosen.tolist())),
        strategy=strategy,
        v=k / n,
        seed=int(seed),
        infection_seed=int(candidates[-1]),
    )


def apply_immunization(net, strategy, v, seed=0):
    """Immunize ``round(v * n)`` nodes of layer B by ``strategy``."""
    return plan_from_count(net, strategy, immunized_count(v, net.n), seed)
