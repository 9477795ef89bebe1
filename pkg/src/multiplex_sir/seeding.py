"""Seed derivation.

Every random stream in the package hangs off a single integer through
``numpy.random.SeedSequence(seed, spawn_key=keys)``. The spawn keys used by
the experiment runner are fixed:

    (0,)  layer A graph
    (1,)  layer B graph
    (2,)  infection seed nodes
    (3,)  immunization plans (draw ``d`` uses ``derive_seed(plan_seed, d)``)
    (4,)  Monte Carlo ensemble (run ``r`` uses spawn key ``(r,)`` below it)
"""

import numpy as np

LAYER_A = 0
LAYER_B = 1
INFECTION_SEEDS = 2
IMMUNIZATION = 3
MONTE_CARLO = 4


def derive_seed(seed, *keys):
    """Return a 63-bit integer seed for the stream ``keys`` below ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def rng(seed, *keys):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))
