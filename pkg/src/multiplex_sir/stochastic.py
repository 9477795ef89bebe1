"""Discrete-time Monte Carlo of the same joint-state machine.

Used to cross-check the MMCA engine. Every step computes escape
probabilities from the realized (0/1) neighbor states and then draws each
node's successor from its full transition row.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import (JointStateDistribution, _AWARE_IMMUNIZED, _INFECTED,
                     _RECOVERED_B, _UNAWARE_IMMUNIZED, kernel,
                     write_text_atomic)

_IS_AWARE = np.isin(np.arange(12), _AWARE_IMMUNIZED)
_IS_INFECTED = np.isin(np.arange(12), _INFECTED)
_IS_RECOVERED_B = np.isin(np.arange(12), _RECOVERED_B)
_IS_UNAWARE = np.isin(np.arange(12), _UNAWARE_IMMUNIZED)

EXTINCTION_NODES = 5
CHUNK = 1 << 15


@dataclass
class Realization:
    node_states: np.ndarray
    rng_seed: int
    steps: int
    infectious_counts: list
    s_a: float
    s_b: float


@dataclass(frozen=True)
class EnsembleSummary:
    runs: int
    s_b_mean: float
    s_b_std: float
    s_a_mean: float
    s_a_std: float
    fraction_extinct: float
    s_b_mean_outbreak: float  # mean over runs that did not go extinct (nan if none)


def initial_states(n, init, plan=None):
    """Hard-assigned states matching ``JointStateDistribution.initial``."""
    dist = JointStateDistribution.initial(n, init, plan)
    return dist.p.argmax(axis=1).astype(np.int64)


def realized_exposures(net, batch, params):
    """Escape probabilities for hard states ``batch`` of shape ``(runs, n)``.

    With 0/1 neighbor indicators the neighbor products collapse to powers of
    the number of active neighbors.
    """
    aware = _IS_AWARE[batch].astype(float)
    infected = _IS_INFECTED[batch].astype(float)
    a_count = np.asarray(net.layer_a.csr @ aware.T).T
    b_count = np.asarray(net.layer_b.csr @ infected.T).T
    q = (1.0 - params.beta_a) ** a_count
    q_sa = (1.0 - params.beta_b) ** b_count
    q_ia = (1.0 - params.gamma * params.beta_b) ** b_count
    return q, q_sa, q_ia


def sample_successors(net, states, params, generator):
    """One synchronous step for one realization ``(n,)`` or a batch ``(runs, n)``."""
    states = np.asarray(states, dtype=np.int64)
    batch = np.atleast_2d(states)
    q, q_sa, q_ia = (x.ravel() for x in realized_exposures(net, batch, params))
    flat = batch.ravel()
    out = np.empty_like(flat)
    for lo in range(0, flat.size, CHUNK):
        sl = slice(lo, lo + CHUNK)
        K = kernel(q[sl], q_sa[sl], q_ia[sl], params, immunized=True)
        probs = K[flat[sl], :, np.arange(K.shape[2])]
        out[sl] = _draw(probs, generator)
    return out.reshape(states.shape)


def _draw(probs, generator):
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1:]
    u = generator.random(probs.shape[0])
    return (u[:, None] < cum).argmax(axis=1)


def _active(states):
    return _IS_AWARE[states].any() or _IS_INFECTED[states].any()


def _evolve(net, params, states, generator, limit):
    counts = [int(_IS_INFECTED[states].sum())]
    steps = 0
    while _active(states) and steps < limit:
        states = sample_successors(net, states, params, generator)
        steps += 1
        counts.append(int(_IS_INFECTED[states].sum()))
    return states, steps, counts


def evolve_batch(net, params, states, generator, steps=None):
    """Advance a ``(runs, n)`` batch from one shared generator.

    Runs ``steps`` synchronous steps, or until no run has an active node when
    ``steps`` is None. Finished runs keep stepping harmlessly: with no aware or
    infected node every row is a point mass on the current state.
    """
    states = np.array(states, dtype=np.int64)
    t = 0
    while (steps is None and _active(states)) or (steps is not None and t < steps):
        states = sample_successors(net, states, params, generator)
        t += 1
    return states


def simulate_realization(net, params, init, plan=None, seed=0):
    """Run one stochastic realization until nobody is aware-active or infected.

    ``seed`` is an int or a ``SeedSequence``. ``infectious_counts[t]`` is the
    number of infected (layer B) nodes at step t, t=0 included. Always works
    in the 12-state layout; without a plan the immunized states stay empty.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    generator = np.random.Generator(np.random.PCG64(ss))
    states = initial_states(net.n, init, plan)
    states, steps, counts = _evolve(net, params, states, generator, params.max_steps)
    n = net.n
    return Realization(
        node_states=states,
        rng_seed=int(ss.entropy),
        steps=steps,
        infectious_counts=counts,
        s_a=float(1.0 - _IS_UNAWARE[states].sum() / n),
        s_b=float(_IS_RECOVERED_B[states].sum() / n),
    )


def run_seed(base_seed, r):
    """Seed of realization ``r``: ``SeedSequence(base_seed, spawn_key=(r,))``."""
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(r),))


def _one(args):
    net, params, init, plan, base_seed, r = args
    real = simulate_realization(net, params, init, plan, run_seed(base_seed, r))
    return real.s_a, real.s_b, real.steps


def run_ensemble_records(net, params, init, plan=None, runs=100, base_seed=0, workers=1):
    """Per-run ``(s_a, s_b, steps)`` tuples in run-index order."""
    jobs = [(net, params, init, plan, base_seed, r) for r in range(runs)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one, jobs, chunksize=max(1, runs // (4 * workers))))
    return [_one(job) for job in jobs]


def summarize_records(records, n):
    s_a = np.array([r[0] for r in records])
    s_b = np.array([r[1] for r in records])
    extinct = s_b <= EXTINCTION_NODES / n
    return EnsembleSummary(
        runs=len(records),
        s_b_mean=float(s_b.mean()),
        s_b_std=float(s_b.std()),
        s_a_mean=float(s_a.mean()),
        s_a_std=float(s_a.std()),
        fraction_extinct=float(extinct.mean()),
        s_b_mean_outbreak=float(s_b[~extinct].mean()) if (~extinct).any() else float("nan"),
    )


def run_ensemble(net, params, init, plan=None, runs=100, base_seed=0, workers=1):
    if runs < 1:
        raise ValueError("runs must be >= 1")
    records = run_ensemble_records(net, params, init, plan, runs, base_seed, workers)
    return summarize_records(records, net.n)


def write_runs_csv(records, path):
    lines = ["run,s_a,s_b,steps"]
    lines.extend(f"{r},{float(a)!r},{float(b)!r},{s}" for r, (a, b, s) in enumerate(records))
    write_text_atomic(path, "\n".join(lines) + "\n")
