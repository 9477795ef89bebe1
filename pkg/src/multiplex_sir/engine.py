"""Microscopic Markov chain evolution of the coupled awareness/epidemic SIR.

Each node carries a probability vector over joint states ``XY`` where ``X``
is its awareness state in layer A and ``Y`` its epidemic state in layer B.
With immunization three extra states ``SV``, ``IV``, ``RV`` hold nodes whose
layer-B state is immunized; they only move through the awareness process.
"""

import dataclasses
import enum
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, KernelError

CLOSURE_TOL = 1e-12
CLAMP_TOL = 1e-12
DRIFT_LIMIT = 1e-8


class JointState(enum.IntEnum):
    """Joint (layer A, layer B) state. ``V`` marks an immunized layer-B state."""

    SS = 0
    SI = 1
    SR = 2
    IS = 3
    II = 4
    IR = 5
    RS = 6
    RI = 7
    RR = 8
    SV = 9
    IV = 10
    RV = 11

    @property
    def label(self):
        a, b = self.name
        return f"{a}_A{'I′' if b == 'V' else b}_B"


BASE_STATES = tuple(JointState)[:9]
ALL_STATES = tuple(JointState)

_AWARE = [JointState.IS, JointState.II, JointState.IR]
_AWARE_IMMUNIZED = _AWARE + [JointState.IV]
_INFECTED = [JointState.SI, JointState.II, JointState.RI]
_RECOVERED_B = [JointState.SR, JointState.IR, JointState.RR]
_UNAWARE = [JointState.SS, JointState.SI, JointState.SR]
_UNAWARE_IMMUNIZED = _UNAWARE + [JointState.SV]
_IMMUNIZED = [JointState.SV, JointState.IV, JointState.RV]


def n_states(immunized):
    return 12 if immunized else 9


def _mask(states, size):
    m = np.zeros(size)
    m[list(states)] = 1.0
    return m


_MASKS = {
    size: {
        "aware": _mask(_AWARE_IMMUNIZED if size == 12 else _AWARE, size),
        "infected": _mask(_INFECTED, size),
        "recovered_b": _mask(_RECOVERED_B, size),
        "unaware": _mask(_UNAWARE_IMMUNIZED if size == 12 else _UNAWARE, size),
    }
    for size in (9, 12)
}


@dataclass(frozen=True)
class ModelParams:
    """Rates of the coupled process plus run controls.

    ``gamma`` multiplies ``beta_b`` for aware (and aware-recovered) nodes, so
    ``gamma=0`` is full protection and ``gamma=1`` none. ``kappa`` is the
    chance that an infected, unaware node becomes aware on its own.
    """

    beta_a: float = 0.5
    beta_b: float = 0.5
    delta_a: float = 1.0
    delta_b: float = 1.0
    gamma: float = 0.5
    kappa: float = 0.5
    convergence_tol: float = 1e-9
    max_steps: int = 100_000

    RATES = ("beta_a", "beta_b", "delta_a", "delta_b", "gamma", "kappa")

    def __post_init__(self):
        for name in self.RATES:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ConfigurationError(f"must lie in [0, 1], got {value!r}", name)
        if not self.convergence_tol > 0:
            raise ConfigurationError("must be positive", "convergence_tol")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ConfigurationError("must be a positive integer", "max_steps")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class InitialCondition:
    """Nodes infected in layer B at t=0; they start unaware unless ``seed_aware``."""

    seed_nodes: tuple
    seed_aware: bool = False

    def __post_init__(self):
        nodes = tuple(sorted({int(i) for i in self.seed_nodes}))
        if not nodes:
            raise ConfigurationError("at least one seed node is required", "seed_nodes")
        object.__setattr__(self, "seed_nodes", nodes)

    def check(self, n):
        if self.seed_nodes[0] < 0 or self.seed_nodes[-1] >= n:
            raise ConfigurationError(f"seed nodes must lie in 0..{n - 1}", "seed_nodes")


@dataclass
class ExposureProbabilities:
    """Per-node probabilities of *escaping* each kind of transmission in one step.

    q     -- not informed by any layer-A neighbor
    q_sa  -- not infected by any layer-B neighbor, if unaware
    q_ia  -- not infected by any layer-B neighbor, if aware
    """

    q: np.ndarray
    q_sa: np.ndarray
    q_ia: np.ndarray


@dataclass
class JointStateDistribution:
    """``p[i, s]`` is the probability that node ``i`` is in joint state ``s``."""

    p: np.ndarray

    @classmethod
    def initial(cls, n, init, plan=None):
        """Product-form start: seeds at ``SI`` (or ``II``), immunized nodes at ``SV``,
        everyone else at ``SS``. Any plan (even an empty one) switches on the
        12-state layout."""
        init.check(n)
        immunized = plan is not None
        p = np.zeros((n, n_states(immunized)))
        p[:, JointState.SS] = 1.0
        if immunized:
            nodes = np.asarray(plan.nodes, dtype=np.int64)
            if np.isin(init.seed_nodes, nodes).any():
                raise ConfigurationError("a seed node is immunized", "seed_nodes")
            p[nodes] = 0.0
            p[nodes, JointState.SV] = 1.0
        seeds = list(init.seed_nodes)
        p[seeds] = 0.0
        p[seeds, JointState.II if init.seed_aware else JointState.SI] = 1.0
        return cls(p)

    @property
    def n(self):
        return self.p.shape[0]

    @property
    def immunized(self):
        return self.p.shape[1] == 12

    def copy(self):
        return JointStateDistribution(self.p.copy())

    def _marginal(self, name):
        return self.p @ _MASKS[self.p.shape[1]][name]

    def aware(self):
        return self._marginal("aware")

    def infected(self):
        return self._marginal("infected")

    def recovered_b(self):
        return self._marginal("recovered_b")

    def unaware(self):
        return self._marginal("unaware")

    def immunized_mass(self):
        if not self.immunized:
            return np.zeros(self.n)
        return self.p[:, _IMMUNIZED].sum(axis=1)

    def infectious_mass(self):
        return float(self.aware().sum() + self.infected().sum())

    def to_csv(self, path):
        states = ALL_STATES[:self.p.shape[1]]
        lines = ["node,state,probability"]
        for i, row in enumerate(self.p):
            lines.extend(f"{i},{s.name},{float(v)!r}" for s, v in zip(states, row))
        write_text_atomic(path, "\n".join(lines) + "\n")


def write_text_atomic(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def neighbor_products(layer, factors):
    """``out[i] = prod(factors[k] for k in i's neighbor slots)``, in neighbor order.

    ``factors`` is aligned with ``layer.indices``. Nodes without neighbors get 1.
    """
    out = np.ones(layer.n)
    degrees = layer.degrees()
    has = degrees > 0
    if has.any():
        out[has] = np.multiply.reduceat(factors, layer.indptr[:-1][has])
    return out


def exposures_from_marginals(net, aware, infected, params):
    """Escape probabilities given per-node aware and infected probabilities.

    Works equally for MMCA marginals and for 0/1 indicators of a realization.
    """
    a, b = net.layer_a, net.layer_b
    q = neighbor_products(a, 1.0 - params.beta_a * aware[a.indices])
    p_inf = infected[b.indices]
    q_sa = neighbor_products(b, 1.0 - params.beta_b * p_inf)
    q_ia = neighbor_products(b, 1.0 - params.gamma * params.beta_b * p_inf)
    return ExposureProbabilities(q, q_sa, q_ia)


def compute_exposures(net, dist, params):
    return exposures_from_marginals(net, dist.aware(), dist.infected(), params)


def kernel(q, q_sa, q_ia, params, immunized=False):
    """Transition probabilities in node-last layout: ``K[from, to, node]``.

    Off-diagonal entries are the listed outgoing probabilities; each diagonal
    entry is the complement of its row. Raises ``KernelError`` if a complement
    leaves ``[-1e-12, 1 + 1e-12]``.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    q_sa = np.broadcast_to(np.asarray(q_sa, dtype=float), q.shape)
    q_ia = np.broadcast_to(np.asarray(q_ia, dtype=float), q.shape)
    da, db, k = params.delta_a, params.delta_b, params.kappa
    S = JointState
    K = np.zeros((n_states(immunized),) * 2 + q.shape)

    informed = 1.0 - q
    hit_unaware = q * (1.0 - q_sa)
    K[S.SS, S.SI] = hit_unaware * (1.0 - k)
    K[S.SS, S.IS] = informed * q_ia
    # the second term uses the aware escape probability q_ia, as written
    K[S.SS, S.II] = hit_unaware * k + informed * (1.0 - q_ia)

    not_aware = q * (1.0 - k)
    K[S.SI, S.SR] = not_aware * db
    K[S.SI, S.II] = (1.0 - not_aware) * (1.0 - db)
    K[S.SI, S.IR] = (1.0 - not_aware) * db

    K[S.SR, S.IR] = informed

    K[S.IS, S.II] = (1.0 - da) * (1.0 - q_ia) + da * (1.0 - q_ia) * k
    K[S.IS, S.RS] = da * q_ia
    K[S.IS, S.RI] = da * (1.0 - q_ia) * (1.0 - k)

    K[S.II, S.IR] = (1.0 - da) * db
    K[S.II, S.RI] = da * (1.0 - db) * (1.0 - k)
    K[S.II, S.RR] = da * db

    K[S.IR, S.RR] = da

    K[S.RS, S.II] = (1.0 - q_ia) * k
    K[S.RS, S.RI] = (1.0 - q_ia) * (1.0 - k)

    K[S.RI, S.II] = (1.0 - db) * k
    K[S.RI, S.RR] = db

    if immunized:
        K[S.SV, S.IV] = informed
        K[S.IV, S.RV] = da

    stay = 1.0 - K.sum(axis=1)
    lo, hi = stay.min(), stay.max()
    if lo < -CLOSURE_TOL or hi > 1.0 + CLOSURE_TOL:
        raise KernelError(f"self-transition probability out of range [{lo:.3e}, {hi:.3e}]")
    idx = np.arange(K.shape[0])
    K[idx, idx] = stay
    return K


def transition_matrix(q, q_sa, q_ia, params, immunized=False):
    """Per-node one-step transition matrices, shape ``(m, S, S)``."""
    return np.moveaxis(kernel(q, q_sa, q_ia, params, immunized), -1, 0)


def transition_row(state, q, q_sa, q_ia, params):
    """Successor distribution of a single node in ``state`` (length 9 or 12)."""
    state = JointState(state)
    K = kernel(q, q_sa, q_ia, params, immunized=state >= JointState.SV)
    return K[state, :, 0].copy()


def _check_distribution(p):
    lo, hi = p.min(), p.max()
    if lo < -DRIFT_LIMIT or hi > 1.0 + DRIFT_LIMIT:
        raise KernelError(f"probability drifted to [{lo:.3e}, {hi:.3e}]")
    if lo < -CLAMP_TOL or hi > 1.0 + CLAMP_TOL:
        np.clip(p, 0.0, 1.0, out=p)
    drift = np.abs(p @ np.ones(p.shape[1]) - 1.0).max()
    if drift > DRIFT_LIMIT:
        raise KernelError(f"row normalization off by {drift:.3e}")


def mmca_step(net, dist, params):
    """One synchronous update; returns a new distribution (input untouched).

    The 9- or 12-state layout of ``dist`` selects base or immunized mode.
    """
    ex = compute_exposures(net, dist, params)
    K = kernel(ex.q, ex.q_sa, ex.q_ia, params, immunized=dist.immunized)
    # node-last contraction is markedly faster than "ns,stn->nt"
    p = np.einsum("sn,stn->tn", np.ascontiguousarray(dist.p.T), K).T
    _check_distribution(p)
    return JointStateDistribution(p)


@dataclass(frozen=True)
class SteadyStateSummary:
    s_b: float
    s_a: float
    steps_taken: int
    converged: bool
    residual_at_stop: float


def summarize(dist, steps, converged, residual):
    n = dist.n
    return SteadyStateSummary(
        s_b=float(dist.recovered_b().sum() / n),
        s_a=float(1.0 - dist.unaware().sum() / n),
        steps_taken=int(steps),
        converged=bool(converged),
        residual_at_stop=float(residual),
    )


def run_to_steady_state(net, params, init, plan=None, callback=None):
    """Iterate until total infectious mass drops below ``convergence_tol``.

    Stops after ``max_steps`` otherwise, with ``converged=False``. Passing a
    plan runs the 12-state immunized mode. ``callback(t, dist)`` sees every
    distribution including t=0. Returns ``(summary, final_distribution)``.
    """
    dist = JointStateDistribution.initial(net.n, init, plan)
    steps = 0
    residual = dist.infectious_mass()
    if callback is not None:
        callback(0, dist)
    while residual >= params.convergence_tol and steps < params.max_steps:
        dist = mmca_step(net, dist, params)
        steps += 1
        residual = dist.infectious_mass()
        if callback is not None:
            callback(steps, dist)
    converged = residual < params.convergence_tol
    return summarize(dist, steps, converged, residual), dist
