"""Epidemic and immunization thresholds, and outbreak-size phase diagrams."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .engine import InitialCondition, run_to_steady_state
from .errors import ConfigurationError, NonMonotoneError
from .immunization import STRATEGIES, plan_from_count
from .seeding import derive_seed

SWEEP_PARAMETERS = ("beta_b", "v")
AXIS_PARAMETERS = ("beta_a", "beta_b", "delta_a", "delta_b", "delta", "gamma", "kappa")
CELL_VALUES = ("s_b", "beta_bc", "v_c_random", "v_c_targeted")

# flags reported with a threshold estimate
BRACKETED = "bracketed"
BELOW_BRACKET = "below-bracket"    # criterion already met at the low end
ABOVE_BRACKET = "above-bracket"    # criterion never met, even at the high end


@dataclass(frozen=True)
class ThresholdQuery:
    sweep_parameter: str = "beta_b"
    outbreak_criterion: float = 0.01
    bisection_tol: float = 1e-3
    lo: float = 0.0
    hi: float = 1.0
    strategy_draws: int = 10

    def __post_init__(self):
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ConfigurationError(f"unknown sweep parameter {self.sweep_parameter!r}",
                                     "sweep_parameter")
        if not 0.0 < self.outbreak_criterion < 1.0:
            raise ConfigurationError("must lie in (0, 1)", "outbreak_criterion")
        if not self.bisection_tol > 0:
            raise ConfigurationError("must be positive", "bisection_tol")
        if not 0.0 <= self.lo < self.hi:
            raise ConfigurationError("bracket needs 0 <= lo < hi", "bracket")
        if self.strategy_draws < 1:
            raise ConfigurationError("must be >= 1", "strategy_draws")


@dataclass(frozen=True)
class ThresholdResult:
    """Estimate plus the final bracket and the outbreak sizes at its ends.

    ``monotone`` is False if some interior probe fell outside the sizes at
    the bracket ends (the search still completes).
    """

    estimate: float
    lo: float
    hi: float
    s_lo: float
    s_hi: float
    flag: str = BRACKETED
    evaluations: int = 0
    converged: bool = True
    monotone: bool = True


def epidemic_threshold(net, params, init, query=ThresholdQuery()):
    """Smallest ``beta_b`` whose outbreak size reaches the criterion, by bisection.

    Assumes outbreak size grows with ``beta_b``. Returns the midpoint of a
    final bracket no wider than ``bisection_tol``.
    """
    theta = query.outbreak_criterion
    calls = {"n": 0, "converged": True}

    def size(beta_b):
        summary, _ = run_to_steady_state(net, params.replace(beta_b=beta_b), init)
        calls["n"] += 1
        calls["converged"] &= summary.converged
        return summary.s_b

    lo, hi = query.lo, query.hi
    s_lo, s_hi = size(lo), size(hi)
    monotone = True

    def done(flag, est):
        return ThresholdResult(est, lo, hi, s_lo, s_hi, flag, calls["n"],
                               calls["converged"], monotone)

    if s_lo >= theta and s_hi < theta:
        raise NonMonotoneError(
            f"outbreak size falls from {s_lo:.4g} at beta_b={lo} to {s_hi:.4g} at {hi}")
    if s_lo >= theta:
        return done(BELOW_BRACKET, lo)
    if s_hi < theta:
        return done(ABOVE_BRACKET, hi)
    while hi - lo > query.bisection_tol:
        mid = 0.5 * (lo + hi)
        s_mid = size(mid)
        if not s_lo - 1e-12 <= s_mid <= s_hi + 1e-12:
            monotone = False
        if s_mid >= theta:
            hi, s_hi = mid, s_mid
        else:
            lo, s_lo = mid, s_mid
    return done(BRACKETED, 0.5 * (lo + hi))


def _mean_outbreak(net, params, strategy, k, draws, seed):
    """Outbreak size with ``k`` immunized nodes, averaged over plan draws."""
    sizes, ok = [], True
    for d in range(draws):
        plan = plan_from_count(net, strategy, k, derive_seed(seed, d))
        summary, _ = run_to_steady_state(net, params, InitialCondition((plan.infection_seed,)),
                                         plan)
        sizes.append(summary.s_b)
        ok &= summary.converged
    return float(np.mean(sizes)), ok


def immunization_threshold(net, params, strategy, query=None, seed=0):
    """Smallest immunized fraction that keeps the outbreak below the criterion.

    The immunized count is bisected over ``0..n-1`` at a resolution of
    ``max(1/n, bisection_tol)``. Outbreak sizes are averaged over
    ``query.strategy_draws`` plan draws; draw ``d`` uses plan seed
    ``derive_seed(seed, d)``. For targeted plans the immunized set is fixed
    and the draws only move the infection seed.
    """
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown strategy {strategy!r}", "strategy")
    query = query or ThresholdQuery(sweep_parameter="v")
    theta = query.outbreak_criterion
    n = net.n
    draws = query.strategy_draws
    step = max(1, int(math.ceil(query.bisection_tol * n - 1e-9)))
    state = {"n": 0, "converged": True}

    def size(k):
        s, ok = _mean_outbreak(net, params, strategy, k, draws, seed)
        state["n"] += 1
        state["converged"] &= ok
        return s

    lo, hi = 0, n - 1
    s_lo, s_hi = size(lo), size(hi)
    monotone = True

    def done(flag, est):
        return ThresholdResult(est, lo / n, hi / n, s_lo, s_hi, flag, state["n"],
                               state["converged"], monotone)

    if s_lo < theta and s_hi >= theta:
        raise NonMonotoneError(
            f"outbreak size rises from {s_lo:.4g} with no immunization to {s_hi:.4g} "
            f"with {hi} of {n} nodes immunized")
    if s_lo < theta:
        return done(BELOW_BRACKET, 0.0)
    if s_hi >= theta:
        return done(ABOVE_BRACKET, 1.0)
    while hi - lo > step:
        mid = (lo + hi) // 2
        s_mid = size(mid)
        if not s_hi - 1e-12 <= s_mid <= s_lo + 1e-12:
            monotone = False
        if s_mid < theta:
            hi, s_hi = mid, s_mid
        else:
            lo, s_lo = mid, s_mid
    return done(BRACKETED, hi / n)


def spectral_radius(layer, tol=1e-12, max_iter=100_000):
    """Leading adjacency eigenvalue by power iteration.

    Iterates on ``A + I`` so that bipartite components, whose spectrum is
    symmetric, cannot make the iteration oscillate.
    """
    if layer.n_edges == 0:
        return 0.0
    A = layer.csr
    x = np.ones(layer.n) / math.sqrt(layer.n)
    lam = 0.0
    for _ in range(max_iter):
        y = A @ x + x
        new = float(np.linalg.norm(y))
        y /= new
        if abs(new - lam) < tol * new:
            lam = new
            break
        x, lam = y, new
    return lam - 1.0


def with_axis(params, name, value):
    if name == "delta":
        return params.replace(delta_a=value, delta_b=value)
    if name not in AXIS_PARAMETERS:
        raise ConfigurationError(f"cannot sweep {name!r}", "axis")
    return params.replace(**{name: value})


@dataclass
class PhaseDiagram:
    axis1: str
    grid1: list
    axis2: str
    grid2: list
    value: str
    cells: np.ndarray          # shape (len(grid1), len(grid2))
    converged: np.ndarray      # same shape, bool
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for i, x in enumerate(self.grid1):
            for j, y in enumerate(self.grid2):
                yield x, y, float(self.cells[i, j]), bool(self.converged[i, j])

    def to_csv_text(self):
        lines = ["axis1,axis2,value,converged"]
        lines.extend(f"{x!r},{y!r},{v!r},{str(c).lower()}" for x, y, v, c in self.rows())
        return "\n".join(lines) + "\n"


def _cell(job):
    net, params, init, value, query, plan_seed = job
    if value == "s_b":
        summary, _ = run_to_steady_state(net, params, init)
        return summary.s_b, summary.converged
    if value == "beta_bc":
        res = epidemic_threshold(net, params, init, query)
    else:
        strategy = value.rsplit("_", 1)[1]
        res = immunization_threshold(net, params, strategy, query, seed=plan_seed)
    return res.estimate, res.converged and res.flag == BRACKETED


def sweep_phase_diagram(net, axis1, grid1, axis2, grid2, params, init, value="s_b",
                        query=None, plan_seed=0, workers=1):
    """Evaluate ``value`` on every ``(axis1, axis2)`` grid point.

    Every cell uses the same network, initial condition and plan seed.
    Cells whose run did not converge (or whose threshold was not bracketed)
    are flagged in ``converged``; the sweep carries on.
    """
    if value not in CELL_VALUES:
        raise ConfigurationError(f"unknown cell value {value!r}", "value")
    if query is None:
        query = ThresholdQuery(sweep_parameter="v" if value.startswith("v_c") else "beta_b")
    grid1 = [float(x) for x in grid1]
    grid2 = [float(y) for y in grid2]
    jobs = []
    for x in grid1:
        for y in grid2:
            p = with_axis(with_axis(params, axis1, x), axis2, y)
            jobs.append((net, p, init, value, query, plan_seed))
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, jobs))
    else:
        results = [_cell(job) for job in jobs]
    shape = (len(grid1), len(grid2))
    cells = np.array([r[0] for r in results], dtype=float).reshape(shape)
    converged = np.array([r[1] for r in results], dtype=bool).reshape(shape)
    return PhaseDiagram(axis1, grid1, axis2, grid2, value, cells, converged)
